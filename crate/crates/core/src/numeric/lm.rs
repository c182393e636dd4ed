//! Levenberg–Marquardt for small dense least-squares problems.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    pub max_iter: usize,
    pub fd_step: f64,
    pub tol: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            fd_step: 1e-7,
            tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmResult {
    pub params: DVector<f64>,
    pub initial_cost: f64,
    pub cost: f64,
    pub iterations: usize,
}

/// Minimise `½‖f(p)‖²` starting from `p0`. The Jacobian is taken by forward
/// differences. Non-finite residuals are treated as infinitely bad steps.
pub fn minimize<F>(mut f: F, p0: DVector<f64>, cfg: &LmConfig) -> LmResult
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    let cost_of = |r: &DVector<f64>| {
        let c = 0.5 * r.norm_squared();
        if c.is_finite() {
            c
        } else {
            f64::INFINITY
        }
    };
    let mut p = p0;
    let mut r = f(&p);
    let initial_cost = cost_of(&r);
    let mut cost = initial_cost;
    let mut mu = 1e-3;
    let mut iterations = 0;
    let n = p.len();

    while iterations < cfg.max_iter && cost.is_finite() {
        iterations += 1;
        let mut jac = DMatrix::zeros(r.len(), n);
        for k in 0..n {
            let h = cfg.fd_step * p[k].abs().max(1.0);
            let mut pk = p.clone();
            pk[k] += h;
            let rk = f(&pk);
            jac.set_column(k, &((rk - &r) / h));
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        if g.amax() < cfg.tol {
            break;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += mu * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let trial = &p + &step;
            let rt = f(&trial);
            let ct = cost_of(&rt);
            if ct < cost {
                let rel = (cost - ct) / cost.max(1e-300);
                p = trial;
                r = rt;
                cost = ct;
                mu = (mu / 3.0).max(1e-12);
                improved = true;
                if rel < cfg.tol || step.amax() < cfg.tol {
                    return LmResult {
                        params: p,
                        initial_cost,
                        cost,
                        iterations,
                    };
                }
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    LmResult {
        params: p,
        initial_cost,
        cost,
        iterations,
    }
}
