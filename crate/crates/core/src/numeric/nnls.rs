//! Lawson–Hanson active-set non-negative least squares.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Solve `min ||A x - b||₂` subject to `x >= 0`.
///
/// Returns `None` when the active-set loop exceeds `max_iter` outer
/// iterations.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> Option<NnlsSolution> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let tol = 10.0 * f64::EPSILON * scale * (a.nrows().max(n) as f64);

    let mut iterations = 0;
    loop {
        let r = b - a * &x;
        let w = a.transpose() * &r;
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;

        loop {
            iterations += 1;
            if iterations > max_iter {
                return None;
            }
            let z = solve_passive(a, b, &passive);
            let all_positive = (0..n).all(|k| !passive[k] || z[k] > 0.0);
            if all_positive {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for k in 0..n {
                if passive[k] && z[k] <= 0.0 {
                    let step = x[k] / (x[k] - z[k]);
                    alpha = alpha.min(step);
                }
            }
            for k in 0..n {
                if passive[k] {
                    x[k] += alpha * (z[k] - x[k]);
                    if x[k].abs() <= tol {
                        x[k] = 0.0;
                        passive[k] = false;
                    }
                }
            }
        }
    }
    let residual_norm = (b - a * &x).norm();
    Some(NnlsSolution {
        x,
        residual_norm,
        iterations,
    })
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&k| passive[k]).collect();
    let sub = DMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])]);
    let sol = sub
        .clone()
        .svd(true, true)
        .solve(b, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(idx.len()));
    let mut z = DVector::zeros(passive.len());
    for (c, &k) in idx.iter().enumerate() {
        z[k] = sol[c];
    }
    z
}
