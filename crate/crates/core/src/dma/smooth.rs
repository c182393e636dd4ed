//! P-spline smoothing (cubic B-splines plus a coefficient difference penalty).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{DmaCurve, DmaError};
use crate::numeric::{bspline, golden_section};

/// Smoother settings. `lambda: None` selects the penalty weight by
/// generalized cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmootherConfig {
    pub lambda: Option<f64>,
    pub penalty_order: usize,
    pub knot_stride: usize,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            penalty_order: 2,
            knot_stride: 3,
        }
    }
}

pub const MIN_POINTS: usize = 10;

const LOG_LAMBDA_MIN: f64 = -12.0;
const LOG_LAMBDA_MAX: f64 = 6.0;

struct Fit {
    fitted: DVector<f64>,
    trace: f64,
    rss: f64,
}

struct Problem {
    b: DMatrix<f64>,
    d: DMatrix<f64>,
    y: DVector<f64>,
}

impl Problem {
    fn solve(&self, lambda: f64, want_trace: bool) -> Result<Fit, DmaError> {
        let (n, nb) = self.b.shape();
        let nd = self.d.nrows();
        let sl = lambda.sqrt();
        let mut a = DMatrix::zeros(n + nd, nb);
        a.view_mut((0, 0), (n, nb)).copy_from(&self.b);
        if nd > 0 {
            a.view_mut((n, 0), (nd, nb)).copy_from(&(&self.d * sl));
        }
        let mut rhs = DVector::zeros(n + nd);
        rhs.rows_mut(0, n).copy_from(&self.y);

        let qr = a.qr();
        let r = qr.r();
        let rmax = r.diagonal().amax();
        if r.diagonal().iter().any(|v| v.abs() <= 1e-13 * rmax.max(1e-300)) {
            return Err(DmaError::SingularSystem("rank-deficient spline system".into()));
        }
        let qty = qr.q().transpose() * rhs;
        let coef = r
            .solve_upper_triangular(&qty)
            .ok_or_else(|| DmaError::SingularSystem("triangular solve failed".into()))?;
        let fitted = &self.b * coef;
        let rss = (&fitted - &self.y).norm_squared();
        let trace = if want_trace {
            // tr H = ‖B R⁻¹‖²_F
            let rt = r.transpose();
            let sol = rt
                .solve_lower_triangular(&self.b.transpose())
                .ok_or_else(|| DmaError::SingularSystem("triangular solve failed".into()))?;
            sol.norm_squared()
        } else {
            f64::NAN
        };
        Ok(Fit { fitted, trace, rss })
    }

    fn gcv(&self, log_lambda: f64) -> f64 {
        let n = self.y.len() as f64;
        match self.solve(10f64.powf(log_lambda), true) {
            Ok(f) if n - f.trace > 1e-6 => n * f.rss / (n - f.trace).powi(2),
            _ => f64::INFINITY,
        }
    }
}

/// Smooth the stresses of `curve` on its own strain abscissae.
pub fn smooth_pspline(curve: &DmaCurve, config: &SmootherConfig) -> Result<DmaCurve, DmaError> {
    let n = curve.len();
    if n < MIN_POINTS {
        return Err(DmaError::TooFewPoints {
            needed: MIN_POINTS,
            got: n,
        });
    }
    if curve.stress.len() != n {
        return Err(DmaError::InvalidCurve("strain and stress lengths differ".into()));
    }
    if let Some(l) = config.lambda {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(DmaError::InvalidConfig(format!("lambda must be >= 0, got {l}")));
        }
    }
    if config.knot_stride == 0 {
        return Err(DmaError::InvalidConfig("knot_stride must be >= 1".into()));
    }

    // Work on increasing abscissae.
    let reversed = curve.strain[n - 1] < curve.strain[0];
    let order: Vec<usize> = if reversed { (0..n).rev().collect() } else { (0..n).collect() };
    let xs: Vec<f64> = order.iter().map(|&i| curve.strain[i]).collect();
    let ys: Vec<f64> = order.iter().map(|&i| curve.stress[i]).collect();
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(DmaError::SingularSystem(
            "strain abscissae must be distinct and monotone".into(),
        ));
    }

    let nb = ((n - 1).div_ceil(config.knot_stride) + 1).clamp(bspline::ORDER, n);
    let sites: Vec<f64> = (0..nb)
        .map(|k| xs[((k * (n - 1)) as f64 / (nb - 1) as f64).round() as usize])
        .collect();
    let knots = bspline::averaged_knots(&sites);
    let problem = Problem {
        b: bspline::collocation(&knots, &xs),
        d: bspline::difference_matrix(nb, config.penalty_order),
        y: DVector::from_vec(ys),
    };

    let lambda = match config.lambda {
        Some(l) => l,
        None => {
            let steps = 36;
            let grid: Vec<f64> = (0..=steps)
                .map(|k| LOG_LAMBDA_MIN + (LOG_LAMBDA_MAX - LOG_LAMBDA_MIN) * k as f64 / steps as f64)
                .collect();
            let scores: Vec<f64> = grid.iter().map(|&g| problem.gcv(g)).collect();
            let best = (0..grid.len())
                .min_by(|&a, &b| scores[a].total_cmp(&scores[b]))
                .unwrap_or(0);
            if !scores[best].is_finite() {
                return Err(DmaError::SingularSystem("no admissible smoothing parameter".into()));
            }
            let h = (LOG_LAMBDA_MAX - LOG_LAMBDA_MIN) / steps as f64;
            let lo = (grid[best] - h).max(LOG_LAMBDA_MIN);
            let hi = (grid[best] + h).min(LOG_LAMBDA_MAX);
            let (g, score) = golden_section(|g| problem.gcv(g), lo, hi, 40);
            10f64.powf(if score <= scores[best] { g } else { grid[best] })
        }
    };

    let fit = problem.solve(lambda, false)?;
    let mut stress = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        stress[i] = fit.fitted[k].max(0.0);
    }
    Ok(DmaCurve {
        strain: curve.strain.clone(),
        stress,
        kind: curve.kind,
        temperature_c: curve.temperature_c,
        sample_id: curve.sample_id.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dma::CurveKind;

    fn ramp(n: usize) -> DmaCurve {
        let strain: Vec<f64> = (0..n).map(|i| (i as f64 * 0.01).powf(1.3)).collect();
        let stress: Vec<f64> = strain.iter().map(|e| 0.8 * e - 0.5 * e * e + 0.3 * (7.0 * e).sin().abs()).collect();
        DmaCurve::new(strain, stress, CurveKind::Loading)
    }

    #[test]
    fn too_few_points() {
        let c = ramp(9);
        assert!(matches!(
            smooth_pspline(&c, &SmootherConfig::default()),
            Err(DmaError::TooFewPoints { needed: 10, got: 9 })
        ));
    }

    #[test]
    fn duplicate_strain_is_singular() {
        let mut c = ramp(12);
        c.strain[5] = c.strain[4];
        assert!(matches!(
            smooth_pspline(&c, &SmootherConfig::default()),
            Err(DmaError::SingularSystem(_))
        ));
    }

    #[test]
    fn interpolation_limit_reproduces_data() {
        let c = ramp(25);
        let cfg = SmootherConfig {
            lambda: Some(0.0),
            penalty_order: 2,
            knot_stride: 1,
        };
        let s = smooth_pspline(&c, &cfg).unwrap();
        for (a, b) in s.stress.iter().zip(&c.stress) {
            assert!((a - b).abs() < 1e-9);
        }
        let ss = smooth_pspline(&s, &cfg).unwrap();
        for (a, b) in ss.stress.iter().zip(&s.stress) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn decreasing_abscissae_are_handled() {
        let c = ramp(20);
        let mut r = c.clone();
        r.strain.reverse();
        r.stress.reverse();
        r.kind = CurveKind::Unloading;
        let cfg = SmootherConfig {
            lambda: Some(1e-3),
            ..Default::default()
        };
        let a = smooth_pspline(&c, &cfg).unwrap();
        let mut b = smooth_pspline(&r, &cfg).unwrap();
        b.stress.reverse();
        for (x, y) in a.stress.iter().zip(&b.stress) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_lambda_rejected() {
        let cfg = SmootherConfig {
            lambda: Some(-1.0),
            ..Default::default()
        };
        assert!(matches!(smooth_pspline(&ramp(12), &cfg), Err(DmaError::InvalidConfig(_))));
    }

    #[test]
    fn config_json_keys() {
        let cfg: SmootherConfig = serde_json::from_str(r#"{"lambda": null, "penalty_order": 3, "knot_stride": 2}"#).unwrap();
        assert_eq!(cfg.lambda, None);
        assert_eq!(cfg.penalty_order, 3);
        let cfg: SmootherConfig = serde_json::from_str(r#"{"lambda": 0.5}"#).unwrap();
        assert_eq!(cfg.knot_stride, 3);
    }
}
