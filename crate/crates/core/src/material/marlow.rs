//! Tabular uniaxial hyperelastic response fitted to the main loading curve.

use serde::{Deserialize, Serialize};

use super::MaterialError;
use crate::dma::DmaCurve;
use crate::numeric::interp::segment_index;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Linear,
    /// Fritsch–Carlson monotone cubic Hermite.
    MonotoneCubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarlowCurve {
    pub loading: DmaCurve,
    #[serde(default)]
    pub interpolation: Interpolation,
}

impl MarlowCurve {
    pub fn new(loading: DmaCurve, interpolation: Interpolation) -> Result<Self, MaterialError> {
        let m = Self {
            loading,
            interpolation,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        self.loading.validate_main_loading()?;
        if self.loading.len() < 2 {
            return Err(MaterialError::InvalidCard("Marlow curve needs at least two points".into()));
        }
        if self.loading.stress.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MaterialError::InvalidCard(
                "Marlow stress must increase strictly with strain".into(),
            ));
        }
        Ok(())
    }

    fn xs(&self) -> &[f64] {
        &self.loading.strain
    }

    fn ys(&self) -> &[f64] {
        &self.loading.stress
    }

    pub fn max_strain(&self) -> f64 {
        *self.xs().last().unwrap_or(&0.0)
    }

    pub fn max_stress(&self) -> f64 {
        *self.ys().last().unwrap_or(&0.0)
    }

    fn slopes(&self) -> Vec<f64> {
        let (x, y) = (self.xs(), self.ys());
        let n = x.len();
        let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut m = vec![0.0; n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            if d[i - 1] * d[i] <= 0.0 {
                m[i] = 0.0;
            } else {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        m
    }

    fn eval_unchecked(&self, strain: f64) -> f64 {
        let (x, y) = (self.xs(), self.ys());
        let n = x.len();
        let i = segment_index(x, strain);
        if strain == x[i] {
            return y[i];
        }
        if strain == x[i + 1] {
            return y[i + 1];
        }
        let h = x[i + 1] - x[i];
        let t = (strain - x[i]) / h;
        let linear = y[i] + t * (y[i + 1] - y[i]);
        match self.interpolation {
            Interpolation::Linear => linear,
            Interpolation::MonotoneCubic => {
                if strain > x[n - 1] || strain < x[0] {
                    return linear;
                }
                let m = self.slopes();
                let (t2, t3) = (t * t, t * t * t);
                (2.0 * t3 - 3.0 * t2 + 1.0) * y[i]
                    + (t3 - 2.0 * t2 + t) * h * m[i]
                    + (-2.0 * t3 + 3.0 * t2) * y[i + 1]
                    + (t3 - t2) * h * m[i + 1]
            }
        }
    }

    /// Uniaxial stress at `strain`; linear extrapolation beyond the table.
    pub fn eval_uniaxial_stress(&self, strain: f64) -> Result<f64, MaterialError> {
        if strain < 0.0 || strain.is_nan() {
            return Err(MaterialError::NegativeStrain(strain));
        }
        Ok(self.eval_unchecked(strain))
    }

    /// Stress for non-negative strains, clamping negative input to zero.
    pub fn stress_clamped(&self, strain: f64) -> f64 {
        self.eval_unchecked(strain.max(0.0))
    }

    /// Strain energy density `∫₀^ε σ dε` in MPa.
    pub fn strain_energy(&self, strain: f64) -> f64 {
        let e = strain.max(0.0);
        let (x, y) = (self.xs(), self.ys());
        let n = x.len();
        let slopes = match self.interpolation {
            Interpolation::MonotoneCubic => Some(self.slopes()),
            Interpolation::Linear => None,
        };
        let mut w = 0.0;
        for i in 0..n - 1 {
            let (x0, x1) = (x[i], x[i + 1]);
            if e <= x0 {
                break;
            }
            let h = x1 - x0;
            if e >= x1 {
                w += match &slopes {
                    None => 0.5 * h * (y[i] + y[i + 1]),
                    Some(m) => 0.5 * h * (y[i] + y[i + 1]) + h * h * (m[i] - m[i + 1]) / 12.0,
                };
            } else {
                w += match &slopes {
                    None => 0.5 * (e - x0) * (y[i] + self.eval_unchecked(e)),
                    Some(_) => simpson(|s| self.eval_unchecked(s), x0, e, 16),
                };
                return w;
            }
        }
        if e > x[n - 1] {
            w += 0.5 * (e - x[n - 1]) * (y[n - 1] + self.eval_unchecked(e));
        }
        w
    }

    /// Inverse of the uniaxial law (stress strictly increasing).
    pub fn strain_at_stress(&self, stress: f64) -> f64 {
        if stress <= 0.0 {
            return 0.0;
        }
        let (x, y) = (self.xs(), self.ys());
        let i = segment_index(y, stress);
        match self.interpolation {
            Interpolation::Linear => {
                x[i] + (stress - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i])
            }
            Interpolation::MonotoneCubic => {
                if stress >= y[y.len() - 1] {
                    return x[i] + (stress - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i]);
                }
                let (mut lo, mut hi) = (x[i], x[i + 1]);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if self.eval_unchecked(mid) < stress {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// Secant modulus from the origin to `fraction` of the peak tabulated
    /// stress.
    pub fn secant_modulus(&self, fraction: f64) -> f64 {
        let s = fraction * self.max_stress();
        s / self.strain_at_stress(s)
    }

    /// Straight-line curve `σ = E ε` up to `max_strain`.
    pub fn linear(modulus: f64, max_strain: f64) -> Result<Self, MaterialError> {
        let n = 11;
        let strain: Vec<f64> = (0..n).map(|i| max_strain * i as f64 / (n - 1) as f64).collect();
        let stress = strain.iter().map(|e| modulus * e).collect();
        Self::new(
            DmaCurve::new(strain, stress, crate::dma::CurveKind::Loading),
            Interpolation::Linear,
        )
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}
