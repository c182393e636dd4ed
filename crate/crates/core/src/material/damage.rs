//! Ogden–Roxburgh pseudo-elastic damage on top of the Marlow curve.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use super::marlow::MarlowCurve;
use super::unloading::UnloadingFamily;
use super::MaterialError;
use crate::numeric::lm::{self, LmConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DamageParams {
    pub r: f64,
    /// MPa (energy per unit volume).
    pub m: f64,
    pub beta: f64,
    /// RMS stress residual of the calibration fit, MPa.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_rms_mpa: Option<f64>,
}

impl DamageParams {
    pub fn new(r: f64, m: f64, beta: f64) -> Self {
        Self {
            r,
            m,
            beta,
            fit_rms_mpa: None,
        }
    }

    pub fn validate(&self, max_energy: f64) -> Result<(), MaterialError> {
        let ok = self.r > 1.0
            && self.m >= 0.0
            && self.beta >= 0.0
            && self.m + self.beta * max_energy > 0.0
            && self.m + self.beta * 0.0 >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(MaterialError::InvalidCard(format!(
                "damage parameters out of range: r={}, m={}, beta={}",
                self.r, self.m, self.beta
            )))
        }
    }

    /// Damage factor η for current energy `w` and peak energy `w_max`.
    pub fn eta(&self, w: f64, w_max: f64) -> f64 {
        let denom = self.m + self.beta * w_max;
        if denom <= 0.0 {
            return if w >= w_max { 1.0 } else { 1.0 - 1.0 / self.r };
        }
        1.0 - erf((w_max - w) / denom) / self.r
    }
}

/// Unloading stress at `strain` for a cycle that peaked at `peak_strain` and
/// returns to zero stress at `anchor_strain`. The virgin response is sampled
/// at the strain measured from the anchor, rescaled to the peak.
pub fn eval_damaged_stress(
    marlow: &MarlowCurve,
    params: &DamageParams,
    strain: f64,
    peak_strain: f64,
    anchor_strain: f64,
) -> f64 {
    let span = peak_strain - anchor_strain;
    if span <= 0.0 {
        return 0.0;
    }
    let es = (peak_strain * (strain - anchor_strain) / span).max(0.0);
    let w = marlow.strain_energy(es);
    let w_max = marlow.strain_energy(peak_strain);
    params.eta(w, w_max) * marlow.stress_clamped(es)
}

/// Smallest `r - 1` the search may reach; keeps `r > 1` representable.
const R_MINUS_ONE_FLOOR: f64 = 1e-9;

fn params_from_log(q: &DVector<f64>) -> DamageParams {
    DamageParams::new(1.0 + q[0].exp().max(R_MINUS_ONE_FLOOR), q[1].exp(), q[2].exp())
}

fn residuals(marlow: &MarlowCurve, family: &UnloadingFamily, p: &DamageParams) -> DVector<f64> {
    let n: usize = family.members.iter().map(|m| m.curve.len()).sum();
    let mut r = DVector::zeros(n);
    let mut k = 0;
    for mem in &family.members {
        let peak = mem.start_strain();
        for (e, s) in mem.curve.points() {
            r[k] = eval_damaged_stress(marlow, p, e, peak, mem.anchor_strain) - s;
            k += 1;
        }
    }
    r
}

fn rms(r: &DVector<f64>) -> f64 {
    (r.norm_squared() / r.len().max(1) as f64).sqrt()
}

/// Least-squares fit of `(r, m, beta)` to every point of the family.
/// Parameters are searched as `r = 1 + e^q0`, `m = e^q1`, `beta = e^q2`.
pub fn fit_damage_params(marlow: &MarlowCurve, family: &UnloadingFamily) -> Result<DamageParams, MaterialError> {
    if family.members.len() < 2 {
        return Err(MaterialError::DegenerateFamily {
            members: family.members.len(),
        });
    }
    let starts: [(f64, f64, f64); 3] = [(1.5, 0.01, 0.5), (3.0, 0.1, 0.05), (1.1, 0.001, 1.0)];
    let cfg = LmConfig {
        max_iter: 300,
        ..Default::default()
    };
    let mut best: Option<(f64, f64, DamageParams)> = None;
    for &(r0, m0, b0) in &starts {
        let q0 = DVector::from_vec(vec![(r0 - 1.0_f64).ln(), m0.ln(), b0.ln()]);
        let res = lm::minimize(
            |q| residuals(marlow, family, &params_from_log(q)),
            q0.clone(),
            &cfg,
        );
        let p = params_from_log(&res.params);
        let initial = rms(&residuals(marlow, family, &params_from_log(&q0)));
        let fin = rms(&residuals(marlow, family, &p));
        if !fin.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|b| fin < b.1) {
            best = Some((initial, fin, p));
        }
    }
    let (initial, fin, mut p) = best.ok_or(MaterialError::FitDivergence {
        initial_rms: f64::NAN,
        final_rms: f64::NAN,
    })?;
    if fin > 0.9 * initial && fin > 1e-9 {
        return Err(MaterialError::FitDivergence {
            initial_rms: initial,
            final_rms: fin,
        });
    }
    p.fit_rms_mpa = Some(fin);
    Ok(p)
}

/// RMS stress residual of `params` over every family point.
pub fn damage_rms(marlow: &MarlowCurve, family: &UnloadingFamily, params: &DamageParams) -> f64 {
    rms(&residuals(marlow, family, params))
}
