//! Family of unloading curves indexed by initial residual stress.

use serde::{Deserialize, Serialize};

use super::damage::{eval_damaged_stress, DamageParams};
use super::marlow::MarlowCurve;
use super::MaterialError;
use crate::dma::{CurveKind, DmaCurve};
use crate::numeric::interp::lerp_table_clamped;

/// Two members closer than this (MPa) are treated as the same level.
pub const SIGMA_MATCH_TOL: f64 = 1e-6;
/// Allowed stress gap between a member's first point and the loading curve.
pub const ON_CURVE_TOL: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnloadingMode {
    #[default]
    Tabular,
    OgdenRoxburgh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnloadingMember {
    pub sigma0: f64,
    pub curve: DmaCurve,
    pub anchor_strain: f64,
}

impl UnloadingMember {
    /// Build a member; the anchor is the strain where the curve reaches zero
    /// stress (extrapolated linearly from the last segment if needed).
    pub fn new(sigma0: f64, curve: DmaCurve) -> Result<Self, MaterialError> {
        if curve.len() < 2 {
            return Err(MaterialError::InvalidCard(format!(
                "unloading curve for {sigma0} MPa needs at least two points"
            )));
        }
        let anchor_strain = zero_stress_strain(&curve);
        Ok(Self {
            sigma0,
            curve,
            anchor_strain,
        })
    }

    pub fn start_strain(&self) -> f64 {
        self.curve.strain[0]
    }
}

fn zero_stress_strain(curve: &DmaCurve) -> f64 {
    let n = curve.len();
    let (e1, s1) = (curve.strain[n - 1], curve.stress[n - 1]);
    if s1 == 0.0 {
        return e1;
    }
    let (e0, s0) = (curve.strain[n - 2], curve.stress[n - 2]);
    if s0 == s1 {
        return e1;
    }
    e1 - s1 * (e1 - e0) / (s1 - s0)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UnloadingFamily {
    pub members: Vec<UnloadingMember>,
    #[serde(default)]
    pub mode: UnloadingMode,
}

impl UnloadingFamily {
    /// Build a family from `(sigma0, curve)` pairs in any order.
    pub fn from_curves(curves: Vec<(f64, DmaCurve)>) -> Result<Self, MaterialError> {
        let mut members = curves
            .into_iter()
            .map(|(s, c)| UnloadingMember::new(s, c))
            .collect::<Result<Vec<_>, _>>()?;
        members.sort_by(|a, b| a.sigma0.total_cmp(&b.sigma0));
        Ok(Self {
            members,
            mode: UnloadingMode::Tabular,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.members.first()?.sigma0, self.members.last()?.sigma0))
    }

    pub fn validate(&self, marlow: &MarlowCurve) -> Result<(), MaterialError> {
        for w in self.members.windows(2) {
            if w[1].sigma0 <= w[0].sigma0 {
                return Err(MaterialError::InvalidCard("members must be sorted by sigma0".into()));
            }
            if w[1].anchor_strain <= w[0].anchor_strain {
                return Err(MaterialError::NonMonotoneAnchors {
                    sigma0: w[1].sigma0,
                });
            }
        }
        for m in &self.members {
            if m.curve.kind != CurveKind::Unloading {
                return Err(MaterialError::InvalidCard(format!(
                    "member {} is not an unloading curve",
                    m.sigma0
                )));
            }
            m.curve.validate()?;
            let (e0, s0) = m.curve.first().unwrap_or((0.0, 0.0));
            let on_curve = marlow.stress_clamped(e0);
            if (on_curve - s0).abs() > ON_CURVE_TOL * s0.abs().max(on_curve) {
                return Err(MaterialError::InvalidCard(format!(
                    "member {} starts at {s0} MPa but the loading curve gives {on_curve} MPa",
                    m.sigma0
                )));
            }
            if (zero_stress_strain(&m.curve) - m.anchor_strain).abs() > 1e-12 {
                return Err(MaterialError::InvalidCard(format!(
                    "member {} anchor does not match its zero-stress strain",
                    m.sigma0
                )));
            }
        }
        Ok(())
    }

    fn check_span(&self, sigma0: f64) -> Result<(), MaterialError> {
        let (lo, hi) = self.span().ok_or(MaterialError::EmptyFamily)?;
        if sigma0 < lo - SIGMA_MATCH_TOL || sigma0 > hi + SIGMA_MATCH_TOL || sigma0.is_nan() {
            return Err(MaterialError::OutOfCalibrationRange { sigma0, min: lo, max: hi });
        }
        Ok(())
    }

    /// Index of the member within `SIGMA_MATCH_TOL` of `sigma0`, if any.
    pub fn exact_member(&self, sigma0: f64) -> Option<&UnloadingMember> {
        self.members
            .iter()
            .find(|m| (m.sigma0 - sigma0).abs() <= SIGMA_MATCH_TOL)
    }

    /// Tabular interpolation between the bracketing members.
    pub fn select_tabular(&self, sigma0: f64) -> Result<DmaCurve, MaterialError> {
        self.check_span(sigma0)?;
        if let Some(m) = self.exact_member(sigma0) {
            return Ok(m.curve.clone());
        }
        let hi = self
            .members
            .iter()
            .position(|m| m.sigma0 > sigma0)
            .ok_or(MaterialError::OutOfCalibrationRange {
                sigma0,
                min: self.members[0].sigma0,
                max: self.members[self.members.len() - 1].sigma0,
            })?;
        let (a, b) = (&self.members[hi - 1], &self.members[hi]);
        let w = (sigma0 - a.sigma0) / (b.sigma0 - a.sigma0);

        let param = |m: &UnloadingMember| -> (Vec<f64>, Vec<f64>) {
            // Ascending stress fraction for interpolation.
            let mut f: Vec<f64> = m.curve.stress.iter().rev().map(|s| s / m.sigma0).collect();
            let mut e: Vec<f64> = m.curve.strain.iter().rev().copied().collect();
            dedup_ascending(&mut f, &mut e);
            (f, e)
        };
        let (fa, ea) = param(a);
        let (fb, eb) = param(b);
        let mut grid: Vec<f64> = fa.iter().chain(fb.iter()).copied().collect();
        grid.sort_by(|x, y| y.total_cmp(x));
        grid.dedup();

        let mut strain = Vec::with_capacity(grid.len());
        let mut stress = Vec::with_capacity(grid.len());
        for f in grid {
            let e = (1.0 - w) * lerp_table_clamped(&fa, &ea, f) + w * lerp_table_clamped(&fb, &eb, f);
            if strain.last().is_some_and(|&last: &f64| e >= last) {
                continue;
            }
            strain.push(e);
            stress.push((f * sigma0).max(0.0));
        }
        let mut c = DmaCurve::new(strain, stress, CurveKind::Unloading);
        c.temperature_c = a.curve.temperature_c;
        c.sample_id = format!("interp_{sigma0}");
        Ok(c)
    }

    /// Peak and anchor strains for an arbitrary level, interpolated between
    /// members inside the span.
    pub fn peak_and_anchor(&self, sigma0: f64, marlow: &MarlowCurve) -> Result<(f64, f64), MaterialError> {
        let (lo, hi) = self.span().ok_or(MaterialError::EmptyFamily)?;
        if let Some(m) = self.exact_member(sigma0) {
            return Ok((m.start_strain(), m.anchor_strain));
        }
        if sigma0 > lo && sigma0 < hi {
            let i = self.members.iter().position(|m| m.sigma0 > sigma0).unwrap_or(1);
            let (a, b) = (&self.members[i - 1], &self.members[i]);
            let w = (sigma0 - a.sigma0) / (b.sigma0 - a.sigma0);
            return Ok((
                (1.0 - w) * a.start_strain() + w * b.start_strain(),
                (1.0 - w) * a.anchor_strain + w * b.anchor_strain,
            ));
        }
        let peak = marlow.strain_at_stress(sigma0);
        let anchor = if self.members.len() == 1 {
            let m = &self.members[0];
            m.anchor_strain * sigma0 / m.sigma0
        } else {
            let (a, b) = if sigma0 <= lo {
                (&self.members[0], &self.members[1])
            } else {
                let n = self.members.len();
                (&self.members[n - 2], &self.members[n - 1])
            };
            let slope = (b.anchor_strain - a.anchor_strain) / (b.sigma0 - a.sigma0);
            a.anchor_strain + slope * (sigma0 - a.sigma0)
        };
        Ok((peak, anchor.clamp(0.0, peak * (1.0 - 1e-9))))
    }

    /// Unloading curve synthesised from the damage law.
    pub fn synthesize(
        &self,
        sigma0: f64,
        marlow: &MarlowCurve,
        params: &DamageParams,
        points: usize,
    ) -> Result<DmaCurve, MaterialError> {
        if sigma0 <= 0.0 {
            return Err(MaterialError::OutOfCalibrationRange {
                sigma0,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        let (peak, anchor) = self.peak_and_anchor(sigma0, marlow)?;
        let n = points.max(2);
        let mut strain = Vec::with_capacity(n);
        let mut stress = Vec::with_capacity(n);
        for k in 0..n {
            let e = peak - (peak - anchor) * k as f64 / (n - 1) as f64;
            strain.push(e);
            stress.push(eval_damaged_stress(marlow, params, e, peak, anchor).max(0.0));
        }
        Ok(DmaCurve::new(strain, stress, CurveKind::Unloading))
    }
}

fn dedup_ascending(f: &mut Vec<f64>, e: &mut Vec<f64>) {
    let mut keep_f = Vec::with_capacity(f.len());
    let mut keep_e = Vec::with_capacity(e.len());
    for (&fi, &ei) in f.iter().zip(e.iter()) {
        if keep_f.last().is_some_and(|&l: &f64| fi <= l) {
            continue;
        }
        keep_f.push(fi);
        keep_e.push(ei);
    }
    *f = keep_f;
    *e = keep_e;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn member(sigma: f64, peak: f64, anchor: f64) -> (f64, DmaCurve) {
        let n = 6;
        let strain: Vec<f64> = (0..n).map(|k| peak - (peak - anchor) * k as f64 / (n - 1) as f64).collect();
        let stress: Vec<f64> = (0..n).map(|k| sigma * (1.0 - k as f64 / (n - 1) as f64).powi(2)).collect();
        (sigma, DmaCurve::new(strain, stress, CurveKind::Unloading))
    }

    #[test]
    fn sorted_and_anchored() {
        let fam = UnloadingFamily::from_curves(vec![member(0.2, 0.2, 0.05), member(0.1, 0.08, 0.01)]).unwrap();
        assert_eq!(fam.members[0].sigma0, 0.1);
        assert!((fam.members[0].anchor_strain - 0.01).abs() < 1e-15);
        assert_eq!(fam.span(), Some((0.1, 0.2)));
    }

    #[test]
    fn midpoint_interpolates_endpoints() {
        let fam = UnloadingFamily::from_curves(vec![member(0.2, 0.2, 0.05), member(0.1, 0.08, 0.01)]).unwrap();
        let c = fam.select_tabular(0.15).unwrap();
        assert!((c.strain[0] - 0.14).abs() < 1e-12);
        assert!((c.last().unwrap().0 - 0.03).abs() < 1e-12);
        assert!((c.stress[0] - 0.15).abs() < 1e-12);
        c.validate().unwrap();
    }

    #[test]
    fn out_of_range() {
        let fam = UnloadingFamily::from_curves(vec![member(0.2, 0.2, 0.05), member(0.1, 0.08, 0.01)]).unwrap();
        assert!(matches!(
            fam.select_tabular(0.3),
            Err(MaterialError::OutOfCalibrationRange { .. })
        ));
        assert!(matches!(
            UnloadingFamily::default().select_tabular(0.1),
            Err(MaterialError::EmptyFamily)
        ));
    }
}
