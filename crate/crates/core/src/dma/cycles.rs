//! Splitting cyclic tensile records into loading/unloading runs and building
//! the main loading envelope.

use serde::{Deserialize, Serialize};

use super::{CurveKind, DmaCurve, DmaError, ORIGIN_TOL};

/// Relative stress change (of the running peak) needed to call a reversal.
pub const REVERSAL_FRACTION: f64 = 0.005;
/// Allowed drop of a later cycle below the envelope, relative to peak stress.
pub const OVERLAP_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub loading: DmaCurve,
    pub unloading: DmaCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSet {
    pub cycles: Vec<Cycle>,
    pub peak_stresses: Vec<f64>,
    /// Trailing loading run that never reversed.
    #[serde(default)]
    pub tail: Option<DmaCurve>,
}

impl CycleSet {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// All points in their original order.
    pub fn concatenated(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for c in &self.cycles {
            out.extend(c.loading.points());
            out.extend(c.unloading.points());
        }
        if let Some(t) = &self.tail {
            out.extend(t.points());
        }
        out
    }
}

fn sub_curve(raw: &DmaCurve, lo: usize, hi: usize, kind: CurveKind) -> DmaCurve {
    DmaCurve {
        strain: raw.strain[lo..=hi].to_vec(),
        stress: raw.stress[lo..=hi].to_vec(),
        kind,
        temperature_c: raw.temperature_c,
        sample_id: raw.sample_id.clone(),
    }
}

/// Split a raw cyclic record at stress reversals. The peak point closes a
/// loading run and the trough closes an unloading run, so the runs partition
/// the input.
pub fn segment_cycles(raw: &DmaCurve) -> Result<CycleSet, DmaError> {
    let n = raw.len();
    if raw.stress.len() != n {
        return Err(DmaError::InvalidCurve("strain and stress lengths differ".into()));
    }
    let mut cycles = Vec::new();
    let mut peaks = Vec::new();
    let mut running_peak = 0.0_f64;
    let mut run_start = 0;
    let mut loading_end: Option<usize> = None;
    let mut extreme = 0;

    for i in 0..n {
        let s = raw.stress[i];
        running_peak = running_peak.max(s);
        let thr = REVERSAL_FRACTION * running_peak;
        match loading_end {
            None => {
                if s >= raw.stress[extreme] {
                    extreme = i;
                } else if raw.stress[extreme] - s > thr {
                    loading_end = Some(extreme);
                    extreme = i;
                }
            }
            Some(le) => {
                if s <= raw.stress[extreme] {
                    extreme = i;
                } else if s - raw.stress[extreme] > thr {
                    cycles.push(Cycle {
                        loading: sub_curve(raw, run_start, le, CurveKind::Loading),
                        unloading: sub_curve(raw, le + 1, extreme, CurveKind::Unloading),
                    });
                    peaks.push(raw.stress[le]);
                    run_start = extreme + 1;
                    loading_end = None;
                    // Re-scan the new loading run from its first point.
                    extreme = run_start;
                    for j in run_start..=i {
                        if raw.stress[j] >= raw.stress[extreme] {
                            extreme = j;
                        }
                    }
                }
            }
        }
    }

    let mut tail = None;
    match loading_end {
        Some(le) => {
            cycles.push(Cycle {
                loading: sub_curve(raw, run_start, le, CurveKind::Loading),
                unloading: sub_curve(raw, le + 1, n - 1, CurveKind::Unloading),
            });
            peaks.push(raw.stress[le]);
        }
        None if run_start < n => {
            tail = Some(sub_curve(raw, run_start, n - 1, CurveKind::Loading));
        }
        None => {}
    }
    if cycles.is_empty() {
        return Err(DmaError::NoCyclesFound);
    }
    Ok(CycleSet {
        cycles,
        peak_stresses: peaks,
        tail,
    })
}

/// Envelope of the loading runs: each cycle contributes the part of its
/// loading run beyond the previous cycle's peak strain.
pub fn extract_main_loading_curve(cycles: &CycleSet) -> Result<DmaCurve, DmaError> {
    let first = cycles.cycles.first().ok_or(DmaError::NoCyclesFound)?;
    let peak_stress = cycles
        .cycles
        .iter()
        .map(|c| c.loading.max_stress())
        .fold(0.0, f64::max);
    let limit = OVERLAP_TOLERANCE * peak_stress;

    let mut strain: Vec<f64> = Vec::new();
    let mut stress: Vec<f64> = Vec::new();
    let mut prev_peak_strain = f64::NEG_INFINITY;
    for (k, c) in cycles.cycles.iter().enumerate() {
        for (e, s) in c.loading.points() {
            if e <= prev_peak_strain {
                continue;
            }
            if let (Some(&le), Some(&ls)) = (strain.last(), stress.last()) {
                if e <= le {
                    continue;
                }
                if s < ls {
                    let deficit = ls - s;
                    if deficit > limit {
                        return Err(DmaError::OverlapInconsistency {
                            cycle: k,
                            deficit,
                            limit,
                        });
                    }
                    continue;
                }
            }
            strain.push(e);
            stress.push(s);
        }
        if let Some(e) = c.loading.last().map(|p| p.0) {
            prev_peak_strain = prev_peak_strain.max(e);
        }
    }
    let starts_at_origin = matches!(
        (strain.first(), stress.first()),
        (Some(e), Some(s)) if e.abs() <= ORIGIN_TOL && s.abs() <= ORIGIN_TOL
    );
    if !starts_at_origin {
        strain.insert(0, 0.0);
        stress.insert(0, 0.0);
    }
    Ok(DmaCurve {
        strain,
        stress,
        kind: CurveKind::Loading,
        temperature_c: first.loading.temperature_c,
        sample_id: first.loading.sample_id.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(amps: &[f64], per_leg: usize) -> DmaCurve {
        let mut pts = vec![(0.0, 0.0)];
        for &a in amps {
            for k in 1..=per_leg {
                let s = a * k as f64 / per_leg as f64;
                pts.push((s * 0.5, s));
            }
            for k in 1..=per_leg {
                let s = a * (1.0 - k as f64 / per_leg as f64);
                pts.push((s * 0.5 + 0.01, s));
            }
        }
        let strain = pts.iter().map(|p| p.0).collect();
        let stress = pts.iter().map(|p| p.1).collect();
        DmaCurve::new(strain, stress, CurveKind::Mixed)
    }

    #[test]
    fn monotone_input_has_no_cycles() {
        let c = DmaCurve::new(vec![0.0, 0.1, 0.2], vec![0.0, 1.0, 2.0], CurveKind::Loading);
        assert_eq!(segment_cycles(&c).unwrap_err(), DmaError::NoCyclesFound);
    }

    #[test]
    fn triangle_wave_has_four_cycles() {
        let raw = triangle(&[1.0, 1.5, 2.0, 3.0], 10);
        let set = segment_cycles(&raw).unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(set.peak_stresses, vec![1.0, 1.5, 2.0, 3.0]);
        let flat: Vec<(f64, f64)> = raw.points().collect();
        assert_eq!(set.concatenated(), flat);
    }

    #[test]
    fn jitter_below_threshold_is_ignored() {
        let raw = DmaCurve::new(
            vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.3, 0.2],
            vec![0.0, 1.0, 0.999, 2.0, 3.0, 1.0, 0.0],
            CurveKind::Mixed,
        );
        let set = segment_cycles(&raw).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.cycles[0].loading.len(), 5);
    }

    #[test]
    fn single_cycle_envelope_is_loading_run() {
        let raw = triangle(&[1.0], 8);
        let set = segment_cycles(&raw).unwrap();
        let env = extract_main_loading_curve(&set).unwrap();
        assert_eq!(env, set.cycles[0].loading);
    }

    #[test]
    fn collapsed_reload_is_overlap_inconsistency() {
        let c1 = DmaCurve::new(vec![0.0, 0.1, 0.2], vec![0.0, 1.0, 2.0], CurveKind::Loading);
        let u1 = DmaCurve::new(vec![0.19, 0.1], vec![1.0, 0.0], CurveKind::Unloading);
        let c2 = DmaCurve::new(vec![0.1, 0.25, 0.3], vec![0.0, 1.0, 2.5], CurveKind::Loading);
        let set = CycleSet {
            cycles: vec![
                Cycle { loading: c1, unloading: u1.clone() },
                Cycle { loading: c2, unloading: u1 },
            ],
            peak_stresses: vec![2.0, 2.5],
            tail: None,
        };
        assert!(matches!(
            extract_main_loading_curve(&set),
            Err(DmaError::OverlapInconsistency { cycle: 1, .. })
        ));
    }
}
