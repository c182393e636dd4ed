//! DMA data ingestion: stress–strain curves, frequency sweeps, smoothing and
//! cycle segmentation.

mod csv_io;
mod cycles;
mod smooth;

pub use csv_io::{
    parse_dma_csv, parse_dma_str, serialize_curve_csv, serialize_sweep_csv, DmaData, Schema,
};
pub use cycles::{extract_main_loading_curve, segment_cycles, Cycle, CycleSet};
pub use smooth::{smooth_pspline, SmootherConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for the origin check of a main loading curve.
pub const ORIGIN_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DmaError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed row {row}: {message}")]
    MalformedRow { row: usize, message: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("file has no data rows")]
    EmptyFile,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("singular smoothing system: {0}")]
    SingularSystem(String),
    #[error("no loading/unloading reversal found")]
    NoCyclesFound,
    #[error("cycle {cycle} falls {deficit} MPa below the envelope (limit {limit} MPa)")]
    OverlapInconsistency {
        cycle: usize,
        deficit: f64,
        limit: f64,
    },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid smoother config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Loading,
    Unloading,
    Mixed,
}

fn default_temperature() -> f64 {
    80.0
}

/// Engineering stress–strain series from a tensile DMA test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmaCurve {
    pub strain: Vec<f64>,
    #[serde(rename = "stress_mpa")]
    pub stress: Vec<f64>,
    pub kind: CurveKind,
    #[serde(default = "default_temperature")]
    pub temperature_c: f64,
    #[serde(default)]
    pub sample_id: String,
}

impl DmaCurve {
    pub fn new(strain: Vec<f64>, stress: Vec<f64>, kind: CurveKind) -> Self {
        Self {
            strain,
            stress,
            kind,
            temperature_c: default_temperature(),
            sample_id: String::new(),
        }
    }

    /// Build a curve and label it by the direction of its strains.
    pub fn from_points(points: &[(f64, f64)]) -> Self {
        let strain: Vec<f64> = points.iter().map(|p| p.0).collect();
        let stress: Vec<f64> = points.iter().map(|p| p.1).collect();
        let kind = infer_kind(&strain);
        Self::new(strain, stress, kind)
    }

    pub fn len(&self) -> usize {
        self.strain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strain.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.strain.iter().copied().zip(self.stress.iter().copied())
    }

    pub fn first(&self) -> Option<(f64, f64)> {
        self.points().next()
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        self.points().last()
    }

    pub fn max_stress(&self) -> f64 {
        self.stress.iter().copied().fold(0.0, f64::max)
    }

    /// Check the per-kind monotonicity and non-negativity invariants.
    pub fn validate(&self) -> Result<(), DmaError> {
        if self.strain.len() != self.stress.len() {
            return Err(DmaError::InvalidCurve(format!(
                "{} strains vs {} stresses",
                self.strain.len(),
                self.stress.len()
            )));
        }
        if let Some(i) = self.stress.iter().position(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(DmaError::InvalidCurve(format!(
                "stress at point {i} is negative or not finite"
            )));
        }
        if let Some(i) = self.strain.iter().position(|s| !s.is_finite()) {
            return Err(DmaError::InvalidCurve(format!("strain at point {i} is not finite")));
        }
        let bad = match self.kind {
            CurveKind::Loading => self.strain.windows(2).position(|w| w[1] <= w[0]),
            CurveKind::Unloading => self.strain.windows(2).position(|w| w[1] >= w[0]),
            CurveKind::Mixed => None,
        };
        if let Some(i) = bad {
            return Err(DmaError::InvalidCurve(format!(
                "{:?} curve not strictly monotone at point {}",
                self.kind,
                i + 1
            )));
        }
        Ok(())
    }

    /// Validate as a main loading curve: strictly increasing strain starting
    /// at the origin.
    pub fn validate_main_loading(&self) -> Result<(), DmaError> {
        if self.kind != CurveKind::Loading {
            return Err(DmaError::InvalidCurve("main loading curve must have kind loading".into()));
        }
        self.validate()?;
        match self.first() {
            Some((e, s)) if e.abs() <= ORIGIN_TOL && s.abs() <= ORIGIN_TOL => Ok(()),
            Some((e, s)) => Err(DmaError::InvalidCurve(format!(
                "main loading curve starts at ({e}, {s}) instead of the origin"
            ))),
            None => Err(DmaError::TooFewPoints { needed: 2, got: 0 }),
        }
    }
}

pub(crate) fn infer_kind(strain: &[f64]) -> CurveKind {
    if strain.len() >= 2 && strain.windows(2).all(|w| w[1] > w[0]) {
        CurveKind::Loading
    } else if strain.len() >= 2 && strain.windows(2).all(|w| w[1] < w[0]) {
        CurveKind::Unloading
    } else {
        CurveKind::Mixed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub freq_hz: f64,
    pub storage_mpa: f64,
    pub loss_mpa: f64,
    pub tan_delta: f64,
    pub pre_strain: f64,
}

/// Storage/loss modulus as a function of frequency at fixed pre-strain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySweep {
    pub rows: Vec<SweepRow>,
    #[serde(default)]
    pub material_label: String,
}

impl FrequencySweep {
    pub fn validate(&self) -> Result<(), DmaError> {
        if self.rows.is_empty() {
            return Err(DmaError::EmptyFile);
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !(r.freq_hz > 0.0) {
                return Err(DmaError::MalformedRow {
                    row: i + 1,
                    message: "frequency must be positive".into(),
                });
            }
            let expect = if r.storage_mpa != 0.0 { r.loss_mpa / r.storage_mpa } else { 0.0 };
            let scale = expect.abs().max(r.tan_delta.abs());
            if scale > 0.0 && (expect - r.tan_delta).abs() > 1e-3 * scale {
                return Err(DmaError::MalformedRow {
                    row: i + 1,
                    message: format!("tan_delta {} disagrees with loss/storage {expect}", r.tan_delta),
                });
            }
        }
        if let Some(i) = self.rows.windows(2).position(|w| w[1].freq_hz <= w[0].freq_hz) {
            return Err(DmaError::MalformedRow {
                row: i + 2,
                message: "frequencies must be strictly increasing".into(),
            });
        }
        let p0 = self.rows[0].pre_strain;
        if let Some(i) = self.rows.iter().position(|r| r.pre_strain != p0) {
            return Err(DmaError::MalformedRow {
                row: i + 1,
                message: "pre_strain must be constant".into(),
            });
        }
        Ok(())
    }

    pub fn max_tan_delta(&self) -> Option<(f64, f64)> {
        self.rows
            .iter()
            .map(|r| (r.freq_hz, r.tan_delta))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_inference() {
        assert_eq!(infer_kind(&[0.0, 0.1, 0.2]), CurveKind::Loading);
        assert_eq!(infer_kind(&[0.2, 0.1, 0.0]), CurveKind::Unloading);
        assert_eq!(infer_kind(&[0.0, 0.2, 0.1]), CurveKind::Mixed);
    }

    #[test]
    fn validation_rejects_negative_stress_and_bad_order() {
        let c = DmaCurve::new(vec![0.0, 0.1], vec![0.0, -1.0], CurveKind::Loading);
        assert!(c.validate().is_err());
        let c = DmaCurve::new(vec![0.0, 0.0], vec![0.0, 1.0], CurveKind::Loading);
        assert!(c.validate().is_err());
        let c = DmaCurve::new(vec![0.0, 0.1], vec![0.0, 1.0], CurveKind::Loading);
        assert!(c.validate_main_loading().is_ok());
        let c = DmaCurve::new(vec![0.01, 0.1], vec![0.0, 1.0], CurveKind::Loading);
        assert!(c.validate_main_loading().is_err());
    }

    #[test]
    fn sweep_tan_delta_consistency() {
        let mut s = FrequencySweep {
            rows: vec![SweepRow {
                freq_hz: 1.0,
                storage_mpa: 2.0,
                loss_mpa: 1.0,
                tan_delta: 0.5,
                pre_strain: 0.0095,
            }],
            material_label: "x".into(),
        };
        assert!(s.validate().is_ok());
        s.rows[0].tan_delta = 0.6;
        assert!(matches!(s.validate(), Err(DmaError::MalformedRow { row: 1, .. })));
    }
}
