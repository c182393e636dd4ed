//! Published calibration and verification data bundled with the crate.

use crate::dma::{parse_dma_str, DmaCurve, FrequencySweep, Schema};

pub const PLA_LOADING_CSV: &str = include_str!("../data/pla_loading.csv");
pub const PLA_UNLOADING_0_079_CSV: &str = include_str!("../data/pla_unloading_0.079.csv");
pub const PLA_UNLOADING_0_132_CSV: &str = include_str!("../data/pla_unloading_0.132.csv");
pub const PLA_UNLOADING_0_170_CSV: &str = include_str!("../data/pla_unloading_0.170.csv");
pub const PLA_UNLOADING_0_203_CSV: &str = include_str!("../data/pla_unloading_0.203.csv");
pub const PLA_SWEEP_CSV: &str = include_str!("../data/pla_sweep.csv");
pub const CFPLA_SWEEP_CSV: &str = include_str!("../data/cfpla_sweep.csv");
pub const PUBLISHED_PAIRS_CSV: &str = include_str!("../data/published_point_pairs.csv");

/// Initial residual stress levels of the bundled unloading curves, MPa.
pub const PLA_UNLOADING_LEVELS: [f64; 4] = [0.079, 0.132, 0.170, 0.203];

fn curve(text: &str, label: &str) -> DmaCurve {
    parse_dma_str(text, Schema::StressStrain, label)
        .and_then(|d| d.into_curve().ok_or(crate::dma::DmaError::EmptyFile))
        .expect("bundled curve parses")
}

fn sweep(text: &str, label: &str) -> FrequencySweep {
    parse_dma_str(text, Schema::FrequencySweep, label)
        .and_then(|d| d.into_sweep().ok_or(crate::dma::DmaError::EmptyFile))
        .expect("bundled sweep parses")
}

/// PLA main loading curve at 80 °C.
pub fn pla_loading() -> DmaCurve {
    curve(PLA_LOADING_CSV, "pla_loading")
}

/// PLA unloading curves as `(sigma0, curve)`, ascending in sigma0.
pub fn pla_unloading() -> Vec<(f64, DmaCurve)> {
    let texts = [
        PLA_UNLOADING_0_079_CSV,
        PLA_UNLOADING_0_132_CSV,
        PLA_UNLOADING_0_170_CSV,
        PLA_UNLOADING_0_203_CSV,
    ];
    PLA_UNLOADING_LEVELS
        .iter()
        .zip(texts)
        .map(|(&s, t)| (s, curve(t, &format!("pla_unloading_{s:.3}"))))
        .collect()
}

pub fn pla_sweep() -> FrequencySweep {
    sweep(PLA_SWEEP_CSV, "PLA")
}

pub fn cfpla_sweep() -> FrequencySweep {
    sweep(CFPLA_SWEEP_CSV, "CFPLA")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dma::CurveKind;

    #[test]
    fn bundled_data_shapes() {
        let l = pla_loading();
        assert_eq!(l.len(), 30);
        assert_eq!(l.kind, CurveKind::Loading);
        for (_, c) in pla_unloading() {
            assert_eq!(c.kind, CurveKind::Unloading);
            assert_eq!(c.stress.last(), Some(&0.0));
        }
        assert_eq!(pla_sweep().rows.len(), 28);
        assert_eq!(cfpla_sweep().rows.len(), 28);
    }
}
