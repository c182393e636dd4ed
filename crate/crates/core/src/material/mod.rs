//! Constitutive description of a printed block material.
//!
//! A [`MaterialCard`] bundles the tabular loading curve, the family of
//! unloading curves indexed by initial residual stress, optional damage and
//! plasticity data, an optional Prony series and the thermal/elastic
//! constants.

mod damage;
mod marlow;
mod plasticity;
mod prony;
mod unloading;

pub use damage::{damage_rms, eval_damaged_stress, fit_damage_params, DamageParams};
pub use marlow::{Interpolation, MarlowCurve};
pub use plasticity::{extract_plasticity_table, PlasticityRow, PlasticityTable};
pub use prony::{
    check_viscoelastic_dominance, fit_prony, fit_prony_with, relative_misfit, PronyFit, PronyOptions,
    PronySeries, PronyTerm,
};
pub use unloading::{UnloadingFamily, UnloadingMember, UnloadingMode, ON_CURVE_TOL, SIGMA_MATCH_TOL};

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dma::{DmaCurve, DmaError, FrequencySweep};
use crate::doc::{self, DocError};

pub const CARD_KIND: &str = "material_card";

/// Stress fraction used for secant moduli.
pub const SECANT_FRACTION: f64 = 0.2;
/// Samples per synthesised damage-law unloading curve.
pub const SYNTH_POINTS: usize = 41;

pub const PLA_ALPHA_T: f64 = 9.17e-4;
pub const PLA_POISSON: f64 = 0.419;
pub const CFPLA_ALPHA_T: f64 = 9.97e-5;
pub const CFPLA_POISSON: f64 = 0.359;
pub const DEFAULT_DENSITY: f64 = 1240.0;
/// Range of the linear CFPLA fallback curve.
pub const CFPLA_FALLBACK_MAX_STRAIN: f64 = 0.03;
pub const DEFAULT_PRONY_TERMS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("negative strain {0}")]
    NegativeStrain(f64),
    #[error("sigma0 = {sigma0} MPa outside calibration range [{min}, {max}]")]
    OutOfCalibrationRange { sigma0: f64, min: f64, max: f64 },
    #[error("unloading family is empty")]
    EmptyFamily,
    #[error("damage fit did not reduce the residual enough (initial RMS {initial_rms}, final {final_rms})")]
    FitDivergence { initial_rms: f64, final_rms: f64 },
    #[error("damage fit needs at least 2 unloading curves, got {members}")]
    DegenerateFamily { members: usize },
    #[error("anchor strains not increasing with sigma0 at {sigma0} MPa")]
    NonMonotoneAnchors { sigma0: f64 },
    #[error("{rows} sweep rows are too few for {n_terms} Prony terms")]
    InsufficientData { rows: usize, n_terms: usize },
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("invalid material card: {0}")]
    InvalidCard(String),
    #[error(transparent)]
    Dma(#[from] DmaError),
    #[error(transparent)]
    Document(#[from] DocError),
}

/// Which viscoelastic limit the structural moduli represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StiffnessRegime {
    #[default]
    Instantaneous,
    LongTerm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialCard {
    pub name: String,
    pub marlow: MarlowCurve,
    #[serde(default)]
    pub unloading: UnloadingFamily,
    #[serde(default)]
    pub damage: Option<DamageParams>,
    #[serde(default)]
    pub plasticity: Option<PlasticityTable>,
    #[serde(default)]
    pub prony: Option<PronySeries>,
    pub alpha_t: f64,
    pub poisson: f64,
    pub density: f64,
    #[serde(default)]
    pub viscoelastic_enabled: bool,
}

/// Raw inputs for [`calibrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationInput {
    pub name: String,
    pub loading: DmaCurve,
    pub unloading: Vec<(f64, DmaCurve)>,
    pub sweep: Option<FrequencySweep>,
    pub alpha_t: f64,
    pub poisson: f64,
    pub density: f64,
    pub prony_terms: usize,
}

/// Diagnostics produced alongside a calibrated card.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub damage_rms_mpa: Option<f64>,
    pub damage_error: Option<String>,
    pub prony_storage_rel_rms: Option<f64>,
    pub prony_loss_rel_rms: Option<f64>,
    pub max_tan_delta: Option<f64>,
    pub viscoelastic_enabled: bool,
}

/// Build a card from a main loading curve, unloading curves and an optional
/// frequency sweep. A damage fit failure is reported, not fatal.
pub fn calibrate(input: CalibrationInput) -> Result<(MaterialCard, CalibrationReport), MaterialError> {
    let marlow = MarlowCurve::new(input.loading, Interpolation::Linear)?;
    let unloading = UnloadingFamily::from_curves(input.unloading)?;
    unloading.validate(&marlow)?;
    let plasticity = if unloading.is_empty() {
        None
    } else {
        Some(extract_plasticity_table(&unloading, &marlow)?)
    };
    let (damage, damage_error) = if unloading.members.len() >= 2 {
        match fit_damage_params(&marlow, &unloading) {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    let mut report = CalibrationReport {
        damage_rms_mpa: damage.and_then(|d| d.fit_rms_mpa),
        damage_error,
        prony_storage_rel_rms: None,
        prony_loss_rel_rms: None,
        max_tan_delta: None,
        viscoelastic_enabled: false,
    };
    let mut prony = None;
    let mut viscoelastic_enabled = false;
    if let Some(sweep) = &input.sweep {
        sweep.validate()?;
        report.max_tan_delta = sweep.max_tan_delta().map(|m| m.1);
        viscoelastic_enabled = check_viscoelastic_dominance(sweep);
        if viscoelastic_enabled {
            let fit = fit_prony(sweep, input.prony_terms)?;
            report.prony_storage_rel_rms = Some(fit.storage_rel_rms);
            report.prony_loss_rel_rms = Some(fit.loss_rel_rms);
            prony = Some(fit.series);
        }
    }
    report.viscoelastic_enabled = viscoelastic_enabled;
    let card = MaterialCard {
        name: input.name,
        marlow,
        unloading,
        damage,
        plasticity,
        prony,
        alpha_t: input.alpha_t,
        poisson: input.poisson,
        density: input.density,
        viscoelastic_enabled,
    };
    card.validate()?;
    Ok((card, report))
}

/// Stress of the main loading curve at `strain`.
pub fn eval_uniaxial_stress(marlow: &MarlowCurve, strain: f64) -> Result<f64, MaterialError> {
    marlow.eval_uniaxial_stress(strain)
}

/// Unloading curve of `card` for initial residual stress `sigma0`.
pub fn select_unloading_curve(card: &MaterialCard, sigma0: f64) -> Result<DmaCurve, MaterialError> {
    card.select_unloading_curve(sigma0)
}

/// Shrinkage released when the residual stress drops from `sigma0` to zero.
pub fn recoverable_strain(card: &MaterialCard, sigma0: f64) -> Result<f64, MaterialError> {
    card.recoverable_strain(sigma0)
}

impl MaterialCard {
    /// PLA card calibrated from the bundled 80 °C data.
    pub fn pla() -> Self {
        static PLA: std::sync::OnceLock<MaterialCard> = std::sync::OnceLock::new();
        PLA.get_or_init(Self::calibrate_pla).clone()
    }

    fn calibrate_pla() -> Self {
        let input = CalibrationInput {
            name: "PLA".into(),
            loading: crate::reference::pla_loading(),
            unloading: crate::reference::pla_unloading(),
            sweep: Some(crate::reference::pla_sweep()),
            alpha_t: PLA_ALPHA_T,
            poisson: PLA_POISSON,
            density: DEFAULT_DENSITY,
            prony_terms: DEFAULT_PRONY_TERMS,
        };
        calibrate(input).expect("bundled PLA data calibrates").0
    }

    /// CFPLA card: linear fallback loading curve using the lowest-frequency
    /// storage modulus, no unloading data, no viscoelasticity.
    pub fn cfpla() -> Self {
        let sweep = crate::reference::cfpla_sweep();
        let modulus = sweep.rows[0].storage_mpa;
        Self::linear_elastic("CFPLA", modulus, CFPLA_FALLBACK_MAX_STRAIN, CFPLA_ALPHA_T, CFPLA_POISSON, DEFAULT_DENSITY)
            .expect("CFPLA fallback is valid")
    }

    /// Card with a straight-line loading curve and nothing else.
    pub fn linear_elastic(
        name: &str,
        modulus: f64,
        max_strain: f64,
        alpha_t: f64,
        poisson: f64,
        density: f64,
    ) -> Result<Self, MaterialError> {
        let card = Self {
            name: name.into(),
            marlow: MarlowCurve::linear(modulus, max_strain)?,
            unloading: UnloadingFamily::default(),
            damage: None,
            plasticity: None,
            prony: None,
            alpha_t,
            poisson,
            density,
            viscoelastic_enabled: false,
        };
        card.validate()?;
        Ok(card)
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        if !(self.poisson > 0.0 && self.poisson < 0.5) {
            return Err(MaterialError::InvalidCard(format!("poisson {} not in (0, 0.5)", self.poisson)));
        }
        if !(self.alpha_t > 0.0) {
            return Err(MaterialError::InvalidCard(format!("alpha_t {} must be > 0", self.alpha_t)));
        }
        if !(self.density > 0.0) {
            return Err(MaterialError::InvalidCard(format!("density {} must be > 0", self.density)));
        }
        if self.viscoelastic_enabled && self.prony.is_none() {
            return Err(MaterialError::InvalidCard("viscoelastic_enabled requires a Prony series".into()));
        }
        self.marlow.validate()?;
        self.unloading.validate(&self.marlow)?;
        if let Some(d) = &self.damage {
            d.validate(self.marlow.strain_energy(self.marlow.max_strain()))?;
        }
        if let Some(p) = &self.plasticity {
            p.validate()?;
        }
        if let Some(p) = &self.prony {
            p.validate()?;
            if self.viscoelastic_enabled && !(p.e_infinity > 0.0) {
                return Err(MaterialError::InvalidCard(
                    "viscoelastic card needs e_infinity > 0 for long-term scaling".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn select_unloading_curve(&self, sigma0: f64) -> Result<DmaCurve, MaterialError> {
        match self.unloading.mode {
            UnloadingMode::Tabular => self.unloading.select_tabular(sigma0),
            UnloadingMode::OgdenRoxburgh => {
                let params = self.damage.as_ref().ok_or_else(|| {
                    MaterialError::InvalidCard("damage mode selected but no damage parameters".into())
                })?;
                self.unloading.synthesize(sigma0, &self.marlow, params, SYNTH_POINTS)
            }
        }
    }

    pub fn recoverable_strain(&self, sigma0: f64) -> Result<f64, MaterialError> {
        if sigma0 == 0.0 {
            return Ok(0.0);
        }
        let c = self.select_unloading_curve(sigma0)?;
        let first = c.strain[0];
        let anchor = *c.strain.last().unwrap_or(&first);
        Ok(first - anchor)
    }

    /// Modulus of a layer that carries no residual stress: secant of the
    /// loading curve up to a fifth of its peak tabulated stress.
    pub fn reference_modulus(&self) -> f64 {
        self.marlow.secant_modulus(SECANT_FRACTION)
    }

    /// Modulus of an actuator layer released from `sigma0`: secant of the
    /// selected unloading curve over its final fifth of stress.
    pub fn released_modulus(&self, sigma0: f64) -> Result<f64, MaterialError> {
        if sigma0 == 0.0 || self.unloading.is_empty() {
            return Ok(self.reference_modulus());
        }
        let c = self.select_unloading_curve(sigma0)?;
        let anchor = *c.strain.last().unwrap_or(&0.0);
        let target = SECANT_FRACTION * c.stress[0];
        // Stress is descending along the curve; find where it crosses target.
        let k = c.stress.iter().position(|&s| s <= target).unwrap_or(c.len() - 1);
        let e = if k == 0 {
            c.strain[0]
        } else {
            let (s0, s1) = (c.stress[k - 1], c.stress[k]);
            let (e0, e1) = (c.strain[k - 1], c.strain[k]);
            if s0 == s1 {
                e1
            } else {
                e0 + (target - s0) * (e1 - e0) / (s1 - s0)
            }
        };
        let de = e - anchor;
        if de <= 0.0 {
            return Err(MaterialError::InvalidCard(format!(
                "unloading curve at {sigma0} MPa has no positive secant range"
            )));
        }
        Ok(target / de)
    }

    /// Multiplier taking the calibrated (long-term) modulus to `regime`.
    pub fn regime_factor(&self, regime: StiffnessRegime) -> f64 {
        match (regime, self.viscoelastic_enabled, &self.prony) {
            (StiffnessRegime::Instantaneous, true, Some(p)) if p.e_infinity > 0.0 => {
                p.instantaneous_modulus() / p.e_infinity
            }
            _ => 1.0,
        }
    }

    pub fn to_json(&self) -> String {
        doc::to_json(CARD_KIND, self)
    }

    pub fn from_json(text: &str) -> Result<Self, MaterialError> {
        let card: Self = doc::from_json(CARD_KIND, text)?;
        card.validate()?;
        Ok(card)
    }

    pub fn save(&self, path: &Path) -> Result<(), MaterialError> {
        Ok(doc::write_file(path, &self.to_json())?)
    }

    pub fn load(path: &Path) -> Result<Self, MaterialError> {
        Self::from_json(&doc::read_file(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_constants() {
        let pla = MaterialCard::pla();
        assert_eq!(pla.alpha_t, 9.17e-4);
        assert_eq!(pla.poisson, 0.419);
        let cf = MaterialCard::cfpla();
        assert_eq!(cf.alpha_t, 9.97e-5);
        assert_eq!(cf.poisson, 0.359);
        assert!(!cf.viscoelastic_enabled);
        assert!(cf.unloading.is_empty());
    }

    #[test]
    fn recoverable_strain_zero_and_range() {
        let pla = MaterialCard::pla();
        assert_eq!(pla.recoverable_strain(0.0).unwrap(), 0.0);
        assert!(matches!(
            pla.recoverable_strain(0.30),
            Err(MaterialError::OutOfCalibrationRange { .. })
        ));
    }

    #[test]
    fn moduli_are_plausible() {
        let pla = MaterialCard::pla();
        let e_ref = pla.reference_modulus();
        assert!((e_ref - 1.907).abs() < 0.01, "{e_ref}");
        let e_act = pla.released_modulus(0.203).unwrap();
        assert!((e_act - 0.98).abs() < 0.02, "{e_act}");
        assert!(pla.regime_factor(StiffnessRegime::Instantaneous) > 1.0);
        assert_eq!(pla.regime_factor(StiffnessRegime::LongTerm), 1.0);
        assert_eq!(MaterialCard::cfpla().regime_factor(StiffnessRegime::Instantaneous), 1.0);
    }

    #[test]
    fn invalid_constants_rejected() {
        assert!(MaterialCard::linear_elastic("x", 10.0, 0.1, 1e-4, 0.5, 1000.0).is_err());
        assert!(MaterialCard::linear_elastic("x", 10.0, 0.1, 0.0, 0.3, 1000.0).is_err());
        assert!(MaterialCard::linear_elastic("x", 10.0, 0.1, 1e-4, 0.3, 0.0).is_err());
    }
}
