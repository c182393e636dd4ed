//! Residual-stress identification by shooting: adjust sigma0 until the
//! simulated end distances of bending units match triggering measurements.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{BendingUnitSpec, GridDesign, GridError, MaterialSet, MeshConfig, DEFAULT_TRIGGER_TEMPERATURE_C};
use crate::material::{MaterialCard, MaterialError};
use crate::numeric::interp::lerp_table;
use crate::sim::{run_sequential, SimError, SolverConfig};
use crate::unit::{end_distance, unit_shape, ShapeOptions};

pub const RESULT_KIND: &str = "shooter_result";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShooterError {
    #[error("no observations")]
    NoObservations,
    #[error("invalid observation {index}: {message}")]
    InvalidObservation { index: usize, message: String },
    #[error("mismatch does not change sign over sigma0 in [{lo}, {hi}] MPa")]
    NoBracket { lo: f64, hi: f64 },
    #[error("no convergence after {} trials (best sigma0 {} MPa, residual {} mm)", .best.iterations, .best.sigma0, .best.residual)]
    MaxIterations { best: Box<ShooterResult> },
    #[error("optimum at sigma0 {} MPa leaves {} mm mismatch, above tolerance", .best.sigma0, .best.residual)]
    ToleranceNotMet { best: Box<ShooterResult> },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("csv: {0}")]
    Csv(String),
}

/// Unit dimensions, mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitGeometry {
    pub length: f64,
    pub width: f64,
    pub total_thickness: f64,
    pub actuator_thickness: f64,
}

impl Default for UnitGeometry {
    fn default() -> Self {
        Self {
            length: 100.0,
            width: 7.2,
            total_thickness: 4.0,
            actuator_thickness: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggeringObservation {
    pub actuator_ratio: f64,
    /// mm
    pub measured_end_distance: f64,
    #[serde(default)]
    pub geometry: UnitGeometry,
    /// °C
    pub temperature_c: f64,
}

impl TriggeringObservation {
    pub fn new(actuator_ratio: f64, measured_end_distance: f64) -> Self {
        Self {
            actuator_ratio,
            measured_end_distance,
            geometry: UnitGeometry::default(),
            temperature_c: DEFAULT_TRIGGER_TEMPERATURE_C,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.actuator_ratio) {
            return Err("actuator_ratio must lie in [0, 1]".into());
        }
        let l = self.geometry.length;
        if !(self.measured_end_distance > 0.0 && self.measured_end_distance <= 1.1 * l) {
            return Err(format!("measured distance must lie in (0, {}] mm", 1.1 * l));
        }
        Ok(())
    }

    /// Unit spec of this observation at a trial stress, both layers of `material`.
    pub fn unit_spec(&self, material: &str, sigma0: f64) -> BendingUnitSpec {
        let g = self.geometry;
        BendingUnitSpec {
            length: g.length,
            width: g.width,
            total_thickness: g.total_thickness,
            actuator_thickness: g.actuator_thickness,
            actuator_ratio: self.actuator_ratio,
            actuator_material: material.into(),
            constraint_material: material.into(),
            sigma0,
            orientation: [1.0, 0.0, 0.0],
        }
    }
}

/// How trials treat the unloading definition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "sigma0")]
pub enum Coupling {
    /// Select the unloading curve at every trial sigma0.
    Reselect,
    /// Keep the curve selected at this stress and move along it.
    FrozenAt(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShooterConfig {
    pub tol_mm: f64,
    pub max_iter: usize,
    /// Simulate trials with the beam network under gravity.
    pub high_fidelity: bool,
    pub coupling: Coupling,
    /// Segments per unit in high-fidelity trials.
    pub segments: usize,
}

impl Default for ShooterConfig {
    fn default() -> Self {
        Self {
            tol_mm: 0.5,
            max_iter: 60,
            high_fidelity: false,
            coupling: Coupling::Reselect,
            segments: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotTrial {
    /// MPa
    pub sigma0: f64,
    /// Simulated distance per observation, mm.
    pub simulated: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShooterResult {
    /// MPa
    pub sigma0: f64,
    /// Largest absolute distance mismatch at `sigma0`, mm.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<ShotTrial>,
}

impl ShooterResult {
    pub fn to_json(&self) -> String {
        crate::doc::to_json(RESULT_KIND, self)
    }

    pub fn from_json(text: &str) -> Result<Self, crate::doc::DocError> {
        crate::doc::from_json(RESULT_KIND, text)
    }
}

/// Recoverable strain when releasing from `sigma0` along a fixed curve.
fn frozen_recoverable(card: &MaterialCard, at: f64, sigma0: f64) -> Result<(f64, f64), MaterialError> {
    let c = card.select_unloading_curve(at)?;
    let anchor = *c.strain.last().unwrap_or(&0.0);
    // Curve runs from peak stress down to zero; flip to ascending stress.
    let s: Vec<f64> = c.stress.iter().rev().copied().collect();
    let e: Vec<f64> = c.strain.iter().rev().copied().collect();
    let strain = lerp_table(&s, &e, sigma0);
    Ok((strain - anchor, card.released_modulus(at)?))
}

fn simulate(obs: &TriggeringObservation, sigma0: f64, card: &MaterialCard, config: &ShooterConfig) -> Result<f64, ShooterError> {
    let name = card.name.as_str();
    let spec = obs.unit_spec(name, sigma0);
    let mut cards = MaterialSet::new();
    cards.insert(name.to_string(), card.clone());
    if config.high_fidelity {
        if let Coupling::FrozenAt(_) = config.coupling {
            return Err(ShooterError::InvalidConfig("frozen coupling needs closed-form trials".into()));
        }
        let mut design = GridDesign::single_unit("trial", spec);
        design.trigger_temperature_c = obs.temperature_c;
        let r = run_sequential(&design, &cards, &MeshConfig { n_min: config.segments }, &SolverConfig::default())?;
        return Ok(r.stage_b.member_end_distance(&r.mesh, "u1")?);
    }
    let mut opts = ShapeOptions {
        trigger_temperature_c: obs.temperature_c,
        ..ShapeOptions::default()
    };
    if let Coupling::FrozenAt(at) = config.coupling {
        if sigma0 > 0.0 && obs.actuator_ratio > 0.0 {
            let (rec, e) = frozen_recoverable(card, at, sigma0)?;
            opts.recoverable_strain = Some(rec);
            opts.actuator_modulus = Some(e * card.regime_factor(opts.regime));
        }
    }
    Ok(end_distance(&unit_shape(&spec, &cards, &opts)?))
}

/// Simulated minus measured end distance, mm.
pub fn mismatch(obs: &TriggeringObservation, sigma0: f64, card: &MaterialCard) -> Result<f64, ShooterError> {
    Ok(simulate(obs, sigma0, card, &ShooterConfig::default())? - obs.measured_end_distance)
}

struct Objective<'a> {
    obs: &'a [TriggeringObservation],
    card: &'a MaterialCard,
    config: &'a ShooterConfig,
    lo: f64,
    hi: f64,
    history: Vec<ShotTrial>,
}

impl Objective<'_> {
    fn distances(&mut self, sigma0: f64) -> Result<Vec<f64>, ShooterError> {
        let d = self
            .obs
            .iter()
            .map(|o| simulate(o, sigma0, self.card, self.config))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(d)
    }

    fn mismatches(&self, d: &[f64]) -> Vec<f64> {
        d.iter().zip(self.obs).map(|(s, o)| s - o.measured_end_distance).collect()
    }

    /// Half the derivative of the summed squared mismatch.
    fn gradient(&mut self, sigma0: f64) -> Result<f64, ShooterError> {
        // Wider than the exact-member match window of the unloading family.
        let h = 1e-4 * (self.hi - self.lo);
        let a = (sigma0 - h).max(self.lo);
        let b = (sigma0 + h).min(self.hi);
        let d = self.distances(sigma0)?;
        let da = self.distances(a)?;
        let db = self.distances(b)?;
        let m = self.mismatches(&d);
        let g: f64 = m
            .iter()
            .zip(da.iter().zip(&db))
            .map(|(mi, (x, y))| mi * (y - x) / (b - a))
            .sum();
        self.history.push(ShotTrial { sigma0, simulated: d });
        Ok(g)
    }

    fn residual_at(&self, sigma0: f64) -> f64 {
        let t = self.history.iter().rev().find(|t| t.sigma0 == sigma0).expect("evaluated");
        self.mismatches(&t.simulated).iter().fold(0.0, |a, m| a.max(m.abs()))
    }
}

/// Find the sigma0 minimising the squared distance mismatch over all
/// observations by a bisection-safeguarded secant iteration.
pub fn shoot_residual_stress(
    obs: &[TriggeringObservation],
    card: &MaterialCard,
    config: &ShooterConfig,
) -> Result<ShooterResult, ShooterError> {
    if obs.is_empty() {
        return Err(ShooterError::NoObservations);
    }
    for (index, o) in obs.iter().enumerate() {
        o.validate().map_err(|message| ShooterError::InvalidObservation { index, message })?;
    }
    if !(config.tol_mm > 0.0) || config.max_iter < 2 {
        return Err(ShooterError::InvalidConfig("tol_mm must be > 0 and max_iter >= 2".into()));
    }
    let (lo, hi) = card.unloading.span().ok_or(MaterialError::EmptyFamily)?;
    let mut f = Objective {
        obs,
        card,
        config,
        lo,
        hi,
        history: Vec::new(),
    };

    let (mut a, mut b) = (lo, hi);
    let mut fa = f.gradient(a)?;
    let fb = f.gradient(b)?;
    if (fa > 0.0) == (fb > 0.0) {
        // No interior stationary point; an end of the span may still match.
        let end = if f.residual_at(a) <= f.residual_at(b) { a } else { b };
        if f.residual_at(end) < config.tol_mm {
            return finish(f, end);
        }
        return Err(ShooterError::NoBracket { lo, hi });
    }
    // Secant through the two latest trials, bisection when it leaves the
    // bracket or stalls.
    let (mut p0, mut f0, mut p1, mut f1) = (a, fa, b, fb);
    let mut width = b - a;
    let sigma_tol = 1e-12 * (hi - lo).max(1.0);
    let mut best = if fa.abs() < fb.abs() { a } else { b };
    while f.history.len() < config.max_iter {
        let mut c = if f1 != f0 { p1 - f1 * (p1 - p0) / (f1 - f0) } else { f64::NAN };
        let inside = c > a.min(b) && c < a.max(b);
        if !inside || (b - a).abs() > 0.5 * width {
            c = 0.5 * (a + b);
        }
        width = (b - a).abs();
        let fc = f.gradient(c)?;
        if f.residual_at(c) <= f.residual_at(best) {
            best = c;
        }
        if fc == 0.0 || (b - a).abs() < sigma_tol || (c - p1).abs() < sigma_tol {
            return finish(f, c);
        }
        if (fc > 0.0) == (fa > 0.0) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
        p0 = p1;
        f0 = f1;
        p1 = c;
        f1 = fc;
    }
    let residual = f.residual_at(best);
    Err(ShooterError::MaxIterations {
        best: Box::new(ShooterResult {
            sigma0: best,
            residual,
            iterations: f.history.len(),
            converged: false,
            history: f.history,
        }),
    })
}

fn finish(f: Objective<'_>, sigma0: f64) -> Result<ShooterResult, ShooterError> {
    let residual = f.residual_at(sigma0);
    let converged = residual < f.config.tol_mm;
    let result = ShooterResult {
        sigma0,
        residual,
        iterations: f.history.len(),
        converged,
        history: f.history,
    };
    if converged {
        Ok(result)
    } else {
        Err(ShooterError::ToleranceNotMet { best: Box::new(result) })
    }
}

/// Parse a `.obs.csv` file body: `actuator_ratio,distance_mm,temp_c`.
pub fn parse_observations(text: &str) -> Result<Vec<TriggeringObservation>, ShooterError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| ShooterError::Csv(e.to_string()))?.clone();
    let want = ["actuator_ratio", "distance_mm", "temp_c"];
    if headers.iter().collect::<Vec<_>>() != want {
        return Err(ShooterError::Csv(format!("expected columns {}", want.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| ShooterError::Csv(e.to_string()))?;
        let num = |k: usize| {
            rec[k]
                .parse::<f64>()
                .map_err(|_| ShooterError::Csv(format!("row {}: bad number {:?}", i + 1, &rec[k])))
        };
        let mut o = TriggeringObservation::new(num(0)?, num(1)?);
        o.temperature_c = num(2)?;
        out.push(o);
    }
    if out.is_empty() {
        return Err(ShooterError::NoObservations);
    }
    Ok(out)
}

pub fn serialize_observations(obs: &[TriggeringObservation]) -> String {
    let mut s = String::from("actuator_ratio,distance_mm,temp_c\n");
    for o in obs {
        s.push_str(&format!("{},{},{}\n", o.actuator_ratio, o.measured_end_distance, o.temperature_c));
    }
    s
}
