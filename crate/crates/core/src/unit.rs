//! Section-level mechanics of a bi-layer bending unit and its closed-form
//! triggered shape.
//!
//! Layers are stacked from the bottom (constraint side) upward. Strain over
//! the section is `ε(z) = ε0 + z·χ` with `z` measured upward from the
//! modulus-weighted centroid, so a shrinking top layer gives `χ < 0`.

use serde::{Deserialize, Serialize};

use crate::grid::{BendingUnitSpec, GridError, MaterialSet, REFERENCE_TEMPERATURE_C};
use crate::material::{MaterialCard, StiffnessRegime};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// mm
    pub thickness: f64,
    /// mm
    pub width: f64,
    /// MPa
    pub modulus: f64,
    pub eigenstrain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredSection {
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionResponse {
    /// Free axial strain at the centroid.
    pub eigenstrain: f64,
    /// Free curvature χ, 1/mm.
    pub eigencurvature: f64,
    /// EA, N.
    pub axial_stiffness: f64,
    /// EI about the width axis through the centroid, N·mm².
    pub bending_stiffness: f64,
    /// Offset of the modulus-weighted centroid from mid-height, mm.
    pub centroid: f64,
}

impl LayeredSection {
    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Centre of each layer relative to the section's mid-height. Written as
    /// half the difference of the thickness below and above, so a mirrored
    /// stack gives exactly negated centres.
    fn layer_centres(&self) -> Vec<f64> {
        let n = self.layers.len();
        let mut below = vec![0.0; n];
        let mut above = vec![0.0; n];
        for i in 1..n {
            below[i] = below[i - 1] + self.layers[i - 1].thickness;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            above[i] = above[i + 1] + self.layers[i + 1].thickness;
        }
        (0..n).map(|i| 0.5 * (below[i] - above[i])).collect()
    }

    /// Axial force and moment about the centroid for a given strain state.
    pub fn resultants(&self, strain: f64, curvature: f64) -> (f64, f64) {
        let zbar = self.centroid();
        let mut n = 0.0;
        let mut m = 0.0;
        for (l, zc) in self.layers.iter().zip(self.layer_centres()) {
            let d = zc - zbar;
            let a = l.width * l.thickness;
            let i = l.width * l.thickness.powi(3) / 12.0 + a * d * d;
            n += l.modulus * (a * (strain - l.eigenstrain) + a * d * curvature);
            m += l.modulus * (a * d * (strain - l.eigenstrain) + i * curvature);
        }
        (n, m)
    }

    pub fn centroid(&self) -> f64 {
        let num: f64 = self
            .layers
            .iter()
            .zip(self.layer_centres())
            .map(|(l, zc)| l.modulus * l.width * l.thickness * zc)
            .sum();
        let den: f64 = self.layers.iter().map(|l| l.modulus * l.width * l.thickness).sum();
        num / den
    }

    /// EI about the through-thickness axis (in-plane bending).
    pub fn lateral_bending_stiffness(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.modulus * l.thickness * l.width.powi(3) / 12.0)
            .sum()
    }
}

/// Free strain and curvature of a layered section, plus its stiffnesses.
pub fn section_response(section: &LayeredSection) -> SectionResponse {
    let zbar = section.centroid();
    let centres = section.layer_centres();
    let mut ea = 0.0;
    let mut num_e = 0.0;
    let mut ei = 0.0;
    let mut num_k = 0.0;
    for (l, zc) in section.layers.iter().zip(centres) {
        let a = l.width * l.thickness;
        let d = zc - zbar;
        ea += l.modulus * a;
        num_e += l.modulus * a * l.eigenstrain;
        ei += l.modulus * (l.width * l.thickness.powi(3) / 12.0 + a * d * d);
        num_k += l.modulus * a * d * l.eigenstrain;
    }
    SectionResponse {
        eigenstrain: num_e / ea,
        eigencurvature: num_k / ei,
        axial_stiffness: ea,
        bending_stiffness: ei,
        centroid: zbar,
    }
}

/// One circular arc of a unit's centreline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    /// mm
    pub arc_length: f64,
    /// Signed; positive turns the tangent toward the actuator side. 1/mm.
    pub curvature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitShape {
    pub arcs: Vec<Arc>,
    /// Start point in the unit's bending plane (along, up), mm.
    pub start: [f64; 2],
    /// Start heading angle in the bending plane, rad.
    pub heading: f64,
}

impl UnitShape {
    pub fn straight(length: f64) -> Self {
        Self {
            arcs: vec![Arc {
                arc_length: length,
                curvature: 0.0,
            }],
            start: [0.0, 0.0],
            heading: 0.0,
        }
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.arc_length).sum()
    }

    /// Point and heading after walking `s` along the shape.
    pub fn point_at(&self, s: f64) -> ([f64; 2], f64) {
        let mut p = self.start;
        let mut th = self.heading;
        let mut left = s;
        for a in &self.arcs {
            let step = left.min(a.arc_length);
            let (dp, dth) = arc_step(step, a.curvature, th);
            p = [p[0] + dp[0], p[1] + dp[1]];
            th += dth;
            left -= step;
            if left <= 0.0 {
                break;
            }
        }
        (p, th)
    }

    pub fn end_point(&self) -> [f64; 2] {
        self.point_at(self.total_length()).0
    }

    /// Polyline with `per_arc` chords on every curved arc.
    pub fn polyline(&self, per_arc: usize) -> Vec<[f64; 2]> {
        let mut out = vec![self.start];
        let mut s0 = 0.0;
        for a in &self.arcs {
            let n = if a.curvature == 0.0 { 1 } else { per_arc.max(1) };
            for k in 1..=n {
                out.push(self.point_at(s0 + a.arc_length * k as f64 / n as f64).0);
            }
            s0 += a.arc_length;
        }
        out
    }
}

fn arc_step(s: f64, kappa: f64, heading: f64) -> ([f64; 2], f64) {
    let phi = kappa * s;
    // Chord of the arc: length s·sinc(φ/2), direction heading + φ/2.
    let half = 0.5 * phi;
    let sinc = if half.abs() < 1e-8 {
        1.0 - half * half / 6.0
    } else {
        half.sin() / half
    };
    let c = s * sinc;
    let dir = heading + half;
    ([c * dir.cos(), c * dir.sin()], phi)
}

/// Chord between the ends of a shape.
pub fn end_distance(shape: &UnitShape) -> f64 {
    let e = shape.end_point();
    ((e[0] - shape.start[0]).powi(2) + (e[1] - shape.start[1]).powi(2)).sqrt()
}

/// Knobs for [`unit_shape`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeOptions {
    pub regime: StiffnessRegime,
    pub trigger_temperature_c: f64,
    /// Overrides the actuator layer modulus, MPa.
    pub actuator_modulus: Option<f64>,
    /// Overrides the constraint layer modulus, MPa.
    pub constraint_modulus: Option<f64>,
    /// Overrides the actuator's recoverable strain.
    pub recoverable_strain: Option<f64>,
    /// Fraction of the recoverable shrinkage acting along the unit axis.
    pub projection: f64,
}

impl Default for ShapeOptions {
    fn default() -> Self {
        Self {
            regime: StiffnessRegime::Instantaneous,
            trigger_temperature_c: crate::grid::DEFAULT_TRIGGER_TEMPERATURE_C,
            actuator_modulus: None,
            constraint_modulus: None,
            recoverable_strain: None,
            projection: 1.0,
        }
    }
}

/// Layer data for the two regions of a unit.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSections {
    pub actuated: LayeredSection,
    pub plain: LayeredSection,
}

fn card<'a>(cards: &'a MaterialSet, name: &str) -> Result<&'a MaterialCard, GridError> {
    cards.get(name).ok_or_else(|| GridError::UnknownMaterial(name.to_string()))
}

/// Sections of the actuated and plain regions with eigenstrains applied.
pub fn unit_sections(spec: &BendingUnitSpec, cards: &MaterialSet, opts: &ShapeOptions) -> Result<UnitSections, GridError> {
    spec.validate()?;
    let act = card(cards, &spec.actuator_material)?;
    let con = card(cards, &spec.constraint_material)?;
    let dt = opts.trigger_temperature_c - REFERENCE_TEMPERATURE_C;
    let shrink = match opts.recoverable_strain {
        Some(r) => r,
        None if spec.actuator_ratio > 0.0 => act.recoverable_strain(spec.sigma0)?,
        None => 0.0,
    };
    let e_act = match opts.actuator_modulus {
        Some(e) => e,
        None => act.released_modulus(spec.sigma0)? * act.regime_factor(opts.regime),
    };
    let e_con = match opts.constraint_modulus {
        Some(e) => e,
        None => con.reference_modulus() * con.regime_factor(opts.regime),
    };
    let constraint_layer = Layer {
        thickness: spec.constraint_thickness(),
        width: spec.width,
        modulus: e_con,
        eigenstrain: con.alpha_t * dt,
    };
    let actuated = LayeredSection {
        layers: vec![
            constraint_layer,
            Layer {
                thickness: spec.actuator_thickness,
                width: spec.width,
                modulus: e_act,
                eigenstrain: -shrink * opts.projection + act.alpha_t * dt,
            },
        ],
    };
    let plain = LayeredSection {
        layers: vec![Layer {
            thickness: spec.total_thickness,
            width: spec.width,
            modulus: e_con,
            eigenstrain: con.alpha_t * dt,
        }],
    };
    Ok(UnitSections { actuated, plain })
}

/// Closed-form triggered shape: the actuated part becomes an arc at the
/// section's free curvature, the rest stays straight.
pub fn unit_shape(spec: &BendingUnitSpec, cards: &MaterialSet, opts: &ShapeOptions) -> Result<UnitShape, GridError> {
    let secs = unit_sections(spec, cards, opts)?;
    let mut arcs = Vec::new();
    let la = spec.actuator_ratio * spec.length;
    let lp = spec.length - la;
    if la > 0.0 {
        let r = section_response(&secs.actuated);
        arcs.push(Arc {
            arc_length: la * (1.0 + r.eigenstrain),
            curvature: -r.eigencurvature,
        });
    }
    if lp > 0.0 {
        let r = section_response(&secs.plain);
        arcs.push(Arc {
            arc_length: lp * (1.0 + r.eigenstrain),
            curvature: 0.0,
        });
    }
    Ok(UnitShape {
        arcs,
        start: [0.0, 0.0],
        heading: 0.0,
    })
}
