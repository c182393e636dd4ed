use serde::{Deserialize, Serialize};

use super::{norm, sub, GridDesign, GridError, MaterialSet, MemberKind, Vec3};
use crate::material::{MaterialCard, StiffnessRegime};
use crate::unit::{section_response, Layer, LayeredSection};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshConfig {
    /// Minimum segment count per member.
    pub n_min: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { n_min: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerRole {
    Actuator,
    Constraint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshLayer {
    pub role: LayerRole,
    pub material: String,
    /// mm
    pub thickness: f64,
    /// mm
    pub width: f64,
    /// Long-term modulus, MPa. Zero until materials are assigned.
    pub modulus: f64,
    /// Instantaneous over long-term modulus.
    pub instant_factor: f64,
    pub poisson: f64,
    /// kg/m³
    pub density: f64,
    pub eigenstrain: f64,
}

impl MeshLayer {
    fn new(role: LayerRole, material: &str, thickness: f64, width: f64) -> Self {
        Self {
            role,
            material: material.to_string(),
            thickness,
            width,
            modulus: 0.0,
            instant_factor: 1.0,
            poisson: 0.0,
            density: 0.0,
            eigenstrain: 0.0,
        }
    }

    /// Modulus with `blend` between instantaneous (0) and long-term (1).
    pub fn modulus_at(&self, blend: f64) -> f64 {
        self.modulus * (self.instant_factor * (1.0 - blend) + blend)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshNode {
    /// mm
    pub position: Vec3,
    pub fixed: bool,
    /// Design node id for member end nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub member_id: String,
    pub segment_index: usize,
    pub nodes: [usize; 2],
    /// Parameter range along the member, in [0, 1].
    pub t_range: [f64; 2],
    /// Reference length, mm.
    pub length: f64,
    /// Reference triad: axis, lateral, stacking direction.
    pub frame: [Vec3; 3],
    pub actuated: bool,
    #[serde(default)]
    pub sigma0: f64,
    /// Cosine squared between the actuator print path and the axis.
    #[serde(default = "one")]
    pub projection: f64,
    /// Layers from the bottom face upward.
    pub layers: Vec<MeshLayer>,
    pub eigenstrain: f64,
    /// Free curvature about the lateral axis, 1/mm.
    pub eigencurvature: f64,
}

fn one() -> f64 {
    1.0
}

impl Element {
    pub fn section(&self, blend: f64) -> LayeredSection {
        LayeredSection {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    thickness: l.thickness,
                    width: l.width,
                    modulus: l.modulus_at(blend),
                    eigenstrain: l.eigenstrain,
                })
                .collect(),
        }
    }

    /// Area, mm².
    pub fn area(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness * l.width).sum()
    }

    /// Mass per unit length, kg/mm.
    pub fn line_mass(&self) -> f64 {
        self.layers.iter().map(|l| l.density * 1e-9 * l.thickness * l.width).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamMesh {
    pub nodes: Vec<MeshNode>,
    pub elements: Vec<Element>,
    /// First global dof of each node; six per node.
    pub dof_map: Vec<usize>,
    /// Mesh nodes of each member in order from node_a to node_b.
    pub member_nodes: std::collections::BTreeMap<String, Vec<usize>>,
    /// m/s²
    pub gravity: Vec3,
    /// Trigger minus reference temperature, °C.
    pub delta_t: f64,
}

impl BeamMesh {
    pub fn n_dofs(&self) -> usize {
        6 * self.nodes.len()
    }

    pub fn node_dofs(&self, node: usize) -> [usize; 6] {
        let s = self.dof_map[node];
        [s, s + 1, s + 2, s + 3, s + 4, s + 5]
    }

    pub fn member_length(&self, member: &str) -> Option<f64> {
        self.member_nodes
            .contains_key(member)
            .then(|| self.elements.iter().filter(|e| e.member_id == member).map(|e| e.length).sum())
    }
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Triad with `e1` along `axis` and `e3` as close to `up` as possible.
fn member_frame(axis: Vec3, up: Vec3) -> [Vec3; 3] {
    let e1 = scale(axis, 1.0 / norm(axis));
    let mut e3 = sub(up, scale(e1, dot(up, e1)));
    if norm(e3) < 1e-9 * norm(up).max(1.0) {
        // Member along `up`: pick any perpendicular.
        let trial = if e1[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        e3 = sub(trial, scale(e1, dot(trial, e1)));
    }
    let e3 = scale(e3, 1.0 / norm(e3));
    let e2 = cross(e3, e1);
    [e1, e2, e3]
}

/// Segment boundaries in member parameter for a unit with an actuated lead.
fn unit_breaks(ratio: f64, n_min: usize) -> (Vec<f64>, usize) {
    let n = n_min.max(1);
    if ratio <= 0.0 {
        return ((0..=n).map(|k| k as f64 / n as f64).collect(), 0);
    }
    if ratio >= 1.0 {
        return ((0..=n).map(|k| k as f64 / n as f64).collect(), n);
    }
    let mut na = ((ratio * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let mut np = n - na;
    if np == 0 {
        np = 1;
    }
    if na == 0 {
        na = 1;
    }
    let mut t: Vec<f64> = (0..=na).map(|k| ratio * k as f64 / na as f64).collect();
    for k in 1..=np {
        t.push(if k == np { 1.0 } else { ratio + (1.0 - ratio) * k as f64 / np as f64 });
    }
    (t, na)
}

/// Subdivide every member into beam elements. Materials are attached later
/// by [`assign_eigenstrains`].
pub fn mesh_design(design: &GridDesign, config: &MeshConfig) -> Result<BeamMesh, GridError> {
    design.validate()?;
    let mut nodes: Vec<MeshNode> = design
        .nodes
        .iter()
        .map(|n| MeshNode {
            position: n.position,
            fixed: n.fixed,
            design_id: Some(n.id.clone()),
        })
        .collect();
    let mut elements = Vec::new();
    let mut member_nodes = std::collections::BTreeMap::new();

    for m in &design.members {
        let ia = design.node_index(&m.node_a).expect("validated");
        let ib = design.node_index(&m.node_b).expect("validated");
        let pa = design.nodes[ia].position;
        let pb = design.nodes[ib].position;
        let axis = sub(pb, pa);
        let len = norm(axis);
        let frame = member_frame(axis, design.up);

        let (breaks, n_act, layers_act, layers_plain, sigma0, projection) = match m.kind {
            MemberKind::BendingUnit => {
                let u = m.unit.as_ref().expect("validated");
                let (t, na) = unit_breaks(u.actuator_ratio, config.n_min);
                let con_act = MeshLayer::new(LayerRole::Constraint, &u.constraint_material, u.constraint_thickness(), u.width);
                let act = MeshLayer::new(LayerRole::Actuator, &u.actuator_material, u.actuator_thickness, u.width);
                let plain = MeshLayer::new(LayerRole::Constraint, &u.constraint_material, u.total_thickness, u.width);
                let o = u.orientation;
                let c = dot(o, frame[0]) / norm(o);
                (t, na, vec![con_act, act], vec![plain], u.sigma0, c * c)
            }
            MemberKind::Joint => {
                let j = m.joint.as_ref().expect("validated");
                let n = config.n_min.max(1);
                let t = (0..=n).map(|k| k as f64 / n as f64).collect();
                let plain = MeshLayer::new(LayerRole::Constraint, &j.material, j.thickness, j.width);
                (t, 0, Vec::new(), vec![plain], 0.0, 1.0)
            }
        };

        let mut chain = vec![ia];
        for &t in &breaks[1..breaks.len() - 1] {
            nodes.push(MeshNode {
                position: [pa[0] + t * axis[0], pa[1] + t * axis[1], pa[2] + t * axis[2]],
                fixed: false,
                design_id: None,
            });
            chain.push(nodes.len() - 1);
        }
        chain.push(ib);

        for k in 0..breaks.len() - 1 {
            let actuated = k < n_act;
            elements.push(Element {
                member_id: m.id.clone(),
                segment_index: k,
                nodes: [chain[k], chain[k + 1]],
                t_range: [breaks[k], breaks[k + 1]],
                length: (breaks[k + 1] - breaks[k]) * len,
                frame,
                actuated,
                sigma0: if actuated { sigma0 } else { 0.0 },
                projection,
                layers: if actuated { layers_act.clone() } else { layers_plain.clone() },
                eigenstrain: 0.0,
                eigencurvature: 0.0,
            });
        }
        member_nodes.insert(m.id.clone(), chain);
    }

    let dof_map = (0..nodes.len()).map(|i| 6 * i).collect();
    Ok(BeamMesh {
        nodes,
        elements,
        dof_map,
        member_nodes,
        gravity: design.gravity_m_s2,
        delta_t: design.delta_t(),
    })
}

fn card<'a>(cards: &'a MaterialSet, name: &str) -> Result<&'a MaterialCard, GridError> {
    cards.get(name).ok_or_else(|| GridError::UnknownMaterial(name.to_string()))
}

/// Attach moduli, densities and eigenstrains to every layer, and compute
/// each element's free strain and curvature with instantaneous moduli.
pub fn assign_eigenstrains(mesh: &BeamMesh, cards: &MaterialSet) -> Result<BeamMesh, GridError> {
    let mut out = mesh.clone();
    let dt = mesh.delta_t;
    for e in &mut out.elements {
        for l in &mut e.layers {
            let c = card(cards, &l.material)?;
            l.poisson = c.poisson;
            l.density = c.density;
            l.instant_factor = c.regime_factor(StiffnessRegime::Instantaneous);
            match l.role {
                LayerRole::Actuator => {
                    l.modulus = c.released_modulus(e.sigma0)?;
                    l.eigenstrain = -c.recoverable_strain(e.sigma0)? * e.projection + c.alpha_t * dt;
                }
                LayerRole::Constraint => {
                    l.modulus = c.reference_modulus();
                    l.eigenstrain = c.alpha_t * dt;
                }
            }
        }
        let r = section_response(&e.section(0.0));
        e.eigenstrain = r.eigenstrain;
        e.eigencurvature = r.eigencurvature;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BendingUnitSpec, Node};

    fn cards() -> MaterialSet {
        let mut s = MaterialSet::new();
        s.insert("PLA".into(), MaterialCard::pla());
        s
    }

    fn unit(ratio: f64, sigma0: f64) -> GridDesign {
        GridDesign::single_unit("u", BendingUnitSpec::standard("PLA", "PLA", ratio, sigma0))
    }

    #[test]
    fn transition_on_boundary() {
        let m = mesh_design(&unit(0.75, 0.1), &MeshConfig::default()).unwrap();
        assert_eq!(m.elements.len(), 8);
        assert_eq!(m.elements.iter().filter(|e| e.actuated).count(), 6);
        assert_eq!(m.elements[5].t_range[1], 0.75);
        let total: f64 = m.elements.iter().map(|e| e.length).sum();
        assert!((total - 100.0).abs() < 1e-9 * 100.0);
    }

    #[test]
    fn odd_ratio_still_splits_on_transition() {
        let m = mesh_design(&unit(0.3, 0.1), &MeshConfig { n_min: 8 }).unwrap();
        let k = m.elements.iter().filter(|e| e.actuated).count();
        assert!(k >= 1 && m.elements.len() >= 8);
        assert!((m.elements[k - 1].t_range[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn ratio_zero_has_no_drive() {
        let mut d = unit(0.0, 0.0);
        d.trigger_temperature_c = 20.0;
        let m = assign_eigenstrains(&mesh_design(&d, &MeshConfig::default()).unwrap(), &cards()).unwrap();
        assert!(m.elements.iter().all(|e| e.eigenstrain == 0.0 && e.eigencurvature == 0.0));
    }

    #[test]
    fn actuator_layer_eigenstrain() {
        let m = assign_eigenstrains(&mesh_design(&unit(1.0, 0.203), &MeshConfig::default()).unwrap(), &cards()).unwrap();
        let act = &m.elements[0].layers[1];
        assert_eq!(act.role, LayerRole::Actuator);
        assert!((act.eigenstrain - (-0.121229)).abs() < 1e-6, "{}", act.eigenstrain);
        assert!(m.elements[0].eigencurvature < 0.0);

        let mut d = unit(1.0, 0.079);
        d.trigger_temperature_c = 20.0;
        let m = assign_eigenstrains(&mesh_design(&d, &MeshConfig::default()).unwrap(), &cards()).unwrap();
        assert!((m.elements[0].layers[1].eigenstrain + 0.044454).abs() < 1e-6);
    }

    #[test]
    fn free_unit_with_gravity_rejected() {
        let mut d = unit(0.5, 0.1);
        d.nodes[0].fixed = false;
        assert_eq!(mesh_design(&d, &MeshConfig::default()), Err(GridError::NoFixedNode));
    }

    #[test]
    fn vertical_member_gets_a_frame() {
        let mut d = unit(0.5, 0.1);
        d.nodes[1] = Node {
            id: "b".into(),
            position: [0.0, 0.0, 100.0],
            fixed: false,
        };
        let m = mesh_design(&d, &MeshConfig::default()).unwrap();
        let f = m.elements[0].frame;
        assert!((dot(f[0], f[2])).abs() < 1e-12 && (norm(f[1]) - 1.0).abs() < 1e-12);
    }
}
