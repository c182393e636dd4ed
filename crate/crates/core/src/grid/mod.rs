//! Grid designs: bending units and joints on a node graph, and their beam
//! discretisation.

mod mesh;

pub use mesh::{
    assign_eigenstrains, mesh_design, BeamMesh, Element, MeshConfig, MeshLayer, MeshNode,
};

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doc::{self, DocError};
use crate::material::{MaterialCard, MaterialError};

pub const DESIGN_KIND: &str = "grid_design";
/// Temperature at which prints are stress free apart from residual stress, °C.
pub const REFERENCE_TEMPERATURE_C: f64 = 20.0;
pub const DEFAULT_TRIGGER_TEMPERATURE_C: f64 = 80.0;
pub const DEFAULT_GRAVITY: [f64; 3] = [0.0, 0.0, -9.81];

/// Calibrated cards by name.
pub type MaterialSet = BTreeMap<String, MaterialCard>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("member graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },
    #[error("gravity is nonzero but no node is fixed")]
    NoFixedNode,
    #[error("member {member} references unknown node {node}")]
    UnknownNode { member: String, node: String },
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("unknown material {0}")]
    UnknownMaterial(String),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Document(#[from] DocError),
}

pub type Vec3 = [f64; 3];

fn default_orientation() -> Vec3 {
    [1.0, 0.0, 0.0]
}

/// Bi-layer unit: actuator block over part of the length, on top of a
/// constraint block spanning the whole length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendingUnitSpec {
    /// mm
    pub length: f64,
    /// mm
    pub width: f64,
    /// mm
    pub total_thickness: f64,
    /// mm
    pub actuator_thickness: f64,
    pub actuator_ratio: f64,
    pub actuator_material: String,
    pub constraint_material: String,
    /// MPa
    pub sigma0: f64,
    /// In-plane printing direction of the actuator block.
    #[serde(default = "default_orientation")]
    pub orientation: Vec3,
}

impl BendingUnitSpec {
    /// 100 × 7.2 × 4 mm unit with a 1 mm actuator layer.
    pub fn standard(actuator_material: &str, constraint_material: &str, ratio: f64, sigma0: f64) -> Self {
        Self {
            length: 100.0,
            width: 7.2,
            total_thickness: 4.0,
            actuator_thickness: 1.0,
            actuator_ratio: ratio,
            actuator_material: actuator_material.into(),
            constraint_material: constraint_material.into(),
            sigma0,
            orientation: default_orientation(),
        }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let bad = |m: &str| Err(GridError::InvalidDesign(m.to_string()));
        if !(self.length > 0.0 && self.width > 0.0 && self.total_thickness > 0.0) {
            return bad("unit length, width and thickness must be positive");
        }
        if !(self.actuator_thickness > 0.0 && self.actuator_thickness < self.total_thickness) {
            return bad("actuator thickness must lie in (0, total_thickness)");
        }
        if !(0.0..=1.0).contains(&self.actuator_ratio) {
            return bad("actuator_ratio must lie in [0, 1]");
        }
        if !(self.sigma0 >= 0.0 && self.sigma0.is_finite()) {
            return bad("sigma0 must be >= 0");
        }
        if norm(self.orientation) < 1e-12 {
            return bad("orientation must be a nonzero vector");
        }
        Ok(())
    }

    pub fn constraint_thickness(&self) -> f64 {
        self.total_thickness - self.actuator_thickness
    }
}

/// Pure constraint block joining units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    /// mm
    pub width: f64,
    /// mm
    pub thickness: f64,
    pub material: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    BendingUnit,
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    /// mm
    pub position: Vec3,
    #[serde(default)]
    pub fixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub id: String,
    pub kind: MemberKind,
    pub node_a: String,
    pub node_b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<BendingUnitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointSpec>,
}

fn default_up() -> Vec3 {
    [0.0, 0.0, 1.0]
}

fn default_trigger() -> f64 {
    DEFAULT_TRIGGER_TEMPERATURE_C
}

fn default_gravity() -> Vec3 {
    DEFAULT_GRAVITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDesign {
    pub name: String,
    /// Material name → card file name, relative to the design file.
    #[serde(default)]
    pub materials: BTreeMap<String, String>,
    pub nodes: Vec<Node>,
    pub members: Vec<Member>,
    #[serde(default = "default_trigger")]
    pub trigger_temperature_c: f64,
    #[serde(default = "default_gravity")]
    pub gravity_m_s2: Vec3,
    /// Layer stacking direction (actuator side).
    #[serde(default = "default_up")]
    pub up: Vec3,
}

pub(crate) fn norm(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

impl GridDesign {
    /// Straight single unit from the origin along +X, left end clamped.
    pub fn single_unit(name: &str, spec: BendingUnitSpec) -> Self {
        let l = spec.length;
        let mut materials = BTreeMap::new();
        materials.insert(spec.actuator_material.clone(), format!("{}.matcard.json", spec.actuator_material));
        materials.insert(spec.constraint_material.clone(), format!("{}.matcard.json", spec.constraint_material));
        Self {
            name: name.into(),
            materials,
            nodes: vec![
                Node {
                    id: "a".into(),
                    position: [0.0, 0.0, 0.0],
                    fixed: true,
                },
                Node {
                    id: "b".into(),
                    position: [l, 0.0, 0.0],
                    fixed: false,
                },
            ],
            members: vec![Member {
                id: "u1".into(),
                kind: MemberKind::BendingUnit,
                node_a: "a".into(),
                node_b: "b".into(),
                unit: Some(spec),
                joint: None,
            }],
            trigger_temperature_c: DEFAULT_TRIGGER_TEMPERATURE_C,
            gravity_m_s2: DEFAULT_GRAVITY,
            up: default_up(),
        }
    }

    pub fn delta_t(&self) -> f64 {
        self.trigger_temperature_c - REFERENCE_TEMPERATURE_C
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn member_length(&self, m: &Member) -> Option<f64> {
        let a = self.node_index(&m.node_a)?;
        let b = self.node_index(&m.node_b)?;
        Some(norm(sub(self.nodes[b].position, self.nodes[a].position)))
    }

    /// Material names referenced by members.
    pub fn referenced_materials(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for m in &self.members {
            if let Some(u) = &m.unit {
                out.insert(u.actuator_material.clone());
                out.insert(u.constraint_material.clone());
            }
            if let Some(j) = &m.joint {
                out.insert(j.material.clone());
            }
        }
        out
    }

    /// Structural checks that need no material data.
    pub fn validate(&self) -> Result<(), GridError> {
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(GridError::DuplicateId(n.id.clone()));
            }
            if n.position.iter().any(|v| !v.is_finite()) {
                return Err(GridError::InvalidDesign(format!("node {} has a non-finite position", n.id)));
            }
        }
        let mut mids = BTreeSet::new();
        for m in &self.members {
            if !mids.insert(m.id.as_str()) {
                return Err(GridError::DuplicateId(m.id.clone()));
            }
            for node in [&m.node_a, &m.node_b] {
                if self.node_index(node).is_none() {
                    return Err(GridError::UnknownNode {
                        member: m.id.clone(),
                        node: node.clone(),
                    });
                }
            }
            if m.node_a == m.node_b {
                return Err(GridError::InvalidDesign(format!("member {} connects a node to itself", m.id)));
            }
            let len = self.member_length(m).unwrap_or(0.0);
            if len <= 1e-9 {
                return Err(GridError::InvalidDesign(format!("member {} has zero length", m.id)));
            }
            match (m.kind, &m.unit, &m.joint) {
                (MemberKind::BendingUnit, Some(u), None) => {
                    u.validate()?;
                    if (u.length - len).abs() > 1e-6 * u.length {
                        return Err(GridError::InvalidDesign(format!(
                            "member {} spec length {} differs from node distance {len}",
                            m.id, u.length
                        )));
                    }
                }
                (MemberKind::Joint, None, Some(j)) => {
                    if !(j.width > 0.0 && j.thickness > 0.0) {
                        return Err(GridError::InvalidDesign(format!("joint {} needs positive section", m.id)));
                    }
                }
                (MemberKind::BendingUnit, _, _) => {
                    return Err(GridError::InvalidDesign(format!(
                        "bending unit {} needs a `unit` spec and no `joint` spec",
                        m.id
                    )))
                }
                (MemberKind::Joint, _, _) => {
                    return Err(GridError::InvalidDesign(format!(
                        "joint {} needs a `joint` spec and no actuator",
                        m.id
                    )))
                }
            }
        }
        if self.members.is_empty() {
            return Err(GridError::InvalidDesign("design has no members".into()));
        }
        if norm(self.up) < 1e-12 {
            return Err(GridError::InvalidDesign("up vector must be nonzero".into()));
        }
        if self.gravity_m_s2.iter().any(|g| !g.is_finite()) || !self.trigger_temperature_c.is_finite() {
            return Err(GridError::InvalidDesign("gravity and temperature must be finite".into()));
        }
        let components = self.components();
        if components != 1 {
            return Err(GridError::DisconnectedGraph { components });
        }
        if norm(self.gravity_m_s2) > 0.0 && !self.nodes.iter().any(|n| n.fixed) {
            return Err(GridError::NoFixedNode);
        }
        for name in self.referenced_materials() {
            if !self.materials.is_empty() && !self.materials.contains_key(&name) {
                return Err(GridError::UnknownMaterial(name));
            }
        }
        Ok(())
    }

    /// Validate against a concrete material set: names resolve and every
    /// sigma0 lies within its actuator card's calibration span.
    pub fn validate_with(&self, cards: &MaterialSet) -> Result<(), GridError> {
        self.validate()?;
        for name in self.referenced_materials() {
            if !cards.contains_key(&name) {
                return Err(GridError::UnknownMaterial(name));
            }
        }
        for m in &self.members {
            if let Some(u) = &m.unit {
                if u.actuator_ratio > 0.0 && u.sigma0 > 0.0 {
                    cards[&u.actuator_material].recoverable_strain(u.sigma0)?;
                }
            }
        }
        Ok(())
    }

    fn components(&self) -> usize {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for m in &self.members {
            if let (Some(a), Some(b)) = (self.node_index(&m.node_a), self.node_index(&m.node_b)) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        (0..n).filter(|&i| find(&mut parent, i) == i).count()
    }

    pub fn to_json(&self) -> String {
        doc::to_json(DESIGN_KIND, self)
    }

    pub fn from_json(text: &str) -> Result<Self, GridError> {
        let d: Self = doc::from_json(DESIGN_KIND, text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn save(&self, path: &Path) -> Result<(), GridError> {
        Ok(doc::write_file(path, &self.to_json())?)
    }

    pub fn load(path: &Path) -> Result<Self, GridError> {
        Self::from_json(&doc::read_file(path)?)
    }

    /// Load the cards named in `materials`, resolving file names relative to
    /// `base`.
    pub fn load_materials(&self, base: &Path) -> Result<MaterialSet, GridError> {
        let mut set = MaterialSet::new();
        for name in self.referenced_materials() {
            let file = self
                .materials
                .get(&name)
                .ok_or_else(|| GridError::UnknownMaterial(name.clone()))?;
            let card = MaterialCard::load(&base.join(file))?;
            set.insert(name, card);
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> GridDesign {
        GridDesign::single_unit("u", BendingUnitSpec::standard("PLA", "PLA", 1.0, 0.203))
    }

    #[test]
    fn single_unit_is_valid_and_round_trips() {
        let d = unit();
        d.validate().unwrap();
        let back = GridDesign::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn free_design_with_gravity_needs_fixed_node() {
        let mut d = unit();
        d.nodes[0].fixed = false;
        assert_eq!(d.validate(), Err(GridError::NoFixedNode));
        d.gravity_m_s2 = [0.0; 3];
        assert!(d.validate().is_ok());
    }

    #[test]
    fn disconnected_and_dangling() {
        let mut d = unit();
        d.nodes.push(Node {
            id: "c".into(),
            position: [0.0, 50.0, 0.0],
            fixed: false,
        });
        assert_eq!(d.validate(), Err(GridError::DisconnectedGraph { components: 2 }));
        let mut d = unit();
        d.members[0].node_b = "zz".into();
        assert!(matches!(d.validate(), Err(GridError::UnknownNode { .. })));
    }

    #[test]
    fn spec_invariants() {
        let mut s = BendingUnitSpec::standard("PLA", "PLA", 1.2, 0.1);
        assert!(s.validate().is_err());
        s.actuator_ratio = 0.5;
        s.actuator_thickness = 4.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn dangling_material_reference() {
        let mut d = unit();
        d.materials.remove("PLA");
        d.materials.insert("CFPLA".into(), "c.matcard.json".into());
        assert_eq!(d.validate(), Err(GridError::UnknownMaterial("PLA".into())));
    }
}
