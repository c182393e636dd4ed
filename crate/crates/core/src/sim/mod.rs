//! Static equilibrium of the beam network and the two-stage triggering
//! sequence: stress release under body force, then settling with long-term
//! moduli from the imported stage A state.

pub mod element;
pub mod export;

pub use export::{export_state, obj_polylines, parse_obj_polylines, StateFormat};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doc::{self, DocError};
use crate::grid::{assign_eigenstrains, mesh_design, BeamMesh, GridDesign, GridError, MaterialSet, MeshConfig, Vec3};
use crate::material::StiffnessRegime;
use element::{element_response, energy_at, quat_exp, quat_mul, quat_normalize, section_forces, ElementProps, EndState, Quat};

pub const STATE_KIND: &str = "deformed_state";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("no convergence at load step {step}, iteration {iteration} (residual {residual:e})")]
    NonConvergence { step: usize, iteration: usize, residual: f64 },
    #[error("singular stiffness: {0}")]
    SingularStiffness(String),
    #[error("state does not match mesh: {0}")]
    IncompatibleState(String),
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("{stage:?}: {source}")]
    Stage { stage: StageLabel, source: Box<SimError> },
    #[error("unknown member {0}")]
    UnknownMember(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Document(#[from] DocError),
}

impl SimError {
    /// Failure of the numerics rather than of the inputs.
    pub fn is_convergence_failure(&self) -> bool {
        match self {
            SimError::NonConvergence { .. } | SimError::SingularStiffness(_) => true,
            SimError::Stage { source, .. } => source.is_convergence_failure(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub load_steps: usize,
    pub newton_tol: f64,
    pub max_newton_iter: usize,
    pub line_search: bool,
    pub stiffness_regime: StiffnessRegime,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            load_steps: 20,
            newton_tol: 1e-6,
            max_newton_iter: 50,
            line_search: true,
            stiffness_regime: StiffnessRegime::Instantaneous,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.load_steps < 1 {
            return Err(SimError::InvalidConfig("load_steps must be >= 1".into()));
        }
        if !(self.newton_tol > 0.0 && self.newton_tol <= 1e-2) {
            return Err(SimError::InvalidConfig("newton_tol must lie in (0, 1e-2]".into()));
        }
        if self.max_newton_iter < 1 {
            return Err(SimError::InvalidConfig("max_newton_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageLabel {
    Initial,
    StageA,
    StageB,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementState {
    /// Fraction of the eigenstrain released.
    pub released_fraction: f64,
    /// N
    pub axial_force: f64,
    /// N·mm
    pub torsion: f64,
    /// End moments about the lateral and stacking axes, N·mm.
    pub moment_a: [f64; 2],
    pub moment_b: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformedState {
    pub stage_label: StageLabel,
    /// mm
    pub node_positions: Vec<Vec3>,
    /// Unit quaternions (w, x, y, z) from the reference triads.
    pub node_rotations: Vec<Quat>,
    pub element_states: Vec<ElementState>,
    pub eigen_scale: f64,
    pub gravity_factor: f64,
    /// 0 for instantaneous moduli, 1 for long-term.
    pub regime_blend: f64,
    pub residual_norm: f64,
    pub newton_iterations: usize,
}

impl DeformedState {
    pub fn initial(mesh: &BeamMesh) -> Self {
        Self {
            stage_label: StageLabel::Initial,
            node_positions: mesh.nodes.iter().map(|n| n.position).collect(),
            node_rotations: vec![[1.0, 0.0, 0.0, 0.0]; mesh.nodes.len()],
            element_states: vec![
                ElementState {
                    released_fraction: 0.0,
                    axial_force: 0.0,
                    torsion: 0.0,
                    moment_a: [0.0; 2],
                    moment_b: [0.0; 2],
                };
                mesh.elements.len()
            ],
            eigen_scale: 0.0,
            gravity_factor: 0.0,
            regime_blend: 0.0,
            residual_norm: 0.0,
            newton_iterations: 0,
        }
    }

    pub fn check_compatible(&self, mesh: &BeamMesh) -> Result<(), SimError> {
        if self.node_positions.len() != mesh.nodes.len() || self.node_rotations.len() != mesh.nodes.len() {
            return Err(SimError::IncompatibleState(format!(
                "{} nodes in state, {} in mesh",
                self.node_positions.len(),
                mesh.nodes.len()
            )));
        }
        if self.element_states.len() != mesh.elements.len() {
            return Err(SimError::IncompatibleState("element count differs".into()));
        }
        if self.node_positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(SimError::IncompatibleState("non-finite coordinates".into()));
        }
        Ok(())
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.node_positions[a], self.node_positions[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
    }

    /// Chord between the two end nodes of a member.
    pub fn member_end_distance(&self, mesh: &BeamMesh, member: &str) -> Result<f64, SimError> {
        let chain = mesh
            .member_nodes
            .get(member)
            .ok_or_else(|| SimError::UnknownMember(member.to_string()))?;
        Ok(self.distance(chain[0], chain[chain.len() - 1]))
    }

    /// Deformed position at parameter `t` along a member, interpolated
    /// linearly between mesh nodes.
    pub fn member_point(&self, mesh: &BeamMesh, member: &str, t: f64) -> Result<Vec3, SimError> {
        let t = t.clamp(0.0, 1.0);
        let el = mesh
            .elements
            .iter()
            .filter(|e| e.member_id == member)
            .find(|e| t <= e.t_range[1])
            .ok_or_else(|| SimError::UnknownMember(member.to_string()))?;
        let w = (t - el.t_range[0]) / (el.t_range[1] - el.t_range[0]);
        let (p, q) = (self.node_positions[el.nodes[0]], self.node_positions[el.nodes[1]]);
        Ok([p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1]), p[2] + w * (q[2] - p[2])])
    }

    pub fn to_json(&self) -> String {
        doc::to_json(STATE_KIND, self)
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        Ok(doc::from_json(STATE_KIND, text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loads {
    pub eigenstrain_scale: f64,
    pub gravity_on: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub step: usize,
    pub iteration: usize,
    /// Total potential after the accepted update, N·mm.
    pub potential: f64,
    pub residual: f64,
}

/// Per-iteration record of a solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub entries: Vec<TraceEntry>,
}

fn configure_linear_algebra() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

struct LoadState {
    scale: f64,
    gravity: f64,
    blend: f64,
}

struct System<'a> {
    mesh: &'a BeamMesh,
    /// Equation number of each global dof, None when clamped.
    eq: Vec<Option<usize>>,
    n_eq: usize,
}

impl<'a> System<'a> {
    fn new(mesh: &'a BeamMesh) -> Self {
        let mut eq = vec![None; mesh.n_dofs()];
        let mut n = 0;
        for (i, node) in mesh.nodes.iter().enumerate() {
            if !node.fixed {
                for d in mesh.node_dofs(i) {
                    eq[d] = Some(n);
                    n += 1;
                }
            }
        }
        Self { mesh, eq, n_eq: n }
    }

    fn props(&self, ls: &LoadState) -> Vec<ElementProps> {
        self.mesh.elements.iter().map(|e| ElementProps::new(e, ls.scale, ls.blend)).collect()
    }

    /// External nodal forces from lumped self weight, N.
    fn external(&self, gravity_factor: f64) -> DVector<f64> {
        let mut f = DVector::zeros(self.mesh.n_dofs());
        let g = self.mesh.gravity;
        for e in &self.mesh.elements {
            let w = 0.5 * e.line_mass() * e.length * gravity_factor;
            for &n in &e.nodes {
                let d = self.mesh.dof_map[n];
                for k in 0..3 {
                    f[d + k] += w * g[k];
                }
            }
        }
        f
    }

    fn end_state(&self, st: &DeformedState, k: usize) -> EndState {
        let [a, b] = self.mesh.elements[k].nodes;
        EndState {
            xa: st.node_positions[a],
            xb: st.node_positions[b],
            qa: st.node_rotations[a],
            qb: st.node_rotations[b],
        }
    }

    fn potential(&self, props: &[ElementProps], fext: &DVector<f64>, st: &DeformedState) -> f64 {
        let mut u: f64 = (0..props.len()).map(|k| energy_at(&props[k], &self.end_state(st, k))).sum();
        for (i, node) in self.mesh.nodes.iter().enumerate() {
            let d = self.mesh.dof_map[i];
            for k in 0..3 {
                u -= fext[d + k] * (st.node_positions[i][k] - node.position[k]);
            }
        }
        u
    }

    /// Residual on free dofs and the tangent triplets.
    fn assemble(
        &self,
        props: &[ElementProps],
        fext: &DVector<f64>,
        st: &DeformedState,
        with_tangent: bool,
    ) -> (DVector<f64>, Vec<faer::sparse::Triplet<usize, usize, f64>>) {
        let mut r = DVector::zeros(self.n_eq);
        let mut trip = Vec::new();
        for (k, e) in self.mesh.elements.iter().enumerate() {
            let (_, g, h) = element_response(&props[k], &self.end_state(st, k));
            let mut map = [None; 12];
            for (slot, &n) in e.nodes.iter().enumerate() {
                for (j, d) in self.mesh.node_dofs(n).into_iter().enumerate() {
                    map[6 * slot + j] = self.eq[d];
                }
            }
            for i in 0..12 {
                if let Some(ei) = map[i] {
                    r[ei] += g[i];
                    if with_tangent {
                        for j in 0..12 {
                            if let Some(ej) = map[j] {
                                trip.push(faer::sparse::Triplet::new(ei, ej, h[(i, j)]));
                            }
                        }
                    }
                }
            }
        }
        for (d, e) in self.eq.iter().enumerate() {
            if let Some(e) = e {
                r[*e] -= fext[d];
            }
        }
        (r, trip)
    }

    fn update(&self, st: &DeformedState, dx: &DVector<f64>, alpha: f64) -> DeformedState {
        let mut out = st.clone();
        for i in 0..self.mesh.nodes.len() {
            let dofs = self.mesh.node_dofs(i);
            let v: [f64; 6] = std::array::from_fn(|k| self.eq[dofs[k]].map_or(0.0, |e| alpha * dx[e]));
            for (p, d) in out.node_positions[i].iter_mut().zip(&v[..3]) {
                *p += d;
            }
            if v[3] != 0.0 || v[4] != 0.0 || v[5] != 0.0 {
                out.node_rotations[i] = quat_normalize(quat_mul(quat_exp([v[3], v[4], v[5]]), st.node_rotations[i]));
            }
        }
        out
    }

    fn solve_linear(&self, trip: &[faer::sparse::Triplet<usize, usize, f64>], r: &DVector<f64>) -> Result<DVector<f64>, SimError> {
        use faer::prelude::Solve;
        let k = faer::sparse::SparseColMat::<usize, f64>::try_new_from_triplets(self.n_eq, self.n_eq, trip)
            .map_err(|e| SimError::SingularStiffness(format!("{e:?}")))?;
        let lu = k.sp_lu().map_err(|e| SimError::SingularStiffness(format!("{e:?}")))?;
        let rhs = faer::Col::<f64>::from_fn(self.n_eq, |i| -r[i]);
        let x = lu.solve(&rhs);
        let dx = DVector::from_fn(self.n_eq, |i, _| x[i]);
        if dx.iter().any(|v| !v.is_finite()) {
            return Err(SimError::SingularStiffness("non-finite solution".into()));
        }
        // A pivot-free breakdown shows up as a large solve residual.
        let mut check = -r.clone();
        for t in trip {
            check[t.row] -= t.val * dx[t.col];
        }
        if check.norm() > 1e-6 * r.norm().max(f64::MIN_POSITIVE) {
            return Err(SimError::SingularStiffness("stiffness matrix is rank deficient".into()));
        }
        Ok(dx)
    }

    fn element_states(&self, props: &[ElementProps], st: &DeformedState, scale: f64) -> Vec<ElementState> {
        (0..props.len())
            .map(|k| {
                let f = section_forces(&props[k], &self.end_state(st, k));
                ElementState {
                    released_fraction: scale,
                    axial_force: f.axial,
                    torsion: f.torsion,
                    moment_a: f.moment_a,
                    moment_b: f.moment_b,
                }
            })
            .collect()
    }
}

fn regime_blend(r: StiffnessRegime) -> f64 {
    match r {
        StiffnessRegime::Instantaneous => 0.0,
        StiffnessRegime::LongTerm => 1.0,
    }
}

/// Equilibrium of the network under the given loads, ramping eigenstrain
/// scale, gravity and stiffness regime from `state0`'s values.
pub fn solve_static(mesh: &BeamMesh, state0: &DeformedState, loads: Loads, config: &SolverConfig) -> Result<DeformedState, SimError> {
    solve_static_traced(mesh, state0, loads, config).map(|(s, _)| s)
}

pub fn solve_static_traced(
    mesh: &BeamMesh,
    state0: &DeformedState,
    loads: Loads,
    config: &SolverConfig,
) -> Result<(DeformedState, SolveTrace), SimError> {
    config.validate()?;
    state0.check_compatible(mesh)?;
    if !(0.0..=1.0).contains(&loads.eigenstrain_scale) {
        return Err(SimError::InvalidConfig("eigenstrain_scale must lie in [0, 1]".into()));
    }
    configure_linear_algebra();
    let sys = System::new(mesh);
    let target = LoadState {
        scale: loads.eigenstrain_scale,
        gravity: if loads.gravity_on { 1.0 } else { 0.0 },
        blend: regime_blend(config.stiffness_regime),
    };
    let mut trace = SolveTrace::default();

    let fext_target = sys.external(target.gravity);
    let free_norm = |f: &DVector<f64>| {
        sys.eq
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_some())
            .map(|(d, _)| f[d] * f[d])
            .sum::<f64>()
            .sqrt()
    };
    let gravity_norm = free_norm(&fext_target);
    let reference = if gravity_norm > 0.0 {
        gravity_norm
    } else {
        let undeformed = DeformedState::initial(mesh);
        let props = sys.props(&target);
        sys.assemble(&props, &DVector::zeros(mesh.n_dofs()), &undeformed, false).0.norm()
    };

    let mut state = state0.clone();
    state.eigen_scale = target.scale;
    state.gravity_factor = target.gravity;
    state.regime_blend = target.blend;
    if reference == 0.0 || sys.n_eq == 0 {
        state.residual_norm = 0.0;
        state.newton_iterations = 0;
        return Ok((state, trace));
    }
    if mesh.nodes.iter().all(|n| !n.fixed) {
        return Err(SimError::SingularStiffness("no node is fixed; rigid body modes are free".into()));
    }
    let tol = config.newton_tol * reference;
    let mut state = state0.clone();
    let mut total_iter = 0;
    let mut residual = 0.0;
    let n = config.load_steps;
    let level = |lam: f64| LoadState {
        scale: state0.eigen_scale + lam * (target.scale - state0.eigen_scale),
        gravity: state0.gravity_factor + lam * (target.gravity - state0.gravity_factor),
        blend: state0.regime_blend + lam * (target.blend - state0.regime_blend),
    };
    // Tangent of the last converged load level. The first iteration of a
    // step uses it, so the increment acts as a linear predictor instead of
    // a spurious prestress on the old configuration.
    let mut prev_props = sys.props(&level(0.0));
    let mut props = prev_props.clone();
    let nominal = 1.0 / n as f64;
    let mut dlam = nominal;
    let mut lam = 0.0;
    let mut cuts = 0;
    let mut step = 0;
    while lam < 1.0 {
        step += 1;
        let next_lam = if lam + dlam > 1.0 - 1e-12 { 1.0 } else { lam + dlam };
        let trial_props = sys.props(&level(next_lam));
        let fext = sys.external(level(next_lam).gravity);
        let mark = trace.entries.len();
        match newton(&sys, &trial_props, &prev_props, &fext, &state, tol, config, step, &mut trace) {
            Ok((s, r, it)) => {
                state = s;
                residual = r;
                total_iter += it;
                lam = next_lam;
                props = trial_props;
                prev_props = props.clone();
                if cuts > 0 {
                    cuts -= 1;
                    dlam = (2.0 * dlam).min(nominal);
                }
            }
            Err(e) => {
                // Retry the increment in halves from the last converged state.
                trace.entries.truncate(mark);
                step -= 1;
                if cuts >= MAX_CUTS || !matches!(e, SimError::NonConvergence { .. }) {
                    return Err(match e {
                        SimError::NonConvergence { iteration, residual, .. } => SimError::NonConvergence {
                            step: ((lam * n as f64).floor() as usize + 1).min(n),
                            iteration,
                            residual,
                        },
                        other => other,
                    });
                }
                cuts += 1;
                dlam *= 0.5;
            }
        }
    }
    state.element_states = sys.element_states(&props, &state, target.scale);
    state.eigen_scale = target.scale;
    state.gravity_factor = target.gravity;
    state.regime_blend = target.blend;
    state.residual_norm = residual;
    state.newton_iterations = total_iter;
    Ok((state, trace))
}

/// Largest number of times a load increment is halved before giving up.
const MAX_CUTS: usize = 8;

/// Residual growth over the start of an increment that counts as divergence.
const DIVERGENCE_FACTOR: f64 = 1e3;

/// Newton iterations at one load level from `start`. Returns the converged
/// state, its residual norm and the iteration count.
#[allow(clippy::too_many_arguments)]
fn newton(
    sys: &System,
    props: &[ElementProps],
    prev_props: &[ElementProps],
    fext: &DVector<f64>,
    start: &DeformedState,
    tol: f64,
    config: &SolverConfig,
    step: usize,
    trace: &mut SolveTrace,
) -> Result<(DeformedState, f64, usize), SimError> {
    let mut state = start.clone();
    let mut it = 0;
    let mut first = f64::NAN;
    loop {
        let (r, mut trip) = sys.assemble(props, fext, &state, it > 0);
        let residual = r.norm();
        if it == 0 {
            first = residual;
        }
        if residual <= tol {
            return Ok((state, residual, it));
        }
        if it >= config.max_newton_iter || !residual.is_finite() || residual > DIVERGENCE_FACTOR * first {
            return Err(SimError::NonConvergence { step, iteration: it, residual });
        }
        if it == 0 {
            trip = sys.assemble(prev_props, fext, &state, true).1;
        }
        let dx = sys.solve_linear(&trip, &r)?;
        let p0 = sys.potential(props, fext, &state);
        let mut next = sys.update(&state, &dx, 1.0);
        let mut p_next = sys.potential(props, fext, &next);
        if config.line_search && !(p_next <= p0) {
            let mut alpha = 0.5;
            let (mut best, mut best_p) = (next, p_next);
            while alpha > 1.0 / 64.0 {
                let trial = sys.update(&state, &dx, alpha);
                let pt = sys.potential(props, fext, &trial);
                if pt < best_p || !best_p.is_finite() {
                    best = trial;
                    best_p = pt;
                }
                if pt <= p0 {
                    break;
                }
                alpha *= 0.5;
            }
            next = best;
            p_next = best_p;
        }
        state = next;
        it += 1;
        trace.entries.push(TraceEntry {
            step,
            iteration: it,
            potential: p_next,
            residual,
        });
    }
}

/// Meshed design and both stages of the triggering sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialResult {
    pub mesh: BeamMesh,
    pub stage_a: DeformedState,
    pub stage_b: DeformedState,
}

pub fn run_sequential(
    design: &GridDesign,
    cards: &MaterialSet,
    mesh_config: &MeshConfig,
    config: &SolverConfig,
) -> Result<SequentialResult, SimError> {
    design.validate_with(cards)?;
    let mesh = assign_eigenstrains(&mesh_design(design, mesh_config)?, cards)?;
    let initial = DeformedState::initial(&mesh);
    let wrap = |stage: StageLabel| move |e: SimError| SimError::Stage { stage, source: Box::new(e) };

    let cfg_a = SolverConfig {
        stiffness_regime: StiffnessRegime::Instantaneous,
        ..*config
    };
    let release = Loads {
        eigenstrain_scale: 1.0,
        gravity_on: true,
    };
    let mut stage_a = solve_static(&mesh, &initial, release, &cfg_a).map_err(wrap(StageLabel::StageA))?;
    stage_a.stage_label = StageLabel::StageA;

    let cfg_b = SolverConfig {
        stiffness_regime: StiffnessRegime::LongTerm,
        ..*config
    };
    let mut stage_b = solve_static(&mesh, &stage_a, release, &cfg_b).map_err(wrap(StageLabel::StageB))?;
    stage_b.stage_label = StageLabel::StageB;
    Ok(SequentialResult { mesh, stage_a, stage_b })
}

/// Stage A then stage B with the default mesh density.
pub fn sequential_simulate(
    design: &GridDesign,
    cards: &MaterialSet,
    config: &SolverConfig,
) -> Result<(DeformedState, DeformedState), SimError> {
    let r = run_sequential(design, cards, &MeshConfig::default(), config)?;
    Ok((r.stage_a, r.stage_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BendingUnitSpec;
    use crate::material::MaterialCard;
    use crate::grid::MaterialSet;

    fn linear_cards() -> MaterialSet {
        let mut s = MaterialSet::new();
        s.insert("LIN".into(), MaterialCard::linear_elastic("LIN", 2000.0, 0.5, 1e-4, 0.4, 1240.0).unwrap());
        s
    }

    fn mesh(gravity: Vec3, n: usize) -> BeamMesh {
        let mut d = GridDesign::single_unit("c", BendingUnitSpec::standard("LIN", "LIN", 0.0, 0.0));
        d.gravity_m_s2 = gravity;
        d.trigger_temperature_c = 20.0;
        assign_eigenstrains(&mesh_design(&d, &MeshConfig { n_min: n }).unwrap(), &linear_cards()).unwrap()
    }

    #[test]
    fn no_load_returns_initial() {
        let m = mesh([0.0; 3], 4);
        let s0 = DeformedState::initial(&m);
        let s = solve_static(&m, &s0, Loads { eigenstrain_scale: 1.0, gravity_on: false }, &SolverConfig::default()).unwrap();
        assert_eq!(s.node_positions, s0.node_positions);
    }

    #[test]
    fn cantilever_under_self_weight() {
        let m = mesh(DEFAULT_G, 32);
        let s0 = DeformedState::initial(&m);
        let s = solve_static(&m, &s0, Loads { eigenstrain_scale: 0.0, gravity_on: true }, &SolverConfig::default()).unwrap();
        let e = &m.elements[0];
        let q = e.line_mass() * 9.81;
        let ei = crate::unit::section_response(&e.section(0.0)).bending_stiffness;
        let l: f64 = 100.0;
        let expect = q * l.powi(4) / (8.0 * ei);
        let tip = -s.node_positions[1][2];
        assert!((tip - expect).abs() < 0.01 * expect, "{tip} vs {expect}");
    }

    #[test]
    fn pla_tangent_matches_differences() {
        let mut cards = MaterialSet::new();
        cards.insert("PLA".into(), MaterialCard::pla());
        let mut d = GridDesign::single_unit("c", BendingUnitSpec::standard("PLA", "PLA", 1.0, 0.203));
        d.gravity_m_s2 = [0.0; 3];
        let m = assign_eigenstrains(&mesh_design(&d, &MeshConfig { n_min: 16 }).unwrap(), &cards).unwrap();
        let sys = System::new(&m);
        let props = sys.props(&LoadState { scale: 0.05, gravity: 0.0, blend: 0.0 });
        let f0 = DVector::zeros(m.n_dofs());
        let st = DeformedState::initial(&m);
        let (_, trip) = sys.assemble(&props, &f0, &st, true);
        let mut k = nalgebra::DMatrix::zeros(sys.n_eq, sys.n_eq);
        for t in &trip {
            k[(t.row, t.col)] += t.val;
        }
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for j in 0..sys.n_eq {
            let mut e = DVector::zeros(sys.n_eq);
            e[j] = h;
            let rp = sys.assemble(&props, &f0, &sys.update(&st, &e, 1.0), false).0;
            let rm = sys.assemble(&props, &f0, &sys.update(&st, &e, -1.0), false).0;
            let col = (rp - rm) / (2.0 * h);
            worst = worst.max((col - k.column(j)).norm());
        }
        assert!(worst < 1e-5 * k.norm(), "{worst}");
    }

    #[test]
    fn global_tangent_matches_differences() {
        let mut d = GridDesign::single_unit("c", BendingUnitSpec::standard("LIN", "LIN", 1.0, 0.0));
        d.gravity_m_s2 = [0.0; 3];
        let mut m = mesh_design(&d, &MeshConfig { n_min: 3 }).unwrap();
        m = assign_eigenstrains(&m, &linear_cards()).unwrap();
        for e in &mut m.elements {
            e.eigenstrain = -0.01;
            e.eigencurvature = -0.02;
        }
        let sys = System::new(&m);
        let props = sys.props(&LoadState { scale: 1.0, gravity: 0.0, blend: 0.0 });
        let f0 = DVector::zeros(m.n_dofs());
        let mut st = DeformedState::initial(&m);
        // move off the reference a little
        let kick = DVector::from_fn(sys.n_eq, |i, _| 0.01 * ((i * 7 % 5) as f64 - 2.0));
        st = sys.update(&st, &kick, 1.0);
        let (r, trip) = sys.assemble(&props, &f0, &st, true);
        let mut k = nalgebra::DMatrix::zeros(sys.n_eq, sys.n_eq);
        for t in &trip {
            k[(t.row, t.col)] += t.val;
        }
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for j in 0..sys.n_eq {
            let mut e = DVector::zeros(sys.n_eq);
            e[j] = h;
            let rp = sys.assemble(&props, &f0, &sys.update(&st, &e, 1.0), false).0;
            let rm = sys.assemble(&props, &f0, &sys.update(&st, &e, -1.0), false).0;
            let col = (rp - rm) / (2.0 * h);
            worst = worst.max((col - k.column(j)).norm());
        }
        assert!(worst < 1e-5 * k.norm(), "{worst} vs {} (r {})", k.norm(), r.norm());
    }

    const DEFAULT_G: Vec3 = crate::grid::DEFAULT_GRAVITY;

    #[test]
    fn config_bounds() {
        let mut c = SolverConfig {
            newton_tol: 0.1,
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
        c.newton_tol = 1e-6;
        c.load_steps = 0;
        assert!(c.validate().is_err());
    }
}
