//! File-level pipeline steps shared by the CLI and the service:
//! ingest, calibrate, shoot, simulate, measure, report.

use std::path::{Path, PathBuf};

use morphsim::accuracy::{parse_measurements, published_pairs, AccuracyReport, PointPair, ReportOptions};
use morphsim::dma::{
    extract_main_loading_curve, parse_dma_csv, segment_cycles, serialize_curve_csv, serialize_sweep_csv,
    smooth_pspline, DmaData, Schema, SmootherConfig,
};
use morphsim::doc;
use morphsim::grid::{assign_eigenstrains, mesh_design, BeamMesh, GridDesign, MaterialSet, MeshConfig};
use morphsim::material::{calibrate, CalibrationInput, CalibrationReport, MaterialCard, DEFAULT_PRONY_TERMS};
use morphsim::shooter::{parse_observations, shoot_residual_stress, ShooterConfig, ShooterResult};
use morphsim::sim::{export_state, run_sequential, DeformedState, SolverConfig, StageLabel, StateFormat};
use serde::{Deserialize, Serialize};

use crate::error::{Result, WorkbenchError};

pub const RUN_KIND: &str = "simulation_run";
pub const MEASUREMENT_KIND: &str = "measurement";
pub const CALIBRATION_KIND: &str = "calibration_report";
pub const RUN_FILE: &str = "run.json";
pub const RUN_DESIGN_FILE: &str = "design.grid.json";

#[derive(Debug, Clone, PartialEq)]
pub struct IngestRequest {
    pub input: PathBuf,
    pub schema: Schema,
    /// Reduce a cyclic record to its main loading envelope.
    pub main_loading: bool,
    pub smooth: bool,
    pub out: PathBuf,
}

/// Read a raw DMA export and write it back in canonical column order,
/// optionally reduced and smoothed. Returns the number of rows written.
pub fn ingest(req: &IngestRequest, smoother: &SmootherConfig) -> Result<usize> {
    let data = parse_dma_csv(&req.input, req.schema)?;
    let (text, rows) = match data {
        DmaData::Sweep(s) => {
            if req.main_loading || req.smooth {
                return Err(WorkbenchError::Input("frequency sweeps cannot be reduced or smoothed".into()));
            }
            (serialize_sweep_csv(&s), s.rows.len())
        }
        DmaData::Curve(mut c) => {
            if req.main_loading {
                c = extract_main_loading_curve(&segment_cycles(&c)?)?;
            }
            if req.smooth {
                c = smooth_pspline(&c, smoother)?;
            }
            (serialize_curve_csv(&c), c.len())
        }
    };
    doc::write_file(&req.out, &text)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrateRequest {
    pub name: String,
    pub loading: PathBuf,
    /// (sigma0 in MPa, curve file)
    pub unloading: Vec<(f64, PathBuf)>,
    pub sweep: Option<PathBuf>,
    pub alpha_t: f64,
    pub poisson: f64,
    pub density: f64,
    pub prony_terms: usize,
}

impl CalibrateRequest {
    pub fn new(name: &str, loading: PathBuf, alpha_t: f64, poisson: f64) -> Self {
        Self {
            name: name.into(),
            loading,
            unloading: Vec::new(),
            sweep: None,
            alpha_t,
            poisson,
            density: morphsim::material::DEFAULT_DENSITY,
            prony_terms: DEFAULT_PRONY_TERMS,
        }
    }
}

fn read_curve(path: &Path) -> Result<morphsim::dma::DmaCurve> {
    parse_dma_csv(path, Schema::StressStrain)?
        .into_curve()
        .ok_or_else(|| WorkbenchError::Input(format!("{} is not a stress-strain file", path.display())))
}

pub fn calibrate_files(req: &CalibrateRequest) -> Result<(MaterialCard, CalibrationReport)> {
    let loading = read_curve(&req.loading)?;
    let unloading = req
        .unloading
        .iter()
        .map(|(s, p)| Ok((*s, read_curve(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let sweep = match &req.sweep {
        Some(p) => Some(
            parse_dma_csv(p, Schema::FrequencySweep)?
                .into_sweep()
                .ok_or_else(|| WorkbenchError::Input(format!("{} is not a sweep file", p.display())))?,
        ),
        None => None,
    };
    Ok(calibrate(CalibrationInput {
        name: req.name.clone(),
        loading,
        unloading,
        sweep,
        alpha_t: req.alpha_t,
        poisson: req.poisson,
        density: req.density,
        prony_terms: req.prony_terms,
    })?)
}

pub fn shoot_files(observations: &Path, card: &Path, config: &ShooterConfig) -> Result<ShooterResult> {
    let obs = parse_observations(&doc::read_file(observations)?)?;
    let card = MaterialCard::load(card)?;
    Ok(shoot_residual_stress(&obs, &card, config)?)
}

/// Cards for a design: the files its `materials` map names, relative to
/// `base`, falling back to `<fallback>/<name>.matcard.json`.
pub fn load_cards(design: &GridDesign, base: &Path, fallback: Option<&Path>) -> Result<MaterialSet> {
    let mut set = MaterialSet::new();
    for name in design.referenced_materials() {
        let mut tried = Vec::new();
        if let Some(f) = design.materials.get(&name) {
            tried.push(base.join(f));
        }
        if let Some(dir) = fallback {
            tried.push(dir.join(format!("{name}.matcard.json")));
        }
        let path = tried
            .iter()
            .find(|p| p.is_file())
            .ok_or_else(|| WorkbenchError::Input(format!("unknown material {name}: no card file found")))?;
        set.insert(name, MaterialCard::load(path)?);
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberDistance {
    pub member: String,
    pub stage_a_mm: f64,
    pub stage_b_mm: f64,
}

/// Summary written next to the states of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub design: String,
    pub mesh: MeshConfig,
    pub solver: SolverConfig,
    pub members: Vec<MemberDistance>,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        doc::to_json(RUN_KIND, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(doc::from_json(RUN_KIND, text)?)
    }

    pub fn member(&self, id: &str) -> Option<&MemberDistance> {
        self.members.iter().find(|m| m.member == id)
    }
}

pub fn state_file(stage: StageLabel) -> &'static str {
    match stage {
        StageLabel::Initial => "initial.state.json",
        StageLabel::StageA => "stage_a.state.json",
        StageLabel::StageB => "stage_b.state.json",
    }
}

pub fn obj_file(stage: StageLabel) -> &'static str {
    match stage {
        StageLabel::Initial => "initial.state.obj",
        StageLabel::StageA => "stage_a.state.obj",
        StageLabel::StageB => "stage_b.state.obj",
    }
}

pub fn stage_tag(stage: StageLabel) -> &'static str {
    match stage {
        StageLabel::Initial => "initial",
        StageLabel::StageA => "stage_a",
        StageLabel::StageB => "stage_b",
    }
}

pub fn parse_stage(s: &str) -> Result<StageLabel> {
    match s {
        "stage_a" | "a" => Ok(StageLabel::StageA),
        "stage_b" | "b" => Ok(StageLabel::StageB),
        "initial" => Ok(StageLabel::Initial),
        _ => Err(WorkbenchError::Input(format!("unknown stage {s:?} (stage_a, stage_b, initial)"))),
    }
}

/// Run both stages and write a self-contained run directory: the design and
/// its cards, both states as JSON and OBJ, and `run.json`.
pub fn simulate_design(
    design: &GridDesign,
    cards: &MaterialSet,
    mesh: &MeshConfig,
    solver: &SolverConfig,
    out: &Path,
) -> Result<RunSummary> {
    let r = run_sequential(design, cards, mesh, solver)?;
    let mut local = design.clone();
    local.materials = cards.keys().map(|n| (n.clone(), format!("{n}.matcard.json"))).collect();
    doc::write_file(&out.join(RUN_DESIGN_FILE), &local.to_json())?;
    for (name, card) in cards {
        doc::write_file(&out.join(format!("{name}.matcard.json")), &card.to_json())?;
    }
    for st in [&r.stage_a, &r.stage_b] {
        export_state(st, &r.mesh, StateFormat::Json, &out.join(state_file(st.stage_label)))?;
        export_state(st, &r.mesh, StateFormat::ObjPolyline, &out.join(obj_file(st.stage_label)))?;
    }
    let members = r
        .mesh
        .member_nodes
        .keys()
        .map(|m| {
            Ok(MemberDistance {
                member: m.clone(),
                stage_a_mm: r.stage_a.member_end_distance(&r.mesh, m)?,
                stage_b_mm: r.stage_b.member_end_distance(&r.mesh, m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = RunSummary {
        design: design.name.clone(),
        mesh: *mesh,
        solver: *solver,
        members,
    };
    doc::write_file(&out.join(RUN_FILE), &summary.to_json())?;
    Ok(summary)
}

/// Load a design file and its cards, then simulate into `out`.
pub fn simulate_file(
    design_path: &Path,
    material_dir: Option<&Path>,
    mesh: &MeshConfig,
    solver: &SolverConfig,
    out: &Path,
) -> Result<RunSummary> {
    let design = GridDesign::load(design_path)?;
    let base = design_path.parent().unwrap_or(Path::new("."));
    let cards = load_cards(&design, base, material_dir)?;
    simulate_design(&design, &cards, mesh, solver, out)
}

/// Mesh and state of one stage of a run directory.
pub fn load_run_stage(run: &Path, stage: StageLabel) -> Result<(BeamMesh, DeformedState)> {
    let summary = RunSummary::from_json(&doc::read_file(&run.join(RUN_FILE))?)?;
    let design = GridDesign::load(&run.join(RUN_DESIGN_FILE))?;
    let cards = load_cards(&design, run, None)?;
    let mesh = assign_eigenstrains(&mesh_design(&design, &summary.mesh)?, &cards)?;
    let state = match stage {
        StageLabel::Initial => DeformedState::initial(&mesh),
        s => DeformedState::from_json(&doc::read_file(&run.join(state_file(s)))?)?,
    };
    state.check_compatible(&mesh)?;
    Ok((mesh, state))
}

/// Point pairs with their simulated side resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub stage: StageLabel,
    pub pairs: Vec<PointPair>,
}

impl Measurement {
    pub fn to_json(&self) -> String {
        doc::to_json(MEASUREMENT_KIND, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(doc::from_json(MEASUREMENT_KIND, text)?)
    }
}

/// Resolve the point references of a measurement file against one stage of
/// a run.
pub fn measure_run(run: &Path, stage: StageLabel, pairs_csv: &Path) -> Result<Measurement> {
    let rows = parse_measurements(&doc::read_file(pairs_csv)?)?;
    let loaded = if rows.iter().any(|r| r.needs_state()) {
        Some(load_run_stage(run, stage)?)
    } else {
        None
    };
    let pairs = rows
        .into_iter()
        .map(|r| r.into_pair(loaded.as_ref().map(|(m, s)| (s, m))))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Measurement { stage, pairs })
}

/// Pairs from measurement CSVs (distances given) or measurement documents.
pub fn collect_pairs(files: &[PathBuf], published: bool) -> Result<Vec<PointPair>> {
    let mut pairs = if published { published_pairs() } else { Vec::new() };
    for f in files {
        let text = doc::read_file(f)?;
        if text.trim_start().starts_with('{') {
            pairs.extend(Measurement::from_json(&text)?.pairs);
        } else {
            for row in parse_measurements(&text)? {
                pairs.push(row.into_pair(None)?);
            }
        }
    }
    Ok(pairs)
}

pub fn report(pairs: &[PointPair], opts: &ReportOptions) -> Result<AccuracyReport> {
    Ok(AccuracyReport::build(pairs, opts)?)
}
