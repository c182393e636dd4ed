//! Jobs submitted to the service. A job's id is derived from the hash of
//! everything it reads, so resubmitting identical inputs finds the earlier
//! record.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use morphsim::doc;
use morphsim::sim::StageLabel;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::WorkbenchConfig;
use crate::error::{Result, WorkbenchError};
use crate::pipeline::{self, CalibrateRequest, RUN_DESIGN_FILE, RUN_FILE};
use crate::project::{check_name, Project, JOBS_DIR};

pub const JOB_KIND: &str = "job_record";
pub const JOB_FILE: &str = "job.json";
/// Log lines kept in a record.
pub const LOG_LIMIT: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Calibrate,
    Shoot,
    Simulate,
    Measure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

/// Body of `POST /jobs`. Which fields are needed depends on `kind`; paths are
/// relative to the project root, names refer to stored materials/designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobRequest {
    pub kind: JobKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observations: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurements: Option<String>,
    /// Id of a finished simulate job.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loading: Option<String>,
    /// sigma0 in MPa (as text) → curve file.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub unloading: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poisson: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prony_terms: Option<usize>,
}

impl JobRequest {
    pub fn new(kind: JobKind) -> Self {
        Self {
            kind,
            design: None,
            material: None,
            observations: None,
            measurements: None,
            run: None,
            stage: None,
            loading: None,
            unloading: BTreeMap::new(),
            sweep: None,
            alpha_t: None,
            poisson: None,
            density: None,
            prony_terms: None,
        }
    }

    pub fn simulate(design: &str) -> Self {
        Self {
            design: Some(design.into()),
            ..Self::new(JobKind::Simulate)
        }
    }

    fn need<'a>(&self, v: &'a Option<String>, field: &str) -> Result<&'a str> {
        v.as_deref()
            .ok_or_else(|| WorkbenchError::Input(format!("{:?} job needs field {field}", self.kind)))
    }

    fn stage_label(&self) -> Result<StageLabel> {
        pipeline::parse_stage(self.stage.as_deref().unwrap_or("stage_b"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobFailure {
    /// Numerical failure rather than bad input.
    pub numerical: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    /// Serialized as `job_kind`; `kind` names the document type.
    #[serde(rename = "job_kind")]
    pub kind: JobKind,
    pub status: JobStatus,
    pub inputs_hash: String,
    /// Output name → file relative to the project root.
    pub outputs: BTreeMap<String, String>,
    /// State ids readable through `/states/{id}`.
    pub states: Vec<String>,
    pub error: Option<JobFailure>,
    /// Timestamped lines; the only place wall-clock time appears.
    pub log: Vec<String>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl JobRecord {
    pub fn queued(id: &str, kind: JobKind, inputs_hash: &str) -> Self {
        let mut r = Self {
            id: id.into(),
            kind,
            status: JobStatus::Queued,
            inputs_hash: inputs_hash.into(),
            outputs: BTreeMap::new(),
            states: Vec::new(),
            error: None,
            log: Vec::new(),
        };
        r.note("queued");
        r
    }

    pub fn note(&mut self, msg: &str) {
        self.log.push(format!("[{:.3}] {msg}", now()));
        if self.log.len() > LOG_LIMIT {
            self.log.remove(0);
        }
    }

    /// Move along queued → running → {done, failed}.
    pub fn advance(&mut self, to: JobStatus) -> Result<()> {
        use JobStatus::*;
        let ok = matches!((self.status, to), (Queued, Running) | (Running, Done) | (Running, Failed));
        if !ok {
            return Err(WorkbenchError::Input(format!("job {}: {:?} -> {:?} not allowed", self.id, self.status, to)));
        }
        self.status = to;
        self.note(&format!("{to:?}").to_lowercase());
        Ok(())
    }

    pub fn finish(&mut self, outcome: std::result::Result<JobOutcome, WorkbenchError>) {
        match outcome {
            Ok(o) => {
                self.outputs = o.outputs;
                self.states = o.states.into_iter().map(|(id, _)| id).collect();
                let _ = self.advance(JobStatus::Done);
            }
            Err(e) => {
                self.note(&e.to_string());
                self.error = Some(JobFailure {
                    numerical: matches!(e, WorkbenchError::Numerical(_)),
                    message: e.to_string(),
                });
                let _ = self.advance(JobStatus::Failed);
            }
        }
    }

    pub fn to_json(&self) -> String {
        doc::to_json(JOB_KIND, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(doc::from_json(JOB_KIND, text)?)
    }

    pub fn rel_path(id: &str) -> String {
        format!("{JOBS_DIR}/{id}/{JOB_FILE}")
    }
}

/// Files a job reads, relative to the project root.
fn input_files(project: &Project, req: &JobRequest) -> Result<Vec<String>> {
    let mut files = Vec::new();
    match req.kind {
        JobKind::Simulate => {
            let name = req.need(&req.design, "design")?;
            let design = project.design(name)?;
            files.push(Project::design_rel(name));
            for m in design.referenced_materials() {
                files.push(Project::material_rel(&m));
            }
        }
        JobKind::Shoot => {
            files.push(Project::material_rel(req.need(&req.material, "material")?));
            files.push(req.need(&req.observations, "observations")?.to_string());
        }
        JobKind::Measure => {
            let run = req.need(&req.run, "run")?;
            check_name(run)?;
            for f in [RUN_FILE, RUN_DESIGN_FILE] {
                files.push(format!("{JOBS_DIR}/{run}/{f}"));
            }
            let stage = req.stage_label()?;
            if stage != StageLabel::Initial {
                files.push(format!("{JOBS_DIR}/{run}/{}", pipeline::state_file(stage)));
            }
            files.push(req.need(&req.measurements, "measurements")?.to_string());
        }
        JobKind::Calibrate => {
            check_name(req.need(&req.material, "material")?)?;
            files.push(req.need(&req.loading, "loading")?.to_string());
            files.extend(req.unloading.values().cloned());
            files.extend(req.sweep.clone());
        }
    }
    for f in &files {
        project.resolve(f)?;
    }
    Ok(files)
}

/// Hash of the request, the config sections it uses and every input file.
pub fn inputs_hash(project: &Project, config: &WorkbenchConfig, req: &JobRequest) -> Result<String> {
    let mut h = Sha256::new();
    let mut put = |b: &[u8]| {
        h.update((b.len() as u64).to_le_bytes());
        h.update(b);
    };
    put(serde_json::to_string(req).expect("request serializes").as_bytes());
    let section = match req.kind {
        JobKind::Simulate => serde_json::to_string(&(config.mesh, config.solver)),
        JobKind::Shoot => serde_json::to_string(&config.shooter),
        JobKind::Measure => serde_json::to_string(&config.report),
        JobKind::Calibrate => Ok(String::new()),
    }
    .expect("config serializes");
    put(section.as_bytes());
    for f in input_files(project, req)? {
        put(f.as_bytes());
        put(doc::read_file(&project.resolve(&f)?)?.as_bytes());
    }
    Ok(hex::encode(h.finalize()))
}

pub fn job_id(inputs_hash: &str) -> String {
    format!("j{}", &inputs_hash[..16])
}

/// What a finished job produced. Effects on the manifest are applied by the
/// caller, which serializes manifest writes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JobOutcome {
    pub outputs: BTreeMap<String, String>,
    /// (state id, file relative to the root)
    pub states: Vec<(String, String)>,
    /// (name, card JSON) to store as a material.
    pub material: Option<(String, String)>,
}

/// Run a job against a snapshot of the project. Writes only inside the
/// job's own directory.
pub fn execute(project: &Project, config: &WorkbenchConfig, id: &str, req: &JobRequest) -> Result<JobOutcome> {
    let dir = project.job_dir(id);
    let rel = |f: &str| format!("{JOBS_DIR}/{id}/{f}");
    let mut out = JobOutcome::default();
    match req.kind {
        JobKind::Simulate => {
            let design = project.design(req.need(&req.design, "design")?)?;
            let cards = project.cards_for(&design)?;
            pipeline::simulate_design(&design, &cards, &config.mesh, &config.solver, &dir)?;
            out.outputs.insert("summary".into(), rel(RUN_FILE));
            for stage in [StageLabel::StageA, StageLabel::StageB] {
                let tag = pipeline::stage_tag(stage);
                out.outputs.insert(tag.into(), rel(pipeline::state_file(stage)));
                out.outputs.insert(format!("{tag}_obj"), rel(pipeline::obj_file(stage)));
                out.states.push((format!("{id}.{tag}"), rel(pipeline::state_file(stage))));
            }
        }
        JobKind::Shoot => {
            let card = project.resolve(&Project::material_rel(req.need(&req.material, "material")?))?;
            let obs = project.resolve(req.need(&req.observations, "observations")?)?;
            let r = pipeline::shoot_files(&obs, &card, &config.shooter)?;
            doc::write_file(&dir.join("result.shoot.json"), &r.to_json())?;
            out.outputs.insert("result".into(), rel("result.shoot.json"));
        }
        JobKind::Measure => {
            let run = project.root().join(JOBS_DIR).join(req.need(&req.run, "run")?);
            let pairs = project.resolve(req.need(&req.measurements, "measurements")?)?;
            let m = pipeline::measure_run(&run, req.stage_label()?, &pairs)?;
            doc::write_file(&dir.join("measurement.json"), &m.to_json())?;
            out.outputs.insert("measurement".into(), rel("measurement.json"));
            if m.pairs.len() >= 2 {
                let r = pipeline::report(&m.pairs, &config.report)?;
                doc::write_file(&dir.join("report.json"), &r.to_json())?;
                out.outputs.insert("report".into(), rel("report.json"));
            }
        }
        JobKind::Calibrate => {
            let name = req.need(&req.material, "material")?;
            let (alpha_t, poisson) = match (req.alpha_t, req.poisson) {
                (Some(a), Some(p)) => (a, p),
                _ => return Err(WorkbenchError::Input("calibrate job needs alpha_t and poisson".into())),
            };
            let mut c = CalibrateRequest::new(name, project.resolve(req.need(&req.loading, "loading")?)?, alpha_t, poisson);
            for (s, f) in &req.unloading {
                let sigma = s
                    .parse::<f64>()
                    .map_err(|_| WorkbenchError::Input(format!("unloading key {s:?} is not a stress")))?;
                c.unloading.push((sigma, project.resolve(f)?));
            }
            c.sweep = req.sweep.as_deref().map(|f| project.resolve(f)).transpose()?;
            c.density = req.density.unwrap_or(c.density);
            c.prony_terms = req.prony_terms.unwrap_or(c.prony_terms);
            let (card, report) = pipeline::calibrate_files(&c)?;
            let report_text = doc::to_json(pipeline::CALIBRATION_KIND, &report);
            doc::write_file(&dir.join("calibration.json"), &report_text)?;
            out.outputs.insert("calibration".into(), rel("calibration.json"));
            out.outputs.insert("material".into(), Project::material_rel(name));
            out.material = Some((name.into(), card.to_json()));
        }
    }
    Ok(out)
}
