//! Point-pair distance comparison between simulated and printed shapes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::doc::{self, DocError};
use crate::grid::BeamMesh;
use crate::reference::PUBLISHED_PAIRS_CSV;
use crate::sim::DeformedState;

pub const REPORT_KIND: &str = "accuracy_report";

/// A listed error that differs from the recomputed one by more than this
/// (percentage points) is flagged.
pub const LISTED_ERROR_TOL_PP: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AccuracyError {
    #[error("unresolved point reference {0:?}")]
    UnresolvedReference(String),
    #[error("confidence interval needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("invalid pair {label:?}: {reason}")]
    InvalidPair { label: String, reason: String },
    #[error("confidence level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),
    #[error("measurement file: {0}")]
    Csv(String),
    #[error(transparent)]
    Document(#[from] DocError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub experiment_mm: f64,
    pub simulation_mm: f64,
    /// Error as printed alongside the distances, when one was supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub listed_error_pct: Option<f64>,
}

impl PointPair {
    pub fn new(label: &str, experiment_mm: f64, simulation_mm: f64) -> Self {
        PointPair {
            label: label.into(),
            group: None,
            experiment_mm,
            simulation_mm,
            listed_error_pct: None,
        }
    }

    pub fn validate(&self) -> Result<(), AccuracyError> {
        let bad = |reason: &str| AccuracyError::InvalidPair {
            label: self.label.clone(),
            reason: reason.into(),
        };
        if !(self.experiment_mm.is_finite() && self.experiment_mm > 0.0) {
            return Err(bad("experiment distance must be positive"));
        }
        if !(self.simulation_mm.is_finite() && self.simulation_mm >= 0.0) {
            return Err(bad("simulation distance must be non-negative"));
        }
        Ok(())
    }
}

/// Percent deviation of the simulated distance from the measured one.
pub fn pair_error(pair: &PointPair) -> f64 {
    100.0 * (pair.experiment_mm - pair.simulation_mm).abs() / pair.experiment_mm
}

/// Student-t interval on the mean of `values`.
pub fn confidence_interval(values: &[f64], level: f64) -> Result<(f64, f64), AccuracyError> {
    let n = values.len();
    if n < 2 {
        return Err(AccuracyError::TooFewPairs(n));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(AccuracyError::InvalidLevel(level));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let t = StudentsT::new(0.0, 1.0, nf - 1.0)
        .expect("degrees of freedom positive")
        .inverse_cdf(0.5 + level / 2.0);
    let half = t * var.sqrt() / nf.sqrt();
    Ok((mean - half, mean + half))
}

/// Point on a deformed structure: a design node, or a parametric position
/// `t` in [0, 1] along a member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointRef {
    Node(String),
    Member { member: String, t: f64 },
}

impl PointRef {
    /// `n:<node>` or `m:<member>@<t>`.
    pub fn parse(s: &str) -> Result<Self, AccuracyError> {
        let bad = || AccuracyError::UnresolvedReference(s.to_string());
        if let Some(id) = s.strip_prefix("n:") {
            if id.is_empty() {
                return Err(bad());
            }
            return Ok(PointRef::Node(id.into()));
        }
        if let Some(rest) = s.strip_prefix("m:") {
            let (member, t) = rest.rsplit_once('@').ok_or_else(bad)?;
            let t: f64 = t.parse().map_err(|_| bad())?;
            if member.is_empty() || !(0.0..=1.0).contains(&t) {
                return Err(bad());
            }
            return Ok(PointRef::Member {
                member: member.into(),
                t,
            });
        }
        Err(bad())
    }

    pub fn resolve(&self, state: &DeformedState, mesh: &BeamMesh) -> Result<[f64; 3], AccuracyError> {
        match self {
            PointRef::Node(id) => mesh
                .nodes
                .iter()
                .position(|n| n.design_id.as_deref() == Some(id.as_str()))
                .and_then(|i| state.node_positions.get(i).copied())
                .ok_or_else(|| AccuracyError::UnresolvedReference(self.to_string())),
            PointRef::Member { member, t } => {
                if !mesh.member_nodes.contains_key(member) {
                    return Err(AccuracyError::UnresolvedReference(self.to_string()));
                }
                state
                    .member_point(mesh, member, *t)
                    .map_err(|_| AccuracyError::UnresolvedReference(self.to_string()))
            }
        }
    }
}

impl std::fmt::Display for PointRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointRef::Node(id) => write!(f, "n:{id}"),
            PointRef::Member { member, t } => write!(f, "m:{member}@{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRefs {
    pub label: String,
    pub a: PointRef,
    pub b: PointRef,
}

/// Deformed-configuration distance of every labelled pair, in mm.
pub fn measure_state(
    state: &DeformedState,
    mesh: &BeamMesh,
    refs: &[LabeledRefs],
) -> Result<Vec<f64>, AccuracyError> {
    refs.iter()
        .map(|r| {
            let p = r.a.resolve(state, mesh)?;
            let q = r.b.resolve(state, mesh)?;
            Ok(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimulatedSide {
    Distance(f64),
    Refs(PointRef, PointRef),
}

/// One row of a measurement file.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRow {
    pub label: String,
    pub group: Option<String>,
    pub experiment_mm: f64,
    pub listed_error_pct: Option<f64>,
    pub simulated: SimulatedSide,
}

impl MeasurementRow {
    pub fn needs_state(&self) -> bool {
        matches!(self.simulated, SimulatedSide::Refs(..))
    }

    pub fn into_pair(self, state: Option<(&DeformedState, &BeamMesh)>) -> Result<PointPair, AccuracyError> {
        let simulation_mm = match &self.simulated {
            SimulatedSide::Distance(d) => *d,
            SimulatedSide::Refs(a, b) => {
                let (state, mesh) =
                    state.ok_or_else(|| AccuracyError::UnresolvedReference(format!("{a} (no state loaded)")))?;
                measure_state(
                    state,
                    mesh,
                    &[LabeledRefs {
                        label: self.label.clone(),
                        a: a.clone(),
                        b: b.clone(),
                    }],
                )?[0]
            }
        };
        let pair = PointPair {
            label: self.label,
            group: self.group,
            experiment_mm: self.experiment_mm,
            simulation_mm,
            listed_error_pct: self.listed_error_pct,
        };
        pair.validate()?;
        Ok(pair)
    }
}

/// Parse a measurement CSV. Required columns are `label` and `experiment_mm`,
/// plus either `simulation_mm` or both `point_a` and `point_b`. Optional:
/// `group` (or `design`) and `listed_error_pct`.
pub fn parse_measurements(text: &str) -> Result<Vec<MeasurementRow>, AccuracyError> {
    let csv_err = |m: String| AccuracyError::Csv(m);
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| csv_err(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let label = col("label").ok_or_else(|| csv_err("missing column label".into()))?;
    let exp = col("experiment_mm").ok_or_else(|| csv_err("missing column experiment_mm".into()))?;
    let sim = col("simulation_mm");
    let refs = col("point_a").zip(col("point_b"));
    if sim.is_none() && refs.is_none() {
        return Err(csv_err("need simulation_mm or point_a and point_b".into()));
    }
    let group = col("group").or_else(|| col("design"));
    let listed = col("listed_error_pct");

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(e.to_string()))?;
        let row = i + 1;
        let num = |k: usize| {
            rec[k]
                .parse::<f64>()
                .map_err(|_| csv_err(format!("row {row}: bad number {:?}", &rec[k])))
        };
        let opt = |k: Option<usize>| k.map(|k| &rec[k]).filter(|s| !s.is_empty());
        let simulated = match (opt(sim), refs) {
            (Some(_), _) => SimulatedSide::Distance(num(sim.unwrap())?),
            (None, Some((a, b))) => SimulatedSide::Refs(PointRef::parse(&rec[a])?, PointRef::parse(&rec[b])?),
            (None, None) => return Err(csv_err(format!("row {row}: no simulated distance"))),
        };
        out.push(MeasurementRow {
            label: rec[label].to_string(),
            group: opt(group).map(str::to_string),
            experiment_mm: num(exp)?,
            listed_error_pct: opt(listed).map(|_| num(listed.unwrap())).transpose()?,
            simulated,
        });
    }
    if out.is_empty() {
        return Err(csv_err("no rows".into()));
    }
    Ok(out)
}

/// Point pairs of the lamp cover, bottle holder and shoe supporter, grouped
/// by design, with their listed errors.
pub fn published_pairs() -> Vec<PointPair> {
    parse_measurements(PUBLISHED_PAIRS_CSV)
        .expect("bundled pairs parse")
        .into_iter()
        .map(|r| r.into_pair(None).expect("bundled pairs carry distances"))
        .collect()
}

/// Which error feeds the accuracy of a pair that carries a listed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorBasis {
    #[default]
    Recomputed,
    Listed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportOptions {
    pub level: f64,
    pub basis: ErrorBasis,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            level: 0.95,
            basis: ErrorBasis::Recomputed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub experiment_mm: f64,
    pub simulation_mm: f64,
    pub error_pct: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub listed_error_pct: Option<f64>,
    /// Listed and recomputed errors disagree.
    pub flagged: bool,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub n: usize,
    pub mean_accuracy: f64,
    /// Absent when the group has fewer than two pairs.
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub level: f64,
    pub basis: ErrorBasis,
    pub pairs: Vec<PairReport>,
    pub groups: Vec<GroupSummary>,
    pub pooled: GroupSummary,
}

fn summary(group: &str, acc: &[f64], level: f64) -> Result<GroupSummary, AccuracyError> {
    let interval = match confidence_interval(acc, level) {
        Ok(ci) => Some(ci),
        Err(AccuracyError::TooFewPairs(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(GroupSummary {
        group: group.into(),
        n: acc.len(),
        mean_accuracy: acc.iter().sum::<f64>() / acc.len().max(1) as f64,
        interval,
    })
}

impl AccuracyReport {
    /// Per-pair errors, per-group intervals and the pooled interval. The
    /// pooled set needs at least two pairs.
    pub fn build(pairs: &[PointPair], opts: &ReportOptions) -> Result<Self, AccuracyError> {
        if pairs.len() < 2 {
            return Err(AccuracyError::TooFewPairs(pairs.len()));
        }
        let mut rows = Vec::with_capacity(pairs.len());
        let mut by_group: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for p in pairs {
            p.validate()?;
            let error_pct = pair_error(p);
            let flagged = p
                .listed_error_pct
                .is_some_and(|l| (l - error_pct).abs() > LISTED_ERROR_TOL_PP);
            let used = match (opts.basis, p.listed_error_pct) {
                (ErrorBasis::Listed, Some(l)) => l,
                _ => error_pct,
            };
            let accuracy = 1.0 - used / 100.0;
            if let Some(g) = &p.group {
                by_group.entry(g.clone()).or_default().push(accuracy);
            }
            rows.push(PairReport {
                label: p.label.clone(),
                group: p.group.clone(),
                experiment_mm: p.experiment_mm,
                simulation_mm: p.simulation_mm,
                error_pct,
                listed_error_pct: p.listed_error_pct,
                flagged,
                accuracy,
            });
        }
        let groups = by_group
            .iter()
            .map(|(g, acc)| summary(g, acc, opts.level))
            .collect::<Result<Vec<_>, _>>()?;
        let all: Vec<f64> = rows.iter().map(|r| r.accuracy).collect();
        Ok(AccuracyReport {
            level: opts.level,
            basis: opts.basis,
            pairs: rows,
            groups,
            pooled: summary("pooled", &all, opts.level)?,
        })
    }

    pub fn group(&self, name: &str) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.group == name)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &PairReport> {
        self.pairs.iter().filter(|p| p.flagged)
    }

    pub fn to_json(&self) -> String {
        doc::to_json(REPORT_KIND, self)
    }

    pub fn from_json(text: &str) -> Result<Self, AccuracyError> {
        Ok(doc::from_json(REPORT_KIND, text)?)
    }

    /// Plain-text table for terminals.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<14} {:<16} {:>10} {:>10} {:>8} {:>8}",
            "pair", "group", "exp mm", "sim mm", "err %", "listed"
        );
        for p in &self.pairs {
            let listed = p.listed_error_pct.map(|l| format!("{l:.2}")).unwrap_or_default();
            let mark = if p.flagged { " *" } else { "" };
            let _ = writeln!(
                s,
                "{:<14} {:<16} {:>10.2} {:>10.2} {:>8.2} {:>8}{mark}",
                p.label,
                p.group.as_deref().unwrap_or("-"),
                p.experiment_mm,
                p.simulation_mm,
                p.error_pct,
                listed
            );
        }
        let pct = (self.level * 100.0).round();
        let _ = writeln!(s);
        for g in self.groups.iter().chain(std::iter::once(&self.pooled)) {
            let ci = match g.interval {
                Some((lo, hi)) => format!("({lo:.3}, {hi:.3})"),
                None => "n/a".into(),
            };
            let _ = writeln!(
                s,
                "{:<16} n={:<3} mean accuracy {:.4}  {pct}% CI {ci}",
                g.group, g.n, g.mean_accuracy
            );
        }
        if self.flagged().next().is_some() {
            let _ = writeln!(s, "* listed error disagrees with the recomputed one");
        }
        s
    }
}
