use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DeformedState, SimError};
use crate::grid::BeamMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateFormat {
    Json,
    ObjPolyline,
}

/// One OBJ polyline per member through its deformed mesh nodes.
pub fn obj_polylines(state: &DeformedState, mesh: &BeamMesh) -> String {
    let mut out = String::new();
    let mut base = 1;
    for (member, chain) in &mesh.member_nodes {
        let _ = writeln!(out, "o {member}");
        for &n in chain {
            let p = state.node_positions[n];
            let _ = writeln!(out, "v {} {} {}", p[0], p[1], p[2]);
        }
        let idx: Vec<String> = (base..base + chain.len()).map(|i| i.to_string()).collect();
        let _ = writeln!(out, "l {}", idx.join(" "));
        base += chain.len();
    }
    out
}

/// Parse vertices of each `o` group back from [`obj_polylines`] output.
pub fn parse_obj_polylines(text: &str) -> Vec<(String, Vec<[f64; 3]>)> {
    let mut out: Vec<(String, Vec<[f64; 3]>)> = Vec::new();
    for line in text.lines() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("o") => out.push((it.next().unwrap_or("").to_string(), Vec::new())),
            Some("v") => {
                let v: Vec<f64> = it.filter_map(|s| s.parse().ok()).collect();
                if let (Some(last), [x, y, z]) = (out.last_mut(), v.as_slice()) {
                    last.1.push([*x, *y, *z]);
                }
            }
            _ => {}
        }
    }
    out
}

pub fn export_state(state: &DeformedState, mesh: &BeamMesh, format: StateFormat, path: &Path) -> Result<(), SimError> {
    let text = match format {
        StateFormat::Json => state.to_json(),
        StateFormat::ObjPolyline => obj_polylines(state, mesh),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(path, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, e: std::io::Error) -> SimError {
    SimError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}
