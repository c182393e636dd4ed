mod common;

use std::process::Command;

use common::{calibrate_pla, cli, data, s};
use morphsim::accuracy::AccuracyReport;
use morphsim::grid::{BendingUnitSpec, GridDesign};
use morphsim::material::MaterialCard;
use morphsim::shooter::ShooterResult;
use morphsim::sim::{DeformedState, StageLabel};
use morphsim_workbench::pipeline::{load_run_stage, Measurement, RunSummary};

#[test]
fn calibrate_reproduces_anchor_rows() {
    let dir = tempfile::tempdir().unwrap();
    let card_path = dir.path().join("PLA.matcard.json");
    let (code, out, err) = calibrate_pla(dir.path(), &card_path);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("viscoelastic on"), "{out}");
    let card = MaterialCard::load(&card_path).unwrap();
    let rows: Vec<(f64, f64)> = card
        .plasticity
        .unwrap()
        .rows
        .iter()
        .map(|r| (r.yield_stress, r.plastic_strain))
        .collect();
    assert_eq!(rows, vec![(0.079, 0.004998), (0.132, 0.015219), (0.170, 0.03359), (0.203, 0.055328)]);
}

#[test]
fn calibrate_defaults_to_project_materials() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = cli(&[
        "--project",
        &s(dir.path()),
        "calibrate",
        "--name",
        "CFPLA",
        "--loading",
        &s(&data("pla_loading.csv")),
        "--sweep",
        &s(&data("cfpla_sweep.csv")),
        "--alpha-t",
        "9.97e-5",
        "--poisson",
        "0.359",
    ]);
    assert_eq!(code, 0, "{err}");
    let card = MaterialCard::load(&dir.path().join("materials/CFPLA.matcard.json")).unwrap();
    assert!(!card.viscoelastic_enabled && card.prony.is_none());
}

fn zero_stress_design(dir: &std::path::Path) -> std::path::PathBuf {
    std::fs::write(dir.join("PLA.matcard.json"), MaterialCard::pla().to_json()).unwrap();
    let mut d = GridDesign::single_unit("unit", BendingUnitSpec::standard("PLA", "PLA", 1.0, 0.0));
    d.gravity_m_s2 = [0.0; 3];
    let path = dir.join("unit.grid.json");
    d.save(&path).unwrap();
    path
}

#[test]
fn zero_stress_simulation_is_thermal_expansion() {
    let dir = tempfile::tempdir().unwrap();
    let design = zero_stress_design(dir.path());
    let run = dir.path().join("run1");
    let (code, out, err) = cli(&["simulate", "--design", &s(&design), "--out", &s(&run), "--segments", "8"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("u1 stage_a"));
    let st = DeformedState::from_json(&std::fs::read_to_string(run.join("stage_b.state.json")).unwrap()).unwrap();
    let (_, s0) = load_run_stage(&run, StageLabel::Initial).unwrap();
    let f = 1.0 + 9.17e-4 * 60.0;
    for (p, q) in st.node_positions.iter().zip(&s0.node_positions) {
        for k in 0..3 {
            assert!((p[k] - f * q[k]).abs() < 1e-9, "{p:?} vs {q:?}");
        }
    }
    assert!(run.join("stage_b.state.obj").is_file());
    let summary = RunSummary::from_json(&std::fs::read_to_string(run.join("run.json")).unwrap()).unwrap();
    assert!((summary.member("u1").unwrap().stage_b_mm - 100.0 * f).abs() < 1e-9);
}

#[test]
fn measure_resolves_point_references() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("PLA.matcard.json"), MaterialCard::pla().to_json()).unwrap();
    let design = GridDesign::single_unit("unit", BendingUnitSpec::standard("PLA", "PLA", 1.0, 0.132));
    design.save(&dir.path().join("unit.grid.json")).unwrap();
    let run = dir.path().join("run");
    let (code, _, err) = cli(&[
        "simulate",
        "--design",
        &s(&dir.path().join("unit.grid.json")),
        "--out",
        &s(&run),
        "--segments",
        "8",
    ]);
    assert_eq!(code, 0, "{err}");
    let pairs = dir.path().join("pairs.csv");
    std::fs::write(&pairs, "label,experiment_mm,point_a,point_b\nends,60,n:a,n:b\nhalf,50,n:a,m:u1@0.5\n").unwrap();
    let out = dir.path().join("m.json");
    let (code, _, err) = cli(&["measure", "--run", &s(&run), "--pairs", &s(&pairs), "--out", &s(&out)]);
    assert_eq!(code, 0, "{err}");
    let m = Measurement::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let summary = RunSummary::from_json(&std::fs::read_to_string(run.join("run.json")).unwrap()).unwrap();
    assert!((m.pairs[0].simulation_mm - summary.member("u1").unwrap().stage_b_mm).abs() < 1e-9);
    assert!(m.pairs[1].simulation_mm < m.pairs[0].simulation_mm.max(50.0));

    // The measurement document feeds `report`.
    let rep = dir.path().join("r.json");
    let (code, _, err) = cli(&["report", "--pairs", &s(&out), "--out", &s(&rep)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(AccuracyReport::from_json(&std::fs::read_to_string(&rep).unwrap()).unwrap().pairs.len(), 2);

    std::fs::write(&pairs, "label,experiment_mm,point_a,point_b\nx,60,n:zz,n:b\n").unwrap();
    let (code, _, err) = cli(&["measure", "--run", &s(&run), "--pairs", &s(&pairs), "--out", &s(&out)]);
    assert_eq!(code, 1);
    assert!(err.contains("zz"), "{err}");
}

#[test]
fn report_prints_published_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let (code, text, err) = cli(&["report", "--published", "--out", &s(&out)]);
    assert_eq!(code, 0, "{err}");
    assert!(text.contains("pooled"), "{text}");
    assert!(text.contains('*'), "flagged row marked");
    let r = AccuracyReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let (lo, hi) = r.pooled.interval.unwrap();
    assert!((lo - 0.972).abs() <= 0.002 && (hi - 0.985).abs() <= 0.002, "({lo}, {hi})");
    let (code, _, _) = cli(&["report", "--published", "--basis", "listed", "--level", "0.9"]);
    assert_eq!(code, 0);
    let (code, _, err) = cli(&["report"]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn ingest_writes_canonical_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s1.csv");
    let (code, text, err) = cli(&[
        "ingest",
        "--input",
        &s(&data("pla_loading.csv")),
        "--smooth",
        "--out",
        &s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(text.contains("30 rows"), "{text}");
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("strain,stress_mpa\n"));
    let (code, _, err) = cli(&[
        "ingest",
        "--input",
        &s(&data("pla_sweep.csv")),
        "--schema",
        "frequency-sweep",
        "--smooth",
        "--out",
        &s(&out),
    ]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn shoot_writes_history() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("PLA.matcard.json"), MaterialCard::pla().to_json()).unwrap();
    let obs = dir.path().join("batch.obs.csv");
    std::fs::write(&obs, "actuator_ratio,distance_mm,temp_c\n1.0,60.0,80\n0.75,70.0,80\n").unwrap();
    let out = dir.path().join("r.shoot.json");
    let (code, text, err) = cli(&[
        "shoot",
        "--observations",
        &s(&obs),
        "--material",
        &s(&dir.path().join("PLA.matcard.json")),
        "--out",
        &s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(text.contains("sigma0"));
    let r = ShooterResult::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!r.history.is_empty() && r.sigma0 > 0.079 && r.sigma0 < 0.203);
}

/// Exit codes as seen by a shell.
#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_morphsim");
    std::fs::write(dir.path().join("PLA.matcard.json"), MaterialCard::pla().to_json()).unwrap();
    let obs = dir.path().join("flat.obs.csv");
    std::fs::write(&obs, "actuator_ratio,distance_mm,temp_c\n1.0,100.0,80\n").unwrap();
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();

    let o = run(&[
        "shoot",
        "--observations",
        &s(&obs),
        "--material",
        &s(&dir.path().join("PLA.matcard.json")),
        "--out",
        &s(&dir.path().join("x.json")),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    let o = run(&["simulate", "--design", "missing.grid.json", "--out", &s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.grid.json"));

    let o = run(&["report", "--published"]);
    assert_eq!(o.status.code(), Some(0));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"solver": {"load_steps": 0}}"#).unwrap();
    let o = run(&["--config", &s(&bad), "report", "--published"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn project_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = calibrate_pla(dir.path(), &dir.path().join("materials/PLA.matcard.json"));
    assert_eq!(code, 0);
    // Design without a card next to it; the card comes from the project.
    let work = tempfile::tempdir().unwrap();
    let mut d = GridDesign::single_unit("unit", BendingUnitSpec::standard("PLA", "PLA", 0.5, 0.1));
    d.gravity_m_s2 = [0.0; 3];
    d.save(&work.path().join("unit.grid.json")).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_morphsim"))
        .env("MORPHSIM_PROJECT", dir.path())
        .args(["simulate", "--design", &s(&work.path().join("unit.grid.json")), "--out", &s(&work.path().join("r")), "--segments", "4"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
