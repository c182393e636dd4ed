//! The command-line pipeline end to end through the library entry point:
//! calibrate a card, simulate a design, measure it and report accuracy.
//!
//! ```text
//! cargo run -p morphsim-workbench --example cli_pipeline
//! ```

use std::path::Path;

use morphsim::grid::{BendingUnitSpec, GridDesign};
use morphsim::reference;
use morphsim_workbench::cli;

fn morphsim(args: &[&str]) {
    let mut argv = vec!["morphsim"];
    argv.extend_from_slice(args);
    println!("$ {}", argv.join(" "));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(argv, &mut out, &mut err);
    print!("{}{}", String::from_utf8_lossy(&out), String::from_utf8_lossy(&err));
    assert_eq!(code, 0, "exit code {code}");
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let write = |name: &str, text: &str| std::fs::write(Path::new(&p(name)), text).unwrap();

    write("loading.csv", reference::PLA_LOADING_CSV);
    write("u079.csv", reference::PLA_UNLOADING_0_079_CSV);
    write("u132.csv", reference::PLA_UNLOADING_0_132_CSV);
    write("u170.csv", reference::PLA_UNLOADING_0_170_CSV);
    write("u203.csv", reference::PLA_UNLOADING_0_203_CSV);
    write("sweep.csv", reference::PLA_SWEEP_CSV);
    let un = |s: &str, f: &str| format!("{s}={}", p(f));
    let (u1, u2, u3, u4) = (un("0.079", "u079.csv"), un("0.132", "u132.csv"), un("0.170", "u170.csv"), un("0.203", "u203.csv"));
    let project = p("");
    morphsim(&[
        "--project", &project, "calibrate", "--name", "PLA", "--loading", &p("loading.csv"), "--unloading", &u1,
        "--unloading", &u2, "--unloading", &u3, "--unloading", &u4, "--sweep", &p("sweep.csv"), "--alpha-t",
        "9.17e-4", "--poisson", "0.419",
    ]);

    let mut design = GridDesign::single_unit("unit", BendingUnitSpec::standard("PLA", "PLA", 1.0, 0.203));
    design.materials.clear();
    design.save(Path::new(&p("unit.grid.json"))).unwrap();
    morphsim(&["--project", &project, "simulate", "--design", &p("unit.grid.json"), "--out", &p("run"), "--segments", "16"]);

    write("pairs.csv", "label,experiment_mm,point_a,point_b\nends,37.3,n:a,n:b\nmid,40.8,n:a,m:u1@0.5\n");
    morphsim(&["measure", "--run", &p("run"), "--pairs", &p("pairs.csv"), "--out", &p("measured.json")]);
    morphsim(&["report", "--pairs", &p("measured.json"), "--level", "0.9"]);
}
