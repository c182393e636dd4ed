#![allow(dead_code)]

use std::path::{Path, PathBuf};

use morphsim_workbench::cli;

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

pub fn s(p: &Path) -> String {
    p.display().to_string()
}

/// Run the CLI in-process; returns (exit code, stdout, stderr).
pub fn cli(args: &[&str]) -> (u8, String, String) {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let mut argv = vec!["morphsim"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut o, &mut e);
    (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
}

pub fn unloading_args() -> Vec<String> {
    ["0.079", "0.132", "0.170", "0.203"]
        .iter()
        .flat_map(|s| {
            [
                "--unloading".to_string(),
                format!("{s}={}", data(&format!("pla_unloading_{s}.csv")).display()),
            ]
        })
        .collect()
}

/// Calibrate the PLA card from the bundled tables into `out`.
pub fn calibrate_pla(project: &Path, out: &Path) -> (u8, String, String) {
    let mut args: Vec<String> = vec![
        "--project".into(),
        s(project),
        "calibrate".into(),
        "--name".into(),
        "PLA".into(),
        "--loading".into(),
        s(&data("pla_loading.csv")),
        "--sweep".into(),
        s(&data("pla_sweep.csv")),
        "--alpha-t".into(),
        "9.17e-4".into(),
        "--poisson".into(),
        "0.419".into(),
        "--out".into(),
        s(out),
    ];
    args.extend(unloading_args());
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    cli(&refs)
}
