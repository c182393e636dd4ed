//! Command-line front end. Exit codes: 0 success, 1 input error, 2 numerical
//! failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use morphsim::accuracy::ErrorBasis;
use morphsim::dma::Schema;
use morphsim::doc;
use morphsim::grid::MeshConfig;
use morphsim::material::DEFAULT_DENSITY;

use crate::config::WorkbenchConfig;
use crate::error::{Result, WorkbenchError};
use crate::pipeline::{self, CalibrateRequest, IngestRequest, CALIBRATION_KIND};
use crate::project::{Project, MATERIALS_DIR, ROOT_ENV};

#[derive(Debug, Parser)]
#[command(name = "morphsim", version, about = "Calibrate, simulate and check 4D-printed grid structures")]
pub struct Cli {
    /// Project root; material cards are also looked up in its materials/ folder.
    #[arg(long, global = true, env = ROOT_ENV, default_value = ".")]
    pub project: PathBuf,
    /// JSON file with solver, smoother, mesh, shooter and report defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemaArg {
    StressStrain,
    FrequencySweep,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BasisArg {
    Recomputed,
    Listed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a raw DMA CSV to canonical columns.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "stress-strain")]
        schema: SchemaArg,
        /// Reduce a cyclic record to its main loading envelope.
        #[arg(long)]
        main_loading: bool,
        /// P-spline smoothing with the configured smoother.
        #[arg(long)]
        smooth: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a material card from loading, unloading and sweep curves.
    Calibrate {
        #[arg(long)]
        name: String,
        #[arg(long)]
        loading: PathBuf,
        /// SIGMA0=FILE, repeated once per unloading curve.
        #[arg(long, value_parser = parse_unloading)]
        unloading: Vec<(f64, PathBuf)>,
        #[arg(long)]
        sweep: Option<PathBuf>,
        /// Thermal expansion coefficient, 1/°C.
        #[arg(long)]
        alpha_t: f64,
        #[arg(long)]
        poisson: f64,
        /// kg/m³
        #[arg(long, default_value_t = DEFAULT_DENSITY)]
        density: f64,
        #[arg(long, default_value_t = morphsim::material::DEFAULT_PRONY_TERMS)]
        prony_terms: usize,
        /// Card file; defaults to <project>/materials/<name>.matcard.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the calibration diagnostics here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Identify the residual stress from triggering observations.
    Shoot {
        #[arg(long)]
        observations: PathBuf,
        /// Card file of the printed material.
        #[arg(long)]
        material: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Trials through the beam network instead of the closed form.
        #[arg(long)]
        high_fidelity: bool,
    },
    /// Run both triggering stages on a grid design.
    Simulate {
        #[arg(long)]
        design: PathBuf,
        /// Run directory.
        #[arg(long)]
        out: PathBuf,
        /// Minimum segments per member (overrides the config).
        #[arg(long)]
        segments: Option<usize>,
    },
    /// Resolve measurement point pairs against a simulated stage.
    Measure {
        /// Run directory written by `simulate`.
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value = "stage_b")]
        stage: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate point pairs into an accuracy report with t intervals.
    Report {
        /// Measurement CSV (with simulation_mm) or measurement JSON; repeatable.
        #[arg(long)]
        pairs: Vec<PathBuf>,
        /// Include the bundled published pairs.
        #[arg(long)]
        published: bool,
        #[arg(long, value_enum)]
        basis: Option<BasisArg>,
        #[arg(long)]
        level: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the HTTP API on the project.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8377")]
        addr: String,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn parse_unloading(s: &str) -> std::result::Result<(f64, PathBuf), String> {
    let (sigma, path) = s.split_once('=').ok_or("expected SIGMA0=FILE")?;
    let sigma = sigma.trim().parse::<f64>().map_err(|_| format!("bad stress {sigma:?}"))?;
    Ok((sigma, PathBuf::from(path)))
}

/// Parse and run; diagnostics go to `err`, results to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<WorkbenchConfig> {
    match &cli.config {
        Some(p) => WorkbenchConfig::load(p),
        None => Ok(WorkbenchConfig::default()),
    }
}

fn emit(out: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| WorkbenchError::Input(format!("stdout: {e}")))
}

fn write(path: &Path, text: &str) -> Result<()> {
    Ok(doc::write_file(path, text)?)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let mut config = load_config(&cli)?;
    let materials = cli.project.join(MATERIALS_DIR);
    match cli.command {
        Command::Ingest {
            input,
            schema,
            main_loading,
            smooth,
            out: dest,
        } => {
            let schema = match schema {
                SchemaArg::StressStrain => Schema::StressStrain,
                SchemaArg::FrequencySweep => Schema::FrequencySweep,
            };
            let req = IngestRequest {
                input,
                schema,
                main_loading,
                smooth,
                out: dest.clone(),
            };
            let rows = pipeline::ingest(&req, &config.smoother)?;
            emit(out, &format!("wrote {rows} rows to {}", dest.display()))
        }
        Command::Calibrate {
            name,
            loading,
            unloading,
            sweep,
            alpha_t,
            poisson,
            density,
            prony_terms,
            out: dest,
            report,
        } => {
            crate::project::check_name(&name)?;
            let req = CalibrateRequest {
                unloading,
                sweep,
                density,
                prony_terms,
                ..CalibrateRequest::new(&name, loading, alpha_t, poisson)
            };
            let (card, rep) = pipeline::calibrate_files(&req)?;
            let dest = dest.unwrap_or_else(|| cli.project.join(Project::material_rel(&name)));
            write(&dest, &card.to_json())?;
            if let Some(r) = report {
                write(&r, &doc::to_json(CALIBRATION_KIND, &rep))?;
            }
            if let Some(t) = &card.plasticity {
                for row in &t.rows {
                    emit(out, &format!("plasticity {:.3} MPa -> {:.6}", row.yield_stress, row.plastic_strain))?;
                }
            }
            emit(
                out,
                &format!("viscoelastic {}; wrote {}", if rep.viscoelastic_enabled { "on" } else { "off" }, dest.display()),
            )
        }
        Command::Shoot {
            observations,
            material,
            out: dest,
            high_fidelity,
        } => {
            config.shooter.high_fidelity |= high_fidelity;
            let r = pipeline::shoot_files(&observations, &material, &config.shooter)?;
            write(&dest, &r.to_json())?;
            emit(
                out,
                &format!("sigma0 {:.6} MPa, residual {:.4} mm after {} trials", r.sigma0, r.residual, r.iterations),
            )
        }
        Command::Simulate {
            design,
            out: dest,
            segments,
        } => {
            let mesh = MeshConfig {
                n_min: segments.unwrap_or(config.mesh.n_min),
            };
            let s = pipeline::simulate_file(&design, Some(&materials), &mesh, &config.solver, &dest)?;
            for m in &s.members {
                emit(out, &format!("{} stage_a {:.6} mm stage_b {:.6} mm", m.member, m.stage_a_mm, m.stage_b_mm))?;
            }
            Ok(())
        }
        Command::Measure {
            run,
            pairs,
            stage,
            out: dest,
        } => {
            let m = pipeline::measure_run(&run, pipeline::parse_stage(&stage)?, &pairs)?;
            write(&dest, &m.to_json())?;
            for p in &m.pairs {
                emit(out, &format!("{} {:.4} mm (measured {:.4})", p.label, p.simulation_mm, p.experiment_mm))?;
            }
            Ok(())
        }
        Command::Report {
            pairs,
            published,
            basis,
            level,
            out: dest,
        } => {
            let mut opts = config.report;
            if let Some(b) = basis {
                opts.basis = match b {
                    BasisArg::Recomputed => ErrorBasis::Recomputed,
                    BasisArg::Listed => ErrorBasis::Listed,
                };
            }
            if let Some(l) = level {
                opts.level = l;
            }
            if pairs.is_empty() && !published {
                return Err(WorkbenchError::Input("no pairs given (use --pairs or --published)".into()));
            }
            let r = pipeline::report(&pipeline::collect_pairs(&pairs, published)?, &opts)?;
            if let Some(d) = dest {
                write(&d, &r.to_json())?;
            }
            let text = r.table();
            emit(out, text.trim_end())
        }
        Command::Serve { addr, workers } => {
            if let Some(w) = workers {
                config.workers = w;
            }
            config.validate()?;
            let state = crate::service::AppState::open(&cli.project, config)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| WorkbenchError::Input(format!("runtime: {e}")))?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(&addr)
                    .await
                    .map_err(|e| WorkbenchError::Input(format!("bind {addr}: {e}")))?;
                emit(out, &format!("serving {} on http://{addr}", cli.project.display()))?;
                crate::service::serve(listener, state)
                    .await
                    .map_err(|e| WorkbenchError::Input(format!("serve: {e}")))
            })
        }
    }
}
