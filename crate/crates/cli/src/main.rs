use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eprb_causal::audit::DEFAULT_TOL;
use eprb_causal::eprb::model_chsh;
use eprb_causal::model_file::{bundled, BUNDLED};
use eprb_causal::{
    audit, chsh, chsh_sweep, stability_profile, uniform_grid, AmplitudeKernel, AuditOptions, EprbGeometry,
    Intermediary, ModelFile, PerturbationSpec, PerturbationTarget, Subject,
};

/// Causal-model analysis of EPRB correlations.
#[derive(Parser)]
#[command(name = "eprb-causal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether X and Y are d-separated given Z (comma-separated lists).
    Dsep {
        model: PathBuf,
        x: String,
        y: String,
        #[arg(default_value = "")]
        z: String,
    },
    /// Compare implied and observed independences; print a one-line summary.
    Audit {
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 3)]
        max_cond: usize,
        /// Write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// CHSH value of a model file or an amplitude kernel.
    Chsh {
        model: Option<PathBuf>,
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// CHSH value across a uniform grid of coherence values, as CSV.
    Sweep {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fraction of random perturbations under which fine-tuned independences survive.
    Stability {
        model: Option<PathBuf>,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 3)]
        max_cond: usize,
        /// Also perturb exogenous priors and deterministic rows.
        #[arg(long)]
        perturb_all: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print (or write) one of the bundled example models.
    Example {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(BUNDLED))]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Cpd,
    Physics,
}

/// Amplitude-kernel flags. Angles are radians.
#[derive(Args, Default)]
struct KernelArgs {
    /// Geometry preset.
    #[arg(long, value_enum)]
    kernel: Option<Preset>,
    /// The two α settings, e.g. `0,1.5707963267948966`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    beta: Option<Vec<f64>>,
    /// Entanglement angle of cos η|+-⟩ - sin η|-+⟩.
    #[arg(long)]
    eta: Option<f64>,
    /// Coherence of the intermediary record, 1 coherent to 0 projective.
    #[arg(long)]
    kappa: Option<f64>,
    /// `unmeasured` (each wing's other setting) or two angles `a,b`.
    #[arg(long, allow_hyphen_values = true)]
    intermediary: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Standard,
}

impl KernelArgs {
    fn given(&self) -> bool {
        self.kernel.is_some()
            || self.alpha.is_some()
            || self.beta.is_some()
            || self.eta.is_some()
            || self.kappa.is_some()
            || self.intermediary.is_some()
    }

    fn build(&self) -> Result<AmplitudeKernel, String> {
        let mut geom = EprbGeometry::standard();
        if let Some(a) = &self.alpha {
            geom.alpha = pair("--alpha", a)?;
        }
        if let Some(b) = &self.beta {
            geom.beta = pair("--beta", b)?;
        }
        if let Some(eta) = self.eta {
            geom.eta = eta;
        }
        let intermediary = match self.intermediary.as_deref() {
            None | Some("unmeasured") => Intermediary::Unmeasured,
            Some(s) => {
                let angles = s
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| format!("--intermediary: {e}"))?;
                let [alpha, beta] = pair("--intermediary", &angles)?;
                Intermediary::Fixed { alpha, beta }
            }
        };
        AmplitudeKernel::new(geom, intermediary, self.kappa.unwrap_or(1.0)).map_err(|e| e.to_string())
    }
}

fn pair(flag: &str, values: &[f64]) -> Result<[f64; 2], String> {
    match values {
        [a, b] => Ok([*a, *b]),
        _ => Err(format!("{flag} takes exactly two comma-separated angles, got {}", values.len())),
    }
}

fn names(list: &str) -> Vec<&str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), String> {
    let err = |e: eprb_causal::Error| e.to_string();
    match cli.command {
        Command::Dsep { model, x, y, z } => {
            let dag = ModelFile::load(&model).and_then(|m| m.to_dag()).map_err(err)?;
            let separated = dag.d_separated(&names(&x), &names(&y), &names(&z)).map_err(err)?;
            println!("{}", if separated { "d-separated" } else { "d-connected" });
        }
        Command::Audit { model, tol, max_cond, json } => {
            let model = ModelFile::load(&model).and_then(|m| m.to_model()).map_err(err)?;
            let report = audit(&model, max_cond, tol).map_err(err)?;
            if let Some(path) = json {
                write_out(Some(&path), &to_json(&report))?;
            }
            println!("{}", report.summary());
        }
        Command::Chsh { model, kernel } => {
            let s = match (model, kernel.given()) {
                (Some(_), true) => return Err("give either a model file or kernel flags, not both".into()),
                (Some(path), false) => {
                    let model = ModelFile::load(&path).and_then(|m| m.to_model()).map_err(err)?;
                    model_chsh(&model).map_err(err)?
                }
                (None, _) => chsh(&kernel.build()?).map_err(err)?,
            };
            println!("{s:.12}");
        }
        Command::Sweep { kernel, grid, out } => {
            let k = kernel.build()?;
            let grid = uniform_grid(grid).map_err(err)?;
            let rows = chsh_sweep(k.geom, k.intermediary, &grid).map_err(err)?;
            let mut csv = String::from("kappa,S\n");
            for (kappa, s) in rows {
                writeln!(csv, "{kappa:.18},{s:.18}").unwrap();
            }
            write_out(out.as_deref(), &csv)?;
        }
        Command::Stability {
            model,
            kernel,
            target,
            delta,
            trials,
            seed,
            tol,
            max_cond,
            perturb_all,
            json,
        } => {
            let target_kind = match target {
                Target::Cpd => PerturbationTarget::CpdLevel,
                Target::Physics => PerturbationTarget::PhysicsLevel,
            };
            let mut spec = PerturbationSpec::new(target_kind, delta, trials, seed).map_err(err)?;
            spec.perturb_exempt = perturb_all;
            let opts = AuditOptions {
                max_conditioning_size: Some(max_cond),
                tol,
            };
            let report = match (target, model) {
                (Target::Cpd, Some(path)) if !kernel.given() => {
                    let model = ModelFile::load(&path).and_then(|m| m.to_model()).map_err(err)?;
                    stability_profile(Subject::Model(&model), &spec, &opts).map_err(err)?
                }
                (Target::Cpd, _) => {
                    return Err("cpd-level stability perturbs a model file; kernel flags do not apply".into())
                }
                (Target::Physics, None) => {
                    let k = kernel.build()?;
                    stability_profile(Subject::Kernel(&k), &spec, &opts).map_err(err)?
                }
                (Target::Physics, Some(_)) => {
                    return Err("physics-level stability perturbs an amplitude kernel; pass kernel flags, not a model file".into())
                }
            };
            println!("profile {:.6} over {} trials", report.profile, report.trials);
            match (report.max_signalling, report.signalling_fraction) {
                (Some(max), Some(frac)) => println!("max signalling {max:.3e}, signalling trials {frac:.6}"),
                _ => println!("max signalling n/a"),
            }
            let stable = report.tracked.iter().filter(|t| t.survival == 1.0).count();
            println!(
                "tracked {} unfaithful independences, {stable} survive every trial",
                report.tracked.len()
            );
            for t in report.tracked.iter().filter(|t| t.survival < 1.0) {
                println!("survival {:.6} {}", t.survival, t.statement);
            }
            if let Some(path) = json {
                write_out(Some(&path), &to_json(&report))?;
            }
        }
        Command::Example { name, out } => {
            let file = bundled(&name).map_err(err)?;
            write_out(out.as_deref(), &file.to_json())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
