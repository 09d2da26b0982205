//! Command-line front end.
//!
//! Exit status: 0 when every check passes, 1 when a check fails (the report
//! is still written), 2 for usage or input errors.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};
use sunqsde_core::algebra::verify_algebra;
use sunqsde_core::linalg::{c, CMat};
use sunqsde_core::model::{
    check_physical_realizability, check_preservation, extract_slh, random_model, synthesize_state_space, ModelKind,
    StateSpaceModel,
};
use sunqsde_core::oracle::{generator_relation_residuals, init_moments, integrate_moments, ito_integrands};
use sunqsde_core::report::IdentityCheck;
use sunqsde_core::theta::{verify_kron_identities, verify_theta_identities, ThetaContext};
use sunqsde_core::{GellMannBasis, StructureTensors};

use crate::formats::{self, FormatError};

#[derive(Debug, Parser)]
#[command(
    name = "sunqsde",
    version,
    about = "SU(n) QSDE realizability and preservation checks"
)]
pub struct Cli {
    /// Pass/fail threshold for normalized residuals.
    #[arg(long, global = true, env = "SUNQSDE_TOL", default_value_t = 1e-9)]
    pub tol: f64,

    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for multi-file checks (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generators and structure constants of SU(n).
    Basis {
        #[arg(long)]
        n: usize,
    },
    /// Algebra, Theta-calculus and operator-relation identity sweeps.
    CheckIdentities {
        #[arg(long)]
        n: usize,
        /// Random probes for the Theta identities.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// State-space model of an (S = I, L, H) system.
    Synth {
        /// SLH JSON file, `-` for stdin.
        #[arg(long, default_value = "-")]
        slh: PathBuf,
    },
    /// Physical realizability test.
    CheckRealizable(ModelInputs),
    /// Recover (alpha, Lambda) from a realizable model.
    ExtractSlh {
        #[arg(long, default_value = "-")]
        model: PathBuf,
    },
    /// Commutation/anticommutation preservation test.
    CheckPreservation(ModelInputs),
    /// Brute-force Ito integrands at the generator representation.
    Oracle(ModelInputs),
    /// Moment flow of the relation residuals under the vacuum field state.
    Simulate {
        #[arg(long, default_value = "-")]
        model: PathBuf,
        /// Density matrix JSON; defaults to the maximally mixed state.
        #[arg(long)]
        rho: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Largest residual along the trajectory that still counts as preserved.
        #[arg(long, default_value_t = 1e-6)]
        threshold: f64,
        /// Append the mean vector to each row.
        #[arg(long)]
        with_mean: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Seeded random model fixture.
    RandomModel {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        nw: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = KindArg::Realizable)]
        kind: KindArg,
    },
}

#[derive(Debug, Args)]
pub struct ModelInputs {
    /// Model JSON files, `-` for stdin. Several files give a JSON array of
    /// reports in input order.
    #[arg(long = "model", default_value = "-", num_args = 1..)]
    pub models: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Realizable,
    PreservationOnly,
    Generic,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Realizable => ModelKind::Realizable,
            KindArg::PreservationOnly => ModelKind::PreservationOnly,
            KindArg::Generic => ModelKind::Generic,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("{path}: {source}")]
    Input { path: String, source: FormatError },

    #[error(transparent)]
    Core(#[from] sunqsde_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("writing trajectory: {0}")]
    Csv(#[from] csv::Error),
}

/// Report artifact plus verdict.
pub enum Artifact {
    Json(Value),
    Text(Vec<u8>),
}

pub struct Outcome {
    pub artifact: Artifact,
    pub pass: bool,
}

fn display(path: &Path) -> String {
    if path == Path::new("-") {
        "<stdin>".into()
    } else {
        path.display().to_string()
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    let io_err = |source| CliError::Io {
        path: display(path),
        source,
    };
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_err)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(io_err)
    }
}

fn input_err(path: &Path) -> impl Fn(FormatError) -> CliError + '_ {
    move |source| CliError::Input {
        path: display(path),
        source,
    }
}

/// Parses and validates a model file.
pub fn validate_model_file(path: &Path) -> Result<StateSpaceModel, CliError> {
    let text = read_input(path)?;
    let v = formats::parse_json(&text).map_err(input_err(path))?;
    formats::model_from_json(&v).map_err(input_err(path))
}

fn tensors(n: usize) -> Result<(GellMannBasis, StructureTensors), CliError> {
    let b = GellMannBasis::new(n)?;
    let t = StructureTensors::from_basis(&b)?;
    Ok((b, t))
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
    }
    Ok(())
}

/// Runs one checker over each model file, in parallel when `jobs != 1`.
fn per_model(
    inputs: &ModelInputs,
    jobs: usize,
    check: impl Fn(&StateSpaceModel, &GellMannBasis, &ThetaContext<'_>) -> Result<(Value, bool), CliError> + Sync,
) -> Result<Outcome, CliError> {
    let stdin_uses = inputs.models.iter().filter(|p| p.as_path() == Path::new("-")).count();
    if stdin_uses > 1 {
        return Err(CliError::Usage("stdin (`-`) can be read only once".into()));
    }
    let one = |path: &PathBuf| -> Result<(Value, bool), CliError> {
        let m = validate_model_file(path)?;
        let (b, t) = tensors(m.n)?;
        let ctx = ThetaContext::new(&t);
        check(&m, &b, &ctx)
    };
    let results: Vec<Result<(Value, bool), CliError>> = if inputs.models.len() > 1 && jobs != 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
        pool.install(|| inputs.models.par_iter().map(one).collect())
    } else {
        inputs.models.iter().map(one).collect()
    };
    if inputs.models.len() == 1 {
        let (v, pass) = results.into_iter().next().expect("one input")?;
        return Ok(Outcome {
            artifact: Artifact::Json(v),
            pass,
        });
    }
    let mut all = Vec::with_capacity(results.len());
    let mut pass = true;
    for (path, r) in inputs.models.iter().zip(results) {
        let (mut v, p) = r?;
        v.as_object_mut()
            .expect("reports are objects")
            .insert("file".into(), json!(display(path)));
        all.push(v);
        pass &= p;
    }
    Ok(Outcome {
        artifact: Artifact::Json(Value::Array(all)),
        pass,
    })
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    check_tol(cli.tol)?;
    let tol = cli.tol;
    match &cli.command {
        Command::Basis { n } => {
            let (b, t) = tensors(*n)?;
            let report = b.verify(tol);
            let mut v = formats::tensors_to_json(&b, &t);
            v["pass"] = json!(report.pass);
            Ok(Outcome {
                artifact: Artifact::Json(v),
                pass: report.pass,
            })
        }
        Command::CheckIdentities { n, trials, seed } => {
            let (b, t) = tensors(*n)?;
            let ctx = ThetaContext::new(&t);
            let mut report = verify_algebra(&b, &t, tol);
            report.extend(verify_theta_identities(&ctx, *trials, *seed, tol)?);
            report.extend(verify_kron_identities(&ctx, *trials, seed.wrapping_add(1), tol)?);
            let (rc, ra) = generator_relation_residuals(&b, &ctx)?;
            for (id, r) in [("operator_commutation", rc), ("operator_anticommutation", ra)] {
                let mut chk = IdentityCheck::new(id);
                chk.record(r, &[]);
                report.push(chk.finish(tol));
            }
            Ok(Outcome {
                pass: report.pass,
                artifact: Artifact::Json(formats::identity_report_to_json(*n, &report)),
            })
        }
        Command::Synth { slh } => {
            let text = read_input(slh)?;
            let v = formats::parse_json(&text).map_err(input_err(slh))?;
            let (n, p) = formats::slh_from_json(&v).map_err(input_err(slh))?;
            let (_, t) = tensors(n)?;
            let m = synthesize_state_space(&ThetaContext::new(&t), &p)?;
            Ok(Outcome {
                artifact: Artifact::Json(formats::model_to_json(&m)),
                pass: true,
            })
        }
        Command::CheckRealizable(inputs) => per_model(inputs, cli.jobs, |m, _, ctx| {
            let r = check_physical_realizability(ctx, m, tol)?;
            Ok((formats::realizability_to_json(m, &r), r.pass))
        }),
        Command::ExtractSlh { model } => {
            let m = validate_model_file(model)?;
            let (_, t) = tensors(m.n)?;
            let ex = extract_slh(&ThetaContext::new(&t), &m)?;
            Ok(Outcome {
                pass: ex.residual < tol,
                artifact: Artifact::Json(formats::extraction_to_json(m.n, &ex)),
            })
        }
        Command::CheckPreservation(inputs) => per_model(inputs, cli.jobs, |m, _, ctx| {
            let r = check_preservation(ctx, m, tol)?;
            Ok((formats::preservation_to_json(m, &r), r.pass))
        }),
        Command::Oracle(inputs) => per_model(inputs, cli.jobs, |m, b, ctx| {
            let it = ito_integrands(b, ctx, m)?;
            Ok((formats::integrands_to_json(m, &it, tol), it.vanish(tol)))
        }),
        Command::Simulate {
            model,
            rho,
            t_end,
            step,
            threshold,
            with_mean,
            format,
        } => {
            let m = validate_model_file(model)?;
            let (b, t) = tensors(m.n)?;
            let ctx = ThetaContext::new(&t);
            let rho0 = match rho {
                Some(path) => {
                    let text = read_input(path)?;
                    let v = formats::parse_json(&text).map_err(input_err(path))?;
                    formats::density_from_json(&v, m.n).map_err(input_err(path))?
                }
                None => CMat::identity(m.n, m.n) * c(1.0 / m.n as f64),
            };
            let s0 = init_moments(&b, &ctx, &rho0, tol)?;
            let tr = integrate_moments(&ctx, &m, &s0, *t_end, *step)?;
            let pass = tr.max_residual() < *threshold;
            let artifact = match format {
                Format::Json => Artifact::Json(formats::trajectory_to_json(&tr, *threshold, *with_mean)),
                Format::Csv => {
                    let mut buf = Vec::new();
                    formats::write_trajectory_csv(&mut buf, &tr, *with_mean)?;
                    Artifact::Text(buf)
                }
            };
            Ok(Outcome { artifact, pass })
        }
        Command::RandomModel { n, nw, seed, kind } => {
            let (_, t) = tensors(*n)?;
            let m = random_model(&ThetaContext::new(&t), *nw, *seed, (*kind).into())?;
            Ok(Outcome {
                artifact: Artifact::Json(formats::model_to_json(&m)),
                pass: true,
            })
        }
    }
}

fn write_artifact(path: Option<&Path>, artifact: &Artifact) -> io::Result<()> {
    let bytes: Vec<u8> = match artifact {
        Artifact::Json(v) => formats::to_pretty(v).into_bytes(),
        Artifact::Text(b) => b.clone(),
    };
    match path {
        Some(p) => fs::write(p, bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()
        }
    }
}

/// Parses arguments, runs, writes the artifact and maps the verdict to an
/// exit status.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if let Err(e) = write_artifact(cli.output.as_deref(), &outcome.artifact) {
                eprintln!("sunqsde: writing report: {e}");
                return ExitCode::from(2);
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("sunqsde: {e}");
            ExitCode::from(2)
        }
    }
}
