//! `coherence`: classify Kraus operators, apply channels, analyze pure
//! coherent-state subspaces, decide reachability, and run the verification
//! campaigns.
//!
//! Every result is a single JSON document on stdout; diagnostics go to
//! stderr. Exit codes: 0 success / feasible / zero violations, 1 infeasible
//! or violations found, 2 input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::Value;

use coherence_cli::docs;
use coherence_core::campaigns::{
    run_sio_monotone_campaign, run_theorem1_campaign, run_theorem2_example, run_theorem3_campaign,
    run_theorem4_example, CampaignReport,
};
use coherence_core::channels::{apply_channel, apply_stochastic, classify_kraus};
use coherence_core::error::Error as CoreError;
use coherence_core::feasibility::{
    default_nullspace_tol, deterministic_completion_search, stochastic_io_reachable,
    CompletionOptions,
};
use coherence_core::qcore::default_rank_tol;
use coherence_core::subspace::max_pure_coherent_subspace;

#[derive(Parser)]
#[command(
    name = "coherence",
    version,
    about = "Verification and feasibility-search toolkit for quantum coherence transformations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a Kraus operator as StrictlyIncoherent, IncoherentOnly, or
    /// NotIncoherent
    Classify { kraus: PathBuf },
    /// Apply a trace-preserving channel, or post-select a subset of its
    /// branches
    Apply {
        channel: PathBuf,
        state: PathBuf,
        /// Comma-separated 1-based branch indices to post-select
        #[arg(long, value_delimiter = ',')]
        postselect: Option<Vec<usize>>,
    },
    /// Maximal pure coherent-state subspace of a state
    Subspace { state: PathBuf },
    /// Search for a stochastic single-branch protocol reaching the target,
    /// or (with --deterministic) a trace-preserving completion
    Reach {
        state: PathBuf,
        target: PathBuf,
        #[arg(long)]
        deterministic: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Run a verification campaign: theorem1, theorem2, theorem3, theorem4,
    /// sio-monotone, or all
    Verify {
        suite: String,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Exit 1 carrier: the query was well-formed but the answer is negative.
#[derive(Debug)]
struct Infeasible;

impl std::fmt::Display for Infeasible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("infeasible")
    }
}

impl std::error::Error for Infeasible {}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if err.is::<Infeasible>() {
                ExitCode::from(1)
            } else {
                eprintln!("error: {err:#}");
                ExitCode::from(2)
            }
        }
    }
}

fn default_seed(cli_seed: Option<u64>) -> u64 {
    cli_seed
        .or_else(|| {
            std::env::var("COHERENCE_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(7)
}

fn load_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Classify { kraus } => {
            let op = docs::parse_kraus(&load_json(&kraus)?)?;
            let class = classify_kraus(&op);
            emit(&serde_json::json!({ "class": class.as_str() }));
            Ok(())
        }
        Command::Apply {
            channel,
            state,
            postselect,
        } => {
            let spec = docs::parse_channel(&load_json(&channel)?)?;
            let rho = docs::parse_density(&load_json(&state)?)?;
            match postselect {
                None => {
                    let out = apply_channel(&spec, &rho)
                        .map_err(|e| anyhow!("cannot apply channel: {e}"))?;
                    emit(&docs::density_doc(&out));
                    Ok(())
                }
                Some(indices) => {
                    let n = spec.kraus_ops().len();
                    let subset: Result<Vec<_>> = indices
                        .iter()
                        .map(|&i| {
                            if i >= 1 && i <= n {
                                Ok(spec.kraus_ops()[i - 1].clone())
                            } else {
                                bail!("post-selection index {i} out of range 1..={n}")
                            }
                        })
                        .collect();
                    match apply_stochastic(&subset?, &rho) {
                        Ok((out, p)) => {
                            let mut doc = docs::density_doc(&out);
                            doc.as_object_mut()
                                .expect("object")
                                .insert("probability".into(), serde_json::json!(p));
                            emit(&doc);
                            Ok(())
                        }
                        Err(CoreError::VanishingProbability) => {
                            eprintln!("outcome has vanishing probability");
                            Err(Infeasible.into())
                        }
                        Err(e) => Err(anyhow!("cannot post-select: {e}")),
                    }
                }
            }
        }
        Command::Subspace { state } => {
            let rho = docs::parse_density(&load_json(&state)?)?;
            let report = max_pure_coherent_subspace(&rho, default_rank_tol())
                .map_err(|e| anyhow!("{e}"))?;
            emit(&docs::subspace_report_doc(&report));
            Ok(())
        }
        Command::Reach {
            state,
            target,
            deterministic,
            seed,
            restarts,
        } => {
            let rho = docs::parse_density(&load_json(&state)?)?;
            let phi = docs::parse_vector(&load_json(&target)?)?;
            if rho.dim() != phi.dim() {
                bail!("state and target dimensions differ");
            }
            if deterministic {
                let opts = CompletionOptions {
                    restarts: restarts.unwrap_or(32),
                    max_branches: None,
                    seed: default_seed(seed),
                };
                let result = deterministic_completion_search(&rho, &phi, &opts)
                    .map_err(|e| anyhow!("{e}"))?;
                emit(&docs::completion_doc(&result));
                if result.channel.is_some() {
                    Ok(())
                } else {
                    Err(Infeasible.into())
                }
            } else {
                let sol = stochastic_io_reachable(&rho, &phi, default_nullspace_tol())
                    .map_err(|e| anyhow!("{e}"))?;
                match sol {
                    Some(sol) => {
                        emit(&serde_json::json!({
                            "feasible": true,
                            "solution": docs::ray_solution_doc(&sol),
                        }));
                        Ok(())
                    }
                    None => {
                        emit(&serde_json::json!({ "feasible": false, "solution": null }));
                        Err(Infeasible.into())
                    }
                }
            }
        }
        Command::Verify {
            suite,
            samples,
            seed,
        } => {
            let seed = default_seed(seed);
            let reports = run_suites(&suite, samples, seed)?;
            let clean = reports.iter().all(|r| r.is_clean());
            if reports.len() == 1 {
                emit(&serde_json::to_value(&reports[0])?);
            } else {
                emit(&serde_json::to_value(&reports)?);
            }
            if clean {
                Ok(())
            } else {
                Err(Infeasible.into())
            }
        }
    }
}

fn run_suites(suite: &str, samples: Option<usize>, seed: u64) -> Result<Vec<CampaignReport>> {
    let one = |name: &str| -> Result<CampaignReport> {
        Ok(match name {
            "theorem1" => run_theorem1_campaign(samples.unwrap_or(10_000), seed),
            "theorem2" => run_theorem2_example(),
            "theorem3" => run_theorem3_campaign(samples.unwrap_or(50), seed),
            "theorem4" => run_theorem4_example(),
            "sio-monotone" => run_sio_monotone_campaign(samples.unwrap_or(500), seed),
            other => bail!("unknown suite \"{other}\" (expected theorem1, theorem2, theorem3, theorem4, sio-monotone, or all)"),
        })
    };
    if suite == "all" {
        ["theorem1", "theorem2", "theorem3", "theorem4", "sio-monotone"]
            .iter()
            .map(|name| one(name))
            .collect()
    } else {
        Ok(vec![one(suite)?])
    }
}
