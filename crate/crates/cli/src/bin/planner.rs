// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use pwreuse_cli::{parse_profile, read, HashArgs, ModelArgs};
use pwreuse_core::group::Group;
use pwreuse_net::bench::{bench_run, BenchScenario};
use pwreuse_net::LatencyProfile;
use pwreuse_planner::{fit_model, optimize, samples_from_csv, PlanError};

#[derive(Parser)]
#[command(about = "Pick query parameters, fit latency models, and run timing benches")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Best (n, rho) under a response-time goal.
    Optimize {
        #[arg(long)]
        t_goal: f64,
        /// Honeywords per account.
        #[arg(long)]
        d: u32,
        /// Registered responders for the account.
        #[arg(long)]
        responders: u32,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Least-squares latency model from bench output.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        /// Rows of this phase only; `total` is what the planner predicts.
        #[arg(long, default_value = "total")]
        phase: String,
    },
    /// Time query, respond and decode over in-process responders.
    Bench {
        #[arg(long, default_value = "P192")]
        curve_id: Group,
        #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
        n: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "1,8")]
        rho: Vec<u32>,
        #[arg(long, default_value_t = 3)]
        reps: u32,
        #[arg(long, default_value_t = pwreuse_core::bloom::DEFAULT_K)]
        k: u32,
        #[arg(long, default_value = "none", value_parser = parse_profile)]
        profile: LatencyProfile,
        /// Seconds within which a response counts as qualifying.
        #[arg(long, default_value_t = 5.0)]
        qualifying: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        hash: HashArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    pwreuse_cli::init_tracing();
    match Cli::parse().cmd {
        Cmd::Optimize {
            t_goal,
            d,
            responders,
            model,
        } => {
            let (m, curve) = (model.model()?, model.curve()?);
            match optimize(t_goal, responders, d, &m, &curve) {
                Ok(p) => println!(
                    "n = {}\nrho = {}\ntdr = {:.4}\nt_predicted = {:.4}",
                    p.n, p.rho, p.tdr, p.t_predicted
                ),
                Err(PlanError::Infeasible) => {
                    println!("infeasible");
                    std::process::exit(2);
                }
                Err(e) => return Err(e.into()),
            }
        }
        Cmd::Fit { csv, phase } => {
            let samples = samples_from_csv::<f64>(&read(&csv)?, Some(&phase))?;
            let model = fit_model(&samples)?;
            print!("{}", model.to_text());
        }
        Cmd::Bench {
            curve_id,
            n,
            rho,
            reps,
            k,
            profile,
            qualifying,
            seed,
            hash,
            out,
        } => {
            let scenario = BenchScenario {
                group: curve_id,
                ns: n,
                rhos: rho,
                reps,
                k,
                hash_cost: hash.cost(),
                profile,
                qualifying_threshold: Duration::from_secs_f64(qualifying),
                seed,
            };
            let report = bench_run(&scenario);
            match out {
                Some(path) => {
                    let f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    report.write_csv(f)?;
                }
                None => report.write_csv(std::io::stdout())?,
            }
            for q in &report.qualifying {
                eprintln!(
                    "rho={} n={}: {}/{} qualifying, {:.2}/s",
                    q.rho, q.n, q.qualifying, q.responses, q.per_second
                );
            }
        }
    }
    Ok(())
}
