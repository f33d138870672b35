// SPDX-License-Identifier: Apache-2.0

use std::time::Duration;

use anyhow::Result;
use clap::Parser;
use pwreuse_cli::{read_secret_line, HashArgs, ModelArgs};
use pwreuse_core::group::Group;
use pwreuse_core::psmt::QueryConfig;
use pwreuse_net::client::DirectoryClient;
use pwreuse_net::requester::{DecoyPolicy, PlanChoice, Requester, RequesterConfig, Verdict};

#[derive(Parser)]
#[command(about = "Check a new password against the account's other sites")]
struct Cli {
    #[arg(long, default_value = "127.0.0.1:7400")]
    directory: String,
    #[arg(long)]
    account: String,
    /// Response-time goal in seconds.
    #[arg(long)]
    t_goal: f64,
    /// Run post-acceptance decoy queries.
    #[arg(long)]
    decoys: bool,
    /// Honeywords per account at the responders.
    #[arg(long, default_value_t = 4)]
    d: u32,
    #[arg(long, default_value = "P192")]
    group: Group,
    #[arg(long, default_value_t = pwreuse_core::bloom::DEFAULT_K)]
    k: u32,
    #[arg(long, default_value_t = 2)]
    retries: u32,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    hash: HashArgs,
}

#[tokio::main]
async fn main() -> Result<()> {
    pwreuse_cli::init_tracing();
    let cli = Cli::parse();
    let password = read_secret_line("new password: ")?;
    let config = RequesterConfig {
        query: QueryConfig {
            group: cli.group,
            k: cli.k,
            hash_cost: cli.hash.cost(),
        },
        d: cli.d,
        plan: PlanChoice::Optimize {
            t_goal: cli.t_goal,
            model: cli.model.model()?,
            curve: cli.model.curve()?,
        },
        decoys: if cli.decoys { DecoyPolicy::default() } else { DecoyPolicy::disabled() },
        retries: cli.retries,
        site: None,
    };
    let client = DirectoryClient::new(cli.directory, Duration::from_secs(60));
    let mut requester = Requester::new(client, config);
    // stands in for the user following the emailed consent link
    requester.open_consent(&cli.account).await?;
    let report = requester.set_password(&cli.account, &password).await?;
    println!(
        "{} (account {}, n = {}, rho = {}, runs = {}, responses = {})",
        match report.verdict {
            Verdict::Accepted => "accepted",
            Verdict::Rejected => "rejected: similar to a password used elsewhere",
        },
        report.canonical_id,
        report.n,
        report.rho,
        report.runs,
        report.responses
    );
    if report.verdict == Verdict::Rejected {
        std::process::exit(1);
    }
    Ok(())
}
