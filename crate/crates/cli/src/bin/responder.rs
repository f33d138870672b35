// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use anyhow::{Context, Result};
use clap::Parser;
use pwreuse_cli::{parse_profile, read_secret_line, HashArgs};
use pwreuse_core::similarity::{build_similar_set, SimilarStore};
use pwreuse_net::client::DirectoryClient;
use pwreuse_net::responder::{spawn_responder, ResponderConfig};
use pwreuse_net::LatencyProfile;
use tracing::info;

#[derive(Parser)]
#[command(about = "Answer membership queries from a store of similar-password sets")]
struct Cli {
    #[arg(long)]
    store: PathBuf,
    #[arg(long, default_value = "127.0.0.1:7500")]
    listen: String,
    #[arg(long, default_value = "trusted", value_parser = parse_profile)]
    profile: LatencyProfile,
    /// Register every stored account with this directory at startup.
    #[arg(long)]
    directory: Option<String>,
    /// Endpoint to advertise; the bound address otherwise.
    #[arg(long)]
    advertise: Option<String>,
    /// Add an account (password read from stdin) to the store and exit.
    #[arg(long)]
    enroll: Option<String>,
    /// Honeywords per account when enrolling.
    #[arg(long, default_value_t = 4)]
    d: u32,
    /// Set size when enrolling.
    #[arg(long, default_value_t = 100)]
    capacity: u32,
    #[command(flatten)]
    hash: HashArgs,
}

#[tokio::main]
async fn main() -> Result<()> {
    pwreuse_cli::init_tracing();
    let cli = Cli::parse();
    let mut store = if cli.store.exists() {
        SimilarStore::load(&cli.store).with_context(|| format!("loading {}", cli.store.display()))?
    } else {
        SimilarStore::new()
    };

    if let Some(account) = &cli.enroll {
        let account = pwreuse_directory::canonicalize(account)?;
        let password = read_secret_line("password: ")?;
        let set = build_similar_set(&account, &password, cli.d as usize, cli.capacity as usize, cli.hash.cost(), rand::random())?;
        info!(%account, entries = set.len(), "enrolled");
        store.insert(set);
        store.save(&cli.store)?;
        return Ok(());
    }

    let accounts: Vec<String> = store.iter().map(|s| s.account_id.clone()).collect();
    let config = ResponderConfig {
        profile: cli.profile,
        latency_seed: rand::random(),
        ..Default::default()
    };
    let handle = spawn_responder(&cli.listen, Arc::new(RwLock::new(store)), config).await?;
    let endpoint = cli.advertise.unwrap_or_else(|| handle.endpoint());
    info!(addr = %handle.addr(), accounts = accounts.len(), "responder listening");

    if let Some(addr) = &cli.directory {
        let dir = DirectoryClient::new(addr.clone(), Duration::from_secs(10));
        for a in &accounts {
            dir.register(a, &endpoint).await?;
        }
        info!(directory = %addr, "registered {} accounts", accounts.len());
    }
    tokio::signal::ctrl_c().await?;
    Ok(())
}
