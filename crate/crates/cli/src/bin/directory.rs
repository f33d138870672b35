// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Result;
use clap::Parser;
use pwreuse_directory::{spawn_directory, Directory, DirectoryConfig, SystemClock};
use pwreuse_net::ProfileKind;
use tracing::info;

#[derive(Parser)]
#[command(about = "Directory service: registry, consent gate and query fan-out")]
struct Cli {
    #[arg(long, default_value = "127.0.0.1:7400")]
    listen: String,
    #[arg(long, default_value = "trusted")]
    profile: ProfileKind,
    /// Return after this fraction of the chosen responders has answered.
    #[arg(long, default_value_t = 1.0)]
    early_return_fraction: f64,
    #[arg(long, default_value_t = 60)]
    window_seconds: u64,
    /// Persist the registry here; in memory only otherwise.
    #[arg(long)]
    state_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> Result<()> {
    pwreuse_cli::init_tracing();
    let cli = Cli::parse();
    let config = DirectoryConfig {
        early_return_fraction: cli.early_return_fraction,
        window: Duration::from_secs(cli.window_seconds),
        state_dir: cli.state_dir,
        ..DirectoryConfig::for_profile(cli.profile)
    };
    let directory = Directory::new(config, Arc::new(SystemClock::default()))?;
    let handle = spawn_directory(&cli.listen, directory).await?;
    info!(addr = %handle.addr(), profile = %cli.profile, "directory listening");
    tokio::signal::ctrl_c().await?;
    info!("shutting down");
    handle.shutdown()?;
    Ok(())
}
