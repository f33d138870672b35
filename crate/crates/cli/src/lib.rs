// SPDX-License-Identifier: Apache-2.0

//! Shared argument handling for the command-line tools.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use pwreuse_core::similarity::HashCost;
use pwreuse_net::LatencyProfile;
use pwreuse_planner::{LatencyModelF64, ReuseCurveF64};

pub fn init_tracing() {
    let filter = tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into());
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).init();
}

/// `trusted`, `untrusted` or `none`.
pub fn parse_profile(s: &str) -> Result<LatencyProfile, String> {
    match s {
        "none" => Ok(LatencyProfile::none()),
        other => other.parse().map(LatencyProfile::for_kind),
    }
}

/// Slow-hash cost. Requesters and responders must agree on it.
#[derive(Args, Clone, Debug)]
pub struct HashArgs {
    #[arg(long, default_value_t = HashCost::default().memory_kib)]
    pub hash_memory_kib: u32,
    #[arg(long, default_value_t = HashCost::default().iterations)]
    pub hash_iterations: u32,
    /// Use the minimal test cost; never for real deployments.
    #[arg(long)]
    pub insecure_fast_hash: bool,
}

impl HashArgs {
    pub fn cost(&self) -> HashCost {
        if self.insecure_fast_hash {
            return HashCost::insecure_fast();
        }
        HashCost {
            memory_kib: self.hash_memory_kib,
            iterations: self.hash_iterations,
            lanes: 1,
        }
    }
}

/// Latency model selection: a named profile or a coefficients file.
#[derive(Args, Clone, Debug)]
pub struct ModelArgs {
    #[arg(long, default_value = "trusted", conflicts_with = "coeffs")]
    pub model: String,
    /// File of `key = value` lines for c0..c3.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// Reuse curve file of `x,p` lines; the built-in curve otherwise.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

impl ModelArgs {
    pub fn model(&self) -> Result<LatencyModelF64> {
        if let Some(path) = &self.coeffs {
            return Ok(LatencyModelF64::parse(&read(path)?)?);
        }
        match self.model.as_str() {
            "trusted" => Ok(LatencyModelF64::trusted()),
            "untrusted" => Ok(LatencyModelF64::untrusted()),
            other => bail!("unknown model {other:?} (expected trusted or untrusted)"),
        }
    }

    pub fn curve(&self) -> Result<ReuseCurveF64> {
        match &self.curve {
            Some(path) => Ok(ReuseCurveF64::parse(&read(path)?)?),
            None => Ok(ReuseCurveF64::default()),
        }
    }
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// One line from stdin without its newline. Keeps passwords off the command line.
pub fn read_secret_line(prompt: &str) -> Result<String> {
    eprint!("{prompt}");
    let mut line = String::new();
    std::io::stdin().read_line(&mut line)?;
    let line = line.trim_end_matches(['\r', '\n']).to_string();
    if line.is_empty() {
        bail!("empty password");
    }
    Ok(line)
}
