// SPDX-License-Identifier: Apache-2.0

//! Requester flow for setting a password at a site.

use pwreuse_core::psmt::{build_query, decode_result, QueryConfig, RequesterSession};
use pwreuse_core::similarity::build_similar_set;
use pwreuse_planner::{optimize, LatencyModelF64, PlanError, ReuseCurveF64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use tracing::{info, warn};

use crate::client::DirectoryClient;
use crate::codec::{decode_response, encode_query};
use crate::responder::SharedStore;
use crate::NetError;

/// Post-acceptance dummy runs so an observer cannot tell which run carried
/// the accepted password.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoyPolicy {
    pub enabled: bool,
    pub min_runs: u32,
    pub extra_run_probability: f64,
}

impl Default for DecoyPolicy {
    fn default() -> Self {
        DecoyPolicy {
            enabled: true,
            min_runs: 2,
            extra_run_probability: 0.5,
        }
    }
}

impl DecoyPolicy {
    pub fn disabled() -> Self {
        DecoyPolicy {
            enabled: false,
            ..Self::default()
        }
    }

    /// Total runs to perform after the first one was accepted.
    pub fn total_runs<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        if !self.enabled {
            return 1;
        }
        self.min_runs.max(1) + rng.random_bool(self.extra_run_probability) as u32
    }
}

#[derive(Clone, Debug)]
pub enum PlanChoice {
    Fixed { n: u32, rho: u32 },
    Optimize {
        t_goal: f64,
        model: LatencyModelF64,
        curve: ReuseCurveF64,
    },
}

/// Where to install the accepted password so this site answers later queries.
#[derive(Clone)]
pub struct SiteRegistration {
    pub endpoint: String,
    pub store: SharedStore,
    pub capacity: u32,
}

#[derive(Clone)]
pub struct RequesterConfig {
    pub query: QueryConfig,
    /// Honeywords per account, used for planning and for the local set.
    pub d: u32,
    pub plan: PlanChoice,
    pub decoys: DecoyPolicy,
    /// Extra attempts after a transport failure.
    pub retries: u32,
    pub site: Option<SiteRegistration>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    /// Some queried responder holds a similar password.
    Rejected,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetPasswordReport {
    pub verdict: Verdict,
    pub canonical_id: String,
    pub n: u32,
    pub rho: u32,
    /// Protocol runs performed, decoys included.
    pub runs: u32,
    /// Responses decoded in the first run.
    pub responses: usize,
    pub invalid_responses: usize,
    pub planned_tdr: Option<f64>,
}

pub struct Requester {
    directory: DirectoryClient,
    config: RequesterConfig,
    rng: ChaCha20Rng,
}

struct RunOutcome {
    member: bool,
    responses: usize,
    invalid: usize,
}

impl Requester {
    pub fn new(directory: DirectoryClient, config: RequesterConfig) -> Self {
        Requester {
            directory,
            config,
            rng: ChaCha20Rng::from_os_rng(),
        }
    }

    pub fn directory(&self) -> &DirectoryClient {
        &self.directory
    }

    /// Requests and immediately confirms consent, as a user clicking the
    /// link would. Returns the canonical id.
    pub async fn open_consent(&self, account: &str) -> Result<String, NetError> {
        let (token, canonical) = self.directory.begin_consent(account).await?;
        self.directory.confirm_consent(token).await?;
        Ok(canonical)
    }

    /// Checks `password` against the account's other sites. Requires an open
    /// consent window at the directory.
    pub async fn set_password(&mut self, account: &str, password: &str) -> Result<SetPasswordReport, NetError> {
        let (canonical, r_a) = self.directory.responder_count(account).await?;
        let (n, rho, planned_tdr) = self.plan(r_a);
        let mut report = SetPasswordReport {
            verdict: Verdict::Accepted,
            canonical_id: canonical.clone(),
            n,
            rho,
            runs: 0,
            responses: 0,
            invalid_responses: 0,
            planned_tdr,
        };
        if rho == 0 {
            info!(account = %canonical, "no other sites registered; nothing to check");
        } else {
            let first = self.run(&canonical, password, n, rho).await?;
            report.runs = 1;
            report.responses = first.responses;
            report.invalid_responses = first.invalid;
            if first.member {
                report.verdict = Verdict::Rejected;
                return Ok(report);
            }
            let total = self.config.decoys.total_runs(&mut self.rng);
            while report.runs < total {
                let decoy = decoy_password(&mut self.rng);
                self.run(&canonical, &decoy, n, rho).await?;
                report.runs += 1;
            }
        }
        if let Some(site) = self.config.site.clone() {
            self.install(&canonical, password, &site).await?;
        }
        Ok(report)
    }

    fn plan(&self, r_a: u32) -> (u32, u32, Option<f64>) {
        let d = self.config.d;
        if r_a == 0 {
            return (d + 1, 0, None);
        }
        match &self.config.plan {
            PlanChoice::Fixed { n, rho } => (*n, (*rho).min(r_a), None),
            PlanChoice::Optimize { t_goal, model, curve } => match optimize(*t_goal, r_a, d, model, curve) {
                Ok(p) => (p.n as u32, p.rho, Some(p.tdr)),
                Err(PlanError::Infeasible) | Err(PlanError::NoResponders) => {
                    warn!(t_goal, "no plan meets the goal; querying one responder at the smallest size");
                    (d + 1, 1, None)
                }
                Err(e) => unreachable!("optimize only fails on feasibility: {e}"),
            },
        }
    }

    async fn run(&mut self, account: &str, password: &str, n: u32, rho: u32) -> Result<RunOutcome, NetError> {
        let cfg = self.config.query;
        let mut rng = ChaCha20Rng::from_rng(&mut self.rng);
        let (account_owned, password_owned) = (account.to_string(), password.to_string());
        let (bytes, session) = tokio::task::spawn_blocking(move || {
            let (q, s) = build_query(&cfg, &account_owned, &password_owned, n, None, &mut rng)?;
            Ok::<_, NetError>((encode_query(&q)?, s))
        })
        .await
        .map_err(|_| NetError::Decode("query builder panicked"))??;

        let mut attempt = 0;
        let blobs = loop {
            match self.directory.query(rho, bytes.clone()).await {
                Ok(b) => break b,
                Err(e) if e.is_transport() && attempt < self.config.retries => {
                    attempt += 1;
                    warn!("query attempt {attempt} failed: {e}; retrying");
                }
                Err(e) => return Err(e),
            }
        };
        Ok(decode_all(&session, &blobs))
    }

    async fn install(&mut self, canonical: &str, password: &str, site: &SiteRegistration) -> Result<(), NetError> {
        let (d, cost, cap) = (self.config.d, self.config.query.hash_cost, site.capacity);
        let seed: u64 = self.rng.random();
        let (c, p) = (canonical.to_string(), password.to_string());
        let set = tokio::task::spawn_blocking(move || build_similar_set(&c, &p, d as usize, cap as usize, cost, seed))
            .await
            .map_err(|_| NetError::Decode("set builder panicked"))?
            .map_err(|e| NetError::Psmt(e.into()))?;
        site.store.write().unwrap().insert(set);
        self.directory.register(canonical, &site.endpoint).await?;
        Ok(())
    }
}

fn decode_all(session: &RequesterSession, blobs: &[Vec<u8>]) -> RunOutcome {
    let group = session.public_key().group;
    let mut out = RunOutcome {
        member: false,
        responses: 0,
        invalid: 0,
    };
    for b in blobs {
        let verdict = decode_response(group, b)
            .ok()
            .and_then(|r| decode_result(session, &r).ok());
        match verdict {
            Some(m) => {
                out.responses += 1;
                out.member |= m;
            }
            None => out.invalid += 1,
        }
    }
    if out.invalid > 0 {
        warn!(invalid = out.invalid, "ignored responses that failed to decode");
    }
    out
}

/// 128 random bits, hex encoded.
fn decoy_password<R: Rng + ?Sized>(rng: &mut R) -> String {
    let bytes: [u8; 16] = rng.random();
    hex::encode(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoy_runs_are_two_or_three() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let p = DecoyPolicy::default();
        let runs: Vec<u32> = (0..1000).map(|_| p.total_runs(&mut rng)).collect();
        assert!(runs.iter().all(|r| (2..=3).contains(r)));
        let threes = runs.iter().filter(|&&r| r == 3).count();
        assert!((400..600).contains(&threes), "{threes}");
        assert_eq!(DecoyPolicy::disabled().total_runs(&mut rng), 1);
    }

    #[test]
    fn decoy_passwords_are_fresh() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let a = decoy_password(&mut rng);
        assert_eq!(a.len(), 32);
        assert_ne!(a, decoy_password(&mut rng));
    }
}
