// SPDX-License-Identifier: Apache-2.0

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use pwreuse_core::group::Group;
use pwreuse_net::client::query_responder;
use pwreuse_net::codec::{decode_response, encode_query, peek_account, ErrorCode, Reply, Request};
use pwreuse_net::frame::{read_frame, write_frame};
use pwreuse_net::latency::{LatencyProfile, ProfileKind};
use pwreuse_net::{AuditVerdict, NetError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use tokio::net::{TcpListener, TcpStream};
use tokio::task::{JoinHandle, JoinSet};
use tracing::{debug, info, warn};

use crate::audit::{build_audit_query, judge};
use crate::canonical::canonicalize;
use crate::consent::{Clock, ConsentManager, ConsentState, DEFAULT_TOKEN_TTL, DEFAULT_WINDOW};
use crate::fanout::{sticky_choice, wait_for, FanoutPlan};
use crate::journal::{Event, Journal};
use crate::registry::Registry;
use crate::DirectoryError;

#[derive(Clone, Debug)]
pub struct DirectoryConfig {
    pub profile: ProfileKind,
    pub responder_timeout: Duration,
    /// Return once this fraction of the chosen responders has answered.
    pub early_return_fraction: f64,
    pub token_ttl: Duration,
    pub window: Duration,
    pub state_dir: Option<PathBuf>,
    pub audit_group: Group,
    /// Filter sizing of audit queries, chosen to look like ordinary traffic.
    pub audit_n: u32,
    pub audit_k: u32,
}

impl DirectoryConfig {
    pub fn for_profile(profile: ProfileKind) -> Self {
        DirectoryConfig {
            profile,
            responder_timeout: LatencyProfile::for_kind(profile).responder_timeout(),
            early_return_fraction: 1.0,
            token_ttl: DEFAULT_TOKEN_TTL,
            window: DEFAULT_WINDOW,
            state_dir: None,
            audit_group: Group::P192,
            audit_n: 5,
            audit_k: pwreuse_core::bloom::DEFAULT_K,
        }
    }
}

impl Default for DirectoryConfig {
    fn default() -> Self {
        Self::for_profile(ProfileKind::Trusted)
    }
}

#[derive(Debug, Default)]
pub struct DirectoryStats {
    /// ③ frames sent to responders, audits included.
    pub forwarded: AtomicU64,
    pub dropped_without_consent: AtomicU64,
    pub timeouts: AtomicU64,
}

struct State {
    registry: Registry,
    consent: ConsentManager,
    journal: Option<Journal>,
}

struct Inner {
    config: DirectoryConfig,
    clock: Arc<dyn Clock>,
    secret: [u8; 32],
    state: Mutex<State>,
    stats: DirectoryStats,
}

#[derive(Clone)]
pub struct Directory {
    inner: Arc<Inner>,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn check_endpoint(endpoint: &str) -> Result<(), DirectoryError> {
    if endpoint.is_empty() || endpoint.len() > 255 || endpoint.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(DirectoryError::MalformedEndpoint(endpoint.to_string()));
    }
    Ok(())
}

impl Directory {
    pub fn new(config: DirectoryConfig, clock: Arc<dyn Clock>) -> Result<Self, DirectoryError> {
        let (journal, registry) = match &config.state_dir {
            Some(dir) => {
                let (j, r) = Journal::open(dir)?;
                (Some(j), r)
            }
            None => (None, Registry::default()),
        };
        let state = State {
            registry,
            consent: ConsentManager::new(config.token_ttl, config.window),
            journal,
        };
        Ok(Directory {
            inner: Arc::new(Inner {
                secret: rand::rng().random(),
                config,
                clock,
                state: Mutex::new(state),
                stats: DirectoryStats::default(),
            }),
        })
    }

    pub fn config(&self) -> &DirectoryConfig {
        &self.inner.config
    }

    pub fn stats(&self) -> &DirectoryStats {
        &self.inner.stats
    }

    pub fn registry(&self) -> Registry {
        self.inner.state.lock().unwrap().registry.clone()
    }

    fn record(&self, state: &mut State, event: Event) -> Result<(), DirectoryError> {
        if let Some(j) = state.journal.as_mut() {
            j.append(&event)?;
        }
        event.apply(&mut state.registry);
        Ok(())
    }

    /// Returns true (a warning) when the endpoint was already registered.
    pub fn register(&self, email: &str, endpoint: &str) -> Result<bool, DirectoryError> {
        let account = canonicalize(email)?;
        check_endpoint(endpoint)?;
        let mut st = self.inner.state.lock().unwrap();
        let present = st.registry.record(&account).is_some_and(|r| r.endpoints.contains(endpoint));
        if !present {
            let event = Event::Register {
                account,
                endpoint: endpoint.to_string(),
                at: unix_now(),
            };
            self.record(&mut st, event)?;
        }
        Ok(present)
    }

    /// Returns true (a warning) when there was nothing to remove.
    pub fn deregister(&self, email: &str, endpoint: &str) -> Result<bool, DirectoryError> {
        let account = canonicalize(email)?;
        let mut st = self.inner.state.lock().unwrap();
        let present = st.registry.record(&account).is_some_and(|r| r.endpoints.contains(endpoint));
        if present {
            let event = Event::Deregister {
                account,
                endpoint: endpoint.to_string(),
                at: unix_now(),
            };
            self.record(&mut st, event)?;
        } else {
            warn!(%endpoint, "deregister of an absent endpoint");
        }
        Ok(!present)
    }

    pub fn begin_consent(&self, email: &str) -> Result<ConsentState, DirectoryError> {
        let account = canonicalize(email)?;
        let now = self.inner.clock.now();
        let mut st = self.inner.state.lock().unwrap();
        Ok(st.consent.begin(&account, now, &mut rand::rng()))
    }

    pub fn confirm_consent(&self, token: &[u8; 16]) -> Result<Duration, DirectoryError> {
        let now = self.inner.clock.now();
        self.inner.state.lock().unwrap().consent.confirm(token, now)
    }

    /// `(canonical id, R_a)`.
    pub fn responder_count(&self, email: &str) -> Result<(String, u32), DirectoryError> {
        let account = canonicalize(email)?;
        let n = self.inner.state.lock().unwrap().registry.count(&account);
        Ok((account, n))
    }

    /// The responders a query for `email` would go to right now.
    pub fn plan(&self, email: &str, rho: u32) -> Result<FanoutPlan, DirectoryError> {
        let account = canonicalize(email)?;
        let now = self.inner.clock.now();
        let st = self.inner.state.lock().unwrap();
        let Some(epoch) = st.consent.open_epoch(&account, now) else {
            self.inner.stats.dropped_without_consent.fetch_add(1, Ordering::Relaxed);
            return Err(DirectoryError::ConsentRequired);
        };
        let endpoints = st.registry.active_endpoints(&account);
        if (endpoints.len() as u32) < rho || rho == 0 {
            return Err(DirectoryError::InsufficientResponders {
                have: endpoints.len() as u32,
                want: rho,
            });
        }
        Ok(sticky_choice(&self.inner.secret, &account, epoch, &endpoints, rho as usize))
    }

    /// Forwards an encoded ③ and returns the ④ payloads in random order.
    pub async fn fanout(&self, query: Vec<u8>, rho: u32) -> Result<Vec<Vec<u8>>, DirectoryError> {
        let account = peek_account(&query).map_err(DirectoryError::Net)?;
        let plan = self.plan(&account, rho)?;
        let need = wait_for(plan.chosen.len(), self.inner.config.early_return_fraction);
        let query = Arc::new(query);
        let limit = self.inner.config.responder_timeout;
        let mut tasks = JoinSet::new();
        for ep in plan.chosen {
            let q = query.clone();
            self.inner.stats.forwarded.fetch_add(1, Ordering::Relaxed);
            tasks.spawn(async move { (query_responder(&ep, &q, limit).await, ep) });
        }
        let mut replies = Vec::with_capacity(need);
        while replies.len() < need {
            let Some(joined) = tasks.join_next().await else { break };
            match joined {
                Ok((Ok(blob), _)) => replies.push(blob),
                Ok((Err(e), ep)) => {
                    if matches!(e, NetError::Timeout) {
                        self.inner.stats.timeouts.fetch_add(1, Ordering::Relaxed);
                    }
                    debug!(%ep, "no usable reply: {e}");
                }
                Err(e) => warn!("responder task failed: {e}"),
            }
        }
        // remaining requests are abandoned when the set drops
        tasks.abort_all();
        replies.shuffle(&mut rand::rng());
        Ok(replies)
    }

    pub async fn audit(&self, endpoint: &str) -> AuditVerdict {
        let cfg = &self.inner.config;
        let account = {
            let st = self.inner.state.lock().unwrap();
            st.registry.account_for(endpoint).unwrap_or("audit@directory.invalid").to_string()
        };
        let (group, n, k) = (cfg.audit_group, cfg.audit_n, cfg.audit_k);
        let mut rng = ChaCha20Rng::from_rng(&mut rand::rng());
        let built = tokio::task::spawn_blocking(move || {
            let (q, kp) = build_audit_query(group, &account, n, k, &mut rng);
            encode_query(&q).map(|bytes| (bytes, kp))
        })
        .await;
        let Ok(Ok((bytes, keypair))) = built else {
            return AuditVerdict::Inconclusive;
        };
        self.inner.stats.forwarded.fetch_add(1, Ordering::Relaxed);
        let verdict = match query_responder(endpoint, &bytes, cfg.responder_timeout).await {
            Ok(blob) => match decode_response(group, &blob) {
                Ok(r) => judge(&keypair, &r),
                Err(_) => AuditVerdict::Inconclusive,
            },
            Err(_) => AuditVerdict::Inconclusive,
        };
        if verdict == AuditVerdict::Lying {
            info!(%endpoint, "responder failed an audit; excluding it");
            let mut st = self.inner.state.lock().unwrap();
            if !st.registry.is_flagged(endpoint) {
                let event = Event::Flag {
                    endpoint: endpoint.to_string(),
                    at: unix_now(),
                };
                if let Err(e) = self.record(&mut st, event) {
                    warn!("could not journal flag: {e}");
                }
            }
        }
        verdict
    }

    /// Persists a snapshot when a state directory is configured.
    pub fn snapshot(&self) -> Result<(), DirectoryError> {
        let mut st = self.inner.state.lock().unwrap();
        let State { registry, journal, .. } = &mut *st;
        if let Some(j) = journal.as_mut() {
            j.snapshot(registry)?;
        }
        Ok(())
    }

    pub async fn handle(&self, req: Request) -> Reply {
        let result = match req {
            Request::Register { account, endpoint } => self.register(&account, &endpoint).map(|warning| Reply::Ack { warning }),
            Request::Deregister { account, endpoint } => {
                self.deregister(&account, &endpoint).map(|warning| Reply::Ack { warning })
            }
            Request::BeginConsent { account } => self.begin_consent(&account).map(|s| Reply::Consent {
                token: s.token,
                canonical_id: s.account,
                ttl_secs: self.inner.config.token_ttl.as_secs() as u32,
            }),
            Request::ConfirmConsent { token } => self.confirm_consent(&token).map(|w| Reply::Window {
                seconds: w.as_secs() as u32,
            }),
            Request::Query { rho, query } => self.fanout(query, rho).await.map(Reply::Responses),
            Request::Audit { endpoint } => Ok(Reply::Audit(self.audit(&endpoint).await)),
            Request::ResponderCount { account } => self
                .responder_count(&account)
                .map(|(canonical_id, count)| Reply::Count { canonical_id, count }),
        };
        result.unwrap_or_else(|e| Reply::Error {
            code: e.code(),
            message: e.to_string(),
        })
    }
}

pub struct DirectoryHandle {
    addr: SocketAddr,
    directory: Directory,
    task: JoinHandle<()>,
}

impl DirectoryHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn directory(&self) -> &Directory {
        &self.directory
    }

    /// Stops accepting connections and writes a snapshot.
    pub fn shutdown(self) -> Result<(), DirectoryError> {
        self.task.abort();
        self.directory.snapshot()
    }
}

impl Drop for DirectoryHandle {
    fn drop(&mut self) {
        self.task.abort();
    }
}

pub async fn spawn_directory(listen: &str, directory: Directory) -> Result<DirectoryHandle, DirectoryError> {
    let listener = TcpListener::bind(listen).await?;
    let addr = listener.local_addr()?;
    let d = directory.clone();
    let task = tokio::spawn(async move {
        loop {
            match listener.accept().await {
                Ok((stream, peer)) => {
                    let d = d.clone();
                    tokio::spawn(async move {
                        if let Err(e) = connection(&d, stream).await {
                            debug!("client {peer}: {e}");
                        }
                    });
                }
                Err(e) => warn!("accept failed: {e}"),
            }
        }
    });
    Ok(DirectoryHandle { addr, directory, task })
}

async fn connection(d: &Directory, mut stream: TcpStream) -> Result<(), NetError> {
    stream.set_nodelay(true)?;
    loop {
        let frame = match read_frame(&mut stream).await {
            Ok(f) => f,
            Err(NetError::Io(e)) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(()),
            Err(e) => {
                let reply = Reply::Error {
                    code: ErrorCode::Malformed,
                    message: e.to_string(),
                };
                let _ = write_frame(&mut stream, &reply.to_frame(0)).await;
                return Err(e);
            }
        };
        let reply = match Request::from_frame(&frame) {
            Ok(req) => d.handle(req).await,
            Err(e) => Reply::Error {
                code: ErrorCode::Malformed,
                message: e.to_string(),
            },
        };
        write_frame(&mut stream, &reply.to_frame(frame.opcode)).await?;
    }
}
