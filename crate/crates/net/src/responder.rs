// SPDX-License-Identifier: Apache-2.0

//! Responder service: answers each ③ with one ④.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use pwreuse_core::psmt::{respond, ResponseMessage};
use pwreuse_core::similarity::{SimilarSet, SimilarStore};
use tokio::net::{TcpListener, TcpStream};
use tokio::task::JoinHandle;
use tracing::{debug, warn};

use crate::codec::{decode_query, encode_response, responder_error_frame, ErrorCode};
use crate::frame::{opcode, read_frame, write_frame, Frame};
use crate::latency::{Direction, LatencyInjector, LatencyProfile};
use crate::NetError;

/// Similar-password sets shared between the service and its owner, which
/// adds a set when a password is accepted at this site.
pub type SharedStore = Arc<RwLock<SimilarStore>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Behavior {
    Honest,
    /// Returns a fresh encryption of the identity whatever the query.
    AlwaysMember,
}

#[derive(Clone, Copy, Debug)]
pub struct ResponderConfig {
    pub profile: LatencyProfile,
    /// Seeds the delay sequence only; cryptographic randomness is from the OS.
    pub latency_seed: u64,
    pub behavior: Behavior,
}

impl Default for ResponderConfig {
    fn default() -> Self {
        ResponderConfig {
            profile: LatencyProfile::trusted(),
            latency_seed: 0,
            behavior: Behavior::Honest,
        }
    }
}

#[derive(Debug, Default)]
pub struct ResponderStats {
    pub queries: AtomicU64,
    pub results: AtomicU64,
    pub errors: AtomicU64,
}

pub struct ResponderHandle {
    addr: SocketAddr,
    stats: Arc<ResponderStats>,
    task: JoinHandle<()>,
}

impl ResponderHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn endpoint(&self) -> String {
        self.addr.to_string()
    }

    pub fn stats(&self) -> &ResponderStats {
        &self.stats
    }

    pub fn shutdown(&self) {
        self.task.abort();
    }
}

impl Drop for ResponderHandle {
    fn drop(&mut self) {
        self.task.abort();
    }
}

/// Binds `listen` and serves until the handle is dropped.
pub async fn spawn_responder(
    listen: &str,
    store: SharedStore,
    config: ResponderConfig,
) -> Result<ResponderHandle, NetError> {
    let listener = TcpListener::bind(listen).await?;
    let addr = listener.local_addr()?;
    let stats = Arc::new(ResponderStats::default());
    let task = tokio::spawn(serve(listener, store, config, stats.clone()));
    Ok(ResponderHandle { addr, stats, task })
}

pub async fn serve(listener: TcpListener, store: SharedStore, config: ResponderConfig, stats: Arc<ResponderStats>) {
    let latency = Arc::new(LatencyInjector::new(config.profile, config.latency_seed));
    loop {
        let (stream, peer) = match listener.accept().await {
            Ok(x) => x,
            Err(e) => {
                warn!("accept failed: {e}");
                continue;
            }
        };
        let ctx = Ctx {
            store: store.clone(),
            latency: latency.clone(),
            behavior: config.behavior,
            stats: stats.clone(),
        };
        tokio::spawn(async move {
            if let Err(e) = ctx.connection(stream).await {
                debug!("connection from {peer} closed: {e}");
            }
        });
    }
}

struct Ctx {
    store: SharedStore,
    latency: Arc<LatencyInjector>,
    behavior: Behavior,
    stats: Arc<ResponderStats>,
}

impl Ctx {
    async fn connection(&self, mut stream: TcpStream) -> Result<(), NetError> {
        loop {
            let frame = match read_frame(&mut stream).await {
                Ok(f) => f,
                Err(NetError::Io(e)) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(()),
                Err(e) => {
                    self.stats.errors.fetch_add(1, Ordering::Relaxed);
                    let _ = write_frame(&mut stream, &responder_error_frame(None, ErrorCode::Malformed)).await;
                    return Err(e);
                }
            };
            if frame.opcode != opcode::RESPONDER_QUERY {
                self.stats.errors.fetch_add(1, Ordering::Relaxed);
                write_frame(&mut stream, &responder_error_frame(None, ErrorCode::Malformed)).await?;
                return Err(NetError::UnknownOpcode(frame.opcode));
            }
            self.stats.queries.fetch_add(1, Ordering::Relaxed);
            self.latency.inject(Direction::Outbound).await;
            let reply = self.answer(frame.payload).await;
            self.latency.inject(Direction::Inbound).await;
            if reply.opcode == opcode::RESPONDER_RESULT {
                self.stats.results.fetch_add(1, Ordering::Relaxed);
            } else {
                self.stats.errors.fetch_add(1, Ordering::Relaxed);
            }
            write_frame(&mut stream, &reply).await?;
        }
    }

    async fn answer(&self, payload: Vec<u8>) -> Frame {
        let store = self.store.clone();
        let behavior = self.behavior;
        let work = tokio::task::spawn_blocking(move || {
            let query = decode_query(&payload).map_err(|_| (None, ErrorCode::Malformed))?;
            let group = query.pk.group;
            let mut rng = rand::rng();
            let response = match behavior {
                Behavior::Honest => {
                    let guard = store.read().unwrap();
                    let empty;
                    let set = match guard.get(&query.account_id) {
                        Some(s) => s,
                        None => {
                            empty = SimilarSet::empty(&query.account_id);
                            &empty
                        }
                    };
                    respond(&query, set, &mut rng).map_err(|_| (Some(group), ErrorCode::InvalidCiphertext))?
                }
                Behavior::AlwaysMember => ResponseMessage {
                    result: query.pk.encrypt_identity(&mut rng),
                },
            };
            let bytes = encode_response(group, &response).map_err(|_| (Some(group), ErrorCode::Internal))?;
            Ok::<_, (_, ErrorCode)>(Frame::new(opcode::RESPONDER_RESULT, bytes))
        });
        match work.await {
            Ok(Ok(frame)) => frame,
            Ok(Err((group, code))) => responder_error_frame(group, code),
            Err(_) => responder_error_frame(None, ErrorCode::Internal),
        }
    }
}
