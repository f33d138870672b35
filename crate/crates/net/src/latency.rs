// SPDX-License-Identifier: Apache-2.0

//! Delay injection standing in for the transport between directory and
//! responders. The untrusted profile models a three-relay circuit as three
//! independent lognormal hops; nothing is actually routed.

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, LogNormal};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    Trusted,
    Untrusted,
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::Trusted => "trusted",
            ProfileKind::Untrusted => "untrusted",
        })
    }
}

impl FromStr for ProfileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "trusted" => Ok(ProfileKind::Trusted),
            "untrusted" => Ok(ProfileKind::Untrusted),
            _ => Err(format!("unknown profile {s:?} (expected trusted or untrusted)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Outbound,
    Inbound,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatencyProfile {
    pub kind: ProfileKind,
    pub hops: u32,
    /// Median delay of one hop.
    pub per_hop_median: Duration,
    /// Shape of the per-hop lognormal (σ of the underlying normal).
    pub sigma: f64,
}

impl LatencyProfile {
    /// One LAN hop, a fraction of a millisecond.
    pub fn trusted() -> Self {
        LatencyProfile {
            kind: ProfileKind::Trusted,
            hops: 1,
            per_hop_median: Duration::from_micros(250),
            sigma: 0.3,
        }
    }

    /// Three relay hops with wide-area delays.
    pub fn untrusted() -> Self {
        LatencyProfile {
            kind: ProfileKind::Untrusted,
            hops: 3,
            per_hop_median: Duration::from_millis(12),
            sigma: 0.35,
        }
    }

    /// No delay at all; for benchmarks of pure computation.
    pub fn none() -> Self {
        LatencyProfile {
            kind: ProfileKind::Trusted,
            hops: 0,
            per_hop_median: Duration::ZERO,
            sigma: 0.0,
        }
    }

    pub fn for_kind(kind: ProfileKind) -> Self {
        match kind {
            ProfileKind::Trusted => Self::trusted(),
            ProfileKind::Untrusted => Self::untrusted(),
        }
    }

    /// Per-responder timeout the directory applies under this profile.
    pub fn responder_timeout(&self) -> Duration {
        match self.kind {
            ProfileKind::Trusted => Duration::from_secs(2),
            ProfileKind::Untrusted => Duration::from_secs(8),
        }
    }
}

/// Seeded delay source. Draws are serialized so a fixed seed reproduces the
/// same sequence regardless of which task asks.
pub struct LatencyInjector {
    profile: LatencyProfile,
    hop: Option<LogNormal<f64>>,
    rng: Mutex<ChaCha20Rng>,
}

impl LatencyInjector {
    pub fn new(profile: LatencyProfile, seed: u64) -> Self {
        let hop = (profile.hops > 0 && !profile.per_hop_median.is_zero()).then(|| {
            LogNormal::new(profile.per_hop_median.as_secs_f64().ln(), profile.sigma)
                .expect("finite lognormal parameters")
        });
        LatencyInjector {
            profile,
            hop,
            rng: Mutex::new(ChaCha20Rng::seed_from_u64(seed)),
        }
    }

    pub fn profile(&self) -> &LatencyProfile {
        &self.profile
    }

    /// Total delay over every hop for one traversal.
    pub fn draw(&self, _direction: Direction) -> Duration {
        let Some(hop) = &self.hop else {
            return Duration::ZERO;
        };
        let mut rng = self.rng.lock().unwrap();
        let secs: f64 = (0..self.profile.hops).map(|_| hop.sample(&mut *rng)).sum();
        Duration::from_secs_f64(secs)
    }

    pub async fn inject(&self, direction: Direction) -> Duration {
        let d = self.draw(direction);
        if !d.is_zero() {
            tokio::time::sleep(d).await;
        }
        d
    }
}
