// SPDX-License-Identifier: Apache-2.0

//! Consent gate. A token stands in for the confirmation link mailed to the
//! user; confirming it opens a short window in which queries for the
//! account are forwarded.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use pwreuse_net::codec::ConsentToken;
use rand::Rng;

use crate::DirectoryError;

pub const DEFAULT_TOKEN_TTL: Duration = Duration::from_secs(600);
pub const DEFAULT_WINDOW: Duration = Duration::from_secs(60);

/// Monotonic time since an arbitrary origin.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
}

pub struct SystemClock(Instant);

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock(Instant::now())
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.0.elapsed()
    }
}

/// Clock that only moves when told to.
#[derive(Default)]
pub struct ManualClock(Mutex<Duration>);

impl ManualClock {
    pub fn advance(&self, by: Duration) {
        *self.0.lock().unwrap() += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.0.lock().unwrap()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsentState {
    pub token: ConsentToken,
    pub account: String,
    pub expires_at: Duration,
    pub window: Duration,
}

#[derive(Clone, Copy, Debug)]
struct OpenWindow {
    until: Duration,
    epoch: u64,
}

#[derive(Debug)]
pub struct ConsentManager {
    ttl: Duration,
    window: Duration,
    pending: HashMap<ConsentToken, ConsentState>,
    open: HashMap<String, OpenWindow>,
    next_epoch: u64,
}

impl ConsentManager {
    pub fn new(ttl: Duration, window: Duration) -> Self {
        ConsentManager {
            ttl,
            window,
            pending: HashMap::new(),
            open: HashMap::new(),
            next_epoch: 1,
        }
    }

    pub fn window(&self) -> Duration {
        self.window
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    pub fn begin<R: Rng + ?Sized>(&mut self, account: &str, now: Duration, rng: &mut R) -> ConsentState {
        self.pending.retain(|_, s| s.expires_at > now);
        let state = ConsentState {
            token: rng.random(),
            account: account.to_string(),
            expires_at: now + self.ttl,
            window: self.window,
        };
        self.pending.insert(state.token, state.clone());
        state
    }

    /// Opens (or extends) the account's window. Each token works once.
    pub fn confirm(&mut self, token: &ConsentToken, now: Duration) -> Result<Duration, DirectoryError> {
        let state = self.pending.remove(token).ok_or(DirectoryError::UnknownToken)?;
        if now >= state.expires_at {
            return Err(DirectoryError::ExpiredToken);
        }
        let until = now + self.window;
        match self.open.get_mut(&state.account) {
            // a reconfirmation inside a live window keeps its epoch
            Some(w) if w.until > now => w.until = until,
            _ => {
                let epoch = self.next_epoch;
                self.next_epoch += 1;
                self.open.insert(state.account, OpenWindow { until, epoch });
            }
        }
        Ok(self.window)
    }

    /// The epoch of the account's open window, if any.
    pub fn open_epoch(&self, account: &str, now: Duration) -> Option<u64> {
        self.open.get(account).filter(|w| now < w.until).map(|w| w.epoch)
    }
}
