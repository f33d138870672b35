// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Endpoints registered for one canonical account id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountRecord {
    pub canonical_id: String,
    /// Opaque, possibly per-account pseudonymous, responder addresses.
    pub endpoints: BTreeSet<String>,
    pub created_at: u64,
    pub updated_at: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    records: BTreeMap<String, AccountRecord>,
    /// Endpoints caught lying in an audit.
    flagged: BTreeSet<String>,
}

impl Registry {
    /// Returns false if the endpoint was already present.
    pub fn register(&mut self, account: &str, endpoint: &str, now: u64) -> bool {
        let rec = self.records.entry(account.to_string()).or_insert_with(|| AccountRecord {
            canonical_id: account.to_string(),
            endpoints: BTreeSet::new(),
            created_at: now,
            updated_at: now,
        });
        let added = rec.endpoints.insert(endpoint.to_string());
        if added {
            rec.updated_at = now;
        }
        added
    }

    /// Returns false if there was nothing to remove.
    pub fn deregister(&mut self, account: &str, endpoint: &str, now: u64) -> bool {
        let Some(rec) = self.records.get_mut(account) else {
            return false;
        };
        let removed = rec.endpoints.remove(endpoint);
        if removed {
            rec.updated_at = now;
        }
        if rec.endpoints.is_empty() {
            self.records.remove(account);
        }
        removed
    }

    pub fn record(&self, account: &str) -> Option<&AccountRecord> {
        self.records.get(account)
    }

    /// Endpoints eligible for fan-out, in sorted order.
    pub fn active_endpoints(&self, account: &str) -> Vec<String> {
        self.records
            .get(account)
            .map(|r| r.endpoints.iter().filter(|e| !self.flagged.contains(*e)).cloned().collect())
            .unwrap_or_default()
    }

    /// `R_a`: endpoints that will be queried for this account.
    pub fn count(&self, account: &str) -> u32 {
        self.active_endpoints(account).len() as u32
    }

    pub fn flag(&mut self, endpoint: &str) -> bool {
        self.flagged.insert(endpoint.to_string())
    }

    pub fn is_flagged(&self, endpoint: &str) -> bool {
        self.flagged.contains(endpoint)
    }

    /// Some account the endpoint serves, so an audit looks like real traffic.
    pub fn account_for(&self, endpoint: &str) -> Option<&str> {
        self.records
            .values()
            .find(|r| r.endpoints.contains(endpoint))
            .map(|r| r.canonical_id.as_str())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
