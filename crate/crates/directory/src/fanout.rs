// SPDX-License-Identifier: Apache-2.0

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha3::{Digest, Sha3_256};

/// Responders chosen for one account within one consent epoch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanoutPlan {
    pub account: String,
    pub chosen: Vec<String>,
    pub sticky_key: [u8; 32],
}

fn sticky_key(secret: &[u8; 32], account: &str, epoch: u64) -> [u8; 32] {
    let mut h = Sha3_256::new();
    h.update(secret);
    h.update((account.len() as u32).to_be_bytes());
    h.update(account.as_bytes());
    h.update(epoch.to_be_bytes());
    h.finalize().into()
}

/// Picks `rho` of `endpoints` with a shuffle keyed by `(account, epoch)`,
/// so a retry inside the same epoch asks the same responders. Asking for a
/// smaller `rho` gives a prefix of the larger choice.
pub fn sticky_choice(secret: &[u8; 32], account: &str, epoch: u64, endpoints: &[String], rho: usize) -> FanoutPlan {
    let key = sticky_key(secret, account, epoch);
    let mut order: Vec<String> = endpoints.to_vec();
    order.sort();
    order.shuffle(&mut ChaCha20Rng::from_seed(key));
    order.truncate(rho);
    FanoutPlan {
        account: account.to_string(),
        chosen: order,
        sticky_key: key,
    }
}

/// Responses to wait for before returning under an early-return fraction.
pub fn wait_for(rho: usize, fraction: f64) -> usize {
    let f = fraction.clamp(0.0, 1.0);
    ((rho as f64 * f).ceil() as usize).clamp(1.min(rho), rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("10.0.0.{i}:7000")).collect()
    }

    #[test]
    fn stable_within_an_epoch() {
        let s = [7u8; 32];
        let a = sticky_choice(&s, "acct", 1, &eps(5), 3);
        let b = sticky_choice(&s, "acct", 1, &eps(5).into_iter().rev().collect::<Vec<_>>(), 3);
        assert_eq!(a, b);
        assert_eq!(a.chosen.len(), 3);
        let small = sticky_choice(&s, "acct", 1, &eps(5), 2);
        assert_eq!(small.chosen, a.chosen[..2]);
    }

    #[test]
    fn redrawn_across_epochs() {
        let s = [7u8; 32];
        let first = sticky_choice(&s, "acct", 1, &eps(26), 5);
        let differs = (2..20).any(|e| sticky_choice(&s, "acct", e, &eps(26), 5).chosen != first.chosen);
        assert!(differs);
    }

    #[test]
    fn early_return_counts() {
        assert_eq!(wait_for(64, 0.75), 48);
        assert_eq!(wait_for(3, 1.0), 3);
        assert_eq!(wait_for(3, 0.0), 1);
        assert_eq!(wait_for(0, 0.5), 0);
        assert_eq!(wait_for(5, 0.5), 3);
    }
}
