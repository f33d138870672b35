// SPDX-License-Identifier: Apache-2.0

//! Audit queries. Every slot carries a non-identity plaintext, so an honest
//! reply can only decrypt to the identity by chance (probability 1/r); a
//! responder that answers "member" regardless is caught.

use pwreuse_core::bloom::BloomParams;
use pwreuse_core::group::{Group, KeyPair};
use pwreuse_core::psmt::{QueryMessage, ResponseMessage};
use pwreuse_net::AuditVerdict;
use rand::CryptoRng;

/// A ③ indistinguishable in shape from a real one, plus the key to open the reply.
pub fn build_audit_query<R: CryptoRng + ?Sized>(
    group: Group,
    account: &str,
    n: u32,
    k: u32,
    rng: &mut R,
) -> (QueryMessage, KeyPair) {
    let keypair = KeyPair::generate(group, rng);
    let bloom = BloomParams::for_items(n, k, rng);
    let ciphertexts = (0..bloom.length())
        .map(|_| {
            let m = loop {
                let m = group.random_element(rng);
                if !group.is_identity(&m) {
                    break m;
                }
            };
            keypair.pk.encrypt(&m, rng).expect("group element")
        })
        .collect();
    let query = QueryMessage {
        account_id: account.to_string(),
        pk: keypair.pk,
        bloom,
        ciphertexts,
    };
    (query, keypair)
}

/// Lying iff the reply opens to the identity.
pub fn judge(keypair: &KeyPair, response: &ResponseMessage) -> AuditVerdict {
    if !keypair.pk.validate(&response.result) {
        return AuditVerdict::Inconclusive;
    }
    match keypair.sk.decrypt(&response.result) {
        Some(m) if keypair.pk.group.is_identity(&m) => AuditVerdict::Lying,
        Some(_) => AuditVerdict::Honest,
        None => AuditVerdict::Inconclusive,
    }
}
