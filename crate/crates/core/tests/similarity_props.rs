// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::time::Instant;

use pwreuse_core::similarity::{
    build_similar_set, generate_honey, generate_similar, similar_candidates, slow_hash, HashCost,
    SimilarStore,
};

const REAL_PASSWORDS: &[&str] = &[
    "monkey1", "Dragon99!", "sunflower", "qwerty123", "Bulldog22", "iloveyou2", "Pumpkin!",
    "soccer10", "letmein", "trustno1", "Baseball7", "shadow", "Summer2024", "hello123",
    "Tigers!!", "jordan23", "charlie", "Maggie12", "whatever!", "football1", "p@ssw0rd",
    "abc123", "Starwars5", "Michelle", "ninja", "Freedom1!", "pepper7", "Rainbow22",
];

/// Two-sample Kolmogorov–Smirnov p-value (asymptotic distribution).
fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let en = (n * m / (n + m)).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    // Q_KS(λ) = 2 Σ (-1)^{k-1} exp(-2 k² λ²)
    let mut sum = 0.0;
    for k in 1..200 {
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

#[test]
fn ks_helper_sanity() {
    let a: Vec<f64> = (0..500).map(|i| (i % 17) as f64).collect();
    let b: Vec<f64> = (0..700).map(|i| (i % 17) as f64).collect();
    assert!(ks_two_sample(&a, &b) > 0.5);
    let c: Vec<f64> = (0..700).map(|i| (i % 17) as f64 + 3.0).collect();
    assert!(ks_two_sample(&a, &c) < 1e-6);
}

#[test]
fn honeyword_derivatives_match_real_lengths() {
    let mut real = Vec::new();
    let mut honey = Vec::new();
    for s in 0..1000u64 {
        let pw = REAL_PASSWORDS[s as usize % REAL_PASSWORDS.len()];
        for c in similar_candidates(pw, 4, 50, s).unwrap() {
            let len = c.text.chars().count() as f64;
            if c.from_real {
                real.push(len);
            } else {
                honey.push(len);
            }
        }
    }
    let p = ks_two_sample(&real, &honey);
    assert!(p > 0.01, "length distributions separable: p = {p}");
}

#[test]
fn honey_composition_policy() {
    for s in 0..1000u64 {
        let pw = REAL_PASSWORDS[s as usize % REAL_PASSWORDS.len()];
        let honey = generate_honey(pw, 4, s);
        assert_eq!(honey.len(), 4);
        let unique: HashSet<&String> = honey.iter().collect();
        assert_eq!(unique.len(), 4);
        for h in &honey {
            assert_ne!(h, pw);
            assert!(h.chars().count() + 2 >= pw.chars().count(), "{h} vs {pw}");
        }
    }
}

#[test]
fn variant_lists_follow_contract() {
    let v = generate_similar("monkey1", 4);
    assert!(v.contains(&"monkey2".to_string()));
    assert!(v.contains(&"Monkey1".to_string()));
    for pw in REAL_PASSWORDS {
        let v = generate_similar(pw, 30);
        assert_eq!(v[0], *pw);
        assert!(v.len() <= 30);
        let unique: HashSet<&String> = v.iter().collect();
        assert_eq!(unique.len(), v.len());
    }
}

#[test]
fn set_sizes_follow_the_seed_budget() {
    let cost = HashCost::insecure_fast();
    let s = build_similar_set("eve@example.com", "monkey1", 4, 25, cost, 1).unwrap();
    assert_eq!(s.per_seed_budget, 5);
    assert_eq!(s.entries.len(), 25);
    let unique: HashSet<_> = s.entries.iter().collect();
    assert_eq!(unique.len(), 25);

    let s = build_similar_set("eve@example.com", "monkey1", 0, 1, cost, 1).unwrap();
    assert_eq!(s.entries, vec![slow_hash("eve@example.com", "monkey1", cost).unwrap()]);

    assert!(build_similar_set("eve@example.com", "monkey1", 4, 4, cost, 1).is_err());
}

#[test]
fn set_membership_by_digest() {
    let cost = HashCost::insecure_fast();
    let s = build_similar_set("eve@example.com", "monkey1", 2, 30, cost, 9).unwrap();
    let variant = slow_hash("eve@example.com", "Monkey1", cost).unwrap();
    let unrelated = slow_hash("eve@example.com", "correct horse battery", cost).unwrap();
    assert!(s.contains(&variant));
    assert!(!s.contains(&unrelated));
    // the salt binds digests to the account
    let elsewhere = slow_hash("mallory@example.com", "Monkey1", cost).unwrap();
    assert!(!s.contains(&elsewhere));
}

#[test]
fn every_seed_is_represented_in_any_round() {
    let c = similar_candidates("Dragon99!", 4, 50, 3).unwrap();
    let first_round: HashSet<usize> = c.iter().take(5).map(|c| c.seed_slot).collect();
    assert_eq!(first_round.len(), 5);
    assert_eq!(c.iter().filter(|c| c.from_real).count(), 10);
}

#[test]
fn default_hash_cost_is_slow() {
    let start = Instant::now();
    slow_hash("frank@example.com", "hunter2", HashCost::default()).unwrap();
    let took = start.elapsed();
    assert!(took.as_millis() >= 50, "default H took {took:?}");
}

#[test]
fn store_roundtrips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.sset");
    let cost = HashCost::insecure_fast();
    let mut store = SimilarStore::new();
    store.insert(build_similar_set("a@x.com", "pw1", 1, 6, cost, 1).unwrap());
    store.insert(build_similar_set("b@x.com", "pw2", 0, 3, cost, 2).unwrap());
    store.save(&path).unwrap();
    let loaded = SimilarStore::load(&path).unwrap();
    assert_eq!(loaded.len(), 2);
    assert_eq!(loaded.get("a@x.com"), store.get("a@x.com"));
    assert_eq!(loaded.get("b@x.com"), store.get("b@x.com"));
}
