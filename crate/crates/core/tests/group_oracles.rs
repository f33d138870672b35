// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use pwreuse_core::group::{
    precompute_pairs, Ciphertext, Group, GroupElement, GroupError, KeyPair, PairPool,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const R: u32 = 101;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn t101() -> Group {
    Group::test(R as u64).unwrap()
}

fn res(v: u32) -> GroupElement {
    GroupElement::Residue(v % R)
}

fn val(e: &GroupElement) -> u32 {
    match e {
        GroupElement::Residue(v) => *v,
        _ => panic!("not a residue"),
    }
}

/// Upper-tail p-value of Pearson's statistic against a uniform expectation.
fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn test_group_key_generation_matches_definition() {
    let g = t101();
    let kp = KeyPair::generate(g, &mut rng(1));
    let u = kp.sk.scalar().as_uint().low_u64() as u32;
    assert_eq!(kp.pk.key, res(u));
    assert_eq!(g.generator(), res(1));
}

#[test]
fn p192_public_keys_lie_on_the_curve() {
    let mut r = rng(2);
    for _ in 0..20 {
        let kp = KeyPair::generate(Group::P192, &mut r);
        let (x, y) = Group::P192.point_coordinates(&kp.pk.key).unwrap();
        assert_eq!(Group::P192.curve_equation_holds(&x, &y), Some(true));
    }
}

#[test]
fn independent_keys_do_not_collide() {
    let mut r = rng(3);
    let mut seen = HashSet::new();
    for _ in 0..10_000 {
        let kp = KeyPair::generate(Group::P160, &mut r);
        assert!(seen.insert(*kp.sk.scalar().as_uint()));
    }
}

#[test]
fn encryption_outputs_enumerate_the_class() {
    // C(m) = {(x, m + u x) : x in Z_r}; every choice of randomness lands in it
    let g = t101();
    let u = 37u32;
    let kp = KeyPair::from_secret(g, g.scalar_from_u64(u as u64));
    for m in [0u32, 1, 50, 100] {
        let class: HashSet<(u32, u32)> = (0..R).map(|x| (x, (m + u * x) % R)).collect();
        let produced: HashSet<(u32, u32)> = (0..R)
            .map(|x| {
                let c = kp.pk.encrypt_with(&res(m), &g.scalar_from_u64(x as u64));
                (val(&c.ephemeral), val(&c.body))
            })
            .collect();
        assert_eq!(produced, class);
    }
}

#[test]
fn decryption_agrees_with_discrete_log_oracle() {
    let g = t101();
    let u = 58u32;
    let kp = KeyPair::from_secret(g, g.scalar_from_u64(u as u64));
    for xv in 0..R {
        // brute-force discrete log of X with respect to the generator 1
        let x = (0..R).find(|&e| (e % R) == xv).unwrap();
        let shared = (u * x) % R;
        for yv in 0..R {
            let expected = (yv + R - shared) % R;
            let c = Ciphertext {
                ephemeral: res(xv),
                body: res(yv),
            };
            assert_eq!(kp.sk.decrypt(&c), Some(res(expected)));
        }
    }
}

#[test]
fn homomorphism_is_exhaustive_on_test_group() {
    let g = t101();
    let mut r = rng(4);
    let kp = KeyPair::generate(g, &mut r);
    for m1 in 0..R {
        for m2 in 0..R {
            let a = kp.pk.encrypt(&res(m1), &mut r).unwrap();
            let b = kp.pk.encrypt(&res(m2), &mut r).unwrap();
            let c = kp.pk.hmul(&a, &b, &mut r).unwrap();
            assert_eq!(kp.sk.decrypt(&c), Some(res(m1 + m2)));
        }
    }
}

#[test]
fn homomorphism_on_every_curve() {
    let mut r = rng(5);
    for g in Group::ALL_CURVES {
        let kp = KeyPair::generate(g, &mut r);
        for _ in 0..1000 {
            let (m1, m2) = (g.random_element(&mut r), g.random_element(&mut r));
            let a = kp.pk.encrypt(&m1, &mut r).unwrap();
            let b = kp.pk.encrypt(&m2, &mut r).unwrap();
            let c = kp.pk.hmul(&a, &b, &mut r).unwrap();
            assert_eq!(kp.sk.decrypt(&c), Some(g.op(&m1, &m2)), "{g}");
        }
    }
}

#[test]
fn hmul_output_is_uniform_in_its_class() {
    let g = t101();
    let mut r = rng(6);
    let kp = KeyPair::generate(g, &mut r);
    let u = kp.sk.scalar().as_uint().low_u64() as u32;
    let a = kp.pk.encrypt(&res(20), &mut r).unwrap();
    let b = kp.pk.encrypt(&res(30), &mut r).unwrap();
    let mut counts = vec![0u64; R as usize];
    for _ in 0..10_000 {
        let c = kp.pk.hmul(&a, &b, &mut r).unwrap();
        let (x, y) = (val(&c.ephemeral), val(&c.body));
        assert_eq!((y + R - (u * x) % R) % R, 50, "left the product class");
        counts[x as usize] += 1;
    }
    let p = chi_square_uniform(&counts);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn hmul_rejects_invalid_input() {
    let g = t101();
    let mut r = rng(7);
    let kp = KeyPair::generate(g, &mut r);
    let a = kp.pk.encrypt(&res(1), &mut r).unwrap();
    let bad = Ciphertext {
        ephemeral: res(1),
        body: GroupElement::Residue(R + 3),
    };
    assert_eq!(kp.pk.hmul(&a, &bad, &mut r), Err(GroupError::InvalidCiphertext));
    assert_eq!(kp.pk.hexp(&bad, &g.scalar_from_u64(2), &mut r), Err(GroupError::InvalidCiphertext));
}

#[test]
fn hexp_examples() {
    let g = t101();
    let mut r = rng(8);
    let kp = KeyPair::generate(g, &mut r);
    let c = kp.pk.encrypt(&res(2), &mut r).unwrap();
    let z = kp.pk.hexp(&c, &g.scalar_from_u64(3), &mut r).unwrap();
    assert_eq!(kp.sk.decrypt(&z), Some(res(6)));
    for e in [0u64, 1, 17, 100] {
        let one = kp.pk.encrypt_identity(&mut r);
        let z = kp.pk.hexp(&one, &g.scalar_from_u64(e), &mut r).unwrap();
        assert_eq!(kp.sk.decrypt(&z), Some(g.identity()));
    }
    for g in Group::ALL_CURVES {
        let kp = KeyPair::generate(g, &mut r);
        let m = g.random_element(&mut r);
        let c = kp.pk.encrypt(&m, &mut r).unwrap();
        let z = kp.pk.hexp(&c, &g.scalar_from_u64(1), &mut r).unwrap();
        assert_eq!(kp.sk.decrypt(&z), Some(m));
        let one = kp.pk.encrypt_identity(&mut r);
        let s = g.random_scalar(&mut r);
        assert_eq!(kp.sk.decrypt(&kp.pk.hexp(&one, &s, &mut r).unwrap()), Some(g.identity()));
    }
}

#[test]
fn random_element_is_uniform() {
    let g = t101();
    let mut r = rng(9);
    let mut counts = vec![0u64; R as usize];
    for _ in 0..100_000 {
        let e = g.random_element(&mut r);
        assert!(g.contains(&e));
        counts[val(&e) as usize] += 1;
    }
    let p = chi_square_uniform(&counts);
    assert!(p > 0.001, "p = {p}");
    let identity_rate = counts[0] as f64 / 100_000.0;
    assert!((identity_rate - 1.0 / R as f64).abs() < 0.003);
}

#[test]
fn ciphertext_marginals_do_not_depend_on_plaintext() {
    // over all x, each component of Enc(m) takes every value exactly once
    let g = t101();
    let kp = KeyPair::from_secret(g, g.scalar_from_u64(13));
    for m in [0u32, 1, 77] {
        let mut xs = vec![0u32; R as usize];
        let mut ys = vec![0u32; R as usize];
        for x in 0..R {
            let c = kp.pk.encrypt_with(&res(m), &g.scalar_from_u64(x as u64));
            xs[val(&c.ephemeral) as usize] += 1;
            ys[val(&c.body) as usize] += 1;
        }
        assert!(xs.iter().all(|&n| n == 1));
        assert!(ys.iter().all(|&n| n == 1));
    }
}

#[test]
fn validation_matches_decryptability() {
    let mut r = rng(10);
    for g in Group::ALL_CURVES {
        let kp = KeyPair::generate(g, &mut r);
        let c = kp.pk.encrypt_identity(&mut r);
        assert!(kp.pk.validate(&c));
        assert_eq!(kp.sk.decrypt(&c), Some(g.identity()));

        let (x, y) = g.point_coordinates(&c.body).unwrap();
        for byte in 0..y.len() {
            let mut y2 = y.clone();
            y2[byte] ^= 0x01;
            let Ok(off) = g.point_from_coordinates(&x, &y2) else {
                continue;
            };
            assert_eq!(g.curve_equation_holds(&x, &y2), Some(false));
            let bad = Ciphertext {
                ephemeral: c.ephemeral,
                body: off,
            };
            assert!(!kp.pk.validate(&bad));
            assert_eq!(kp.sk.decrypt(&bad), None);
        }

        let inf = Ciphertext {
            ephemeral: g.identity(),
            body: g.identity(),
        };
        assert!(kp.pk.validate(&inf));
        assert_eq!(kp.sk.decrypt(&inf), Some(g.identity()));
    }
}

#[test]
fn compression_roundtrips() {
    let mut r = rng(11);
    for g in Group::ALL_CURVES {
        for _ in 0..10_000 {
            let e = g.random_element(&mut r);
            let bytes = g.compress(&e).unwrap();
            assert_eq!(bytes.len(), g.field_len() + 1);
            assert_eq!(g.decompress(&bytes).unwrap(), e);
        }
        let inf = g.compress(&g.identity()).unwrap();
        assert_eq!(g.decompress(&inf).unwrap(), g.identity());
    }
}

/// x with x^3 - 3x + b a non-residue: try small x until lifting fails, and
/// confirm the failure with an independent Euler-criterion check.
#[test]
fn decompress_rejects_x_without_a_point() {
    for g in Group::ALL_CURVES {
        let mut found = false;
        for x in 1u64..200 {
            let mut bytes = vec![0x02];
            bytes.extend(std::iter::repeat(0u8).take(g.field_len() - 8));
            bytes.extend(x.to_be_bytes());
            if matches!(g.decompress(&bytes), Err(GroupError::NoCurvePoint)) {
                assert!(!euler_residue(g, x), "{g}: x = {x}");
                found = true;
                break;
            } else {
                assert!(euler_residue(g, x), "{g}: x = {x}");
            }
        }
        assert!(found, "{g}");
    }
}

/// Euler's criterion with schoolbook big-integer arithmetic, independent of
/// the library's Montgomery field.
fn euler_residue(g: Group, x: u64) -> bool {
    let (p, b) = match g {
        Group::P160 => (
            "ffffffffffffffffffffffffffffffff7fffffff",
            "1c97befc54bd7a8b65acf89f81d4d4adc565fa45",
        ),
        Group::P192 => (
            "fffffffffffffffffffffffffffffffeffffffffffffffff",
            "64210519e59c80e70fa7e9ab72243049feb8deecc146b9b1",
        ),
        Group::P224 => (
            "ffffffffffffffffffffffffffffffff000000000000000000000001",
            "b4050a850c04b3abf54132565044b0b7d7bfd8ba270b39432355ffb4",
        ),
        Group::P256 => (
            "ffffffff00000001000000000000000000000000ffffffffffffffffffffffff",
            "5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b",
        ),
        Group::Test(_) => unreachable!(),
    };
    let p = Big::from_hex(p);
    let b = Big::from_hex(b);
    let x = Big::from_u64(x);
    let x3 = x.mul(&x).mul(&x);
    let three_x = x.mul(&Big::from_u64(3));
    // x^3 + b + (p - 3x) keeps everything non-negative
    let rhs = x3.add(&b).add(&p.sub(&three_x.rem(&p))).rem(&p);
    if rhs.is_zero() {
        return true;
    }
    let e = p.sub(&Big::from_u64(1)).half();
    rhs.pow_mod(&e, &p) == Big::from_u64(1)
}

/// Minimal arbitrary-precision unsigned integer (32-bit limbs, little endian).
#[derive(Clone, Debug, PartialEq, Eq)]
struct Big(Vec<u32>);

impl Big {
    fn from_u64(v: u64) -> Self {
        Big(vec![v as u32, (v >> 32) as u32]).norm()
    }

    fn from_hex(s: &str) -> Self {
        let mut limbs = Vec::new();
        let bytes = s.as_bytes();
        let mut end = bytes.len();
        while end > 0 {
            let start = end.saturating_sub(8);
            limbs.push(u32::from_str_radix(std::str::from_utf8(&bytes[start..end]).unwrap(), 16).unwrap());
            end = start;
        }
        Big(limbs).norm()
    }

    fn norm(mut self) -> Self {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&self, o: &Big) -> Big {
        let n = self.0.len().max(o.0.len());
        let mut out = Vec::with_capacity(n + 1);
        let mut carry = 0u64;
        for i in 0..n {
            let s = *self.0.get(i).unwrap_or(&0) as u64 + *o.0.get(i).unwrap_or(&0) as u64 + carry;
            out.push(s as u32);
            carry = s >> 32;
        }
        out.push(carry as u32);
        Big(out).norm()
    }

    fn sub(&self, o: &Big) -> Big {
        let mut out = Vec::with_capacity(self.0.len());
        let mut borrow = 0i64;
        for i in 0..self.0.len() {
            let mut d = self.0[i] as i64 - *o.0.get(i).unwrap_or(&0) as i64 - borrow;
            borrow = 0;
            if d < 0 {
                d += 1 << 32;
                borrow = 1;
            }
            out.push(d as u32);
        }
        assert_eq!(borrow, 0, "negative result");
        Big(out).norm()
    }

    fn mul(&self, o: &Big) -> Big {
        let mut out = vec![0u64; self.0.len() + o.0.len() + 1];
        for (i, &a) in self.0.iter().enumerate() {
            let mut carry = 0u64;
            for (j, &b) in o.0.iter().enumerate() {
                let t = out[i + j] + a as u64 * b as u64 + carry;
                out[i + j] = t & 0xffff_ffff;
                carry = t >> 32;
            }
            out[i + o.0.len()] += carry;
        }
        Big(out.into_iter().map(|v| v as u32).collect()).norm()
    }

    fn bits(&self) -> usize {
        match self.0.last() {
            None => 0,
            Some(top) => (self.0.len() - 1) * 32 + 32 - top.leading_zeros() as usize,
        }
    }

    fn bit(&self, i: usize) -> bool {
        self.0.get(i / 32).is_some_and(|l| (l >> (i % 32)) & 1 == 1)
    }

    fn cmp_big(&self, o: &Big) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&o.0.len())
            .then_with(|| self.0.iter().rev().cmp(o.0.iter().rev()))
    }

    fn shl1_or(&self, bit: bool) -> Big {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        let mut carry = bit as u32;
        for &l in &self.0 {
            out.push((l << 1) | carry);
            carry = l >> 31;
        }
        out.push(carry);
        Big(out).norm()
    }

    fn rem(&self, m: &Big) -> Big {
        let mut r = Big(vec![]);
        for i in (0..self.bits()).rev() {
            r = r.shl1_or(self.bit(i));
            if r.cmp_big(m) != std::cmp::Ordering::Less {
                r = r.sub(m);
            }
        }
        r
    }

    fn half(&self) -> Big {
        let mut out = self.0.clone();
        for i in 0..out.len() {
            out[i] >>= 1;
            if i + 1 < self.0.len() {
                out[i] |= self.0[i + 1] << 31;
            }
        }
        Big(out).norm()
    }

    fn pow_mod(&self, e: &Big, m: &Big) -> Big {
        let mut acc = Big::from_u64(1);
        for i in (0..e.bits()).rev() {
            acc = acc.mul(&acc).rem(m);
            if e.bit(i) {
                acc = acc.mul(self).rem(m);
            }
        }
        acc
    }
}

#[test]
fn precomputed_pairs_are_encryptions_of_one() {
    let mut r = rng(12);
    for g in [Group::P192, t101()] {
        let kp = KeyPair::generate(g, &mut r);
        let pairs = precompute_pairs(&kp.pk, 50, &mut r);
        assert_eq!(pairs.len(), 50);
        for pair in pairs {
            assert!(kp.pk.validate(&pair.as_ciphertext()));
            assert_eq!(kp.sk.decrypt(&pair.as_ciphertext()), Some(g.identity()));
            let m = g.random_element(&mut r);
            assert_eq!(kp.sk.decrypt(&pair.encrypt(&kp.pk, &m)), Some(m));
        }
    }
}

#[test]
fn pool_falls_back_when_empty() {
    let mut r = rng(13);
    let kp = KeyPair::generate(Group::P224, &mut r);
    let pool = PairPool::new(kp.pk, 2);
    assert!(pool.take().is_none());
    let m = Group::P224.random_element(&mut r);
    assert_eq!(kp.sk.decrypt(&pool.encrypt(&m, &mut r)), Some(m));
}

#[test]
fn ciphertext_wire_roundtrip() {
    let mut r = rng(14);
    for g in Group::ALL_CURVES.into_iter().chain([t101()]) {
        let kp = KeyPair::generate(g, &mut r);
        for _ in 0..50 {
            let c = kp.pk.encrypt(&g.random_element(&mut r), &mut r).unwrap();
            let bytes = c.encode(g).unwrap();
            assert_eq!(bytes.len(), 2 * (g.field_len() + 1));
            assert_eq!(Ciphertext::decode(g, &bytes).unwrap(), c);
        }
    }
}
