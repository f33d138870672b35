// SPDX-License-Identifier: Apache-2.0

//! Prime-order groups used as ElGamal plaintext spaces.
//!
//! Four standardized cofactor-1 curves are supported, plus `Test(r)`: the
//! additive group Z_r with generator 1. The test group is small enough to
//! enumerate and exists so that distributional claims can be checked
//! exhaustively.

mod curve;
mod elgamal;
mod field;
mod precompute;
mod uint;

use std::fmt;
use std::sync::Arc;

use rand::{CryptoRng, Rng};
use thiserror::Error;

pub use curve::AffinePoint;
pub use elgamal::{Ciphertext, Encryptor, KeyPair, PublicKey, SecretKey};
pub use precompute::{precompute_pairs, PairPool, PrecomputedPair};
pub use uint::U256;

use curve::Curve;

/// Largest test-group order that remains practical to enumerate.
pub const MAX_TEST_ORDER: u32 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("test group order {0} is not a prime in [3, 2^20]")]
    InvalidTestOrder(u64),
    #[error("unknown group identifier {0:#04x}")]
    UnknownGroup(u8),
    #[error("value is not an element of {0}")]
    NotAnElement(Group),
    #[error("invalid ciphertext")]
    InvalidCiphertext,
    #[error("malformed element encoding: {0}")]
    Encoding(&'static str),
    #[error("x-coordinate has no point on the curve")]
    NoCurvePoint,
}

/// Z_r under addition. Only constructible with a prime order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TestGroup {
    order: u32,
}

impl TestGroup {
    pub fn order(&self) -> u32 {
        self.order
    }
}

/// Supported plaintext groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    P160,
    P192,
    P224,
    P256,
    Test(TestGroup),
}

impl Default for Group {
    fn default() -> Self {
        Group::P192
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::P160 => write!(f, "P160"),
            Group::P192 => write!(f, "P192"),
            Group::P224 => write!(f, "P224"),
            Group::P256 => write!(f, "P256"),
            Group::Test(t) => write!(f, "TEST({})", t.order),
        }
    }
}

impl std::str::FromStr for Group {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "P160" | "SECP160R1" => Ok(Group::P160),
            "P192" | "SECP192R1" => Ok(Group::P192),
            "P224" | "SECP224R1" => Ok(Group::P224),
            "P256" | "SECP256R1" => Ok(Group::P256),
            other => {
                let inner = other
                    .strip_prefix("TEST(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or(GroupError::Encoding("unrecognized group name"))?;
                let r: u64 = inner
                    .parse()
                    .map_err(|_| GroupError::Encoding("bad test order"))?;
                Group::test(r)
            }
        }
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of one of the supported groups.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum GroupElement {
    Point(AffinePoint),
    Residue(u32),
}

/// Precomputed multiples of a fixed element for repeated exponentiation.
#[derive(Clone, Debug)]
pub struct FixedBase {
    base: GroupElement,
    table: Option<Arc<Vec<[AffinePoint; 16]>>>,
}

impl FixedBase {
    pub fn base(&self) -> &GroupElement {
        &self.base
    }
}

/// Exponent in Z_r, always reduced below the group order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Scalar(U256);

impl Scalar {
    pub fn as_uint(&self) -> &U256 {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl Group {
    /// Test group Z_r; `r` must be prime and at most 2^20.
    pub fn test(r: u64) -> Result<Group, GroupError> {
        if !(3..=MAX_TEST_ORDER as u64).contains(&r) || !is_prime_u64(r) {
            return Err(GroupError::InvalidTestOrder(r));
        }
        Ok(Group::Test(TestGroup { order: r as u32 }))
    }

    pub const ALL_CURVES: [Group; 4] = [Group::P160, Group::P192, Group::P224, Group::P256];

    fn curve(&self) -> Option<&'static Curve> {
        match self {
            Group::P160 => Some(Curve::p160()),
            Group::P192 => Some(Curve::p192()),
            Group::P224 => Some(Curve::p224()),
            Group::P256 => Some(Curve::p256()),
            Group::Test(_) => None,
        }
    }

    /// One-byte identifier used on the wire.
    pub fn wire_id(&self) -> u8 {
        match self {
            Group::P160 => 0x01,
            Group::P192 => 0x02,
            Group::P224 => 0x03,
            Group::P256 => 0x04,
            Group::Test(_) => 0xF0,
        }
    }

    pub fn is_test(&self) -> bool {
        matches!(self, Group::Test(_))
    }

    /// Curve name for EC groups.
    pub fn curve_name(&self) -> Option<&'static str> {
        self.curve().map(|c| c.name)
    }

    pub fn order(&self) -> U256 {
        match self {
            Group::Test(t) => U256::from_u64(t.order as u64),
            _ => self.curve().unwrap().order,
        }
    }

    /// Bit length of the group order (the security parameter for curves).
    pub fn security_bits(&self) -> usize {
        self.order().bits()
    }

    /// Bytes in one encoded coordinate (excluding the parity byte).
    pub fn field_len(&self) -> usize {
        match self {
            Group::Test(_) => 4,
            _ => self.curve().unwrap().field.byte_len(),
        }
    }

    /// Encoded element size: parity byte plus one coordinate.
    pub fn element_len(&self) -> usize {
        1 + self.field_len()
    }

    /// True when point decompression needs Tonelli–Shanks (p = 1 mod 4).
    pub fn sqrt_uses_tonelli_shanks(&self) -> bool {
        self.curve()
            .map(|c| c.field.uses_tonelli_shanks())
            .unwrap_or(false)
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            Group::Test(_) => GroupElement::Residue(0),
            _ => GroupElement::Point(self.curve().unwrap().identity()),
        }
    }

    pub fn generator(&self) -> GroupElement {
        match self {
            Group::Test(_) => GroupElement::Residue(1),
            _ => GroupElement::Point(self.curve().unwrap().generator),
        }
    }

    pub fn is_identity(&self, e: &GroupElement) -> bool {
        *e == self.identity()
    }

    /// Membership test: on the curve (or infinity) for EC groups, `< r` for Z_r.
    pub fn contains(&self, e: &GroupElement) -> bool {
        match (self, e) {
            (Group::Test(t), GroupElement::Residue(v)) => *v < t.order,
            (Group::Test(_), _) | (_, GroupElement::Residue(_)) => false,
            (_, GroupElement::Point(p)) => self.curve().unwrap().is_on_curve(p),
        }
    }

    /// The group operation.
    ///
    /// Panics if either operand belongs to a different kind of group; callers
    /// validate foreign input with [`Group::contains`] first.
    pub fn op(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match (self, a, b) {
            (Group::Test(t), GroupElement::Residue(x), GroupElement::Residue(y)) => {
                GroupElement::Residue(((*x as u64 + *y as u64) % t.order as u64) as u32)
            }
            (_, GroupElement::Point(p), GroupElement::Point(q)) if !self.is_test() => {
                GroupElement::Point(self.curve().unwrap().add_points(p, q))
            }
            _ => panic!("element from a different group"),
        }
    }

    pub fn invert(&self, a: &GroupElement) -> GroupElement {
        match (self, a) {
            (Group::Test(t), GroupElement::Residue(x)) => {
                GroupElement::Residue(((t.order - *x % t.order) % t.order) as u32)
            }
            (_, GroupElement::Point(p)) if !self.is_test() => {
                GroupElement::Point(self.curve().unwrap().negate(p))
            }
            _ => panic!("element from a different group"),
        }
    }

    /// Group operation over a sequence; the identity for an empty sequence.
    pub fn product<'a>(&self, elems: impl IntoIterator<Item = &'a GroupElement>) -> GroupElement {
        match self {
            Group::Test(t) => {
                let sum = elems.into_iter().fold(0u64, |acc, e| match e {
                    GroupElement::Residue(v) => (acc + *v as u64) % t.order as u64,
                    _ => panic!("element from a different group"),
                });
                GroupElement::Residue(sum as u32)
            }
            _ => {
                let curve = self.curve().unwrap();
                let points = elems.into_iter().map(|e| match e {
                    GroupElement::Point(p) => p,
                    _ => panic!("element from a different group"),
                });
                GroupElement::Point(curve.sum(points))
            }
        }
    }

    /// `a` raised to `k` (scalar multiple in additive notation).
    pub fn pow(&self, a: &GroupElement, k: &Scalar) -> GroupElement {
        match (self, a) {
            (Group::Test(t), GroupElement::Residue(x)) => {
                let k = k.0.low_u64() % t.order as u64;
                GroupElement::Residue(((*x as u64 * k) % t.order as u64) as u32)
            }
            (_, GroupElement::Point(p)) if !self.is_test() => {
                GroupElement::Point(self.curve().unwrap().mul(p, &k.0))
            }
            _ => panic!("element from a different group"),
        }
    }

    /// Precomputes a comb table for `base`. Worth it from a few dozen
    /// exponentiations of the same element onward.
    pub fn fixed_base(&self, base: &GroupElement) -> FixedBase {
        let table = match base {
            GroupElement::Point(p) if !self.is_test() => {
                Some(Arc::new(self.curve().unwrap().comb_table(p)))
            }
            _ => None,
        };
        FixedBase { base: *base, table }
    }

    /// `base^k` using a table from [`Group::fixed_base`].
    pub fn pow_fixed(&self, base: &FixedBase, k: &Scalar) -> GroupElement {
        match &base.table {
            Some(table) => GroupElement::Point(self.curve().unwrap().comb_mul(table, &k.0)),
            None => self.pow(&base.base, k),
        }
    }

    /// g^k.
    pub fn pow_generator(&self, k: &Scalar) -> GroupElement {
        match self {
            Group::Test(t) => GroupElement::Residue((k.0.low_u64() % t.order as u64) as u32),
            _ => GroupElement::Point(self.curve().unwrap().mul_generator(&k.0)),
        }
    }

    /// Reduces an integer into Z_r.
    pub fn scalar_from_u64(&self, v: u64) -> Scalar {
        match self {
            Group::Test(t) => Scalar(U256::from_u64(v % t.order as u64)),
            _ => {
                // every curve order exceeds 2^64
                Scalar(U256::from_u64(v))
            }
        }
    }

    /// Uniform scalar in Z_r by rejection sampling.
    pub fn random_scalar<R: CryptoRng + ?Sized>(&self, rng: &mut R) -> Scalar {
        let order = self.order();
        let bits = order.bits();
        loop {
            let mut limbs = [0u64; 4];
            for (i, limb) in limbs.iter_mut().enumerate() {
                let lo = i * 64;
                if lo >= bits {
                    break;
                }
                let v: u64 = rng.random();
                let take = (bits - lo).min(64);
                *limb = if take == 64 { v } else { v & ((1u64 << take) - 1) };
            }
            let candidate = U256(limbs);
            if candidate < order {
                return Scalar(candidate);
            }
        }
    }

    /// Uniform scalar in Z*_r = {1, ..., r-1}.
    pub fn random_nonzero_scalar<R: CryptoRng + ?Sized>(&self, rng: &mut R) -> Scalar {
        loop {
            let s = self.random_scalar(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    /// Uniform group element.
    pub fn random_element<R: CryptoRng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let s = self.random_scalar(rng);
        self.pow_generator(&s)
    }

    /// Fixed-width compressed encoding:
    /// `[0x02 | 0x03 parity, 0x00 identity] ++ big-endian x`.
    pub fn compress(&self, e: &GroupElement) -> Result<Vec<u8>, GroupError> {
        if !self.contains(e) {
            return Err(GroupError::NotAnElement(*self));
        }
        let mut out = Vec::with_capacity(self.element_len());
        match e {
            GroupElement::Residue(v) => {
                out.push(if *v == 0 { 0x00 } else { 0x02 });
                out.extend_from_slice(&v.to_be_bytes());
            }
            GroupElement::Point(p) => {
                let curve = self.curve().unwrap();
                if p.is_infinity() {
                    out.push(0x00);
                    out.resize(self.element_len(), 0);
                } else {
                    out.push(if curve.field.is_odd(&p.y) { 0x03 } else { 0x02 });
                    out.extend_from_slice(&curve.field.to_be_bytes(&p.x));
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`Group::compress`]; rejects x with no curve point.
    pub fn decompress(&self, bytes: &[u8]) -> Result<GroupElement, GroupError> {
        if bytes.len() != self.element_len() {
            return Err(GroupError::Encoding("wrong element length"));
        }
        let (tag, body) = (bytes[0], &bytes[1..]);
        match self {
            Group::Test(t) => {
                let v = u32::from_be_bytes(body.try_into().unwrap());
                match tag {
                    0x00 if v == 0 => Ok(GroupElement::Residue(0)),
                    0x02 if v != 0 && v < t.order => Ok(GroupElement::Residue(v)),
                    _ => Err(GroupError::Encoding("bad test-group element")),
                }
            }
            _ => {
                let curve = self.curve().unwrap();
                match tag {
                    0x00 => {
                        if body.iter().all(|&b| b == 0) {
                            Ok(GroupElement::Point(curve.identity()))
                        } else {
                            Err(GroupError::Encoding("non-zero body for point at infinity"))
                        }
                    }
                    0x02 | 0x03 => {
                        let x = curve
                            .field
                            .from_be_bytes(body)
                            .ok_or(GroupError::Encoding("x-coordinate not below field prime"))?;
                        curve
                            .lift_x(&x, tag == 0x03)
                            .map(GroupElement::Point)
                            .ok_or(GroupError::NoCurvePoint)
                    }
                    _ => Err(GroupError::Encoding("bad parity byte")),
                }
            }
        }
    }

    /// Builds a curve point from raw big-endian affine coordinates without
    /// checking the curve equation. Used to represent adversarial input;
    /// [`Group::contains`] rejects off-curve results.
    pub fn point_from_coordinates(&self, x: &[u8], y: &[u8]) -> Result<GroupElement, GroupError> {
        let curve = self
            .curve()
            .ok_or(GroupError::Encoding("coordinates only apply to curve groups"))?;
        let x = curve
            .field
            .from_be_bytes(x)
            .ok_or(GroupError::Encoding("x not below field prime"))?;
        let y = curve
            .field
            .from_be_bytes(y)
            .ok_or(GroupError::Encoding("y not below field prime"))?;
        Ok(GroupElement::Point(AffinePoint {
            x,
            y,
            infinity: false,
        }))
    }

    /// Big-endian affine coordinates of a finite curve point.
    pub fn point_coordinates(&self, e: &GroupElement) -> Option<(Vec<u8>, Vec<u8>)> {
        let curve = self.curve()?;
        match e {
            GroupElement::Point(p) if !p.is_infinity() => Some((
                curve.field.to_be_bytes(&p.x),
                curve.field.to_be_bytes(&p.y),
            )),
            _ => None,
        }
    }

    /// Evaluates `y^2 == x^3 - 3x + b` on raw big-endian coordinates with
    /// generic modular arithmetic. Test oracle for point validation.
    pub fn curve_equation_holds(&self, x: &[u8], y: &[u8]) -> Option<bool> {
        let curve = self.curve()?;
        let f = &curve.field;
        let x = f.from_be_bytes(x)?;
        let y = f.from_be_bytes(y)?;
        let p = AffinePoint {
            x,
            y,
            infinity: false,
        };
        Some(curve.is_on_curve(&p))
    }
}
