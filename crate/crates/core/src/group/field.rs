// SPDX-License-Identifier: Apache-2.0

//! Prime-field arithmetic in Montgomery form with a runtime modulus below 2^256.

use super::uint::{U256, LIMBS};

/// Field element in Montgomery representation. Always fully reduced, so
/// derived equality is value equality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Fe(pub(crate) U256);

#[derive(Clone, Copy, Debug)]
enum SqrtMethod {
    /// p = 3 mod 4: a^((p+1)/4).
    ThreeModFour { exponent: U256 },
    /// Tonelli–Shanks with p - 1 = q * 2^s.
    TonelliShanks { q: U256, s: usize, non_residue: Fe },
}

#[derive(Clone, Debug)]
pub struct MontField {
    modulus: U256,
    /// -p^{-1} mod 2^64
    n0: u64,
    /// R mod p
    one: U256,
    /// R^2 mod p
    r2: U256,
    byte_len: usize,
    p_minus_2: U256,
    legendre_exp: U256,
    sqrt: SqrtMethod,
}

impl MontField {
    pub fn new(modulus: U256) -> Self {
        assert!(modulus.is_odd() && modulus.bits() > 2, "modulus must be an odd prime");
        let mut inv = 1u64;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(modulus.0[0].wrapping_mul(inv)));
        }
        let n0 = inv.wrapping_neg();

        let double = |x: U256| -> U256 {
            let (s, carry) = x.adc(&x);
            if carry || s >= modulus {
                s.sbb(&modulus).0
            } else {
                s
            }
        };
        let mut one = U256::ONE;
        for _ in 0..256 {
            one = double(one);
        }
        let mut r2 = one;
        for _ in 0..256 {
            r2 = double(r2);
        }

        let p_minus_1 = modulus.sbb(&U256::ONE).0;
        let p_minus_2 = modulus.sbb(&U256::from_u64(2)).0;
        let legendre_exp = p_minus_1.shr1();

        let mut field = MontField {
            modulus,
            n0,
            one,
            r2,
            byte_len: modulus.bits().div_ceil(8),
            p_minus_2,
            legendre_exp,
            sqrt: SqrtMethod::ThreeModFour {
                exponent: U256::ZERO,
            },
        };

        field.sqrt = if modulus.0[0] & 3 == 3 {
            SqrtMethod::ThreeModFour {
                exponent: modulus.adc(&U256::ONE).0.shr(2),
            }
        } else {
            let s = p_minus_1.trailing_zeros();
            let q = p_minus_1.shr(s);
            let mut candidate = 2u64;
            let non_residue = loop {
                let z = field.from_u64(candidate);
                if field.legendre(&z) == -1 {
                    break z;
                }
                candidate += 1;
            };
            SqrtMethod::TonelliShanks { q, s, non_residue }
        };
        field
    }

    pub fn byte_len(&self) -> usize {
        self.byte_len
    }

    pub fn uses_tonelli_shanks(&self) -> bool {
        matches!(self.sqrt, SqrtMethod::TonelliShanks { .. })
    }

    pub fn zero(&self) -> Fe {
        Fe(U256::ZERO)
    }

    pub fn one(&self) -> Fe {
        Fe(self.one)
    }

    pub fn from_u64(&self, v: u64) -> Fe {
        self.from_uint(&U256::from_u64(v)).expect("small constant below modulus")
    }

    /// Converts a canonical integer into Montgomery form; `None` if `v >= p`.
    pub fn from_uint(&self, v: &U256) -> Option<Fe> {
        if *v >= self.modulus {
            return None;
        }
        Some(Fe(self.mont_mul(v, &self.r2)))
    }

    pub fn to_uint(&self, a: &Fe) -> U256 {
        self.mont_mul(&a.0, &U256::ONE)
    }

    pub fn from_be_bytes(&self, bytes: &[u8]) -> Option<Fe> {
        self.from_uint(&U256::from_be_bytes(bytes)?)
    }

    pub fn to_be_bytes(&self, a: &Fe) -> Vec<u8> {
        self.to_uint(a).to_be_bytes(self.byte_len)
    }

    pub fn is_zero(&self, a: &Fe) -> bool {
        a.0.is_zero()
    }

    /// Parity of the canonical (non-Montgomery) value.
    pub fn is_odd(&self, a: &Fe) -> bool {
        self.to_uint(a).is_odd()
    }

    pub fn add(&self, a: &Fe, b: &Fe) -> Fe {
        let (s, carry) = a.0.adc(&b.0);
        if carry || s >= self.modulus {
            Fe(s.sbb(&self.modulus).0)
        } else {
            Fe(s)
        }
    }

    pub fn sub(&self, a: &Fe, b: &Fe) -> Fe {
        let (d, borrow) = a.0.sbb(&b.0);
        if borrow {
            Fe(d.adc(&self.modulus).0)
        } else {
            Fe(d)
        }
    }

    pub fn neg(&self, a: &Fe) -> Fe {
        if a.0.is_zero() {
            *a
        } else {
            Fe(self.modulus.sbb(&a.0).0)
        }
    }

    pub fn double(&self, a: &Fe) -> Fe {
        self.add(a, a)
    }

    pub fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        Fe(self.mont_mul(&a.0, &b.0))
    }

    pub fn square(&self, a: &Fe) -> Fe {
        Fe(self.mont_mul(&a.0, &a.0))
    }

    pub fn pow(&self, base: &Fe, exp: &U256) -> Fe {
        let mut acc = self.one();
        for i in (0..exp.bits()).rev() {
            acc = self.square(&acc);
            if exp.bit(i) {
                acc = self.mul(&acc, base);
            }
        }
        acc
    }

    /// Multiplicative inverse by Fermat; the inverse of zero is zero.
    pub fn invert(&self, a: &Fe) -> Fe {
        self.pow(a, &self.p_minus_2)
    }

    /// Legendre symbol: 0, 1 or -1.
    pub fn legendre(&self, a: &Fe) -> i8 {
        if self.is_zero(a) {
            return 0;
        }
        let e = self.pow(a, &self.legendre_exp);
        if e == self.one() {
            1
        } else {
            -1
        }
    }

    /// Square root if `a` is a quadratic residue (or zero).
    pub fn sqrt(&self, a: &Fe) -> Option<Fe> {
        if self.is_zero(a) {
            return Some(*a);
        }
        let root = match self.sqrt {
            SqrtMethod::ThreeModFour { exponent } => self.pow(a, &exponent),
            SqrtMethod::TonelliShanks { q, s, non_residue } => {
                self.tonelli_shanks(a, &q, s, &non_residue)?
            }
        };
        (self.square(&root) == *a).then_some(root)
    }

    fn tonelli_shanks(&self, a: &Fe, q: &U256, s: usize, z: &Fe) -> Option<Fe> {
        let one = self.one();
        let mut m = s;
        let mut c = self.pow(z, q);
        let mut t = self.pow(a, q);
        let mut r = self.pow(a, &q.adc(&U256::ONE).0.shr1());
        while t != one {
            let mut i = 0;
            let mut t2 = t;
            while t2 != one {
                t2 = self.square(&t2);
                i += 1;
                if i == m {
                    return None;
                }
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.square(&b);
            }
            m = i;
            c = self.square(&b);
            t = self.mul(&t, &c);
            r = self.mul(&r, &b);
        }
        Some(r)
    }

    /// Inverts every non-zero element of `values` with one field inversion.
    pub fn batch_invert(&self, values: &mut [Fe]) {
        let mut prefix = Vec::with_capacity(values.len());
        let mut acc = self.one();
        for v in values.iter() {
            prefix.push(acc);
            if !self.is_zero(v) {
                acc = self.mul(&acc, v);
            }
        }
        let mut inv = self.invert(&acc);
        for (v, before) in values.iter_mut().zip(prefix).rev() {
            if self.is_zero(v) {
                continue;
            }
            let next = self.mul(&inv, v);
            *v = self.mul(&inv, &before);
            inv = next;
        }
    }

    /// CIOS Montgomery multiplication: a * b * R^{-1} mod p.
    fn mont_mul(&self, a: &U256, b: &U256) -> U256 {
        let p = &self.modulus.0;
        let mut t = [0u64; LIMBS + 2];
        for i in 0..LIMBS {
            let mut carry: u128 = 0;
            for j in 0..LIMBS {
                let s = t[j] as u128 + (a.0[j] as u128) * (b.0[i] as u128) + carry;
                t[j] = s as u64;
                carry = s >> 64;
            }
            let s = t[LIMBS] as u128 + carry;
            t[LIMBS] = s as u64;
            t[LIMBS + 1] = (s >> 64) as u64;

            let m = t[0].wrapping_mul(self.n0);
            let s = t[0] as u128 + (m as u128) * (p[0] as u128);
            let mut carry = s >> 64;
            for j in 1..LIMBS {
                let s = t[j] as u128 + (m as u128) * (p[j] as u128) + carry;
                t[j - 1] = s as u64;
                carry = s >> 64;
            }
            let s = t[LIMBS] as u128 + carry;
            t[LIMBS - 1] = s as u64;
            t[LIMBS] = t[LIMBS + 1] + (s >> 64) as u64;
        }
        let res = U256([t[0], t[1], t[2], t[3]]);
        if t[LIMBS] != 0 || res >= self.modulus {
            res.sbb(&self.modulus).0
        } else {
            res
        }
    }
}
