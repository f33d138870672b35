// SPDX-License-Identifier: Apache-2.0

//! Fixed-width 256-bit unsigned integers (four little-endian 64-bit limbs).

use std::cmp::Ordering;
use std::fmt;

pub const LIMBS: usize = 4;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct U256(pub [u64; LIMBS]);

impl U256 {
    pub const ZERO: U256 = U256([0; LIMBS]);
    pub const ONE: U256 = U256([1, 0, 0, 0]);

    pub const fn from_u64(v: u64) -> Self {
        U256([v, 0, 0, 0])
    }

    /// Parses a big-endian hex string (no prefix). Panics on malformed input;
    /// only used for compile-time curve constants.
    pub fn from_hex(s: &str) -> Self {
        let s = s.trim_start_matches("0x");
        assert!(s.len() <= 64, "hex constant too long");
        let mut out = [0u64; LIMBS];
        for (i, chunk) in s.as_bytes().rchunks(16).enumerate() {
            let part = std::str::from_utf8(chunk).expect("ascii hex");
            out[i] = u64::from_str_radix(part, 16).expect("valid hex");
        }
        U256(out)
    }

    /// Big-endian decode of up to 32 bytes.
    pub fn from_be_bytes(bytes: &[u8]) -> Option<Self> {
        if bytes.len() > 32 {
            return None;
        }
        let mut buf = [0u8; 32];
        buf[32 - bytes.len()..].copy_from_slice(bytes);
        let mut out = [0u64; LIMBS];
        for (i, limb) in out.iter_mut().enumerate() {
            let start = 32 - (i + 1) * 8;
            *limb = u64::from_be_bytes(buf[start..start + 8].try_into().unwrap());
        }
        Some(U256(out))
    }

    /// Big-endian encode into exactly `len` bytes. High bytes beyond `len` must be zero.
    pub fn to_be_bytes(&self, len: usize) -> Vec<u8> {
        let mut full = [0u8; 32];
        for (i, limb) in self.0.iter().enumerate() {
            let start = 32 - (i + 1) * 8;
            full[start..start + 8].copy_from_slice(&limb.to_be_bytes());
        }
        debug_assert!(full[..32 - len].iter().all(|&b| b == 0));
        full[32 - len..].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&l| l == 0)
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn bits(&self) -> usize {
        for i in (0..LIMBS).rev() {
            if self.0[i] != 0 {
                return i * 64 + 64 - self.0[i].leading_zeros() as usize;
            }
        }
        0
    }

    /// 4-bit window `i` (bits `4i..4i+4`).
    pub fn nibble(&self, i: usize) -> usize {
        ((self.0[i / 16] >> ((i % 16) * 4)) & 0xF) as usize
    }

    pub fn is_odd(&self) -> bool {
        self.0[0] & 1 == 1
    }

    /// Returns `(self + rhs, carry)`.
    pub fn adc(&self, rhs: &U256) -> (U256, bool) {
        let mut out = [0u64; LIMBS];
        let mut carry = 0u64;
        for (i, o) in out.iter_mut().enumerate() {
            let s = self.0[i] as u128 + rhs.0[i] as u128 + carry as u128;
            *o = s as u64;
            carry = (s >> 64) as u64;
        }
        (U256(out), carry != 0)
    }

    /// Returns `(self - rhs, borrow)`.
    pub fn sbb(&self, rhs: &U256) -> (U256, bool) {
        let mut out = [0u64; LIMBS];
        let mut borrow = 0u64;
        for (i, o) in out.iter_mut().enumerate() {
            let (d1, b1) = self.0[i].overflowing_sub(rhs.0[i]);
            let (d2, b2) = d1.overflowing_sub(borrow);
            *o = d2;
            borrow = (b1 || b2) as u64;
        }
        (U256(out), borrow != 0)
    }

    pub fn shr1(&self) -> U256 {
        let mut out = [0u64; LIMBS];
        for i in 0..LIMBS {
            out[i] = self.0[i] >> 1;
            if i + 1 < LIMBS {
                out[i] |= self.0[i + 1] << 63;
            }
        }
        U256(out)
    }

    pub fn shr(&self, n: usize) -> U256 {
        let mut v = *self;
        for _ in 0..n {
            v = v.shr1();
        }
        v
    }

    pub fn trailing_zeros(&self) -> usize {
        for i in 0..LIMBS {
            if self.0[i] != 0 {
                return i * 64 + self.0[i].trailing_zeros() as usize;
            }
        }
        LIMBS * 64
    }

    pub fn low_u64(&self) -> u64 {
        self.0[0]
    }
}

impl Ord for U256 {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..LIMBS).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for U256 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for U256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x")?;
        let mut started = false;
        for i in (0..LIMBS).rev() {
            if started {
                write!(f, "{:016x}", self.0[i])?;
            } else if self.0[i] != 0 || i == 0 {
                write!(f, "{:x}", self.0[i])?;
                started = true;
            }
        }
        Ok(())
    }
}

impl fmt::Display for U256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_and_bytes_agree() {
        let v = U256::from_hex("0100000000000000000001F4C8F927AED3CA752257");
        assert_eq!(v.bits(), 161);
        let bytes = v.to_be_bytes(21);
        assert_eq!(bytes[0], 1);
        assert_eq!(U256::from_be_bytes(&bytes), Some(v));
    }

    #[test]
    fn add_sub_carry() {
        let max = U256([u64::MAX; 4]);
        let (s, c) = max.adc(&U256::ONE);
        assert!(c);
        assert!(s.is_zero());
        let (d, b) = U256::ZERO.sbb(&U256::ONE);
        assert!(b);
        assert_eq!(d, max);
    }

    #[test]
    fn nibbles_cover_value() {
        let v = U256::from_hex("fedcba9876543210");
        let digits: Vec<usize> = (0..16).map(|i| v.nibble(i)).collect();
        assert_eq!(digits, (0..16).collect::<Vec<_>>());
    }
}
