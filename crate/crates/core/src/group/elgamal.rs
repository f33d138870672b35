// SPDX-License-Identifier: Apache-2.0

//! Multiplicatively homomorphic ElGamal over a [`Group`].

use std::fmt;

use rand::CryptoRng;

use super::{FixedBase, Group, GroupElement, GroupError, Scalar};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PublicKey {
    pub group: Group,
    /// U = g^u
    pub key: GroupElement,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SecretKey {
    pub group: Group,
    u: Scalar,
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecretKey")
            .field("group", &self.group)
            .field("u", &"<redacted>")
            .finish()
    }
}

impl SecretKey {
    pub fn scalar(&self) -> &Scalar {
        &self.u
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub pk: PublicKey,
    pub sk: SecretKey,
}

/// `(X, Y) = (g^x, m * U^x)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Ciphertext {
    pub ephemeral: GroupElement,
    pub body: GroupElement,
}

impl KeyPair {
    pub fn generate<R: CryptoRng + ?Sized>(group: Group, rng: &mut R) -> KeyPair {
        let u = group.random_scalar(rng);
        KeyPair::from_secret(group, u)
    }

    pub fn from_secret(group: Group, u: Scalar) -> KeyPair {
        KeyPair {
            pk: PublicKey {
                group,
                key: group.pow_generator(&u),
            },
            sk: SecretKey { group, u },
        }
    }
}

impl PublicKey {
    /// True iff both components are elements of the plaintext group.
    pub fn validate(&self, c: &Ciphertext) -> bool {
        self.group.contains(&c.ephemeral) && self.group.contains(&c.body)
    }

    pub fn encrypt<R: CryptoRng + ?Sized>(
        &self,
        m: &GroupElement,
        rng: &mut R,
    ) -> Result<Ciphertext, GroupError> {
        if !self.group.contains(m) {
            return Err(GroupError::NotAnElement(self.group));
        }
        let x = self.group.random_scalar(rng);
        Ok(self.encrypt_with(m, &x))
    }

    /// Encryption with caller-chosen randomness `x`.
    pub fn encrypt_with(&self, m: &GroupElement, x: &Scalar) -> Ciphertext {
        let g = self.group;
        Ciphertext {
            ephemeral: g.pow_generator(x),
            body: g.op(m, &g.pow(&self.key, x)),
        }
    }

    /// A fresh encryption of the identity.
    pub fn encrypt_identity<R: CryptoRng + ?Sized>(&self, rng: &mut R) -> Ciphertext {
        let x = self.group.random_scalar(rng);
        self.encrypt_with(&self.group.identity(), &x)
    }

    /// Multiplies in a fresh encryption of 1 so the result is uniform in its class.
    pub fn rerandomize<R: CryptoRng + ?Sized>(
        &self,
        c: &Ciphertext,
        rng: &mut R,
    ) -> Result<Ciphertext, GroupError> {
        if !self.validate(c) {
            return Err(GroupError::InvalidCiphertext);
        }
        Ok(self.raw_mul(c, &self.encrypt_identity(rng)))
    }

    fn raw_mul(&self, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
        let g = self.group;
        Ciphertext {
            ephemeral: g.op(&a.ephemeral, &b.ephemeral),
            body: g.op(&a.body, &b.body),
        }
    }

    /// Homomorphic product: a uniform member of C(m1 * m2).
    pub fn hmul<R: CryptoRng + ?Sized>(
        &self,
        a: &Ciphertext,
        b: &Ciphertext,
        rng: &mut R,
    ) -> Result<Ciphertext, GroupError> {
        if !self.validate(a) || !self.validate(b) {
            return Err(GroupError::InvalidCiphertext);
        }
        Ok(self.raw_mul(&self.raw_mul(a, b), &self.encrypt_identity(rng)))
    }

    /// Homomorphic product of many ciphertexts with a single rerandomization.
    /// The empty product is a fresh encryption of 1.
    pub fn product<'a, R: CryptoRng + ?Sized>(
        &self,
        cs: impl IntoIterator<Item = &'a Ciphertext>,
        rng: &mut R,
    ) -> Result<Ciphertext, GroupError> {
        let cs: Vec<&Ciphertext> = cs.into_iter().collect();
        if cs.iter().any(|c| !self.validate(c)) {
            return Err(GroupError::InvalidCiphertext);
        }
        let g = self.group;
        let fresh = self.encrypt_identity(rng);
        let ephemeral = g.product(cs.iter().map(|c| &c.ephemeral).chain([&fresh.ephemeral]));
        let body = g.product(cs.iter().map(|c| &c.body).chain([&fresh.body]));
        Ok(Ciphertext { ephemeral, body })
    }

    /// `c` raised to `z` by square-and-multiply, rerandomized once at the end.
    pub fn hexp<R: CryptoRng + ?Sized>(
        &self,
        c: &Ciphertext,
        z: &Scalar,
        rng: &mut R,
    ) -> Result<Ciphertext, GroupError> {
        if !self.validate(c) {
            return Err(GroupError::InvalidCiphertext);
        }
        let g = self.group;
        let mut acc = Ciphertext {
            ephemeral: g.identity(),
            body: g.identity(),
        };
        let bits = z.as_uint().bits();
        for i in (0..bits).rev() {
            acc = self.raw_mul(&acc, &acc);
            if z.as_uint().bit(i) {
                acc = self.raw_mul(&acc, c);
            }
        }
        Ok(self.raw_mul(&acc, &self.encrypt_identity(rng)))
    }

    /// `hexp` using the group's scalar multiplication for each component.
    /// Same output distribution; used where speed matters.
    pub fn hexp_fast<R: CryptoRng + ?Sized>(
        &self,
        c: &Ciphertext,
        z: &Scalar,
        rng: &mut R,
    ) -> Result<Ciphertext, GroupError> {
        if !self.validate(c) {
            return Err(GroupError::InvalidCiphertext);
        }
        let g = self.group;
        let raised = Ciphertext {
            ephemeral: g.pow(&c.ephemeral, z),
            body: g.pow(&c.body, z),
        };
        Ok(self.raw_mul(&raised, &self.encrypt_identity(rng)))
    }
}

/// A public key with a precomputed table for `U`, for encrypting many messages.
#[derive(Clone, Debug)]
pub struct Encryptor {
    pk: PublicKey,
    key_table: FixedBase,
}

impl Encryptor {
    pub fn new(pk: PublicKey) -> Self {
        Encryptor {
            key_table: pk.group.fixed_base(&pk.key),
            pk,
        }
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.pk
    }

    pub fn encrypt_with(&self, m: &GroupElement, x: &Scalar) -> Ciphertext {
        let g = self.pk.group;
        Ciphertext {
            ephemeral: g.pow_generator(x),
            body: g.op(m, &g.pow_fixed(&self.key_table, x)),
        }
    }

    pub fn encrypt<R: CryptoRng + ?Sized>(
        &self,
        m: &GroupElement,
        rng: &mut R,
    ) -> Result<Ciphertext, GroupError> {
        if !self.pk.group.contains(m) {
            return Err(GroupError::NotAnElement(self.pk.group));
        }
        let x = self.pk.group.random_scalar(rng);
        Ok(self.encrypt_with(m, &x))
    }

    pub fn encrypt_identity<R: CryptoRng + ?Sized>(&self, rng: &mut R) -> Ciphertext {
        let x = self.pk.group.random_scalar(rng);
        self.encrypt_with(&self.pk.group.identity(), &x)
    }
}

impl SecretKey {
    /// `Y * X^{-u}`, or `None` (⊥) when a component is not a group element.
    pub fn decrypt(&self, c: &Ciphertext) -> Option<GroupElement> {
        let g = self.group;
        if !g.contains(&c.ephemeral) || !g.contains(&c.body) {
            return None;
        }
        let shared = g.pow(&c.ephemeral, &self.u);
        Some(g.op(&c.body, &g.invert(&shared)))
    }
}

impl Ciphertext {
    pub fn encoded_len(group: Group) -> usize {
        2 * group.element_len()
    }

    pub fn encode(&self, group: Group) -> Result<Vec<u8>, GroupError> {
        let mut out = group.compress(&self.ephemeral)?;
        out.extend(group.compress(&self.body)?);
        Ok(out)
    }

    pub fn decode(group: Group, bytes: &[u8]) -> Result<Ciphertext, GroupError> {
        let half = group.element_len();
        if bytes.len() != 2 * half {
            return Err(GroupError::Encoding("wrong ciphertext length"));
        }
        Ok(Ciphertext {
            ephemeral: group.decompress(&bytes[..half])?,
            body: group.decompress(&bytes[half..])?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn roundtrip_on_every_curve() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for g in Group::ALL_CURVES {
            let kp = KeyPair::generate(g, &mut rng);
            let m = g.random_element(&mut rng);
            let c = kp.pk.encrypt(&m, &mut rng).unwrap();
            assert!(kp.pk.validate(&c));
            assert_eq!(kp.sk.decrypt(&c), Some(m));
            let bytes = c.encode(g).unwrap();
            assert_eq!(bytes.len(), Ciphertext::encoded_len(g));
            assert_eq!(Ciphertext::decode(g, &bytes).unwrap(), c);
        }
    }

    #[test]
    fn hexp_variants_agree_on_plaintext() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let g = Group::P192;
        let kp = KeyPair::generate(g, &mut rng);
        let m = g.random_element(&mut rng);
        let c = kp.pk.encrypt(&m, &mut rng).unwrap();
        let z = g.random_scalar(&mut rng);
        let a = kp.pk.hexp(&c, &z, &mut rng).unwrap();
        let b = kp.pk.hexp_fast(&c, &z, &mut rng).unwrap();
        assert_eq!(kp.sk.decrypt(&a), Some(g.pow(&m, &z)));
        assert_eq!(kp.sk.decrypt(&a), kp.sk.decrypt(&b));
    }

    #[test]
    fn table_encryption_matches_plain() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let g = Group::P256;
        let kp = KeyPair::generate(g, &mut rng);
        let enc = Encryptor::new(kp.pk);
        let m = g.random_element(&mut rng);
        let x = g.random_scalar(&mut rng);
        assert_eq!(enc.encrypt_with(&m, &x), kp.pk.encrypt_with(&m, &x));
    }

    #[test]
    fn empty_product_is_identity() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let g = Group::P160;
        let kp = KeyPair::generate(g, &mut rng);
        let c = kp.pk.product([], &mut rng).unwrap();
        assert_eq!(kp.sk.decrypt(&c), Some(g.identity()));
    }

    #[test]
    fn secret_is_redacted_in_debug() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let kp = KeyPair::generate(Group::P192, &mut rng);
        assert!(format!("{:?}", kp.sk).contains("redacted"));
    }
}
