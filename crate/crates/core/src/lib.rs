// SPDX-License-Identifier: Apache-2.0

//! Private set-membership testing for cross-site password reuse detection.
//!
//! A requester learns whether a candidate password is similar to one a
//! responder holds for the same account, and nothing else. The responder
//! learns nothing about the candidate.

pub mod bloom;
pub mod group;
pub mod psmt;
pub mod similarity;

pub use bloom::{BloomParams, IndexSet};
pub use group::{Ciphertext, Group, GroupElement, KeyPair, PublicKey, Scalar};
pub use psmt::{QueryMessage, RequesterSession, ResponseMessage};
pub use similarity::{Digest, HashCost, SimilarSet};
