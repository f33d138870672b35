// SPDX-License-Identifier: Apache-2.0

//! The directory: account registry, identifier canonicalization, consent
//! gating, fan-out with response permutation, and responder audits.
//!
//! The directory relays ③ and ④ as opaque bytes. It reads the account id
//! of a query and nothing else.

pub mod audit;
pub mod canonical;
pub mod consent;
pub mod fanout;
pub mod journal;
pub mod registry;
pub mod server;

use pwreuse_net::{ErrorCode, NetError};
use thiserror::Error;

pub use canonical::canonicalize;
pub use consent::{Clock, ConsentManager, ConsentState, ManualClock, SystemClock};
pub use fanout::FanoutPlan;
pub use registry::{AccountRecord, Registry};
pub use server::{spawn_directory, Directory, DirectoryConfig, DirectoryHandle};

#[derive(Debug, Error)]
pub enum DirectoryError {
    #[error("malformed address {0:?}")]
    MalformedAddress(String),
    #[error("malformed endpoint {0:?}")]
    MalformedEndpoint(String),
    #[error("no open consent window for this account")]
    ConsentRequired,
    #[error("{want} responders requested, {have} registered")]
    InsufficientResponders { have: u32, want: u32 },
    #[error("unknown consent token")]
    UnknownToken,
    #[error("consent token expired")]
    ExpiredToken,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("state file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Net(NetError),
}

impl DirectoryError {
    pub fn code(&self) -> ErrorCode {
        match self {
            DirectoryError::MalformedAddress(_) | DirectoryError::MalformedEndpoint(_) | DirectoryError::Net(_) => {
                ErrorCode::Malformed
            }
            DirectoryError::ConsentRequired => ErrorCode::ConsentRequired,
            DirectoryError::InsufficientResponders { .. } => ErrorCode::InsufficientResponders,
            DirectoryError::UnknownToken | DirectoryError::ExpiredToken => ErrorCode::UnknownToken,
            DirectoryError::Io(_) | DirectoryError::Json(_) => ErrorCode::Internal,
        }
    }
}
