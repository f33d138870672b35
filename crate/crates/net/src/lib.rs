// SPDX-License-Identifier: Apache-2.0

//! Wire format, responder service, requester client and timing harness.

pub mod bench;
pub mod client;
pub mod codec;
pub mod frame;
pub mod latency;
pub mod requester;
pub mod responder;

use pwreuse_core::psmt::PsmtError;
use thiserror::Error;

pub use codec::{decode_query, decode_response, encode_query, encode_response, AuditVerdict, ErrorCode};
pub use frame::Frame;
pub use latency::{LatencyProfile, ProfileKind};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("timed out")]
    Timeout,
    #[error("bad frame: {0}")]
    Frame(&'static str),
    #[error("unsupported protocol version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown opcode {0:#04x}")]
    UnknownOpcode(u8),
    #[error("cannot decode {0}")]
    Decode(&'static str),
    #[error("cannot encode {0}")]
    Encode(&'static str),
    #[error("remote error {code:?}: {message}")]
    Remote { code: ErrorCode, message: String },
    #[error(transparent)]
    Psmt(#[from] PsmtError),
}

impl NetError {
    /// Failures worth retrying.
    pub fn is_transport(&self) -> bool {
        matches!(self, NetError::Io(_) | NetError::Timeout)
            || matches!(self, NetError::Remote { code: ErrorCode::Unavailable, .. })
    }

    pub fn code(&self) -> Option<ErrorCode> {
        match self {
            NetError::Remote { code, .. } => Some(*code),
            _ => None,
        }
    }
}
