// SPDX-License-Identifier: Apache-2.0

use std::time::Duration;

use tokio::net::TcpStream;
use tokio::time::timeout;

use crate::codec::{AuditVerdict, ConsentToken, ErrorCode, Reply, Request};
use crate::frame::{opcode, read_frame, write_frame, Frame};
use crate::NetError;

async fn exchange(addr: &str, frame: &Frame, limit: Duration) -> Result<Frame, NetError> {
    let io = async {
        let mut stream = TcpStream::connect(addr).await?;
        stream.set_nodelay(true)?;
        write_frame(&mut stream, frame).await?;
        read_frame(&mut stream).await
    };
    timeout(limit, io).await.map_err(|_| NetError::Timeout)?
}

/// Sends an encoded ③ to one responder and returns the raw ④ payload.
pub async fn query_responder(endpoint: &str, query: &[u8], limit: Duration) -> Result<Vec<u8>, NetError> {
    let reply = exchange(endpoint, &Frame::new(opcode::RESPONDER_QUERY, query.to_vec()), limit).await?;
    match reply.opcode {
        opcode::RESPONDER_RESULT => Ok(reply.payload),
        opcode::RESPONDER_ERROR => Err(NetError::Remote {
            code: ErrorCode::from_u8(reply.payload.first().copied().unwrap_or(0)),
            message: "responder error".into(),
        }),
        other => Err(NetError::UnknownOpcode(other)),
    }
}

/// Blocking-with-timeout client for the directory API.
#[derive(Clone, Debug)]
pub struct DirectoryClient {
    addr: String,
    timeout: Duration,
}

impl DirectoryClient {
    pub fn new(addr: impl Into<String>, timeout: Duration) -> Self {
        DirectoryClient {
            addr: addr.into(),
            timeout,
        }
    }

    pub fn addr(&self) -> &str {
        &self.addr
    }

    pub async fn call(&self, req: &Request) -> Result<Reply, NetError> {
        let op = req.opcode();
        let frame = exchange(&self.addr, &req.to_frame()?, self.timeout).await?;
        match Reply::from_frame(&frame, op)? {
            Reply::Error { code, message } => Err(NetError::Remote { code, message }),
            reply => Ok(reply),
        }
    }

    pub async fn register(&self, account: &str, endpoint: &str) -> Result<bool, NetError> {
        let req = Request::Register {
            account: account.into(),
            endpoint: endpoint.into(),
        };
        match self.call(&req).await? {
            Reply::Ack { warning } => Ok(warning),
            _ => Err(NetError::Decode("unexpected reply")),
        }
    }

    /// Returns true when the endpoint was not registered.
    pub async fn deregister(&self, account: &str, endpoint: &str) -> Result<bool, NetError> {
        let req = Request::Deregister {
            account: account.into(),
            endpoint: endpoint.into(),
        };
        match self.call(&req).await? {
            Reply::Ack { warning } => Ok(warning),
            _ => Err(NetError::Decode("unexpected reply")),
        }
    }

    /// Returns the token and the canonical account id.
    pub async fn begin_consent(&self, account: &str) -> Result<(ConsentToken, String), NetError> {
        match self.call(&Request::BeginConsent { account: account.into() }).await? {
            Reply::Consent { token, canonical_id, .. } => Ok((token, canonical_id)),
            _ => Err(NetError::Decode("unexpected reply")),
        }
    }

    /// Returns the length of the opened query window.
    pub async fn confirm_consent(&self, token: ConsentToken) -> Result<Duration, NetError> {
        match self.call(&Request::ConfirmConsent { token }).await? {
            Reply::Window { seconds } => Ok(Duration::from_secs(seconds.into())),
            _ => Err(NetError::Decode("unexpected reply")),
        }
    }

    /// `(canonical id, R_a)`.
    pub async fn responder_count(&self, account: &str) -> Result<(String, u32), NetError> {
        match self.call(&Request::ResponderCount { account: account.into() }).await? {
            Reply::Count { canonical_id, count } => Ok((canonical_id, count)),
            _ => Err(NetError::Decode("unexpected reply")),
        }
    }

    /// Fans an encoded ③ out; the replies come back permuted.
    pub async fn query(&self, rho: u32, query: Vec<u8>) -> Result<Vec<Vec<u8>>, NetError> {
        match self.call(&Request::Query { rho, query }).await? {
            Reply::Responses(blobs) => Ok(blobs),
            _ => Err(NetError::Decode("unexpected reply")),
        }
    }

    pub async fn audit(&self, endpoint: &str) -> Result<AuditVerdict, NetError> {
        match self.call(&Request::Audit { endpoint: endpoint.into() }).await? {
            Reply::Audit(v) => Ok(v),
            _ => Err(NetError::Decode("unexpected reply")),
        }
    }
}
