// SPDX-License-Identifier: Apache-2.0

//! Frame header: `[magic: 2][version: 1][opcode: 1][payload_len: u32 BE]`.

use bytes::{Buf, BufMut, BytesMut};
use tokio::io::{AsyncRead, AsyncReadExt, AsyncWrite, AsyncWriteExt};

use crate::NetError;

pub const MAGIC: [u8; 2] = *b"PW";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 8;
/// Upper bound on a payload; a P256 query at n = 8192 is well under this.
pub const MAX_PAYLOAD: usize = 64 << 20;

pub mod opcode {
    // directory API
    pub const REGISTER: u8 = 0x01;
    pub const DEREGISTER: u8 = 0x02;
    pub const BEGIN_CONSENT: u8 = 0x03;
    pub const CONFIRM_CONSENT: u8 = 0x04;
    pub const QUERY: u8 = 0x05;
    pub const AUDIT: u8 = 0x06;
    pub const RESPONDER_COUNT: u8 = 0x07;
    /// Set on the opcode of a directory reply.
    pub const REPLY: u8 = 0x80;
    pub const ERROR: u8 = 0xFF;

    // directory <-> responder
    pub const RESPONDER_QUERY: u8 = 0x10;
    pub const RESPONDER_RESULT: u8 = 0x11;
    /// Same length as a result frame.
    pub const RESPONDER_ERROR: u8 = 0x12;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub opcode: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(opcode: u8, payload: Vec<u8>) -> Self {
        Frame { opcode, payload }
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = BytesMut::with_capacity(self.encoded_len());
        out.put_slice(&MAGIC);
        out.put_u8(VERSION);
        out.put_u8(self.opcode);
        out.put_u32(self.payload.len() as u32);
        out.put_slice(&self.payload);
        out.to_vec()
    }

    /// Decodes exactly one frame; trailing or missing bytes are errors.
    pub fn decode(mut bytes: &[u8]) -> Result<Frame, NetError> {
        let (opcode, len) = parse_header(bytes)?;
        bytes.advance(HEADER_LEN);
        if bytes.len() != len {
            return Err(NetError::Frame("payload length mismatch"));
        }
        Ok(Frame::new(opcode, bytes.to_vec()))
    }
}

fn parse_header(mut h: &[u8]) -> Result<(u8, usize), NetError> {
    if h.len() < HEADER_LEN {
        return Err(NetError::Frame("truncated header"));
    }
    if h[..2] != MAGIC {
        return Err(NetError::Frame("bad magic"));
    }
    h.advance(2);
    let version = h.get_u8();
    if version != VERSION {
        return Err(NetError::UnsupportedVersion(version));
    }
    let opcode = h.get_u8();
    let len = h.get_u32() as usize;
    if len > MAX_PAYLOAD {
        return Err(NetError::Frame("payload too large"));
    }
    Ok((opcode, len))
}

pub async fn read_frame<R: AsyncRead + Unpin>(r: &mut R) -> Result<Frame, NetError> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header).await?;
    let (opcode, len) = parse_header(&header)?;
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload).await?;
    Ok(Frame::new(opcode, payload))
}

pub async fn write_frame<W: AsyncWrite + Unpin>(w: &mut W, frame: &Frame) -> Result<(), NetError> {
    w.write_all(&frame.encode()).await?;
    w.flush().await?;
    Ok(())
}
