// SPDX-License-Identifier: Apache-2.0

//! Payload layouts for message ③, message ④ and the directory API.

use bytes::{Buf, BufMut};
use pwreuse_core::bloom::BloomParams;
use pwreuse_core::group::{Ciphertext, Group, PublicKey};
use pwreuse_core::psmt::{QueryMessage, ResponseMessage};

use crate::frame::{opcode, Frame};
use crate::NetError;

const TEST_GROUP_ID: u8 = 0xF0;

pub type ConsentToken = [u8; 16];

fn short(what: &'static str) -> NetError {
    NetError::Decode(what)
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn need(&self, n: usize, what: &'static str) -> Result<(), NetError> {
        if self.0.remaining() < n {
            Err(short(what))
        } else {
            Ok(())
        }
    }

    fn u8(&mut self, what: &'static str) -> Result<u8, NetError> {
        self.need(1, what)?;
        Ok(self.0.get_u8())
    }

    fn u16(&mut self, what: &'static str) -> Result<u16, NetError> {
        self.need(2, what)?;
        Ok(self.0.get_u16())
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, NetError> {
        self.need(4, what)?;
        Ok(self.0.get_u32())
    }

    fn bytes(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], NetError> {
        self.need(n, what)?;
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn string(&mut self, what: &'static str) -> Result<String, NetError> {
        let n = self.u16(what)? as usize;
        let b = self.bytes(n, what)?;
        String::from_utf8(b.to_vec()).map_err(|_| NetError::Decode("string is not UTF-8"))
    }

    fn group(&mut self) -> Result<Group, NetError> {
        match self.u8("group id")? {
            0x01 => Ok(Group::P160),
            0x02 => Ok(Group::P192),
            0x03 => Ok(Group::P224),
            0x04 => Ok(Group::P256),
            TEST_GROUP_ID => {
                let r = self.u32("test order")?;
                Group::test(r as u64).map_err(|_| NetError::Decode("bad test order"))
            }
            _ => Err(NetError::Decode("unknown group id")),
        }
    }

    fn finish(self) -> Result<(), NetError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(NetError::Decode("trailing bytes"))
        }
    }
}

fn put_string(out: &mut Vec<u8>, s: &str) {
    out.put_u16(s.len() as u16);
    out.put_slice(s.as_bytes());
}

fn put_group(out: &mut Vec<u8>, g: Group) {
    out.put_u8(g.wire_id());
    if g.is_test() {
        out.put_u32(g.order().low_u64() as u32);
    }
}

fn check_string(s: &str) -> Result<(), NetError> {
    if s.len() > u16::MAX as usize {
        return Err(NetError::Encode("string longer than 65535 bytes"));
    }
    Ok(())
}

/// `id ‖ group ‖ pk ‖ ℓ: u32 ‖ k: u16 ‖ seed ‖ ℓ ciphertexts`.
pub fn encode_query(q: &QueryMessage) -> Result<Vec<u8>, NetError> {
    check_string(&q.account_id)?;
    let g = q.pk.group;
    if q.ciphertexts.len() != q.bloom.length() as usize {
        return Err(NetError::Encode("ciphertext count differs from filter length"));
    }
    let mut out = Vec::with_capacity(query_size_hint(q));
    put_string(&mut out, &q.account_id);
    put_group(&mut out, g);
    out.extend(g.compress(&q.pk.key).map_err(|_| NetError::Encode("public key"))?);
    out.put_u32(q.bloom.length());
    out.put_u16(q.bloom.k() as u16);
    out.put_u16(q.bloom.seed().len() as u16);
    out.put_slice(q.bloom.seed());
    for c in &q.ciphertexts {
        out.extend(c.encode(g).map_err(|_| NetError::Encode("ciphertext"))?);
    }
    Ok(out)
}

fn query_size_hint(q: &QueryMessage) -> usize {
    64 + q.account_id.len() + q.ciphertexts.len() * Ciphertext::encoded_len(q.pk.group)
}

/// Encoded size of ③ without building it.
pub fn query_len(group: Group, account_id: &str, ell: u32, seed_len: usize) -> usize {
    let group_len = if group.is_test() { 5 } else { 1 };
    2 + account_id.len()
        + group_len
        + group.element_len()
        + 4
        + 2
        + 2
        + seed_len
        + ell as usize * Ciphertext::encoded_len(group)
}

/// Account id of an encoded ③, without touching the ciphertexts.
pub fn peek_account(bytes: &[u8]) -> Result<String, NetError> {
    Reader(bytes).string("account id")
}

pub fn decode_query(bytes: &[u8]) -> Result<QueryMessage, NetError> {
    let mut r = Reader(bytes);
    let account_id = r.string("account id")?;
    let group = r.group()?;
    let key = group
        .decompress(r.bytes(group.element_len(), "public key")?)
        .map_err(|_| NetError::Decode("public key is not a group element"))?;
    let ell = r.u32("filter length")?;
    let k = r.u16("hash count")? as u32;
    let seed_len = r.u16("seed")? as usize;
    let seed = r.bytes(seed_len, "seed")?.to_vec();
    let bloom = BloomParams::new(ell, k, seed).map_err(|_| NetError::Decode("bad filter parameters"))?;
    let width = Ciphertext::encoded_len(group);
    if r.0.len() != ell as usize * width {
        return Err(NetError::Decode("ciphertext count differs from filter length"));
    }
    let ciphertexts = r
        .0
        .chunks_exact(width)
        .map(|c| Ciphertext::decode(group, c))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| NetError::Decode("ciphertext"))?;
    Ok(QueryMessage {
        account_id,
        pk: PublicKey { group, key },
        bloom,
        ciphertexts,
    })
}

pub fn encode_response(group: Group, r: &ResponseMessage) -> Result<Vec<u8>, NetError> {
    r.result.encode(group).map_err(|_| NetError::Encode("ciphertext"))
}

pub fn decode_response(group: Group, bytes: &[u8]) -> Result<ResponseMessage, NetError> {
    Ciphertext::decode(group, bytes)
        .map(|result| ResponseMessage { result })
        .map_err(|_| NetError::Decode("response ciphertext"))
}

/// Error frame of the same size as a result frame for `group`.
pub fn responder_error_frame(group: Option<Group>, code: ErrorCode) -> Frame {
    let width = group.map_or(Ciphertext::encoded_len(Group::P192), Ciphertext::encoded_len);
    let mut payload = vec![0u8; width];
    payload[0] = code as u8;
    Frame::new(opcode::RESPONDER_ERROR, payload)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum ErrorCode {
    Malformed = 1,
    InvalidCiphertext = 2,
    ConsentRequired = 3,
    InsufficientResponders = 4,
    UnknownToken = 5,
    UnknownAccount = 6,
    Unavailable = 7,
    Internal = 8,
}

impl ErrorCode {
    pub fn from_u8(v: u8) -> ErrorCode {
        match v {
            1 => ErrorCode::Malformed,
            2 => ErrorCode::InvalidCiphertext,
            3 => ErrorCode::ConsentRequired,
            4 => ErrorCode::InsufficientResponders,
            5 => ErrorCode::UnknownToken,
            6 => ErrorCode::UnknownAccount,
            7 => ErrorCode::Unavailable,
            _ => ErrorCode::Internal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditVerdict {
    Honest,
    Lying,
    Inconclusive,
}

impl AuditVerdict {
    fn to_u8(self) -> u8 {
        match self {
            AuditVerdict::Honest => 0,
            AuditVerdict::Lying => 1,
            AuditVerdict::Inconclusive => 2,
        }
    }

    fn from_u8(v: u8) -> Result<Self, NetError> {
        match v {
            0 => Ok(AuditVerdict::Honest),
            1 => Ok(AuditVerdict::Lying),
            2 => Ok(AuditVerdict::Inconclusive),
            _ => Err(NetError::Decode("audit verdict")),
        }
    }
}

/// Requests to the directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Request {
    Register { account: String, endpoint: String },
    Deregister { account: String, endpoint: String },
    BeginConsent { account: String },
    ConfirmConsent { token: ConsentToken },
    /// Fan an encoded ③ out to `rho` responders of the account it names.
    Query { rho: u32, query: Vec<u8> },
    Audit { endpoint: String },
    ResponderCount { account: String },
}

/// Directory replies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reply {
    /// `warning` is set when the request was a no-op.
    Ack { warning: bool },
    Consent { token: ConsentToken, canonical_id: String, ttl_secs: u32 },
    Window { seconds: u32 },
    /// Opaque ④ payloads in permuted order.
    Responses(Vec<Vec<u8>>),
    Audit(AuditVerdict),
    Count { canonical_id: String, count: u32 },
    Error { code: ErrorCode, message: String },
}

impl Request {
    pub fn opcode(&self) -> u8 {
        match self {
            Request::Register { .. } => opcode::REGISTER,
            Request::Deregister { .. } => opcode::DEREGISTER,
            Request::BeginConsent { .. } => opcode::BEGIN_CONSENT,
            Request::ConfirmConsent { .. } => opcode::CONFIRM_CONSENT,
            Request::Query { .. } => opcode::QUERY,
            Request::Audit { .. } => opcode::AUDIT,
            Request::ResponderCount { .. } => opcode::RESPONDER_COUNT,
        }
    }

    pub fn to_frame(&self) -> Result<Frame, NetError> {
        let mut p = Vec::new();
        match self {
            Request::Register { account, endpoint } | Request::Deregister { account, endpoint } => {
                check_string(account)?;
                check_string(endpoint)?;
                put_string(&mut p, account);
                put_string(&mut p, endpoint);
            }
            Request::BeginConsent { account } | Request::ResponderCount { account } => {
                check_string(account)?;
                put_string(&mut p, account);
            }
            Request::ConfirmConsent { token } => p.put_slice(token),
            Request::Query { rho, query } => {
                p.put_u32(*rho);
                p.extend_from_slice(query);
            }
            Request::Audit { endpoint } => {
                check_string(endpoint)?;
                put_string(&mut p, endpoint);
            }
        }
        Ok(Frame::new(self.opcode(), p))
    }

    pub fn from_frame(f: &Frame) -> Result<Request, NetError> {
        let mut r = Reader(&f.payload);
        let req = match f.opcode {
            opcode::REGISTER | opcode::DEREGISTER => {
                let account = r.string("account")?;
                let endpoint = r.string("endpoint")?;
                if f.opcode == opcode::REGISTER {
                    Request::Register { account, endpoint }
                } else {
                    Request::Deregister { account, endpoint }
                }
            }
            opcode::BEGIN_CONSENT => Request::BeginConsent { account: r.string("account")? },
            opcode::RESPONDER_COUNT => Request::ResponderCount { account: r.string("account")? },
            opcode::CONFIRM_CONSENT => {
                let token = r.bytes(16, "token")?.try_into().unwrap();
                Request::ConfirmConsent { token }
            }
            opcode::QUERY => {
                let rho = r.u32("rho")?;
                let query = r.0.to_vec();
                peek_account(&query)?;
                r.0 = &[];
                Request::Query { rho, query }
            }
            opcode::AUDIT => Request::Audit { endpoint: r.string("endpoint")? },
            other => return Err(NetError::UnknownOpcode(other)),
        };
        r.finish()?;
        Ok(req)
    }
}

impl Reply {
    pub fn to_frame(&self, request_opcode: u8) -> Frame {
        let mut p = Vec::new();
        match self {
            Reply::Ack { warning } => p.put_u8(*warning as u8),
            Reply::Consent { token, canonical_id, ttl_secs } => {
                p.put_slice(token);
                put_string(&mut p, canonical_id);
                p.put_u32(*ttl_secs);
            }
            Reply::Window { seconds } => p.put_u32(*seconds),
            Reply::Responses(blobs) => {
                p.put_u32(blobs.len() as u32);
                for b in blobs {
                    p.put_u32(b.len() as u32);
                    p.put_slice(b);
                }
            }
            Reply::Audit(v) => p.put_u8(v.to_u8()),
            Reply::Count { canonical_id, count } => {
                put_string(&mut p, canonical_id);
                p.put_u32(*count);
            }
            Reply::Error { code, message } => {
                p.put_u8(*code as u8);
                let m = &message[..message.len().min(1024)];
                put_string(&mut p, m);
                return Frame::new(opcode::ERROR, p);
            }
        }
        Frame::new(request_opcode | opcode::REPLY, p)
    }

    pub fn from_frame(f: &Frame, request_opcode: u8) -> Result<Reply, NetError> {
        let mut r = Reader(&f.payload);
        if f.opcode == opcode::ERROR {
            let code = ErrorCode::from_u8(r.u8("error code")?);
            let message = r.string("error message")?;
            r.finish()?;
            return Ok(Reply::Error { code, message });
        }
        if f.opcode != request_opcode | opcode::REPLY {
            return Err(NetError::UnknownOpcode(f.opcode));
        }
        let reply = match request_opcode {
            opcode::REGISTER | opcode::DEREGISTER => Reply::Ack { warning: r.u8("ack")? != 0 },
            opcode::BEGIN_CONSENT => Reply::Consent {
                token: r.bytes(16, "token")?.try_into().unwrap(),
                canonical_id: r.string("canonical id")?,
                ttl_secs: r.u32("ttl")?,
            },
            opcode::CONFIRM_CONSENT => Reply::Window { seconds: r.u32("window")? },
            opcode::QUERY => {
                let count = r.u32("response count")?;
                let mut blobs = Vec::new();
                for _ in 0..count {
                    let n = r.u32("response length")? as usize;
                    blobs.push(r.bytes(n, "response")?.to_vec());
                }
                Reply::Responses(blobs)
            }
            opcode::AUDIT => Reply::Audit(AuditVerdict::from_u8(r.u8("verdict")?)?),
            opcode::RESPONDER_COUNT => Reply::Count {
                canonical_id: r.string("canonical id")?,
                count: r.u32("count")?,
            },
            other => return Err(NetError::UnknownOpcode(other)),
        };
        r.finish()?;
        Ok(reply)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pwreuse_core::group::KeyPair;
    use pwreuse_core::psmt::build_query_for_indices;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn sample_query(group: Group, ell: u32) -> QueryMessage {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let bloom = BloomParams::new(ell, 2, b"seed".to_vec()).unwrap();
        let idx = [0u32, ell - 1].into_iter().collect();
        build_query_for_indices(group, "a@b.c", bloom, idx, None, &mut rng).unwrap().0
    }

    #[test]
    fn query_layout() {
        let q = sample_query(Group::P192, 3);
        let bytes = encode_query(&q).unwrap();
        assert_eq!(bytes.len(), query_len(Group::P192, "a@b.c", 3, 4));
        assert_eq!(&bytes[..7], b"\x00\x05a@b.c");
        assert_eq!(bytes[7], 0x02);
        assert_eq!(&bytes[33..39], &[0, 0, 0, 3, 0, 2]);
        assert_eq!(decode_query(&bytes).unwrap(), q);
        for cut in [0, 10, bytes.len() - 1] {
            assert!(decode_query(&bytes[..cut]).is_err());
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_query(&extra).is_err());
        let mut bad_group = bytes;
        bad_group[7] = 0x09;
        assert!(matches!(decode_query(&bad_group), Err(NetError::Decode("unknown group id"))));
    }

    #[test]
    fn test_group_carries_its_order() {
        let q = sample_query(Group::test(101).unwrap(), 5);
        let bytes = encode_query(&q).unwrap();
        assert_eq!(&bytes[7..12], &[0xF0, 0, 0, 0, 101]);
        assert_eq!(decode_query(&bytes).unwrap(), q);
    }

    #[test]
    fn error_frames_match_result_size() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        for g in Group::ALL_CURVES {
            let kp = KeyPair::generate(g, &mut rng);
            let ok = encode_response(g, &ResponseMessage { result: kp.pk.encrypt_identity(&mut rng) }).unwrap();
            let err = responder_error_frame(Some(g), ErrorCode::InvalidCiphertext);
            assert_eq!(err.payload.len(), ok.len());
        }
    }

    #[test]
    fn api_roundtrips() {
        let q = sample_query(Group::P160, 4);
        let reqs = vec![
            Request::Register { account: "a".into(), endpoint: "127.0.0.1:1".into() },
            Request::Deregister { account: "a".into(), endpoint: "e".into() },
            Request::BeginConsent { account: "A@x.com".into() },
            Request::ConfirmConsent { token: [7; 16] },
            Request::Query { rho: 3, query: encode_query(&q).unwrap() },
            Request::Audit { endpoint: "e".into() },
            Request::ResponderCount { account: "a".into() },
        ];
        for req in reqs {
            let f = Frame::decode(&req.to_frame().unwrap().encode()).unwrap();
            assert_eq!(Request::from_frame(&f).unwrap(), req);
        }
        let replies = vec![
            (opcode::REGISTER, Reply::Ack { warning: true }),
            (opcode::BEGIN_CONSENT, Reply::Consent { token: [1; 16], canonical_id: "x".into(), ttl_secs: 600 }),
            (opcode::CONFIRM_CONSENT, Reply::Window { seconds: 60 }),
            (opcode::QUERY, Reply::Responses(vec![vec![1, 2], vec![3]])),
            (opcode::AUDIT, Reply::Audit(AuditVerdict::Lying)),
            (opcode::RESPONDER_COUNT, Reply::Count { canonical_id: "x".into(), count: 26 }),
            (opcode::QUERY, Reply::Error { code: ErrorCode::ConsentRequired, message: "closed".into() }),
        ];
        for (op, reply) in replies {
            let f = reply.to_frame(op);
            assert_eq!(Reply::from_frame(&f, op).unwrap(), reply);
        }
    }
}
