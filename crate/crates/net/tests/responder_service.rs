// SPDX-License-Identifier: Apache-2.0

use std::sync::atomic::Ordering;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use pwreuse_core::bloom::BloomParams;
use pwreuse_core::group::{Ciphertext, Group};
use pwreuse_core::psmt::{build_query, build_query_for_indices, decode_result, QueryConfig};
use pwreuse_core::similarity::{build_similar_set, HashCost, SimilarStore};
use pwreuse_net::client::query_responder;
use pwreuse_net::codec::{decode_response, encode_query, ErrorCode};
use pwreuse_net::frame::{opcode, read_frame, write_frame, Frame};
use pwreuse_net::responder::{spawn_responder, Behavior, ResponderConfig, SharedStore};
use pwreuse_net::NetError;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tokio::io::AsyncWriteExt;
use tokio::net::TcpStream;

const LIMIT: Duration = Duration::from_secs(120);

fn cfg() -> QueryConfig {
    QueryConfig {
        group: Group::P192,
        k: 20,
        hash_cost: HashCost::insecure_fast(),
    }
}

fn store_with(account: &str, password: &str) -> SharedStore {
    let mut store = SimilarStore::new();
    store.insert(build_similar_set(account, password, 4, 25, HashCost::insecure_fast(), 1).unwrap());
    Arc::new(RwLock::new(store))
}

#[tokio::test]
async fn honest_flow_returns_a_decodable_result() {
    let store = store_with("ann@x.com", "Tulip2020");
    let server = spawn_responder("127.0.0.1:0", store, ResponderConfig::default()).await.unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for (pw, expect) in [("Tulip2020", true), ("Tulip2021", true), ("zebra crossing", false)] {
        let (q, sess) = build_query(&cfg(), "ann@x.com", pw, 25, None, &mut rng).unwrap();
        let blob = query_responder(&server.endpoint(), &encode_query(&q).unwrap(), LIMIT).await.unwrap();
        let r = decode_response(Group::P192, &blob).unwrap();
        assert_eq!(decode_result(&sess, &r).unwrap(), expect, "{pw}");
    }
    // one ③ in, one ④ out, per request
    assert_eq!(server.stats().queries.load(Ordering::Relaxed), 3);
    assert_eq!(server.stats().results.load(Ordering::Relaxed), 3);
}

#[tokio::test(flavor = "multi_thread")]
async fn sixty_four_concurrent_large_queries() {
    let store = store_with("big@x.com", "Marathon42");
    let server = spawn_responder("127.0.0.1:0", store, ResponderConfig::default()).await.unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let (q, sess) = build_query(&cfg(), "big@x.com", "not-similar-at-all", 1000, None, &mut rng).unwrap();
    let bytes = Arc::new(encode_query(&q).unwrap());
    let mut tasks = tokio::task::JoinSet::new();
    for _ in 0..64 {
        let (ep, bytes) = (server.endpoint(), bytes.clone());
        tasks.spawn(async move { query_responder(&ep, &bytes, Duration::from_secs(600)).await });
    }
    let mut ok = 0;
    while let Some(res) = tasks.join_next().await {
        let blob = res.unwrap().expect("every concurrent query succeeds");
        let r = decode_response(Group::P192, &blob).unwrap();
        assert!(!decode_result(&sess, &r).unwrap());
        ok += 1;
    }
    assert_eq!(ok, 64);
}

#[tokio::test]
async fn malformed_input_gets_an_error_frame_and_service_survives() {
    let server = spawn_responder("127.0.0.1:0", store_with("a@b.c", "x"), ResponderConfig::default()).await.unwrap();
    let ep = server.endpoint();

    // bad magic: connection-level error
    let mut s = TcpStream::connect(&ep).await.unwrap();
    s.write_all(b"XXXXXXXXXXXX").await.unwrap();
    let f = read_frame(&mut s).await.unwrap();
    assert_eq!(f.opcode, opcode::RESPONDER_ERROR);
    assert_eq!(f.payload.len(), Ciphertext::encoded_len(Group::P192));

    // well-framed garbage payload
    let err = query_responder(&ep, &[0, 1, b'a', 0x02, 9, 9], LIMIT).await.unwrap_err();
    assert_eq!(err.code(), Some(ErrorCode::Malformed));

    // wrong opcode
    let mut s = TcpStream::connect(&ep).await.unwrap();
    write_frame(&mut s, &Frame::new(opcode::AUDIT, vec![])).await.unwrap();
    assert_eq!(read_frame(&mut s).await.unwrap().opcode, opcode::RESPONDER_ERROR);

    // still serving; an account it holds no set for never matches
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let bloom = BloomParams::new(10, 2, vec![1]).unwrap();
    let (q, sess) = build_query_for_indices(Group::P192, "nobody@b.c", bloom, [1, 4].into_iter().collect(), None, &mut rng).unwrap();
    let blob = query_responder(&ep, &encode_query(&q).unwrap(), LIMIT).await.unwrap();
    assert!(!decode_result(&sess, &decode_response(Group::P192, &blob).unwrap()).unwrap());
}

#[tokio::test]
async fn rigged_responder_always_says_member() {
    let config = ResponderConfig {
        behavior: Behavior::AlwaysMember,
        ..ResponderConfig::default()
    };
    let server = spawn_responder("127.0.0.1:0", Arc::default(), config).await.unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let (q, sess) = build_query(&cfg(), "c@d.e", "anything", 3, None, &mut rng).unwrap();
    let blob = query_responder(&server.endpoint(), &encode_query(&q).unwrap(), LIMIT).await.unwrap();
    assert!(decode_result(&sess, &decode_response(Group::P192, &blob).unwrap()).unwrap());
}

#[tokio::test]
async fn unreachable_responder_times_out_or_fails() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let ep = listener.local_addr().unwrap().to_string();
    drop(listener);
    let err = query_responder(&ep, &[1], Duration::from_millis(500)).await.unwrap_err();
    assert!(err.is_transport(), "{err}");
    assert!(matches!(err, NetError::Io(_) | NetError::Timeout));
}
