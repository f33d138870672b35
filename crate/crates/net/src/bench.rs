// SPDX-License-Identifier: Apache-2.0

//! Timing harness over in-process responders.
//!
//! Each request builds ③, ships the encoded bytes to ρ responder threads
//! (each decodes, responds and encodes ④ after the profile's delay), then
//! decodes every ④. Rows are `(rho, n, curve, phase, time, msg_bytes)`.

use std::io::Write;
use std::time::{Duration, Instant};

use pwreuse_core::group::Group;
use pwreuse_core::psmt::{build_query, decode_result, respond, QueryConfig};
use pwreuse_core::similarity::{HashCost, SimilarSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::codec::{decode_query, decode_response, encode_query, encode_response};
use crate::latency::{Direction, LatencyInjector, LatencyProfile};

#[derive(Clone, Debug)]
pub struct BenchScenario {
    pub group: Group,
    pub ns: Vec<u32>,
    pub rhos: Vec<u32>,
    pub reps: u32,
    pub k: u32,
    pub hash_cost: HashCost,
    pub profile: LatencyProfile,
    /// A response qualifies when it arrives within this long.
    pub qualifying_threshold: Duration,
    pub seed: u64,
}

impl Default for BenchScenario {
    fn default() -> Self {
        BenchScenario {
            group: Group::P192,
            ns: vec![1, 10, 100],
            rhos: vec![1, 8],
            reps: 3,
            k: pwreuse_core::bloom::DEFAULT_K,
            hash_cost: HashCost::insecure_fast(),
            profile: LatencyProfile::none(),
            qualifying_threshold: Duration::from_secs(5),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub rho: u32,
    pub n: u32,
    pub curve: String,
    /// `query`, `respond`, `decode` or `total`.
    pub phase: &'static str,
    /// Seconds.
    pub time: f64,
    pub msg_bytes: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Qualifying {
    pub rho: u32,
    pub n: u32,
    pub responses: u64,
    pub qualifying: u64,
    /// Qualifying responses per second of wall clock.
    pub per_second: f64,
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub qualifying: Vec<Qualifying>,
}

impl BenchReport {
    /// Mean time of `phase` at `(rho, n)`.
    pub fn mean(&self, rho: u32, n: u32, phase: &str) -> Option<f64> {
        let xs: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.rho == rho && r.n == n && r.phase == phase)
            .map(|r| r.time)
            .collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    }

    pub fn median(&self, phase: &str) -> Option<f64> {
        let mut xs: Vec<f64> = self.rows.iter().filter(|r| r.phase == phase).map(|r| r.time).collect();
        xs.sort_by(f64::total_cmp);
        xs.get(xs.len() / 2).copied()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["rho", "n", "curve", "phase", "time", "msg_bytes"])?;
        for r in &self.rows {
            out.write_record([
                r.rho.to_string(),
                r.n.to_string(),
                r.curve.clone(),
                r.phase.to_string(),
                format!("{:.9}", r.time),
                r.msg_bytes.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn random_set(n: u32, rng: &mut ChaCha20Rng) -> SimilarSet {
    let mut s = SimilarSet::empty("bench@example.com");
    s.entries = (0..n).map(|_| rng.random()).collect();
    s.capacity = n;
    s
}

pub fn bench_run(s: &BenchScenario) -> BenchReport {
    let mut rng = ChaCha20Rng::seed_from_u64(s.seed);
    let latency = LatencyInjector::new(s.profile, s.seed ^ 0x5eed);
    let cfg = QueryConfig {
        group: s.group,
        k: s.k,
        hash_cost: s.hash_cost,
    };
    let curve = s.group.to_string();
    let mut report = BenchReport::default();
    for &n in &s.ns {
        for &rho in &s.rhos {
            let sets: Vec<SimilarSet> = (0..rho).map(|_| random_set(n, &mut rng)).collect();
            let mut q = Qualifying {
                rho,
                n,
                responses: 0,
                qualifying: 0,
                per_second: 0.0,
            };
            let mut wall = 0.0;
            for _ in 0..s.reps {
                let row = |phase, time: Duration, msg_bytes| BenchRow {
                    rho,
                    n,
                    curve: curve.clone(),
                    phase,
                    time: time.as_secs_f64(),
                    msg_bytes,
                };
                let start = Instant::now();
                let pw = format!("pw-{}", rng.random::<u64>());
                let (query, session) = build_query(&cfg, "bench@example.com", &pw, n, None, &mut rng)
                    .expect("bench query parameters are valid");
                let bytes = encode_query(&query).expect("encodable query");
                let built = start.elapsed();
                let msg = bytes.len() as u64;
                report.rows.push(row("query", built, msg));

                let delays: Vec<(Duration, Duration)> = (0..rho)
                    .map(|_| (latency.draw(Direction::Outbound), latency.draw(Direction::Inbound)))
                    .collect();
                let seeds: Vec<u64> = (0..rho).map(|_| rng.random()).collect();
                let results: Vec<(Vec<u8>, Duration, Duration)> = std::thread::scope(|scope| {
                    let handles: Vec<_> = sets
                        .iter()
                        .zip(&delays)
                        .zip(&seeds)
                        .map(|((set, &(out, back)), &seed)| {
                            let bytes = &bytes;
                            scope.spawn(move || {
                                let t0 = Instant::now();
                                std::thread::sleep(out);
                                let work = Instant::now();
                                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                                let q = decode_query(bytes).expect("own encoding decodes");
                                let r = respond(&q, set, &mut rng).expect("honest query");
                                let blob = encode_response(q.pk.group, &r).expect("encodable response");
                                let took = work.elapsed();
                                std::thread::sleep(back);
                                (blob, took, t0.elapsed())
                            })
                        })
                        .collect();
                    handles.into_iter().map(|h| h.join().expect("responder thread")).collect()
                });

                let t_dec = Instant::now();
                for (blob, took, arrival) in &results {
                    report.rows.push(row("respond", *took, blob.len() as u64));
                    let r = decode_response(s.group, blob).expect("own encoding decodes");
                    decode_result(&session, &r).expect("valid response");
                    q.responses += 1;
                    if built + *arrival <= s.qualifying_threshold {
                        q.qualifying += 1;
                    }
                }
                report.rows.push(row("decode", t_dec.elapsed(), 0));
                let total = start.elapsed();
                wall += total.as_secs_f64();
                report.rows.push(row("total", total, msg));
            }
            q.per_second = if wall > 0.0 { q.qualifying as f64 / wall } else { 0.0 };
            report.qualifying.push(q);
        }
    }
    report
}
