// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use pwreuse_planner::{
    fit_model, optimize, tdr, LatencyModelF64, PlanError, ReuseCurveF64, SampleF64,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

type Column = (Vec<Option<u64>>, Vec<Option<u32>>, Vec<Option<f64>>);

fn some<T: Copy>(v: &[T]) -> Vec<Option<T>> {
    v.iter().map(|&x| Some(x)).collect()
}

fn none<T>(k: usize) -> Vec<Option<T>> {
    (0..k).map(|_| None).collect()
}

fn cat<T>(a: Vec<Option<T>>, b: Vec<Option<T>>) -> Vec<Option<T>> {
    a.into_iter().chain(b).collect()
}

/// Reference choices (n, ρ, tdr) per honeyword count, one entry per goal.
fn trusted_table() -> Vec<(u32, Column)> {
    vec![
        (0, (some(&[1, 1, 2, 2, 5, 9, 13, 16, 20, 23]), some(&[1, 10, 17, 26, 26, 26, 26, 26, 26, 26]), cat(some(&[0.343, 0.985]), some(&[1.0; 8])))),
        (4, (cat(none(1), some(&[5, 5, 5, 5, 10, 10, 15, 20, 20])), cat(none(1), some(&[1, 10, 19, 26, 24, 26, 26, 26, 26])), cat(none(1), cat(some(&[0.343, 0.985]), some(&[1.0; 7]))))),
        (9, (cat(none(3), some(&[10, 10, 10, 10, 10, 20, 20])), cat(none(3), some(&[8, 16, 24, 26, 26, 26, 26])), cat(none(3), cat(some(&[0.965, 0.999]), some(&[1.0; 5]))))),
    ]
}

fn untrusted_table() -> Vec<(u32, Column)> {
    vec![
        (0, (some(&[1, 2, 2, 5, 8, 11, 14, 17, 19, 22]), cat(some(&[16, 21]), some(&[26; 8])), cat(some(&[0.999]), some(&[1.0; 9])))),
        (4, (some(&[5, 5, 5, 5, 5, 10, 10, 15, 15, 20]), cat(some(&[6, 13, 20]), some(&[26; 7])), cat(some(&[0.920, 0.996]), some(&[1.0; 8])))),
        (9, (cat(none(1), some(&[10, 10, 10, 10, 10, 10, 10, 20, 20])), cat(none(1), some(&[3, 9, 16, 22, 26, 26, 26, 25, 26])), cat(none(1), cat(some(&[0.716, 0.977, 0.999]), some(&[1.0; 6]))))),
    ]
}

fn check_table(model: &LatencyModelF64, goals: &[f64], table: Vec<(u32, Column)>) -> usize {
    let curve = ReuseCurveF64::default();
    let mut cells = 0;
    for (d, (ns, rhos, tdrs)) in table {
        for (i, &goal) in goals.iter().enumerate() {
            let got = optimize(goal, 26, d, model, &curve);
            match (ns[i], rhos[i], tdrs[i]) {
                (Some(n), Some(rho), Some(printed)) => {
                    let got = got.unwrap_or_else(|e| panic!("d={d} goal={goal}: {e}"));
                    assert!((got.tdr - printed).abs() <= 0.02, "d={d} goal={goal}: {} vs {printed}", got.tdr);
                    assert!(got.t_predicted <= goal);
                    let t = model.predict(rho as f64, n as f64);
                    assert!(t <= goal, "printed ({n},{rho}) takes {t} > {goal}");
                    cells += 1;
                }
                _ => assert_eq!(got, Err(PlanError::Infeasible), "d={d} goal={goal}"),
            }
        }
    }
    cells
}

#[test]
fn reproduces_reference_trusted_choices() {
    let goals: Vec<f64> = (1..=10).map(|i| i as f64 * 0.01).collect();
    assert_eq!(check_table(&LatencyModelF64::trusted(), &goals, trusted_table()), 26);
}

#[test]
fn reproduces_reference_untrusted_choices() {
    let goals: Vec<f64> = (0..10).map(|i| 1.60 + i as f64 * 0.02).collect();
    assert_eq!(check_table(&LatencyModelF64::untrusted(), &goals, untrusted_table()), 29);
}

fn design() -> Vec<(f64, f64)> {
    let ns: Vec<f64> = (0..=12).map(|e| (1u32 << e) as f64).collect();
    let rhos: Vec<f64> = std::iter::once(1.0).chain((1..=16).map(|i| 8.0 * i as f64)).collect();
    let mut out = Vec::new();
    for &n in &ns {
        for &rho in &rhos {
            out.push((rho, n));
        }
    }
    out
}

#[test]
fn noiseless_fit_is_exact() {
    let truth = LatencyModelF64::untrusted();
    let samples: Vec<SampleF64> = design()
        .into_iter()
        .map(|(rho, n)| SampleF64 { rho, n, time: truth.predict(rho, n) })
        .collect();
    let fit = fit_model(&samples).unwrap();
    for (a, b) in fit.coefficients().iter().zip(truth.coefficients()) {
        assert!(((a - b) / b).abs() < 5e-7, "{a} vs {b}");
    }
    assert!(fit.rmse.unwrap() < 1e-9);
}

#[test]
fn noisy_fit_within_five_percent() {
    let truth = LatencyModelF64::untrusted();
    let noise = Normal::new(0.0, 0.05).unwrap();
    for seed in 0..20u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut samples = Vec::new();
        for _ in 0..6 {
            for (rho, n) in design() {
                samples.push(SampleF64 { rho, n, time: truth.predict(rho, n) + noise.sample(&mut rng) });
            }
        }
        let fit = fit_model(&samples).unwrap();
        for (a, b) in fit.coefficients().iter().zip(truth.coefficients()) {
            assert!(((a - b) / b).abs() < 0.05, "seed {seed}: {a} vs {b}");
        }
        let rmse = fit.rmse.unwrap();
        assert!((rmse - 0.05).abs() < 0.01, "rmse {rmse}");
    }
}

#[test]
fn too_few_samples() {
    let s: Vec<SampleF64> = (0..7).map(|i| SampleF64 { rho: i as f64, n: (i * i) as f64, time: 1.0 }).collect();
    assert!(matches!(fit_model(&s), Err(PlanError::InsufficientSamples { need: 8, got: 7 })));
}

fn model_strategy() -> impl Strategy<Value = LatencyModelF64> {
    (0.0..2.0f64, 1e-4..1e-2f64, 1e-4..1e-2f64, 1e-6..1e-4f64)
        .prop_map(|(a, b, c, d)| LatencyModelF64::new(a, b, c, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tdr_is_monotone(rho in 1u32..40, x in 1.0..6000.0f64, dx in 0.0..500.0f64) {
        let c = ReuseCurveF64::default();
        let (p, q) = (c.probability(x), c.probability(x + dx));
        prop_assert!(q >= p);
        prop_assert!(tdr(q, rho) >= tdr(p, rho));
        prop_assert!(tdr(p, rho + 1) >= tdr(p, rho));
    }

    #[test]
    fn prediction_is_monotone(m in model_strategy(), rho in 0.0..50.0f64, n in 0.0..5000.0f64) {
        prop_assert!(m.predict(rho + 1.0, n) > m.predict(rho, n));
        prop_assert!(m.predict(rho, n + 1.0) > m.predict(rho, n));
    }

    #[test]
    fn plan_is_feasible_and_undominated(
        m in model_strategy(),
        slack in 0.0..0.5f64,
        responders in 1u32..30,
        d in 0u32..6,
    ) {
        let curve = ReuseCurveF64::default();
        let goal = m.c0 + slack;
        match optimize(goal, responders, d, &m, &curve) {
            Ok(plan) => {
                prop_assert!(plan.n >= 1 && plan.n % (d as u64 + 1) == 0);
                prop_assert!(plan.rho >= 1 && plan.rho <= responders);
                prop_assert!(plan.t_predicted <= goal);
                let j = plan.n / (d as u64 + 1);
                prop_assert_eq!(plan.tdr, tdr(curve.probability(j as f64), plan.rho));
                // brute-force the neighbourhood for a strictly better feasible point
                for rho in 1..=responders {
                    for j in 1..=200u64 {
                        let n = (d as u64 + 1) * j;
                        if m.predict(rho as f64, n as f64) <= goal {
                            prop_assert!(tdr(curve.probability(j as f64), rho) <= plan.tdr);
                        }
                    }
                }
            }
            Err(e) => {
                prop_assert_eq!(e, PlanError::Infeasible);
                prop_assert!(m.predict(1.0, d as f64 + 1.0) > goal);
            }
        }
    }
}
