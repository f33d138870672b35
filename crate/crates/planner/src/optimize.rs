// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;

use crate::curve::{tdr, ReuseCurve};
use crate::model::LatencyModel;
use crate::{PlanError, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanResult<T> {
    /// Bloom slots each responder may fill.
    pub n: u64,
    /// Responders to query.
    pub rho: u32,
    pub tdr: T,
    pub t_predicted: T,
    /// Honeywords per account.
    pub d: u32,
}

impl<T: Real> PlanResult<T> {
    /// Ordering used to pick the winner: tdr, then ρ, then n, then lower time.
    fn rank(&self, other: &Self) -> Ordering {
        self.tdr
            .partial_cmp(&other.tdr)
            .unwrap_or(Ordering::Equal)
            .then(self.rho.cmp(&other.rho))
            .then(self.n.cmp(&other.n))
            .then(
                other
                    .t_predicted
                    .partial_cmp(&self.t_predicted)
                    .unwrap_or(Ordering::Equal),
            )
    }
}

/// Maximizes tdr over `ρ ∈ [1, responders]` and `n ∈ {(d+1)j}` subject to
/// `model.predict(ρ, n) ≤ t_goal`.
///
/// `n/(d+1)` is searched up to the curve's last anchor; past it the curve
/// is flat and larger `n` only costs time.
pub fn optimize<T: Real>(
    t_goal: T,
    responders: u32,
    d: u32,
    model: &LatencyModel<T>,
    curve: &ReuseCurve<T>,
) -> Result<PlanResult<T>, PlanError> {
    if responders == 0 {
        return Err(PlanError::NoResponders);
    }
    if !(t_goal > model.c0 + model.c1 + model.c2 + model.c3) {
        return Err(PlanError::Infeasible);
    }
    let step = u64::from(d) + 1;
    let j_max = curve.last_x().ceil().to_u64().unwrap_or(1).max(1);
    let mut best: Option<PlanResult<T>> = None;
    for rho in 1..=responders {
        let rho_t = T::from_u32(rho).unwrap();
        for j in 1..=j_max {
            let n = step * j;
            let t = model.predict(rho_t, T::from_u64(n).unwrap());
            if t > t_goal {
                break;
            }
            let p = curve.probability(T::from_u64(j).unwrap());
            let cand = PlanResult {
                n,
                rho,
                tdr: tdr(p, rho),
                t_predicted: t,
                d,
            };
            if best.as_ref().map_or(true, |b| cand.rank(b) == Ordering::Greater) {
                best = Some(cand);
            }
        }
    }
    best.ok_or(PlanError::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        let curve = ReuseCurve::<f64>::default();
        let r = optimize(0.02, 26, 0, &LatencyModel::trusted(), &curve).unwrap();
        assert_eq!((r.n, r.rho), (1, 10));
        assert!((r.tdr - 0.985).abs() < 1e-3);

        assert_eq!(
            optimize(0.03, 26, 9, &LatencyModel::trusted(), &curve),
            Err(PlanError::Infeasible)
        );

        let r = optimize(1.62, 26, 9, &LatencyModel::untrusted(), &curve).unwrap();
        assert_eq!((r.n, r.rho), (10, 3));
        assert!((r.tdr - 0.716).abs() < 1e-3);
    }

    #[test]
    fn guards() {
        let curve = ReuseCurve::<f64>::default();
        let m = LatencyModel::trusted();
        assert_eq!(optimize(10.0, 0, 0, &m, &curve), Err(PlanError::NoResponders));
        let floor = m.c0 + m.c1 + m.c2 + m.c3;
        assert_eq!(optimize(floor, 26, 0, &m, &curve), Err(PlanError::Infeasible));
    }

    #[test]
    fn single_precision_agrees() {
        let a = optimize(1.7, 26, 4, &LatencyModel::<f64>::untrusted(), &ReuseCurve::default()).unwrap();
        let b = optimize(1.7f32, 26, 4, &LatencyModel::<f32>::untrusted(), &ReuseCurve::default()).unwrap();
        assert!((a.tdr - b.tdr as f64).abs() < 1e-4);
    }
}
