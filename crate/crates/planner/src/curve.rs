// SPDX-License-Identifier: Apache-2.0

use crate::{PlanError, Real};

/// Probability that a responder's similar set covers the password, sampled
/// at `x = n/(d+1)` variants per seed.
pub const DEFAULT_ANCHORS: [(f64, f64); 5] = [
    (1.0, 0.343),
    (10.0, 0.409),
    (100.0, 0.4305),
    (1000.0, 0.4527),
    (5000.0, 0.4677),
];

/// Piecewise-linear in `ln x`, clamped at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct ReuseCurve<T> {
    anchors: Vec<(T, T)>,
}

impl<T: Real> Default for ReuseCurve<T> {
    fn default() -> Self {
        ReuseCurve::new(
            DEFAULT_ANCHORS
                .iter()
                .map(|&(x, p)| (T::lit(x), T::lit(p)))
                .collect(),
        )
        .expect("default anchors are valid")
    }
}

impl<T: Real> ReuseCurve<T> {
    /// Requires strictly increasing positive `x`, non-decreasing `p` in `[0, 1]`.
    pub fn new(anchors: Vec<(T, T)>) -> Result<Self, PlanError> {
        if anchors.is_empty() {
            return Err(PlanError::InvalidCurve("no anchors".into()));
        }
        for (x, p) in &anchors {
            if *x <= T::zero() || !x.is_finite() {
                return Err(PlanError::InvalidCurve(format!("x = {x} must be positive")));
            }
            if *p < T::zero() || *p > T::one() || p.is_nan() {
                return Err(PlanError::InvalidCurve(format!("p = {p} outside [0, 1]")));
            }
        }
        for w in anchors.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(PlanError::InvalidCurve("x must be strictly increasing".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(PlanError::InvalidCurve("p must be non-decreasing".into()));
            }
        }
        Ok(ReuseCurve { anchors })
    }

    /// Parses `x,p` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, PlanError> {
        let mut anchors = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| PlanError::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let (x, p) = line.split_once(',').ok_or_else(|| err("expected `x,p`"))?;
            let x: f64 = x.trim().parse().map_err(|_| err("bad x"))?;
            let p: f64 = p.trim().parse().map_err(|_| err("bad p"))?;
            anchors.push((T::lit(x), T::lit(p)));
        }
        ReuseCurve::new(anchors)
    }

    pub fn anchors(&self) -> &[(T, T)] {
        &self.anchors
    }

    pub fn last_x(&self) -> T {
        self.anchors[self.anchors.len() - 1].0
    }

    pub fn probability(&self, x: T) -> T {
        let first = self.anchors[0];
        let last = self.anchors[self.anchors.len() - 1];
        if x <= first.0 {
            return first.1;
        }
        if x >= last.0 {
            return last.1;
        }
        for w in self.anchors.windows(2) {
            let ((x0, p0), (x1, p1)) = (w[0], w[1]);
            if x <= x1 {
                let t = (x.ln() - x0.ln()) / (x1.ln() - x0.ln());
                return p0 + t * (p1 - p0);
            }
        }
        last.1
    }
}

/// `1 - (1 - p)^ρ`: chance that at least one of ρ responders detects reuse.
pub fn tdr<T: Real>(p: T, rho: u32) -> T {
    T::one() - (T::one() - p).powi(rho as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_values() {
        let c = ReuseCurve::<f64>::default();
        assert_eq!(c.probability(1.0), 0.343);
        assert!((c.probability(10.0) - 0.409).abs() < 1e-12);
        assert!((c.probability(1000.0) - 0.4527).abs() < 1e-12);
        assert_eq!(c.probability(0.2), 0.343);
        assert_eq!(c.probability(1e6), 0.4677);
    }

    #[test]
    fn tdr_examples() {
        assert!((tdr(0.343f64, 1) - 0.343).abs() < 1e-12);
        assert_eq!(tdr(0.6, 0), 0.0);
        assert!((tdr(0.343f64, 10) - 0.985).abs() < 5e-4);
    }

    #[test]
    fn rejects_bad_anchors() {
        assert!(ReuseCurve::<f64>::new(vec![(1.0, 0.5), (1.0, 0.6)]).is_err());
        assert!(ReuseCurve::<f64>::new(vec![(1.0, 0.5), (2.0, 0.4)]).is_err());
        assert!(ReuseCurve::<f64>::new(vec![(0.0, 0.5)]).is_err());
        assert!(ReuseCurve::<f64>::new(vec![(1.0, 1.5)]).is_err());
    }

    #[test]
    fn parses_curve_files() {
        let c = ReuseCurve::<f64>::parse("# fig data\n1,0.3\n10, 0.4\n\n").unwrap();
        assert_eq!(c.anchors().len(), 2);
        assert!(matches!(
            ReuseCurve::<f64>::parse("1;0.3"),
            Err(PlanError::Parse { line: 1, .. })
        ));
    }
}
