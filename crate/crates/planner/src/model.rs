// SPDX-License-Identifier: Apache-2.0

use crate::{PlanError, Real};

/// `t(ρ, n) = c0 + c1 n + c2 ρ + c3 n ρ`, in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatencyModel<T> {
    pub c0: T,
    pub c1: T,
    pub c2: T,
    pub c3: T,
    /// Root-mean-square residual of the fit, when known.
    pub rmse: Option<T>,
}

/// One timing observation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample<T> {
    pub rho: T,
    pub n: T,
    pub time: T,
}

impl<T: Real> LatencyModel<T> {
    pub fn new(c0: T, c1: T, c2: T, c3: T) -> Self {
        LatencyModel {
            c0,
            c1,
            c2,
            c3,
            rmse: None,
        }
    }

    /// Coefficients measured with a trusted directory (direct transport).
    pub fn trusted() -> Self {
        LatencyModel {
            rmse: Some(T::lit(0.1276)),
            ..Self::new(T::lit(6.4595e-3), T::lit(2.2885e-3), T::lit(1.0271e-3), T::lit(2.0336e-5))
        }
    }

    /// Coefficients measured with an untrusted directory (anonymized transport).
    pub fn untrusted() -> Self {
        LatencyModel {
            rmse: Some(T::lit(0.4547)),
            ..Self::new(T::lit(1.5507), T::lit(5.8834e-3), T::lit(2.6209e-3), T::lit(4.7135e-5))
        }
    }

    pub fn predict(&self, rho: T, n: T) -> T {
        self.c0 + self.c1 * n + self.c2 * rho + self.c3 * n * rho
    }

    pub fn coefficients(&self) -> [T; 4] {
        [self.c0, self.c1, self.c2, self.c3]
    }

    /// Parses `key = value` lines for `c0`..`c3` and optional `rmse`.
    pub fn parse(text: &str) -> Result<Self, PlanError> {
        let mut c = [None; 4];
        let mut rmse = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| PlanError::Parse { line: i + 1, msg };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let v: f64 = v.trim().parse().map_err(|_| err(format!("bad number for {}", k.trim())))?;
            match k.trim() {
                "c0" => c[0] = Some(T::lit(v)),
                "c1" => c[1] = Some(T::lit(v)),
                "c2" => c[2] = Some(T::lit(v)),
                "c3" => c[3] = Some(T::lit(v)),
                "rmse" => rmse = Some(T::lit(v)),
                other => return Err(err(format!("unknown key {other}"))),
            }
        }
        let get = |i: usize| {
            c[i].ok_or(PlanError::Parse {
                line: 0,
                msg: format!("missing c{i}"),
            })
        };
        Ok(LatencyModel {
            c0: get(0)?,
            c1: get(1)?,
            c2: get(2)?,
            c3: get(3)?,
            rmse,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "c0 = {}\nc1 = {}\nc2 = {}\nc3 = {}\n",
            self.c0, self.c1, self.c2, self.c3
        );
        if let Some(r) = self.rmse {
            s.push_str(&format!("rmse = {r}\n"));
        }
        s
    }
}

const MIN_SAMPLES: usize = 8;

/// Least-squares fit of the four coefficients by Householder QR.
pub fn fit_model<T: Real>(samples: &[Sample<T>]) -> Result<LatencyModel<T>, PlanError> {
    let m = samples.len();
    let distinct = |f: fn(&Sample<T>) -> T| {
        let first = f(&samples[0]);
        samples.iter().any(|s| f(s) != first)
    };
    if m < MIN_SAMPLES || !distinct(|s| s.rho) || !distinct(|s| s.n) {
        return Err(PlanError::InsufficientSamples {
            need: MIN_SAMPLES,
            got: m,
        });
    }

    // column-major design matrix [1, n, rho, n*rho]
    let mut a: Vec<Vec<T>> = vec![
        vec![T::one(); m],
        samples.iter().map(|s| s.n).collect(),
        samples.iter().map(|s| s.rho).collect(),
        samples.iter().map(|s| s.n * s.rho).collect(),
    ];
    let col_norms: Vec<T> = a.iter().map(|c| norm(c)).collect();
    let mut b: Vec<T> = samples.iter().map(|s| s.time).collect();

    for k in 0..4 {
        let alpha = norm(&a[k][k..]);
        let tol = T::epsilon().sqrt() * col_norms[k];
        if alpha <= tol {
            return Err(PlanError::RankDeficient);
        }
        let alpha = if a[k][k] > T::zero() { -alpha } else { alpha };
        let mut v: Vec<T> = a[k][k..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for col in a.iter_mut().skip(k) {
            reflect(&v, vnorm2, two, &mut col[k..]);
        }
        reflect(&v, vnorm2, two, &mut b[k..]);
        if a[k][k].abs() <= tol {
            return Err(PlanError::RankDeficient);
        }
    }

    // back substitution on the upper triangle
    let mut c = [T::zero(); 4];
    for i in (0..4).rev() {
        let mut acc = b[i];
        for j in (i + 1)..4 {
            acc = acc - a[j][i] * c[j];
        }
        c[i] = acc / a[i][i];
    }

    let mut model = LatencyModel::new(c[0], c[1], c[2], c[3]);
    let ssr = samples.iter().fold(T::zero(), |acc, s| {
        let r = s.time - model.predict(s.rho, s.n);
        acc + r * r
    });
    model.rmse = Some((ssr / T::from_usize(m).unwrap()).sqrt());
    Ok(model)
}

fn norm<T: Real>(v: &[T]) -> T {
    // scaled to avoid overflow in f32
    let scale = v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let sum = v.iter().fold(T::zero(), |acc, &x| {
        let y = x / scale;
        acc + y * y
    });
    scale * sum.sqrt()
}

fn reflect<T: Real>(v: &[T], vnorm2: T, two: T, x: &mut [T]) {
    let dot = v.iter().zip(x.iter()).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
    let f = two * dot / vnorm2;
    for (xi, &vi) in x.iter_mut().zip(v) {
        *xi = *xi - f * vi;
    }
}

/// Reads `rho`, `n` and `time` columns from CSV with a header row. When
/// `phase` is given, only rows whose `phase` column matches are kept.
pub fn samples_from_csv<T: Real>(text: &str, phase: Option<&str>) -> Result<Vec<Sample<T>>, PlanError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| PlanError::Parse { line: 1, msg: e.to_string() })?
        .clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or(PlanError::Parse {
            line: 1,
            msg: format!("missing column {name}"),
        })
    };
    let (ri, ni, ti) = (col("rho")?, col("n")?, col("time")?);
    let pi = headers.iter().position(|h| h == "phase");
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| PlanError::Parse { line, msg: e.to_string() })?;
        if let (Some(want), Some(pi)) = (phase, pi) {
            if rec.get(pi) != Some(want) {
                continue;
            }
        }
        let num = |j: usize| -> Result<T, PlanError> {
            rec.get(j)
                .and_then(|s| s.parse::<f64>().ok())
                .map(T::lit)
                .ok_or(PlanError::Parse {
                    line,
                    msg: "bad number".into(),
                })
        };
        out.push(Sample {
            rho: num(ri)?,
            n: num(ni)?,
            time: num(ti)?,
        });
    }
    Ok(out)
}
