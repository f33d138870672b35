// SPDX-License-Identifier: Apache-2.0

//! Parameter planning for reuse queries.
//!
//! Given a response-time goal, the planner picks how many responders to ask
//! (ρ) and how many Bloom slots each may fill (n) so that the chance of
//! detecting a reused password is as high as possible. Everything here is
//! generic over the float type; `f64` aliases are provided for callers.

mod curve;
mod model;
mod optimize;

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use thiserror::Error;

pub use curve::{tdr, ReuseCurve, DEFAULT_ANCHORS};
pub use model::{fit_model, samples_from_csv, LatencyModel, Sample};
pub use optimize::{optimize, PlanResult};

/// Floating-point scalar the planner computes in.
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("representable constant")
    }
}

impl<T> Real for T where T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("no (n, rho) meets the response-time goal")]
    Infeasible,
    #[error("no responders are registered for the account")]
    NoResponders,
    #[error("need at least {need} samples spanning both axes, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("invalid reuse curve: {0}")]
    InvalidCurve(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type ReuseCurveF64 = ReuseCurve<f64>;
pub type LatencyModelF64 = LatencyModel<f64>;
pub type PlanResultF64 = PlanResult<f64>;
pub type SampleF64 = Sample<f64>;

pub type ReuseCurveF32 = ReuseCurve<f32>;
pub type LatencyModelF32 = LatencyModel<f32>;
pub type PlanResultF32 = PlanResult<f32>;
