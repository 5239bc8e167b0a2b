//! Limit constants for the scaled maximum at `p = q = 1/2` and numerical
//! convergence diagnostics toward them.
//!
//! `E(M_n)/√n → √(π/8)` and `E(M_n²)/n → G/2` (Catalan's constant `G`) are
//! Abel limits. The report checks ordinary convergence numerically, which is
//! consistent with those limits but does not prove them.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::montecarlo::{derive_seed, estimate_moments, SimConfig, SimError};
use crate::params::{Mode, Params};
use crate::walk::{
    default_a_cap, joint_dist_with_limit, max_dist, moment, WalkError, DEFAULT_MAX_STATES,
};

/// Upper bound on `n × states` for a DP row.
pub const DP_WORK_LIMIT: f64 = 5e9;

/// Catalan's constant by the Cohen–Rodriguez Villegas–Zagier acceleration of
/// `Σ_{k≥0} (-1)^k/(2k+1)²`.
pub fn catalan_constant() -> f64 {
    const TERMS: usize = 24;
    let n = TERMS as f64;
    let d = (3.0 + 8f64.sqrt()).powf(n);
    let d = 0.5 * (d + 1.0 / d);
    let (mut b, mut c, mut s) = (-1.0, -d, 0.0);
    for k in 0..TERMS {
        let kf = k as f64;
        c = b - c;
        s += c / ((2.0 * kf + 1.0) * (2.0 * kf + 1.0));
        b *= (kf + n) * (kf - n) / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

/// `t·Σ_{a≥1} sech(a t)`, stopping once `sech(a t) < 1e-18`.
pub fn sech_sum(t: f64) -> f64 {
    assert!(t > 0.0, "sech_sum needs t > 0");
    let mut total = 0.0;
    let mut a = 1.0;
    loop {
        let term = 1.0 / (a * t).cosh();
        if term < 1e-18 {
            break;
        }
        total += term;
        a += 1.0;
    }
    t * total
}

/// `(√(π/8), G/2)`.
pub fn limit_constants() -> (f64, f64) {
    (
        (std::f64::consts::PI / 8.0).sqrt(),
        catalan_constant() / 2.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dp,
    Mc,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dp" => Ok(Method::Dp),
            "mc" => Ok(Method::Mc),
            other => Err(format!("unknown method {other:?} (expected dp|mc)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error("n list is empty")]
    NoRows,
    #[error(
        "dp at n={n} needs about {work:.2e} cell updates (limit {limit:.0e}); use --method mc"
    )]
    DpTooLarge { n: usize, work: f64, limit: f64 },
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRow {
    pub n: usize,
    pub method: Method,
    /// `E(M_n)/√n`.
    pub estimate_first: f64,
    /// `E(M_n²)/n`.
    pub estimate_second: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr_first: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr_second: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub delta_first: f64,
    pub delta_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub p: String,
    pub ell: usize,
    pub reference_first: f64,
    pub reference_second: f64,
    /// The references are limits at `p = 1/2`; other `p` rows are exploratory.
    pub reference_applies: bool,
    pub rows: Vec<LimitRow>,
}

fn dp_row(params: &Params, n: usize) -> Result<(f64, f64), AsymptoticsError> {
    let reach = params.arrival_count(n);
    let top = match params.mode() {
        Mode::Float => default_a_cap(n, params.ell()).min(reach),
        Mode::Exact => reach,
    };
    let work = n as f64 * ((top + 1) * (top + 2) / 2) as f64;
    if work > DP_WORK_LIMIT {
        return Err(AsymptoticsError::DpTooLarge {
            n,
            work,
            limit: DP_WORK_LIMIT,
        });
    }
    let moments = match params.mode() {
        Mode::Float => {
            let dist = max_dist(&joint_dist_with_limit::<f64>(
                params,
                n,
                None,
                DEFAULT_MAX_STATES,
            )?);
            (moment(&dist, 1), moment(&dist, 2))
        }
        Mode::Exact => {
            let table = joint_dist_with_limit::<BigRational>(params, n, None, DEFAULT_MAX_STATES)?;
            let dist = max_dist(&table);
            let to_f64 = |r: BigRational| r.to_f64().unwrap_or(f64::NAN);
            (to_f64(moment(&dist, 1)), to_f64(moment(&dist, 2)))
        }
    };
    Ok(moments)
}

/// Scaled moments of `M_n` for each `n` (sorted, deduplicated). Monte Carlo
/// rows use seed `derive_seed(seed, n)`, so each row can be rerun alone.
pub fn convergence_report(
    params: &Params,
    n_list: &[usize],
    method: Method,
    reps: u64,
    seed: u64,
) -> Result<LimitReport, AsymptoticsError> {
    let mut ns: Vec<usize> = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() {
        return Err(AsymptoticsError::NoRows);
    }
    let (first_ref, second_ref) = limit_constants();
    let mut rows = Vec::with_capacity(ns.len());
    for n in ns {
        let scale = (n as f64).sqrt();
        let row = match method {
            Method::Dp => {
                let (m1, m2) = dp_row(params, n)?;
                LimitRow {
                    n,
                    method,
                    estimate_first: m1 / scale,
                    estimate_second: m2 / n as f64,
                    stderr_first: None,
                    stderr_second: None,
                    seed: None,
                    delta_first: 0.0,
                    delta_second: 0.0,
                }
            }
            Method::Mc => {
                let row_seed = derive_seed(seed, n as u64);
                let result = estimate_moments(&SimConfig::new(params.clone(), n, reps, row_seed)?);
                LimitRow {
                    n,
                    method,
                    estimate_first: result.mean_max / scale,
                    estimate_second: result.mean_max_sq / n as f64,
                    stderr_first: Some(result.stderr_mean / scale),
                    stderr_second: Some(result.stderr_sq / n as f64),
                    seed: Some(row_seed),
                    delta_first: 0.0,
                    delta_second: 0.0,
                }
            }
        };
        rows.push(LimitRow {
            delta_first: row.estimate_first - first_ref,
            delta_second: row.estimate_second - second_ref,
            ..row
        });
    }
    Ok(LimitReport {
        p: params.p().to_string(),
        ell: params.ell(),
        reference_first: first_ref,
        reference_second: second_ref,
        reference_applies: *params.p() == BigRational::new(1.into(), 2.into()),
        rows,
    })
}
