//! Reproducible simulation of the reflected walk.
//!
//! Replica `r` of a run with master seed `s` draws from a ChaCha8 generator
//! seeded with `s` and switched to stream `r`, so any subset of replicas can
//! be computed independently. Per-replica results are accumulated as exact
//! integer sums, which makes the merged result independent of how replicas
//! are split across workers.
//!
//! One uniform variate `u` is drawn per step and compared with `p`:
//! `u < p` is an arrival on a red step and a hold on a green step.

use std::ops::Range;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::params::Params;

/// Replicas handed to one rayon task.
const CHUNK: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("reps must be at least 1")]
    NoReplicas,
    #[error("n must be at least 1")]
    NoSteps,
    #[error("ells must be nonempty")]
    NoEll,
    #[error(transparent)]
    Params(#[from] crate::params::ParamError),
}

/// Source of uniform variates on `[0, 1)`.
pub trait UniformStream {
    fn next_uniform(&mut self) -> f64;
}

impl UniformStream for ChaCha8Rng {
    fn next_uniform(&mut self) -> f64 {
        self.random::<f64>()
    }
}

/// Replays a fixed sequence of variates, cycling when exhausted.
#[derive(Debug, Clone)]
pub struct ScriptedStream {
    values: Vec<f64>,
    pos: usize,
}

impl ScriptedStream {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(
            !values.is_empty(),
            "scripted stream needs at least one value"
        );
        Self { values, pos: 0 }
    }
}

impl UniformStream for ScriptedStream {
    fn next_uniform(&mut self) -> f64 {
        let v = self.values[self.pos % self.values.len()];
        self.pos += 1;
        v
    }
}

/// The generator used for replica `replica` under master seed `seed`.
pub fn replica_stream(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

fn walk<S, F>(p: f64, ell: usize, n: usize, stream: &mut S, mut observe: F) -> (u64, u64)
where
    S: UniformStream,
    F: FnMut(usize, u64, u64),
{
    let (mut state, mut max) = (0u64, 0u64);
    let mut step = 0;
    while step < n {
        for _ in 0..ell.min(n - step) {
            step += 1;
            if stream.next_uniform() < p {
                state += 1;
                max = max.max(state);
            }
            observe(step, state, max);
        }
        for _ in 0..ell.min(n - step) {
            step += 1;
            if stream.next_uniform() >= p {
                state = state.saturating_sub(1);
            }
            observe(step, state, max);
        }
    }
    (state, max)
}

/// One draw of `(S_n, M_n)`.
pub fn simulate_path<S: UniformStream>(params: &Params, n: usize, stream: &mut S) -> (u64, u64) {
    walk(params.p_f64(), params.ell(), n, stream, |_, _, _| {})
}

/// Like [`simulate_path`], calling `observe(step, state, running_max)` after
/// every step.
pub fn simulate_path_observed<S, F>(
    params: &Params,
    n: usize,
    stream: &mut S,
    observe: F,
) -> (u64, u64)
where
    S: UniformStream,
    F: FnMut(usize, u64, u64),
{
    walk(params.p_f64(), params.ell(), n, stream, observe)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub params: Params,
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(params: Params, n: usize, reps: u64, seed: u64) -> Result<Self, SimError> {
        if reps == 0 {
            return Err(SimError::NoReplicas);
        }
        if n == 0 {
            return Err(SimError::NoSteps);
        }
        Ok(Self {
            params,
            n,
            reps,
            seed,
        })
    }
}

/// Exact sums of `M`, `M²` and `M⁴` over a set of replicas.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MomentSums {
    pub count: u64,
    pub sum: u128,
    pub sum_sq: u128,
    pub sum_fourth: u128,
}

impl MomentSums {
    fn push(&mut self, m: u64) {
        let m = m as u128;
        let sq = m * m;
        self.count += 1;
        self.sum += m;
        self.sum_sq += sq;
        self.sum_fourth += sq * sq;
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
            sum_fourth: self.sum_fourth + other.sum_fourth,
        }
    }
}

/// Sums over the replicas in `replicas`, in parallel.
pub fn replica_sums(config: &SimConfig, replicas: Range<u64>) -> MomentSums {
    let p = config.params.p_f64();
    let ell = config.params.ell();
    let chunks: Vec<Range<u64>> = (replicas.start..replicas.end)
        .step_by(CHUNK as usize)
        .map(|lo| lo..(lo + CHUNK).min(replicas.end))
        .collect();
    chunks
        .into_par_iter()
        .map(|chunk| {
            let mut sums = MomentSums::default();
            for r in chunk {
                let mut rng = replica_stream(config.seed, r);
                sums.push(walk(p, ell, config.n, &mut rng, |_, _, _| {}).1);
            }
            sums
        })
        .reduce(MomentSums::default, MomentSums::merge)
}

/// Sample variance from exact sums: `(R·Σx² − (Σx)²) / (R(R−1))`.
fn sample_variance(count: u64, sum: u128, sum_sq: u128) -> f64 {
    if count < 2 {
        return 0.0;
    }
    let r = count as u128;
    let spread = r * sum_sq - sum * sum;
    spread as f64 / (count as f64 * (count - 1) as f64)
}

/// Moments of `M_n` over the replicas. `elapsed` is informational and is
/// ignored by equality.
#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    pub mean_max: f64,
    pub mean_max_sq: f64,
    pub variance: f64,
    pub stderr_mean: f64,
    pub stderr_sq: f64,
    pub reps: u64,
    pub seed: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl PartialEq for SimResult {
    fn eq(&self, other: &Self) -> bool {
        let bits = |r: &Self| {
            [
                r.mean_max,
                r.mean_max_sq,
                r.variance,
                r.stderr_mean,
                r.stderr_sq,
            ]
            .map(f64::to_bits)
        };
        bits(self) == bits(other) && self.reps == other.reps && self.seed == other.seed
    }
}

impl SimResult {
    pub fn from_sums(sums: &MomentSums, seed: u64, elapsed: Duration) -> Self {
        let r = sums.count as f64;
        let variance = sample_variance(sums.count, sums.sum, sums.sum_sq);
        let variance_sq = sample_variance(sums.count, sums.sum_sq, sums.sum_fourth);
        Self {
            mean_max: sums.sum as f64 / r,
            mean_max_sq: sums.sum_sq as f64 / r,
            variance,
            stderr_mean: (variance / r).sqrt(),
            stderr_sq: (variance_sq / r).sqrt(),
            reps: sums.count,
            seed,
            elapsed,
        }
    }
}

pub fn estimate_moments(config: &SimConfig) -> SimResult {
    let start = Instant::now();
    let sums = replica_sums(config, 0..config.reps);
    SimResult::from_sums(&sums, config.seed, start.elapsed())
}

/// Empirical law of `M_n` over `reps` replicas.
pub fn empirical_max_counts(config: &SimConfig) -> Vec<u64> {
    let p = config.params.p_f64();
    let ell = config.params.ell();
    let mut counts = vec![0u64; config.params.arrival_count(config.n) + 1];
    for r in 0..config.reps {
        let mut rng = replica_stream(config.seed, r);
        counts[walk(p, ell, config.n, &mut rng, |_, _, _| {}).1 as usize] += 1;
    }
    counts
}

/// Mixes `tag` into `seed` (splitmix64 finalizer), giving independent
/// master seeds for the rows of a multi-row run.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed.wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Master seed for cycle half-length `ell` inside a universality run; each
/// row can be reproduced on its own with this seed.
pub fn seed_for_ell(seed: u64, ell: usize) -> u64 {
    derive_seed(seed, ell as u64)
}

pub const UNIVERSALITY_LABEL: &str = "conjecture probe: the limiting moments of M_n/sqrt(n) \
are expected not to depend on the light cycle; agreement here is numerical evidence, not a proof";

/// Moments of `M_n/√n` for one cycle length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalityRow {
    pub ell: usize,
    pub seed: u64,
    pub scaled_mean: f64,
    pub scaled_mean_stderr: f64,
    pub scaled_second: f64,
    pub scaled_second_stderr: f64,
    /// Relative difference of `scaled_mean` from the `ℓ = 1` row.
    pub mean_rel_diff: f64,
    /// Difference from the `ℓ = 1` row over the combined standard error.
    pub mean_z: f64,
    pub second_z: f64,
    pub result: SimResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalityReport {
    pub label: &'static str,
    pub p: String,
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
    pub baseline: UniversalityRow,
    pub rows: Vec<UniversalityRow>,
}

fn z_score(a: f64, sa: f64, b: f64, sb: f64) -> f64 {
    let diff = a - b;
    if diff == 0.0 {
        return 0.0;
    }
    diff / (sa * sa + sb * sb).sqrt()
}

/// Simulates each `ℓ` in `ells` (and `ℓ = 1` as the reference) and compares
/// the scaled moments.
pub fn universality_experiment(
    params: &Params,
    ells: &[usize],
    n: usize,
    reps: u64,
    seed: u64,
) -> Result<UniversalityReport, SimError> {
    if ells.is_empty() {
        return Err(SimError::NoEll);
    }
    let scale = (n as f64).sqrt();
    let run = |ell: usize| -> Result<UniversalityRow, SimError> {
        let row_seed = seed_for_ell(seed, ell);
        let config = SimConfig::new(params.with_ell(ell)?, n, reps, row_seed)?;
        let result = estimate_moments(&config);
        Ok(UniversalityRow {
            ell,
            seed: row_seed,
            scaled_mean: result.mean_max / scale,
            scaled_mean_stderr: result.stderr_mean / scale,
            scaled_second: result.mean_max_sq / n as f64,
            scaled_second_stderr: result.stderr_sq / n as f64,
            mean_rel_diff: 0.0,
            mean_z: 0.0,
            second_z: 0.0,
            result,
        })
    };
    let baseline = run(1)?;
    let mut rows = Vec::with_capacity(ells.len());
    for &ell in ells {
        let mut row = if ell == 1 {
            baseline.clone()
        } else {
            run(ell)?
        };
        row.mean_rel_diff = (row.scaled_mean - baseline.scaled_mean) / baseline.scaled_mean;
        row.mean_z = z_score(
            row.scaled_mean,
            row.scaled_mean_stderr,
            baseline.scaled_mean,
            baseline.scaled_mean_stderr,
        );
        row.second_z = z_score(
            row.scaled_second,
            row.scaled_second_stderr,
            baseline.scaled_second,
            baseline.scaled_second_stderr,
        );
        rows.push(row);
    }
    Ok(UniversalityReport {
        label: UNIVERSALITY_LABEL,
        p: params.p().to_string(),
        n,
        reps,
        seed,
        baseline,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate_params, Mode};
    use crate::walk::{joint_dist, max_dist};

    fn params(num: i64, den: i64, ell: usize) -> Params {
        validate_params(num, den, ell, Mode::Float).unwrap()
    }

    #[test]
    fn all_q_side_draws_never_queue() {
        let mut stream = ScriptedStream::new(vec![0.99]);
        assert_eq!(simulate_path(&params(1, 3, 2), 50, &mut stream), (0, 0));
    }

    #[test]
    fn arrive_hold_trace() {
        let mut stream = ScriptedStream::new(vec![0.0]);
        assert_eq!(simulate_path(&params(1, 3, 1), 4, &mut stream), (2, 2));
        let mut stream = ScriptedStream::new(vec![0.1, 0.9]);
        assert_eq!(simulate_path(&params(1, 3, 1), 4, &mut stream), (0, 1));
    }

    #[test]
    fn reflection_invariants_hold_along_paths() {
        for ell in 1..=3 {
            let par = params(1, 2, ell);
            for r in 0..200 {
                let mut rng = replica_stream(7, r);
                let (mut prev_max, mut running) = (0u64, 0u64);
                let (state, max) = simulate_path_observed(&par, 300, &mut rng, |_, s, m| {
                    assert!(m >= prev_max);
                    assert!(s <= m);
                    running = running.max(s);
                    prev_max = m;
                });
                assert_eq!(max, running);
                assert!(state <= max);
            }
        }
    }

    #[test]
    fn deterministic_and_split_invariant() {
        let config = SimConfig::new(params(1, 2, 2), 100, 3000, 42).unwrap();
        let a = estimate_moments(&config);
        let b = estimate_moments(&config);
        assert_eq!(a, b);
        let split = replica_sums(&config, 0..1234)
            .merge(replica_sums(&config, 1234..2000))
            .merge(replica_sums(&config, 2000..3000));
        assert_eq!(split, replica_sums(&config, 0..3000));
        assert_eq!(SimResult::from_sums(&split, 42, Duration::ZERO), a);
        let other = estimate_moments(&SimConfig::new(params(1, 2, 2), 100, 3000, 43).unwrap());
        assert_ne!(a, other);
    }

    #[test]
    fn rejects_empty_configs() {
        assert_eq!(
            SimConfig::new(params(1, 2, 1), 10, 0, 1).unwrap_err(),
            SimError::NoReplicas
        );
        assert_eq!(
            SimConfig::new(params(1, 2, 1), 0, 10, 1).unwrap_err(),
            SimError::NoSteps
        );
    }

    #[test]
    fn mean_of_two_steps_is_p() {
        let result = estimate_moments(&SimConfig::new(params(1, 2, 1), 2, 200_000, 5).unwrap());
        assert!((result.mean_max - 0.5).abs() < 4.0 * result.stderr_mean);
    }

    #[test]
    fn empirical_law_tracks_dp() {
        let par = params(1, 3, 2);
        let config = SimConfig::new(par.clone(), 10, 100_000, 9).unwrap();
        let counts = empirical_max_counts(&config);
        let exact = max_dist(&joint_dist::<f64>(&par, 10, None).unwrap());
        for (a, &c) in counts.iter().enumerate() {
            let phat = c as f64 / 100_000.0;
            let bound = 5.0 * (phat * (1.0 - phat) / 100_000.0).sqrt() + 1e-4;
            assert!(
                (phat - exact.values.get(a).copied().unwrap_or(0.0)).abs() < bound,
                "a={a}"
            );
        }
    }

    #[test]
    fn universality_self_comparison_is_zero() {
        let report = universality_experiment(&params(1, 2, 1), &[1], 50, 500, 3).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].mean_z, 0.0);
        assert_eq!(report.rows[0].mean_rel_diff, 0.0);
        assert!(report.label.starts_with("conjecture"));
        assert_eq!(report.rows[0].seed, seed_for_ell(3, 1));
    }

    #[test]
    fn universality_three_rows() {
        let report = universality_experiment(&params(1, 3, 1), &[1, 2, 3], 200, 300, 11).unwrap();
        assert_eq!(
            report.rows.iter().map(|r| r.ell).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
        let seeds: std::collections::BTreeSet<u64> = report.rows.iter().map(|r| r.seed).collect();
        assert_eq!(seeds.len(), 3);
    }
}
