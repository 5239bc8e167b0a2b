//! Joint law of the queue length `S_n` and its running maximum `M_n`.
//!
//! The table `F_n(x, a) = P{S_n = x, M_n = a}` is propagated one step at a
//! time with the arrival or departure kernel of the current phase. Any cycle
//! length is handled by the same two kernels. Exact mode uses big rationals
//! and never truncates; float mode caps the maximum at `a_cap` and tracks the
//! discarded probability in `lost_mass`.

use std::fmt::Debug;
use std::ops::Sub;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::params::{phase_of, Mode, Params, PhaseKind};

/// Default ceiling on the number of stored `(x, a)` cells.
pub const DEFAULT_MAX_STATES: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("exact mode cannot truncate: mass would reach a={needed} above a_cap={cap}")]
    CapExceeded { cap: usize, needed: usize },
    #[error("state space of {states} cells exceeds the limit of {limit}")]
    ResourceLimit { states: usize, limit: usize },
    #[error("table arithmetic is {table} but params request {params} mode")]
    ModeMismatch { table: Mode, params: Mode },
}

/// Scalar type carried by the dynamic program.
pub trait Weight: Clone + Debug + PartialOrd + Zero + One + Sub<Output = Self> {
    const MODE: Mode;

    fn from_ratio(value: &BigRational) -> Self;

    fn from_count(count: usize) -> Self;

    fn to_f64(&self) -> f64;

    fn times(&self, other: &Self) -> Self;

    fn accumulate(&mut self, other: &Self);
}

impl Weight for BigRational {
    const MODE: Mode = Mode::Exact;

    fn from_ratio(value: &BigRational) -> Self {
        value.clone()
    }

    fn from_count(count: usize) -> Self {
        BigRational::from_integer(count.into())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn times(&self, other: &Self) -> Self {
        self * other
    }

    fn accumulate(&mut self, other: &Self) {
        *self += other;
    }
}

impl Weight for f64 {
    const MODE: Mode = Mode::Float;

    fn from_ratio(value: &BigRational) -> Self {
        ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
    }

    fn from_count(count: usize) -> Self {
        count as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    #[inline]
    fn times(&self, other: &Self) -> Self {
        self * other
    }

    #[inline]
    fn accumulate(&mut self, other: &Self) {
        *self += other;
    }
}

#[inline]
fn tri(x: usize, a: usize) -> usize {
    a * (a + 1) / 2 + x
}

/// Dense triangular table over `0 ≤ x ≤ a ≤ extent`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable<W> {
    n: usize,
    extent: usize,
    cells: Vec<W>,
    a_cap: Option<usize>,
    lost_mass: W,
}

impl<W: Weight> JointTable<W> {
    /// Point mass at `(0, 0)`, i.e. `S_0 = M_0 = 0`.
    pub fn initial(a_cap: Option<usize>) -> Self {
        Self {
            n: 0,
            extent: 0,
            cells: vec![W::one()],
            a_cap,
            lost_mass: W::zero(),
        }
    }

    /// Builds a table at step `n` from explicit entries. Used mainly by tests
    /// and callers that want to drive [`dp_step`] by hand.
    pub fn from_entries(
        n: usize,
        entries: impl IntoIterator<Item = ((usize, usize), W)>,
        a_cap: Option<usize>,
    ) -> Self {
        let entries: Vec<_> = entries.into_iter().collect();
        let extent = entries.iter().map(|((_, a), _)| *a).max().unwrap_or(0);
        let mut cells = vec![W::zero(); tri(0, extent + 1)];
        for ((x, a), w) in entries {
            assert!(x <= a, "entry ({x},{a}) violates x ≤ a");
            cells[tri(x, a)] = w;
        }
        Self {
            n,
            extent,
            cells,
            a_cap,
            lost_mass: W::zero(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest `a` with allocated storage.
    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn a_cap(&self) -> Option<usize> {
        self.a_cap
    }

    pub fn lost_mass(&self) -> &W {
        &self.lost_mass
    }

    pub fn get(&self, x: usize, a: usize) -> W {
        if x > a || a > self.extent {
            W::zero()
        } else {
            self.cells[tri(x, a)].clone()
        }
    }

    /// Nonzero entries in `(a, x)` order.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &W)> + '_ {
        (0..=self.extent)
            .flat_map(|a| (0..=a).map(move |x| (x, a)))
            .map(|(x, a)| ((x, a), &self.cells[tri(x, a)]))
            .filter(|(_, w)| !w.is_zero())
    }

    /// Sum of all stored probabilities (excluding `lost_mass`).
    pub fn mass(&self) -> W {
        self.cells.iter().fold(W::zero(), |mut acc, w| {
            acc.accumulate(w);
            acc
        })
    }
}

/// Applies one step of the recurrence.
///
/// Arrival: `(x,a) → (x+1, max(a,x+1))` with prob. `p`, stays with prob. `q`.
/// Departure: stays with prob. `p`, `(x,a) → (max(x-1,0), a)` with prob. `q`.
pub fn dp_step<W: Weight>(
    table: &JointTable<W>,
    kind: PhaseKind,
    params: &Params,
) -> Result<JointTable<W>, WalkError> {
    let p = W::from_ratio(params.p());
    let q = W::from_ratio(params.q());
    step_with(table, kind, &p, &q)
}

fn step_with<W: Weight>(
    table: &JointTable<W>,
    kind: PhaseKind,
    p: &W,
    q: &W,
) -> Result<JointTable<W>, WalkError> {
    let old = table.extent;
    let mut lost = table.lost_mass.clone();
    let extent = match kind {
        PhaseKind::Departure => old,
        PhaseKind::Arrival => match table.a_cap {
            Some(cap) if old + 1 > cap => {
                // Only diagonal mass (x = a = old) can climb past the cap.
                let top = &table.cells[tri(old, old)];
                if !top.is_zero() {
                    if W::MODE == Mode::Exact {
                        return Err(WalkError::CapExceeded {
                            cap,
                            needed: old + 1,
                        });
                    }
                    lost.accumulate(&p.times(top));
                }
                old
            }
            _ => old + 1,
        },
    };
    let mut cells = vec![W::zero(); tri(0, extent + 1)];
    for a in 0..=old {
        for x in 0..=a {
            let v = &table.cells[tri(x, a)];
            if v.is_zero() {
                continue;
            }
            match kind {
                PhaseKind::Arrival => {
                    let stay = tri(x, a);
                    cells[stay].accumulate(&q.times(v));
                    let up = if x < a {
                        Some(tri(x + 1, a))
                    } else if a < extent {
                        Some(tri(a + 1, a + 1))
                    } else {
                        None
                    };
                    if let Some(up) = up {
                        cells[up].accumulate(&p.times(v));
                    }
                }
                PhaseKind::Departure => {
                    let stay = tri(x, a);
                    let down = tri(x.saturating_sub(1), a);
                    cells[stay].accumulate(&p.times(v));
                    cells[down].accumulate(&q.times(v));
                }
            }
        }
    }
    Ok(JointTable {
        n: table.n + 1,
        extent,
        cells,
        a_cap: table.a_cap,
        lost_mass: lost,
    })
}

/// Float-mode cap on the maximum: `max(32, ⌈6·√(n/2)⌉ + ℓ)`.
pub fn default_a_cap(n: usize, ell: usize) -> usize {
    let scaled = (6.0 * (n as f64 / 2.0).sqrt()).ceil() as usize;
    32.max(scaled + ell)
}

/// Runs `n` steps from the empty queue. In exact mode `a_cap = None` means no
/// truncation; in float mode `None` selects [`default_a_cap`].
pub fn joint_dist<W: Weight>(
    params: &Params,
    n: usize,
    a_cap: Option<usize>,
) -> Result<JointTable<W>, WalkError> {
    joint_dist_with_limit(params, n, a_cap, DEFAULT_MAX_STATES)
}

pub fn joint_dist_with_limit<W: Weight>(
    params: &Params,
    n: usize,
    a_cap: Option<usize>,
    max_states: usize,
) -> Result<JointTable<W>, WalkError> {
    if params.mode() != W::MODE {
        return Err(WalkError::ModeMismatch {
            table: W::MODE,
            params: params.mode(),
        });
    }
    let cap = match (W::MODE, a_cap) {
        (Mode::Float, None) => Some(default_a_cap(n, params.ell())),
        (_, cap) => cap,
    };
    let reach = params.arrival_count(n);
    let top = cap.map_or(reach, |c| c.min(reach));
    let states = tri(0, top + 1);
    if states > max_states {
        return Err(WalkError::ResourceLimit {
            states,
            limit: max_states,
        });
    }
    let p = W::from_ratio(params.p());
    let q = W::from_ratio(params.q());
    let mut table = JointTable::initial(cap);
    for i in 1..=n {
        table = step_with(&table, phase_of(i, params.ell()), &p, &q)?;
    }
    Ok(table)
}

/// Which marginal a [`DistVector`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marginal {
    Max,
    State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistVector<W> {
    pub values: Vec<W>,
    pub label: Marginal,
    pub lost_mass: W,
}

impl<W: Weight> DistVector<W> {
    pub fn total(&self) -> W {
        sum_of(self.values.iter())
    }

    pub fn get(&self, i: usize) -> W {
        self.values.get(i).cloned().unwrap_or_else(W::zero)
    }

    /// `P{value ≥ level}`.
    pub fn tail(&self, level: usize) -> W {
        sum_of(self.values.iter().skip(level))
    }
}

fn sum_of<'a, W: Weight + 'a>(values: impl Iterator<Item = &'a W>) -> W {
    values.fold(W::zero(), |mut acc, w| {
        acc.accumulate(w);
        acc
    })
}

/// `P{M_n = a} = Σ_x F_n(x, a)`.
pub fn max_dist<W: Weight>(table: &JointTable<W>) -> DistVector<W> {
    let values = (0..=table.extent)
        .map(|a| {
            (0..=a).fold(W::zero(), |mut acc, x| {
                acc.accumulate(&table.cells[tri(x, a)]);
                acc
            })
        })
        .collect();
    trimmed(DistVector {
        values,
        label: Marginal::Max,
        lost_mass: table.lost_mass.clone(),
    })
}

/// `P{S_n = x} = Σ_a F_n(x, a)`.
pub fn s_marginal<W: Weight>(table: &JointTable<W>) -> DistVector<W> {
    let mut values = vec![W::zero(); table.extent + 1];
    for a in 0..=table.extent {
        for (x, slot) in values.iter_mut().enumerate().take(a + 1) {
            slot.accumulate(&table.cells[tri(x, a)]);
        }
    }
    trimmed(DistVector {
        values,
        label: Marginal::State,
        lost_mass: table.lost_mass.clone(),
    })
}

fn trimmed<W: Weight>(mut dist: DistVector<W>) -> DistVector<W> {
    while dist.values.len() > 1 && dist.values.last().is_some_and(|w| w.is_zero()) {
        dist.values.pop();
    }
    dist
}

/// `Σ_a a^k · values[a]`.
pub fn moment<W: Weight>(dist: &DistVector<W>, k: u32) -> W {
    dist.values
        .iter()
        .enumerate()
        .fold(W::zero(), |mut acc, (a, w)| {
            let base = W::from_count(a);
            let power = (0..k).fold(W::one(), |power, _| power.times(&base));
            acc.accumulate(&power.times(w));
            acc
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_params;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn exact(num: i64, den: i64, ell: usize) -> Params {
        validate_params(num, den, ell, Mode::Exact).unwrap()
    }

    #[test]
    fn first_arrival_step() {
        let params = exact(1, 3, 1);
        let t0 = JointTable::<BigRational>::initial(None);
        let t1 = dp_step(&t0, PhaseKind::Arrival, &params).unwrap();
        assert_eq!(t1.get(1, 1), rat(1, 3));
        assert_eq!(t1.get(0, 0), rat(2, 3));
        assert_eq!(t1.entries().count(), 2);
    }

    #[test]
    fn departure_step_from_explicit_table() {
        let params = exact(1, 3, 1);
        let t1 = JointTable::from_entries(1, [((1, 1), rat(1, 3)), ((0, 0), rat(2, 3))], None);
        let t2 = dp_step(&t1, PhaseKind::Departure, &params).unwrap();
        assert_eq!(t2.get(0, 0), rat(2, 3));
        assert_eq!(t2.get(0, 1), rat(2, 9));
        assert_eq!(t2.get(1, 1), rat(1, 9));
        assert_eq!(t2.n(), 2);
    }

    #[test]
    fn ell2_four_steps() {
        let t = joint_dist::<BigRational>(&exact(1, 3, 2), 4, None).unwrap();
        let expected = [
            ((0, 0), rat(36, 81)),
            ((0, 1), rat(32, 81)),
            ((1, 1), rat(4, 81)),
            ((0, 2), rat(4, 81)),
            ((1, 2), rat(4, 81)),
            ((2, 2), rat(1, 81)),
        ];
        assert_eq!(t.entries().count(), expected.len());
        for ((x, a), w) in expected {
            assert_eq!(t.get(x, a), w, "entry ({x},{a})");
        }
    }

    #[test]
    fn zero_steps_is_point_mass() {
        for ell in 1..4 {
            let t = joint_dist::<BigRational>(&exact(2, 5, ell), 0, None).unwrap();
            assert_eq!(t.get(0, 0), rat(1, 1));
            assert_eq!(max_dist(&t).values, vec![rat(1, 1)]);
            assert_eq!(s_marginal(&t).values, vec![rat(1, 1)]);
        }
    }

    #[test]
    fn max_and_state_marginals() {
        let params = exact(1, 3, 1);
        let t2 = joint_dist::<BigRational>(&params, 2, None).unwrap();
        assert_eq!(max_dist(&t2).values, vec![rat(2, 3), rat(1, 3)]);
        assert_eq!(s_marginal(&t2).values, vec![rat(8, 9), rat(1, 9)]);
        let t4 = joint_dist::<BigRational>(&params, 4, None).unwrap();
        assert_eq!(
            max_dist(&t4).values,
            vec![rat(4, 9), rat(14, 27), rat(1, 27)]
        );
    }

    #[test]
    fn moments_at_half() {
        let params = exact(1, 2, 1);
        let m2 = max_dist(&joint_dist::<BigRational>(&params, 2, None).unwrap());
        assert_eq!(moment(&m2, 1), rat(1, 2));
        assert_eq!(moment(&m2, 0), rat(1, 1));
        let m4 = max_dist(&joint_dist::<BigRational>(&params, 4, None).unwrap());
        assert_eq!(moment(&m4, 1), rat(7, 8));
        assert_eq!(moment(&m4, 0), rat(1, 1));
    }

    #[test]
    fn exact_mode_refuses_to_truncate() {
        let params = exact(1, 3, 1);
        let err = joint_dist::<BigRational>(&params, 5, Some(2)).unwrap_err();
        assert_eq!(err, WalkError::CapExceeded { cap: 2, needed: 3 });
        // A cap at or above the reachable level is harmless.
        let t = joint_dist::<BigRational>(&params, 5, Some(3)).unwrap();
        assert_eq!(t.mass(), rat(1, 1));
    }

    #[test]
    fn float_mode_tracks_lost_mass() {
        let params = validate_params(1, 2, 1, Mode::Float).unwrap();
        let t = joint_dist::<f64>(&params, 40, Some(3)).unwrap();
        assert!(*t.lost_mass() > 0.0);
        assert!((t.mass() + t.lost_mass() - 1.0).abs() < 1e-12);
        assert!(t.extent() <= 3);
    }

    #[test]
    fn default_cap_keeps_lost_mass_tiny() {
        let params = validate_params(1, 2, 1, Mode::Float).unwrap();
        let t = joint_dist::<f64>(&params, 2000, None).unwrap();
        assert_eq!(t.a_cap(), Some(default_a_cap(2000, 1)));
        assert!(*t.lost_mass() < 1e-10);
        assert!((t.mass() + t.lost_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resource_guard() {
        let params = exact(1, 3, 1);
        let err = joint_dist_with_limit::<BigRational>(&params, 200, None, 100).unwrap_err();
        assert!(matches!(err, WalkError::ResourceLimit { limit: 100, .. }));
    }

    #[test]
    fn mode_mismatch_is_an_error() {
        let params = exact(1, 3, 1);
        assert!(matches!(
            joint_dist::<f64>(&params, 3, None),
            Err(WalkError::ModeMismatch { .. })
        ));
    }
}
