//! Renovation events, forward coalescence, coupling from the past, and the
//! lattice sets `H^n = Φ^n(L_α^S ∩ [0, Ȳ∘θ^{-n}])`.
//!
//! The exact map is not monotone, so coupling from the past propagates a
//! finite set of initial states (the empty state, the upper Loynes estimate
//! and random points between them) rather than two extremal trajectories,
//! and only trusts the common value once a renovation event lies inside the
//! horizon. After a renovation event every trajectory started below the upper
//! solution is a function of the drivers alone.

use std::collections::BTreeSet;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{phi, Bound, WorkloadVector};
use crate::loynes::{loynes_estimate, LoynesOptions};
use crate::metrics::Estimate;
use crate::scalar::Scalar;
use crate::sequences::{DriverSource, LatticePath};

pub const DEFAULT_EXTRA_POINTS: usize = 8;
pub const DEFAULT_HSET_CAP: u128 = 1_000_000;

/// Whether the renovation event holds for an upper-solution value `upper` at
/// index `n`, given `taus = (tau(n), ..., tau(n+L-1))` with `L <= S - 1`:
/// `upper(1) = 0` and, for `l` in `2..=S`, `upper(l)` is drained to zero by the
/// first `min(l - 1, L)` inter-arrival times.
///
/// With `L = S - 1` this is `upper(l) <= tau(n) + ... + tau(n+l-2)`; shorter
/// witnesses are stronger events after which coalescence takes `L` steps.
/// Draining is evaluated with the same clipped subtractions the dynamics
/// perform, so in floating point the coalesced state is bit-exactly
/// independent of the initial state.
pub fn renovation_holds<T: Scalar>(upper: &WorkloadVector<T>, taus: &[T]) -> bool {
    if upper.min() != T::ZERO {
        return false;
    }
    (1..upper.servers()).all(|l| {
        let steps = l.min(taus.len());
        taus[..steps].iter().fold(upper[l], |x, &t| x.minus_clip(t)) == T::ZERO
    })
}

/// A detected renovation index with its witnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenovationEvent<T = f64> {
    pub index: i64,
    /// Number of steps after which trajectories below the upper solution agree (`S - 1`).
    pub checked_length: usize,
    pub upper: WorkloadVector<T>,
    /// `tau(n) + ... + tau(n+l-2)` for `l` in `2..=S`.
    pub tau_partial_sums: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenovationScan<T = f64> {
    pub from: i64,
    pub to: i64,
    pub events: Vec<RenovationEvent<T>>,
    /// Renovation frequency over the indices whose upper estimate stabilized.
    pub frequency: Estimate,
    /// Indices skipped because the upper estimate did not stabilize.
    pub unstabilized: usize,
}

/// Renovation indices in `from ..= to`.
pub fn detect_renovation<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    servers: usize,
    from: i64,
    to: i64,
    opts: &LoynesOptions,
) -> Result<RenovationScan<T>> {
    if to < from {
        return Err(Error::Argument(format!("empty window [{from}, {to}]")));
    }
    if servers == 0 {
        return Err(Error::Argument("at least one server is required".into()));
    }
    let rows: Vec<Option<Option<RenovationEvent<T>>>> = (from..=to)
        .into_par_iter()
        .map(|n| -> Result<_> {
            let upper = loynes_estimate(path, n, Bound::Upper, servers, opts)?;
            if !upper.stabilized {
                return Ok(None);
            }
            let taus: Vec<T> = path.drivers(n, servers - 1).iter().map(|d| d.tau).collect();
            if !renovation_holds(&upper.vector, &taus) {
                return Ok(Some(None));
            }
            let mut partial = T::ZERO;
            let sums = taus
                .iter()
                .map(|&t| {
                    partial = partial.plus(t);
                    partial
                })
                .collect();
            Ok(Some(Some(RenovationEvent {
                index: n,
                checked_length: servers - 1,
                upper: upper.vector,
                tau_partial_sums: sums,
            })))
        })
        .collect::<Result<_>>()?;
    let unstabilized = rows.iter().filter(|r| r.is_none()).count();
    let frequency = Estimate::from_indicators(rows.iter().flatten().map(|e| e.is_some()));
    Ok(RenovationScan {
        from,
        to,
        events: rows.into_iter().flatten().flatten().collect(),
        frequency,
        unstabilized,
    })
}

/// Iterates the exact map `S - 1` steps from index `at` on every initial
/// state and reports whether they all end in the same state.
///
/// Every initial state must be dominated by `upper`.
pub fn coalescence_check<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    at: i64,
    initials: &[WorkloadVector<T>],
    upper: &WorkloadVector<T>,
) -> Result<bool> {
    for (i, x) in initials.iter().enumerate() {
        if !x.precedes(upper) {
            return Err(Error::Contract(format!(
                "initial state {i} ({:?}) is not dominated by the upper estimate {:?}",
                x.as_slice(),
                upper.as_slice()
            )));
        }
    }
    let drivers = path.drivers(at, upper.servers() - 1);
    let finals: Vec<WorkloadVector<T>> = initials
        .iter()
        .map(|x| drivers.iter().fold(x.clone(), |w, d| phi(&w, d).next))
        .collect();
    Ok(finals.windows(2).all(|p| p[0] == p[1]))
}

/// Outcome of re-checking coalescence at detected renovation indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoalescenceSummary {
    pub events: usize,
    pub checks: usize,
    pub failures: usize,
}

/// Runs [`coalescence_check`] at every event of `scan` for `sets` random
/// initial sets of `set_size` points below the event's upper estimate (plus
/// the two extremes).
pub fn verify_coalescence<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    scan: &RenovationScan<T>,
    sets: usize,
    set_size: usize,
) -> Result<CoalescenceSummary> {
    let failures: Vec<usize> = scan
        .events
        .par_iter()
        .map(|e| -> Result<usize> {
            let mut rng = auxiliary_rng(path.seed(), &[e.index, -1]);
            let mut failed = 0;
            for _ in 0..sets {
                let mut initials = vec![WorkloadVector::zeros(e.upper.servers()), e.upper.clone()];
                initials.extend(sandwich_points(&e.upper, set_size, &mut rng));
                if !coalescence_check(path, e.index, &initials, &e.upper)? {
                    failed += 1;
                }
            }
            Ok(failed)
        })
        .collect::<Result<_>>()?;
    Ok(CoalescenceSummary {
        events: scan.events.len(),
        checks: scan.events.len() * sets,
        failures: failures.iter().sum(),
    })
}

/// `count` ordered points drawn between `0` and `upper`.
pub fn sandwich_points<T: Scalar>(
    upper: &WorkloadVector<T>,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<WorkloadVector<T>> {
    (0..count)
        .map(|_| {
            let mut x: Vec<T> = upper
                .as_slice()
                .iter()
                .map(|&y| y.fraction(((rng.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64)))
                .collect();
            x.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
            WorkloadVector::from_sorted_unchecked(x)
        })
        .collect()
}

/// Randomness for auxiliary draws, derived from the path seed and a salt.
pub fn auxiliary_rng(seed: u64, salt: &[i64]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(b"sandwich");
    let mut rng = ChaCha8Rng::from_seed(key);
    let mut stream = 0u64;
    for s in salt {
        stream = stream.rotate_left(17) ^ (*s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CftpOptions {
    pub initial_horizon: usize,
    pub max_horizon: usize,
    /// Random sandwich points added to the two extreme initial states.
    pub extra_points: usize,
}

impl Default for CftpOptions {
    fn default() -> Self {
        Self {
            initial_horizon: 1,
            max_horizon: 1 << 20,
            extra_points: DEFAULT_EXTRA_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CftpResult<T = f64> {
    /// Common state at the target index, `None` when the set did not coalesce.
    pub value: Option<WorkloadVector<T>>,
    pub horizon_used: usize,
    pub initial_set_size: usize,
    /// Whether the upper estimate bounding the initial set stabilized.
    pub upper_stabilized: bool,
    /// Latest index before the target where a renovation event was found.
    pub renovation_index: Option<i64>,
}

impl<T> CftpResult<T> {
    pub fn coalesced(&self) -> bool {
        self.value.is_some()
    }
}

/// Latest `m` in `[lowest, highest]` where the renovation event of length
/// `min(at - m, S - 1)` holds with a stabilized upper estimate.
fn latest_renovation<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    at: i64,
    lowest: i64,
    highest: i64,
    servers: usize,
    loynes: &LoynesOptions,
) -> Result<Option<i64>> {
    for m in (lowest..=highest).rev() {
        let upper = loynes_estimate(path, m, Bound::Upper, servers, loynes)?;
        if !upper.stabilized {
            continue;
        }
        let length = ((at - m) as usize).min(servers - 1);
        let taus: Vec<T> = path.drivers(m, length).iter().map(|d| d.tau).collect();
        if renovation_holds(&upper.vector, &taus) {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// Coupling from the past at index `at`, doubling the horizon from
/// `initial_horizon` until the initial set coalesces or `max_horizon` is used.
///
/// Coalescence of a finite set does not by itself identify the stationary
/// state, since the map is not monotone. The set is only accepted once a
/// renovation index inside the horizon forces every trajectory started below
/// the upper solution onto the same state by `at`.
pub fn cftp<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    at: i64,
    servers: usize,
    opts: &CftpOptions,
    loynes: &LoynesOptions,
) -> Result<CftpResult<T>> {
    if servers == 0 {
        return Err(Error::Argument("at least one server is required".into()));
    }
    if opts.initial_horizon == 0 || opts.max_horizon < opts.initial_horizon {
        return Err(Error::Argument(format!(
            "horizons must satisfy 1 <= initial ({}) <= max ({})",
            opts.initial_horizon, opts.max_horizon
        )));
    }
    let mut horizon = opts.initial_horizon;
    let mut renovation = None;
    // indices above this bound were already scanned without success
    let mut scanned_down_to = at;
    loop {
        let start = at - horizon as i64;
        if renovation.is_none() && start < scanned_down_to {
            renovation = latest_renovation(path, at, start, scanned_down_to - 1, servers, loynes)?;
            scanned_down_to = start;
        }
        let top = loynes_estimate(path, start, Bound::Upper, servers, loynes)?;
        let mut rng = auxiliary_rng(path.seed(), &[at, horizon as i64]);
        let mut states = vec![WorkloadVector::zeros(servers), top.vector.clone()];
        states.extend(sandwich_points(&top.vector, opts.extra_points, &mut rng));
        let initial_set_size = states.len();
        if renovation.is_some() {
            for d in path.drivers(start, horizon) {
                for w in states.iter_mut() {
                    *w = phi(w, &d).next;
                }
            }
            if states.windows(2).all(|p| p[0] == p[1]) {
                return Ok(CftpResult {
                    value: states.into_iter().next(),
                    horizon_used: horizon,
                    initial_set_size,
                    upper_stabilized: top.stabilized,
                    renovation_index: renovation,
                });
            }
        }
        if horizon >= opts.max_horizon {
            return Ok(CftpResult {
                value: None,
                horizon_used: horizon,
                initial_set_size,
                upper_stabilized: top.stabilized,
                renovation_index: renovation,
            });
        }
        horizon = (2 * horizon).min(opts.max_horizon);
    }
}

/// `Φ^n(L_α^S ∩ [0, Ȳ∘θ^{-n}])` at one target index, in lattice units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HSet {
    pub at: i64,
    pub depth: usize,
    pub alpha: f64,
    /// Distinct image points, sorted.
    pub points: Vec<WorkloadVector<u64>>,
    /// Number of lattice points in the starting box.
    pub box_size: u128,
    pub upper_stabilized: bool,
}

impl HSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_subset_of(&self, other: &HSet) -> bool {
        self.points
            .iter()
            .all(|p| other.points.binary_search(p).is_ok())
    }
}

/// Number of ascending integer vectors `x` with `0 <= x(j) <= upper(j)`,
/// or `None` if it exceeds `cap`.
pub fn lattice_box_size(upper: &[u64], cap: u128) -> Option<u128> {
    let top = *upper.last()?;
    if top as u128 + 1 > cap {
        return None;
    }
    // ways[v] = number of valid prefixes ending at value v
    let mut ways: Vec<u128> = (0..=top).map(|v| u128::from(v <= upper[0])).collect();
    for &bound in &upper[1..] {
        let mut acc = 0u128;
        for (v, w) in ways.iter_mut().enumerate() {
            acc = acc.saturating_add(*w);
            *w = if v as u64 <= bound { acc } else { 0 };
        }
    }
    let total = ways.iter().fold(0u128, |a, w| a.saturating_add(*w));
    (total <= cap).then_some(total)
}

fn enumerate_box(upper: &[u64]) -> Vec<WorkloadVector<u64>> {
    fn rec(upper: &[u64], prefix: &mut Vec<u64>, out: &mut Vec<WorkloadVector<u64>>) {
        let j = prefix.len();
        if j == upper.len() {
            out.push(WorkloadVector::from_sorted_unchecked(prefix.clone()));
            return;
        }
        let lo = prefix.last().copied().unwrap_or(0);
        for v in lo..=upper[j] {
            prefix.push(v);
            rec(upper, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(upper, &mut Vec::with_capacity(upper.len()), &mut out);
    out
}

/// Computes `H^depth` at index `at` by exact propagation of every lattice
/// point of the box through the exact map.
pub fn h_set(
    path: &LatticePath,
    at: i64,
    depth: usize,
    servers: usize,
    cap: u128,
    loynes: &LoynesOptions,
) -> Result<HSet> {
    if depth == 0 {
        return Err(Error::Argument("depth must be at least 1".into()));
    }
    if servers == 0 {
        return Err(Error::Argument("at least one server is required".into()));
    }
    let start = at - depth as i64;
    let top = loynes_estimate(path, start, Bound::Upper, servers, loynes)?;
    let upper = top.vector.as_slice();
    let box_size = lattice_box_size(upper, cap).ok_or_else(|| Error::Resource {
        what: format!("lattice box below {upper:?}"),
        size: upper
            .iter()
            .map(|&y| y as u128 + 1)
            .fold(1u128, |a, b| a.saturating_mul(b)),
        cap,
    })?;
    let mut points: BTreeSet<WorkloadVector<u64>> = enumerate_box(upper).into_iter().collect();
    for d in path.drivers(start, depth) {
        points = points.iter().map(|x| phi(x, &d).next).collect();
    }
    Ok(HSet {
        at,
        depth,
        alpha: path.alpha(),
        points: points.into_iter().collect(),
        box_size,
        upper_stabilized: top.stabilized,
    })
}

/// `|H^n|` for `n = 1..=max_depth` with the nesting `H^{n+1} ⊆ H^n` checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HSetProfile {
    pub at: i64,
    pub sizes: Vec<usize>,
    pub box_sizes: Vec<u128>,
    /// First depth `n + 1` with `H^{n+1} ⊄ H^n`, if any.
    pub nesting_violation: Option<usize>,
    pub all_stabilized: bool,
    pub last: HSet,
}

impl HSetProfile {
    pub fn nested(&self) -> bool {
        self.nesting_violation.is_none()
    }

    pub fn singleton_at(&self, depth: usize) -> bool {
        self.sizes.get(depth - 1) == Some(&1)
    }
}

pub fn h_set_profile(
    path: &LatticePath,
    at: i64,
    servers: usize,
    max_depth: usize,
    cap: u128,
    loynes: &LoynesOptions,
) -> Result<HSetProfile> {
    if max_depth == 0 {
        return Err(Error::Argument("depth must be at least 1".into()));
    }
    let mut previous: Option<HSet> = None;
    let mut sizes = Vec::with_capacity(max_depth);
    let mut box_sizes = Vec::with_capacity(max_depth);
    let mut violation = None;
    let mut all_stabilized = true;
    for n in 1..=max_depth {
        let h = h_set(path, at, n, servers, cap, loynes)?;
        all_stabilized &= h.upper_stabilized;
        if let Some(prev) = &previous {
            if violation.is_none() && !h.is_subset_of(prev) {
                violation = Some(n);
            }
        }
        sizes.push(h.len());
        box_sizes.push(h.box_size);
        previous = Some(h);
    }
    Ok(HSetProfile {
        at,
        sizes,
        box_sizes,
        nesting_violation: violation,
        all_stabilized,
        last: previous.expect("max_depth >= 1"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{Distribution, SequenceSpec, StationaryPath};

    fn det(tau: f64, sigma: f64, patience: f64) -> StationaryPath {
        StationaryPath::new(SequenceSpec::deterministic(tau, sigma, patience)).unwrap()
    }

    fn wv(x: &[f64]) -> WorkloadVector {
        WorkloadVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn renovation_predicate() {
        assert!(renovation_holds(&wv(&[0.0, 1.0, 3.0]), &[1.0, 2.0]));
        assert!(!renovation_holds(&wv(&[0.0, 1.5, 3.0]), &[1.0, 2.0]));
        assert!(!renovation_holds(&wv(&[0.1, 1.0, 3.0]), &[1.0, 2.0]));
        assert!(renovation_holds(&wv(&[0.0]), &[]));
        // one-step witness: every coordinate drained by the first gap
        assert!(renovation_holds(&wv(&[0.0, 1.0, 1.0]), &[1.0]));
        assert!(!renovation_holds(&wv(&[0.0, 1.0, 3.0]), &[1.0]));
        // 0.1 + 0.2 rounds up, yet draining it by 0.1 then 0.2 leaves a residue
        let x = 0.1 + 0.2;
        assert!(x - 0.1 - 0.2 > 0.0);
        assert!(!renovation_holds(&wv(&[0.0, 0.0, x]), &[0.1, 0.2]));
    }

    #[test]
    fn cftp_needs_a_renovation_witness() {
        let p = StationaryPath::new(SequenceSpec::iid(
            Distribution::Exponential { rate: 1.0 },
            Distribution::Exponential { rate: 0.6 },
            Distribution::Deterministic { value: 1.0 },
            88,
        ))
        .unwrap();
        let (o, l) = (CftpOptions::default(), LoynesOptions::default());
        // a finite set coalesces here before the stationary state is identified
        for t in [101, 105, 787, 906] {
            let a = cftp(&p, t, 2, &o, &l).unwrap();
            let b = cftp(&p, t + 1, 2, &o, &l).unwrap();
            let m = a.renovation_index.unwrap();
            assert!(m < t);
            assert_eq!(
                phi(a.value.as_ref().unwrap(), &p.sample_at(t)).next,
                b.value.unwrap()
            );
        }
    }

    #[test]
    fn every_index_renovates_when_draining() {
        let scan =
            detect_renovation(&det(2.0, 1.0, 0.5), 1, 0, 49, &LoynesOptions::default()).unwrap();
        assert_eq!(scan.events.len(), 50);
        assert_eq!(scan.frequency.mean, 1.0);
    }

    #[test]
    fn no_renovation_with_positive_upper_solution() {
        let scan =
            detect_renovation(&det(1.0, 2.0, 1.0), 1, 0, 49, &LoynesOptions::default()).unwrap();
        assert!(scan.events.is_empty());
        assert!(detect_renovation::<f64, _>(
            &det(1.0, 2.0, 1.0),
            1,
            5,
            4,
            &LoynesOptions::default()
        )
        .is_err());
    }

    #[test]
    fn single_server_coalesces_immediately() {
        let p = det(2.0, 1.0, 0.5);
        let zero = wv(&[0.0]);
        assert!(coalescence_check(&p, 3, &[zero.clone(), zero.clone()], &zero).unwrap());
        assert!(matches!(
            coalescence_check(&p, 3, &[wv(&[1.0])], &zero),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn two_servers_coalesce_in_one_step() {
        // tau = 2, sigma + D = 1.5: Ȳ = (0, 0); every state below it is 0
        // after one step. A looser hand-built bound (0, 2) still satisfies the
        // event since 2 <= tau(n) = 2, and the second coordinate drains to 0.
        let p = det(2.0, 1.0, 0.5);
        let upper = wv(&[0.0, 2.0]);
        let initials = [wv(&[0.0, 0.0]), wv(&[0.0, 2.0]), wv(&[0.0, 1.3])];
        assert!(renovation_holds(&upper, &[2.0]));
        assert!(coalescence_check(&p, 0, &initials, &upper).unwrap());
    }

    #[test]
    fn cftp_drain_config() {
        let r = cftp(
            &det(2.0, 1.0, 0.5),
            0,
            3,
            &CftpOptions::default(),
            &LoynesOptions::default(),
        )
        .unwrap();
        assert_eq!(r.horizon_used, 1);
        assert!(r.value.unwrap().is_zero());
        assert_eq!(r.initial_set_size, 2 + DEFAULT_EXTRA_POINTS);
    }

    #[test]
    fn box_counting() {
        assert_eq!(lattice_box_size(&[0], 10), Some(1));
        assert_eq!(lattice_box_size(&[2, 3], 100), Some(3 + 3 + 2 + 1));
        assert_eq!(lattice_box_size(&[5, 5], 100), Some(21));
        assert_eq!(lattice_box_size(&[5, 5], 20), None);
        assert_eq!(enumerate_box(&[2, 3]).len(), 9);
    }

    #[test]
    fn hset_single_point() {
        let spec = SequenceSpec::lattice(
            1.0,
            Distribution::Deterministic { value: 2.0 },
            Distribution::Deterministic { value: 1.0 },
            Distribution::Deterministic { value: 0.0 },
            0,
        );
        let lp = StationaryPath::new(spec).unwrap().lattice().unwrap();
        for n in 1..5 {
            let h = h_set(&lp, 0, n, 1, DEFAULT_HSET_CAP, &LoynesOptions::default()).unwrap();
            assert_eq!(h.box_size, 1);
            assert_eq!(h.points, vec![WorkloadVector::zeros(1)]);
        }
    }
}
