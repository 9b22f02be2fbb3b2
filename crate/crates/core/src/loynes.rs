//! Backward (Loynes) schemes for the monotone bounding maps.
//!
//! Iterating a monotone map from the empty state over drivers taken further
//! and further in the past yields a coordinate-wise non-decreasing sequence;
//! its limit is the minimal stationary solution of that map. The one-dimensional
//! suprema `Z_l` dominate those solutions and are computed here by truncation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::renovation_holds;
use crate::error::{Error, Result};
use crate::kernel::{Bound, WorkloadVector};
use crate::metrics::Estimate;
use crate::scalar::Scalar;
use crate::sequences::DriverSource;

pub const DEFAULT_MAX_DEPTH: usize = 1 << 20;
pub const DEFAULT_Z_WINDOW: usize = 1000;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Truncation and stopping parameters of the backward schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoynesOptions {
    /// Largest backward depth tried before giving up.
    pub max_depth: usize,
    /// Number of trailing sup terms that must leave the running max unchanged.
    pub z_window: usize,
    /// Two estimates closer than this (sup norm) count as equal.
    pub tolerance: f64,
}

impl Default for LoynesOptions {
    fn default() -> Self {
        Self {
            max_depth: DEFAULT_MAX_DEPTH,
            z_window: DEFAULT_Z_WINDOW,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Truncated vector `(Z_S, ..., Z_1)`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZVector<T = f64> {
    pub values: WorkloadVector<T>,
    /// Truncation depth `K` of the supremum.
    pub horizon: usize,
    pub stabilized: bool,
}

impl<T: Scalar> ZVector<T> {
    /// `Z_l` for `l` in `1..=S`.
    pub fn z(&self, l: usize) -> T {
        let s = self.values.servers();
        self.values[s - l]
    }
}

/// `values(j) = [max_{S+1-j <= k <= K} (work(at-k) - sum_{i=1..k} tau(at-i))]^+`.
///
/// `work` is `sigma + D` for [`Bound::Upper`] and `min(sigma, D)` for
/// [`Bound::Lower`]. The result is flagged stabilized when the running maximum
/// over `k >= S` did not move during the last `window` terms.
pub fn z_vector<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    at: i64,
    bound: Bound,
    servers: usize,
    depth: usize,
    window: usize,
) -> Result<ZVector<T>> {
    if servers == 0 {
        return Err(Error::Argument("at least one server is required".into()));
    }
    if depth < servers {
        return Err(Error::Argument(format!(
            "truncation depth {depth} is smaller than the server count {servers}"
        )));
    }
    let drivers = path.drivers(at - depth as i64, depth);
    // terms[k-1] = [work(at-k) - sum_{i<=k} tau(at-i)]^+
    let mut terms = Vec::with_capacity(depth);
    let mut cumulative = T::ZERO;
    for k in 1..=depth {
        let d = &drivers[depth - k];
        cumulative = cumulative.plus(d.tau);
        terms.push(bound.work(d).minus_clip(cumulative));
    }
    let mut running = T::ZERO;
    let mut last_change = servers - 1;
    for (k, &t) in terms.iter().enumerate().skip(servers - 1) {
        if t > running {
            running = t;
            last_change = k + 1;
        }
    }
    let mut values = vec![T::ZERO; servers];
    let mut z = running;
    values[0] = z;
    for l in (1..servers).rev() {
        z = z.max_of(terms[l - 1]);
        values[servers - l] = z;
    }
    Ok(ZVector {
        values: WorkloadVector::from_sorted_unchecked(values),
        horizon: depth,
        stabilized: depth - last_change >= window,
    })
}

/// [`z_vector`] with the depth doubled until the trailing window is quiet.
pub fn z_vector_stabilized<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    at: i64,
    bound: Bound,
    servers: usize,
    opts: &LoynesOptions,
) -> Result<ZVector<T>> {
    let mut depth = (2 * opts.z_window)
        .max(servers)
        .min(opts.max_depth.max(servers));
    loop {
        let z = z_vector(path, at, bound, servers, depth, opts.z_window)?;
        if z.stabilized || depth >= opts.max_depth {
            return Ok(z);
        }
        depth = (2 * depth).min(opts.max_depth);
    }
}

/// Truncated Loynes approximation of an extremal stationary solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoynesEstimate<T = f64> {
    pub vector: WorkloadVector<T>,
    /// Backward depth of the returned iterate.
    pub depth: usize,
    /// Whether the iterates from `0` and from the `Z` vector met before the
    /// maximal depth (with a stabilized `Z` truncation).
    pub stabilized: bool,
}

/// `map[θ^{-1}] ∘ ... ∘ map[θ^{-n}](0)`, evaluated at index `at`.
pub fn loynes_backward<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    at: i64,
    bound: Bound,
    servers: usize,
    depth: usize,
) -> Result<WorkloadVector<T>> {
    if servers == 0 {
        return Err(Error::Argument("at least one server is required".into()));
    }
    loynes_backward_from(path, at, bound, WorkloadVector::zeros(servers), depth)
}

/// `map[θ^{-1}] ∘ ... ∘ map[θ^{-n}](initial)`, evaluated at index `at`.
pub fn loynes_backward_from<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    at: i64,
    bound: Bound,
    initial: WorkloadVector<T>,
    depth: usize,
) -> Result<WorkloadVector<T>> {
    if depth == 0 {
        return Err(Error::Argument("backward depth must be at least 1".into()));
    }
    let drivers = path.drivers(at - depth as i64, depth);
    Ok(drivers.iter().fold(initial, |w, d| bound.apply(&w, d)))
}

/// Backward iterates at depths `S, 2S, 4S, ...` until the iterate from `0`
/// meets the iterate from the `Z` vector at the same starting index, or the
/// maximal depth is reached.
///
/// The minimal solution at any index lies between `0` and `Z`, and the map is
/// monotone, so once both iterates agree within the tolerance they have
/// found it. Agreement of two successive iterates from `0` alone is not
/// enough: a stretch of light drivers just before `at` makes short depths
/// agree well below the limit.
pub fn loynes_estimate<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    at: i64,
    bound: Bound,
    servers: usize,
    opts: &LoynesOptions,
) -> Result<LoynesEstimate<T>> {
    let max_depth = opts.max_depth.max(servers);
    let mut depth = servers;
    loop {
        let bottom = loynes_backward(path, at, bound, servers, depth)?;
        let z = z_vector_stabilized(path, at - depth as i64, bound, servers, opts)?;
        if z.stabilized {
            let top = loynes_backward_from(path, at, bound, z.values, depth)?;
            if top.sup_distance(&bottom) <= opts.tolerance {
                return Ok(LoynesEstimate {
                    vector: bottom,
                    depth,
                    stabilized: true,
                });
            }
        }
        if depth >= max_depth {
            return Ok(LoynesEstimate {
                vector: bottom,
                depth,
                stabilized: false,
            });
        }
        depth = (2 * depth).min(max_depth);
    }
}

/// Monte-Carlo frequencies of the stability conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `{Z̄_1 = 0}` with the stabilized truncation.
    pub upper_z1_zero: Estimate,
    /// `{sigma + D <= tau}`.
    pub work_below_tau: Estimate,
    /// `{sigma < tau}`.
    pub service_below_tau: Estimate,
    /// Renovation event evaluated with the upper Loynes estimate.
    pub renovation: Estimate,
    /// Indices whose upper Loynes estimate did not stabilize (counted as non-renovating).
    pub unstabilized: usize,
    pub samples: usize,
}

/// Frequencies over indices `start .. start + samples`.
pub fn estimate_conditions<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    servers: usize,
    start: i64,
    samples: usize,
    opts: &LoynesOptions,
) -> Result<ConditionReport> {
    if samples == 0 {
        return Err(Error::Argument("at least one sample is required".into()));
    }
    let rows: Vec<[bool; 5]> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<[bool; 5]> {
            let t = start + i as i64;
            let z = z_vector_stabilized(path, t, Bound::Upper, servers, opts)?;
            let d = path.driver(t);
            let upper = loynes_estimate(path, t, Bound::Upper, servers, opts)?;
            let taus: Vec<T> = path
                .drivers(t, servers.saturating_sub(1))
                .iter()
                .map(|d| d.tau)
                .collect();
            let renovating = upper.stabilized && renovation_holds(&upper.vector, &taus);
            Ok([
                z.z(1) == T::ZERO,
                d.upper_work() <= d.tau,
                d.sigma < d.tau,
                renovating,
                !upper.stabilized,
            ])
        })
        .collect::<Result<_>>()?;
    let column = |c: usize| Estimate::from_indicators(rows.iter().map(|r| r[c]));
    Ok(ConditionReport {
        upper_z1_zero: column(0),
        work_below_tau: column(1),
        service_below_tau: column(2),
        renovation: column(3),
        unstabilized: rows.iter().filter(|r| r[4]).count(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{SequenceSpec, StationaryPath};

    fn det(tau: f64, sigma: f64, patience: f64) -> StationaryPath {
        StationaryPath::new(SequenceSpec::deterministic(tau, sigma, patience)).unwrap()
    }

    #[test]
    fn z_vector_draining_config_is_zero() {
        let p = det(2.0, 1.0, 0.5);
        for k in [3usize, 10, 50] {
            let z = z_vector(&p, 0, Bound::Upper, 3, k, 1).unwrap();
            assert!(z.values.is_zero());
        }
    }

    #[test]
    fn z_vector_linear_sup() {
        // sup_{k >= l} (3 - k) = 3 - l, clipped
        let p = det(1.0, 2.0, 1.0);
        let z = z_vector(&p, 0, Bound::Upper, 3, 8, 1).unwrap();
        assert_eq!(z.values.as_slice(), &[0.0, 1.0, 2.0]);
        assert_eq!(z.z(1), 2.0);
        assert_eq!(z.z(3), 0.0);
    }

    #[test]
    fn z_vector_rejects_short_horizon() {
        let p = det(1.0, 2.0, 1.0);
        assert!(matches!(
            z_vector::<f64, _>(&p, 0, Bound::Upper, 3, 2, 1),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn backward_iterate_drains() {
        let p = det(2.0, 1.0, 0.5);
        assert!(loynes_backward(&p, 0, Bound::Upper, 3, 5)
            .unwrap()
            .is_zero());
        assert!(loynes_backward::<f64, _>(&p, 0, Bound::Upper, 3, 0).is_err());
    }

    #[test]
    fn single_server_fixed_point() {
        // [x ∨ 3 - 1]^+ has fixed point 2
        let p = det(1.0, 2.0, 1.0);
        let est = loynes_estimate(&p, 0, Bound::Upper, 1, &LoynesOptions::default()).unwrap();
        assert!(est.stabilized);
        assert_eq!(est.vector.as_slice(), &[2.0]);
    }

    #[test]
    fn deterministic_condition_frequencies() {
        let opts = LoynesOptions {
            z_window: 10,
            ..Default::default()
        };
        let r = estimate_conditions(&det(2.0, 1.0, 0.5), 2, 0, 20, &opts).unwrap();
        assert_eq!(r.work_below_tau.mean, 1.0);
        assert_eq!(r.upper_z1_zero.mean, 1.0);
        assert_eq!(r.renovation.mean, 1.0);
        let r = estimate_conditions(&det(1.0, 2.0, 1.0), 2, 0, 20, &opts).unwrap();
        assert_eq!(r.service_below_tau.mean, 0.0);
        assert_eq!(r.renovation.mean, 0.0);
    }
}
