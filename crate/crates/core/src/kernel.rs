//! Ordered workload vectors and the three one-step maps.
//!
//! * [`phi`] is the exact FCFS workload recursion with impatience: the arriving
//!   customer joins the least loaded server iff that server's workload does not
//!   exceed her patience, then every workload drains by the inter-arrival time.
//! * [`phi_upper`] and [`phi_lower`] are the monotone bounding maps, obtained by
//!   replacing the effective work of an arrival by `sigma + D` and `min(sigma, D)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sequences::DriverSample;

/// Ascending vector of the `S` servers' committed work.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorkloadVector<T = f64>(Vec<T>);

impl<T: Scalar> WorkloadVector<T> {
    /// Checked constructor: rejects empty, unordered, negative or NaN input.
    pub fn new(w: Vec<T>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Contract(
                "workload vector needs at least one server".into(),
            ));
        }
        if w.iter().any(|x| !(*x >= T::ZERO)) {
            return Err(Error::Contract(format!(
                "negative or undefined workload in {w:?}"
            )));
        }
        if w.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::Contract(format!(
                "workload vector {w:?} is not ascending"
            )));
        }
        Ok(Self(w))
    }

    /// Sorts arbitrary non-negative workloads into a vector.
    pub fn from_unsorted(mut w: Vec<T>) -> Result<Self> {
        sort(&mut w);
        Self::new(w)
    }

    pub fn zeros(servers: usize) -> Self {
        assert!(servers >= 1, "at least one server");
        Self(vec![T::ZERO; servers])
    }

    pub fn servers(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    /// Smallest workload, `w(1)`.
    pub fn min(&self) -> T {
        self.0[0]
    }

    /// Largest workload, `w(S)`.
    pub fn max(&self) -> T {
        self.0[self.0.len() - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| *x == T::ZERO)
    }

    /// Coordinate-wise order `self ≺ other`.
    pub fn precedes(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Largest coordinate-wise distance.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.distance(*b))
            .fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> WorkloadVector<f64> {
        WorkloadVector(self.0.iter().map(|x| x.to_f64()).collect())
    }

    pub(crate) fn from_sorted_unchecked(w: Vec<T>) -> Self {
        debug_assert!(w.windows(2).all(|p| p[0] <= p[1]));
        Self(w)
    }
}

impl<T> std::ops::Index<usize> for WorkloadVector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

fn sort<T: Scalar>(w: &mut [T]) {
    w.sort_by(|a, b| a.partial_cmp(b).expect("workloads are comparable"));
}

/// Result of one exact step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<T = f64> {
    pub next: WorkloadVector<T>,
    /// The arriving customer reaches a server before her patience runs out.
    pub accepted: bool,
}

/// Work the arrival adds to the least loaded server: `u(1) + sigma 1{u(1) <= D}`.
#[inline]
pub fn entering_load<T: Scalar>(u: &WorkloadVector<T>, d: &DriverSample<T>) -> (T, bool) {
    let accepted = u.min() <= d.patience;
    let load = if accepted {
        u.min().plus(d.sigma)
    } else {
        u.min()
    };
    (load, accepted)
}

/// Exact workload map, evaluated coordinate by coordinate.
pub fn phi<T: Scalar>(u: &WorkloadVector<T>, d: &DriverSample<T>) -> StepOutcome<T> {
    let (a, accepted) = entering_load(u, d);
    StepOutcome {
        next: WorkloadVector::from_sorted_unchecked(insert_and_drain(u.as_slice(), a, d.tau)),
        accepted,
    }
}

/// Exact workload map, evaluated literally: add to the first coordinate,
/// reorder, drain, clip.
pub fn phi_direct<T: Scalar>(u: &WorkloadVector<T>, d: &DriverSample<T>) -> WorkloadVector<T> {
    let mut w = u.as_slice().to_vec();
    if w[0] <= d.patience {
        w[0] = w[0].plus(d.sigma);
    }
    sort(&mut w);
    for x in w.iter_mut() {
        *x = x.minus_clip(d.tau);
    }
    WorkloadVector::from_sorted_unchecked(w)
}

/// Upper bounding map: effective work `sigma + D`.
pub fn phi_upper<T: Scalar>(u: &WorkloadVector<T>, d: &DriverSample<T>) -> WorkloadVector<T> {
    WorkloadVector::from_sorted_unchecked(insert_and_drain(u.as_slice(), d.upper_work(), d.tau))
}

/// Lower bounding map: effective work `min(sigma, D)`.
pub fn phi_lower<T: Scalar>(u: &WorkloadVector<T>, d: &DriverSample<T>) -> WorkloadVector<T> {
    WorkloadVector::from_sorted_unchecked(insert_and_drain(u.as_slice(), d.lower_work(), d.tau))
}

/// `v(j) = [(u(j) ∨ a) ∧ u(j+1) - tau]^+`, `v(S) = [u(S) ∨ a - tau]^+`.
///
/// For the exact map `a >= u(1)`, and the formula is the sorted multiset
/// `{a, u(2), ..., u(S)}` drained by `tau`. For the bounding maps `a` is a
/// constant and `u(1)` drops out of the comparison except through `u(1) ∨ a`.
#[inline]
fn insert_and_drain<T: Scalar>(u: &[T], a: T, tau: T) -> Vec<T> {
    let s = u.len();
    let mut v = Vec::with_capacity(s);
    for j in 0..s - 1 {
        v.push(u[j].max_of(a).min_of(u[j + 1]).minus_clip(tau));
    }
    v.push(u[s - 1].max_of(a).minus_clip(tau));
    v
}

/// Which bounding map to iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Upper,
    Lower,
}

impl Bound {
    pub fn apply<T: Scalar>(self, u: &WorkloadVector<T>, d: &DriverSample<T>) -> WorkloadVector<T> {
        match self {
            Bound::Upper => phi_upper(u, d),
            Bound::Lower => phi_lower(u, d),
        }
    }

    pub fn work<T: Scalar>(self, d: &DriverSample<T>) -> T {
        match self {
            Bound::Upper => d.upper_work(),
            Bound::Lower => d.lower_work(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wv(x: &[f64]) -> WorkloadVector {
        WorkloadVector::new(x.to_vec()).unwrap()
    }

    fn ds(tau: f64, sigma: f64, patience: f64) -> DriverSample {
        DriverSample {
            tau,
            sigma,
            patience,
        }
    }

    #[test]
    fn phi_examples() {
        let out = phi(&wv(&[0.0, 0.0]), &ds(1.0, 2.0, 0.0));
        assert_eq!(out.next, wv(&[0.0, 1.0]));
        assert!(out.accepted);

        let out = phi(&wv(&[1.0, 3.0]), &ds(1.0, 2.0, 0.0));
        assert_eq!(out.next, wv(&[0.0, 2.0]));
        assert!(!out.accepted);

        let out = phi(&wv(&[4.0, 7.0]), &ds(10.0, 1.0, 5.0));
        assert_eq!(out.next, wv(&[0.0, 0.0]));
        assert!(out.accepted);
    }

    #[test]
    fn phi_direct_examples() {
        assert_eq!(
            phi_direct(&wv(&[0.0, 2.0, 5.0]), &ds(1.0, 4.0, 1.0)),
            wv(&[1.0, 3.0, 4.0])
        );
        // single server without impatience is the Lindley recursion
        let x = 2.5;
        assert_eq!(
            phi_direct(&wv(&[x]), &ds(1.25, 3.0, f64::INFINITY)),
            wv(&[(x + 3.0 - 1.25f64).max(0.0)])
        );
        // null patience with a busy first server is a pure drain
        assert_eq!(
            phi_direct(&wv(&[0.5, 2.0]), &ds(1.0, 9.0, 0.0)),
            wv(&[0.0, 1.0])
        );
    }

    #[test]
    fn upper_examples() {
        assert_eq!(
            phi_upper(&wv(&[0.0, 0.0]), &ds(1.0, 2.0, 1.0)),
            wv(&[0.0, 2.0])
        );
        assert_eq!(
            phi_upper(&wv(&[1.0, 4.0]), &ds(2.0, 2.0, 1.0)),
            wv(&[1.0, 2.0])
        );
        assert!(phi_upper(&wv(&[1.0, 4.0, 6.0]), &ds(7.0, 2.0, 1.0)).is_zero());
    }

    #[test]
    fn lower_examples() {
        assert_eq!(
            phi_lower(&wv(&[0.0, 0.0]), &ds(1.0, 2.0, 1.0)),
            wv(&[0.0, 0.0])
        );
        assert_eq!(
            phi_lower(&wv(&[1.0, 4.0]), &ds(2.0, 5.0, 3.0)),
            wv(&[1.0, 2.0])
        );
        // zero effective work drains
        assert_eq!(
            phi_lower(&wv(&[1.0, 4.0]), &ds(0.5, 5.0, 0.0)),
            wv(&[0.5, 3.5])
        );
    }

    #[test]
    fn rejects_unordered() {
        assert!(matches!(
            WorkloadVector::new(vec![2.0, 1.0]),
            Err(Error::Contract(_))
        ));
        assert!(WorkloadVector::new(vec![-1.0, 1.0]).is_err());
        assert!(WorkloadVector::<f64>::new(vec![]).is_err());
        assert!(WorkloadVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn lattice_mode_matches_real_mode() {
        let u = WorkloadVector::new(vec![0u64, 2, 5]).unwrap();
        let d = DriverSample {
            tau: 1u64,
            sigma: 4,
            patience: 1,
        };
        assert_eq!(phi(&u, &d).next.as_slice(), &[1, 3, 4]);
        assert_eq!(phi_direct(&u, &d).as_slice(), &[1, 3, 4]);
    }
}
