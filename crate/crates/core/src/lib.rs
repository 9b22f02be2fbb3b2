//! Stationary construction of the FCFS multi-server queue with impatient
//! customers.
//!
//! The workload vector seen by successive arrivals follows a stochastic
//! recursion driven by the inter-arrival, service and patience times. This
//! crate builds that recursion ([`kernel`]), its two monotone bounding
//! recursions and their backward (Loynes) schemes ([`loynes`]), renovation
//! detection, coupling from the past and lattice set enumeration
//! ([`coupling`]), an independent event-driven simulator of the physical
//! queue ([`oracle_des`]) and the loss-probability bounds ([`metrics`]).
//! Driver sequences are bi-infinite and reproducible ([`sequences`]).
//!
//! ```
//! use impatience::kernel::{phi, WorkloadVector};
//! use impatience::sequences::DriverSample;
//!
//! let w = WorkloadVector::new(vec![0.0, 2.0, 5.0]).unwrap();
//! let d = DriverSample::new(1.0, 4.0, 1.0).unwrap();
//! let step = phi(&w, &d);
//! assert!(step.accepted);
//! assert_eq!(step.next.as_slice(), &[1.0, 3.0, 4.0]);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x >= 0.0)` also rejects NaN

pub mod cli;
pub mod coupling;
pub mod error;
pub mod kernel;
pub mod loynes;
pub mod metrics;
pub mod oracle_des;
pub mod scalar;
pub mod sequences;

pub use error::{Error, Result};
pub use kernel::{Bound, WorkloadVector};
pub use scalar::Scalar;
pub use sequences::{Distribution, DriverSample, DriverSource, SequenceSpec, StationaryPath};
