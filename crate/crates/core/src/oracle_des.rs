//! Event-driven simulation of the physical `S`-server FCFS queue with
//! impatient customers.
//!
//! The simulator keeps absolute completion times per server and an explicit
//! FCFS line with absolute deadlines; it never uses the workload recursion.
//! At every arrival it folds the line into the ordered workload vector the
//! arriving customer sees, one waiting customer at a time: the head joins the
//! least loaded server iff that server frees up within her remaining patience.
//!
//! Ties at one instant are resolved as departures, then service starts, then
//! abandonments (a customer whose deadline is exactly the start instant is
//! served), then the arrival.
//!
//! Times are kept relative to the latest arrival epoch: at each arrival every
//! stored epoch is shifted back by the elapsed inter-arrival time. Absolute
//! epochs grow like the number of arrivals and would lose precision in long
//! busy periods.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{phi, WorkloadVector};
use crate::scalar::Scalar;
use crate::sequences::DriverSource;

/// What one arriving customer saw and what eventually happened to her.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalRecord<T = f64> {
    pub index: i64,
    /// Ordered virtual workloads just before the arrival.
    pub workload_seen: WorkloadVector<T>,
    pub served: bool,
    pub loss: bool,
}

#[derive(Debug, Clone)]
struct Waiting<T> {
    record: usize,
    sigma: T,
    deadline: T,
}

/// Physical state: per-server completion epochs and the waiting line.
#[derive(Debug, Clone)]
pub struct PhysicalState<T = f64> {
    completions: Vec<T>,
    line: VecDeque<Waiting<T>>,
    clock: T,
}

impl<T: Scalar> PhysicalState<T> {
    pub fn empty(servers: usize) -> Self {
        Self {
            completions: vec![T::ZERO; servers],
            line: VecDeque::new(),
            clock: T::ZERO,
        }
    }

    /// Current time, measured from the latest arrival epoch.
    pub fn clock(&self) -> T {
        self.clock
    }

    /// Moves the time origin to `now`, which must not precede any pending event
    /// that has not been processed.
    fn rebase(&mut self, now: T) {
        for c in &mut self.completions {
            *c = c.minus_clip(now);
        }
        for w in &mut self.line {
            w.deadline = w.deadline.minus_clip(now);
        }
        self.clock = self.clock.minus_clip(now);
    }

    pub fn queue_len(&self) -> usize {
        self.line.len()
    }

    /// Residual service times of the customers in service, ascending.
    pub fn residuals(&self) -> Vec<T> {
        let mut r: Vec<T> = self
            .completions
            .iter()
            .map(|c| c.minus_clip(self.clock))
            .collect();
        r.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
        r
    }

    /// Folds the line into the workload vector seen by a customer arriving now.
    pub fn workload_vector(&self) -> WorkloadVector<T> {
        let mut w = self.residuals();
        for c in &self.line {
            let remaining = c.deadline.minus_clip(self.clock);
            if w[0] <= remaining {
                w[0] = w[0].plus(c.sigma);
                w.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
            }
        }
        WorkloadVector::new(w).expect("folded workloads are ordered and non-negative")
    }

    fn next_event(&self) -> Option<T> {
        let busy = self.completions.iter().copied().filter(|c| *c > self.clock);
        let deadlines = self.line.iter().map(|c| c.deadline);
        busy.chain(deadlines)
            .fold(None, |acc: Option<T>, t| match acc {
                Some(a) if a <= t => Some(a),
                _ => Some(t),
            })
    }

    fn idle_server(&self) -> Option<usize> {
        self.completions.iter().position(|c| *c <= self.clock)
    }

    /// Processes every event up to and including `target` (or until the
    /// line is empty when `target` is `None`).
    fn advance(&mut self, target: Option<T>, records: &mut [ArrivalRecord<T>]) {
        loop {
            if target.is_none() && self.line.is_empty() {
                return;
            }
            let Some(e) = self.next_event() else { return };
            if let Some(t) = target {
                if e > t {
                    return;
                }
            }
            self.clock = e;
            // departures are implicit: completions <= clock are idle
            while let Some(s) = self.idle_server() {
                let Some(c) = self.line.pop_front() else {
                    break;
                };
                if c.deadline >= e {
                    self.completions[s] = e.plus(c.sigma);
                    records[c.record].served = true;
                } else {
                    records[c.record].loss = true;
                }
            }
            self.abandon(records);
        }
    }

    fn abandon(&mut self, records: &mut [ArrivalRecord<T>]) {
        let clock = self.clock;
        self.line.retain(|c| {
            if c.deadline <= clock {
                records[c.record].loss = true;
                false
            } else {
                true
            }
        });
    }
}

/// Simulates customers `start .. start + n_arrivals` from an empty system,
/// the first arriving at time 0.
pub fn run<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    servers: usize,
    start: i64,
    n_arrivals: usize,
) -> Result<Vec<ArrivalRecord<T>>> {
    if n_arrivals == 0 {
        return Err(Error::Argument("at least one arrival is required".into()));
    }
    if servers == 0 {
        return Err(Error::Argument("at least one server is required".into()));
    }
    let drivers = path.drivers(start, n_arrivals);
    let mut state = PhysicalState::empty(servers);
    let mut records: Vec<ArrivalRecord<T>> = Vec::with_capacity(n_arrivals);
    let mut since_last = T::ZERO;
    for (k, d) in drivers.iter().enumerate() {
        state.advance(Some(since_last), &mut records);
        state.clock = since_last;
        state.rebase(since_last);
        records.push(ArrivalRecord {
            index: start + k as i64,
            workload_seen: state.workload_vector(),
            served: false,
            loss: false,
        });
        if let Some(s) = state.idle_server() {
            state.completions[s] = d.sigma;
            records[k].served = true;
        } else {
            state.line.push_back(Waiting {
                record: k,
                sigma: d.sigma,
                deadline: d.patience,
            });
            state.abandon(&mut records);
        }
        since_last = d.tau;
    }
    state.advance(None, &mut records);
    debug_assert!(records.iter().all(|r| r.served != r.loss));
    Ok(records)
}

/// First arrival at which the simulation and the recursion disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub index: i64,
    pub simulated: Vec<f64>,
    pub recursion: Vec<f64>,
    pub simulated_served: bool,
    pub recursion_served: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub passed: bool,
    pub n_arrivals: usize,
    pub tolerance: f64,
    pub max_discrepancy: f64,
    pub decision_mismatches: usize,
    pub served: usize,
    pub losses: usize,
    pub first_divergence: Option<Divergence>,
}

impl CrossValidation {
    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            Ok(self)
        } else {
            let d = self.first_divergence.as_ref();
            Err(Error::Check(format!(
                "simulation and recursion diverge at index {:?}: simulated {:?}, recursion {:?} (max discrepancy {}, {} decision mismatches)",
                d.map(|d| d.index),
                d.map(|d| &d.simulated),
                d.map(|d| &d.recursion),
                self.max_discrepancy,
                self.decision_mismatches
            )))
        }
    }
}

/// Runs the simulation and the exact recursion from the empty state on the
/// same drivers and compares them arrival by arrival.
pub fn cross_validate<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    servers: usize,
    start: i64,
    n_arrivals: usize,
    tolerance: f64,
) -> Result<(CrossValidation, Vec<ArrivalRecord<T>>)> {
    if !(tolerance >= 0.0) {
        return Err(Error::Argument(format!(
            "tolerance must be non-negative, got {tolerance}"
        )));
    }
    let trace = run(path, servers, start, n_arrivals)?;
    let drivers = path.drivers(start, n_arrivals);
    let mut w = WorkloadVector::zeros(servers);
    let mut max_discrepancy: f64 = 0.0;
    let mut mismatches = 0;
    let mut first = None;
    for (rec, d) in trace.iter().zip(&drivers) {
        let step = phi(&w, d);
        let gap = w.sup_distance(&rec.workload_seen);
        max_discrepancy = max_discrepancy.max(gap);
        let agree = step.accepted == rec.served;
        if !agree {
            mismatches += 1;
        }
        if first.is_none() && (gap > tolerance || !agree) {
            first = Some(Divergence {
                index: rec.index,
                simulated: rec.workload_seen.to_f64().into_vec(),
                recursion: w.to_f64().into_vec(),
                simulated_served: rec.served,
                recursion_served: step.accepted,
            });
        }
        w = step.next;
    }
    let served = trace.iter().filter(|r| r.served).count();
    let report = CrossValidation {
        passed: first.is_none(),
        n_arrivals,
        tolerance,
        max_discrepancy,
        decision_mismatches: mismatches,
        served,
        losses: trace.len() - served,
        first_divergence: first,
    };
    Ok((report, trace))
}

/// Writes `index,w1..wS,served,loss` rows.
pub fn write_trace_csv<T: Scalar, W: Write>(
    trace: &[ArrivalRecord<T>],
    out: &mut W,
) -> std::io::Result<()> {
    let servers = trace.first().map_or(0, |r| r.workload_seen.servers());
    let mut header = String::from("index");
    for j in 1..=servers {
        header.push_str(&format!(",w{j}"));
    }
    header.push_str(",served,loss");
    writeln!(out, "{header}")?;
    for r in trace {
        write!(out, "{}", r.index)?;
        for x in r.workload_seen.as_slice() {
            write!(out, ",{}", x.to_f64())?;
        }
        writeln!(out, ",{},{}", u8::from(r.served), u8::from(r.loss))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{SequenceSpec, StationaryPath};

    fn det(tau: f64, sigma: f64, patience: f64) -> StationaryPath {
        StationaryPath::new(SequenceSpec::deterministic(tau, sigma, patience)).unwrap()
    }

    #[test]
    fn single_server_hand_trace() {
        let trace = run(&det(1.0, 1.5, 0.0), 1, 0, 3).unwrap();
        let seen: Vec<f64> = trace.iter().map(|r| r.workload_seen[0]).collect();
        assert_eq!(seen, vec![0.0, 0.5, 0.0]);
        let served: Vec<bool> = trace.iter().map(|r| r.served).collect();
        assert_eq!(served, vec![true, false, true]);
        assert!(trace.iter().all(|r| r.served != r.loss));
    }

    #[test]
    fn infinite_patience_never_loses() {
        let trace = run(&det(1.0, 2.5, f64::INFINITY), 2, 0, 50).unwrap();
        assert!(trace.iter().all(|r| r.served));
        let (report, _) = cross_validate(&det(1.0, 2.5, f64::INFINITY), 2, 0, 50, 1e-9).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn no_work_means_empty_vectors() {
        let trace = run(&det(0.7, 0.0, 1.0), 3, 0, 20).unwrap();
        assert!(trace.iter().all(|r| r.workload_seen.is_zero()));
    }

    #[test]
    fn queue_fold_uses_remaining_patience() {
        // two customers wait; the second's remaining patience decides
        let trace = run(&det(0.5, 3.0, 1.2), 1, 0, 4).unwrap();
        let (report, _) = cross_validate(&det(0.5, 3.0, 1.2), 1, 0, 4, 0.0).unwrap();
        assert!(report.passed, "{report:?} {trace:?}");
    }

    #[test]
    fn csv_layout() {
        let trace = run(&det(1.0, 1.5, 0.0), 2, 0, 2).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "index,w1,w2,served,loss\n0,0,0,1,0\n1,0,0.5,1,0\n");
    }
}
