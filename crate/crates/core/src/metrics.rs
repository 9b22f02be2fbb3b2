//! Loss-probability estimation, the sandwich bound report, and closed-form
//! reference values for the special cases of the model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::coupling::{cftp, CftpOptions};
use crate::error::{Error, Result};
use crate::kernel::{phi, Bound, WorkloadVector};
use crate::loynes::{loynes_estimate, z_vector_stabilized, LoynesOptions};
use crate::oracle_des::ArrivalRecord;
use crate::scalar::Scalar;
use crate::sequences::DriverSource;

pub const DEFAULT_BATCHES: usize = 30;

/// Slack of the per-sample ordering checks; the compared quantities are
/// equal in exact arithmetic but summed in different orders.
pub const PATHWISE_SLACK: f64 = 1e-9;

fn below<T: Scalar>(a: &WorkloadVector<T>, b: &WorkloadVector<T>) -> bool {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .all(|(x, y)| x.to_f64() <= y.to_f64() + PATHWISE_SLACK)
}

/// Point estimate with a 95% batch-means half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl Estimate {
    /// Batch means over `batches` equal consecutive batches (the remainder
    /// only enters the point estimate). Fewer than two batches give an
    /// infinite half-width.
    pub fn batch_means(values: &[f64], batches: usize) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                half_width: f64::INFINITY,
                n,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let b = batches.min(n);
        if b < 2 {
            return Self {
                mean,
                half_width: f64::INFINITY,
                n,
            };
        }
        let size = n / b;
        let batch_means: Vec<f64> = values
            .chunks_exact(size)
            .take(b)
            .map(|c| c.iter().sum::<f64>() / size as f64)
            .collect();
        let grand = batch_means.iter().sum::<f64>() / b as f64;
        let var = batch_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (b - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (b - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        Self {
            mean,
            half_width: t * (var / b as f64).sqrt(),
            n,
        }
    }

    pub fn from_indicators(flags: impl IntoIterator<Item = bool>) -> Self {
        let values: Vec<f64> = flags
            .into_iter()
            .map(|f| if f { 1.0 } else { 0.0 })
            .collect();
        Self::batch_means(&values, DEFAULT_BATCHES)
    }

    /// Whether `target` lies within the half-width plus `extra` of the point estimate.
    pub fn covers(&self, target: f64, extra: f64) -> bool {
        (self.mean - target).abs() <= self.half_width + extra
    }
}

/// Long-run fraction of lost arrivals in a trace.
pub fn loss_probability<T: Scalar>(trace: &[ArrivalRecord<T>]) -> Result<Estimate> {
    if trace.is_empty() {
        return Err(Error::Argument("empty trace".into()));
    }
    Ok(Estimate::from_indicators(trace.iter().map(|r| r.loss)))
}

/// The four probabilities of the sandwich `P(Y̲(1) > D) <= P_l <= P(Ȳ(1) > D) <= P(Z̄_S > D)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p_lower: Estimate,
    pub p_loss: Estimate,
    pub p_upper: Estimate,
    pub p_z: Estimate,
    pub n_samples: usize,
    /// Indices whose lower or upper Loynes estimate did not stabilize.
    pub unstabilized: usize,
    /// Indices whose Z̄ truncation did not stabilize.
    pub z_unstabilized: usize,
    /// Whether the stationary workload was obtained by coupling from the past.
    pub workload_coalesced: bool,
    /// Indices where the per-sample ordering `Y̲ ≺ W ≺ Ȳ`, `Ȳ(1) <= Z̄_S` failed
    /// by more than [`PATHWISE_SLACK`].
    pub pathwise_violations: usize,
    /// Whether `p_lower <= p_loss <= p_upper <= p_z` within summed adjacent half-widths.
    pub ordered: bool,
}

/// One stationary index of a bound computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub index: i64,
    pub lower: WorkloadVector,
    pub workload: WorkloadVector,
    pub upper: WorkloadVector,
    pub z_s: f64,
    pub patience: f64,
}

/// Estimates the sandwich probabilities over indices `start .. start + n_samples`.
///
/// The stationary workload at `start` comes from coupling from the past and
/// is carried forward by the exact recursion; when coupling fails the
/// recursion is started empty `cftp.max_horizon` customers earlier and the
/// report says so.
pub fn bound_report<T: Scalar, P: DriverSource<T> + ?Sized>(
    path: &P,
    servers: usize,
    start: i64,
    n_samples: usize,
    loynes: &LoynesOptions,
    cftp_opts: &CftpOptions,
) -> Result<(BoundReport, Vec<BoundSample>)> {
    if n_samples == 0 {
        return Err(Error::Argument("at least one sample is required".into()));
    }
    let coupled = cftp(path, start, servers, cftp_opts, loynes)?;
    let workload_coalesced = coupled.value.is_some();
    let w0 = match coupled.value {
        Some(w) => w,
        None => {
            let warmup = cftp_opts.max_horizon;
            path.drivers(start - warmup as i64, warmup)
                .iter()
                .fold(WorkloadVector::zeros(servers), |w, d| phi(&w, d).next)
        }
    };
    let drivers = path.drivers(start, n_samples);
    let mut workloads = Vec::with_capacity(n_samples);
    let mut w = w0;
    for d in &drivers {
        let next = phi(&w, d).next;
        workloads.push(w);
        w = next;
    }

    struct Row<T> {
        lower: WorkloadVector<T>,
        upper: WorkloadVector<T>,
        z_s: T,
        unstable: bool,
        z_unstable: bool,
    }
    let rows: Vec<Row<T>> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<Row<T>> {
            let t = start + i as i64;
            let lower = loynes_estimate(path, t, Bound::Lower, servers, loynes)?;
            let upper = loynes_estimate(path, t, Bound::Upper, servers, loynes)?;
            let z = z_vector_stabilized(path, t, Bound::Upper, servers, loynes)?;
            Ok(Row {
                unstable: !(lower.stabilized && upper.stabilized),
                z_unstable: !z.stabilized,
                lower: lower.vector,
                upper: upper.vector,
                z_s: z.z(servers),
            })
        })
        .collect::<Result<_>>()?;

    let mut flags = [vec![], vec![], vec![], vec![]];
    let mut violations = 0;
    let mut samples = Vec::with_capacity(n_samples);
    for (i, (row, w)) in rows.iter().zip(&workloads).enumerate() {
        let d = drivers[i].patience;
        flags[0].push(row.lower.min() > d);
        flags[1].push(w.min() > d);
        flags[2].push(row.upper.min() > d);
        flags[3].push(row.z_s > d);
        if !(below(&row.lower, w)
            && below(w, &row.upper)
            && row.upper.min().to_f64() <= row.z_s.to_f64() + PATHWISE_SLACK)
        {
            violations += 1;
        }
        samples.push(BoundSample {
            index: start + i as i64,
            lower: row.lower.to_f64(),
            workload: w.to_f64(),
            upper: row.upper.to_f64(),
            z_s: row.z_s.to_f64(),
            patience: d.to_f64(),
        });
    }
    let [lo, loss, up, z] = flags.map(Estimate::from_indicators);
    let ordered = lo.mean <= loss.mean + lo.half_width + loss.half_width
        && loss.mean <= up.mean + loss.half_width + up.half_width
        && up.mean <= z.mean + up.half_width + z.half_width;
    let report = BoundReport {
        p_lower: lo,
        p_loss: loss,
        p_upper: up,
        p_z: z,
        n_samples,
        unstabilized: rows.iter().filter(|r| r.unstable).count(),
        z_unstabilized: rows.iter().filter(|r| r.z_unstable).count(),
        workload_coalesced,
        pathwise_violations: violations,
        ordered,
    };
    Ok((report, samples))
}

/// Erlang B blocking probability of `S` servers offered `a` Erlangs.
pub fn erlang_b(servers: usize, offered: f64) -> Result<f64> {
    if servers == 0 {
        return Err(Error::Argument("at least one server is required".into()));
    }
    if !(offered > 0.0 && offered.is_finite()) {
        return Err(Error::Argument(format!(
            "offered load must be positive, got {offered}"
        )));
    }
    Ok((1..=servers).fold(1.0, |b, k| offered * b / (k as f64 + offered * b)))
}

/// `P(W > x) = rho exp(-mu (1 - rho) x)` for the M/M/1 waiting time.
pub fn mm1_wait_tail(rho: f64, mu: f64, x: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Argument(format!(
            "utilisation must lie in (0, 1), got {rho}"
        )));
    }
    if !(mu > 0.0) {
        return Err(Error::Argument(format!(
            "service rate must be positive, got {mu}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::Argument(format!(
            "threshold must be non-negative, got {x}"
        )));
    }
    Ok(rho * (-mu * (1.0 - rho) * x).exp())
}
