//! Reproducible bi-infinite driver sequences.
//!
//! A [`StationaryPath`] maps every signed customer index `n` to the triple
//! `(tau_n, sigma_n, D_n)`: the inter-arrival time after customer `n`, its
//! service time and its patience. Sampling is counter-based: the uniforms used
//! at index `n` are the words of one ChaCha8 block whose counter is derived from
//! `n`, so the shift by `k` customers is plain index translation and backward
//! schemes never have to store a path.
//!
//! Word layout of the block at index `n` (as `u64` words):
//!
//! | word | stream |
//! |------|--------|
//! | 0 | inter-arrival `tau` |
//! | 1 | service `sigma` |
//! | 2 | patience `D` |
//! | 3 | modulating-chain transition |
//! | 4 | modulating-chain initial draw |
//! | 5..8 | unused |

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const WORDS_PER_INDEX: usize = 8;
const STREAM_TAU: usize = 0;
const STREAM_SIGMA: usize = 1;
const STREAM_PATIENCE: usize = 2;
const STREAM_MODULATION: usize = 3;
const STREAM_MODULATION_INIT: usize = 4;

/// Default burn-in of the modulating chain.
pub const DEFAULT_BURN_IN: u64 = 10_000;

/// One customer's inter-arrival time, service time and patience.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverSample<T = f64> {
    pub tau: T,
    pub sigma: T,
    pub patience: T,
}

impl DriverSample<f64> {
    /// Checked constructor. Patience may be `+inf` (no impatience).
    pub fn new(tau: f64, sigma: f64, patience: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Config(format!(
                "inter-arrival time must be positive and finite, got {tau}"
            )));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!(
                "service time must be non-negative and finite, got {sigma}"
            )));
        }
        if !(patience >= 0.0) {
            return Err(Error::Config(format!(
                "patience must be non-negative, got {patience}"
            )));
        }
        Ok(Self {
            tau,
            sigma,
            patience,
        })
    }
}

impl<T: Scalar> DriverSample<T> {
    /// Effective work of the upper bounding map, `sigma + D`.
    pub fn upper_work(&self) -> T {
        self.sigma.plus(self.patience)
    }

    /// Effective work of the lower bounding map, `min(sigma, D)`.
    pub fn lower_work(&self) -> T {
        self.sigma.min_of(self.patience)
    }
}

/// Marginal law of one driver component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Distribution {
    Exponential {
        rate: f64,
    },
    Deterministic {
        value: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    ShiftedExponential {
        shift: f64,
        rate: f64,
    },
    /// Finitely supported law; under the lattice model every value must be a
    /// multiple of the lattice step.
    Discrete {
        values: Vec<f64>,
        probs: Vec<f64>,
    },
}

impl Distribution {
    /// Inverse-CDF sample for `u` in the open interval `(0, 1)`.
    pub fn sample(&self, u: f64) -> f64 {
        match self {
            Distribution::Exponential { rate } => -(-u).ln_1p() / rate,
            Distribution::Deterministic { value } => *value,
            Distribution::Uniform { low, high } => low + u * (high - low),
            Distribution::ShiftedExponential { shift, rate } => shift - (-u).ln_1p() / rate,
            Distribution::Discrete { values, probs } => {
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                // rounding slack in the cumulative sum
                *values.last().expect("validated non-empty")
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Exponential { rate } => 1.0 / rate,
            Distribution::Deterministic { value } => *value,
            Distribution::Uniform { low, high } => 0.5 * (low + high),
            Distribution::ShiftedExponential { shift, rate } => shift + 1.0 / rate,
            Distribution::Discrete { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| v * p).sum()
            }
        }
    }

    fn lower_support(&self) -> f64 {
        match self {
            Distribution::Exponential { .. } => 0.0,
            Distribution::Deterministic { value } => *value,
            Distribution::Uniform { low, .. } => *low,
            Distribution::ShiftedExponential { shift, .. } => *shift,
            Distribution::Discrete { values, .. } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Values the law can produce, when finitely many.
    fn atoms(&self) -> Option<Vec<f64>> {
        match self {
            Distribution::Deterministic { value } => Some(vec![*value]),
            Distribution::Discrete { values, .. } => Some(values.clone()),
            _ => None,
        }
    }

    fn validate(&self, what: &str, allow_infinite: bool) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("{what}: {msg}")));
        match self {
            Distribution::Exponential { rate } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return bad(format!(
                        "exponential rate must be positive and finite, got {rate}"
                    ));
                }
            }
            Distribution::Deterministic { value } => {
                if !(*value >= 0.0) || (value.is_infinite() && !allow_infinite) {
                    return bad(format!(
                        "deterministic value must be non-negative and finite, got {value}"
                    ));
                }
            }
            Distribution::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && *low >= 0.0 && high >= low) {
                    return bad(format!(
                        "uniform needs 0 <= low <= high < inf, got [{low}, {high}]"
                    ));
                }
            }
            Distribution::ShiftedExponential { shift, rate } => {
                if !(shift.is_finite() && *shift >= 0.0 && *rate > 0.0 && rate.is_finite()) {
                    return bad(format!(
                        "shifted exponential needs shift >= 0 and rate > 0, got ({shift}, {rate})"
                    ));
                }
            }
            Distribution::Discrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return bad("discrete law needs equally many values and probabilities".into());
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return bad("discrete values must be non-negative and finite".into());
                }
                if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return bad("discrete probabilities must be non-negative".into());
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad(format!("discrete probabilities sum to {total}, expected 1"));
                }
            }
        }
        Ok(())
    }
}

/// Per-customer component laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub tau: Distribution,
    pub sigma: Distribution,
    pub patience: Distribution,
}

impl Components {
    fn validate(&self, what: &str) -> Result<()> {
        self.tau.validate(&format!("{what} tau"), false)?;
        self.sigma.validate(&format!("{what} sigma"), false)?;
        self.patience.validate(&format!("{what} patience"), true)?;
        let tau_positive = match &self.tau {
            Distribution::Exponential { .. } => true,
            // the sampling uniform is never 0, so low = 0 still yields tau > 0 unless high = 0
            Distribution::Uniform { high, .. } => *high > 0.0,
            Distribution::ShiftedExponential { .. } => true,
            other => other.lower_support() > 0.0,
        };
        if !tau_positive {
            return Err(Error::Config(format!(
                "{what} tau: arrivals must be simple (tau > 0)"
            )));
        }
        Ok(())
    }

    fn sample(&self, words: &[u64; WORDS_PER_INDEX]) -> DriverSample {
        DriverSample {
            tau: self.tau.sample(unit(words[STREAM_TAU])),
            sigma: self.sigma.sample(unit(words[STREAM_SIGMA])),
            patience: self.patience.sample(unit(words[STREAM_PATIENCE])),
        }
    }
}

/// Driver model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DriverModel {
    /// Independent, identically distributed triples.
    Iid {
        tau: Distribution,
        sigma: Distribution,
        patience: Distribution,
    },
    /// Constant triples.
    Deterministic { tau: f64, sigma: f64, patience: f64 },
    /// IID triples with `tau` and `sigma` on the lattice `{k * alpha}`.
    Lattice {
        alpha: f64,
        tau: Distribution,
        sigma: Distribution,
        patience: Distribution,
    },
    /// Triples whose laws are selected by a stationary finite Markov chain.
    MarkovModulated {
        transition: Vec<Vec<f64>>,
        states: Vec<Components>,
        #[serde(default = "default_burn_in")]
        burn_in: u64,
    },
}

fn default_burn_in() -> u64 {
    DEFAULT_BURN_IN
}

/// Driver model plus seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub model: DriverModel,
    pub seed: u64,
}

impl SequenceSpec {
    pub fn new(model: DriverModel, seed: u64) -> Self {
        Self { model, seed }
    }

    pub fn iid(tau: Distribution, sigma: Distribution, patience: Distribution, seed: u64) -> Self {
        Self::new(
            DriverModel::Iid {
                tau,
                sigma,
                patience,
            },
            seed,
        )
    }

    pub fn deterministic(tau: f64, sigma: f64, patience: f64) -> Self {
        Self::new(
            DriverModel::Deterministic {
                tau,
                sigma,
                patience,
            },
            0,
        )
    }

    pub fn lattice(
        alpha: f64,
        tau: Distribution,
        sigma: Distribution,
        patience: Distribution,
        seed: u64,
    ) -> Self {
        Self::new(
            DriverModel::Lattice {
                alpha,
                tau,
                sigma,
                patience,
            },
            seed,
        )
    }

    /// Lattice step, when the model is a lattice model.
    pub fn alpha(&self) -> Option<f64> {
        match &self.model {
            DriverModel::Lattice { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.model {
            DriverModel::Iid {
                tau,
                sigma,
                patience,
            } => Components {
                tau: tau.clone(),
                sigma: sigma.clone(),
                patience: patience.clone(),
            }
            .validate("iid"),
            DriverModel::Deterministic {
                tau,
                sigma,
                patience,
            } => DriverSample::new(*tau, *sigma, *patience).map(|_| ()),
            DriverModel::Lattice {
                alpha,
                tau,
                sigma,
                patience,
            } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::Config(format!(
                        "lattice step must be positive and finite, got {alpha}"
                    )));
                }
                Components {
                    tau: tau.clone(),
                    sigma: sigma.clone(),
                    patience: patience.clone(),
                }
                .validate("lattice")?;
                for (name, dist) in [("tau", tau), ("sigma", sigma)] {
                    let atoms = dist.atoms().ok_or_else(|| {
                        Error::Config(format!(
                            "lattice {name}: must be deterministic or discrete on the lattice"
                        ))
                    })?;
                    for v in atoms {
                        lattice_steps(v, *alpha).ok_or_else(|| {
                            Error::Config(format!(
                                "lattice {name}: value {v} is not a multiple of {alpha}"
                            ))
                        })?;
                    }
                }
                Ok(())
            }
            DriverModel::MarkovModulated {
                transition,
                states,
                burn_in,
            } => {
                let m = states.len();
                if m == 0 {
                    return Err(Error::Config(
                        "markov-modulated model needs at least one state".into(),
                    ));
                }
                if *burn_in == 0 {
                    return Err(Error::Config("burn-in must be positive".into()));
                }
                if transition.len() != m || transition.iter().any(|row| row.len() != m) {
                    return Err(Error::Config(format!("transition matrix must be {m}x{m}")));
                }
                for (i, row) in transition.iter().enumerate() {
                    if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                        return Err(Error::Config(format!(
                            "transition row {i} has a negative or non-finite entry"
                        )));
                    }
                    let total: f64 = row.iter().sum();
                    if (total - 1.0).abs() > 1e-9 {
                        return Err(Error::Config(format!(
                            "transition row {i} sums to {total}, not a stochastic matrix"
                        )));
                    }
                }
                if !is_irreducible(transition) {
                    return Err(Error::Config("modulating chain is not irreducible".into()));
                }
                for (i, c) in states.iter().enumerate() {
                    c.validate(&format!("state {i}"))?;
                }
                Ok(())
            }
        }
    }
}

/// Number of lattice steps in `value`, if it lies on the lattice up to a
/// relative `1e-9` (so `0.3` is three steps of `0.1`).
pub fn lattice_steps(value: f64, alpha: f64) -> Option<u64> {
    let ratio = value / alpha;
    let k = ratio.round();
    if (0.0..9.0e15).contains(&k) && (ratio - k).abs() <= 1e-9 * k.max(1.0) {
        Some(k as u64)
    } else {
        None
    }
}

/// Largest `k` with `k * alpha <= patience`; `u64::MAX` for infinite patience.
///
/// A patience within a relative `1e-9` of a lattice point counts as that
/// point, so that `0.3` on the `0.1` lattice is three steps.
pub fn patience_steps(patience: f64, alpha: f64) -> u64 {
    if patience.is_infinite() {
        return u64::MAX;
    }
    let ratio = patience / alpha;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        return nearest.max(0.0) as u64;
    }
    ratio.floor().max(0.0) as u64
}

fn is_irreducible(p: &[Vec<f64>]) -> bool {
    let m = p.len();
    (0..m).all(|start| {
        let mut seen = vec![false; m];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for j in 0..m {
                if p[i][j] > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().all(|&s| s)
    })
}

/// Stationary law of an irreducible stochastic matrix, by Gaussian elimination
/// on `pi (P - I) = 0` with the last equation replaced by normalisation.
#[allow(clippy::needless_range_loop)]
pub fn stationary_distribution(p: &[Vec<f64>]) -> Vec<f64> {
    let m = p.len();
    // a[row][col], unknowns pi_col; row r is the balance equation of state r
    let mut a = vec![vec![0.0; m + 1]; m];
    for r in 0..m {
        for c in 0..m {
            a[r][c] = p[c][r] - if r == c { 1.0 } else { 0.0 };
        }
    }
    for c in 0..m {
        a[m - 1][c] = 1.0;
    }
    a[m - 1][m] = 1.0;
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty");
        a.swap(col, pivot);
        let d = a[col][col];
        for k in col..=m {
            a[col][k] /= d;
        }
        for r in 0..m {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for k in col..=m {
                        a[r][k] -= f * a[col][k];
                    }
                }
            }
        }
    }
    a.iter().map(|row| row[m].max(0.0)).collect()
}

/// Maps a 64-bit word into the open unit interval.
#[inline]
fn unit(word: u64) -> f64 {
    ((word >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn block_counter(n: i64) -> u64 {
    // offset binary: consecutive indices stay consecutive across zero
    (n as u64) ^ (1u64 << 63)
}

fn inverse_cdf(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

#[derive(Debug)]
enum Compiled {
    Iid(Components),
    Deterministic(DriverSample),
    Lattice {
        alpha: f64,
        components: Components,
    },
    Modulated {
        cumulative: Vec<Vec<f64>>,
        stationary_cumulative: Vec<f64>,
        states: Vec<Components>,
        burn_in: u64,
    },
}

#[derive(Debug)]
struct PathInner {
    spec: SequenceSpec,
    rng: ChaCha8Rng,
    compiled: Compiled,
}

/// Index-addressed stationary driver sequence.
///
/// Cloning is cheap; all clones share the compiled specification.
#[derive(Debug, Clone)]
pub struct StationaryPath {
    inner: Arc<PathInner>,
    offset: i64,
}

impl StationaryPath {
    pub fn new(spec: SequenceSpec) -> Result<Self> {
        spec.validate()?;
        let compiled = match &spec.model {
            DriverModel::Iid {
                tau,
                sigma,
                patience,
            } => Compiled::Iid(Components {
                tau: tau.clone(),
                sigma: sigma.clone(),
                patience: patience.clone(),
            }),
            DriverModel::Deterministic {
                tau,
                sigma,
                patience,
            } => Compiled::Deterministic(DriverSample::new(*tau, *sigma, *patience)?),
            DriverModel::Lattice {
                alpha,
                tau,
                sigma,
                patience,
            } => Compiled::Lattice {
                alpha: *alpha,
                components: Components {
                    tau: tau.clone(),
                    sigma: sigma.clone(),
                    patience: patience.clone(),
                },
            },
            DriverModel::MarkovModulated {
                transition,
                states,
                burn_in,
            } => {
                let cumulative = transition.iter().map(|row| cumulate(row)).collect();
                let pi = stationary_distribution(transition);
                Compiled::Modulated {
                    cumulative,
                    stationary_cumulative: cumulate(&pi),
                    states: states.clone(),
                    burn_in: *burn_in,
                }
            }
        };
        let rng = ChaCha8Rng::seed_from_u64(spec.seed);
        Ok(Self {
            inner: Arc::new(PathInner {
                spec,
                rng,
                compiled,
            }),
            offset: 0,
        })
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.inner.spec
    }

    /// Current shift relative to the unshifted path.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// The path composed with the shift by `k` customers.
    pub fn shifted(&self, k: i64) -> Self {
        Self {
            inner: Arc::clone(&self.inner),
            offset: self.offset + k,
        }
    }

    /// Driver of customer `n`.
    pub fn sample_at(&self, n: i64) -> DriverSample {
        let m = n + self.offset;
        if let Compiled::Deterministic(d) = &self.inner.compiled {
            return *d;
        }
        let words = self.words_at(m);
        self.sample_from_words(m, &words)
    }

    /// Drivers of customers `start .. start + len`, in order.
    pub fn window(&self, start: i64, len: usize) -> Vec<DriverSample> {
        if let Compiled::Deterministic(d) = &self.inner.compiled {
            return vec![*d; len];
        }
        let first = start + self.offset;
        let mut cursor = self.cursor(first);
        (0..len)
            .map(|i| {
                let words = cursor.next_words();
                self.sample_from_words(first + i as i64, &words)
            })
            .collect()
    }

    /// State of the modulating chain at customer `n`, when the model is modulated.
    pub fn modulation_state(&self, n: i64) -> Option<usize> {
        match &self.inner.compiled {
            Compiled::Modulated { .. } => Some(self.modulation_at(n + self.offset)),
            _ => None,
        }
    }

    /// Exact integer view of a lattice path (values in units of alpha).
    pub fn lattice(&self) -> Result<LatticePath> {
        match &self.inner.compiled {
            Compiled::Lattice { alpha, .. } => Ok(LatticePath {
                path: self.clone(),
                alpha: *alpha,
            }),
            _ => Err(Error::Config(
                "exact lattice mode requires the lattice model".into(),
            )),
        }
    }

    fn sample_from_words(&self, m: i64, words: &[u64; WORDS_PER_INDEX]) -> DriverSample {
        match &self.inner.compiled {
            Compiled::Iid(c) => c.sample(words),
            Compiled::Deterministic(d) => *d,
            Compiled::Lattice { components, .. } => components.sample(words),
            Compiled::Modulated { states, .. } => states[self.modulation_at(m)].sample(words),
        }
    }

    fn cursor(&self, first: i64) -> Cursor {
        let mut rng = self.inner.rng.clone();
        rng.set_word_pos((block_counter(first) as u128) << 4);
        Cursor { rng }
    }

    fn words_at(&self, m: i64) -> [u64; WORDS_PER_INDEX] {
        self.cursor(m).next_words()
    }

    /// Backward coupling of the modulating chain: all states started at
    /// `m - t` are driven by the shared per-index transition uniforms; the
    /// first `t` (doubling, up to the burn-in) at which they merge gives the
    /// two-sided stationary value. Otherwise the chain is started from its
    /// stationary law at `m - burn_in`.
    fn modulation_at(&self, m: i64) -> usize {
        let Compiled::Modulated {
            cumulative,
            stationary_cumulative,
            burn_in,
            ..
        } = &self.inner.compiled
        else {
            unreachable!("modulation_at on an unmodulated path");
        };
        let k = cumulative.len();
        if k == 1 {
            return 0;
        }
        let burn_in = *burn_in as i64;
        let mut t: i64 = 1;
        loop {
            let t_eff = t.min(burn_in);
            let transitions = self.transition_uniforms(m - t_eff + 1, t_eff as usize);
            let mut states: Vec<usize> = (0..k).collect();
            for &u in &transitions {
                for s in states.iter_mut() {
                    *s = inverse_cdf(&cumulative[*s], u);
                }
            }
            if states.iter().all(|&s| s == states[0]) {
                return states[0];
            }
            if t_eff == burn_in {
                let start = m - burn_in;
                let init = unit(self.words_at(start)[STREAM_MODULATION_INIT]);
                let mut s = inverse_cdf(stationary_cumulative, init);
                for &u in &transitions {
                    s = inverse_cdf(&cumulative[s], u);
                }
                return s;
            }
            t *= 2;
        }
    }

    fn transition_uniforms(&self, first: i64, len: usize) -> Vec<f64> {
        let mut cursor = self.cursor(first);
        (0..len)
            .map(|_| unit(cursor.next_words()[STREAM_MODULATION]))
            .collect()
    }
}

fn cumulate(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

struct Cursor {
    rng: ChaCha8Rng,
}

impl Cursor {
    fn next_words(&mut self) -> [u64; WORDS_PER_INDEX] {
        let mut w = [0u64; WORDS_PER_INDEX];
        for x in w.iter_mut() {
            *x = self.rng.next_u64();
        }
        w
    }
}

/// Exact lattice view of a path: `tau` and `sigma` in lattice steps, patience
/// as the largest number of whole steps it covers.
#[derive(Debug, Clone)]
pub struct LatticePath {
    path: StationaryPath,
    alpha: f64,
}

impl LatticePath {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn real(&self) -> &StationaryPath {
        &self.path
    }

    pub fn shifted(&self, k: i64) -> Self {
        Self {
            path: self.path.shifted(k),
            alpha: self.alpha,
        }
    }

    fn convert(&self, d: DriverSample) -> DriverSample<u64> {
        DriverSample {
            tau: lattice_steps(d.tau, self.alpha).expect("validated lattice tau"),
            sigma: lattice_steps(d.sigma, self.alpha).expect("validated lattice sigma"),
            patience: patience_steps(d.patience, self.alpha),
        }
    }
}

/// Anything that yields one driver per signed customer index.
pub trait DriverSource<T: Scalar>: Sync {
    fn driver(&self, n: i64) -> DriverSample<T>;

    fn drivers(&self, start: i64, len: usize) -> Vec<DriverSample<T>> {
        (0..len).map(|i| self.driver(start + i as i64)).collect()
    }

    /// Seed used to derive auxiliary randomness (e.g. sandwich points).
    fn seed(&self) -> u64;
}

impl DriverSource<f64> for StationaryPath {
    fn driver(&self, n: i64) -> DriverSample {
        self.sample_at(n)
    }

    fn drivers(&self, start: i64, len: usize) -> Vec<DriverSample> {
        self.window(start, len)
    }

    fn seed(&self) -> u64 {
        self.inner.spec.seed
    }
}

impl DriverSource<u64> for LatticePath {
    fn driver(&self, n: i64) -> DriverSample<u64> {
        self.convert(self.path.sample_at(n))
    }

    fn drivers(&self, start: i64, len: usize) -> Vec<DriverSample<u64>> {
        self.path
            .window(start, len)
            .into_iter()
            .map(|d| self.convert(d))
            .collect()
    }

    fn seed(&self) -> u64 {
        self.path.seed()
    }
}
