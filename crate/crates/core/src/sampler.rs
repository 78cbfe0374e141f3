//! Monte Carlo estimators for functions too large to tabulate.
//!
//! Points are packed `u64` words; bit `j` set means `x_{j+1} = +1`.
//!
//! Randomness: samples are split into chunks of [`CHUNK`] consecutive
//! samples. Chunk `c` draws from `ChaCha8Rng::seed_from_u64(seed)` switched to
//! stream `c`, each point taking `ceil(n / 64)` calls to `next_u64` (the last
//! word masked to `n` bits). Chunk statistics are merged in chunk order, so
//! results do not depend on the number of worker threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::BooleanFunction;
use crate::error::{Error, Result};

/// Samples per independently seeded chunk.
pub const CHUNK: u64 = 4096;
/// Largest subcube dimension an estimator will enumerate.
pub const MAX_SUBCUBE: usize = 20;

/// A function on `{-1,1}^n` that can be evaluated point by point.
pub trait PointwiseFunction: Sync {
    fn n(&self) -> usize;

    /// `true` means `+1`.
    fn eval(&self, x: &[u64]) -> bool;

    /// Values on the subcube freeing `coords` at `x`. Entry `t` sets `coords[q]` to `+1`
    /// iff bit `q` of `t` is set; `out.len()` is `2^coords.len()`.
    fn subcube(&self, x: &[u64], coords: &[usize], out: &mut [bool]) {
        let mut y = x.to_vec();
        for (t, slot) in out.iter_mut().enumerate() {
            for (q, &c) in coords.iter().enumerate() {
                let bit = 1u64 << (c % 64);
                if t >> q & 1 == 1 {
                    y[c / 64] |= bit;
                } else {
                    y[c / 64] &= !bit;
                }
            }
            *slot = self.eval(&y);
        }
    }
}

impl PointwiseFunction for BooleanFunction {
    fn n(&self) -> usize {
        BooleanFunction::n(self) as usize
    }

    fn eval(&self, x: &[u64]) -> bool {
        self.get(x[0] as usize)
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Estimate {
    /// True iff `target` lies within `k` standard errors.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance with the `N - 1` denominator.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn estimate(&self, seed: u64) -> Estimate {
        Estimate {
            value: self.mean,
            stderr: (self.variance() / self.count as f64).sqrt(),
            samples: self.count,
            seed,
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, x: &mut [u64]) {
    for w in x.iter_mut() {
        *w = rng.next_u64();
    }
    if !n.is_multiple_of(64) {
        if let Some(last) = x.last_mut() {
            *last &= (1u64 << (n % 64)) - 1;
        }
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < 2 {
        return Err(Error::BadParameters(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    Ok(())
}

fn check_coords(n: usize, coords: &[usize]) -> Result<()> {
    if coords.len() > MAX_SUBCUBE {
        return Err(Error::SubcubeTooLarge(coords.len()));
    }
    if let Some(&c) = coords.iter().find(|&&c| c >= n) {
        return Err(Error::IndexNotInSet { index: c + 1 });
    }
    let mut sorted = coords.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != coords.len() {
        return Err(Error::BadParameters("repeated coordinate".into()));
    }
    Ok(())
}

/// Runs `body` on `samples` random points and returns one accumulator per output.
fn run<const K: usize, F>(n: usize, samples: u64, seed: u64, body: F) -> [Welford; K]
where
    F: Fn(&[u64], &mut Vec<bool>) -> [f64; K] + Sync,
{
    let words = n.div_ceil(64).max(1);
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<[Welford; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut x = vec![0u64; words];
            let mut scratch = Vec::new();
            let mut acc = [Welford::default(); K];
            let len = CHUNK.min(samples - c * CHUNK);
            for _ in 0..len {
                random_point(&mut rng, n, &mut x);
                let v = body(&x, &mut scratch);
                for (a, v) in acc.iter_mut().zip(v) {
                    a.push(v);
                }
            }
            acc
        })
        .collect();
    let mut total = [Welford::default(); K];
    for p in &parts {
        for (t, w) in total.iter_mut().zip(p) {
            t.merge(w);
        }
    }
    total
}

/// Estimate of `f̂(S) = E[f(x) χ_S(x)]`.
pub fn estimate_coefficient<F: PointwiseFunction + ?Sized>(
    f: &F,
    coords: &[usize],
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    check_samples(samples)?;
    check_coords(f.n(), coords)?;
    let [w] = run(f.n(), samples, seed, |x, _| {
        let minus = coords
            .iter()
            .filter(|&&c| x[c / 64] >> (c % 64) & 1 == 0)
            .count();
        let chi = if minus % 2 == 0 { 1.0 } else { -1.0 };
        [if f.eval(x) { chi } else { -chi }]
    });
    Ok(w.estimate(seed))
}

/// `2^r ∂_S f(x)` from subcube values; `r = log2(values.len())`.
fn scaled_derivative(values: &[bool]) -> i64 {
    let r = values.len().trailing_zeros();
    values
        .iter()
        .enumerate()
        .map(|(t, &v)| {
            let neg = (r - (t as u32).count_ones()) % 2 == 1;
            let fv = if v { 1 } else { -1 };
            if neg {
                -fv
            } else {
                fv
            }
        })
        .sum()
}

fn all_relevant(values: &[bool]) -> bool {
    let r = values.len().trailing_zeros();
    (0..r).all(|q| {
        let bit = 1usize << q;
        (0..values.len()).any(|t| t & bit == 0 && values[t] != values[t | bit])
    })
}

/// Coupled estimates of `JInf_S(f)` and `Inf_S(f)` from shared subcubes.
/// Per sample the joint indicator dominates `(∂_S f)²`, so the estimates are ordered too.
pub fn estimate_joint_and_t_influence<F: PointwiseFunction + ?Sized>(
    f: &F,
    coords: &[usize],
    samples: u64,
    seed: u64,
) -> Result<(Estimate, Estimate)> {
    check_samples(samples)?;
    check_coords(f.n(), coords)?;
    if coords.is_empty() {
        return Err(Error::EmptySet);
    }
    let scale = 1.0 / (1u64 << coords.len()) as f64;
    let [j, t] = run(f.n(), samples, seed, |x, buf| {
        buf.resize(1 << coords.len(), false);
        f.subcube(x, coords, buf);
        let d = scaled_derivative(buf) as f64 * scale;
        [if all_relevant(buf) { 1.0 } else { 0.0 }, d * d]
    });
    Ok((j.estimate(seed), t.estimate(seed)))
}

/// Estimate of `Inf_S(f) = E[(∂_S f)²]`.
pub fn estimate_t_influence<F: PointwiseFunction + ?Sized>(
    f: &F,
    coords: &[usize],
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    check_samples(samples)?;
    check_coords(f.n(), coords)?;
    let scale = 1.0 / (1u64 << coords.len()) as f64;
    let [t] = run(f.n(), samples, seed, |x, buf| {
        buf.resize(1 << coords.len(), false);
        f.subcube(x, coords, buf);
        let d = scaled_derivative(buf) as f64 * scale;
        [d * d]
    });
    Ok(t.estimate(seed))
}

/// Estimate of `JInf_S(f)`.
pub fn estimate_joint_influence<F: PointwiseFunction + ?Sized>(
    f: &F,
    coords: &[usize],
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    check_samples(samples)?;
    check_coords(f.n(), coords)?;
    if coords.is_empty() {
        return Err(Error::EmptySet);
    }
    let [j] = run(f.n(), samples, seed, |x, buf| {
        buf.resize(1 << coords.len(), false);
        f.subcube(x, coords, buf);
        [if all_relevant(buf) { 1.0 } else { 0.0 }]
    });
    Ok(j.estimate(seed))
}

/// Estimates of `P(f = +1)` and `P(f = -1)`; the two values sum to 1.
pub fn estimate_sign_probabilities<F: PointwiseFunction + ?Sized>(
    f: &F,
    samples: u64,
    seed: u64,
) -> Result<(Estimate, Estimate)> {
    check_samples(samples)?;
    let [w] = run(f.n(), samples, seed, |x, _| {
        [if f.eval(x) { 1.0 } else { 0.0 }]
    });
    let plus = w.estimate(seed);
    let minus = Estimate {
        value: 1.0 - plus.value,
        ..plus
    };
    Ok((plus, minus))
}

/// Estimate of `E[∂_S f] = f̂(S)`, computing `∂_S f(x)` exactly on each sampled subcube.
pub fn estimate_derivative_mean<F: PointwiseFunction + ?Sized>(
    f: &F,
    coords: &[usize],
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    check_samples(samples)?;
    check_coords(f.n(), coords)?;
    let scale = 1.0 / (1u64 << coords.len()) as f64;
    let [w] = run(f.n(), samples, seed, |x, buf| {
        buf.resize(1 << coords.len(), false);
        f.subcube(x, coords, buf);
        [scaled_derivative(buf) as f64 * scale]
    });
    Ok(w.estimate(seed))
}

/// Independent seed for the `index`-th sub-experiment (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `W^{=1}(f) = Σ_j f̂({j})²`, each term estimated by `m̂² - s²/N` to remove the
/// positive bias of a squared mean. Coordinate `j` uses `derive_seed(seed, j)`.
pub fn estimate_level_one_weight<F: PointwiseFunction + ?Sized>(
    f: &F,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    check_samples(samples)?;
    let mut value = 0.0;
    let mut var = 0.0;
    for j in 0..f.n() {
        let e = estimate_derivative_mean(f, &[j], samples, derive_seed(seed, j as u64))?;
        value += e.value * e.value - e.stderr * e.stderr;
        // delta method: d(m²) = 2m dm
        var += (2.0 * e.value * e.stderr).powi(2);
    }
    Ok(Estimate {
        value,
        stderr: var.sqrt(),
        samples: samples * f.n() as u64,
        seed,
    })
}

/// One CSV row per estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateRow {
    pub estimator: String,
    /// 1-based coordinates
    pub set: Vec<usize>,
    pub estimate: Estimate,
}

pub const CSV_HEADER: &str = "estimator,set,value,stderr,samples,seed";

impl EstimateRow {
    pub fn new(estimator: &str, coords: &[usize], estimate: Estimate) -> Self {
        EstimateRow {
            estimator: estimator.to_string(),
            set: coords.iter().map(|c| c + 1).collect(),
            estimate,
        }
    }

    /// Coordinates are separated by `;` inside the set column.
    pub fn to_csv(&self) -> String {
        let set: Vec<String> = self.set.iter().map(|c| c.to_string()).collect();
        format!(
            "{},{},{},{},{},{}",
            self.estimator,
            set.join(";"),
            self.estimate.value,
            self.estimate.stderr,
            self.estimate.samples,
            self.estimate.seed
        )
    }
}
