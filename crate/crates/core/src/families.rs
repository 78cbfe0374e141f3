//! Named function families: dictators, parities, majorities, tribes and hypertribes.
//!
//! True/false are encoded as `+1`/`-1`, so an AND of coordinates is `+1` only when
//! all of them are `+1`.

use num_integer::binomial;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cube::{check_dim, BooleanFunction, HARD_MAX_N};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::sampler::PointwiseFunction;

/// `x_i` for a 1-based coordinate.
pub fn dictator(n: u32, coord: usize) -> Result<BooleanFunction> {
    if coord == 0 || coord > n as usize {
        return Err(Error::BadParameters(format!(
            "coordinate {coord} not in [1, {n}]"
        )));
    }
    BooleanFunction::from_fn(n, |b| b >> (coord - 1) & 1 == 1)
}

/// `χ_[n](x) = Π x_i`.
pub fn parity(n: u32) -> Result<BooleanFunction> {
    BooleanFunction::from_fn(n, |b| (n - b.count_ones()).is_multiple_of(2))
}

pub fn majority(n: u32) -> Result<BooleanFunction> {
    if n.is_multiple_of(2) {
        return Err(Error::BadParameters(format!(
            "majority needs odd n, got {n}"
        )));
    }
    BooleanFunction::from_fn(n, |b| 2 * b.count_ones() > n)
}

pub fn and(n: u32) -> Result<BooleanFunction> {
    let all = (1usize << n) - 1;
    BooleanFunction::from_fn(n, |b| b == all)
}

pub fn or(n: u32) -> Result<BooleanFunction> {
    BooleanFunction::from_fn(n, |b| b != 0)
}

/// OR of ANDs over the consecutive blocks `{1..w}, {w+1..2w}, …`.
pub fn tribes(n: u32, w: u32) -> Result<BooleanFunction> {
    if w == 0 || !n.is_multiple_of(w) {
        return Err(Error::BadParameters(format!(
            "tribe width {w} must divide n = {n}"
        )));
    }
    let block = (1usize << w) - 1;
    BooleanFunction::from_fn(n, |b| (0..n / w).any(|j| (b >> (j * w)) & block == block))
}

/// How candidate blocks are proposed to the greedy packer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateOrder {
    /// uniformly random `k`-sets from a seeded stream
    Random,
    /// `k`-sets in lexicographic order
    Lexicographic,
}

/// A family of `k`-subsets of `[n]` in which every `d`-set lies in at most one block.
///
/// Blocks are sorted 0-based coordinate lists; they serialize 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packing {
    n: u32,
    k: u32,
    d: u32,
    seed: u64,
    blocks: Vec<Vec<u32>>,
}

#[derive(Serialize)]
struct PackingDoc {
    n: u32,
    k: u32,
    d: u32,
    seed: u64,
    blocks: Vec<Vec<u32>>,
}

impl Serialize for Packing {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PackingDoc {
            n: self.n,
            k: self.k,
            d: self.d,
            seed: self.seed,
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(|c| c + 1).collect())
                .collect(),
        }
        .serialize(s)
    }
}

fn check_packing_params(n: u32, k: u32, d: u32) -> Result<()> {
    if d == 0 || k < d || n < k {
        return Err(Error::BadParameters(format!(
            "need n >= k >= d >= 1, got n = {n}, k = {k}, d = {d}"
        )));
    }
    Ok(())
}

/// Colex rank of a sorted set: `Σ_i C(c_i, i + 1)`.
fn colex_rank(set: &[u32]) -> u64 {
    set.iter()
        .enumerate()
        .map(|(i, &c)| binomial(c as u64, i as u64 + 1))
        .sum()
}

/// Calls `visit` on every `d`-subset of the sorted `set`.
fn for_each_subset(set: &[u32], d: usize, mut visit: impl FnMut(&[u32]) -> bool) -> bool {
    fn rec(
        set: &[u32],
        d: usize,
        start: usize,
        cur: &mut Vec<u32>,
        visit: &mut dyn FnMut(&[u32]) -> bool,
    ) -> bool {
        if cur.len() == d {
            return visit(cur);
        }
        let need = d - cur.len();
        for i in start..=set.len() - need {
            cur.push(set[i]);
            let go_on = rec(set, d, i + 1, cur, visit);
            cur.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
    rec(set, d, 0, &mut Vec::with_capacity(d), &mut visit)
}

struct Bitset(Vec<u64>);

impl Bitset {
    fn new(len: u64) -> Self {
        Bitset(vec![0; len.div_ceil(64) as usize])
    }
    fn get(&self, i: u64) -> bool {
        self.0[(i / 64) as usize] >> (i % 64) & 1 == 1
    }
    fn set(&mut self, i: u64) {
        self.0[(i / 64) as usize] |= 1 << (i % 64);
    }
    fn count(&self) -> u64 {
        self.0.iter().map(|w| w.count_ones() as u64).sum()
    }
}

/// Greedy packer state: accepted blocks and the covered `d`-sets.
struct Packer {
    d: usize,
    covered: Bitset,
    blocks: Vec<Vec<u32>>,
}

impl Packer {
    fn offer(&mut self, block: Vec<u32>) {
        let covered = &self.covered;
        let free = for_each_subset(&block, self.d, |s| !covered.get(colex_rank(s)));
        if free {
            let covered = &mut self.covered;
            for_each_subset(&block, self.d, |s| {
                covered.set(colex_rank(s));
                true
            });
            self.blocks.push(block);
        }
    }
}

/// Advances to the next `k`-set in lexicographic order; false after the last one.
fn next_lex(cur: &mut [u32], n: u32) -> bool {
    let k = cur.len();
    for i in (0..k).rev() {
        if cur[i] < n - (k - i) as u32 {
            cur[i] += 1;
            for j in i + 1..k {
                cur[j] = cur[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Attempt budget `⌈50 · C(n,d) / C(k,d)⌉`.
pub fn attempt_budget(n: u32, k: u32, d: u32) -> u64 {
    let num = 50 * binomial(n as u128, d as u128);
    num.div_ceil(binomial(k as u128, d as u128)) as u64
}

/// Seeded random-greedy `d`-set-disjoint packing of `k`-sets.
pub fn greedy_packing(n: u32, k: u32, d: u32, seed: u64) -> Result<Packing> {
    greedy_packing_with(n, k, d, seed, CandidateOrder::Random)
}

pub fn greedy_packing_with(
    n: u32,
    k: u32,
    d: u32,
    seed: u64,
    order: CandidateOrder,
) -> Result<Packing> {
    check_packing_params(n, k, d)?;
    let total = binomial(n as u64, d as u64);
    let mut packer = Packer {
        d: d as usize,
        covered: Bitset::new(total),
        blocks: Vec::new(),
    };
    let budget = attempt_budget(n, k, d);
    match order {
        CandidateOrder::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..budget {
                let mut block: Vec<u32> = sample(&mut rng, n as usize, k as usize)
                    .into_iter()
                    .map(|c| c as u32)
                    .collect();
                block.sort_unstable();
                packer.offer(block);
            }
        }
        CandidateOrder::Lexicographic => {
            let mut cur: Vec<u32> = (0..k).collect();
            for _ in 0..budget {
                packer.offer(cur.clone());
                if !next_lex(&mut cur, n) {
                    break;
                }
            }
        }
    }
    let mut blocks = packer.blocks;
    blocks.sort();
    Ok(Packing {
        n,
        k,
        d,
        seed,
        blocks,
    })
}

/// Summary of how much of `[n]_d` a packing covers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageStats {
    pub covered_d_sets: u64,
    pub total_d_sets: u64,
    pub block_count: u64,
    pub coverage_ratio: f64,
    /// `t · 2^{-k}`
    pub block_mass: Dyadic,
    pub reaches_half: bool,
}

impl Packing {
    /// Validates and wraps explicit blocks (0-based coordinates).
    pub fn from_blocks(
        n: u32,
        k: u32,
        d: u32,
        seed: u64,
        mut blocks: Vec<Vec<u32>>,
    ) -> Result<Self> {
        check_packing_params(n, k, d)?;
        for b in &mut blocks {
            b.sort_unstable();
            b.dedup();
            if b.len() != k as usize || b.iter().any(|&c| c >= n) {
                return Err(Error::BadParameters(format!(
                    "block {b:?} is not a {k}-subset of [n]"
                )));
            }
        }
        blocks.sort();
        let p = Packing {
            n,
            k,
            d,
            seed,
            blocks,
        };
        if !p.is_valid() {
            return Err(Error::BadParameters("blocks share a d-set".into()));
        }
        Ok(p)
    }

    /// The partition `{1..w}, {w+1..2w}, …` used by plain tribes; it is `1`-set-disjoint.
    pub fn partition(n: u32, w: u32) -> Result<Self> {
        if w == 0 || !n.is_multiple_of(w) {
            return Err(Error::BadParameters(format!(
                "tribe width {w} must divide n = {n}"
            )));
        }
        let blocks = (0..n / w).map(|j| (j * w..(j + 1) * w).collect()).collect();
        Ok(Packing {
            n,
            k: w,
            d: 1,
            seed: 0,
            blocks,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Every `d`-set lies in at most one block.
    pub fn is_valid(&self) -> bool {
        let mut seen = Bitset::new(binomial(self.n as u64, self.d as u64));
        self.blocks.iter().all(|b| {
            for_each_subset(b, self.d as usize, |s| {
                let r = colex_rank(s);
                if seen.get(r) {
                    return false;
                }
                seen.set(r);
                true
            })
        })
    }

    /// Distinct blocks meet in at most `d - 1` points.
    pub fn pairwise_intersections_ok(&self) -> bool {
        let lim = self.d as usize;
        self.blocks.iter().enumerate().all(|(i, a)| {
            self.blocks[i + 1..]
                .iter()
                .all(|b| a.iter().filter(|c| b.binary_search(c).is_ok()).count() < lim)
        })
    }

    pub fn coverage_stats(&self) -> CoverageStats {
        let total = binomial(self.n as u64, self.d as u64);
        let mut covered = Bitset::new(total);
        for b in &self.blocks {
            for_each_subset(b, self.d as usize, |s| {
                covered.set(colex_rank(s));
                true
            });
        }
        let c = covered.count();
        CoverageStats {
            covered_d_sets: c,
            total_d_sets: total,
            block_count: self.blocks.len() as u64,
            coverage_ratio: if total == 0 {
                0.0
            } else {
                c as f64 / total as f64
            },
            block_mass: Dyadic::from_scaled(self.blocks.len() as i128, self.k),
            reaches_half: 2 * c >= total,
        }
    }

    /// For every `s ≤ d` and every `s`-set `I`: `#{A ∋ I} · C(k-s, d-s) ≤ C(n-s, d-s)`.
    pub fn check_subset_bound(&self) -> bool {
        let (n, k, d) = (self.n as u128, self.k as u128, self.d as u128);
        for s in 0..=self.d as usize {
            let lhs_unit = binomial(k - s as u128, d - s as u128);
            let rhs = binomial(n - s as u128, d - s as u128);
            let mut counts = std::collections::HashMap::<Vec<u32>, u128>::new();
            for b in &self.blocks {
                for_each_subset(b, s, |sub| {
                    *counts.entry(sub.to_vec()).or_insert(0) += 1;
                    true
                });
            }
            if counts.values().any(|&c| c * lhs_unit > rhs) {
                return false;
            }
        }
        true
    }

    /// `t ≤ C(n,d) / C(k,d)`.
    pub fn check_block_count_bound(&self) -> bool {
        let t = self.blocks.len() as u128;
        t * binomial(self.k as u128, self.d as u128) <= binomial(self.n as u128, self.d as u128)
    }
}

/// `round(d · log2(n / log2 n))`, clamped to `[d, n]`, and whether rounding changed it.
pub fn default_block_size(n: u32, d: u32) -> Result<(u32, bool)> {
    if n < 2 || d == 0 || d > n {
        return Err(Error::BadParameters(format!(
            "no default block size for n = {n}, d = {d}"
        )));
    }
    let l = (n as f64).log2();
    let x = d as f64 * (n as f64 / l).log2();
    let k = (x.round() as i64).clamp(d as i64, n as i64) as u32;
    Ok((k, (x - k as f64).abs() > 1e-9))
}

/// Parameters and packing behind a hypertribe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TribeSpec {
    pub n: u32,
    pub k: u32,
    pub d: u32,
    pub seed: u64,
    /// true when the default `k` was not an integer before rounding
    pub k_rounded: bool,
    pub packing: Packing,
}

/// `H(x) = OR_{A} AND_{i ∈ A} x_i` over the blocks of a packing.
#[derive(Clone, Debug)]
pub struct Hypertribe {
    spec: TribeSpec,
    /// per block: (word index, bit mask) pairs
    words: Vec<Vec<(usize, u64)>>,
}

pub fn hypertribe(n: u32, d: u32, seed: u64, k_override: Option<u32>) -> Result<Hypertribe> {
    if d < 2 {
        return Err(Error::BadParameters(format!(
            "hypertribes need d >= 2, got {d}"
        )));
    }
    let (k, k_rounded) = match k_override {
        Some(k) => (k, false),
        None => default_block_size(n, d)?,
    };
    let packing = greedy_packing(n, k, d, seed)?;
    Ok(Hypertribe::new(TribeSpec {
        n,
        k,
        d,
        seed,
        k_rounded,
        packing,
    }))
}

impl Hypertribe {
    pub fn new(spec: TribeSpec) -> Self {
        let words = spec
            .packing
            .blocks()
            .iter()
            .map(|b| {
                let mut w: Vec<(usize, u64)> = Vec::new();
                for &c in b {
                    let (wi, bit) = ((c / 64) as usize, 1u64 << (c % 64));
                    match w.last_mut() {
                        Some((i, m)) if *i == wi => *m |= bit,
                        _ => w.push((wi, bit)),
                    }
                }
                w
            })
            .collect();
        Hypertribe { spec, words }
    }

    /// Plain tribes over the consecutive partition into width-`w` blocks.
    pub fn tribes(n: u32, w: u32) -> Result<Self> {
        let packing = Packing::partition(n, w)?;
        Ok(Hypertribe::new(TribeSpec {
            n,
            k: w,
            d: 1,
            seed: 0,
            k_rounded: false,
            packing,
        }))
    }

    pub fn spec(&self) -> &TribeSpec {
        &self.spec
    }

    pub fn packing(&self) -> &Packing {
        &self.spec.packing
    }

    /// Dense truth table; fails above `cap`.
    pub fn to_boolean_function(&self, cap: u32) -> Result<BooleanFunction> {
        check_dim(self.spec.n, cap.min(HARD_MAX_N))?;
        BooleanFunction::from_fn(self.spec.n, |b| self.eval(&[b as u64]))
    }
}

impl PointwiseFunction for Hypertribe {
    fn n(&self) -> usize {
        self.spec.n as usize
    }

    fn eval(&self, x: &[u64]) -> bool {
        self.words
            .iter()
            .any(|blk| blk.iter().all(|&(w, m)| x[w] & m == m))
    }

    fn subcube(&self, x: &[u64], coords: &[usize], out: &mut [bool]) {
        let r = coords.len();
        let mut cm = vec![0u64; x.len()];
        for &c in coords {
            cm[c / 64] |= 1 << (c % 64);
        }
        out.iter_mut().for_each(|v| *v = false);
        // a block can fire inside the subcube iff its bits outside `coords` are all +1;
        // it then fires exactly on the points that set its bits inside `coords`
        for blk in &self.words {
            if !blk.iter().all(|&(w, m)| (x[w] | cm[w]) & m == m) {
                continue;
            }
            let mut need = 0usize;
            for (q, &c) in coords.iter().enumerate() {
                let (wi, bit) = (c / 64, 1u64 << (c % 64));
                if blk.iter().any(|&(w, m)| w == wi && m & bit != 0) {
                    need |= 1 << q;
                }
            }
            out[need] = true;
        }
        // close upwards: out[t] = OR of marks at submasks of t
        for q in 0..r {
            let bit = 1usize << q;
            for t in 0..out.len() {
                if t & bit != 0 && out[t ^ bit] {
                    out[t] = true;
                }
            }
        }
    }
}
