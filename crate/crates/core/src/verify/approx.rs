//! Nearest Boolean function of bounded degree, by exhaustive or lattice search.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::cube::{check_dim, inverse_fwht_in_place, masks_of_size, BooleanFunction, IndexSet};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::influence::max_influence;

/// Largest `n` for the search over all `2^{2^n}` functions.
pub const EXHAUSTIVE_MAX_N: u32 = 4;
/// Largest `n` for the coefficient-lattice search.
pub const LATTICE_MAX_N: u32 = 10;
/// Branch-and-bound node limit of the lattice search.
pub const LATTICE_NODE_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxMethod {
    /// exhaustive when `n <= 4`, otherwise an error
    Auto,
    Exhaustive,
    Lattice,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientDeviation {
    pub set: IndexSet,
    pub deviation: Dyadic,
}

/// A closest Boolean `g` with `deg g <= d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApproxResult {
    pub d: u32,
    #[serde(serialize_with = "ser_tt")]
    pub g: BooleanFunction,
    /// `‖f - g‖₂² = 4 · dist(f, g) / 2^n`
    pub distance_sq: Dyadic,
    pub hamming: u64,
    /// `|f̂(J) - ĝ(J)|` for every `|J| <= d`
    pub coeff_deviations: Vec<CoefficientDeviation>,
    /// false when several functions attain the minimum; `g` is then the one whose
    /// truth table is smallest reading row 0 first with `-1 < +1`
    pub is_unique: bool,
    pub method: ApproxMethod,
}

fn ser_tt<S: serde::Serializer>(g: &BooleanFunction, s: S) -> std::result::Result<S::Ok, S::Error> {
    let bits: String = (0..g.len())
        .map(|b| if g.get(b) { '1' } else { '0' })
        .collect();
    s.serialize_str(&bits)
}

type ClassCache = Mutex<HashMap<(u32, u32), Arc<Vec<u64>>>>;

/// Truth-table words of every Boolean function on `n <= 4` bits of degree at most `d`.
pub fn low_degree_class(n: u32, d: u32) -> Result<Arc<Vec<u64>>> {
    check_dim(n, EXHAUSTIVE_MAX_N)?;
    static CACHE: OnceLock<ClassCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("cache lock");
    let entry = guard.entry((n, d)).or_insert_with(|| {
        let count = 1u64 << (1u32 << n);
        Arc::new(
            (0..count)
                .filter(|&w| BooleanFunction::from_index(n, w).fwht().degree() <= d)
                .collect(),
        )
    });
    Ok(Arc::clone(entry))
}

/// Picks the minimizers of the Hamming distance and applies the tie rule.
fn select(
    f: &BooleanFunction,
    candidates: impl Iterator<Item = BooleanFunction>,
) -> Result<(BooleanFunction, u64, bool)> {
    let mut best: Option<(BooleanFunction, u64)> = None;
    let mut ties = 0usize;
    for g in candidates {
        let h = f.hamming(&g)?;
        match &best {
            Some((bg, bh)) if h == *bh => {
                ties += 1;
                if g.cmp_truth_table(bg).is_lt() {
                    best = Some((g, h));
                }
            }
            Some((_, bh)) if h > *bh => {}
            _ => {
                ties = 1;
                best = Some((g, h));
            }
        }
    }
    let (g, h) = best.ok_or_else(|| Error::BadParameters("empty candidate class".into()))?;
    Ok((g, h, ties == 1))
}

fn exhaustive(f: &BooleanFunction, d: u32) -> Result<(BooleanFunction, u64, bool)> {
    let n = f.n();
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::SearchSpaceTooLarge(format!(
            "exhaustive search needs n <= {EXHAUSTIVE_MAX_N}, got {n}"
        )));
    }
    let class = low_degree_class(n, d)?;
    select(f, class.iter().map(|&w| BooleanFunction::from_index(n, w)))
}

/// Branch and bound over integer vectors `m_S`, `|S| <= d`, with `ĝ(S) = m_S / 2^e`,
/// `e = max(d - 1, 0)` and `Σ m_S² = 4^e`, maximizing `Σ f̂(S) m_S`. Leaves are
/// kept only if they reconstruct a Boolean function.
struct Lattice {
    n: u32,
    e: u32,
    masks: Vec<u32>,
    c: Vec<i64>,
    /// suffix sums of `c²`
    tail: Vec<i128>,
    m: Vec<i64>,
    best: i128,
    found: Vec<BooleanFunction>,
    nodes: u64,
}

impl Lattice {
    fn run(&mut self, idx: usize, remaining: i64, score: i128) -> Result<()> {
        self.nodes += 1;
        if self.nodes > LATTICE_NODE_BUDGET {
            return Err(Error::SearchSpaceTooLarge(format!(
                "lattice search exceeded {LATTICE_NODE_BUDGET} nodes"
            )));
        }
        if remaining == 0 {
            return self.leaf(score);
        }
        if idx == self.masks.len() {
            return Ok(());
        }
        // Cauchy-Schwarz bound on what the remaining coordinates can add
        let room = (remaining as i128 * self.tail[idx]) as f64;
        let bound = score + room.sqrt().floor() as i128 + 1;
        if bound < self.best {
            return Ok(());
        }
        let cap = (remaining as f64).sqrt() as i64;
        let sign = if self.c[idx] < 0 { -1 } else { 1 };
        let mut values: Vec<i64> = Vec::with_capacity(2 * cap as usize + 1);
        for a in (1..=cap).rev() {
            values.push(sign * a);
            values.push(-sign * a);
        }
        values.push(0);
        for v in values {
            if v * v > remaining {
                continue;
            }
            self.m[idx] = v;
            self.run(
                idx + 1,
                remaining - v * v,
                score + (self.c[idx] * v) as i128,
            )?;
        }
        self.m[idx] = 0;
        Ok(())
    }

    fn leaf(&mut self, score: i128) -> Result<()> {
        if score < self.best {
            return Ok(());
        }
        let len = 1usize << self.n;
        let mut g = vec![0i64; len];
        for (i, &s) in self.masks.iter().enumerate() {
            g[s as usize] = self.m[i];
        }
        inverse_fwht_in_place(&mut g);
        let one = 1i64 << self.e;
        if g.iter().any(|&v| v != one && v != -one) {
            return Ok(());
        }
        let func = BooleanFunction::from_fn(self.n, |b| g[b] > 0)?;
        if score > self.best {
            self.best = score;
            self.found.clear();
        }
        self.found.push(func);
        Ok(())
    }
}

fn lattice(f: &BooleanFunction, d: u32) -> Result<(BooleanFunction, u64, bool)> {
    let n = f.n();
    if n > LATTICE_MAX_N {
        return Err(Error::SearchSpaceTooLarge(format!(
            "lattice search needs n <= {LATTICE_MAX_N}, got {n}"
        )));
    }
    let t = f.fwht();
    let mut masks: Vec<u32> = (0..=d.min(n)).flat_map(|r| masks_of_size(n, r)).collect();
    // large |f̂| first tightens the bound early
    masks.sort_by_key(|&s| (std::cmp::Reverse(t.raw()[s as usize].abs()), s));
    let c: Vec<i64> = masks.iter().map(|&s| t.raw()[s as usize]).collect();
    let mut tail = vec![0i128; c.len() + 1];
    for i in (0..c.len()).rev() {
        tail[i] = tail[i + 1] + (c[i] as i128) * (c[i] as i128);
    }
    let e = d.saturating_sub(1);
    let mut search = Lattice {
        n,
        e,
        m: vec![0; masks.len()],
        masks,
        c,
        tail,
        best: i128::MIN,
        found: Vec::new(),
        nodes: 0,
    };
    search.run(0, 1i64 << (2 * e), 0)?;
    select(f, search.found.into_iter())
}

/// Closest Boolean function of degree at most `d`.
pub fn nearest_low_degree(
    f: &BooleanFunction,
    d: u32,
    method: ApproxMethod,
) -> Result<ApproxResult> {
    let n = f.n();
    if d > n {
        return Err(Error::BadDegree { d, n });
    }
    let t = f.fwht();
    let (g, hamming, is_unique) = if t.degree() <= d {
        (f.clone(), 0, true)
    } else {
        match method {
            ApproxMethod::Auto | ApproxMethod::Exhaustive => exhaustive(f, d)?,
            ApproxMethod::Lattice => lattice(f, d)?,
        }
    };
    let tg = g.fwht();
    let coeff_deviations = (0..=d)
        .flat_map(|r| masks_of_size(n, r))
        .map(|m| {
            let s = IndexSet::new(n, m).expect("mask within n");
            CoefficientDeviation {
                set: s,
                deviation: (t.coefficient(s) - tg.coefficient(s)).abs(),
            }
        })
        .collect();
    Ok(ApproxResult {
        d,
        g,
        distance_sq: Dyadic::from_scaled(4 * hamming as i128, n),
        hamming,
        coeff_deviations,
        is_unique,
        method,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationRatio {
    pub set: IndexSet,
    pub deviation: Dyadic,
    /// `|f̂(J) - ĝ(J)| / (α* (ln n / n)^{|J|})`; absent for `0 / 0`
    pub ratio: Option<f64>,
}

/// Effective constants behind the low-degree approximation statement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FknReport {
    pub n: u32,
    pub d: u32,
    pub max_influence: Dyadic,
    pub max_influence_set: IndexSet,
    /// `MaxInf_{d+1}(f) · (n / ln n)^{d+1}`
    pub alpha_star: f64,
    pub approx: ApproxResult,
    pub ratios: Vec<DeviationRatio>,
}

pub fn fkn_report(f: &BooleanFunction, d: u32, method: ApproxMethod) -> Result<FknReport> {
    let n = f.n();
    if d + 1 > n {
        return Err(Error::BadDegree { d: d + 1, n });
    }
    let t = f.fwht();
    let (set, max) = max_influence(&t, d + 1)?;
    let scale = (n as f64).ln() / n as f64;
    let alpha_star = max.to_f64() / scale.powi(d as i32 + 1);
    let approx = nearest_low_degree(f, d, method)?;
    let ratios = approx
        .coeff_deviations
        .iter()
        .map(|cd| {
            let den = alpha_star * scale.powi(cd.set.len() as i32);
            let num = cd.deviation.to_f64();
            let ratio = if num == 0.0 && den == 0.0 {
                None
            } else {
                Some(num / den)
            };
            DeviationRatio {
                set: cd.set,
                deviation: cd.deviation.clone(),
                ratio,
            }
        })
        .collect();
    Ok(FknReport {
        n,
        d,
        max_influence: max,
        max_influence_set: set,
        alpha_star,
        approx,
        ratios,
    })
}
