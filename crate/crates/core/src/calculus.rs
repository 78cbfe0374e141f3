//! Discrete partial derivatives, restrictions and the heat semigroup.

use crate::cube::{
    check_dim, full_mask, inverse_fwht_in_place, submasks, BooleanFunction, FourierTable, IndexSet,
    HARD_MAX_N,
};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Values of `∂_S f` on every row, scaled by `2^|S|`.
///
/// Entries are constant along the coordinates of `S`; the full table is kept
/// so rows index the same way as the source function.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DerivativeTable {
    n: u32,
    base: IndexSet,
    values: Vec<i64>,
}

impl DerivativeTable {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn base_set(&self) -> IndexSet {
        self.base
    }

    pub fn order(&self) -> u32 {
        self.base.len()
    }

    /// Scaled entries: `∂_S f(x) = scaled()[x] / 2^order`.
    pub fn scaled(&self) -> &[i64] {
        &self.values
    }

    pub fn value(&self, b: usize) -> Dyadic {
        Dyadic::from_scaled(self.values[b] as i128, self.order())
    }

    pub fn value_f64(&self, b: usize) -> f64 {
        self.values[b] as f64 / (1u64 << self.order()) as f64
    }

    /// True iff every value lies in `Z / 2^k`.
    pub fn in_lattice(&self, k: u32) -> bool {
        let order = self.order();
        if order <= k {
            return true;
        }
        let step = 1i64 << (order - k);
        self.values.iter().all(|v| v % step == 0)
    }

    /// Number of rows where the derivative is nonzero.
    pub fn nonzero_rows(&self) -> u64 {
        self.values.iter().filter(|&&v| v != 0).count() as u64
    }

    /// `Σ_x (2^order ∂f(x))²`; divide by `2^(n + 2·order)` for `‖∂f‖²`.
    pub fn sum_squares_scaled(&self) -> i128 {
        self.values.iter().map(|&v| (v as i128) * (v as i128)).sum()
    }

    pub fn norm_sq(&self) -> Dyadic {
        Dyadic::from_scaled(self.sum_squares_scaled(), self.n + 2 * self.order())
    }

    pub fn mean(&self) -> Dyadic {
        let s: i128 = self.values.iter().map(|&v| v as i128).sum();
        Dyadic::from_scaled(s, self.n + self.order())
    }

    /// Spectrum of the derivative, scaled by `2^(n + order)`.
    pub fn fourier_scaled(&self) -> Vec<i64> {
        let mut v = self.values.clone();
        crate::cube::fwht_in_place(&mut v);
        v
    }

    /// Level weights `W^{=r}(∂_S f)` as floats, `r = 0..=n`.
    pub fn level_weights(&self) -> Vec<f64> {
        let spec = self.fourier_scaled();
        let mut w = vec![0i128; self.n as usize + 1];
        for (s, &c) in spec.iter().enumerate() {
            w[s.count_ones() as usize] += (c as i128) * (c as i128);
        }
        let scale = 2.0f64.powi(-2 * (self.n + self.order()) as i32);
        w.into_iter().map(|x| x as f64 * scale).collect()
    }
}

fn check_same_dim(expected: u32, got: u32) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `∂_S f` from the spectrum: keep `f̂(T)` at `T \ S` for `T ⊇ S` and invert.
pub fn derivative_fourier(t: &FourierTable, s: IndexSet) -> Result<DerivativeTable> {
    check_same_dim(t.n(), s.n())?;
    let n = t.n();
    let len = 1usize << n;
    let m = s.mask() as usize;
    let mut g = vec![0i64; len];
    for (tm, &c) in t.raw().iter().enumerate() {
        if tm & m == m {
            g[tm & !m] = c;
        }
    }
    inverse_fwht_in_place(&mut g);
    // g[x] = 2^n ∂f(x); the table stores 2^|S| ∂f(x)
    let shift = n - s.len();
    let step = 1i64 << shift;
    if g.iter().any(|v| v % step != 0) {
        return Err(Error::NotBoolean);
    }
    for v in &mut g {
        *v >>= shift;
    }
    Ok(DerivativeTable {
        n,
        base: s,
        values: g,
    })
}

/// `∂_S f(x) = 2^{-|S|} Σ_{y ∈ {-1,1}^S} f(x^{S→y}) Π_{j∈S} y_j`, evaluated row by row.
pub fn derivative_pointwise(f: &BooleanFunction, s: IndexSet) -> Result<DerivativeTable> {
    check_same_dim(f.n(), s.n())?;
    let n = f.n();
    let m = s.mask();
    let r = s.len();
    let mut values = vec![0i64; f.len()];
    let free = full_mask(n) & !m;
    for base in submasks(free) {
        let mut acc = 0i64;
        for sub in submasks(m) {
            // Π y_j is -1 for every coordinate of S set to -1
            let sign = if (r - sub.count_ones()).is_multiple_of(2) {
                1
            } else {
                -1
            };
            acc += sign * f.sign((base | sub) as usize);
        }
        for sub in submasks(m) {
            values[(base | sub) as usize] = acc;
        }
    }
    Ok(DerivativeTable { n, base: s, values })
}

/// Partial assignment of the coordinates in `fixed`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Restriction {
    fixed: IndexSet,
    /// bit `j` set iff `x_{j+1} = +1`; only bits inside `fixed` are meaningful
    plus: u32,
}

impl Restriction {
    pub fn new(fixed: IndexSet, plus: u32) -> Self {
        Restriction {
            fixed,
            plus: plus & fixed.mask(),
        }
    }

    /// From `(1-based coordinate, ±1)` pairs.
    pub fn from_pairs(n: u32, pairs: &[(usize, i8)]) -> Result<Self> {
        let coords: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let fixed = IndexSet::from_one_based(n, &coords)?;
        let mut plus = 0u32;
        for &(c, v) in pairs {
            match v {
                1 => plus |= 1 << (c - 1),
                -1 => {}
                _ => return Err(Error::BadParameters(format!("value {v} is not ±1"))),
            }
        }
        Ok(Restriction { fixed, plus })
    }

    pub fn fixed(&self) -> IndexSet {
        self.fixed
    }

    pub fn plus_mask(&self) -> u32 {
        self.plus
    }
}

/// Fixes the coordinates of `r`; free coordinates are renumbered `1..` in their original order.
pub fn restrict(f: &BooleanFunction, r: &Restriction) -> Result<BooleanFunction> {
    check_same_dim(f.n(), r.fixed.n())?;
    let free: Vec<usize> = r.fixed.complement().coords().collect();
    let m = free.len() as u32;
    BooleanFunction::from_fn(m, |b| {
        let mut row = r.plus as usize;
        for (k, &c) in free.iter().enumerate() {
            if b >> k & 1 == 1 {
                row |= 1 << c;
            }
        }
        f.get(row)
    })
}

/// Coefficients of `P_t f = Σ e^{-|S| t} f̂(S) χ_S`.
#[derive(Clone, Debug)]
pub struct HeatTable {
    n: u32,
    time: f64,
    coeffs: Vec<f64>,
}

impl HeatTable {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `‖P_t f‖₂²` by Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// `P_s (P_t f)`.
    pub fn advance(&self, time: f64) -> Result<HeatTable> {
        if time.is_nan() || time < 0.0 {
            return Err(Error::NegativeTime(time));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(s, &c)| c * damping(s.count_ones(), time))
            .collect();
        Ok(HeatTable {
            n: self.n,
            time: self.time + time,
            coeffs,
        })
    }
}

/// `e^{-level·t}`, with the level-0 factor pinned to 1 even at `t = ∞`.
pub fn damping(level: u32, t: f64) -> f64 {
    if level == 0 {
        1.0
    } else {
        (-(level as f64) * t).exp()
    }
}

pub fn heat(t: &FourierTable, time: f64) -> Result<HeatTable> {
    if time.is_nan() || time < 0.0 {
        return Err(Error::NegativeTime(time));
    }
    check_dim(t.n(), HARD_MAX_N)?;
    let scale = 2f64.powi(-(t.n() as i32));
    let coeffs = t
        .raw()
        .iter()
        .enumerate()
        .map(|(s, &c)| c as f64 * scale * damping(s.count_ones(), time))
        .collect();
    Ok(HeatTable {
        n: t.n(),
        time,
        coeffs,
    })
}

/// `‖P_t g‖₂²` from the level weights `W^{=r}(g)`.
pub fn heat_norm_sq_by_level(level_weights: &[f64], time: f64) -> f64 {
    level_weights
        .iter()
        .enumerate()
        .map(|(r, w)| w * damping(2 * r as u32, time))
        .sum()
}
