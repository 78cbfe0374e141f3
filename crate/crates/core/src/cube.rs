//! Truth tables on `{-1,1}^n`, index sets and the integer Walsh–Hadamard transform.
//!
//! Encoding: row `b` of a truth table holds `f(x)` where bit `j` of `b` is set
//! iff `x_{j+1} = +1`. A stored bit `1` means `f(x) = +1`.

use std::fmt;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Default dimension cap for dense tables.
pub const DEFAULT_MAX_N: u32 = 20;
/// Dense tables beyond this are never built.
pub const HARD_MAX_N: u32 = 28;

/// A subset of `[n]` stored as a mask; bit `j` stands for coordinate `j + 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct IndexSet {
    mask: u32,
    n: u32,
}

impl IndexSet {
    pub fn new(n: u32, mask: u32) -> Result<Self> {
        if n > 32 || (n < 32 && (mask >> n) != 0) {
            return Err(Error::MaskOutOfRange {
                mask: mask as u64,
                n,
            });
        }
        Ok(IndexSet { mask, n })
    }

    /// Builds a set from 1-based coordinates, as written in `[n]`.
    pub fn from_one_based(n: u32, coords: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &c in coords {
            if c == 0 || c > n as usize {
                return Err(Error::IndexNotInSet { index: c });
            }
            mask |= 1 << (c - 1);
        }
        Self::new(n, mask)
    }

    pub fn empty(n: u32) -> Self {
        IndexSet { mask: 0, n }
    }

    pub fn full(n: u32) -> Self {
        IndexSet {
            mask: full_mask(n),
            n,
        }
    }

    pub fn mask(self) -> u32 {
        self.mask
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn len(self) -> u32 {
        self.mask.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    /// `coord` is 0-based.
    pub fn contains(self, coord: usize) -> bool {
        coord < 32 && self.mask & (1 << coord) != 0
    }

    pub fn is_subset_of(self, other: IndexSet) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn complement(self) -> IndexSet {
        IndexSet {
            mask: full_mask(self.n) & !self.mask,
            n: self.n,
        }
    }

    /// 0-based coordinates in increasing order.
    pub fn coords(self) -> impl Iterator<Item = usize> {
        let mut m = self.mask;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let c = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(c)
            }
        })
    }

    pub fn one_based(self) -> Vec<usize> {
        self.coords().map(|c| c + 1).collect()
    }

    /// All `d`-subsets of `[n]` in increasing mask order.
    pub fn all_of_size(n: u32, d: u32) -> impl Iterator<Item = IndexSet> {
        masks_of_size(n, d).map(move |mask| IndexSet { mask, n })
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, c) in self.coords().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c + 1)?;
        }
        write!(f, "}}")
    }
}

/// Serialized as a sorted 1-based array.
impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

pub(crate) fn full_mask(n: u32) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Masks with exactly `d` bits among the low `n`, increasing (Gosper's hack).
pub fn masks_of_size(n: u32, d: u32) -> impl Iterator<Item = u32> {
    let limit: u64 = 1u64 << n;
    let mut cur: Option<u64> = if d > n { None } else { Some((1u64 << d) - 1) };
    std::iter::from_fn(move || {
        let v = cur?;
        if v >= limit {
            cur = None;
            return None;
        }
        cur = if v == 0 {
            None
        } else {
            let c = v & v.wrapping_neg();
            let r = v + c;
            Some((((r ^ v) >> 2) / c) | r)
        };
        Some(v as u32)
    })
}

/// Submasks of `mask` in increasing numeric order.
pub(crate) fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(0u32);
    std::iter::from_fn(move || {
        let s = next?;
        next = if s == mask {
            None
        } else {
            Some((s.wrapping_sub(mask)) & mask)
        };
        Some(s)
    })
}

/// A function `{-1,1}^n -> {-1,1}` stored as a packed truth table.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BooleanFunction {
    n: u32,
    words: Vec<u64>,
}

fn word_count(n: u32) -> usize {
    (1usize << n).div_ceil(64)
}

impl BooleanFunction {
    /// `bits[b]` is true iff `f = +1` on row `b`. Rejects `n` above [`DEFAULT_MAX_N`].
    pub fn from_truth_table(bits: &[bool], n: u32) -> Result<Self> {
        Self::from_truth_table_with_cap(bits, n, DEFAULT_MAX_N)
    }

    pub fn from_truth_table_with_cap(bits: &[bool], n: u32, cap: u32) -> Result<Self> {
        check_dim(n, cap)?;
        let len = 1usize << n;
        if bits.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: bits.len(),
            });
        }
        Ok(Self::from_fn_unchecked(n, |b| bits[b]))
    }

    /// Tabulates `f` over all rows; `f(b)` true means `+1`.
    pub fn from_fn(n: u32, f: impl FnMut(usize) -> bool) -> Result<Self> {
        check_dim(n, HARD_MAX_N)?;
        Ok(Self::from_fn_unchecked(n, f))
    }

    fn from_fn_unchecked(n: u32, mut f: impl FnMut(usize) -> bool) -> Self {
        let len = 1usize << n;
        let mut words = vec![0u64; word_count(n)];
        for b in 0..len {
            if f(b) {
                words[b / 64] |= 1 << (b % 64);
            }
        }
        BooleanFunction { n, words }
    }

    /// Packed words, little-endian by row. Bits past `2^n` are zero.
    pub fn from_words(n: u32, mut words: Vec<u64>) -> Result<Self> {
        check_dim(n, HARD_MAX_N)?;
        let expected = word_count(n);
        if words.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: words.len(),
            });
        }
        if n < 6 {
            words[0] &= (1u64 << (1u32 << n)) - 1;
        }
        Ok(BooleanFunction { n, words })
    }

    /// For `n <= 6`: the function whose truth table is the low `2^n` bits of `word`.
    /// Iterating `word` over `0..2^(2^n)` enumerates every Boolean function.
    pub fn from_index(n: u32, word: u64) -> Self {
        assert!(n <= 6, "from_index needs n <= 6");
        let w = if n == 6 {
            word
        } else {
            word & ((1u64 << (1u32 << n)) - 1)
        };
        BooleanFunction { n, words: vec![w] }
    }

    pub fn constant(n: u32, plus: bool) -> Result<Self> {
        Self::from_fn(n, |_| plus)
    }

    pub fn random<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        check_dim(n, HARD_MAX_N)?;
        let words: Vec<u64> = (0..word_count(n)).map(|_| rng.random()).collect();
        Self::from_words(n, words)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of rows, `2^n`.
    pub fn len(&self) -> usize {
        1usize << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// True iff `f = +1` on row `b`.
    #[inline]
    pub fn get(&self, b: usize) -> bool {
        (self.words[b >> 6] >> (b & 63)) & 1 == 1
    }

    /// `f` on row `b` as `±1`.
    #[inline]
    pub fn sign(&self, b: usize) -> i64 {
        if self.get(b) {
            1
        } else {
            -1
        }
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len()).map(|b| self.get(b)).collect()
    }

    /// Row index of a point given as `±1` coordinates.
    pub fn encode_point(&self, x: &[i8]) -> Result<usize> {
        if x.len() != self.n as usize {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len() as u32,
            });
        }
        let mut b = 0usize;
        for (j, &v) in x.iter().enumerate() {
            match v {
                1 => b |= 1 << j,
                -1 => {}
                _ => {
                    return Err(Error::BadParameters(format!(
                        "coordinate {} is {v}, not ±1",
                        j + 1
                    )))
                }
            }
        }
        Ok(b)
    }

    pub fn evaluate(&self, x: &[i8]) -> Result<i8> {
        let b = self.encode_point(x)?;
        Ok(if self.get(b) { 1 } else { -1 })
    }

    /// Number of `+1` rows.
    pub fn count_plus(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn hamming(&self, other: &BooleanFunction) -> Result<u64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum())
    }

    /// Flips the value on row `b`.
    pub fn flipped(&self, b: usize) -> BooleanFunction {
        let mut g = self.clone();
        g.words[b >> 6] ^= 1 << (b & 63);
        g
    }

    pub fn negated(&self) -> BooleanFunction {
        let mut g = self.clone();
        for w in &mut g.words {
            *w = !*w;
        }
        if self.n < 6 {
            g.words[0] &= (1u64 << (1u32 << self.n)) - 1;
        }
        g
    }

    /// Lexicographic order of the truth table read as rows `0, 1, 2, ...` with `-1 < +1`.
    pub fn cmp_truth_table(&self, other: &BooleanFunction) -> std::cmp::Ordering {
        for (a, b) in self.words.iter().zip(&other.words) {
            if a != b {
                let low = (a ^ b).trailing_zeros();
                return ((a >> low) & 1).cmp(&((b >> low) & 1));
            }
        }
        std::cmp::Ordering::Equal
    }

    pub fn fwht(&self) -> FourierTable {
        FourierTable::from_function(self)
    }
}

pub(crate) fn check_dim(n: u32, cap: u32) -> Result<()> {
    let cap = cap.min(HARD_MAX_N);
    if n > cap {
        return Err(Error::DimensionTooLarge { n, cap });
    }
    Ok(())
}

/// In-place unnormalized transform: afterwards `v[S] = Σ_x v_old[x]·χ_S(x)`.
pub fn fwht_in_place(v: &mut [i64]) {
    debug_assert!(v.len().is_power_of_two());
    let mut h = 1;
    while h < v.len() {
        for chunk in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                // a sits at x_j = -1, b at x_j = +1
                let (s, d) = (*a + *b, *b - *a);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
}

/// Inverse of [`fwht_in_place`] up to the factor `2^n`: afterwards `v[x] = Σ_S v_old[S]·χ_S(x)`.
pub fn inverse_fwht_in_place(v: &mut [i64]) {
    debug_assert!(v.len().is_power_of_two());
    let mut h = 1;
    while h < v.len() {
        for chunk in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (m, p) = (*a - *b, *a + *b);
                *a = m;
                *b = p;
            }
        }
        h *= 2;
    }
}

/// Fourier–Walsh coefficients scaled by `2^n`: `f̂(S) = coeffs[S] / 2^n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FourierTable {
    n: u32,
    coeffs: Vec<i64>,
}

impl FourierTable {
    pub fn from_function(f: &BooleanFunction) -> Self {
        let mut v: Vec<i64> = (0..f.len()).map(|b| f.sign(b)).collect();
        fwht_in_place(&mut v);
        FourierTable { n: f.n, coeffs: v }
    }

    /// Wraps raw scaled coefficients (`coeffs[S] = 2^n f̂(S)`).
    pub fn from_raw(n: u32, coeffs: Vec<i64>) -> Result<Self> {
        check_dim(n, HARD_MAX_N)?;
        if coeffs.len() != 1usize << n {
            return Err(Error::LengthMismatch {
                expected: 1usize << n,
                got: coeffs.len(),
            });
        }
        Ok(FourierTable { n, coeffs })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn raw(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn raw_at(&self, s: IndexSet) -> i64 {
        self.coeffs[s.mask() as usize]
    }

    pub fn coefficient(&self, s: IndexSet) -> Dyadic {
        Dyadic::from_scaled(self.raw_at(s) as i128, self.n)
    }

    /// `f̂(∅)`, the mean of `f`.
    pub fn mean(&self) -> Dyadic {
        Dyadic::from_scaled(self.coeffs[0] as i128, self.n)
    }

    /// `Σ coeffs²`; equals `4^n` for Boolean sources.
    pub fn parseval_sum(&self) -> i128 {
        self.coeffs.iter().map(|&c| (c as i128) * (c as i128)).sum()
    }

    /// `W^{=r}` for every level `r`, scaled by `4^n`.
    pub fn level_weights_scaled(&self) -> Vec<i128> {
        let mut w = vec![0i128; self.n as usize + 1];
        for (s, &c) in self.coeffs.iter().enumerate() {
            w[s.count_ones() as usize] += (c as i128) * (c as i128);
        }
        w
    }

    pub fn weight_exact(&self, d: u32) -> Result<Dyadic> {
        if d > self.n {
            return Err(Error::BadDegree { d, n: self.n });
        }
        Ok(Dyadic::from_scaled(
            self.level_weights_scaled()[d as usize],
            2 * self.n,
        ))
    }

    /// `W^{≥d}(f) = Σ_{|S| ≥ d} f̂(S)²`.
    pub fn weight_at_least(&self, d: u32) -> Result<Dyadic> {
        if d > self.n {
            return Err(Error::BadDegree { d, n: self.n });
        }
        let s: i128 = self.level_weights_scaled()[d as usize..].iter().sum();
        Ok(Dyadic::from_scaled(s, 2 * self.n))
    }

    /// Largest `|S|` with a nonzero coefficient; 0 for constants.
    pub fn degree(&self) -> u32 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(s, _)| s.count_ones())
            .max()
            .unwrap_or(0)
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }

    /// `2^n f(x)` for every row.
    pub fn inverse_values(&self) -> Vec<i64> {
        let mut v = self.coeffs.clone();
        inverse_fwht_in_place(&mut v);
        v
    }

    pub fn inverse(&self) -> Result<BooleanFunction> {
        let v = self.inverse_values();
        let one = 1i64 << self.n;
        if v.iter().any(|&x| x != one && x != -one) {
            return Err(Error::NotBoolean);
        }
        BooleanFunction::from_fn(self.n, |b| v[b] > 0)
    }
}
