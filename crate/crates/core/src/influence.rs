//! T-influence, joint influence, coalition influence and their aggregates.

use rayon::prelude::*;
use serde::Serialize;

use crate::cube::{full_mask, masks_of_size, submasks, BooleanFunction, FourierTable, IndexSet};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

fn check_same_dim(expected: u32, got: u32) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `Inf_S(f) = Σ_{T ⊇ S} f̂(T)²`. The empty set gives `‖f‖₂²`.
pub fn t_influence(t: &FourierTable, s: IndexSet) -> Result<Dyadic> {
    check_same_dim(t.n(), s.n())?;
    let m = s.mask() as usize;
    let sum: i128 = t
        .raw()
        .iter()
        .enumerate()
        .filter(|(tm, _)| tm & m == m)
        .map(|(_, &c)| (c as i128) * (c as i128))
        .sum();
    Ok(Dyadic::from_scaled(sum, 2 * t.n()))
}

/// Superset sums of squared coefficients for every mask, scaled by `4^n`.
/// Entry `S` is `4^n · Inf_S(f)`.
pub fn superset_weights(t: &FourierTable) -> Vec<i128> {
    let mut w: Vec<i128> = t.raw().iter().map(|&c| (c as i128) * (c as i128)).collect();
    for j in 0..t.n() {
        let bit = 1usize << j;
        for s in 0..w.len() {
            if s & bit == 0 {
                w[s] += w[s | bit];
            }
        }
    }
    w
}

/// `TotInf(f) = Σ_S |S| f̂(S)²`.
pub fn total_influence(t: &FourierTable) -> Dyadic {
    let sum: i128 = t
        .level_weights_scaled()
        .iter()
        .enumerate()
        .map(|(r, w)| r as i128 * w)
        .sum();
    Dyadic::from_scaled(sum, 2 * t.n())
}

/// `MaxInf_d(f)` with its argmax; ties go to the numerically smallest mask.
pub fn max_influence(t: &FourierTable, d: u32) -> Result<(IndexSet, Dyadic)> {
    let n = t.n();
    if d == 0 || d > n {
        return Err(Error::BadDegree { d, n });
    }
    let w = superset_weights(t);
    let mut best: Option<(u32, i128)> = None;
    for m in masks_of_size(n, d) {
        let v = w[m as usize];
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((m, v));
        }
    }
    let (m, v) = best.expect("at least one d-set exists");
    Ok((IndexSet::new(n, m)?, Dyadic::from_scaled(v, 2 * n)))
}

/// Row indices of the subcube obtained by freeing `s` at the complement assignment `base`.
/// Position `k` holds the row whose `s`-bits are the `k`-th submask of `s` in increasing order,
/// so compressed bit `q` corresponds to the `q`-th smallest coordinate of `s`.
fn fill_subcube(f: &BooleanFunction, base: u32, subs: &[u32], out: &mut [bool]) {
    for (k, &sub) in subs.iter().enumerate() {
        out[k] = f.get((base | sub) as usize);
    }
}

/// Mask (in compressed coordinates) of the variables a subcube function depends on.
pub fn relevant_mask(values: &[bool]) -> u32 {
    let r = values.len().trailing_zeros();
    let mut rel = 0u32;
    for q in 0..r {
        let bit = 1usize << q;
        if (0..values.len()).any(|t| t & bit == 0 && values[t] != values[t | bit]) {
            rel |= 1 << q;
        }
    }
    rel
}

/// True iff coordinate `coord` (1-based) is `s`-pivotal at `x`: it is relevant in the
/// restriction of `f` fixing `[n] \ s` to the values of `x`.
pub fn is_pivotal(f: &BooleanFunction, s: IndexSet, coord: usize, x: &[i8]) -> Result<bool> {
    check_same_dim(f.n(), s.n())?;
    if coord == 0 || !s.contains(coord - 1) {
        return Err(Error::IndexNotInSet { index: coord });
    }
    let row = f.encode_point(x)? as u32;
    let base = row & !s.mask();
    let subs: Vec<u32> = submasks(s.mask()).collect();
    let mut vals = vec![false; subs.len()];
    fill_subcube(f, base, &subs, &mut vals);
    let q = s
        .coords()
        .position(|c| c == coord - 1)
        .expect("coord is in s");
    Ok(relevant_mask(&vals) >> q & 1 == 1)
}

/// Counts over the `2^{n-|s|}` complement assignments.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RestrictionCounts {
    /// every coordinate of `s` is relevant
    pub joint: u64,
    /// the restriction is non-constant
    pub coalition: u64,
    /// `∂_s f ≠ 0`
    pub nonzero_derivative: u64,
    pub total: u64,
}

/// One pass over all restrictions that free `s`.
pub fn restriction_counts(f: &BooleanFunction, s: IndexSet) -> Result<RestrictionCounts> {
    check_same_dim(f.n(), s.n())?;
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    let m = s.mask();
    let r = s.len();
    let subs: Vec<u32> = submasks(m).collect();
    let full = full_mask(r);
    let mut vals = vec![false; subs.len()];
    let mut counts = RestrictionCounts::default();
    for base in submasks(full_mask(f.n()) & !m) {
        fill_subcube(f, base, &subs, &mut vals);
        counts.total += 1;
        let first = vals[0];
        if vals.iter().any(|&v| v != first) {
            counts.coalition += 1;
            if relevant_mask(&vals) == full {
                counts.joint += 1;
            }
        }
        // signed sum: the sign of row k is (-1)^{r - |k|}
        let acc: i64 = vals
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let neg = (r - (k as u32).count_ones()) % 2 == 1;
                let fv = if v { 1 } else { -1 };
                if neg {
                    -fv
                } else {
                    fv
                }
            })
            .sum();
        if acc != 0 {
            counts.nonzero_derivative += 1;
        }
    }
    Ok(counts)
}

fn fraction(count: u64, f: &BooleanFunction, s: IndexSet) -> Dyadic {
    Dyadic::from_scaled(count as i128, f.n() - s.len())
}

/// `JInf_S(f)`: probability that every coordinate of `s` is `s`-pivotal.
pub fn joint_influence(f: &BooleanFunction, s: IndexSet) -> Result<Dyadic> {
    let c = restriction_counts(f, s)?;
    Ok(fraction(c.joint, f, s))
}

/// `CInf_S(f)`: probability that the restriction freeing `s` is non-constant.
pub fn coalition_influence(f: &BooleanFunction, s: IndexSet) -> Result<Dyadic> {
    let c = restriction_counts(f, s)?;
    Ok(fraction(c.coalition, f, s))
}

/// `P(∂_S f ≠ 0)`.
pub fn nonzero_derivative_prob(f: &BooleanFunction, s: IndexSet) -> Result<Dyadic> {
    let c = restriction_counts(f, s)?;
    Ok(fraction(c.nonzero_derivative, f, s))
}

/// `P(f(x) ≠ f(x^{⊕i}))` for a 1-based coordinate.
pub fn flip_probability(f: &BooleanFunction, coord: usize) -> Result<Dyadic> {
    if coord == 0 || coord > f.n() as usize {
        return Err(Error::IndexNotInSet { index: coord });
    }
    let bit = 1usize << (coord - 1);
    let diff = (0..f.len()).filter(|&b| f.get(b) != f.get(b ^ bit)).count();
    Ok(Dyadic::from_scaled(diff as i128, f.n()))
}

/// `max_{|S| = d} JInf_S(f)` with its argmax (smallest mask on ties).
pub fn max_joint_influence(f: &BooleanFunction, d: u32) -> Result<(IndexSet, Dyadic)> {
    let n = f.n();
    if d == 0 || d > n {
        return Err(Error::BadDegree { d, n });
    }
    let masks: Vec<u32> = masks_of_size(n, d).collect();
    let (count, mask) = masks
        .par_iter()
        .map(|&m| {
            let s = IndexSet::new(n, m).expect("mask within n");
            let c = restriction_counts(f, s).expect("nonempty set").joint;
            (c, m)
        })
        .reduce(
            || (0, u32::MAX),
            |a, b| {
                // larger count wins, then smaller mask
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );
    let s = IndexSet::new(n, mask)?;
    Ok((s, Dyadic::from_scaled(count as i128, n - d)))
}

/// All four influence notions of one set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InfluenceReport {
    pub set: IndexSet,
    pub t_influence: Dyadic,
    pub joint: Dyadic,
    pub coalition: Dyadic,
    pub nonzero_derivative_prob: Dyadic,
}

impl InfluenceReport {
    pub fn compute(f: &BooleanFunction, t: &FourierTable, s: IndexSet) -> Result<Self> {
        let c = restriction_counts(f, s)?;
        Ok(InfluenceReport {
            set: s,
            t_influence: t_influence(t, s)?,
            joint: fraction(c.joint, f, s),
            coalition: fraction(c.coalition, f, s),
            nonzero_derivative_prob: fraction(c.nonzero_derivative, f, s),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: u32, c: &[usize]) -> IndexSet {
        IndexSet::from_one_based(n, c).unwrap()
    }

    fn maj3() -> BooleanFunction {
        BooleanFunction::from_fn(3, |b| b.count_ones() >= 2).unwrap()
    }

    fn dict(n: u32) -> BooleanFunction {
        BooleanFunction::from_fn(n, |b| b & 1 == 1).unwrap()
    }

    fn parity(n: u32) -> BooleanFunction {
        BooleanFunction::from_fn(n, |b| (n - b.count_ones()).is_multiple_of(2)).unwrap()
    }

    fn and2() -> BooleanFunction {
        BooleanFunction::from_fn(2, |b| b == 3).unwrap()
    }

    #[test]
    fn t_influence_examples() {
        assert_eq!(
            t_influence(&parity(3).fwht(), set(3, &[1, 2])).unwrap(),
            Dyadic::one()
        );
        assert_eq!(
            t_influence(&maj3().fwht(), set(3, &[1, 2])).unwrap(),
            Dyadic::new(1, 2)
        );
        assert!(t_influence(&dict(2).fwht(), set(2, &[1, 2]))
            .unwrap()
            .is_zero());
        assert_eq!(
            t_influence(&maj3().fwht(), IndexSet::empty(3)).unwrap(),
            Dyadic::one()
        );
        assert!(matches!(
            t_influence(&maj3().fwht(), set(2, &[1])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pivotality_examples() {
        assert!(is_pivotal(&maj3(), set(3, &[1, 2]), 1, &[-1, -1, 1]).unwrap());
        for x in [[-1i8, -1], [1, 1], [1, -1]] {
            assert!(!is_pivotal(&dict(2), set(2, &[1, 2]), 2, &x).unwrap());
            assert!(is_pivotal(&parity(2), set(2, &[1]), 1, &x).unwrap());
        }
        assert!(matches!(
            is_pivotal(&maj3(), set(3, &[1, 2]), 3, &[1, 1, 1]),
            Err(Error::IndexNotInSet { index: 3 })
        ));
    }

    #[test]
    fn joint_coalition_examples() {
        let s12 = set(3, &[1, 2]);
        assert_eq!(joint_influence(&maj3(), s12).unwrap(), Dyadic::one());
        assert_eq!(coalition_influence(&maj3(), s12).unwrap(), Dyadic::one());
        assert!(joint_influence(&dict(2), set(2, &[1, 2]))
            .unwrap()
            .is_zero());
        assert_eq!(
            coalition_influence(&dict(2), set(2, &[1, 2])).unwrap(),
            Dyadic::one()
        );
        assert_eq!(
            joint_influence(&and2(), set(2, &[1, 2])).unwrap(),
            Dyadic::one()
        );
        let one = BooleanFunction::constant(3, true).unwrap();
        assert!(coalition_influence(&one, s12).unwrap().is_zero());
        assert_eq!(
            joint_influence(&maj3(), IndexSet::empty(3)),
            Err(Error::EmptySet)
        );
    }

    #[test]
    fn nonzero_derivative_examples() {
        assert_eq!(
            nonzero_derivative_prob(&and2(), set(2, &[1, 2])).unwrap(),
            Dyadic::one()
        );
        assert!(nonzero_derivative_prob(&dict(2), set(2, &[1, 2]))
            .unwrap()
            .is_zero());
        assert_eq!(
            nonzero_derivative_prob(&maj3(), set(3, &[1])).unwrap(),
            Dyadic::new(1, 1)
        );
    }

    #[test]
    fn aggregates() {
        for n in 1..=5 {
            assert_eq!(
                total_influence(&parity(n).fwht()),
                Dyadic::from_int(n as i64)
            );
        }
        assert_eq!(total_influence(&maj3().fwht()), Dyadic::new(3, 1));
        assert!(total_influence(&BooleanFunction::constant(3, false).unwrap().fwht()).is_zero());

        let (s, v) = max_influence(&maj3().fwht(), 2).unwrap();
        assert_eq!((s.one_based(), v), (vec![1, 2], Dyadic::new(1, 2)));
        let (s, v) = max_influence(&dict(3).fwht(), 1).unwrap();
        assert_eq!((s.one_based(), v), (vec![1], Dyadic::one()));
        let (s, v) = max_influence(&parity(3).fwht(), 3).unwrap();
        assert_eq!((s.one_based(), v), (vec![1, 2, 3], Dyadic::one()));
        assert!(matches!(
            max_influence(&maj3().fwht(), 4),
            Err(Error::BadDegree { .. })
        ));
        assert!(matches!(
            max_influence(&maj3().fwht(), 0),
            Err(Error::BadDegree { .. })
        ));
    }

    #[test]
    fn superset_weights_match_direct_sums() {
        let f = BooleanFunction::from_fn(5, |b| (b * 7 + 3) % 5 < 2).unwrap();
        let t = f.fwht();
        let w = superset_weights(&t);
        for m in 0..32u32 {
            let s = IndexSet::new(5, m).unwrap();
            assert_eq!(
                Dyadic::from_scaled(w[m as usize], 10),
                t_influence(&t, s).unwrap()
            );
        }
    }

    #[test]
    fn max_joint_influence_of_majority() {
        let (s, v) = max_joint_influence(&maj3(), 2).unwrap();
        assert_eq!((s.one_based(), v), (vec![1, 2], Dyadic::one()));
    }

    #[test]
    fn report_serializes_one_based() {
        let r = InfluenceReport::compute(&maj3(), &maj3().fwht(), set(3, &[1, 3])).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["set"], serde_json::json!([1, 3]));
        assert_eq!(json["t_influence"]["exp"], 2);
    }
}
