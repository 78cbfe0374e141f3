//! Inequality checks on a single function.

use crate::calculus::heat;
use crate::cube::{check_dim, fwht_in_place, BooleanFunction, FourierTable, IndexSet};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::influence::{flip_probability, max_influence, restriction_counts, superset_weights};

use super::CheckResult;

/// Largest dimension the per-set chain battery accepts.
pub const CHAIN_MAX_N: u32 = 12;

/// Short identifier of a function: its truth table for `n <= 4`, hex words otherwise.
pub fn label(f: &BooleanFunction) -> String {
    if f.n() <= 4 {
        let bits: String = (0..f.len())
            .map(|b| if f.get(b) { '1' } else { '0' })
            .collect();
        format!("n={} tt={bits}", f.n())
    } else {
        let hex: Vec<String> = f.words().iter().map(|w| format!("{w:016x}")).collect();
        format!("n={} words={}", f.n(), hex.join(""))
    }
}

/// `W^{≥d}(f) (ln n / n)^d / 10`, rounded up: the float evaluation is inflated by a
/// relative `8 (d + 4)` ulps, which dominates the rounding of the `d + 4` operations.
pub fn main_theorem_bound(t: &FourierTable, d: u32) -> Result<f64> {
    let n = t.n();
    let w = t.weight_at_least(d)?;
    if n <= 1 || w.is_zero() {
        return Ok(0.0);
    }
    let nf = n as f64;
    let base = nf.ln() / nf;
    let raw = w.to_f64() * base.powi(d as i32) / 10.0;
    Ok(raw * (1.0 + 8.0 * (d + 4) as f64 * f64::EPSILON))
}

/// `MaxInf_d(f) >= W^{≥d}(f) (ln n / n)^d / 10`, up to `1e-12`.
pub fn check_main_theorem(f: &BooleanFunction, d: u32) -> Result<CheckResult> {
    let t = f.fwht();
    check_main_theorem_spectrum(&t, d, || label(f))
}

pub(crate) fn check_main_theorem_spectrum(
    t: &FourierTable,
    d: u32,
    label: impl FnOnce() -> String,
) -> Result<CheckResult> {
    let n = t.n();
    if d == 0 || d > n {
        return Err(Error::BadDegree { d, n });
    }
    let (arg, max) = max_influence(t, d)?;
    let bound = main_theorem_bound(t, d)?;
    Ok(CheckResult::ge(
        "main-theorem",
        format!("{} d={d} argmax={arg}", label()),
        max,
        bound,
        1e-12,
    ))
}

/// The influence chain and its companions for every nonempty set.
pub fn check_influence_chain(f: &BooleanFunction) -> Result<Vec<CheckResult>> {
    let n = f.n();
    check_dim(n, CHAIN_MAX_N)?;
    let t = f.fwht();
    let sup = superset_weights(&t);
    let tag = label(f);
    let mut out = Vec::new();
    for m in 1..(1u32 << n) {
        let s = IndexSet::new(n, m)?;
        let r = s.len();
        let inst = format!("{tag} S={s}");
        let c = restriction_counts(f, s)?;
        let frac = |k: u64| Dyadic::from_scaled(k as i128, n - r);
        let (joint, coal, nz) = (frac(c.joint), frac(c.coalition), frac(c.nonzero_derivative));
        let inf = Dyadic::from_scaled(sup[m as usize], 2 * n);
        let coef = t.coefficient(s).abs();

        out.push(CheckResult::ge(
            "chain/coalition>=joint",
            inst.clone(),
            coal.clone(),
            joint.clone(),
            0.0,
        ));
        out.push(CheckResult::ge(
            "chain/joint>=t-influence",
            inst.clone(),
            joint.clone(),
            inf.clone(),
            0.0,
        ));
        out.push(CheckResult::ge(
            "chain/nonzero-prob>=t-influence",
            inst.clone(),
            nz.clone(),
            inf.clone(),
            0.0,
        ));
        out.push(CheckResult::ge(
            "chain/t-influence>=nonzero-prob/4^(r-1)",
            inst.clone(),
            inf.clone(),
            nz.mul_pow2(-2 * (r as i64 - 1)),
            0.0,
        ));
        out.push(CheckResult::ge(
            "chain/t-influence>=|coef|/2^(r-1)",
            inst.clone(),
            inf.clone(),
            coef.mul_pow2(-(r as i64 - 1)),
            0.0,
        ));
        if r <= 2 {
            out.push(CheckResult::eq(
                "chain/joint==nonzero-prob",
                inst.clone(),
                joint.clone(),
                nz,
                0.0,
            ));
        }
        if r == 1 {
            let flip = flip_probability(f, s.one_based()[0])?;
            out.push(CheckResult::eq(
                "chain/single-bit/t-influence==flip",
                inst.clone(),
                inf,
                flip.clone(),
                0.0,
            ));
            out.push(CheckResult::eq(
                "chain/single-bit/joint==flip",
                inst.clone(),
                joint,
                flip.clone(),
                0.0,
            ));
            out.push(CheckResult::eq(
                "chain/single-bit/coalition==flip",
                inst,
                coal,
                flip,
                0.0,
            ));
        }
    }
    Ok(out)
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// `‖P_t f‖₂ <= ‖f‖_{1+e^{-2t}}` for Boolean `f`, where every `q`-norm is exactly 1.
pub fn check_hypercontractivity(f: &BooleanFunction, t: f64) -> Result<CheckResult> {
    check_time(t)?;
    let lhs = heat(&f.fwht(), t)?.norm_sq().sqrt();
    // E|f|^q = 1 for a ±1-valued f
    Ok(CheckResult::le(
        "hypercontractivity",
        format!("{} t={t}", label(f)),
        lhs,
        Dyadic::one(),
        1e-12,
    ))
}

/// Real-valued variant: `values[b]` is `f` on row `b`.
pub fn check_hypercontractivity_values(values: &[f64], t: f64) -> Result<CheckResult> {
    check_time(t)?;
    if !values.len().is_power_of_two() {
        return Err(Error::LengthMismatch {
            expected: values.len().next_power_of_two(),
            got: values.len(),
        });
    }
    let len = values.len() as f64;
    let mut c = values.to_vec();
    float_fwht(&mut c);
    let lhs: f64 = c
        .iter()
        .enumerate()
        .map(|(s, v)| {
            let coef = v / len * (-(s.count_ones() as f64) * t).exp();
            coef * coef
        })
        .sum::<f64>()
        .sqrt();
    let q = 1.0 + (-2.0 * t).exp();
    let mean_q = values.iter().map(|v| v.abs().powf(q)).sum::<f64>() / len;
    let rhs = mean_q.powf(1.0 / q);
    Ok(CheckResult::le(
        "hypercontractivity",
        format!("real n={} t={t}", values.len().trailing_zeros()),
        lhs,
        rhs,
        1e-12,
    ))
}

fn float_fwht(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for chunk in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *b - *a);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
}

/// `TotInf(h) >= ½ E[h] ln(1 / E[h])` for `h` with values in `{0, 1}`; `0 ln(1/0) = 0`.
pub fn check_log_sobolev(h: &[i64]) -> Result<CheckResult> {
    if !h.len().is_power_of_two() {
        return Err(Error::LengthMismatch {
            expected: h.len().next_power_of_two(),
            got: h.len(),
        });
    }
    if let Some(&v) = h.iter().find(|&&v| v != 0 && v != 1) {
        return Err(Error::RangeViolation(v));
    }
    let n = h.len().trailing_zeros();
    let mut c = h.to_vec();
    fwht_in_place(&mut c);
    let tot: i128 = c
        .iter()
        .enumerate()
        .map(|(s, &v)| s.count_ones() as i128 * (v as i128) * (v as i128))
        .sum();
    let tot = Dyadic::from_scaled(tot, 2 * n);
    let ones: i64 = h.iter().sum();
    let mu = ones as f64 / h.len() as f64;
    let rhs = if ones == 0 {
        0.0
    } else {
        0.5 * mu * (1.0 / mu).ln()
    };
    let bits: String = if n <= 4 {
        h.iter().map(|v| v.to_string()).collect()
    } else {
        format!("{ones} ones")
    };
    Ok(CheckResult::ge(
        "log-sobolev",
        format!("n={n} h={bits}"),
        tot,
        rhs,
        1e-12,
    ))
}

/// Log-Sobolev for the indicator of `f = +1`.
pub fn check_log_sobolev_fn(f: &BooleanFunction) -> Result<CheckResult> {
    let h: Vec<i64> = (0..f.len()).map(|b| f.get(b) as i64).collect();
    check_log_sobolev(&h)
}

/// For `deg g <= d`: every coefficient lies in `Z / 2^{d-1}` and at most `4^{d-1}`
/// of them are nonzero. One record per condition.
pub fn check_degree_lattice(g: &BooleanFunction, d: u32) -> Result<Vec<CheckResult>> {
    let t = g.fwht();
    let n = g.n();
    if d == 0 || d > n {
        return Err(Error::BadDegree { d, n });
    }
    let degree = t.degree();
    if degree > d {
        return Err(Error::DegreeTooHigh { degree, d });
    }
    let inst = format!("{} d={d}", label(g));
    let off_lattice = (0..t.raw().len())
        .filter(|&s| {
            !t.coefficient(IndexSet::new(n, s as u32).expect("mask < 2^n"))
                .in_lattice(d - 1)
        })
        .count();
    let count = t.nonzero_count();
    Ok(vec![
        CheckResult::eq(
            "lattice/off-lattice-coefficients==0",
            inst.clone(),
            Dyadic::from_int(off_lattice as i64),
            Dyadic::zero(),
            0.0,
        ),
        CheckResult::le(
            "lattice/nonzero-count<=4^(d-1)",
            inst,
            Dyadic::from_int(count as i64),
            Dyadic::from_int(1i64 << (2 * (d - 1))),
            0.0,
        ),
    ])
}
