//! Identities and bounds for integrals of `‖P_t ∂_S f‖₂²` over `t ∈ [0, ∞)`.
//!
//! With `u = e^{-2t}` and `w_r` the level-`r` weight of `∂_S f`,
//! `∫₀^∞ (e^{2t} - 1)^{l-1} e^{-2lt} ‖P_t ∂_S f‖₂² dt = ½ ∫₀¹ (1 - u)^{l-1} Σ_r w_r u^r du
//! = ½ Σ_r w_r B(l, r + 1)`. The exact route evaluates the Beta sum in rationals;
//! the numeric route integrates the `t`-form after the substitution.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::calculus::{derivative_pointwise, heat_norm_sq_by_level};
use crate::cube::{check_dim, masks_of_size, BooleanFunction, FourierTable, IndexSet};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::influence::t_influence;
use crate::quad::adaptive_simpson;

use super::checks::label;
use super::{factorial, CheckResult, Side};

/// Dimension cap for the identity checks.
pub const IDENTITY_MAX_N: u32 = 10;
/// Absolute tolerance handed to the quadrature.
pub const QUAD_TOL: f64 = 1e-10;
/// Narrowest interval the quadrature subdivides.
pub const QUAD_MIN_WIDTH: f64 = 1e-14;

/// Level weights of `∂_S f` scaled by `4^n`: entry `r` sums `coeffs[T]²` over `T ⊇ S`, `|T| = |S| + r`.
fn derivative_levels(t: &FourierTable, mask: u32) -> Vec<i128> {
    let n = t.n();
    let mut w = vec![0i128; (n - mask.count_ones()) as usize + 1];
    let m = mask as usize;
    for (k, &c) in t.raw().iter().enumerate() {
        if k & m == m && c != 0 {
            w[(k.count_ones() - mask.count_ones()) as usize] += (c as i128) * (c as i128);
        }
    }
    w
}

fn add_levels(acc: &mut Vec<i128>, w: &[i128]) {
    if acc.len() < w.len() {
        acc.resize(w.len(), 0);
    }
    for (a, b) in acc.iter_mut().zip(w) {
        *a += b;
    }
}

/// `½ Σ_r w_r B(l, r + 1)` exactly, for weights scaled by `4^n`.
fn beta_sum(levels: &[i128], l: u32, n: u32) -> BigRational {
    let lf = factorial(l - 1);
    let mut total = BigRational::from_integer(BigInt::from(0));
    for (r, &w) in levels.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let r = r as u32;
        let num = BigInt::from(w) * &lf * factorial(r);
        let den = factorial(l + r) * 2;
        total += BigRational::new(num, den);
    }
    total / BigRational::from_integer(BigInt::from(1) << (2 * n))
}

/// `∫₀^∞ (e^{2t} - 1)^{l-1} e^{-2lt} ‖P_t g‖₂² dt` by quadrature in `u = e^{-2t}`,
/// where `levels` are the float level weights of `g`.
pub fn heat_integral_numeric(levels: &[f64], l: u32) -> f64 {
    let integrand = |u: f64| {
        if u <= 0.0 {
            // limit of (1/u - 1)^{l-1} u^l / (2u) is 1/2, and P_∞ g keeps only level 0
            return 0.5 * levels.first().copied().unwrap_or(0.0);
        }
        let t = -0.5 * u.ln();
        let heat = heat_norm_sq_by_level(levels, t);
        (1.0 / u - 1.0).powi(l as i32 - 1) * u.powi(l as i32) * heat / (2.0 * u)
    };
    adaptive_simpson(integrand, 0.0, 1.0, QUAD_TOL, QUAD_MIN_WIDTH)
}

/// Exact value of the same integral via the Beta reduction.
pub fn heat_integral_exact(t: &FourierTable, s: IndexSet, l: u32) -> Result<BigRational> {
    if l == 0 {
        return Err(Error::BadParameters("l must be at least 1".into()));
    }
    Ok(beta_sum(&derivative_levels(t, s.mask()), l, t.n()))
}

fn scaled_to_f64(levels: &[i128], n: u32) -> Vec<f64> {
    let scale = 2f64.powi(-2 * n as i32);
    levels.iter().map(|&w| w as f64 * scale).collect()
}

/// `W^{≥d}(f) = 2d Σ_{|S| = d} ∫₀^∞ (e^{2t} - 1)^{d-1} e^{-2dt} ‖P_t ∂_S f‖₂² dt`,
/// checked exactly and by quadrature (one record each).
pub fn check_integral_identity_kkl(f: &BooleanFunction, d: u32) -> Result<Vec<CheckResult>> {
    let n = f.n();
    check_dim(n, IDENTITY_MAX_N)?;
    if d == 0 || d > n {
        return Err(Error::BadDegree { d, n });
    }
    let t = f.fwht();
    let lhs = t.weight_at_least(d)?;
    let mut levels = Vec::new();
    for m in masks_of_size(n, d) {
        add_levels(&mut levels, &derivative_levels(&t, m));
    }
    let factor = BigRational::from_integer(BigInt::from(2 * d));
    let exact = beta_sum(&levels, d, n) * &factor;
    let numeric = 2.0 * d as f64 * heat_integral_numeric(&scaled_to_f64(&levels, n), d);
    let inst = format!("{} d={d}", label(f));
    Ok(vec![
        CheckResult::eq(
            "kkl-identity/exact",
            inst.clone(),
            lhs.clone(),
            Side::from_rational(exact),
            0.0,
        ),
        CheckResult::eq("kkl-identity/quadrature", inst, lhs, numeric, 1e-8),
    ])
}

/// `Inf_J(g) - ĝ(J)² = 2 Σ_{S ⊃ J, |S| = |J| + 1} ∫₀^∞ e^{-2t} ‖P_t ∂_S g‖₂² dt`,
/// checked exactly and by quadrature.
pub fn check_integral_identity_fkn(g: &BooleanFunction, j: IndexSet) -> Result<Vec<CheckResult>> {
    let n = g.n();
    if j.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: j.n(),
        });
    }
    check_dim(n, IDENTITY_MAX_N)?;
    let t = g.fwht();
    let c = t.coefficient(j);
    let lhs = t_influence(&t, j)? - &c * &c;
    let mut levels = Vec::new();
    for extra in (0..n).filter(|&q| !j.contains(q as usize)) {
        add_levels(&mut levels, &derivative_levels(&t, j.mask() | 1 << extra));
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let exact = if levels.is_empty() {
        BigRational::from_integer(BigInt::from(0))
    } else {
        beta_sum(&levels, 1, n) * &two
    };
    let numeric = if levels.is_empty() {
        0.0
    } else {
        2.0 * heat_integral_numeric(&scaled_to_f64(&levels, n), 1)
    };
    let inst = format!("{} J={j}", label(g));
    Ok(vec![
        CheckResult::eq(
            "fkn-identity/exact",
            inst.clone(),
            lhs.clone(),
            Side::from_rational(exact),
            0.0,
        ),
        CheckResult::eq("fkn-identity/quadrature", inst, lhs, numeric, 1e-8),
    ])
}

/// `∫₀^∞ (e^{2t} - 1)^{l-1} e^{-2lt} ‖P_t ∂_S f‖₂² dt <= (l-1)! 4^{d-1} I / ln^l(1/I)`
/// with `I = Inf_S(f)`, using `0 · ln(1/0)^{-l} = 0` and `1 · ln(1/1)^{-l} = +∞`.
///
/// Requires the values of `∂_S f` to lie in `Z / 2^{d-1}` and `1 <= l <= d`.
pub fn check_kklprop2_bound(
    f: &BooleanFunction,
    s: IndexSet,
    d: u32,
    l: u32,
) -> Result<CheckResult> {
    if d == 0 || l == 0 || l > d {
        return Err(Error::PreconditionViolated(format!(
            "need 1 <= l <= d, got l = {l}, d = {d}"
        )));
    }
    check_dim(f.n(), IDENTITY_MAX_N)?;
    if s.n() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: s.n(),
        });
    }
    if !s.is_empty() && !derivative_pointwise(f, s)?.in_lattice(d - 1) {
        return Err(Error::PreconditionViolated(format!(
            "values of ∂_S f are not in Z/2^{}",
            d - 1
        )));
    }
    let t = f.fwht();
    let inf = t_influence(&t, s)?;
    if inf > Dyadic::one() {
        return Err(Error::PreconditionViolated("Inf_S(f) > 1".into()));
    }
    let lhs = heat_integral_numeric(&scaled_to_f64(&derivative_levels(&t, s.mask()), f.n()), l);
    let rhs = if inf.is_zero() {
        0.0
    } else if inf == Dyadic::one() {
        f64::INFINITY
    } else {
        let i = inf.to_f64();
        let lf: f64 = (1..l).map(|k| k as f64).product();
        lf * 4f64.powi(d as i32 - 1) * i / (1.0 / i).ln().powi(l as i32)
    };
    Ok(CheckResult::le(
        "kkl-prop2-bound",
        format!("{} S={s} d={d} l={l}", label(f)),
        lhs,
        rhs,
        1e-9,
    ))
}
