//! Adaptive Simpson quadrature on a finite interval.

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Intervals narrower than `min_width` are accepted as they are, which keeps
/// the recursion finite near integrable endpoint singularities.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, min_width: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, min_width, 60)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    min_width: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if depth == 0 || (b - a) < min_width || diff.abs() <= 15.0 * tol {
        // Richardson correction
        return left + right + diff / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, tol / 2.0, min_width, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, min_width, depth - 1)
}
