//! Hypertribe sharpness reports: `MaxJInf_d / (W^{≥d} (log2 n / n)^d)`, exact for small
//! `n` and estimated beyond.

use num_integer::binomial;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cube::{IndexSet, HARD_MAX_N};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::families::{CoverageStats, Hypertribe};
use crate::influence::{joint_influence, max_joint_influence};
use crate::sampler::{
    derive_seed, estimate_derivative_mean, estimate_joint_and_t_influence,
    estimate_sign_probabilities, Estimate, PointwiseFunction,
};

/// How many samples a sampled report may draw, and where they go.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SamplingPlan {
    /// random `d`-sets whose joint influence is estimated
    pub sets: usize,
    pub samples_per_set: u64,
    pub sign_samples: u64,
    /// samples per coefficient when estimating the low levels of the spectrum
    pub level_samples: u64,
    /// largest `n` handled by the exact engine
    pub exact_max_n: u32,
    pub seed: u64,
    /// total sample budget
    pub budget: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            sets: 200,
            samples_per_set: 10_000,
            sign_samples: 100_000,
            level_samples: 10_000,
            exact_max_n: 16,
            seed: 0,
            budget: 100_000_000,
        }
    }
}

impl SamplingPlan {
    /// Samples a sampled report for `(n, d)` would draw.
    pub fn samples_needed(&self, n: u32, d: u32) -> u64 {
        let levels: u64 = (1..d).map(|r| binomial(n as u64, r as u64)).sum();
        self.sets as u64 * self.samples_per_set + self.sign_samples + levels * self.level_samples
    }
}

/// A value that is exact or estimated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub stderr: f64,
    pub exact: Option<Dyadic>,
}

impl Quantity {
    fn exact(d: Dyadic) -> Self {
        Quantity {
            value: d.to_f64(),
            stderr: 0.0,
            exact: Some(d),
        }
    }

    fn estimated(e: &Estimate) -> Self {
        Quantity {
            value: e.value,
            stderr: e.stderr,
            exact: None,
        }
    }
}

/// Consistency checks of the sign probabilities against product and second-moment bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignBounds {
    /// `(1 - 2^{-k})^t`, a lower bound on `P(H = -1)` by Harris
    pub harris_floor: f64,
    pub harris_ok: bool,
    /// `t 2^{-k}`
    pub block_mass: f64,
    /// whether `t 2^{-k} <= 1/4`, so that `P(H = -1) >= e^{-2}` applies
    pub e2_floor_applies: bool,
    pub e2_floor_ok: Option<bool>,
    /// `E[Z]² / E[Z²]` for `Z` the number of satisfied blocks, a lower bound on `P(H = +1)`
    pub paley_zygmund_floor: f64,
    pub paley_zygmund_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetEstimate {
    /// 1-based coordinates
    pub set: Vec<usize>,
    pub joint: Estimate,
    pub t_influence: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub n: u32,
    pub d: u32,
    pub k: u32,
    pub k_rounded: bool,
    pub blocks: usize,
    pub coverage: CoverageStats,
    /// `"exact"` or `"sampled"`
    pub mode: &'static str,
    pub p_plus: Quantity,
    pub p_minus: Quantity,
    pub max_joint_influence: Quantity,
    /// 1-based argmax among the examined sets
    pub max_joint_set: Vec<usize>,
    pub sets_examined: usize,
    pub weight_at_least_d: Quantity,
    /// `(log2 n / n)^d`
    pub scale: f64,
    /// `None` for `0 / 0`
    pub ratio: Option<f64>,
    pub ratio_stderr: Option<f64>,
    pub sign_bounds: SignBounds,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub set_estimates: Vec<SetEstimate>,
}

fn second_moment_floor(h: &Hypertribe) -> f64 {
    let blocks = h.packing().blocks();
    let k = h.spec().k as i32;
    let t = blocks.len() as f64;
    if blocks.is_empty() {
        return 0.0;
    }
    let mean = t * 2f64.powi(-k);
    let mut cross = 0.0;
    for (i, a) in blocks.iter().enumerate() {
        for b in &blocks[i + 1..] {
            let common = a.iter().filter(|c| b.binary_search(c).is_ok()).count() as i32;
            cross += 2.0 * 2f64.powi(-2 * k + common);
        }
    }
    mean * mean / (mean + cross)
}

fn sign_bounds(h: &Hypertribe, p_plus: &Quantity, p_minus: &Quantity) -> SignBounds {
    let k = h.spec().k as i32;
    let t = h.packing().len() as i32;
    let harris_floor = (1.0 - 2f64.powi(-k)).powi(t);
    let block_mass = t as f64 * 2f64.powi(-k);
    let e2_floor_applies = block_mass <= 0.25;
    let slack = |q: &Quantity| 3.0 * q.stderr + 1e-12;
    let pz = second_moment_floor(h);
    SignBounds {
        harris_floor,
        harris_ok: p_minus.value >= harris_floor - slack(p_minus),
        block_mass,
        e2_floor_applies,
        e2_floor_ok: e2_floor_applies.then(|| p_minus.value >= (-2f64).exp() - slack(p_minus)),
        paley_zygmund_floor: pz,
        paley_zygmund_ok: p_plus.value >= pz - slack(p_plus),
    }
}

fn ratio(j: &Quantity, w: &Quantity, scale: f64) -> (Option<f64>, Option<f64>) {
    if j.value == 0.0 && w.value == 0.0 {
        return (None, None);
    }
    let r = j.value / (w.value * scale);
    let se = if j.value > 0.0 && w.value > 0.0 {
        r * ((j.stderr / j.value).powi(2) + (w.stderr / w.value).powi(2)).sqrt()
    } else {
        f64::NAN
    };
    (Some(r), Some(se))
}

/// Ratio of the largest joint influence of a `d`-set to `W^{≥d} (log2 n / n)^d`.
pub fn sharpness_report(h: &Hypertribe, d: u32, plan: &SamplingPlan) -> Result<SharpnessReport> {
    let n = h.spec().n;
    if d == 0 || d > n {
        return Err(Error::BadDegree { d, n });
    }
    let scale = ((n as f64).log2() / n as f64).powi(d as i32);
    let coverage = h.packing().coverage_stats();
    let exact = n <= plan.exact_max_n.min(HARD_MAX_N);
    let (p_plus, p_minus, max_j, max_set, examined, w, set_estimates);
    if exact {
        let f = h.to_boolean_function(HARD_MAX_N)?;
        let t = f.fwht();
        let plus = Dyadic::from_scaled(f.count_plus() as i128, n);
        p_minus = Quantity::exact(Dyadic::one() - &plus);
        p_plus = Quantity::exact(plus);
        let (s, j) = max_joint_influence(&f, d)?;
        max_j = Quantity::exact(j);
        max_set = s.one_based();
        examined = binomial(n as usize, d as usize);
        w = Quantity::exact(t.weight_at_least(d)?);
        set_estimates = Vec::new();
    } else {
        let needed = plan.samples_needed(n, d);
        if needed > plan.budget {
            return Err(Error::BudgetExhausted {
                needed,
                budget: plan.budget,
            });
        }
        let (pp, pm) =
            estimate_sign_probabilities(h, plan.sign_samples, derive_seed(plan.seed, 0))?;
        p_plus = Quantity::estimated(&pp);
        p_minus = Quantity::estimated(&pm);

        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.seed, 1));
        let mut ests = Vec::with_capacity(plan.sets);
        for i in 0..plan.sets {
            let mut coords: Vec<usize> = sample(&mut rng, n as usize, d as usize).into_vec();
            coords.sort_unstable();
            let seed = derive_seed(plan.seed, 1000 + i as u64);
            let (j, t) = estimate_joint_and_t_influence(h, &coords, plan.samples_per_set, seed)?;
            ests.push(SetEstimate {
                set: coords.iter().map(|c| c + 1).collect(),
                joint: j,
                t_influence: t,
            });
        }
        let best = ests
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.joint.value.total_cmp(&b.joint.value).then(ib.cmp(ia)))
            .map(|(_, e)| e.clone());
        match best {
            Some(b) => {
                max_j = Quantity::estimated(&b.joint);
                max_set = b.set;
            }
            None => {
                max_j = Quantity {
                    value: 0.0,
                    stderr: 0.0,
                    exact: None,
                };
                max_set = Vec::new();
            }
        }
        examined = ests.len();
        set_estimates = ests;
        w = estimate_weight_at_least(h, d, &pp, plan)?;
    }
    let (ratio, ratio_stderr) = ratio(&max_j, &w, scale);
    let sign_bounds = sign_bounds(h, &p_plus, &p_minus);
    Ok(SharpnessReport {
        n,
        d,
        k: h.spec().k,
        k_rounded: h.spec().k_rounded,
        blocks: h.packing().len(),
        coverage,
        mode: if exact { "exact" } else { "sampled" },
        p_plus,
        p_minus,
        max_joint_influence: max_j,
        max_joint_set: max_set,
        sets_examined: examined,
        weight_at_least_d: w,
        scale,
        ratio,
        ratio_stderr,
        sign_bounds,
        set_estimates,
    })
}

/// Calls `visit` on every `r`-subset of `0..n` in lexicographic order.
fn for_each_combination(
    n: usize,
    r: usize,
    mut visit: impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let mut cur: Vec<usize> = (0..r).collect();
    if r > n {
        return Ok(());
    }
    loop {
        visit(&cur)?;
        let Some(i) = (0..r).rev().find(|&i| cur[i] < n - r + i) else {
            return Ok(());
        };
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// `W^{≥d} = 1 - f̂(∅)² - Σ_{1 <= r < d} W^{=r}`. The first two terms come from the sign
/// estimate (`4 p (1 - p) N / (N - 1)` is unbiased for the variance), each level term
/// from bias-corrected squared means of `∂_S f`.
fn estimate_weight_at_least<F: PointwiseFunction>(
    f: &F,
    d: u32,
    p_plus: &Estimate,
    plan: &SamplingPlan,
) -> Result<Quantity> {
    let p = p_plus.value;
    let nf = p_plus.samples as f64;
    let mut value = 4.0 * p * (1.0 - p) * nf / (nf - 1.0);
    let mut var = (4.0 * (1.0 - 2.0 * p) * p_plus.stderr).powi(2);
    let mut index = 0u64;
    for r in 1..d as usize {
        for_each_combination(f.n(), r, |coords| {
            let seed = derive_seed(plan.seed, 2_000_000 + index);
            index += 1;
            let e = estimate_derivative_mean(f, coords, plan.level_samples, seed)?;
            value -= e.value * e.value - e.stderr * e.stderr;
            var += (2.0 * e.value * e.stderr).powi(2);
            Ok(())
        })?;
    }
    Ok(Quantity {
        value,
        stderr: var.sqrt(),
        exact: None,
    })
}

/// Agreement counts of the estimators with the exact engine over seeded trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub trials: usize,
    pub samples: u64,
    pub joint_within: usize,
    pub t_influence_within: usize,
    pub sign_within: usize,
    pub coefficient_within: usize,
}

impl CrossCheck {
    /// Smallest per-estimator agreement fraction.
    pub fn worst_fraction(&self) -> f64 {
        let worst = self
            .joint_within
            .min(self.t_influence_within)
            .min(self.sign_within)
            .min(self.coefficient_within);
        worst as f64 / self.trials as f64
    }
}

/// Runs every estimator `trials` times on a tabulable hypertribe and counts how often the
/// estimate lies within `3 · stderr` of the exact value. Trial `i` uses seed
/// `derive_seed(seed, i)` and a `d`-set drawn from a random block, so its joint influence
/// is typically nonzero.
pub fn cross_check(
    h: &Hypertribe,
    d: u32,
    trials: usize,
    samples: u64,
    seed: u64,
) -> Result<CrossCheck> {
    let n = h.spec().n;
    let f = h.to_boolean_function(HARD_MAX_N)?;
    let t = f.fwht();
    let blocks = h.packing().blocks();
    let mut out = CrossCheck {
        trials,
        samples,
        joint_within: 0,
        t_influence_within: 0,
        sign_within: 0,
        coefficient_within: 0,
    };
    let exact_plus = f.count_plus() as f64 / f.len() as f64;
    for i in 0..trials {
        let s = derive_seed(seed, i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let coords: Vec<usize> = if blocks.is_empty() {
            sample(&mut rng, n as usize, d as usize).into_vec()
        } else {
            let b = &blocks[sample(&mut rng, blocks.len(), 1).index(0)];
            let mut c: Vec<usize> = sample(&mut rng, b.len(), d as usize)
                .into_iter()
                .map(|q| b[q] as usize)
                .collect();
            c.sort_unstable();
            c
        };
        let mask = coords.iter().fold(0u32, |m, &c| m | 1 << c);
        let set = IndexSet::new(n, mask)?;
        let exact_j = joint_influence(&f, set)?.to_f64();
        let exact_t = crate::influence::t_influence(&t, set)?.to_f64();
        let exact_c = t.coefficient(set).to_f64();

        let (j, ti) = estimate_joint_and_t_influence(h, &coords, samples, derive_seed(s, 1))?;
        let (p, _) = estimate_sign_probabilities(h, samples, derive_seed(s, 2))?;
        let c = crate::sampler::estimate_coefficient(h, &coords, samples, derive_seed(s, 3))?;
        out.joint_within += j.within(exact_j, 3.0) as usize;
        out.t_influence_within += ti.within(exact_t, 3.0) as usize;
        out.sign_within += p.within(exact_plus, 3.0) as usize;
        out.coefficient_within += c.within(exact_c, 3.0) as usize;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{hypertribe, Packing, TribeSpec};

    #[test]
    fn exact_report_at_sixteen() {
        let h = hypertribe(16, 2, 7, None).unwrap();
        let r = sharpness_report(&h, 2, &SamplingPlan::default()).unwrap();
        assert_eq!(r.mode, "exact");
        assert_eq!(r.k, 4);
        let ratio = r.ratio.unwrap();
        assert!(ratio.is_finite() && ratio > 0.0);
        assert!(r.sign_bounds.harris_ok && r.sign_bounds.paley_zygmund_ok);
        assert_eq!(
            r.p_plus.exact.clone().unwrap() + r.p_minus.exact.clone().unwrap(),
            Dyadic::one()
        );
    }

    #[test]
    fn empty_packing_gives_undefined_ratio() {
        let packing = Packing::from_blocks(8, 4, 2, 0, vec![]).unwrap();
        let h = Hypertribe::new(TribeSpec {
            n: 8,
            k: 4,
            d: 2,
            seed: 0,
            k_rounded: false,
            packing,
        });
        let r = sharpness_report(&h, 2, &SamplingPlan::default()).unwrap();
        assert_eq!(r.ratio, None);
        assert_eq!(r.max_joint_influence.value, 0.0);
        assert_eq!(r.p_minus.value, 1.0);
    }

    #[test]
    fn sampled_report_and_budget() {
        let h = hypertribe(64, 2, 3, None).unwrap();
        let plan = SamplingPlan {
            sets: 20,
            samples_per_set: 2000,
            sign_samples: 20_000,
            level_samples: 2000,
            exact_max_n: 16,
            seed: 5,
            budget: 10_000_000,
        };
        let r = sharpness_report(&h, 2, &plan).unwrap();
        assert_eq!(r.mode, "sampled");
        assert_eq!(r.set_estimates.len(), 20);
        assert!(r.weight_at_least_d.value > 0.0);
        assert_eq!(r, sharpness_report(&h, 2, &plan).unwrap());
        let tight = SamplingPlan {
            budget: 1000,
            ..plan
        };
        assert!(matches!(
            sharpness_report(&h, 2, &tight),
            Err(Error::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn sampled_matches_exact_weight_at_sixteen() {
        let h = hypertribe(16, 2, 7, None).unwrap();
        let exact = sharpness_report(&h, 2, &SamplingPlan::default()).unwrap();
        let plan = SamplingPlan {
            exact_max_n: 0,
            sets: 5,
            samples_per_set: 1000,
            sign_samples: 200_000,
            level_samples: 50_000,
            seed: 1,
            budget: u64::MAX,
        };
        let s = sharpness_report(&h, 2, &plan).unwrap();
        let w = &s.weight_at_least_d;
        assert!(
            (w.value - exact.weight_at_least_d.value).abs() <= 4.0 * w.stderr + 1e-3,
            "{w:?} vs {:?}",
            exact.weight_at_least_d
        );
    }

    #[test]
    fn small_cross_check() {
        let h = hypertribe(16, 2, 7, None).unwrap();
        let c = cross_check(&h, 2, 5, 20_000, 9).unwrap();
        assert!(c.worst_fraction() >= 0.6, "{c:?}");
    }
}
