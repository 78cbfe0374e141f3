//! Batteries of checks over exhaustive or seeded random families of functions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::{BooleanFunction, IndexSet};
use crate::error::{Error, Result};
use crate::sampler::derive_seed;

use super::checks::{
    check_degree_lattice, check_hypercontractivity, check_influence_chain, check_log_sobolev_fn,
    check_main_theorem_spectrum, label, CHAIN_MAX_N,
};
use super::heat_integral::{check_integral_identity_fkn, check_integral_identity_kkl};
use super::CheckResult;

/// Dimensions up to which batteries enumerate every function.
pub const EXHAUSTIVE_MAX_N: u32 = 4;
/// Time points of the hypercontractivity battery.
pub const HEAT_TIMES: [f64; 6] = [0.05, 0.1, 0.5, 1.0, 2.0, 5.0];
/// Failures kept verbatim in a report; the count is always complete.
pub const MAX_LISTED_FAILURES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    MainTheorem,
    Chain,
    KklIdentity,
    FknIdentity,
    Hypercontractivity,
    LogSobolev,
    Lattice,
    All,
}

impl Suite {
    pub const SINGLE: [Suite; 7] = [
        Suite::MainTheorem,
        Suite::Chain,
        Suite::KklIdentity,
        Suite::FknIdentity,
        Suite::Hypercontractivity,
        Suite::LogSobolev,
        Suite::Lattice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::MainTheorem => "main-theorem",
            Suite::Chain => "chain",
            Suite::KklIdentity => "kkl-identity",
            Suite::FknIdentity => "fkn-identity",
            Suite::Hypercontractivity => "hypercontractivity",
            Suite::LogSobolev => "log-sobolev",
            Suite::Lattice => "lattice",
            Suite::All => "all",
        }
    }

    /// The batteries this name stands for.
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Self::SINGLE.to_vec(),
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::SINGLE
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub n_max: u32,
    pub seed: u64,
    /// Overrides the number of random functions a battery draws.
    pub samples: Option<usize>,
    /// Keep every record, not only failures and the tightest case per check.
    pub keep_records: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n_max: 4,
            seed: 0,
            samples: None,
            keep_records: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub total: u64,
    pub passed: u64,
    /// Up to [`MAX_LISTED_FAILURES`] failing records, in enumeration order.
    pub failures: Vec<CheckResult>,
    /// The record with the smallest slack for each check name.
    pub tightest: BTreeMap<String, CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<CheckResult>>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    /// `suite=<name> pass=<k>/<total>`
    pub fn summary(&self) -> String {
        format!("suite={} pass={}/{}", self.suite, self.passed, self.total)
    }
}

/// Running totals; merging two tallies keeps the left one's records first.
#[derive(Default)]
struct Tally {
    total: u64,
    passed: u64,
    failures: Vec<CheckResult>,
    tightest: BTreeMap<String, CheckResult>,
    records: Vec<CheckResult>,
}

impl Tally {
    fn push(&mut self, r: CheckResult, keep: bool) {
        self.total += 1;
        if r.passed {
            self.passed += 1;
        } else if self.failures.len() < MAX_LISTED_FAILURES {
            self.failures.push(r.clone());
        }
        match self.tightest.get(&r.name) {
            Some(cur) if cur.slack_f64() <= r.slack_f64() => {}
            _ => {
                self.tightest.insert(r.name.clone(), r.clone());
            }
        }
        if keep {
            self.records.push(r);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.total += other.total;
        self.passed += other.passed;
        let room = MAX_LISTED_FAILURES.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
        for (name, r) in other.tightest {
            match self.tightest.get(&name) {
                Some(cur) if cur.slack_f64() <= r.slack_f64() => {}
                _ => {
                    self.tightest.insert(name, r);
                }
            }
        }
        self.records.extend(other.records);
        self
    }

    fn into_report(self, suite: Suite, keep: bool) -> SuiteReport {
        SuiteReport {
            suite: suite.name().to_string(),
            total: self.total,
            passed: self.passed,
            failures: self.failures,
            tightest: self.tightest,
            records: keep.then_some(self.records),
        }
    }
}

/// Runs `check` on every function in parallel; records are tallied in input order.
fn tally_functions(
    fs: &[BooleanFunction],
    keep: bool,
    check: impl Fn(&BooleanFunction) -> Result<Vec<CheckResult>> + Sync,
) -> Result<Tally> {
    fs.par_iter()
        .map(|f| {
            let mut t = Tally::default();
            for r in check(f)? {
                t.push(r, keep);
            }
            Ok(t)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

/// Runs `check` on every function of `n` variables, in truth-table index order.
fn tally_all_functions(
    n: u32,
    keep: bool,
    check: impl Fn(&BooleanFunction) -> Result<Vec<CheckResult>> + Sync,
) -> Result<Tally> {
    let count = 1u64 << (1u32 << n);
    (0..count)
        .into_par_iter()
        .map(|word| {
            let f = BooleanFunction::from_index(n, word);
            let mut t = Tally::default();
            for r in check(&f)? {
                t.push(r, keep);
            }
            Ok(t)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

/// `count` seeded random functions whose dimensions cycle through `n_lo..=n_hi`.
fn random_functions(seed: u64, count: usize, n_lo: u32, n_hi: u32) -> Result<Vec<BooleanFunction>> {
    let span = (n_hi - n_lo + 1) as usize;
    (0..count)
        .map(|i| {
            let n = n_lo + (i % span) as u32;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            BooleanFunction::random(n, &mut rng)
        })
        .collect()
}

fn main_theorem_records(f: &BooleanFunction) -> Result<Vec<CheckResult>> {
    let t = f.fwht();
    (1..=f.n())
        .map(|d| check_main_theorem_spectrum(&t, d, || label(f)))
        .collect()
}

type Battery = fn(&BooleanFunction) -> Result<Vec<CheckResult>>;

fn run_one(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let keep = cfg.keep_records;
    let exhaustive_hi = cfg.n_max.min(EXHAUSTIVE_MAX_N);
    let mut tally = Tally::default();
    match suite {
        Suite::MainTheorem | Suite::Chain => {
            let (check, random_hi, per_n): (Battery, u32, usize) = if suite == Suite::MainTheorem {
                (
                    main_theorem_records,
                    cfg.n_max.min(crate::cube::DEFAULT_MAX_N),
                    100,
                )
            } else {
                (check_influence_chain, cfg.n_max.min(CHAIN_MAX_N), 20)
            };
            for n in 1..=exhaustive_hi {
                tally = tally.merge(tally_all_functions(n, keep, check)?);
            }
            if random_hi > EXHAUSTIVE_MAX_N {
                let lo = EXHAUSTIVE_MAX_N + 1;
                let count = cfg.samples.unwrap_or(per_n) * (random_hi - lo + 1) as usize;
                let fs = random_functions(cfg.seed, count, lo, random_hi)?;
                tally = tally.merge(tally_functions(&fs, keep, check)?);
            }
        }
        Suite::KklIdentity | Suite::FknIdentity => {
            let hi = cfg.n_max.clamp(1, 8);
            let count = cfg.samples.unwrap_or(200);
            let fs = random_functions(cfg.seed, count, 1, hi)?;
            tally = if suite == Suite::KklIdentity {
                tally_functions(&fs, keep, |f| {
                    let mut out = Vec::new();
                    for d in 1..=f.n().min(3) {
                        out.extend(check_integral_identity_kkl(f, d)?);
                    }
                    Ok(out)
                })?
            } else {
                tally_functions(&fs, keep, |f| {
                    let mut out = Vec::new();
                    for size in 0..=f.n().min(2) {
                        for j in IndexSet::all_of_size(f.n(), size) {
                            out.extend(check_integral_identity_fkn(f, j)?);
                        }
                    }
                    Ok(out)
                })?
            };
        }
        Suite::Hypercontractivity => {
            let hi = cfg.n_max.clamp(1, 8);
            let count = cfg.samples.unwrap_or(1000);
            let fs = random_functions(cfg.seed, count, 1, hi)?;
            tally = tally_functions(&fs, keep, |f| {
                HEAT_TIMES
                    .iter()
                    .map(|&t| check_hypercontractivity(f, t))
                    .collect()
            })?;
        }
        Suite::LogSobolev => {
            for n in 1..=exhaustive_hi {
                tally = tally.merge(tally_all_functions(n, keep, |f| {
                    Ok(vec![check_log_sobolev_fn(f)?])
                })?);
            }
        }
        Suite::Lattice => {
            for n in 1..=exhaustive_hi {
                tally = tally.merge(tally_all_functions(n, keep, |f| {
                    let degree = f.fwht().degree();
                    let mut out = Vec::new();
                    for d in degree.max(1)..=n {
                        out.extend(check_degree_lattice(f, d)?);
                    }
                    Ok(out)
                })?);
            }
        }
        Suite::All => unreachable!("expanded by run_suite"),
    }
    Ok(tally.into_report(suite, keep))
}

/// Runs a battery (or all of them for [`Suite::All`]), one report per battery.
///
/// Work is spread over the rayon pool, but records are merged in enumeration order, so
/// the reports do not depend on the thread count.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    if cfg.n_max == 0 {
        return Err(Error::BadParameters("n_max must be at least 1".into()));
    }
    suite
        .expand()
        .into_iter()
        .map(|s| run_one(s, cfg))
        .collect()
}
