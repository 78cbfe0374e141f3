//! The five subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bfan_core::families::{self, CoverageStats, Hypertribe, TribeSpec};
use bfan_core::format::{parse_any, write_tt1, write_ttb};
use bfan_core::influence::{max_influence, total_influence, InfluenceReport};
use bfan_core::verify::approx::DeviationRatio;
use bfan_core::verify::sharpness::SharpnessReport;
use bfan_core::verify::{
    fkn_report, nearest_low_degree, run_suite, sharpness_report, ApproxMethod, ApproxResult,
    SamplingPlan, Suite, SuiteConfig, SuiteReport,
};
use bfan_core::{BooleanFunction, Dyadic, Error, IndexSet};
use serde::Serialize;

use crate::output::{
    dimension_cap, emit, read_input, to_json, write_file, CliResult, Context, Failure,
    EXIT_CHECK_FAILED,
};
use crate::{AnalyzeArgs, ApproxArgs, Family, Format, GenerateArgs, SharpnessArgs, VerifyArgs};

fn load(path: &Path) -> CliResult<BooleanFunction> {
    let cap = dimension_cap()?;
    Ok(parse_any(&read_input(path)?, cap)?)
}

fn reject_csv(format: Format, command: &str) -> CliResult<()> {
    if format == Format::Csv {
        return Err(Failure::usage(format!("{command} has no CSV output")));
    }
    Ok(())
}

#[derive(Serialize)]
struct Spectrum {
    n: u32,
    degree: u32,
    mean: Dyadic,
    nonzero_coefficients: usize,
    /// `W^{=r}` for `r = 0..=n`
    level_weights: Vec<Dyadic>,
}

#[derive(Serialize)]
struct LevelBound {
    r: u32,
    weight_at_least: Dyadic,
}

#[derive(Serialize)]
struct Maximizer {
    r: u32,
    set: IndexSet,
    value: Dyadic,
    influences: InfluenceReport,
}

#[derive(Serialize)]
struct Analysis {
    input: String,
    d: u32,
    spectrum: Spectrum,
    tail_weights: Vec<LevelBound>,
    total_influence: Dyadic,
    max_influence: Vec<Maximizer>,
}

pub fn analyze(ctx: &Context, a: &AnalyzeArgs) -> CliResult<ExitCode> {
    let format = a.common.format.unwrap_or(Format::Json);
    reject_csv(format, "analyze")?;
    let f = load(&a.input)?;
    let n = f.n();
    let d = a.d.unwrap_or(n.min(3));
    if d > n {
        return Err(Error::BadDegree { d, n }.into());
    }
    let t = f.fwht();
    let spectrum = Spectrum {
        n,
        degree: t.degree(),
        mean: t.mean(),
        nonzero_coefficients: t.nonzero_count(),
        level_weights: (0..=n)
            .map(|r| t.weight_exact(r))
            .collect::<Result<_, _>>()?,
    };
    let tail_weights = (0..=d)
        .map(|r| {
            Ok(LevelBound {
                r,
                weight_at_least: t.weight_at_least(r)?,
            })
        })
        .collect::<CliResult<_>>()?;
    let max_influence = (1..=d)
        .map(|r| {
            let (set, value) = max_influence(&t, r)?;
            let influences = InfluenceReport::compute(&f, &t, set)?;
            Ok(Maximizer {
                r,
                set,
                value,
                influences,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let report = Analysis {
        input: a.input.display().to_string(),
        d,
        spectrum,
        tail_weights,
        total_influence: total_influence(&t),
        max_influence,
    };
    let text = match format {
        Format::Json => to_json(&ctx.envelope("analyze", &report))?,
        _ => analysis_text(&report),
    };
    emit(&a.common, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn analysis_text(r: &Analysis) -> String {
    let mut s = String::new();
    let sp = &r.spectrum;
    let _ = writeln!(s, "input {}", r.input);
    let _ = writeln!(
        s,
        "n {} degree {} mean {} nonzero {}",
        sp.n, sp.degree, sp.mean, sp.nonzero_coefficients
    );
    for (level, w) in sp.level_weights.iter().enumerate() {
        let _ = writeln!(s, "W^={level} {w}");
    }
    for b in &r.tail_weights {
        let _ = writeln!(s, "W^>={} {}", b.r, b.weight_at_least);
    }
    let _ = writeln!(s, "TotInf {}", r.total_influence);
    for m in &r.max_influence {
        let i = &m.influences;
        let _ = writeln!(
            s,
            "MaxInf_{} {} at {}  JInf {} CInf {} P(d!=0) {}",
            m.r, m.value, m.set, i.joint, i.coalition, i.nonzero_derivative_prob
        );
    }
    s
}

#[derive(Serialize)]
struct Verification<'a> {
    suite: &'a str,
    n_max: u32,
    seed: u64,
    samples: Option<usize>,
    passed: bool,
    reports: &'a [SuiteReport],
}

pub fn verify(ctx: &Context, a: &VerifyArgs) -> CliResult<ExitCode> {
    let format = a.common.format.unwrap_or(Format::Json);
    reject_csv(format, "verify")?;
    let suite: Suite = a.suite.parse()?;
    let cfg = SuiteConfig {
        n_max: a.n_max,
        seed: a.seed,
        samples: a.samples,
        keep_records: a.records,
    };
    let reports = run_suite(suite, &cfg)?;
    let passed = reports.iter().all(SuiteReport::all_passed);
    let summaries: Vec<String> = reports.iter().map(SuiteReport::summary).collect();
    let text = match format {
        Format::Json => {
            let body = Verification {
                suite: suite.name(),
                n_max: a.n_max,
                seed: a.seed,
                samples: a.samples,
                passed,
                reports: &reports,
            };
            to_json(&ctx.envelope("verify", &body))?
        }
        _ => {
            let mut s = String::new();
            for r in &reports {
                let _ = writeln!(s, "{}", r.summary());
                for f in &r.failures {
                    let _ = writeln!(
                        s,
                        "FAIL {} [{}] {} {:?} {} slack {}",
                        f.name, f.instance, f.lhs, f.relation, f.rhs, f.slack
                    );
                }
            }
            s
        }
    };
    emit(&a.common, &text)?;
    // keep stdout machine-readable when the report goes there
    if format == Format::Json {
        for line in &summaries {
            if a.common.out.is_some() {
                println!("{line}");
            } else {
                eprintln!("{line}");
            }
        }
    }
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    })
}

#[derive(Serialize)]
struct PackingFile<'a> {
    spec: &'a TribeSpec,
    coverage: &'a CoverageStats,
}

#[derive(Serialize)]
struct Generated {
    family: String,
    n: u32,
    table: Option<String>,
    packing: Option<String>,
    coverage: Option<CoverageStats>,
    plus_count: Option<u64>,
}

fn packing_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".packing.json");
    PathBuf::from(s)
}

fn write_table(out: &Path, f: &BooleanFunction) -> CliResult<()> {
    let binary = out
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("ttb"));
    if binary {
        write_file(out, &write_ttb(f))
    } else {
        write_file(out, write_tt1(f).as_bytes())
    }
}

pub fn generate(ctx: &Context, a: &GenerateArgs) -> CliResult<ExitCode> {
    let cap = dimension_cap()?;
    let n = a.n;
    let need_w = || a.w.ok_or_else(|| Failure::usage("tribes need --w"));
    let mut summary = Generated {
        family: format!("{:?}", a.family).to_lowercase(),
        n,
        table: None,
        packing: None,
        coverage: None,
        plus_count: None,
    };
    let table = match a.family {
        Family::Hypertribe => {
            let h = families::hypertribe(n, a.d, a.seed, a.k)?;
            let coverage = h.packing().coverage_stats();
            let path = packing_path(&a.out);
            let file = PackingFile {
                spec: h.spec(),
                coverage: &coverage,
            };
            write_file(&path, to_json(&ctx.envelope("generate", &file))?.as_bytes())?;
            summary.packing = Some(path.display().to_string());
            summary.coverage = Some(coverage);
            if n <= cap {
                Some(h.to_boolean_function(cap)?)
            } else {
                None
            }
        }
        other => {
            if n > cap {
                return Err(Error::DimensionTooLarge { n, cap }.into());
            }
            Some(match other {
                Family::Dictator => families::dictator(n, a.coord)?,
                Family::Parity => families::parity(n)?,
                Family::Majority => families::majority(n)?,
                Family::And => families::and(n)?,
                Family::Or => families::or(n)?,
                Family::Tribes => {
                    let w = need_w()?;
                    let h = Hypertribe::tribes(n, w)?;
                    summary.coverage = Some(h.packing().coverage_stats());
                    families::tribes(n, w)?
                }
                Family::Hypertribe => unreachable!("handled above"),
            })
        }
    };
    if let Some(f) = table {
        write_table(&a.out, &f)?;
        summary.table = Some(a.out.display().to_string());
        summary.plus_count = Some(f.count_plus());
    }
    print!("{}", to_json(&ctx.envelope("generate", &summary))?);
    Ok(ExitCode::SUCCESS)
}

pub const SHARPNESS_CSV_HEADER: &str =
    "n,d,k,k_rounded,blocks,coverage_ratio,mode,p_plus,p_plus_se,p_minus,p_minus_se,\
max_jinf,max_jinf_se,max_jinf_set,sets_examined,w_ge_d,w_ge_d_se,scale,ratio,ratio_se,\
harris_floor,harris_ok,block_mass,e2_floor_ok,pz_floor,pz_ok";

fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn sharpness_row(r: &SharpnessReport) -> String {
    let set: Vec<String> = r.max_joint_set.iter().map(|c| c.to_string()).collect();
    let b = &r.sign_bounds;
    [
        r.n.to_string(),
        r.d.to_string(),
        r.k.to_string(),
        r.k_rounded.to_string(),
        r.blocks.to_string(),
        r.coverage.coverage_ratio.to_string(),
        r.mode.to_string(),
        r.p_plus.value.to_string(),
        r.p_plus.stderr.to_string(),
        r.p_minus.value.to_string(),
        r.p_minus.stderr.to_string(),
        r.max_joint_influence.value.to_string(),
        r.max_joint_influence.stderr.to_string(),
        set.join(";"),
        r.sets_examined.to_string(),
        r.weight_at_least_d.value.to_string(),
        r.weight_at_least_d.stderr.to_string(),
        r.scale.to_string(),
        opt(r.ratio),
        opt(r.ratio_stderr),
        b.harris_floor.to_string(),
        b.harris_ok.to_string(),
        b.block_mass.to_string(),
        opt(b.e2_floor_ok),
        b.paley_zygmund_floor.to_string(),
        b.paley_zygmund_ok.to_string(),
    ]
    .join(",")
}

#[derive(Serialize)]
struct SharpnessTable<'a> {
    d: u32,
    seed: u64,
    plan: &'a SamplingPlan,
    rows: &'a [SharpnessReport],
}

pub fn sharpness(ctx: &Context, a: &SharpnessArgs) -> CliResult<ExitCode> {
    let format = a.common.format.unwrap_or(Format::Csv);
    if a.n_list.is_empty() {
        return Err(Failure::usage("--n-list is empty"));
    }
    if let Some(&n) = a.n_list.iter().find(|&&n| n < 4) {
        return Err(Failure::usage(format!(
            "every n must be at least 4, got {n}"
        )));
    }
    let cap = dimension_cap()?;
    let plan = SamplingPlan {
        sets: a.sets,
        samples_per_set: a.set_samples,
        sign_samples: a.samples,
        level_samples: a.level_samples,
        exact_max_n: a.exact_max_n.min(cap),
        seed: a.seed,
        budget: a.budget,
    };
    let rows = a
        .n_list
        .iter()
        .map(|&n| {
            let h = families::hypertribe(n, a.d, a.seed, a.k)?;
            Ok(sharpness_report(&h, a.d, &plan)?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let text = match format {
        Format::Json => {
            let body = SharpnessTable {
                d: a.d,
                seed: a.seed,
                plan: &plan,
                rows: &rows,
            };
            to_json(&ctx.envelope("sharpness", &body))?
        }
        Format::Csv | Format::Text => {
            let mut s = String::from(SHARPNESS_CSV_HEADER);
            s.push('\n');
            for r in &rows {
                s.push_str(&sharpness_row(r));
                s.push('\n');
            }
            s
        }
    };
    emit(&a.common, &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct FknSummary<'a> {
    max_influence: &'a Dyadic,
    max_influence_set: IndexSet,
    alpha_star: f64,
    ratios: &'a [DeviationRatio],
}

#[derive(Serialize)]
struct Approximation<'a> {
    input: String,
    approx: &'a ApproxResult,
    /// absent when `d + 1 > n`
    fkn: Option<FknSummary<'a>>,
}

pub fn approx(ctx: &Context, a: &ApproxArgs) -> CliResult<ExitCode> {
    let format = a.common.format.unwrap_or(Format::Json);
    reject_csv(format, "approx")?;
    let f = load(&a.input)?;
    let method = if a.lattice {
        ApproxMethod::Lattice
    } else {
        ApproxMethod::Auto
    };
    let input = a.input.display().to_string();
    let report;
    let plain;
    let body = if a.d < f.n() {
        report = fkn_report(&f, a.d, method)?;
        Approximation {
            input,
            approx: &report.approx,
            fkn: Some(FknSummary {
                max_influence: &report.max_influence,
                max_influence_set: report.max_influence_set,
                alpha_star: report.alpha_star,
                ratios: &report.ratios,
            }),
        }
    } else {
        plain = nearest_low_degree(&f, a.d, method)?;
        Approximation {
            input,
            approx: &plain,
            fkn: None,
        }
    };
    let text = match format {
        Format::Json => to_json(&ctx.envelope("approx", &body))?,
        _ => {
            let r = body.approx;
            let mut s = String::new();
            let bits: String = (0..r.g.len())
                .map(|b| if r.g.get(b) { '1' } else { '0' })
                .collect();
            let _ = writeln!(s, "g {bits}");
            let _ = writeln!(
                s,
                "distance_sq {} hamming {} unique {}",
                r.distance_sq, r.hamming, r.is_unique
            );
            if let Some(fkn) = &body.fkn {
                let _ = writeln!(
                    s,
                    "alpha* {} from MaxInf {} at {}",
                    fkn.alpha_star, fkn.max_influence, fkn.max_influence_set
                );
                for x in fkn.ratios {
                    let _ = writeln!(
                        s,
                        "J {} deviation {} ratio {}",
                        x.set,
                        x.deviation,
                        opt(x.ratio)
                    );
                }
            } else {
                for x in &r.coeff_deviations {
                    let _ = writeln!(s, "J {} deviation {}", x.set, x.deviation);
                }
            }
            s
        }
    };
    emit(&a.common, &text)?;
    Ok(ExitCode::SUCCESS)
}
