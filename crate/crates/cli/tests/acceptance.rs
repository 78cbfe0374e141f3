//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use bfan_core::calculus::{derivative_fourier, derivative_pointwise};
use bfan_core::families::hypertribe;
use bfan_core::influence::max_joint_influence;
use bfan_core::verify::sharpness::cross_check;
use bfan_core::verify::{
    nearest_low_degree, run_suite, sharpness_report, ApproxMethod, SamplingPlan, Side, Suite,
    SuiteConfig,
};
use bfan_core::{BooleanFunction, Dyadic, IndexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn suite(s: Suite, n_max: u32) -> Result<Vec<bfan_core::verify::SuiteReport>, String> {
    let cfg = SuiteConfig {
        n_max,
        seed: 2024,
        samples: None,
        keep_records: false,
    };
    run_suite(s, &cfg).map_err(|e| e.to_string())
}

fn all_pass(reports: &[bfan_core::verify::SuiteReport]) -> Result<String, String> {
    let summary: Vec<String> = reports.iter().map(|r| r.summary()).collect();
    for r in reports {
        if !r.all_passed() {
            return Err(format!(
                "{} first failure {:?}",
                r.summary(),
                r.failures.first()
            ));
        }
    }
    Ok(summary.join(" "))
}

fn main_theorem() -> Outcome {
    let reports = suite(Suite::MainTheorem, 4)?;
    // Σ_{n=1..4} n · 2^{2^n}
    ensure(
        reports[0].total == 4 + 2 * 16 + 3 * 256 + 4 * 65536,
        "wrong record count",
    )?;
    let tight = &reports[0].tightest["main-theorem"];
    Ok(format!(
        "{}, min slack {:.3e}",
        all_pass(&reports)?,
        tight.slack_f64()
    ))
}

fn chain() -> Outcome {
    all_pass(&suite(Suite::Chain, 4)?)
}

fn identities() -> Outcome {
    let mut reports = suite(Suite::KklIdentity, 8)?;
    reports.extend(suite(Suite::FknIdentity, 8)?);
    let line = all_pass(&reports)?;
    for r in &reports {
        for (name, rec) in &r.tightest {
            if name.ends_with("/exact") {
                ensure(
                    rec.slack == Side::Exact(Dyadic::zero()),
                    format!("{name} has nonzero slack"),
                )?;
            }
        }
    }
    Ok(line)
}

fn functional_inequalities() -> Outcome {
    let mut reports = suite(Suite::Hypercontractivity, 8)?;
    reports.extend(suite(Suite::LogSobolev, 4)?);
    ensure(
        reports[0].total == 6000,
        "expected 1000 functions x 6 times",
    )?;
    ensure(
        reports[1].total == 4 + 16 + 256 + 65536,
        "expected every {0,1} function up to n = 4",
    )?;
    all_pass(&reports)
}

fn lattice() -> Outcome {
    all_pass(&suite(Suite::Lattice, 4)?)
}

fn derivative_routes() -> Outcome {
    let mut exhaustive = 0u64;
    for n in 1..=3u32 {
        for word in 0..1u64 << (1 << n) {
            let f = BooleanFunction::from_index(n, word);
            let t = f.fwht();
            for mask in 1..1u32 << n {
                let s = IndexSet::new(n, mask).unwrap();
                ensure(
                    derivative_fourier(&t, s).unwrap() == derivative_pointwise(&f, s).unwrap(),
                    format!("routes differ at n={n} f={word} mask={mask}"),
                )?;
                exhaustive += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sampled = 2000;
    for _ in 0..sampled {
        let n = rng.random_range(1..=8u32);
        let f = BooleanFunction::random(n, &mut rng).unwrap();
        let s = IndexSet::new(n, rng.random_range(1..1u32 << n)).unwrap();
        ensure(
            derivative_fourier(&f.fwht(), s).unwrap() == derivative_pointwise(&f, s).unwrap(),
            format!("routes differ on a sampled case at n={n}"),
        )?;
    }
    Ok(format!(
        "{exhaustive} exhaustive cases (n <= 3), {sampled} sampled cases (n <= 8)"
    ))
}

fn hypertribes() -> Outcome {
    let h = hypertribe(16, 2, 7, None).map_err(|e| e.to_string())?;
    ensure(h.spec().k == 4, "k != 4 at n = 16")?;
    let p = h.packing();
    ensure(
        p.is_valid() && p.pairwise_intersections_ok(),
        "packing violates the pair condition",
    )?;
    let f = h.to_boolean_function(16).unwrap();
    for row in 0..f.len() {
        for c in 0..16 {
            ensure(!f.get(row) || f.get(row | 1 << c), "H is not monotone")?;
        }
    }
    let exact = sharpness_report(&h, 2, &SamplingPlan::default()).map_err(|e| e.to_string())?;
    let ratio16 = exact.ratio.ok_or("ratio undefined at n = 16")?;
    ensure(
        ratio16.is_finite() && ratio16 > 0.0,
        "n = 16 ratio not finite and positive",
    )?;
    let (_, jmax) = max_joint_influence(&f, 2).unwrap();
    ensure(
        exact.max_joint_influence.exact.as_ref() == Some(&jmax),
        "exact MaxJInf mismatch",
    )?;

    let big = hypertribe(256, 2, 7, None).map_err(|e| e.to_string())?;
    ensure(big.spec().k == 10, "k != 10 at n = 256")?;
    let plan = SamplingPlan {
        seed: 11,
        ..SamplingPlan::default()
    };
    let sampled = sharpness_report(&big, 2, &plan).map_err(|e| e.to_string())?;
    ensure(
        sampled.sets_examined >= 200 && sampled.p_plus.stderr > 0.0,
        "n = 256 estimates missing",
    )?;

    let cc = cross_check(&h, 2, 40, 100_000, 5).map_err(|e| e.to_string())?;
    ensure(
        cc.worst_fraction() >= 0.95,
        format!(
            "cross-check agreement {:.3} < 0.95 ({cc:?})",
            cc.worst_fraction()
        ),
    )?;

    println!("    trend (d = 2; ratio = MaxJInf / (W^>=2 (log2 n / n)^2)):");
    println!(
        "    {:>6} {:>4} {:>6} {:>9} {:>8} {:>10} {:>10} {:>10}",
        "n", "k", "blocks", "coverage", "mode", "P(H=+1)", "W^>=2", "ratio"
    );
    let trend_plan = SamplingPlan {
        sets: 200,
        samples_per_set: 10_000,
        level_samples: 2_000,
        seed: 11,
        ..SamplingPlan::default()
    };
    for n in [16u32, 32, 64, 128, 256] {
        let h = hypertribe(n, 2, 7, None).map_err(|e| e.to_string())?;
        let r = if n == 256 {
            sampled.clone()
        } else {
            sharpness_report(&h, 2, &trend_plan).map_err(|e| e.to_string())?
        };
        println!(
            "    {:>6} {:>4} {:>6} {:>9.4} {:>8} {:>10.5} {:>10.5} {:>10}",
            n,
            r.k,
            r.blocks,
            r.coverage.coverage_ratio,
            r.mode,
            r.p_plus.value,
            r.weight_at_least_d.value,
            r.ratio
                .map(|x| format!("{x:.3}"))
                .unwrap_or_else(|| "0/0".into()),
        );
    }
    Ok(format!(
        "n=16: coverage {:.3}, exact ratio {ratio16:.4}; n=256: P(H=+1) = {:.4} +- {:.4}, ratio {:.3} +- {:.3}; \
         cross-check within 3 stderr: joint {}/40, t-influence {}/40, sign {}/40, coefficient {}/40",
        exact.coverage.coverage_ratio,
        sampled.p_plus.value,
        sampled.p_plus.stderr,
        sampled.ratio.unwrap_or(f64::NAN),
        sampled.ratio_stderr.unwrap_or(f64::NAN),
        cc.joint_within,
        cc.t_influence_within,
        cc.sign_within,
        cc.coefficient_within,
    ))
}

/// Degree by direct inner products, without the transform used by the library.
fn degree_at_most_one(f: &BooleanFunction) -> bool {
    let n = f.n() as usize;
    let len = f.len();
    (0..1usize << n)
        .filter(|s: &usize| s.count_ones() >= 2)
        .all(|s| {
            let sum: i64 = (0..len)
                .map(|x| {
                    let chi = if (!x & s).count_ones() % 2 == 0 {
                        1
                    } else {
                        -1
                    };
                    chi * f.sign(x)
                })
                .sum();
            sum == 0
        })
}

fn approximator_oracle() -> Outcome {
    let class: Vec<BooleanFunction> = (0..1u64 << 16)
        .map(|w| BooleanFunction::from_index(4, w))
        .filter(degree_at_most_one)
        .collect();
    ensure(
        class.len() == 10,
        format!(
            "expected 10 degree-1 functions on 4 bits, found {}",
            class.len()
        ),
    )?;
    let mut near: Vec<BooleanFunction> = Vec::new();
    for g in &class {
        near.push(g.clone());
        for b in 0..16 {
            near.push(g.flipped(b));
        }
    }
    near.sort_by(|a, b| a.cmp_truth_table(b));
    near.dedup();
    for f in &near {
        let r = nearest_low_degree(f, 1, ApproxMethod::Exhaustive).map_err(|e| e.to_string())?;
        let best = class.iter().map(|g| g.hamming(f).unwrap()).min().unwrap();
        ensure(r.distance_sq <= Dyadic::new(1, 2), "distance above 4/16")?;
        ensure(r.hamming == best, "distance differs from plain enumeration")?;
        ensure(
            class.contains(&r.g) && r.g.hamming(f).unwrap() == best,
            "returned g is not a minimizer",
        )?;
        let lat = nearest_low_degree(f, 1, ApproxMethod::Lattice).map_err(|e| e.to_string())?;
        ensure(
            lat.hamming == best && lat.g == r.g,
            "lattice route disagrees",
        )?;
    }
    Ok(format!("{} functions within distance 1 of the 10 degree-1 functions; both routes match enumeration", near.len()))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let tt = d.join("maj5.tt1");
    std::fs::write(&tt, "tt1 n=5\n00000001000101110001011101111111\n").unwrap();
    let tt = tt.to_str().unwrap().to_string();
    let commands: Vec<(Vec<String>, Option<&str>)> = vec![
        (
            vec![
                "generate",
                "--family",
                "hypertribe",
                "--n",
                "16",
                "--d",
                "2",
                "--seed",
                "7",
                "--out",
                "OUT/h.tt1",
            ],
            Some("h.tt1"),
        ),
        (
            vec![
                "generate",
                "--family",
                "hypertribe",
                "--n",
                "256",
                "--d",
                "2",
                "--seed",
                "7",
                "--out",
                "OUT/g.ttb",
            ],
            Some("g.ttb.packing.json"),
        ),
        (vec!["analyze", "--input", &tt, "--d", "3"], None),
        (
            vec!["approx", "--input", &tt, "--d", "2", "--lattice"],
            None,
        ),
        (
            vec![
                "verify",
                "--suite",
                "all",
                "--n-max",
                "5",
                "--seed",
                "9",
                "--samples",
                "30",
            ],
            None,
        ),
        (
            vec![
                "sharpness",
                "--d",
                "2",
                "--n-list",
                "16,128",
                "--seed",
                "4",
                "--sets",
                "50",
                "--set-samples",
                "5000",
                "--samples",
                "50000",
                "--level-samples",
                "1000",
            ],
            None,
        ),
    ]
    .into_iter()
    .map(|(args, file)| (args.into_iter().map(String::from).collect(), file))
    .collect();
    let run = |args: &[String], tag: &str| -> Result<(Vec<u8>, Vec<u8>), String> {
        let out_dir = d.join(tag);
        std::fs::create_dir_all(&out_dir).unwrap();
        let args: Vec<String> = args
            .iter()
            .map(|a| a.replace("OUT", out_dir.to_str().unwrap()))
            .collect();
        let o = Command::new(env!("CARGO_BIN_EXE_bfan"))
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(
            o.status.success(),
            format!(
                "bfan {} failed: {}",
                args.join(" "),
                String::from_utf8_lossy(&o.stderr)
            ),
        )?;
        // paths embed the run directory, which is the only intended difference
        let stdout = String::from_utf8_lossy(&o.stdout).replace(out_dir.to_str().unwrap(), "OUT");
        Ok((stdout.into_bytes(), o.stderr))
    };
    for (i, (args, file)) in commands.iter().enumerate() {
        let a = run(args, &format!("a{i}"))?;
        let b = run(args, &format!("b{i}"))?;
        ensure(
            a == b,
            format!("bfan {} output differs between runs", args.join(" ")),
        )?;
        if let Some(name) = file {
            let fa = std::fs::read(d.join(format!("a{i}")).join(name)).unwrap();
            let fb = std::fs::read(d.join(format!("b{i}")).join(name)).unwrap();
            ensure(fa == fb, format!("{name} differs between runs"))?;
        }
    }
    Ok(format!(
        "{} seeded commands reproduced byte for byte",
        commands.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("main theorem, exhaustive n <= 4", main_theorem),
        ("influence chain, exhaustive n <= 4", chain),
        ("integral identities, exact and quadrature", identities),
        (
            "hypercontractivity and log-Sobolev",
            functional_inequalities,
        ),
        ("degree lattice, n <= 4", lattice),
        ("derivative route equivalence", derivative_routes),
        (
            "hypertribes: packing, monotonicity, sharpness, estimator cross-check",
            hypertribes,
        ),
        (
            "low-degree approximator vs enumeration",
            approximator_oracle,
        ),
        ("byte-determinism of seeded commands", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
