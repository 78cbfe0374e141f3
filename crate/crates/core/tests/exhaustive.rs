//! Enumerations over every function of a few variables.

use bfan_core::calculus::{derivative_fourier, derivative_pointwise};
use bfan_core::verify::{nearest_low_degree, run_suite, ApproxMethod, Suite, SuiteConfig};
use bfan_core::{BooleanFunction, IndexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn assert_suite(suite: Suite, n_max: u32) {
    let cfg = SuiteConfig {
        n_max,
        seed: 17,
        samples: None,
        keep_records: false,
    };
    for r in run_suite(suite, &cfg).unwrap() {
        assert!(r.all_passed(), "{}: {:?}", r.summary(), r.failures.first());
    }
}

#[test]
fn main_theorem_up_to_four() {
    assert_suite(Suite::MainTheorem, 4);
}

#[test]
fn influence_chain_up_to_four() {
    assert_suite(Suite::Chain, 4);
}

#[test]
fn log_sobolev_and_lattice_up_to_four() {
    assert_suite(Suite::LogSobolev, 4);
    assert_suite(Suite::Lattice, 4);
}

#[test]
fn derivative_routes_agree_exhaustively() {
    for n in 1..=3u32 {
        for word in 0..1u64 << (1 << n) {
            let f = BooleanFunction::from_index(n, word);
            let t = f.fwht();
            for mask in 1..1u32 << n {
                let s = IndexSet::new(n, mask).unwrap();
                assert_eq!(
                    derivative_fourier(&t, s).unwrap(),
                    derivative_pointwise(&f, s).unwrap()
                );
            }
        }
    }
}

#[test]
fn derivative_routes_agree_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut cases = 0;
    for _ in 0..1200 {
        let n = rng.random_range(4..=8u32);
        let f = BooleanFunction::random(n, &mut rng).unwrap();
        let mask = rng.random_range(1..1u32 << n);
        let s = IndexSet::new(n, mask).unwrap();
        assert_eq!(
            derivative_fourier(&f.fwht(), s).unwrap(),
            derivative_pointwise(&f, s).unwrap()
        );
        cases += 1;
    }
    assert!(cases >= 1000);
}

/// Plain enumeration of the degree-≤d class, independent of the approximator's cache.
fn brute_force_distance(f: &BooleanFunction, d: u32) -> u64 {
    let n = f.n();
    (0..1u64 << (1 << n))
        .map(|w| BooleanFunction::from_index(n, w))
        .filter(|g| g.fwht().degree() <= d)
        .map(|g| g.hamming(f).unwrap())
        .min()
        .unwrap()
}

#[test]
fn approximator_matches_enumeration_on_three_bits() {
    for word in 0..256u64 {
        let f = BooleanFunction::from_index(3, word);
        for d in 0..=3 {
            let best = brute_force_distance(&f, d);
            for method in [ApproxMethod::Exhaustive, ApproxMethod::Lattice] {
                let r = nearest_low_degree(&f, d, method).unwrap();
                assert_eq!(r.hamming, best, "f={word} d={d} {method:?}");
                assert!(r.g.fwht().degree() <= d);
                assert_eq!(r.g.hamming(&f).unwrap(), best);
            }
        }
    }
}
