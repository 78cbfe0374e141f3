//! Executable checks of inequalities and identities, plus the batteries that run them.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::dyadic::Dyadic;

pub mod approx;
pub mod checks;
pub mod heat_integral;
pub mod sharpness;
pub mod suites;

pub use approx::{fkn_report, nearest_low_degree, ApproxMethod, ApproxResult, FknReport};
pub use checks::{
    check_degree_lattice, check_hypercontractivity, check_hypercontractivity_values,
    check_influence_chain, check_log_sobolev, check_log_sobolev_fn, check_main_theorem,
    main_theorem_bound,
};
pub use heat_integral::{
    check_integral_identity_fkn, check_integral_identity_kkl, check_kklprop2_bound,
};
pub use sharpness::{sharpness_report, SamplingPlan, SharpnessReport};
pub use suites::{run_suite, Suite, SuiteConfig, SuiteReport};

/// One side of a checked relation.
#[derive(Clone, Debug, PartialEq)]
pub enum Side {
    Exact(Dyadic),
    /// exact but not dyadic; only appears when an identity fails
    Rational(BigRational),
    Float(f64),
    PosInfinity,
}

impl Side {
    pub fn to_f64(&self) -> f64 {
        match self {
            Side::Exact(d) => d.to_f64(),
            Side::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Side::Float(x) => *x,
            Side::PosInfinity => f64::INFINITY,
        }
    }

    fn as_rational(&self) -> Option<BigRational> {
        match self {
            Side::Exact(d) => Some(d.to_rational()),
            Side::Rational(r) => Some(r.clone()),
            _ => None,
        }
    }

    /// Dyadic when the denominator is a power of two.
    pub fn from_rational(r: BigRational) -> Side {
        let den = r.denom();
        if den.magnitude().count_ones() == 1 {
            let exp = den.trailing_zeros().unwrap_or(0) as u32;
            Side::Exact(Dyadic::new(r.numer().clone(), exp))
        } else {
            Side::Rational(r)
        }
    }
}

impl From<Dyadic> for Side {
    fn from(d: Dyadic) -> Self {
        Side::Exact(d)
    }
}

impl From<f64> for Side {
    fn from(x: f64) -> Self {
        if x == f64::INFINITY {
            Side::PosInfinity
        } else {
            Side::Float(x)
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Exact(d) => write!(f, "{d}"),
            Side::Rational(r) => write!(f, "{r}"),
            Side::Float(x) => write!(f, "{x}"),
            Side::PosInfinity => write!(f, "inf"),
        }
    }
}

/// Exact sides serialize like [`Dyadic`]; floats as numbers; infinity as the string `"inf"`.
impl Serialize for Side {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Side::Exact(d) => d.serialize(s),
            Side::Rational(r) => {
                let mut st = s.serialize_struct("Rational", 3)?;
                st.serialize_field("num", &r.numer().to_string())?;
                st.serialize_field("den", &r.denom().to_string())?;
                st.serialize_field("float", &r.to_f64().unwrap_or(f64::NAN))?;
                st.end()
            }
            Side::Float(x) => s.serialize_f64(*x),
            Side::PosInfinity => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "==",
        })
    }
}

/// Outcome of one checked relation `lhs (<=|>=|==) rhs`.
///
/// `slack` is oriented so that `slack >= -tol` is exactly the pass condition:
/// `rhs - lhs` for `<=`, `lhs - rhs` for `>=`, and `-|lhs - rhs|` for `==`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub instance: String,
    pub relation: Relation,
    pub lhs: Side,
    pub rhs: Side,
    pub slack: Side,
    pub passed: bool,
    pub tol: f64,
}

impl CheckResult {
    pub fn new(
        name: impl Into<String>,
        instance: impl Into<String>,
        lhs: Side,
        relation: Relation,
        rhs: Side,
        tol: f64,
    ) -> Self {
        let slack = slack(&lhs, relation, &rhs);
        let passed = match &slack {
            Side::PosInfinity => true,
            Side::Exact(d) => !d.is_negative() || d.to_f64() >= -tol,
            s => match s.as_rational() {
                Some(r) => tol_ok(&r, tol),
                None => s.to_f64() >= -tol,
            },
        };
        CheckResult {
            name: name.into(),
            instance: instance.into(),
            relation,
            lhs,
            rhs,
            slack,
            passed,
            tol,
        }
    }

    pub fn le(
        name: &str,
        instance: impl Into<String>,
        lhs: impl Into<Side>,
        rhs: impl Into<Side>,
        tol: f64,
    ) -> Self {
        Self::new(name, instance, lhs.into(), Relation::Le, rhs.into(), tol)
    }

    pub fn ge(
        name: &str,
        instance: impl Into<String>,
        lhs: impl Into<Side>,
        rhs: impl Into<Side>,
        tol: f64,
    ) -> Self {
        Self::new(name, instance, lhs.into(), Relation::Ge, rhs.into(), tol)
    }

    pub fn eq(
        name: &str,
        instance: impl Into<String>,
        lhs: impl Into<Side>,
        rhs: impl Into<Side>,
        tol: f64,
    ) -> Self {
        Self::new(name, instance, lhs.into(), Relation::Eq, rhs.into(), tol)
    }

    /// Slack as a float, `+inf` when unbounded.
    pub fn slack_f64(&self) -> f64 {
        self.slack.to_f64()
    }
}

fn tol_ok(slack: &BigRational, tol: f64) -> bool {
    if !slack.is_negative() {
        return true;
    }
    match BigRational::from_float(tol) {
        Some(t) => slack + t >= BigRational::zero(),
        None => false,
    }
}

fn slack(lhs: &Side, relation: Relation, rhs: &Side) -> Side {
    if let (Side::Exact(a), Side::Exact(b)) = (lhs, rhs) {
        return Side::Exact(match relation {
            Relation::Le => b - a,
            Relation::Ge => a - b,
            Relation::Eq => -(a - b).abs(),
        });
    }
    if let (Some(a), Some(b)) = (lhs.as_rational(), rhs.as_rational()) {
        let s = match relation {
            Relation::Le => b - a,
            Relation::Ge => a - b,
            Relation::Eq => -(a - b).abs(),
        };
        return Side::from_rational(s);
    }
    let (a, b) = (lhs.to_f64(), rhs.to_f64());
    let s = match relation {
        Relation::Le => b - a,
        Relation::Ge => a - b,
        Relation::Eq => {
            if a == b {
                0.0
            } else {
                -(a - b).abs()
            }
        }
    };
    if s == f64::INFINITY {
        Side::PosInfinity
    } else if s.is_nan() {
        // inf - inf on an equality; treat as failing
        Side::Float(f64::NEG_INFINITY)
    } else {
        Side::Float(s)
    }
}

/// `n!` as a big integer.
pub(crate) fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, k| acc * k)
}
