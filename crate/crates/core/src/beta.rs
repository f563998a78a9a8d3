//! Curvature-expansion coefficient functions for a perfectly reflecting
//! surface.
//!
//! Each of the 22 coefficients is `β(ξ) = P(ξ)·e^{-2ξ} + Q(ξ)·Ei(2ξ)` with
//! `Ei(x) = -E1(x)`. `P` and `Q` are stored as exact rationals, transcribed
//! in the same factored form they are tabulated in (an overall prefactor
//! times a short polynomial) and expanded once on first use.

use std::fmt;
use std::sync::OnceLock;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::paper_ei;

pub type Rational = Rational64;

/// Electric or magnetic dipole channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    E,
    M,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::E, Polarization::M];
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::E => "E",
            Polarization::M => "M",
        })
    }
}

/// The eleven `(order, branch)` slots available for each polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Flat surface, multiplies `α⊥`.
    Zeroth1,
    /// Flat surface, multiplies `α_zz`.
    Zeroth2,
    /// Mean curvature, multiplies `α⊥`.
    Second1,
    /// Mean curvature, multiplies `α_zz`.
    Second2,
    /// Curvature anisotropy, multiplies `α_xx - α_yy`.
    Second3,
    /// Gradient of mean curvature, multiplies `α_zi`.
    Third,
    Fourth1,
    Fourth2,
    Fourth3,
    Fourth4,
    Fourth5,
}

impl Term {
    pub const ALL: [Term; 11] = [
        Term::Zeroth1,
        Term::Zeroth2,
        Term::Second1,
        Term::Second2,
        Term::Second3,
        Term::Third,
        Term::Fourth1,
        Term::Fourth2,
        Term::Fourth3,
        Term::Fourth4,
        Term::Fourth5,
    ];

    /// Derivative order `p`.
    pub fn order(self) -> u8 {
        match self {
            Term::Zeroth1 | Term::Zeroth2 => 0,
            Term::Second1 | Term::Second2 | Term::Second3 => 2,
            Term::Third => 3,
            _ => 4,
        }
    }

    /// Branch `q`; the single third-order term reports 1.
    pub fn branch(self) -> u8 {
        match self {
            Term::Zeroth1 | Term::Second1 | Term::Third | Term::Fourth1 => 1,
            Term::Zeroth2 | Term::Second2 | Term::Fourth2 => 2,
            Term::Second3 | Term::Fourth3 => 3,
            Term::Fourth4 => 4,
            Term::Fourth5 => 5,
        }
    }

    /// Look up a term by `(p, q)`. For `p = 3`, `q` may be omitted, 0 or 1.
    pub fn from_order_branch(order: u8, branch: Option<u8>) -> Result<Term> {
        let t = match (order, branch) {
            (0, Some(1)) => Term::Zeroth1,
            (0, Some(2)) => Term::Zeroth2,
            (2, Some(1)) => Term::Second1,
            (2, Some(2)) => Term::Second2,
            (2, Some(3)) => Term::Second3,
            (3, None | Some(0) | Some(1)) => Term::Third,
            (4, Some(1)) => Term::Fourth1,
            (4, Some(2)) => Term::Fourth2,
            (4, Some(3)) => Term::Fourth3,
            (4, Some(4)) => Term::Fourth4,
            (4, Some(5)) => Term::Fourth5,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "no coefficient with p = {order}, q = {}",
                    branch.map_or("-".to_string(), |q| q.to_string())
                )))
            }
        };
        Ok(t)
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// A valid `(P, p, q)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BetaIndex {
    pub polarization: Polarization,
    pub term: Term,
}

impl BetaIndex {
    pub const fn new(polarization: Polarization, term: Term) -> Self {
        Self { polarization, term }
    }

    pub fn from_numbers(polarization: Polarization, order: u8, branch: Option<u8>) -> Result<Self> {
        Ok(Self::new(
            polarization,
            Term::from_order_branch(order, branch)?,
        ))
    }

    /// All 22 indices, electric first, in table order.
    pub fn all() -> impl Iterator<Item = BetaIndex> {
        Polarization::ALL
            .into_iter()
            .flat_map(|p| Term::ALL.into_iter().map(move |t| BetaIndex::new(p, t)))
    }

    fn slot(self) -> usize {
        let base = match self.polarization {
            Polarization::E => 0,
            Polarization::M => Term::ALL.len(),
        };
        base + self.term.slot()
    }
}

impl fmt::Display for BetaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.term == Term::Third {
            write!(f, "beta({})_{}", self.term.order(), self.polarization)
        } else {
            write!(
                f,
                "beta({})_{}|{}",
                self.term.order(),
                self.polarization,
                self.term.branch()
            )
        }
    }
}

/// One coefficient function with its exact polynomial parts.
#[derive(Debug, Clone)]
pub struct BetaCoefficient {
    exp_poly: Vec<Rational>,
    ei_poly: Vec<Rational>,
    exp_f64: Vec<f64>,
    ei_f64: Vec<f64>,
    integral: Rational,
}

impl BetaCoefficient {
    fn new(exp_poly: Vec<Rational>, ei_poly: Vec<Rational>) -> Self {
        let to_f64 = |v: &[Rational]| v.iter().map(rational_to_f64).collect::<Vec<_>>();
        let integral = exact_integral(&exp_poly, &ei_poly);
        Self {
            exp_f64: to_f64(&exp_poly),
            ei_f64: to_f64(&ei_poly),
            exp_poly,
            ei_poly,
            integral,
        }
    }

    /// Coefficients of the `e^{-2ξ}` polynomial, lowest degree first.
    pub fn exp_poly(&self) -> &[Rational] {
        &self.exp_poly
    }

    /// Coefficients of the `Ei(2ξ)` polynomial, lowest degree first.
    pub fn ei_poly(&self) -> &[Rational] {
        &self.ei_poly
    }

    /// Exact value at `ξ = 0`.
    pub fn at_zero(&self) -> Rational {
        self.exp_poly.first().copied().unwrap_or_default()
    }

    /// Exact `∫₀^∞ β(ξ) dξ`.
    pub fn integral_exact(&self) -> Rational {
        self.integral
    }

    fn eval_with(&self, xi: f64, exp_m2xi: f64, ei_2xi: f64) -> f64 {
        if xi == 0.0 {
            return self.exp_f64.first().copied().unwrap_or(0.0);
        }
        let mut v = horner(&self.exp_f64, xi) * exp_m2xi;
        if !self.ei_f64.is_empty() {
            v += horner(&self.ei_f64, xi) * ei_2xi;
        }
        v
    }

    /// Evaluate at `ξ ≥ 0`.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        check_xi(xi)?;
        if xi == 0.0 {
            return Ok(self.eval_with(0.0, 1.0, 0.0));
        }
        Ok(self.eval_with(xi, (-2.0 * xi).exp(), paper_ei(2.0 * xi)?))
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if xi >= 0.0 && xi.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "beta requires finite xi >= 0, got {xi}"
        )))
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// `∫ξⁿe^{-2ξ}dξ = n!/2^{n+1}` and `∫ξⁿEi(2ξ)dξ = -n!/((n+1)·2^{n+1})`.
fn exact_integral(exp_poly: &[Rational], ei_poly: &[Rational]) -> Rational {
    let exp_part = exp_poly
        .iter()
        .enumerate()
        .fold(Rational::from(0), |acc, (n, &c)| {
            acc + c * Rational::new(factorial(n), 1 << (n + 1))
        });
    let ei_part = ei_poly
        .iter()
        .enumerate()
        .fold(Rational::from(0), |acc, (n, &c)| {
            acc - c * Rational::new(factorial(n), (n as i64 + 1) << (n + 1))
        });
    exp_part + ei_part
}

/// `prefactor · ξ^shift · Σ inner[k] ξ^k`, expanded.
fn factored(prefactor: (i64, i64), shift: usize, inner: &[(i64, i64)]) -> Vec<Rational> {
    let pre = Rational::new(prefactor.0, prefactor.1);
    let mut out = vec![Rational::from(0); shift];
    out.extend(inner.iter().map(|&(n, d)| pre * Rational::new(n, d)));
    while out.last().is_some_and(|c| *c == Rational::from(0)) {
        out.pop();
    }
    out
}

fn ints(v: &[i64]) -> Vec<(i64, i64)> {
    v.iter().map(|&n| (n, 1)).collect()
}

/// Prefactor, power shift and inner polynomial of the `Ei` part.
type EiPart<'a> = ((i64, i64), usize, &'a [(i64, i64)]);

fn row(exp: ((i64, i64), &[i64]), ei: Option<EiPart<'_>>) -> BetaCoefficient {
    let exp_poly = factored(exp.0, 0, &ints(exp.1));
    let ei_poly = ei.map_or_else(Vec::new, |(pre, shift, inner)| factored(pre, shift, inner));
    BetaCoefficient::new(exp_poly, ei_poly)
}

fn build_table() -> Vec<BetaCoefficient> {
    vec![
        // electric
        row(((1, 8), &[1, 2, 4]), None),
        row(((1, 4), &[1, 2]), None),
        row(((-1, 32), &[3, 6, 6, 4]), Some(((-1, 4), 4, &[(1, 1)]))),
        row(
            ((-1, 16), &[1, 2, -2, 4]),
            Some(((1, 1), 2, &[(1, 1), (0, 1), (-1, 2)])),
        ),
        row(((-1, 32), &[3, 6, 2, -4]), Some(((1, 4), 4, &[(1, 1)]))),
        row(
            ((1, 32), &[1, 2, -2, 4]),
            Some(((-1, 4), 2, &[(2, 1), (0, 1), (-1, 1)])),
        ),
        row(
            ((1, 384), &[3, 6, 15, 22, 2, -4]),
            Some(((1, 48), 4, &[(6, 1), (0, 1), (-1, 1)])),
        ),
        row(
            ((-1, 960), &[15, 542, 259, -546, -14, 28]),
            Some(((-2, 1), 2, &[(1, 1), (0, 1), (-7, 12), (0, 1), (7, 240)])),
        ),
        row(
            ((1, 192), &[15, 30, -9, 70, 2, -4]),
            Some(((1, 24), 4, &[(18, 1), (0, 1), (-1, 1)])),
        ),
        row(
            ((1, 480), &[45, 218, -59, 146, 14, -28]),
            Some(((1, 60), 4, &[(40, 1), (0, 1), (-7, 1)])),
        ),
        row(
            ((1, 96), &[9, 18, -27, 50, -2, 4]),
            Some(((1, 1), 4, &[(1, 1), (0, 1), (1, 12)])),
        ),
        // magnetic
        row(((-1, 8), &[1, 2, 4]), None),
        row(((-1, 4), &[1, 2]), None),
        row(
            ((1, 32), &[5, 10, 10, -4]),
            Some(((1, 2), 2, &[(1, 1), (0, 1), (-1, 2)])),
        ),
        row(((1, 16), &[3, 6, 2, -4]), Some(((-1, 2), 4, &[(1, 1)]))),
        row(
            ((1, 32), &[1, 2, -2, 4]),
            Some(((3, 2), 2, &[(1, 1), (0, 1), (1, 6)])),
        ),
        row(
            ((1, 32), &[5, 10, -2, 4]),
            Some(((1, 4), 2, &[(4, 1), (0, 1), (1, 1)])),
        ),
        row(
            ((-1, 960), &[165, -438, 339, -466, -14, 28]),
            Some(((1, 2), 2, &[(1, 1), (0, 1), (2, 1), (0, 1), (-7, 60)])),
        ),
        row(
            ((-1, 192), &[15, 30, 9, -22, -2, 4]),
            Some(((1, 4), 4, &[(1, 1), (0, 1), (-1, 6)])),
        ),
        row(
            ((-1, 960), &[105, 722, 139, -66, -14, 28]),
            Some(((-3, 2), 2, &[(1, 1), (0, 1), (-1, 9), (0, 1), (7, 180)])),
        ),
        row(
            ((-1, 96), &[3, 6, 33, -70, -2, 4]),
            Some(((3, 2), 4, &[(1, 1), (0, 1), (-1, 18)])),
        ),
        row(
            ((-1, 480), &[15, 158, 121, -214, 14, -28]),
            Some(((-5, 2), 2, &[(1, 1), (0, 1), (-1, 3), (0, 1), (-7, 150)])),
        ),
    ]
}

fn table() -> &'static [BetaCoefficient] {
    static TABLE: OnceLock<Vec<BetaCoefficient>> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

/// The stored coefficient for `index`.
pub fn coefficient(index: BetaIndex) -> &'static BetaCoefficient {
    &table()[index.slot()]
}

/// `β(ξ)` for one index.
pub fn beta(index: BetaIndex, xi: f64) -> Result<f64> {
    coefficient(index).eval(xi)
}

/// `∫₀^∞ β(ξ) dξ`, from the exact moments.
pub fn beta_integral(index: BetaIndex) -> f64 {
    rational_to_f64(&coefficient(index).integral_exact())
}

/// All eleven coefficients of one polarization at a common `ξ`, sharing
/// the exponential and exponential-integral evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSet([f64; 11]);

impl BetaSet {
    pub fn at(polarization: Polarization, xi: f64) -> Result<Self> {
        check_xi(xi)?;
        let (e, ei) = if xi == 0.0 {
            (1.0, 0.0)
        } else {
            ((-2.0 * xi).exp(), paper_ei(2.0 * xi)?)
        };
        let mut out = [0.0; 11];
        for (slot, term) in Term::ALL.into_iter().enumerate() {
            out[slot] = coefficient(BetaIndex::new(polarization, term)).eval_with(xi, e, ei);
        }
        Ok(Self(out))
    }

    /// ξ-integrals of all eleven coefficients.
    pub fn integrals(polarization: Polarization) -> Self {
        let mut out = [0.0; 11];
        for (slot, term) in Term::ALL.into_iter().enumerate() {
            out[slot] = beta_integral(BetaIndex::new(polarization, term));
        }
        Self(out)
    }

    pub fn get(&self, term: Term) -> f64 {
        self.0[term.slot()]
    }
}
