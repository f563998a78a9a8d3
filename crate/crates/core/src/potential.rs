//! Curvature expansion of the Casimir–Polder potential of a dipolar
//! particle near a gently curved, perfectly reflecting surface.
//!
//! At temperature `T > 0` the potential is a Matsubara sum over
//! `ξ_n = 2πn k_B T d/(ħc)`, with the static term at half weight:
//!
//! ```text
//! U = -(k_B T V / d³) Σ'_n S(ξ_n)
//! ```
//!
//! and at `T = 0` the sum turns into `U = -(ħ c V / (2π d⁴)) ∫ S(ξ) dξ`.
//! `S` is the per-volume summand. Its orientation dependence is
//!
//! ```text
//! S = a + b cos2θ + c (d/R1 - d/R2) cos2φ sin²θ + e3 sinθ cosθ (G_x cosφ + G_y sinφ)
//! ```
//!
//! so the potential is fixed by the four coefficients `(A, B, C, E3)`
//! obtained by summing (or integrating) `(a, b, c, e3)`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::beta::{BetaSet, Polarization, Term};
use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::particle::{AxialTensor, Orientation, Spheroid};
use crate::quadrature::{integrate_vec, QuadratureOptions};

/// Local description of the surface at the point closest to the particle.
///
/// Curvatures are signed: positive when the surface curves away from the
/// particle, negative when it curves towards it, zero for a flat direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePatch {
    distance: f64,
    inv_r1: f64,
    inv_r2: f64,
    third_derivative: [f64; 2],
}

impl SurfacePatch {
    /// Distance `d` (m) and the two principal curvatures `1/R1`, `1/R2` (1/m).
    pub fn new(distance: f64, inv_r1: f64, inv_r2: f64) -> Result<Self> {
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "separation must be positive, got {distance}"
            )));
        }
        for (i, k) in [inv_r1, inv_r2].into_iter().enumerate() {
            if !k.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "curvature 1/R{} is not finite",
                    i + 1
                )));
            }
            if (distance * k).abs() >= 1.0 {
                return Err(Error::InvalidInput(format!(
                    "|d/R{}| = {} is outside the expansion range (< 1)",
                    i + 1,
                    (distance * k).abs()
                )));
            }
        }
        Ok(Self {
            distance,
            inv_r1,
            inv_r2,
            third_derivative: [0.0; 2],
        })
    }

    pub fn flat(distance: f64) -> Result<Self> {
        Self::new(distance, 0.0, 0.0)
    }

    /// From the dimensionless ratios `d/R1`, `d/R2`.
    pub fn from_ratios(distance: f64, d_over_r1: f64, d_over_r2: f64) -> Result<Self> {
        Self::new(distance, d_over_r1 / distance, d_over_r2 / distance)
    }

    /// Adds the gradient of the mean curvature, `G_i = d²·∂_i∇²H`.
    pub fn with_third_derivative(mut self, g: [f64; 2]) -> Result<Self> {
        if !g.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(
                "third-derivative vector must be finite".into(),
            ));
        }
        self.third_derivative = g;
        Ok(self)
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn inv_r1(&self) -> f64 {
        self.inv_r1
    }

    pub fn inv_r2(&self) -> f64 {
        self.inv_r2
    }

    pub fn d_over_r1(&self) -> f64 {
        self.distance * self.inv_r1
    }

    pub fn d_over_r2(&self) -> f64 {
        self.distance * self.inv_r2
    }

    pub fn third_derivative(&self) -> [f64; 2] {
        self.third_derivative
    }

    pub fn has_third_derivative(&self) -> bool {
        self.third_derivative != [0.0; 2]
    }

    pub fn validity_warnings(&self, threshold: f64) -> Vec<ValidityWarning> {
        [self.d_over_r1(), self.d_over_r2()]
            .into_iter()
            .enumerate()
            .filter(|(_, r)| r.abs() > threshold)
            .map(|(i, ratio)| ValidityWarning {
                direction: i as u8 + 1,
                ratio,
                threshold,
            })
            .collect()
    }
}

/// `|d/R_i|` exceeds the configured threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityWarning {
    pub direction: u8,
    pub ratio: f64,
    pub threshold: f64,
}

impl fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|d/R{}| = {:.3} exceeds {:.3}; curvature expansion may be unreliable",
            self.direction,
            self.ratio.abs(),
            self.threshold
        )
    }
}

/// Temperature in kelvin; exactly zero selects the frequency integral.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ThermalState {
    temperature: f64,
}

impl ThermalState {
    pub const ZERO: ThermalState = ThermalState { temperature: 0.0 };

    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "temperature must be finite and >= 0 K, got {temperature}"
            )));
        }
        Ok(Self { temperature })
    }

    pub fn kelvin(&self) -> f64 {
        self.temperature
    }

    pub fn is_zero(&self) -> bool {
        self.temperature == 0.0
    }
}

/// Numerical controls for the potential evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// A Matsubara term counts as negligible below this fraction of the sum.
    pub matsubara_rel_tol: f64,
    /// Absolute and relative tolerance of the zero-temperature integral.
    pub quad_tol: f64,
    /// `|d/R_i|` above which a validity warning is attached.
    pub validity_threshold: f64,
    /// Upper end of the frequency range; terms beyond it are dropped.
    pub xi_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            matsubara_rel_tol: 1e-12,
            quad_tol: 1e-10,
            validity_threshold: 0.5,
            xi_cap: 60.0,
        }
    }
}

/// `ξ_n = 2πn k_B T d/(ħc)`.
pub fn matsubara_xi(n: u64, thermal: ThermalState, distance: f64) -> Result<f64> {
    if thermal.is_zero() {
        return Err(Error::InvalidInput(
            "Matsubara frequencies are undefined at T = 0".into(),
        ));
    }
    Ok(n as f64 * first_matsubara_xi(thermal.kelvin(), distance))
}

fn first_matsubara_xi(temperature: f64, distance: f64) -> f64 {
    2.0 * PI * BOLTZMANN * temperature * distance / (HBAR * SPEED_OF_LIGHT)
}

/// Angular coefficients of the per-volume summand (or of its sum/integral).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AngularParts {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e3: f64,
}

impl AngularParts {
    fn add_scaled(&mut self, other: &AngularParts, w: f64) {
        self.a += w * other.a;
        self.b += w * other.b;
        self.c += w * other.c;
        self.e3 += w * other.e3;
    }

    fn scaled(mut self, w: f64) -> Self {
        self.a *= w;
        self.b *= w;
        self.c *= w;
        self.e3 *= w;
        self
    }

    fn as_array(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.e3]
    }

    fn from_array(v: [f64; 4]) -> Self {
        Self {
            a: v[0],
            b: v[1],
            c: v[2],
            e3: v[3],
        }
    }

    /// `a + b cos2θ + c (d/R1 − d/R2) cos2φ sin²θ + e3 sinθ cosθ (G·n̂_φ)`.
    pub fn evaluate(&self, patch: &SurfacePatch, o: &Orientation) -> f64 {
        let (st, ct) = o.theta.sin_cos();
        let (sp, cp) = o.phi.sin_cos();
        let aniso = patch.d_over_r1() - patch.d_over_r2();
        let [gx, gy] = patch.third_derivative();
        self.a
            + self.b * (2.0 * o.theta).cos()
            + self.c * aniso * (2.0 * o.phi).cos() * st * st
            + self.e3 * st * ct * (gx * cp + gy * sp)
    }
}

/// Contribution of one polarization channel, given its principal tensor and
/// the eleven coefficient values.
fn channel_parts(t: &AxialTensor, betas: &BetaSet, u: f64, v2: f64) -> AngularParts {
    let sigma = t.sigma();
    let perp0 = 0.25 * (3.0 * t.perp + 2.0 * t.axial);
    let zz0 = 0.25 * (t.perp + 2.0 * t.axial);
    let k_perp = betas.get(Term::Zeroth1)
        + u * betas.get(Term::Second1)
        + u * u * betas.get(Term::Fourth1)
        + v2 * betas.get(Term::Fourth3);
    let k_zz = betas.get(Term::Zeroth2)
        + u * betas.get(Term::Second2)
        + u * u * betas.get(Term::Fourth2)
        + v2 * betas.get(Term::Fourth4);
    AngularParts {
        a: k_perp * perp0 + k_zz * zz0,
        b: 0.25 * sigma * (k_zz - k_perp),
        c: 0.25 * sigma * (betas.get(Term::Second3) + u * betas.get(Term::Fourth5)),
        e3: 0.5 * sigma * betas.get(Term::Third),
    }
}

fn assemble(
    particle: &Spheroid,
    patch: &SurfacePatch,
    omega: f64,
    betas: impl Fn(Polarization) -> Result<BetaSet>,
) -> Result<AngularParts> {
    let pp = particle.principal_polarizabilities(omega)?;
    let a = patch.d_over_r1();
    let b = patch.d_over_r2();
    let (u, v2) = (a + b, a * a + b * b);
    let mut out = channel_parts(&pp.electric, &betas(Polarization::E)?, u, v2);
    if pp.magnetic != AxialTensor::default() {
        let m = channel_parts(&pp.magnetic, &betas(Polarization::M)?, u, v2);
        out.add_scaled(&m, 1.0);
    }
    Ok(out.scaled(1.0 / particle.volume()))
}

/// Angular coefficients of the summand at a single `ξ ≥ 0`.
pub fn summand_parts(particle: &Spheroid, patch: &SurfacePatch, xi: f64) -> Result<AngularParts> {
    let omega = SPEED_OF_LIGHT * xi / patch.distance();
    assemble(particle, patch, omega, |p| BetaSet::at(p, xi))
}

/// The bracketed summand of the expansion at one `ξ`, divided by the
/// particle volume (dimensionless).
pub fn summand(
    particle: &Spheroid,
    patch: &SurfacePatch,
    orientation: &Orientation,
    xi: f64,
) -> Result<f64> {
    Ok(summand_parts(particle, patch, xi)?.evaluate(patch, orientation))
}

/// How the frequency sum or integral was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Evaluation {
    /// Finite temperature, `terms` Matsubara terms including `n = 0`.
    Matsubara { terms: u64, xi1: f64 },
    /// Zero temperature, frequency-independent response: exact moments.
    Moments,
    /// Zero temperature, adaptive quadrature on `[0, xi_cap]`.
    Quadrature { abs_error: f64, evaluations: usize },
}

/// Orientation-independent coefficients of the potential.
///
/// With `s = k_B T V/d³` (T > 0) or `s = ħ c V/d⁴` (T = 0),
/// `U = -s [A + B cos2θ + D cos2φ sin²θ + E3 sinθ cosθ (G·n̂_φ)]`
/// and `D = C (d/R1 − d/R2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e3: f64,
    pub evaluation: Evaluation,
}

impl PotentialCoefficients {
    fn from_parts(parts: AngularParts, patch: &SurfacePatch, evaluation: Evaluation) -> Self {
        Self {
            a: parts.a,
            b: parts.b,
            c: parts.c,
            d: parts.c * (patch.d_over_r1() - patch.d_over_r2()),
            e3: parts.e3,
            evaluation,
        }
    }

    fn parts(&self) -> AngularParts {
        AngularParts {
            a: self.a,
            b: self.b,
            c: self.c,
            e3: self.e3,
        }
    }

    /// Reduced potential at an orientation.
    pub fn reduced(&self, patch: &SurfacePatch, o: &Orientation) -> f64 {
        -self.parts().evaluate(patch, o)
    }
}

/// Potential at one orientation with its angular decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialBreakdown {
    pub coefficients: PotentialCoefficients,
    pub orientation: Orientation,
    /// `U d³/(k_B T V)` at `T > 0`, `U d⁴/(ħ c V)` at `T = 0`.
    pub u_reduced: f64,
    /// Joules.
    pub u_si: f64,
    pub warnings: Vec<ValidityWarning>,
}

impl PotentialBreakdown {
    pub fn a(&self) -> f64 {
        self.coefficients.a
    }
    pub fn b(&self) -> f64 {
        self.coefficients.b
    }
    pub fn c(&self) -> f64 {
        self.coefficients.c
    }
    pub fn d(&self) -> f64 {
        self.coefficients.d
    }
}

/// Angular coefficients `A, B, C, D` of the potential.
pub fn coefficients(
    particle: &Spheroid,
    patch: &SurfacePatch,
    thermal: ThermalState,
    tol: &Tolerances,
) -> Result<PotentialCoefficients> {
    if thermal.is_zero() {
        zero_temperature(particle, patch, tol)
    } else {
        matsubara_sum(particle, patch, thermal, tol)
    }
}

fn matsubara_sum(
    particle: &Spheroid,
    patch: &SurfacePatch,
    thermal: ThermalState,
    tol: &Tolerances,
) -> Result<PotentialCoefficients> {
    const MIN_XI_FOR_STOP: f64 = 5.0;
    const QUIET_TERMS: u32 = 3;

    let xi1 = first_matsubara_xi(thermal.kelvin(), patch.distance());
    let static_parts = summand_parts(particle, patch, 0.0)?;
    let mut acc = static_parts.scaled(0.5);
    let mut terms = 1u64;
    let mut quiet = 0u32;
    let mut n = 1u64;
    loop {
        let xi = n as f64 * xi1;
        if xi > tol.xi_cap {
            break;
        }
        let t = summand_parts(particle, patch, xi)?;
        acc.add_scaled(&t, 1.0);
        terms += 1;

        let scale = acc.a.abs() + acc.b.abs() + acc.c.abs() + acc.e3.abs();
        let small = t
            .as_array()
            .iter()
            .zip(acc.as_array())
            .all(|(ti, ai)| ti.abs() <= tol.matsubara_rel_tol * ai.abs().max(1e-3 * scale));
        quiet = if small { quiet + 1 } else { 0 };
        if xi >= MIN_XI_FOR_STOP && quiet >= QUIET_TERMS {
            break;
        }
        n += 1;
    }
    Ok(PotentialCoefficients::from_parts(
        acc,
        patch,
        Evaluation::Matsubara { terms, xi1 },
    ))
}

fn zero_temperature(
    particle: &Spheroid,
    patch: &SurfacePatch,
    tol: &Tolerances,
) -> Result<PotentialCoefficients> {
    let norm = 1.0 / (2.0 * PI);
    if particle.material.is_frequency_independent() {
        let parts = assemble(particle, patch, 0.0, |p| Ok(BetaSet::integrals(p)))?;
        return Ok(PotentialCoefficients::from_parts(
            parts.scaled(norm),
            patch,
            Evaluation::Moments,
        ));
    }
    let opts = QuadratureOptions {
        abs_tol: tol.quad_tol,
        rel_tol: tol.quad_tol,
        ..QuadratureOptions::default()
    };
    let mut failure = None;
    let res = integrate_vec(
        |xi| match summand_parts(particle, patch, xi) {
            Ok(p) => p.as_array(),
            Err(e) => {
                failure.get_or_insert(e);
                [0.0; 4]
            }
        },
        0.0,
        tol.xi_cap,
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let res = res?;
    let abs_error = res.error.iter().fold(0.0f64, |m, &e| m.max(e)) * norm;
    Ok(PotentialCoefficients::from_parts(
        AngularParts::from_array(res.value).scaled(norm),
        patch,
        Evaluation::Quadrature {
            abs_error,
            evaluations: res.evaluations,
        },
    ))
}

/// Full potential at one orientation.
pub fn potential(
    particle: &Spheroid,
    patch: &SurfacePatch,
    orientation: &Orientation,
    thermal: ThermalState,
    tol: &Tolerances,
) -> Result<PotentialBreakdown> {
    let coefficients = coefficients(particle, patch, thermal, tol)?;
    Ok(breakdown_at(
        coefficients,
        particle,
        patch,
        orientation,
        thermal,
        tol,
    ))
}

/// Evaluate precomputed coefficients at an orientation.
pub fn breakdown_at(
    coefficients: PotentialCoefficients,
    particle: &Spheroid,
    patch: &SurfacePatch,
    orientation: &Orientation,
    thermal: ThermalState,
    tol: &Tolerances,
) -> PotentialBreakdown {
    let u_reduced = coefficients.reduced(patch, orientation);
    PotentialBreakdown {
        coefficients,
        orientation: *orientation,
        u_reduced,
        u_si: si_energy(u_reduced, particle.volume(), patch.distance(), thermal),
        warnings: patch.validity_warnings(tol.validity_threshold),
    }
}

/// Convert a reduced potential to joules: `× k_B T V/d³` or `× ħ c V/d⁴`.
pub fn si_energy(reduced: f64, volume: f64, distance: f64, thermal: ThermalState) -> f64 {
    if thermal.is_zero() {
        reduced * HBAR * SPEED_OF_LIGHT * volume / distance.powi(4)
    } else {
        reduced * BOLTZMANN * thermal.kelvin() * volume / distance.powi(3)
    }
}

/// Closed-form zero-temperature potential of a perfectly conducting
/// spheroid, in units of `ħ c V/d⁴`.
pub fn gold_closed_form_reduced(n3: f64, patch: &SurfacePatch, o: &Orientation) -> Result<f64> {
    if !(n3 > 0.0 && n3 < 1.0) {
        return Err(Error::InvalidInput(format!(
            "n3 must lie in (0, 1), got {n3}"
        )));
    }
    if patch.has_third_derivative() {
        return Err(Error::InvalidInput(
            "the closed form assumes a reflection-symmetric surface (no third derivative)".into(),
        ));
    }
    let a = patch.d_over_r1();
    let b = patch.d_over_r2();
    let n = n3;
    let n2 = n * n;
    let sum = a + b;
    let squares = a * a + b * b;
    let cross = a * b;
    let c2t = (2.0 * o.theta).cos();
    let azim = (2.0 * o.phi).cos() * o.theta.sin().powi(2);

    let isotropic = 1.0 + 9.0 * n - (17.0 + 183.0 * n - 14.0 * n2) / 30.0 * sum
        + (215.0 + 2457.0 * n - 434.0 * n2) / 420.0 * squares
        + (11.0 + 693.0 * n - 266.0 * n2) / 210.0 * cross;
    let polar = (1.0 + 2.0 * n) * sum + (23.0 + 82.0 * n) / 14.0 * squares
        - (25.0 + 38.0 * n) / 7.0 * cross;
    let azimuthal = (b - a) * (6.0 * (1.0 + 2.0 * n) - (27.0 + 62.0 * n) / 7.0 * sum);
    let braces = isotropic + (1.0 - 3.0 * n) / 30.0 * (polar * c2t + azimuthal * azim);
    Ok(-braces / (32.0 * PI * PI * n * (1.0 - n2)))
}

/// Closed-form zero-temperature potential in joules.
pub fn gold_closed_form_t0(
    n3: f64,
    volume: f64,
    patch: &SurfacePatch,
    o: &Orientation,
) -> Result<f64> {
    let reduced = gold_closed_form_reduced(n3, patch, o)?;
    Ok(si_energy(
        reduced,
        volume,
        patch.distance(),
        ThermalState::ZERO,
    ))
}
