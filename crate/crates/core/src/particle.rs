//! Spheroidal particles: depolarizing factors, material response on the
//! imaginary frequency axis, principal polarizabilities and their rotation
//! into the surface frame.
//!
//! Polarizabilities carry units of volume (Gaussian convention, `V/4π`
//! prefactor). The particle frame has its third axis along the symmetry
//! axis; the surface frame has `x`, `y` along the principal curvature
//! directions and `z` along the surface normal.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Squared eccentricity below which the depolarizing factor is taken from
/// its Taylor series around the sphere.
const SPHERE_SERIES_LIMIT: f64 = 0.05;

/// Depolarizing factors `(n1, n2, n3)` of a spheroid with equatorial
/// semi-axis `r` and polar length `l` (semi-axis `l/2`).
pub fn depolarizing_factors(r: f64, l: f64) -> Result<(f64, f64, f64)> {
    if !(r > 0.0 && l > 0.0 && r.is_finite() && l.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "spheroid dimensions must be positive, got R = {r}, L = {l}"
        )));
    }
    let ratio = 2.0 * r / l;
    // squared eccentricity; negative for oblate shapes
    let s = 1.0 - ratio * ratio;
    let n3 = if s.abs() < SPHERE_SERIES_LIMIT {
        // (1 - s) Σ s^k / (2k + 3)
        let mut sum = 0.0;
        let mut pow = 1.0;
        for k in 0..60 {
            let term = pow / (2 * k + 3) as f64;
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
            pow *= s;
        }
        (1.0 - s) * sum
    } else if s > 0.0 {
        let e = s.sqrt();
        (1.0 - s) / (e * e * e) * (e.atanh() - e)
    } else {
        let eb = (-s).sqrt();
        (1.0 + eb * eb) / (eb * eb * eb) * (eb - eb.atan())
    };
    let n1 = 0.5 * (1.0 - n3);
    Ok((n1, n1, n3))
}

/// Shape of a spheroid: axial depolarizing factor and volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpheroidGeometry {
    n3: f64,
    volume: f64,
}

impl SpheroidGeometry {
    pub fn from_depolarization(n3: f64, volume: f64) -> Result<Self> {
        if !(n3 > 0.0 && n3 < 1.0) {
            return Err(Error::InvalidInput(format!(
                "depolarizing factor must lie in (0, 1), got {n3}"
            )));
        }
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "volume must be positive, got {volume}"
            )));
        }
        Ok(Self { n3, volume })
    }

    /// Equatorial semi-axis `r`, polar length `l`.
    pub fn from_axes(r: f64, l: f64) -> Result<Self> {
        let (_, _, n3) = depolarizing_factors(r, l)?;
        Self::from_depolarization(n3, 4.0 * PI * r * r * (0.5 * l) / 3.0)
    }

    /// A sphere of radius `radius`.
    pub fn sphere(radius: f64) -> Result<Self> {
        Self::from_depolarization(1.0 / 3.0, 4.0 * PI * radius.powi(3) / 3.0)
    }

    pub fn n3(&self) -> f64 {
        self.n3
    }

    /// Equatorial factor `n1 = n2`.
    pub fn n1(&self) -> f64 {
        0.5 * (1.0 - self.n3)
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn is_prolate(&self) -> bool {
        self.n3 < 1.0 / 3.0
    }

    pub fn is_oblate(&self) -> bool {
        self.n3 > 1.0 / 3.0
    }
}

/// Material response of the particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaterialModel {
    /// `ε → ∞`, `μ = 0`; frequency independent.
    PerfectConductor,
    /// Two Lorentz oscillators on the imaginary axis. Frequencies in rad/s.
    TwoOscillator {
        c_uv: f64,
        c_ir: f64,
        omega_uv: f64,
        omega_ir: f64,
    },
}

impl MaterialModel {
    /// Vitreous silica fit (Hough & White parameters).
    pub const SIO2: MaterialModel = MaterialModel::TwoOscillator {
        c_uv: 1.098,
        c_ir: 1.703,
        omega_uv: 2.033e16,
        omega_ir: 1.88e14,
    };

    pub const PRESETS: [&'static str; 2] = ["gold-PC", "SiO2-hough"];

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "gold-PC" => Ok(MaterialModel::PerfectConductor),
            "SiO2-hough" => Ok(Self::SIO2),
            other => Err(Error::InvalidInput(format!(
                "unknown material preset {other:?}; expected one of {:?}",
                Self::PRESETS
            ))),
        }
    }

    pub fn two_oscillator(c_uv: f64, c_ir: f64, omega_uv: f64, omega_ir: f64) -> Result<Self> {
        let all_positive = [c_uv, c_ir, omega_uv, omega_ir]
            .iter()
            .all(|v| *v >= 0.0 && v.is_finite());
        if !all_positive || omega_uv == 0.0 || omega_ir == 0.0 {
            return Err(Error::InvalidInput(
                "oscillator strengths must be non-negative and frequencies positive".into(),
            ));
        }
        Ok(MaterialModel::TwoOscillator {
            c_uv,
            c_ir,
            omega_uv,
            omega_ir,
        })
    }

    pub fn is_frequency_independent(&self) -> bool {
        matches!(self, MaterialModel::PerfectConductor)
    }
}

/// `ε(iω)` of a dielectric model.
pub fn permittivity(material: &MaterialModel, omega: f64) -> Result<f64> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!(
            "imaginary frequency must be non-negative, got {omega}"
        )));
    }
    match *material {
        MaterialModel::PerfectConductor => Err(Error::InvalidInput(
            "a perfect conductor has no finite permittivity".into(),
        )),
        MaterialModel::TwoOscillator {
            c_uv,
            c_ir,
            omega_uv,
            omega_ir,
        } => {
            let w2 = omega * omega;
            let uv = omega_uv * omega_uv;
            let ir = omega_ir * omega_ir;
            Ok(1.0 + c_uv * uv / (w2 + uv) + c_ir * ir / (w2 + ir))
        }
    }
}

/// Principal values of an axially symmetric tensor: `perp = α̃11 + α̃22`
/// and `axial = α̃33`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxialTensor {
    pub perp: f64,
    pub axial: f64,
}

impl AxialTensor {
    /// `σ = 2α̃33 − α̃⊥`; zero for a sphere.
    pub fn sigma(&self) -> f64 {
        2.0 * self.axial - self.perp
    }

    pub fn trace(&self) -> f64 {
        self.perp + self.axial
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PrincipalPolarizabilities {
    pub electric: AxialTensor,
    pub magnetic: AxialTensor,
}

/// A spheroid made of a given material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spheroid {
    pub geometry: SpheroidGeometry,
    pub material: MaterialModel,
}

impl Spheroid {
    pub fn new(geometry: SpheroidGeometry, material: MaterialModel) -> Self {
        Self { geometry, material }
    }

    pub fn volume(&self) -> f64 {
        self.geometry.volume()
    }

    /// Principal polarizabilities at imaginary frequency `omega` (rad/s).
    pub fn principal_polarizabilities(&self, omega: f64) -> Result<PrincipalPolarizabilities> {
        principal_polarizabilities(&self.geometry, &self.material, omega)
    }
}

pub fn principal_polarizabilities(
    geom: &SpheroidGeometry,
    material: &MaterialModel,
    omega: f64,
) -> Result<PrincipalPolarizabilities> {
    let pre = geom.volume() / (4.0 * PI);
    let (n1, n3) = (geom.n1(), geom.n3());
    match material {
        MaterialModel::PerfectConductor => {
            let e = |n: f64| pre / n;
            let m = |n: f64| -pre / (1.0 - n);
            Ok(PrincipalPolarizabilities {
                electric: AxialTensor {
                    perp: 2.0 * e(n1),
                    axial: e(n3),
                },
                magnetic: AxialTensor {
                    perp: 2.0 * m(n1),
                    axial: m(n3),
                },
            })
        }
        MaterialModel::TwoOscillator { .. } => {
            let eps = permittivity(material, omega)?;
            let chi = eps - 1.0;
            let e = |n: f64| pre * chi / (1.0 + chi * n);
            Ok(PrincipalPolarizabilities {
                electric: AxialTensor {
                    perp: 2.0 * e(n1),
                    axial: e(n3),
                },
                magnetic: AxialTensor::default(),
            })
        }
    }
}

/// Direction of the particle's symmetry axis in the surface frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub theta: f64,
    pub phi: f64,
}

impl Orientation {
    pub const X_AXIS: Orientation = Orientation {
        theta: FRAC_PI_2,
        phi: 0.0,
    };
    pub const Y_AXIS: Orientation = Orientation {
        theta: FRAC_PI_2,
        phi: FRAC_PI_2,
    };
    pub const Z_AXIS: Orientation = Orientation {
        theta: 0.0,
        phi: 0.0,
    };

    /// `theta ∈ [0, π]`, `phi ∈ [0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..TAU).contains(&phi) {
            return Err(Error::InvalidInput(format!(
                "orientation out of range: theta = {theta}, phi = {phi}"
            )));
        }
        Ok(Self { theta, phi })
    }

    /// Accepts any finite `phi` and wraps it into `[0, 2π)`.
    pub fn wrapped(theta: f64, phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "phi must be finite, got {phi}"
            )));
        }
        let p = phi.rem_euclid(TAU);
        Self::new(theta, if p >= TAU { 0.0 } else { p })
    }

    pub fn from_degrees(theta: f64, phi: f64) -> Result<Self> {
        Self::wrapped(theta.to_radians(), phi.to_radians())
    }

    /// Unit vector along the symmetry axis.
    pub fn axis(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

pub type Matrix3 = [[f64; 3]; 3];

fn matmul(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn transpose(a: &Matrix3) -> Matrix3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Rotation taking the particle frame `(1, 2, 3)` to the surface frame.
pub fn rotation_matrix(o: &Orientation) -> Matrix3 {
    let (st, ct) = o.theta.sin_cos();
    let (sp, cp) = o.phi.sin_cos();
    let rz = [[cp, -sp, 0.0], [sp, cp, 0.0], [0.0, 0.0, 1.0]];
    let ry = [[ct, 0.0, st], [0.0, 1.0, 0.0], [-st, 0.0, ct]];
    matmul(&rz, &ry)
}

/// Full tensor in the surface frame.
pub fn rotate_tensor(t: &AxialTensor, o: &Orientation) -> Matrix3 {
    let half = 0.5 * t.perp;
    let principal = [[half, 0.0, 0.0], [0.0, half, 0.0], [0.0, 0.0, t.axial]];
    let q = rotation_matrix(o);
    matmul(&matmul(&q, &principal), &transpose(&q))
}

/// The tensor combinations that enter the potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularCombos {
    /// `α_xx + α_yy`
    pub perp: f64,
    pub zz: f64,
    pub xx_minus_yy: f64,
    pub zx: f64,
    pub zy: f64,
}

pub fn angular_combos(t: &AxialTensor, o: &Orientation) -> AngularCombos {
    let sigma = t.sigma();
    let c2t = (2.0 * o.theta).cos();
    let st = o.theta.sin();
    let ct = o.theta.cos();
    let (sp, cp) = o.phi.sin_cos();
    AngularCombos {
        perp: 0.25 * (3.0 * t.perp + 2.0 * t.axial - sigma * c2t),
        zz: 0.25 * (t.perp + 2.0 * t.axial + sigma * c2t),
        xx_minus_yy: 0.5 * sigma * (2.0 * o.phi).cos() * st * st,
        zx: 0.5 * sigma * st * ct * cp,
        zy: 0.5 * sigma * st * ct * sp,
    }
}
