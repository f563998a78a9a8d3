//! Casimir–Polder interaction of anisotropic dipolar nanoparticles with
//! gently curved, perfectly reflecting surfaces.
//!
//! The potential is expanded in derivatives of the surface profile up to
//! second order in `d/R`, where `d` is the particle–surface separation and
//! `R1`, `R2` are the principal radii of curvature at the closest point.
//! For an axially symmetric particle it takes the form
//!
//! ```text
//! U = -s [A + B cos2θ + C (d/R1 - d/R2) cos2φ sin²θ]
//! ```
//!
//! with `s = k_B T V/d³` (finite temperature) or `ħ c V/d⁴` (zero
//! temperature), and the stable orientation of the symmetry axis is always
//! one of the surface-frame axes.
//!
//! ```
//! use cpcurve::{
//!     potential, MaterialModel, Orientation, Spheroid, SpheroidGeometry, SurfacePatch,
//!     ThermalState, Tolerances,
//! };
//!
//! let needle = Spheroid::new(
//!     SpheroidGeometry::from_depolarization(0.2, 1e-24).unwrap(),
//!     MaterialModel::PerfectConductor,
//! );
//! let patch = SurfacePatch::from_ratios(1e-6, 0.05, 0.05).unwrap();
//! let u = potential(
//!     &needle,
//!     &patch,
//!     &Orientation::Z_AXIS,
//!     ThermalState::ZERO,
//!     &Tolerances::default(),
//! )
//! .unwrap();
//! assert!(u.u_reduced < 0.0);
//! ```

pub mod beta;
pub mod constants;
mod error;
pub mod particle;
pub mod potential;
pub mod quadrature;
pub mod special;
pub mod stability;

pub use beta::{beta, beta_integral, BetaIndex, Polarization, Term};
pub use error::{Error, Result};
pub use particle::{
    angular_combos, depolarizing_factors, permittivity, principal_polarizabilities, rotate_tensor,
    AxialTensor, MaterialModel, Orientation, PrincipalPolarizabilities, Spheroid, SpheroidGeometry,
};
pub use potential::{
    coefficients, gold_closed_form_reduced, gold_closed_form_t0, matsubara_xi, potential,
    si_energy, summand, PotentialBreakdown, PotentialCoefficients, SurfacePatch, ThermalState,
    Tolerances, ValidityWarning,
};
pub use special::{e1, paper_ei};
pub use stability::{
    classify, scan, stable_orientation, AxisSpec, GridSpec, ScanBase, ScanVariable, StabilityGrid,
    StableAxis,
};
