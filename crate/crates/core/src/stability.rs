//! Stable orientations and stability diagrams.
//!
//! The angular part of the potential, `A + B cos2θ + D cos2φ sin²θ`, is
//! maximal (the potential minimal) on a coordinate axis:
//! `x` when `D > max(0, 2B)`, `y` when `D < min(0, -2B)`, `z` otherwise.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::particle::{Orientation, Spheroid};
use crate::potential::{
    breakdown_at, coefficients, PotentialBreakdown, PotentialCoefficients, SurfacePatch,
    ThermalState, Tolerances,
};

pub const CSV_SCHEMA: &str = "cpcurve-stability-grid v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StableAxis {
    X,
    Y,
    Z,
}

impl StableAxis {
    pub fn orientation(self) -> Orientation {
        match self {
            StableAxis::X => Orientation::X_AXIS,
            StableAxis::Y => Orientation::Y_AXIS,
            StableAxis::Z => Orientation::Z_AXIS,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StableAxis::X => "x",
            StableAxis::Y => "y",
            StableAxis::Z => "z",
        }
    }
}

impl fmt::Display for StableAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Axis plus whether `(B, D)` sits exactly on a decision boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub axis: StableAxis,
    pub marginal: bool,
}

pub fn classify(b: f64, d: f64) -> StableAxis {
    classify_detailed(b, d).axis
}

pub fn classify_detailed(b: f64, d: f64) -> Classification {
    let upper = 0.0f64.max(2.0 * b);
    let lower = 0.0f64.min(-2.0 * b);
    let axis = if d > upper {
        StableAxis::X
    } else if d < lower {
        StableAxis::Y
    } else {
        StableAxis::Z
    };
    Classification {
        axis,
        marginal: d == upper || d == lower,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableOrientation {
    pub axis: StableAxis,
    pub marginal: bool,
    /// Potential evaluated along the stable axis.
    pub breakdown: PotentialBreakdown,
}

pub fn stable_orientation(
    particle: &Spheroid,
    patch: &SurfacePatch,
    thermal: ThermalState,
    tol: &Tolerances,
) -> Result<StableOrientation> {
    if patch.has_third_derivative() {
        return Err(Error::InvalidInput(
            "orientation classification assumes a reflection-symmetric surface".into(),
        ));
    }
    let coeffs = coefficients(particle, patch, thermal, tol)?;
    let Classification { axis, marginal } = classify_detailed(coeffs.b, coeffs.d);
    Ok(StableOrientation {
        axis,
        marginal,
        breakdown: breakdown_at(coeffs, particle, patch, &axis.orientation(), thermal, tol),
    })
}

/// Quantity varied along a grid axis. Lengths in metres, temperature in K.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanVariable {
    DOverR1,
    R1OverR2,
    Distance,
    Temperature,
}

impl ScanVariable {
    pub fn name(self) -> &'static str {
        match self {
            ScanVariable::DOverR1 => "d_over_r1",
            ScanVariable::R1OverR2 => "r1_over_r2",
            ScanVariable::Distance => "distance_m",
            ScanVariable::Temperature => "temperature_k",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            ScanVariable::DOverR1 | ScanVariable::Distance => 0,
            ScanVariable::R1OverR2 => 1,
            ScanVariable::Temperature => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub variable: ScanVariable,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(variable: ScanVariable, min: f64, max: f64, count: usize) -> Self {
        Self {
            variable,
            min,
            max,
            count,
        }
    }

    /// Evenly spaced samples including both ends; a single sample sits at `min`.
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => {
                let step = (self.max - self.min) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            self.max
                        } else {
                            self.min + i as f64 * step
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Parameters held fixed across the grid.
///
/// `r1`/`r2` are signed radii in metres, `None` meaning a flat direction.
/// When `d/R1` is scanned with `r1` set, `|R1|` stays fixed and
/// `d = |d/R1|·|R1|` with the sign carried by `R1`; with `r1` unset the
/// separation `distance` stays fixed and `R1 = d/(d/R1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanBase {
    pub distance: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axis1: AxisSpec,
    pub axis2: AxisSpec,
    pub base: ScanBase,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let (v1, v2) = (self.axis1.variable, self.axis2.variable);
        if v1 == v2 || (v1.precedence() == 0 && v2.precedence() == 0) {
            return Err(Error::InvalidInput(format!(
                "grid axes {} and {} are not independent",
                v1.name(),
                v2.name()
            )));
        }
        for a in [&self.axis1, &self.axis2] {
            if a.count == 0 || !a.min.is_finite() || !a.max.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "axis {} needs a finite range and at least one sample",
                    a.variable.name()
                )));
            }
        }
        ThermalState::new(self.base.temperature)?;
        Ok(())
    }

    /// Surface patch and temperature of one cell.
    pub fn cell_state(&self, x1: f64, x2: f64) -> Result<(SurfacePatch, ThermalState)> {
        let mut d = self.base.distance;
        let mut r1 = self.base.r1;
        let mut inv_r2 = self.base.r2.map_or(0.0, |r| 1.0 / r);
        let mut temperature = self.base.temperature;

        let mut assignments = [(self.axis1.variable, x1), (self.axis2.variable, x2)];
        assignments.sort_by_key(|(v, _)| v.precedence());
        for (var, x) in assignments {
            match var {
                ScanVariable::Distance => d = Some(x),
                ScanVariable::DOverR1 => match (r1, d) {
                    (Some(r), _) => {
                        if x == 0.0 {
                            return Err(Error::InvalidInput(
                                "d/R1 = 0 is unreachable at fixed |R1|".into(),
                            ));
                        }
                        d = Some(x.abs() * r.abs());
                        r1 = Some(r.abs().copysign(x));
                    }
                    (None, Some(dist)) => r1 = (x != 0.0).then(|| dist / x),
                    (None, None) => {
                        return Err(Error::InvalidInput(
                            "scanning d/R1 needs either a fixed R1 or a fixed distance".into(),
                        ))
                    }
                },
                ScanVariable::R1OverR2 => match r1 {
                    Some(r) => inv_r2 = x / r,
                    None => {
                        return Err(Error::InvalidInput(
                            "R1/R2 is undefined for a flat first direction".into(),
                        ))
                    }
                },
                ScanVariable::Temperature => temperature = x,
            }
        }
        let d = d.ok_or_else(|| Error::InvalidInput("no separation specified".into()))?;
        let patch = SurfacePatch::new(d, r1.map_or(0.0, |r| 1.0 / r), inv_r2)?;
        Ok((patch, ThermalState::new(temperature)?))
    }
}

/// Successful cell evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellValue {
    pub axis: StableAxis,
    pub marginal: bool,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CellValue {
    fn new(c: &PotentialCoefficients) -> Self {
        let cls = classify_detailed(c.b, c.d);
        Self {
            axis: cls.axis,
            marginal: cls.marginal,
            a: c.a,
            b: c.b,
            c: c.c,
            d: c.d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub axis1: f64,
    pub axis2: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub value: Option<CellValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Per-axis cell counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RegionCounts {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub marginal: usize,
    pub failed: usize,
}

impl RegionCounts {
    pub fn total(&self) -> usize {
        self.x + self.y + self.z + self.failed
    }
}

/// Filled diagram. Cells are row-major with `axis1` as the outer index:
/// cell `(i, j)` sits at `i * axis2.count + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityGrid {
    pub schema: String,
    pub spec: GridSpec,
    pub particle: Spheroid,
    pub tolerances: Tolerances,
    pub cells: Vec<GridCell>,
}

impl StabilityGrid {
    pub fn cell(&self, i: usize, j: usize) -> &GridCell {
        &self.cells[i * self.spec.axis2.count + j]
    }

    pub fn counts(&self) -> RegionCounts {
        let mut out = RegionCounts::default();
        for c in &self.cells {
            match &c.value {
                Some(v) => {
                    match v.axis {
                        StableAxis::X => out.x += 1,
                        StableAxis::Y => out.y += 1,
                        StableAxis::Z => out.z += 1,
                    }
                    out.marginal += usize::from(v.marginal);
                }
                None => out.failed += 1,
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let s = &self.spec;
        let g = &self.particle.geometry;
        writeln!(w, "# schema: {}", self.schema)?;
        for (name, a) in [("axis1", &s.axis1), ("axis2", &s.axis2)] {
            writeln!(
                w,
                "# {name}: {} min={:e} max={:e} count={}",
                a.variable.name(),
                a.min,
                a.max,
                a.count
            )?;
        }
        writeln!(
            w,
            "# particle: n3={} volume_m3={:e} material={}",
            g.n3(),
            g.volume(),
            material_label(&self.particle.material)
        )?;
        writeln!(
            w,
            "# fixed: distance_m={} r1_m={} r2_m={} temperature_k={}",
            s.base
                .distance
                .map_or_else(|| "none".to_string(), |x| format!("{x:e}")),
            opt(s.base.r1),
            opt(s.base.r2),
            s.base.temperature
        )?;
        writeln!(w, "axis1,axis2,axis_label,A,B,C,D,marginal")?;
        for c in &self.cells {
            match (&c.value, &c.error) {
                (Some(v), _) => writeln!(
                    w,
                    "{:e},{:e},{},{:e},{:e},{:e},{:e},{}",
                    c.axis1,
                    c.axis2,
                    v.axis,
                    v.a,
                    v.b,
                    v.c,
                    v.d,
                    u8::from(v.marginal)
                )?,
                (None, _) => writeln!(w, "{:e},{:e},-,,,,,", c.axis1, c.axis2)?,
            }
        }
        Ok(())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "inf".to_string(), |x| format!("{x:e}"))
}

fn material_label(m: &crate::particle::MaterialModel) -> String {
    use crate::particle::MaterialModel::*;
    match *m {
        PerfectConductor => "perfect_conductor".to_string(),
        TwoOscillator {
            c_uv,
            c_ir,
            omega_uv,
            omega_ir,
        } => format!(
            "two_oscillator(c_uv={c_uv};c_ir={c_ir};omega_uv={omega_uv:e};omega_ir={omega_ir:e})"
        ),
    }
}

/// Fill a stability diagram. Cells are evaluated in parallel; a failing
/// cell is recorded and the scan continues.
pub fn scan(spec: &GridSpec, particle: &Spheroid, tol: &Tolerances) -> Result<StabilityGrid> {
    spec.validate()?;
    let xs = spec.axis1.values();
    let ys = spec.axis2.values();
    let n2 = ys.len();
    let cells = (0..xs.len() * n2)
        .into_par_iter()
        .map(|k| {
            let (x1, x2) = (xs[k / n2], ys[k % n2]);
            let outcome = spec.cell_state(x1, x2).and_then(|(patch, thermal)| {
                coefficients(particle, &patch, thermal, tol).map(|c| CellValue::new(&c))
            });
            match outcome {
                Ok(v) => GridCell {
                    axis1: x1,
                    axis2: x2,
                    value: Some(v),
                    error: None,
                },
                Err(e) => GridCell {
                    axis1: x1,
                    axis2: x2,
                    value: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(StabilityGrid {
        schema: CSV_SCHEMA.to_string(),
        spec: *spec,
        particle: *particle,
        tolerances: *tol,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particle::{MaterialModel, SpheroidGeometry};

    #[test]
    fn classify_examples() {
        assert_eq!(classify(1.0, 3.0), StableAxis::X);
        assert_eq!(classify(1.0, -3.0), StableAxis::Y);
        assert_eq!(classify(-1.0, 0.0), StableAxis::Z);
    }

    #[test]
    fn ties_resolve_to_z_and_are_marginal() {
        let c = classify_detailed(1.0, 2.0);
        assert_eq!(c.axis, StableAxis::Z);
        assert!(c.marginal);
        let c = classify_detailed(-1.0, 0.0);
        assert!(c.marginal);
        assert!(!classify_detailed(1.0, 0.5).marginal);
    }

    #[test]
    fn axis_values() {
        let a = AxisSpec::new(ScanVariable::DOverR1, -1.0, 1.0, 5);
        assert_eq!(a.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(
            AxisSpec::new(ScanVariable::Distance, 3.0, 9.0, 1).values(),
            vec![3.0]
        );
    }

    #[test]
    fn cell_state_fixed_radius() {
        let spec = GridSpec {
            axis1: AxisSpec::new(ScanVariable::DOverR1, -0.1, 0.1, 3),
            axis2: AxisSpec::new(ScanVariable::R1OverR2, -2.0, 2.0, 3),
            base: ScanBase {
                distance: None,
                r1: Some(20e-6),
                r2: None,
                temperature: 300.0,
            },
        };
        let (p, t) = spec.cell_state(-0.1, 2.0).unwrap();
        assert!((p.distance() - 2e-6).abs() < 1e-18);
        assert!((p.d_over_r1() + 0.1).abs() < 1e-15);
        assert!((p.d_over_r2() + 0.2).abs() < 1e-15);
        assert_eq!(t.kelvin(), 300.0);
        assert!(spec.cell_state(0.0, 1.0).is_err());
    }

    #[test]
    fn cell_state_fixed_distance() {
        let spec = GridSpec {
            axis1: AxisSpec::new(ScanVariable::DOverR1, -0.1, 0.1, 3),
            axis2: AxisSpec::new(ScanVariable::R1OverR2, -2.0, 2.0, 3),
            base: ScanBase {
                distance: Some(1e-6),
                r1: None,
                r2: None,
                temperature: 0.0,
            },
        };
        let (p, _) = spec.cell_state(0.05, -1.0).unwrap();
        assert!((p.d_over_r1() - 0.05).abs() < 1e-15);
        assert!((p.d_over_r2() + 0.05).abs() < 1e-15);
        // d/R1 = 0 leaves R1 infinite, so R1/R2 cannot be applied
        assert!(spec.cell_state(0.0, 1.0).is_err());
    }

    #[test]
    fn rejects_dependent_axes() {
        let spec = GridSpec {
            axis1: AxisSpec::new(ScanVariable::DOverR1, 0.01, 0.1, 3),
            axis2: AxisSpec::new(ScanVariable::Distance, 1e-6, 2e-6, 3),
            base: ScanBase {
                distance: None,
                r1: Some(1e-5),
                r2: None,
                temperature: 0.0,
            },
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn failing_cells_are_recorded() {
        let particle = Spheroid::new(
            SpheroidGeometry::from_depolarization(0.2, 1e-24).unwrap(),
            MaterialModel::PerfectConductor,
        );
        let spec = GridSpec {
            axis1: AxisSpec::new(ScanVariable::DOverR1, -0.1, 0.1, 3),
            axis2: AxisSpec::new(ScanVariable::R1OverR2, 0.5, 2.0, 2),
            base: ScanBase {
                distance: None,
                r1: Some(1e-5),
                r2: None,
                temperature: 0.0,
            },
        };
        let g = scan(&spec, &particle, &Tolerances::default()).unwrap();
        let counts = g.counts();
        assert_eq!(counts.failed, 2);
        assert_eq!(counts.total(), 6);
        assert!(g.cell(1, 0).error.is_some());
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# schema: cpcurve-stability-grid v1"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 7);
    }
}
