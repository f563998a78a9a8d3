//! Run configuration: a JSON document whose fields may be overridden by
//! command-line flags. Lengths are in micrometres, angles in degrees and
//! temperatures in kelvin.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use cpcurve::constants::MICROMETRE;
use cpcurve::{
    AxisSpec, GridSpec, MaterialModel, Orientation, ScanBase, ScanVariable, Spheroid,
    SpheroidGeometry, SurfacePatch, ThermalState, Tolerances,
};
use serde::{Deserialize, Serialize};

/// Volume used when only `n3` is given: a sphere of radius 10 nm.
pub const DEFAULT_VOLUME_UM3: f64 = 4.0 * PI * 1e-6 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Beta,
    Potential,
    Scan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialConfig {
    Preset(String),
    Oscillators {
        c_uv: f64,
        c_ir: f64,
        omega_uv: f64,
        omega_ir: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParticleConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_um3: Option<f64>,
    /// Equatorial semi-axis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semi_axis_um: Option<f64>,
    /// Full polar length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatchConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_um: Option<f64>,
    /// Signed; omitted means flat.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r1_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r2_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub third_derivative: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrientationConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_deg: Option<f64>,
}

/// One grid axis; `distance` values are in micrometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub variable: ScanVariable,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl std::str::FromStr for AxisConfig {
    type Err = anyhow::Error;

    /// `variable:min:max:count`, e.g. `d_over_r1:-0.2:0.2:100`.
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [var, min, max, count] = parts.as_slice() else {
            bail!("axis must look like variable:min:max:count, got {s:?}");
        };
        let variable = serde_json::from_value(serde_json::Value::String(var.to_string()))
            .map_err(|_| {
                anyhow!("unknown axis variable {var:?}; use d_over_r1, r1_over_r2, distance or temperature")
            })?;
        Ok(Self {
            variable,
            min: min.parse().context("axis min")?,
            max: max.parse().context("axis max")?,
            count: count.parse().context("axis count")?,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis1: Option<AxisConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis2: Option<AxisConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matsubara_rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validity_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BetaConfig {
    /// `E` or `M`; omitted with `all` selects both.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polarization: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all: Option<bool>,
    /// Explicit sample points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_count: Option<usize>,
}

/// Everything a run needs. Every field is optional so that a file and a
/// set of flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,
    pub particle: ParticleConfig,
    pub patch: PatchConfig,
    pub orientation: OrientationConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
    pub grid: GridConfig,
    pub beta: BetaConfig,
    pub output: OutputConfig,
    pub tolerances: ToleranceConfig,
}

pub fn layer<T: Clone>(base: &mut Option<T>, top: &Option<T>) {
    if top.is_some() {
        base.clone_from(top);
    }
}

impl RunConfig {
    /// Load a configuration file. A JSON document produced by `scan` (which
    /// embeds its configuration under `"config"`) is accepted as well.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let value = match value {
            serde_json::Value::Object(mut map)
                if map.contains_key("config") && map.contains_key("schema") =>
            {
                map.remove("config").unwrap_or_default()
            }
            other => other,
        };
        serde_json::from_value(value).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(&mut self, top: &RunConfig) {
        layer(&mut self.command, &top.command);
        let (p, q) = (&mut self.particle, &top.particle);
        layer(&mut p.n3, &q.n3);
        layer(&mut p.volume_um3, &q.volume_um3);
        layer(&mut p.semi_axis_um, &q.semi_axis_um);
        layer(&mut p.length_um, &q.length_um);
        layer(&mut p.material, &q.material);
        let (p, q) = (&mut self.patch, &top.patch);
        layer(&mut p.d_um, &q.d_um);
        layer(&mut p.r1_um, &q.r1_um);
        layer(&mut p.r2_um, &q.r2_um);
        layer(&mut p.third_derivative, &q.third_derivative);
        layer(&mut self.orientation.theta_deg, &top.orientation.theta_deg);
        layer(&mut self.orientation.phi_deg, &top.orientation.phi_deg);
        layer(&mut self.temperature_k, &top.temperature_k);
        layer(&mut self.grid.axis1, &top.grid.axis1);
        layer(&mut self.grid.axis2, &top.grid.axis2);
        let (b, t) = (&mut self.beta, &top.beta);
        layer(&mut b.polarization, &t.polarization);
        layer(&mut b.order, &t.order);
        layer(&mut b.branch, &t.branch);
        layer(&mut b.all, &t.all);
        layer(&mut b.xi, &t.xi);
        layer(&mut b.xi_min, &t.xi_min);
        layer(&mut b.xi_max, &t.xi_max);
        layer(&mut b.xi_count, &t.xi_count);
        layer(&mut self.output.path, &top.output.path);
        layer(&mut self.output.format, &top.output.format);
        let (a, t) = (&mut self.tolerances, &top.tolerances);
        layer(&mut a.matsubara_rel_tol, &t.matsubara_rel_tol);
        layer(&mut a.quad_tol, &t.quad_tol);
        layer(&mut a.validity_threshold, &t.validity_threshold);
    }

    /// The parts of the configuration that determine numerical results.
    pub fn physics_echo(&self) -> RunConfig {
        RunConfig {
            output: OutputConfig::default(),
            ..self.clone()
        }
    }

    pub fn particle(&self) -> anyhow::Result<Spheroid> {
        let p = &self.particle;
        let material = match &p.material {
            None => bail!("particle.material is required (\"gold-PC\", \"SiO2-hough\" or oscillator parameters)"),
            Some(MaterialConfig::Preset(name)) => MaterialModel::preset(name)?,
            Some(MaterialConfig::Oscillators {
                c_uv,
                c_ir,
                omega_uv,
                omega_ir,
            }) => MaterialModel::two_oscillator(*c_uv, *c_ir, *omega_uv, *omega_ir)?,
        };
        let um3 = MICROMETRE.powi(3);
        let geometry = match (p.n3, p.semi_axis_um, p.length_um) {
            (Some(n3), None, None) => SpheroidGeometry::from_depolarization(
                n3,
                p.volume_um3.unwrap_or(DEFAULT_VOLUME_UM3) * um3,
            )?,
            (None, Some(r), Some(l)) => {
                if p.volume_um3.is_some() {
                    bail!("particle.volume_um3 cannot be combined with semi_axis_um/length_um");
                }
                SpheroidGeometry::from_axes(r * MICROMETRE, l * MICROMETRE)?
            }
            _ => bail!(
                "give either particle.n3 or both particle.semi_axis_um and particle.length_um"
            ),
        };
        Ok(Spheroid::new(geometry, material))
    }

    pub fn thermal(&self) -> anyhow::Result<ThermalState> {
        let t = self
            .temperature_k
            .ok_or_else(|| anyhow!("temperature_k is required"))?;
        Ok(ThermalState::new(t)?)
    }

    pub fn patch(&self) -> anyhow::Result<SurfacePatch> {
        let p = &self.patch;
        let d = p.d_um.ok_or_else(|| anyhow!("patch.d_um is required"))? * MICROMETRE;
        let inv = |r: Option<f64>| -> anyhow::Result<f64> {
            match r {
                None => Ok(0.0),
                Some(r) if r == 0.0 || !r.is_finite() => {
                    bail!("radii of curvature must be finite and non-zero")
                }
                Some(r) => Ok(1.0 / (r * MICROMETRE)),
            }
        };
        let patch = SurfacePatch::new(d, inv(p.r1_um)?, inv(p.r2_um)?)?;
        Ok(match p.third_derivative {
            Some(g) => patch.with_third_derivative(g)?,
            None => patch,
        })
    }

    pub fn orientation(&self) -> anyhow::Result<Orientation> {
        Ok(Orientation::from_degrees(
            self.orientation.theta_deg.unwrap_or(0.0),
            self.orientation.phi_deg.unwrap_or(0.0),
        )?)
    }

    pub fn tolerances(&self) -> anyhow::Result<Tolerances> {
        let mut t = Tolerances::default();
        let c = &self.tolerances;
        if let Some(v) = c.matsubara_rel_tol {
            t.matsubara_rel_tol = v;
        }
        if let Some(v) = c.quad_tol {
            t.quad_tol = v;
        }
        if let Some(v) = c.validity_threshold {
            t.validity_threshold = v;
        }
        for (name, v) in [
            ("matsubara_rel_tol", t.matsubara_rel_tol),
            ("quad_tol", t.quad_tol),
            ("validity_threshold", t.validity_threshold),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tolerances.{name} must be positive, got {v}");
            }
        }
        Ok(t)
    }

    pub fn grid(&self) -> anyhow::Result<GridSpec> {
        let convert = |a: AxisConfig| {
            let scale = if a.variable == ScanVariable::Distance {
                MICROMETRE
            } else {
                1.0
            };
            AxisSpec::new(a.variable, a.min * scale, a.max * scale, a.count)
        };
        let axis1 = self
            .grid
            .axis1
            .ok_or_else(|| anyhow!("grid.axis1 is required"))?;
        let axis2 = self
            .grid
            .axis2
            .ok_or_else(|| anyhow!("grid.axis2 is required"))?;
        let radius = |r: Option<f64>| -> anyhow::Result<Option<f64>> {
            match r {
                Some(r) if r == 0.0 || !r.is_finite() => {
                    bail!("radii of curvature must be finite and non-zero")
                }
                other => Ok(other.map(|v| v * MICROMETRE)),
            }
        };
        let spec = GridSpec {
            axis1: convert(axis1),
            axis2: convert(axis2),
            base: ScanBase {
                distance: self.patch.d_um.map(|d| d * MICROMETRE),
                r1: radius(self.patch.r1_um)?,
                r2: radius(self.patch.r2_um)?,
                temperature: self.temperature_k.unwrap_or(0.0),
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a: AxisConfig = "d_over_r1:-0.2:0.2:100".parse().unwrap();
        assert_eq!(a.variable, ScanVariable::DOverR1);
        assert_eq!((a.min, a.max, a.count), (-0.2, 0.2, 100));
        assert!("d_over_r1:1:2".parse::<AxisConfig>().is_err());
        assert!("bogus:1:2:3".parse::<AxisConfig>().is_err());
    }

    #[test]
    fn overlay_prefers_top() {
        let mut base: RunConfig = serde_json::from_str(
            r#"{"particle": {"n3": 0.2, "material": "gold-PC"}, "temperature_k": 300}"#,
        )
        .unwrap();
        let top = RunConfig {
            temperature_k: Some(0.0),
            ..Default::default()
        };
        base.overlay(&top);
        assert_eq!(base.temperature_k, Some(0.0));
        assert_eq!(base.particle.n3, Some(0.2));
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"particle": {"radius": 1}}"#).is_err());
    }

    #[test]
    fn oscillator_material() {
        let c: RunConfig = serde_json::from_str(
            r#"{"particle": {"n3": 0.5, "material": {"c_uv": 1.0, "c_ir": 0.5, "omega_uv": 1e16, "omega_ir": 1e14}}}"#,
        )
        .unwrap();
        assert!(!c.particle().unwrap().material.is_frequency_independent());
    }

    #[test]
    fn particle_shape_exclusive() {
        let c: RunConfig = serde_json::from_str(
            r#"{"particle": {"n3": 0.5, "semi_axis_um": 0.01, "length_um": 0.02, "material": "gold-PC"}}"#,
        )
        .unwrap();
        assert!(c.particle().is_err());
    }
}
