//! `cpcurve` command-line front end.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{
    AxisConfig, CommandKind, MaterialConfig, OutputFormat, ParticleConfig, PatchConfig, RunConfig,
    ToleranceConfig,
};
use run::Failure;

/// Thread count for parallel scans; defaults to the number of CPUs.
const THREADS_ENV: &str = "CPCURVE_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "cpcurve",
    version,
    about = "Casimir-Polder potential of spheroidal nanoparticles near curved surfaces"
)]
struct Cli {
    /// JSON run configuration. Flags override its fields. The JSON written by
    /// `scan --format json` is accepted too.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the frequency-domain coefficient functions beta(p)_P|q.
    #[command(alias = "beta-table")]
    Beta(BetaArgs),
    /// Potential, angular coefficients and stable axis at one configuration.
    #[command(allow_negative_numbers = true)]
    Potential(PotentialArgs),
    /// Stability diagram over two parameters.
    #[command(allow_negative_numbers = true)]
    Scan(ScanArgs),
}

#[derive(Args, Debug, Default)]
struct ParticleArgs {
    /// Depolarizing factor along the symmetry axis.
    #[arg(long)]
    n3: Option<f64>,
    /// Particle volume in µm³ (with --n3).
    #[arg(long)]
    volume_um3: Option<f64>,
    /// Equatorial semi-axis in µm.
    #[arg(long)]
    semi_axis_um: Option<f64>,
    /// Full length along the symmetry axis in µm.
    #[arg(long)]
    length_um: Option<f64>,
    /// Material preset: gold-PC or SiO2-hough.
    #[arg(long)]
    material: Option<String>,
    /// Two-oscillator model: ultraviolet strength.
    #[arg(long)]
    c_uv: Option<f64>,
    /// Two-oscillator model: infrared strength.
    #[arg(long)]
    c_ir: Option<f64>,
    /// Two-oscillator model: ultraviolet resonance in rad/s.
    #[arg(long)]
    omega_uv: Option<f64>,
    /// Two-oscillator model: infrared resonance in rad/s.
    #[arg(long)]
    omega_ir: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct PatchArgs {
    /// Particle-surface separation in µm.
    #[arg(long)]
    d_um: Option<f64>,
    /// Signed principal radius R1 in µm (negative: centre of curvature on the particle side).
    #[arg(long)]
    r1_um: Option<f64>,
    /// Signed principal radius R2 in µm.
    #[arg(long)]
    r2_um: Option<f64>,
    /// Third-derivative term of the profile along x, times d².
    #[arg(long)]
    gx: Option<f64>,
    /// Third-derivative term of the profile along y, times d².
    #[arg(long)]
    gy: Option<f64>,
    /// Temperature in K; 0 selects the zero-temperature integral.
    #[arg(long, short = 'T')]
    temperature_k: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct ToleranceArgs {
    /// Relative truncation tolerance of the Matsubara sum.
    #[arg(long)]
    matsubara_rel_tol: Option<f64>,
    /// Absolute and relative tolerance of the frequency quadrature.
    #[arg(long)]
    quad_tol: Option<f64>,
    /// |d/R| above which a validity warning is issued.
    #[arg(long)]
    validity_threshold: Option<f64>,
}

#[derive(Args, Debug)]
struct BetaArgs {
    /// Polarization, E or M.
    #[arg(long = "P")]
    polarization: Option<String>,
    /// Order p (0, 2, 3 or 4).
    #[arg(long = "p")]
    order: Option<u8>,
    /// Branch q.
    #[arg(long = "q")]
    branch: Option<u8>,
    /// Tabulate all 22 coefficient functions.
    #[arg(long)]
    all: bool,
    /// Explicit sample points (comma separated).
    #[arg(long, value_delimiter = ',')]
    xi: Option<Vec<f64>>,
    #[arg(long)]
    xi_min: Option<f64>,
    #[arg(long)]
    xi_max: Option<f64>,
    #[arg(long)]
    xi_count: Option<usize>,
    /// CSV destination; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PotentialArgs {
    #[command(flatten)]
    particle: ParticleArgs,
    #[command(flatten)]
    patch: PatchArgs,
    /// Polar angle of the symmetry axis from the surface normal, degrees.
    #[arg(long)]
    theta_deg: Option<f64>,
    /// Azimuth of the symmetry axis from the R1 direction, degrees.
    #[arg(long)]
    phi_deg: Option<f64>,
    #[command(flatten)]
    tolerances: ToleranceArgs,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Destination; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    particle: ParticleArgs,
    #[command(flatten)]
    patch: PatchArgs,
    /// Outer axis as variable:min:max:count. Variables: d_over_r1,
    /// r1_over_r2, distance (µm), temperature (K).
    #[arg(long)]
    axis1: Option<AxisConfig>,
    /// Inner axis, same syntax as --axis1.
    #[arg(long)]
    axis2: Option<AxisConfig>,
    #[command(flatten)]
    tolerances: ToleranceArgs,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl ParticleArgs {
    fn apply(&self, c: &mut RunConfig) -> Result<(), Failure> {
        let oscillators = [self.c_uv, self.c_ir, self.omega_uv, self.omega_ir];
        let material = match (&self.material, oscillators) {
            (Some(_), o) if o.iter().any(Option::is_some) => {
                return Err(Failure::config(
                    "--material cannot be combined with oscillator parameters",
                ))
            }
            (Some(name), _) => Some(MaterialConfig::Preset(name.clone())),
            (None, [Some(c_uv), Some(c_ir), Some(omega_uv), Some(omega_ir)]) => {
                Some(MaterialConfig::Oscillators {
                    c_uv,
                    c_ir,
                    omega_uv,
                    omega_ir,
                })
            }
            (None, o) if o.iter().any(Option::is_some) => {
                return Err(Failure::config(
                    "oscillator materials need all of --c-uv, --c-ir, --omega-uv, --omega-ir",
                ))
            }
            (None, _) => None,
        };
        let shape_flags =
            self.n3.is_some() || self.semi_axis_um.is_some() || self.length_um.is_some();
        if shape_flags {
            // a shape given on the command line replaces the file's shape entirely
            c.particle.n3 = None;
            c.particle.semi_axis_um = None;
            c.particle.length_um = None;
        }
        c.overlay(&RunConfig {
            particle: ParticleConfig {
                n3: self.n3,
                volume_um3: self.volume_um3,
                semi_axis_um: self.semi_axis_um,
                length_um: self.length_um,
                material,
            },
            ..Default::default()
        });
        Ok(())
    }
}

impl PatchArgs {
    fn apply(&self, c: &mut RunConfig) {
        let third_derivative = match (self.gx, self.gy) {
            (None, None) => None,
            (gx, gy) => Some([gx.unwrap_or(0.0), gy.unwrap_or(0.0)]),
        };
        c.overlay(&RunConfig {
            patch: PatchConfig {
                d_um: self.d_um,
                r1_um: self.r1_um,
                r2_um: self.r2_um,
                third_derivative,
            },
            temperature_k: self.temperature_k,
            ..Default::default()
        });
    }
}

impl ToleranceArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.overlay(&RunConfig {
            tolerances: ToleranceConfig {
                matsubara_rel_tol: self.matsubara_rel_tol,
                quad_tol: self.quad_tol,
                validity_threshold: self.validity_threshold,
            },
            ..Default::default()
        });
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut c = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Config)?,
        None => RunConfig::default(),
    };
    match &cli.command {
        None => {}
        Some(Command::Beta(a)) => {
            c.command = Some(CommandKind::Beta);
            let b = &mut c.beta;
            config::layer(&mut b.polarization, &a.polarization);
            config::layer(&mut b.order, &a.order);
            config::layer(&mut b.branch, &a.branch);
            if a.all {
                b.all = Some(true);
            }
            config::layer(&mut b.xi, &a.xi);
            config::layer(&mut b.xi_min, &a.xi_min);
            config::layer(&mut b.xi_max, &a.xi_max);
            config::layer(&mut b.xi_count, &a.xi_count);
            config::layer(&mut c.output.path, &a.output);
        }
        Some(Command::Potential(a)) => {
            c.command = Some(CommandKind::Potential);
            a.particle.apply(&mut c)?;
            a.patch.apply(&mut c);
            a.tolerances.apply(&mut c);
            config::layer(&mut c.orientation.theta_deg, &a.theta_deg);
            config::layer(&mut c.orientation.phi_deg, &a.phi_deg);
            config::layer(&mut c.output.format, &a.format);
            config::layer(&mut c.output.path, &a.output);
        }
        Some(Command::Scan(a)) => {
            c.command = Some(CommandKind::Scan);
            a.particle.apply(&mut c)?;
            a.patch.apply(&mut c);
            a.tolerances.apply(&mut c);
            config::layer(&mut c.grid.axis1, &a.axis1);
            config::layer(&mut c.grid.axis2, &a.axis2);
            config::layer(&mut c.output.format, &a.format);
            config::layer(&mut c.output.path, &a.output);
        }
    }
    Ok(c)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::config(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads()
        .and_then(|()| build_config(&cli))
        .and_then(|c| run::execute(&c));
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.exit_code())
        }
    }
}
