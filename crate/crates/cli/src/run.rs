use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::anyhow;
use cpcurve::potential::Evaluation;
use cpcurve::stability::{RegionCounts, StabilityGrid};
use cpcurve::{
    beta, potential, scan, stable_orientation, BetaIndex, Polarization, PotentialBreakdown,
    StableAxis, Term,
};
use serde::Serialize;

use crate::config::{CommandKind, OutputFormat, RunConfig};

pub const SCAN_SCHEMA: &str = "cpcurve-scan v1";
pub const POTENTIAL_SCHEMA: &str = "cpcurve-potential v1";

/// Error categories, each with its own exit status.
#[derive(Debug)]
pub enum Failure {
    /// Invalid configuration or flags (2).
    Config(anyhow::Error),
    /// A computation did not succeed (3).
    Numerical(anyhow::Error),
    /// The output could not be written (4).
    Output(anyhow::Error),
}

impl Failure {
    pub fn config(msg: impl std::fmt::Display) -> Self {
        Failure::Config(anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Output(_) => 4,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Numerical(e) | Failure::Output(e) => e,
        }
    }
}

trait Categorize<T> {
    fn config(self) -> Result<T, Failure>;
    fn numerical(self) -> Result<T, Failure>;
    fn output(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Categorize<T> for Result<T, E> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }
    fn numerical(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Numerical(e.into()))
    }
    fn output(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Output(e.into()))
    }
}

/// Opened before any computation so that an unwritable path fails fast.
fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            let f = File::create(p)
                .map_err(|e| Failure::Output(anyhow!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

pub fn execute(c: &RunConfig) -> Result<ExitCode, Failure> {
    match c.command {
        Some(CommandKind::Beta) => run_beta(c),
        Some(CommandKind::Potential) => run_potential(c),
        Some(CommandKind::Scan) => run_scan(c),
        None => Err(Failure::config(
            "no command: give a subcommand (beta, potential, scan) or set \"command\" in the config",
        )),
    }
}

fn beta_indices(c: &RunConfig) -> Result<Vec<BetaIndex>, Failure> {
    let b = &c.beta;
    let polarizations = match b.polarization.as_deref() {
        None => Polarization::ALL.to_vec(),
        Some(s) if s.eq_ignore_ascii_case("e") => vec![Polarization::E],
        Some(s) if s.eq_ignore_ascii_case("m") => vec![Polarization::M],
        Some(s) => {
            return Err(Failure::config(format!(
                "polarization must be E or M, got {s:?}"
            )))
        }
    };
    if b.all.unwrap_or(false) {
        if b.order.is_some() || b.branch.is_some() {
            return Err(Failure::config("--all cannot be combined with --p/--q"));
        }
        return Ok(polarizations
            .into_iter()
            .flat_map(|p| Term::ALL.into_iter().map(move |t| BetaIndex::new(p, t)))
            .collect());
    }
    if b.polarization.is_none() {
        return Err(Failure::config("give --P (E or M) and --p, or --all"));
    }
    let order = b
        .order
        .ok_or_else(|| Failure::config("--p is required without --all"))?;
    let term = Term::from_order_branch(order, b.branch).config()?;
    Ok(polarizations
        .into_iter()
        .map(|p| BetaIndex::new(p, term))
        .collect())
}

fn beta_points(c: &RunConfig) -> Result<Vec<f64>, Failure> {
    let b = &c.beta;
    let points = match (&b.xi, b.xi_min, b.xi_max, b.xi_count) {
        (Some(xs), None, None, None) => xs.clone(),
        (None, Some(lo), Some(hi), Some(n)) if n > 0 => {
            cpcurve::AxisSpec::new(cpcurve::ScanVariable::Distance, lo, hi, n).values()
        }
        _ => {
            return Err(Failure::config(
                "give either --xi or all of --xi-min, --xi-max, --xi-count (> 0)",
            ))
        }
    };
    if let Some(bad) = points.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
        return Err(Failure::config(format!(
            "xi must be finite and non-negative, got {bad}"
        )));
    }
    Ok(points)
}

fn run_beta(c: &RunConfig) -> Result<ExitCode, Failure> {
    let indices = beta_indices(c)?;
    let points = beta_points(c)?;
    let mut rows = Vec::with_capacity(indices.len() * points.len());
    for idx in &indices {
        for &xi in &points {
            rows.push((idx, xi, beta(*idx, xi).numerical()?));
        }
    }
    let mut out = open_output(c.output.path.as_deref())?;
    let write = |out: &mut dyn Write| -> io::Result<()> {
        writeln!(out, "P,p,q,xi,value")?;
        for (idx, xi, v) in &rows {
            writeln!(
                out,
                "{},{},{},{:e},{:e}",
                idx.polarization,
                idx.term.order(),
                idx.term.branch(),
                xi,
                v
            )?;
        }
        out.flush()
    };
    write(&mut out).output()?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct PotentialDocument<'a> {
    schema: &'static str,
    config: RunConfig,
    result: &'a PotentialBreakdown,
    #[serde(skip_serializing_if = "Option::is_none")]
    stable_axis: Option<StableAxis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    marginal: Option<bool>,
}

fn run_potential(c: &RunConfig) -> Result<ExitCode, Failure> {
    let particle = c.particle().config()?;
    let patch = c.patch().config()?;
    let orientation = c.orientation().config()?;
    let thermal = c.thermal().config()?;
    let tol = c.tolerances().config()?;
    let format = c.output.format.unwrap_or(OutputFormat::Text);
    if format == OutputFormat::Csv {
        return Err(Failure::config(
            "potential output format must be text or json",
        ));
    }
    let mut out = open_output(c.output.path.as_deref())?;

    let result = potential(&particle, &patch, &orientation, thermal, &tol).numerical()?;
    let stable = if patch.has_third_derivative() {
        None
    } else {
        Some(stable_orientation(&particle, &patch, thermal, &tol).numerical()?)
    };
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }

    if format == OutputFormat::Json {
        let doc = PotentialDocument {
            schema: POTENTIAL_SCHEMA,
            config: c.physics_echo(),
            result: &result,
            stable_axis: stable.as_ref().map(|s| s.axis),
            marginal: stable.as_ref().map(|s| s.marginal),
        };
        serde_json::to_writer_pretty(&mut out, &doc).output()?;
        writeln!(out).output()?;
    } else {
        let unit = if thermal.is_zero() {
            "hbar c V / d^4"
        } else {
            "k_B T V / d^3"
        };
        let k = &result.coefficients;
        let evaluation = match k.evaluation {
            Evaluation::Matsubara { terms, xi1 } => {
                format!("matsubara sum, {terms} terms, xi1 = {xi1:.6e}")
            }
            Evaluation::Moments => "exact frequency moments".to_string(),
            Evaluation::Quadrature {
                abs_error,
                evaluations,
            } => format!("quadrature, {evaluations} evaluations, abs error {abs_error:.2e}"),
        };
        let mut text = format!(
            "U_reduced   {:.12e}   [{unit}]\n\
             U_SI        {:.12e}   [J]\n\
             A           {:.12e}\n\
             B           {:.12e}\n\
             C           {:.12e}\n\
             D           {:.12e}\n\
             E3          {:.12e}\n\
             evaluation  {evaluation}\n",
            result.u_reduced, result.u_si, k.a, k.b, k.c, k.d, k.e3
        );
        match &stable {
            Some(s) => text.push_str(&format!(
                "stable_axis {}{}\n",
                s.axis,
                if s.marginal { " (marginal)" } else { "" }
            )),
            None => text.push_str("stable_axis n/a (surface has a third-derivative term)\n"),
        }
        for w in &result.warnings {
            text.push_str(&format!("warning     {w}\n"));
        }
        out.write_all(text.as_bytes()).output()?;
    }
    out.flush().output()?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ScanDocument<'a> {
    schema: &'static str,
    config: RunConfig,
    counts: RegionCounts,
    grid: &'a StabilityGrid,
}

fn summary(counts: &RegionCounts) -> String {
    let n = counts.total().max(1) as f64;
    format!(
        "region fractions: x {:.4}  y {:.4}  z {:.4}  ({} cells, {} marginal, {} failed)",
        counts.x as f64 / n,
        counts.y as f64 / n,
        counts.z as f64 / n,
        counts.total(),
        counts.marginal,
        counts.failed
    )
}

fn run_scan(c: &RunConfig) -> Result<ExitCode, Failure> {
    let spec = c.grid().config()?;
    let particle = c.particle().config()?;
    let tol = c.tolerances().config()?;
    let path = c.output.path.as_deref();
    let format = match c.output.format {
        Some(OutputFormat::Text) => {
            return Err(Failure::config("scan output format must be csv or json"))
        }
        Some(f) => f,
        None if path.is_some_and(|p| p.extension().is_some_and(|e| e == "json")) => {
            OutputFormat::Json
        }
        None => OutputFormat::Csv,
    };
    let mut out = open_output(path)?;

    let grid = scan(&spec, &particle, &tol).numerical()?;
    let counts = grid.counts();
    match format {
        OutputFormat::Json => {
            let doc = ScanDocument {
                schema: SCAN_SCHEMA,
                config: c.physics_echo(),
                counts,
                grid: &grid,
            };
            serde_json::to_writer_pretty(&mut out, &doc).output()?;
            writeln!(out).output()?;
        }
        _ => grid.write_csv(&mut out).output()?,
    }
    out.flush().output()?;
    drop(out);

    let line = summary(&counts);
    if path.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    if counts.failed > 0 {
        for cell in grid.cells.iter().filter(|c| c.error.is_some()).take(3) {
            eprintln!(
                "failed cell ({:e}, {:e}): {}",
                cell.axis1,
                cell.axis2,
                cell.error.as_deref().unwrap_or_default()
            );
        }
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}
