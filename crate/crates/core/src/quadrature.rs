//! Globally adaptive 21-point Gauss–Kronrod quadrature on finite intervals.
//!
//! The integrand may be vector valued (`[f64; N]`); all components share the
//! same subdivision and the interval with the worst component error is split
//! first. Convergence requires every component to satisfy
//! `error <= max(abs_tol, rel_tol * |value|)`.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_067_316_184,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ...
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and subdivision budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

impl<const N: usize> Segment<N> {
    fn worst(&self) -> f64 {
        self.error.iter().fold(0.0, |m, &e| m.max(e))
    }
}

fn kronrod<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Segment<N>
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    for c in 0..N {
        k[c] = WGK[10] * fc[c];
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for c in 0..N {
            let s = f1[c] + f2[c];
            k[c] += WGK[j] * s;
            if j % 2 == 1 {
                g[c] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for c in 0..N {
        value[c] = k[c] * half;
        error[c] = ((k[c] - g[c]) * half).abs();
    }
    Segment { a, b, value, error }
}

/// Integrate a vector-valued function over `[a, b]`.
///
/// On failure to converge within `max_intervals` the error carries the
/// first component's estimate and achieved error.
pub fn integrate_vec<const N: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    opts: QuadratureOptions,
) -> Result<Integral<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "quadrature bounds must be finite, got [{a}, {b}]"
        )));
    }
    let mut segments = vec![kronrod(&mut f, a, b)];
    let mut evaluations = 21;

    loop {
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        for s in &segments {
            for c in 0..N {
                value[c] += s.value[c];
                error[c] += s.error[c];
            }
        }
        let converged = (0..N).all(|c| {
            let target = opts.abs_tol.max(opts.rel_tol * value[c].abs());
            error[c] <= target
        });
        if converged {
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }
        if segments.len() >= opts.max_intervals {
            let worst = (0..N)
                .max_by(|&i, &j| error[i].total_cmp(&error[j]))
                .unwrap_or(0);
            return Err(Error::Quadrature {
                value: value.get(worst).copied().unwrap_or(0.0),
                achieved: error.get(worst).copied().unwrap_or(0.0),
                requested: opts
                    .abs_tol
                    .max(opts.rel_tol * value.get(worst).map_or(0.0, |v| v.abs())),
            });
        }

        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|(_, s), (_, t)| s.worst().total_cmp(&t.worst()))
            .expect("at least one segment");
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval cannot be split further in floating point
            return Err(Error::Quadrature {
                value: value[0],
                achieved: error[0],
                requested: opts.abs_tol.max(opts.rel_tol * value[0].abs()),
            });
        }
        segments.push(kronrod(&mut f, seg.a, mid));
        segments.push(kronrod(&mut f, mid, seg.b));
        evaluations += 42;
    }
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<Integral<1>>
where
    F: FnMut(f64) -> f64,
{
    integrate_vec(|x| [f(x)], a, b, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, QuadratureOptions::default()).unwrap();
        assert_relative_eq!(r.value[0], 8.0, max_relative = 1e-15, epsilon = 0.0);
    }

    #[test]
    fn exponential_decay() {
        let r = integrate(
            |x| x.powi(3) * (-2.0 * x).exp(),
            0.0,
            60.0,
            QuadratureOptions::default(),
        )
        .unwrap();
        // 3!/2^4
        assert_relative_eq!(r.value[0], 0.375, max_relative = 1e-12, epsilon = 0.0);
    }

    #[test]
    fn log_endpoint() {
        let opts = QuadratureOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            ..Default::default()
        };
        let r = integrate(|x| if x > 0.0 { x.ln() } else { 0.0 }, 0.0, 1.0, opts).unwrap();
        assert_relative_eq!(r.value[0], -1.0, max_relative = 1e-12, epsilon = 0.0);
    }

    #[test]
    fn vector_components() {
        let r = integrate_vec(
            |x| [x.sin(), x.cos()],
            0.0,
            std::f64::consts::PI,
            Default::default(),
        )
        .unwrap();
        assert_relative_eq!(r.value[0], 2.0, max_relative = 1e-13, epsilon = 0.0);
        assert!(r.value[1].abs() < 1e-13);
    }

    #[test]
    fn reports_non_convergence() {
        let opts = QuadratureOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_intervals: 3,
        };
        let err = integrate(|x| (1.0 / (x + 1e-6)).sin(), 0.0, 1.0, opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn rejects_infinite_bounds() {
        assert!(integrate(|x| x, 0.0, f64::INFINITY, Default::default()).is_err());
    }
}
