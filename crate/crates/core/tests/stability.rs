use std::f64::consts::PI;

use cpcurve::constants::MICROMETRE;
use cpcurve::stability::{classify_detailed, GridSpec, StabilityGrid};
use cpcurve::{
    classify, coefficients, potential, scan, stable_orientation, AxisSpec, MaterialModel,
    Orientation, ScanBase, ScanVariable, Spheroid, SpheroidGeometry, StableAxis, SurfacePatch,
    ThermalState, Tolerances,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spheroid(n3: f64, material: MaterialModel) -> Spheroid {
    Spheroid::new(
        SpheroidGeometry::from_depolarization(n3, 1e-24).unwrap(),
        material,
    )
}

fn d_r_grid(r1: Option<f64>, distance: Option<f64>, temperature: f64, n: usize) -> GridSpec {
    GridSpec {
        axis1: AxisSpec::new(ScanVariable::R1OverR2, -3.03, 3.03, n),
        axis2: AxisSpec::new(ScanVariable::DOverR1, -0.25, 0.25, 2 * n),
        base: ScanBase {
            distance,
            r1,
            r2: None,
            temperature,
        },
    }
}

fn axes(g: &StabilityGrid) -> Vec<Option<StableAxis>> {
    g.cells.iter().map(|c| c.value.map(|v| v.axis)).collect()
}

#[test]
fn zero_temperature_conductor_diagram_is_scale_free() {
    let particle = spheroid(0.2, MaterialModel::PerfectConductor);
    let tol = Tolerances::default();
    let small = scan(
        &d_r_grid(Some(10.0 * MICROMETRE), None, 0.0, 24),
        &particle,
        &tol,
    )
    .unwrap();
    let large = scan(
        &d_r_grid(Some(1000.0 * MICROMETRE), None, 0.0, 24),
        &particle,
        &tol,
    )
    .unwrap();
    assert_eq!(axes(&small), axes(&large));
    for (a, b) in small.cells.iter().zip(&large.cells) {
        let (a, b) = (a.value.unwrap(), b.value.unwrap());
        assert!((a.b - b.b).abs() <= 1e-12 * a.a.abs());
        assert!((a.d - b.d).abs() <= 1e-12 * a.a.abs());
    }
}

#[test]
fn fixed_distance_and_fixed_radius_agree_where_they_coincide() {
    // with |R1| fixed, the cell at d/R1 = x sits at d = |x|·|R1|; reproduce one cell by fixing d
    let particle = spheroid(0.7, MaterialModel::SIO2);
    let tol = Tolerances::default();
    let r1 = 20.0 * MICROMETRE;
    let by_radius = d_r_grid(Some(r1), None, 300.0, 6);
    let g = scan(&by_radius, &particle, &tol).unwrap();
    let cell = g.cell(2, 5);
    let by_distance = GridSpec {
        base: ScanBase {
            distance: Some(cell.axis2.abs() * r1),
            r1: None,
            ..by_radius.base
        },
        axis1: AxisSpec::new(ScanVariable::R1OverR2, cell.axis1, cell.axis1, 1),
        axis2: AxisSpec::new(ScanVariable::DOverR1, cell.axis2, cell.axis2, 1),
    };
    let h = scan(&by_distance, &particle, &tol).unwrap();
    let (a, b) = (cell.value.unwrap(), h.cells[0].value.unwrap());
    assert_eq!(a.axis, b.axis);
    assert!((a.a - b.a).abs() <= 1e-12 * a.a.abs());
    assert!((a.d - b.d).abs() <= 1e-12 * a.a.abs());
}

#[test]
fn swapping_radii_exchanges_x_and_y() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tol = Tolerances::default();
    for _ in 0..40 {
        let material = if rng.random_bool(0.5) {
            MaterialModel::PerfectConductor
        } else {
            MaterialModel::SIO2
        };
        let particle = spheroid(rng.random_range(0.05..0.95), material);
        let d = rng.random_range(0.1..3.0) * MICROMETRE;
        let (a, b) = (rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4));
        let t = ThermalState::new(if rng.random_bool(0.5) { 0.0 } else { 300.0 }).unwrap();
        let p = stable_orientation(
            &particle,
            &SurfacePatch::from_ratios(d, a, b).unwrap(),
            t,
            &tol,
        )
        .unwrap();
        let q = stable_orientation(
            &particle,
            &SurfacePatch::from_ratios(d, b, a).unwrap(),
            t,
            &tol,
        )
        .unwrap();
        let swapped = match p.axis {
            StableAxis::X => StableAxis::Y,
            StableAxis::Y => StableAxis::X,
            StableAxis::Z => StableAxis::Z,
        };
        assert_eq!(
            q.axis,
            swapped,
            "n3={} d/R1={a} d/R2={b}",
            particle.geometry.n3()
        );
    }
}

#[test]
fn stable_axis_minimizes_potential_on_a_fine_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let tol = Tolerances::default();
    for _ in 0..12 {
        let material = if rng.random_bool(0.5) {
            MaterialModel::PerfectConductor
        } else {
            MaterialModel::SIO2
        };
        let particle = spheroid(rng.random_range(0.05..0.95), material);
        let patch = SurfacePatch::from_ratios(
            rng.random_range(0.1..3.0) * MICROMETRE,
            rng.random_range(-0.4..0.4),
            rng.random_range(-0.4..0.4),
        )
        .unwrap();
        let t = ThermalState::new(if rng.random_bool(0.5) { 0.0 } else { 300.0 }).unwrap();
        let stable = stable_orientation(&particle, &patch, t, &tol).unwrap();
        let c = coefficients(&particle, &patch, t, &tol).unwrap();
        let mut best = (f64::INFINITY, Orientation::Z_AXIS);
        for i in 0..=180 {
            for j in 0..361 {
                let o = Orientation::wrapped(i as f64 * PI / 180.0, j as f64 * PI / 180.0).unwrap();
                let u = c.reduced(&patch, &o);
                if u < best.0 {
                    best = (u, o);
                }
            }
        }
        let u_stable = stable.breakdown.u_reduced;
        assert!(
            u_stable <= best.0 + 1e-14 * best.0.abs(),
            "{u_stable} vs grid {}",
            best.0
        );
        // and agrees with the full evaluation along that axis
        let direct = potential(&particle, &patch, &stable.axis.orientation(), t, &tol).unwrap();
        assert_eq!(direct.u_reduced, u_stable);
    }
}

#[test]
fn third_derivative_is_rejected_for_classification() {
    let patch = SurfacePatch::from_ratios(1e-6, 0.1, 0.0)
        .unwrap()
        .with_third_derivative([0.1, 0.0])
        .unwrap();
    let r = stable_orientation(
        &spheroid(0.2, MaterialModel::PerfectConductor),
        &patch,
        ThermalState::ZERO,
        &Tolerances::default(),
    );
    assert!(r.is_err());
}

#[test]
fn scan_is_deterministic_and_serializable() {
    let particle = spheroid(0.2, MaterialModel::SIO2);
    let spec = d_r_grid(Some(50.0 * MICROMETRE), None, 300.0, 9);
    let tol = Tolerances::default();
    let a = scan(&spec, &particle, &tol).unwrap();
    let b = scan(&spec, &particle, &tol).unwrap();
    assert_eq!(a, b);
    let json = serde_json::to_string(&a).unwrap();
    let back: StabilityGrid = serde_json::from_str(&json).unwrap();
    assert_eq!(a, back);
    let mut csv = Vec::new();
    a.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "axis1,axis2,axis_label,A,B,C,D,marginal");
    assert_eq!(rows.len(), 1 + 9 * 18);
    let first: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), a.cells[0].axis1);
    assert_eq!(
        first[3].parse::<f64>().unwrap(),
        a.cells[0].value.unwrap().a
    );
}

#[test]
fn temperature_axis() {
    let particle = spheroid(0.7, MaterialModel::PerfectConductor);
    let spec = GridSpec {
        axis1: AxisSpec::new(ScanVariable::Temperature, 0.0, 300.0, 4),
        axis2: AxisSpec::new(
            ScanVariable::Distance,
            0.5 * MICROMETRE,
            2.0 * MICROMETRE,
            3,
        ),
        base: ScanBase {
            distance: None,
            r1: Some(-20.0 * MICROMETRE),
            r2: Some(-10.0 * MICROMETRE),
            temperature: 0.0,
        },
    };
    let g = scan(&spec, &particle, &Tolerances::default()).unwrap();
    assert_eq!(g.counts().failed, 0);
    assert_eq!(g.counts().total(), 12);
}

proptest! {
    #[test]
    fn classification_consistent_with_axis_energies(b in -1.0f64..1.0, d in -1.0f64..1.0) {
        // bracket values on the three axes; the stable one is the largest
        let z = b;
        let x = -b + d;
        let y = -b - d;
        let cls = classify_detailed(b, d);
        let best = z.max(x).max(y);
        match cls.axis {
            StableAxis::Z => prop_assert!(z == best || cls.marginal),
            StableAxis::X => prop_assert!(x == best && x > z),
            StableAxis::Y => prop_assert!(y == best && y > z),
        }
    }

    #[test]
    fn classify_is_odd_in_d(b in -1.0f64..1.0, d in -1.0f64..1.0) {
        let swap = |a| match a { StableAxis::X => StableAxis::Y, StableAxis::Y => StableAxis::X, z => z };
        prop_assert_eq!(classify(b, -d), swap(classify(b, d)));
    }
}

fn z_fraction(n3: f64, temperature: f64) -> f64 {
    let spec = GridSpec {
        axis1: AxisSpec::new(ScanVariable::R1OverR2, -4.5, 4.5, 40),
        axis2: AxisSpec::new(ScanVariable::DOverR1, -0.2, 0.2, 40),
        base: ScanBase {
            distance: None,
            r1: Some(20.0 * MICROMETRE),
            r2: None,
            temperature,
        },
    };
    let g = scan(
        &spec,
        &spheroid(n3, MaterialModel::PerfectConductor),
        &Tolerances::default(),
    )
    .unwrap();
    let c = g.counts();
    assert_eq!(c.failed, 0);
    c.z as f64 / c.total() as f64
}

#[test]
fn room_temperature_shrinks_pancake_z_region_and_grows_needle_z_region() {
    let (pancake_cold, pancake_warm) = (z_fraction(0.7, 0.0), z_fraction(0.7, 300.0));
    let (needle_cold, needle_warm) = (z_fraction(0.2, 0.0), z_fraction(0.2, 300.0));
    eprintln!("pancake {pancake_cold} -> {pancake_warm}, needle {needle_cold} -> {needle_warm}");
    assert!(pancake_warm < pancake_cold);
    assert!(needle_warm > needle_cold);
}
