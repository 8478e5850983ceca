use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;

use spinprobe::detection::{FieldKind, SpinField};
use spinprobe::dynamics::{evolve_correlations, photon_counts, EmissionSetup, GeneratorMatrix, RadiativeParams};
use spinprobe::geometry::{
    coupling_matrix_with, coverage_check, lab_polarization_map, momentum_transfer, transverse_projector, unit_direction,
};
use spinprobe::spinwave::ground_state_correlations;
use spinprobe::{Axis, Contraction, LatticeSpec, ModelParams, MomentumCorrelation, ScatterGeometry};

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
}

proptest! {
    #[test]
    fn polarization_frame(theta in -10.0f64..10.0, phi in -10.0f64..10.0) {
        let l = lab_polarization_map(theta, phi);
        let gram = l.transpose() * l;
        prop_assert!((gram - Matrix2::identity()).abs().max() < 1e-12);
        let p = transverse_projector(&unit_direction(theta, phi)).unwrap();
        prop_assert!((l * l.transpose() - p).abs().max() < 1e-12);
        prop_assert!((p * p - p).abs().max() < 1e-12);
        prop_assert!((p - p.transpose()).abs().max() == 0.0);
        prop_assert!((p.trace() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_structure(sigma in axis(), theta in 0.0f64..PI, phi in -PI..PI, projected in any::<bool>()) {
        let c = if projected { Contraction::Projected } else { Contraction::RowSum };
        let m = coupling_matrix_with(c, sigma, theta, phi);
        prop_assert!(m.entries.row(sigma.index()).iter().all(|&v| v == 0.0));
        prop_assert!(m.entries.abs().max() <= 2.0);
    }

    #[test]
    fn transfer_bounded(k in 0.1f64..10.0, theta in -7.0f64..7.0, phi in -7.0f64..7.0) {
        let g = ScatterGeometry::along_z(k, Axis::Z, theta, phi).unwrap();
        let dk = momentum_transfer(&g).norm();
        prop_assert!(dk <= 2.0 * k * (1.0 + 1e-12));
    }

    #[test]
    fn coverage_monotone(dims in 1usize..=3, k in 0.1f64..10.0, dk in 0.0f64..5.0) {
        let lat = LatticeSpec::new(&vec![3; dims], 1.0).unwrap();
        if coverage_check(&lat, k).pass {
            prop_assert!(coverage_check(&lat, k + dk).pass);
        }
    }

    #[test]
    fn correlation_symmetries(qx in -4.0f64..4.0, qy in -4.0f64..4.0, jb in -0.45f64..0.45) {
        let model = ModelParams::new(1.0, jb, LatticeSpec::square(6, 1.0).unwrap()).unwrap();
        let q = Vector3::new(qx, qy, 0.0);
        let c = ground_state_correlations(&q, &model).unwrap();
        let cm = ground_state_correlations(&-q, &model).unwrap();
        prop_assert!(c.is_hermitian(0.0));
        prop_assert_eq!(c.c, cm.c);
        prop_assert!(c.uncertainty_defect().abs() < 1e-12);
        if jb < 0.0 {
            let c0 = ground_state_correlations(&Vector3::zeros(), &model).unwrap();
            let corner = ground_state_correlations(&Vector3::new(PI, PI, 0.0), &model).unwrap();
            prop_assert!(c0.c[(0, 0)].re >= c.c[(0, 0)].re);
            prop_assert!(corner.c[(0, 0)].re <= c.c[(0, 0)].re);
        }
    }

    #[test]
    fn regression_is_linear(
        a in -2.0f64..2.0, b in -2.0f64..2.0, t in 0.0f64..3.0,
        e in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let g = GeneratorMatrix { q: Vector3::zeros(), a: Matrix2::new(e[0], e[1], e[2], e[3]), forward_reachable: true, backward_reachable: true };
        let c1 = MomentumCorrelation { q: Vector3::zeros(), c: Matrix2::new(Complex64::new(0.7, 0.0), Complex64::new(0.1, 0.5), Complex64::new(0.1, -0.5), Complex64::new(0.4, 0.0)) };
        let c2 = MomentumCorrelation { q: Vector3::zeros(), c: Matrix2::new(Complex64::new(0.2, 0.0), Complex64::new(-0.3, 0.2), Complex64::new(-0.3, -0.2), Complex64::new(1.1, 0.0)) };
        let mix = MomentumCorrelation { q: Vector3::zeros(), c: c1.c * Complex64::from(a) + c2.c * Complex64::from(b) };
        let lhs = evolve_correlations(&mix, &g, t).c;
        let rhs = evolve_correlations(&c1, &g, t).c * Complex64::from(a) + evolve_correlations(&c2, &g, t).c * Complex64::from(b);
        prop_assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn cosine_sine_parity(kx in -1.0f64..1.0, ky in -1.0f64..1.0, seed in 0u64..100) {
        let lat = LatticeSpec::square(4, 1.0).unwrap();
        let f = SpinField::from_fn(&lat, |s| [((s[0] * 7 + s[1] * 3) as f64 + seed as f64).sin(), 0.0, 0.0]);
        let dk = Vector3::new(kx, ky, 0.0) * PI;
        let c = f.component(&dk, Axis::X, FieldKind::C);
        let s = f.component(&dk, Axis::X, FieldKind::S);
        prop_assert!((c - f.component(&-dk, Axis::X, FieldKind::C)).abs() < 1e-12);
        prop_assert!((s + f.component(&-dk, Axis::X, FieldKind::S)).abs() < 1e-12);
    }
}

fn setup(lat: &LatticeSpec) -> EmissionSetup {
    EmissionSetup::new(ScatterGeometry::along_z(PI, Axis::Z, 0.0, 0.0).unwrap(), lat.clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn counts_grow_with_window(theta in 0.05f64..3.1, t in 0.0f64..1.0, jb in -0.4f64..0.0) {
        let lat = LatticeSpec::chain(60, 1.0).unwrap();
        let model = ModelParams::new(1.0, jb, lat.clone()).unwrap();
        let s = setup(&lat);
        let g = s.geometry.with_angles(theta, 0.0);
        let n1 = photon_counts(&g, &s, &RadiativeParams::unit(t).unwrap(), &model).unwrap().n;
        let n2 = photon_counts(&g, &s, &RadiativeParams::unit(t + 0.2).unwrap(), &model).unwrap().n;
        for i in 0..3 {
            prop_assert!(n2[(i, i)].re >= n1[(i, i)].re - 1e-12);
        }
        prop_assert!(hermitian(&n1));
    }

    #[test]
    fn counts_scale_with_atoms(theta in 0.05f64..3.1, t in 0.01f64..1.0) {
        let full = LatticeSpec::chain(60, 1.0).unwrap();
        let half = LatticeSpec::with_occupancy(&[60], 1.0, 0.5).unwrap();
        let g = setup(&full).geometry.with_angles(theta, 0.0);
        let rad = RadiativeParams::unit(t).unwrap();
        let a = photon_counts(&g, &setup(&full), &rad, &ModelParams::new(1.0, -0.2, full.clone()).unwrap()).unwrap();
        let b = photon_counts(&g, &setup(&half), &rad, &ModelParams::new(1.0, -0.2, half.clone()).unwrap()).unwrap();
        prop_assert!((a.n - b.n * Complex64::from(2.0)).iter().all(|z| z.norm() <= 1e-12 * a.n.norm().max(1.0)));
    }
}

fn hermitian(m: &Matrix3<Complex64>) -> bool {
    (m - m.adjoint()).iter().all(|z| z.norm() <= 1e-12 * m.norm().max(1.0))
}
