mod common;

use common::to_na;
use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64 as C;
use proptest::prelude::*;

use nv_dnp::analysis::{argmax, local_maxima, moving_average, prominence, range, sign_changes};
use nv_dnp::experiments::{classify_regime, RegimeLabel};
use nv_dnp::hamiltonian::{build_hamiltonian, HyperfineTensor, SystemParams};
use nv_dnp::lindblad::{build_liouvillian, jump_operators, propagate, unvectorize, vectorize, DensityMatrix};
use nv_dnp::spin_ops::{spin_operators, ComplexMatrix, FieldVector, JointOperators, Spin, I, JOINT_DIM};

fn rank(r: RegimeLabel) -> u8 {
    match r {
        RegimeLabel::Selective => 0,
        RegimeLabel::Lambda => 1,
        RegimeLabel::Broadband => 2,
    }
}

fn unit(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(to_na(m)).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn complex_matrix(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), d * d)
        .prop_map(move |v| ComplexMatrix::from_fn(d, |i, j| C::new(v[i * d + j].0, v[i * d + j].1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regime_depends_only_on_ratios(rabi in 0.0..500.0f64, delta in 0.1..50.0f64, extra in 0.0..300.0f64, k in 0.01..100.0f64) {
        let big = delta + extra;
        let a = classify_regime(rabi, delta, big).unwrap();
        let b = classify_regime(k * rabi, k * delta, k * big).unwrap();
        // scaling can move a point sitting exactly on a boundary
        let on_edge = (rabi - delta).abs() < 1e-9 * delta || (rabi - big).abs() < 1e-9 * big;
        prop_assume!(!on_edge);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn regime_is_monotone_in_drive(r1 in 0.0..500.0f64, r2 in 0.0..500.0f64, delta in 0.1..50.0f64, extra in 0.0..300.0f64) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let a = classify_regime(lo, delta, delta + extra).unwrap();
        let b = classify_regime(hi, delta, delta + extra).unwrap();
        prop_assert!(rank(a) <= rank(b));
    }

    #[test]
    fn axial_tensor_shape(par in -300.0..300.0f64, perp in -300.0..300.0f64, polar in 0.0..std::f64::consts::PI, az in 0.0..std::f64::consts::TAU) {
        let t = HyperfineTensor::axial(par, perp, polar, az).unwrap();
        let a = Matrix3::from_fn(|i, j| t.get(i, j));
        prop_assert!((a - a.transpose()).abs().max() == 0.0);
        prop_assert!((a.trace() - (par + 2.0 * perp)).abs() < 1e-10 * (1.0 + par.abs() + perp.abs()));
        let mut ev: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let mut want = vec![par, perp, perp];
        want.sort_by(f64::total_cmp);
        for (g, w) in ev.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-9 * (1.0 + par.abs() + perp.abs()));
        }
        let u = unit(polar, az);
        for i in 0..3 {
            let au: f64 = (0..3).map(|j| t.get(i, j) * u[j]).sum();
            prop_assert!((au - par * u[i]).abs() < 1e-9 * (1.0 + par.abs() + perp.abs()));
        }
    }

    #[test]
    fn vectorization_stacks_columns(m in complex_matrix(JOINT_DIM)) {
        let v = vectorize(&m);
        prop_assert_eq!(v.len(), JOINT_DIM * JOINT_DIM);
        for j in 0..JOINT_DIM {
            for i in 0..JOINT_DIM {
                prop_assert_eq!(v[j * JOINT_DIM + i], m[(i, j)]);
            }
        }
        prop_assert_eq!(unvectorize(&v).unwrap().to_row_major(), m.to_row_major());
    }

    #[test]
    fn spin_projection_algebra(t1 in 0.0..std::f64::consts::PI, p1 in 0.0..std::f64::consts::TAU, t2 in 0.0..std::f64::consts::PI, p2 in 0.0..std::f64::consts::TAU) {
        let (n, m) = (unit(t1, p1), unit(t2, p2));
        let along = |s: &[ComplexMatrix; 3], u: [f64; 3]| {
            let mut acc = ComplexMatrix::zeros(s[0].dim());
            for k in 0..3 {
                acc += &s[k].scale_real(u[k]);
            }
            acc
        };
        let cross = [n[1] * m[2] - n[2] * m[1], n[2] * m[0] - n[0] * m[2], n[0] * m[1] - n[1] * m[0]];
        for spin in [Spin::Half, Spin::One] {
            let s = spin_operators(spin);
            let (sn, sm) = (along(&s, n), along(&s, m));
            prop_assert!(sn.commutator(&sm).max_abs_diff(&along(&s, cross).scale(I)) < 1e-13);
            let ev = hermitian_eigenvalues(&sn);
            let want: Vec<f64> = match spin { Spin::Half => vec![-0.5, 0.5], Spin::One => vec![-1.0, 0.0, 1.0] };
            for (g, w) in ev.iter().zip(&want) {
                prop_assert!((g - w).abs() < 1e-12);
            }
        }
        let ev = hermitian_eigenvalues(&JointOperators::new().nuclear_along(n));
        for (k, g) in ev.iter().enumerate() {
            let want = if k < 3 { -0.5 } else { 0.5 };
            prop_assert!((g - want).abs() < 1e-12);
        }
    }

    #[test]
    fn curve_helpers(y in prop::collection::vec(-10.0..10.0f64, 3..40), c in 0.1..10.0f64, hw in 0usize..5) {
        let r = range(&y);
        for i in local_maxima(&y) {
            prop_assert!(i > 0 && i + 1 < y.len());
            prop_assert!(y[i] >= y[i - 1]);
            let p = prominence(&y, i);
            prop_assert!(p > 0.0 && p <= r + 1e-12);
        }
        let scaled: Vec<f64> = y.iter().map(|v| c * v).collect();
        prop_assert_eq!(local_maxima(&y), local_maxima(&scaled));
        prop_assert_eq!(sign_changes(&y), sign_changes(&scaled));
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        prop_assert_eq!(sign_changes(&y), sign_changes(&neg));
        let top = argmax(&y).unwrap();
        prop_assert!(y.iter().all(|v| *v <= y[top]));
        prop_assert!(y[..top].iter().all(|v| *v < y[top]));
        prop_assert_eq!(moving_average(&y, 0), y.clone());
        let sm = moving_average(&y, hw);
        let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        prop_assert!(sm.iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn evolution_keeps_a_density_matrix(
        b in 0.5..30.0f64, theta in 0.0..80.0f64, phi in 0.0..360.0f64,
        par in -250.0..250.0f64, perp in -150.0..150.0f64, polar in 0.0..std::f64::consts::PI, az in 0.0..std::f64::consts::TAU,
        rabi in 0.0..5.0f64, eta in 0.5..1.0f64, t in 0.01..3.0f64,
        psi in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), JOINT_DIM),
    ) {
        let norm: f64 = psi.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let psi: Vec<C> = psi.iter().map(|(a, b)| C::new(*a, *b) / norm).collect();
        let mut p = SystemParams::new(
            FieldVector::from_degrees(b, theta, phi).unwrap(),
            HyperfineTensor::axial(par, perp, polar, az).unwrap(),
        );
        p.rabi = rabi;
        p.pump_efficiency = eta;
        let h = build_hamiltonian(&p).unwrap().value;
        prop_assert!(h.is_hermitian(1e-9));
        let l = build_liouvillian(&h, &jump_operators(&p).unwrap()).unwrap();
        let rho = propagate(&DensityMatrix::pure(&psi).unwrap(), &l, t).unwrap();
        let m = rho.matrix();
        prop_assert!((m.trace() - C::new(1.0, 0.0)).norm() < 1e-9);
        prop_assert!(m.is_hermitian(1e-9));
        prop_assert!(hermitian_eigenvalues(m).iter().all(|e| *e > -1e-8));
        prop_assert!(rho.purity() <= 1.0 + 1e-9);
    }
}
