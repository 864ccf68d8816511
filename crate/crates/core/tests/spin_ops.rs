mod common;

use common::{from_na, to_na};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use nv_dnp::spin_ops::{
    electron_op, electron_transition, field_components, kron, nuclear_op, spin_operators, ComplexMatrix,
    ElectronLevel, FieldVector, JointOperators, Spin, I, JOINT_DIM, ONE, ZERO,
};
use nv_dnp::Error;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

// Textbook matrices written out by hand, basis ordered by descending m.
fn pauli_halves() -> [ComplexMatrix; 3] {
    let h = 0.5;
    [
        ComplexMatrix::from_row_major(2, &[ZERO, c(h), c(h), ZERO]).unwrap(),
        ComplexMatrix::from_row_major(2, &[ZERO, C::new(0.0, -h), C::new(0.0, h), ZERO]).unwrap(),
        ComplexMatrix::from_row_major(2, &[c(h), ZERO, ZERO, c(-h)]).unwrap(),
    ]
}

fn spin_one_by_hand() -> [ComplexMatrix; 3] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let ir = C::new(0.0, r);
    [
        ComplexMatrix::from_row_major(3, &[ZERO, c(r), ZERO, c(r), ZERO, c(r), ZERO, c(r), ZERO]).unwrap(),
        ComplexMatrix::from_row_major(3, &[ZERO, -ir, ZERO, ir, ZERO, -ir, ZERO, ir, ZERO]).unwrap(),
        ComplexMatrix::from_real_diagonal(&[1.0, 0.0, -1.0]),
    ]
}

#[test]
fn operators_match_textbook_matrices() {
    for (got, want) in spin_operators(Spin::Half).iter().zip(pauli_halves().iter()) {
        assert!(got.max_abs_diff(want) < 1e-15);
    }
    for (got, want) in spin_operators(Spin::One).iter().zip(spin_one_by_hand().iter()) {
        assert!(got.max_abs_diff(want) < 1e-15);
    }
}

#[test]
fn casimir_and_cyclic_commutators() {
    for (s, val) in [(Spin::Half, 0.5), (Spin::One, 1.0)] {
        let ops = spin_operators(s);
        let d = s.dim();
        let mut sq = ComplexMatrix::zeros(d);
        for o in &ops {
            sq += &(o * o);
        }
        assert!(sq.max_abs_diff(&ComplexMatrix::identity(d).scale_real(val * (val + 1.0))) < 1e-14);
        for k in 0..3 {
            let (a, b, cc) = (&ops[k], &ops[(k + 1) % 3], &ops[(k + 2) % 3]);
            assert!(a.commutator(b).max_abs_diff(&cc.scale(I)) < 1e-14);
        }
        for o in &ops {
            assert!(o.is_hermitian(1e-14));
            assert!(o.trace().norm() < 1e-14);
        }
    }
}

#[test]
fn raising_operator_has_clebsch_gordan_entries() {
    // S+ = Sx + iSy; ⟨m+1|S+|m⟩ = sqrt(s(s+1) − m(m+1))
    let [sx, sy, _] = spin_operators(Spin::One);
    let sp = &sx + &sy.scale(I);
    assert!((sp[(0, 1)] - c(2f64.sqrt())).norm() < 1e-14);
    assert!((sp[(1, 2)] - c(2f64.sqrt())).norm() < 1e-14);
    assert!(sp[(1, 0)].norm() < 1e-15 && sp[(0, 0)].norm() < 1e-15);
}

#[test]
fn unsupported_spin_values_are_rejected() {
    for s in [0.0, 1.5, 2.0, -0.5, f64::NAN] {
        assert!(matches!(Spin::from_f64(s), Err(Error::UnsupportedSpin(_))));
    }
    assert_eq!(Spin::from_f64(0.5).unwrap(), Spin::Half);
    assert_eq!(Spin::from_f64(1.0).unwrap(), Spin::One);
}

#[test]
fn kron_agrees_with_nalgebra_and_mixed_product_rule() {
    let a = ComplexMatrix::from_fn(3, |i, j| C::new((i * 3 + j) as f64, (i as f64) - 0.5 * j as f64));
    let b = ComplexMatrix::from_fn(2, |i, j| C::new(1.0 + i as f64, 2.0 * j as f64 - 1.0));
    let want: DMatrix<C> = to_na(&a).kronecker(&to_na(&b));
    assert!(common::max_abs_diff(&to_na(&kron(&a, &b)), &want) < 1e-14);

    let a2 = ComplexMatrix::from_fn(3, |i, j| C::new((i + j) as f64 * 0.25, 1.0));
    let b2 = ComplexMatrix::from_fn(2, |i, j| C::new(0.5, (i * j) as f64));
    let lhs = &kron(&a, &b) * &kron(&a2, &b2);
    let rhs = kron(&(&a * &a2), &(&b * &b2));
    assert!(lhs.max_abs_diff(&rhs) < 1e-12);

    let cmat = ComplexMatrix::from_fn(2, |i, j| C::new(i as f64 - j as f64, 0.3));
    assert!(kron(&kron(&a, &b), &cmat).max_abs_diff(&kron(&a, &kron(&b, &cmat))) < 1e-13);
}

#[test]
fn kron_is_exactly_associative_on_integer_entries() {
    // Integer products are exact, so reassociation cannot round differently.
    let a = ComplexMatrix::from_fn(3, |i, j| C::new((i * 3 + j) as f64 - 4.0, (i as f64) - 2.0 * j as f64));
    let b = ComplexMatrix::from_fn(2, |i, j| C::new(1.0 + i as f64, 2.0 * j as f64 - 1.0));
    let cmat = ComplexMatrix::from_fn(2, |i, j| C::new(i as f64 - j as f64, 3.0));
    assert_eq!(kron(&kron(&a, &b), &cmat).to_row_major(), kron(&a, &kron(&b, &cmat)).to_row_major());
    let [sx, sy, sz] = spin_operators(Spin::Half).map(|m| m.scale_real(2.0));
    assert_eq!(kron(&kron(&sx, &sy), &sz).to_row_major(), kron(&sx, &kron(&sy, &sz)).to_row_major());
}

#[test]
fn joint_basis_is_electron_major() {
    // |+1,↑⟩ |+1,↓⟩ |0,↑⟩ |0,↓⟩ |−1,↑⟩ |−1,↓⟩
    let ops = JointOperators::new();
    let sz: Vec<f64> = ops.s[2].diagonal().iter().map(|z| z.re).collect();
    let iz: Vec<f64> = ops.i[2].diagonal().iter().map(|z| z.re).collect();
    assert_eq!(sz, vec![1.0, 1.0, 0.0, 0.0, -1.0, -1.0]);
    assert_eq!(iz, vec![0.5, -0.5, 0.5, -0.5, 0.5, -0.5]);
    for lv in ElectronLevel::ALL {
        let p = electron_op(&lv.electron_projector());
        for n in 0..2 {
            assert_eq!(p[(lv.index() * 2 + n, lv.index() * 2 + n)], ONE);
        }
        assert!((p.trace() - c(2.0)).norm() < 1e-15);
    }
}

#[test]
fn electron_and_nuclear_operators_commute() {
    let ops = JointOperators::new();
    for s in &ops.s {
        for i in &ops.i {
            assert!(s.commutator(i).max_abs() < 1e-15);
        }
    }
    let t = electron_transition(ElectronLevel::Minus, ElectronLevel::Zero);
    assert_eq!(t[(2, 4)], ONE);
    assert_eq!(t[(3, 5)], ONE);
    assert!((t.trace()).norm() == 0.0);
    let n = nuclear_op(&ComplexMatrix::identity(2));
    assert!(n.max_abs_diff(&ComplexMatrix::identity(JOINT_DIM)) == 0.0);
}

#[test]
fn nuclear_along_axis_squares_to_a_quarter() {
    let ops = JointOperators::new();
    let axis = [0.36, -0.48, 0.8];
    let n = ops.nuclear_along(axis);
    assert!((&n * &n).max_abs_diff(&ComplexMatrix::identity(JOINT_DIM).scale_real(0.25)) < 1e-14);
}

#[test]
fn field_components_cases() {
    let b = field_components(&FieldVector::from_degrees(4.04, 0.0, 0.0).unwrap());
    assert_eq!(b, [0.0, 0.0, 4.04]);
    let b = field_components(&FieldVector::new(2.5, std::f64::consts::FRAC_PI_2, 0.0).unwrap());
    assert!((b[0] - 2.5).abs() < 1e-15 && b[1].abs() < 1e-15 && b[2].abs() < 1e-15);
    let b = field_components(&FieldVector::from_degrees(4.04, 42.0, 85.0).unwrap());
    let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    assert!((norm - 4.04).abs() < 1e-12);
    assert!((b[2] - 4.04 * 42f64.to_radians().cos()).abs() < 1e-14);
    assert!((b[1] / b[0] - 85f64.to_radians().tan()).abs() < 1e-10);
}

#[test]
fn field_vector_rejects_bad_input() {
    assert!(FieldVector::new(-1.0, 0.0, 0.0).is_err());
    assert!(FieldVector::new(f64::INFINITY, 0.0, 0.0).is_err());
    assert!(FieldVector::new(1.0, f64::NAN, 0.0).is_err());
}

#[test]
fn matrix_constructors_validate_shape() {
    assert!(matches!(ComplexMatrix::from_row_major(2, &[ONE; 3]), Err(Error::Shape(_))));
    let m = from_na(&DMatrix::from_fn(4, 4, |i, j| C::new(i as f64, j as f64)));
    assert_eq!(m.dim(), 4);
    assert!(ComplexMatrix::from_nalgebra(DMatrix::<C>::zeros(2, 3)).is_err());
}
