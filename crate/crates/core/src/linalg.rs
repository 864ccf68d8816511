//! Matrix functions and decompositions on [`ComplexMatrix`].
//!
//! The exponential is a Padé(13) scaling-and-squaring implementation;
//! eigen- and singular-value decompositions are delegated to `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::spin_ops::{ComplexMatrix, C64, ZERO};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// `exp(A)` by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.dim();
    if n == 0 {
        return Ok(a.clone());
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix exponential argument".into()));
    }
    let norm = a.one_norm();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.as_nalgebra() * C64::new(2f64.powi(-s), 0.0);

    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let c = |k: usize| C64::new(PADE13[k], 0.0);

    let u_inner = &a6 * (&a6 * c(13) + &a4 * c(11) + &a2 * c(9)) + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &id * c(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * c(12) + &a4 * c(10) + &a2 * c(8)) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &id * c(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::Numerical("singular denominator in Padé approximant".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    ComplexMatrix::from_nalgebra(r)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
///
/// Column `k` of the returned matrix is the eigenvector of eigenvalue `k`.
/// Each eigenvector's phase is fixed so that its largest component is real
/// and positive.
pub fn eigh(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let herm = h.hermitian_part();
    let eig = SymmetricEigen::new(herm.into_nalgebra());
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let pivot = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(ZERO);
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..n {
            vectors[(row, col)] = v[row] * phase;
        }
    }
    (values, vectors)
}

/// Eigenvalues of a general complex matrix (via the complex Schur form).
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    let schur = nalgebra::Schur::try_new(a.as_nalgebra().clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Orthonormal basis of the `k`-dimensional subspace belonging to the `k`
/// smallest singular values, returned as columns, together with all singular
/// values in ascending order.
pub fn smallest_right_singular_vectors(a: &ComplexMatrix, k: usize) -> Result<(Vec<Vec<C64>>, Vec<f64>)> {
    let svd = a.as_nalgebra().clone().svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD did not produce right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    let vecs = order
        .iter()
        .take(k)
        .map(|&r| v_t.row(r).iter().map(|z| z.conj()).collect())
        .collect();
    let sv = order.iter().map(|&r| svd.singular_values[r]).collect();
    Ok((vecs, sv))
}

/// Solves `A x = b` for a square system.
pub fn solve(a: &ComplexMatrix, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    a.as_nalgebra()
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Numerical("singular linear system".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_ops::{spin_operators, Spin, I};

    #[test]
    fn expm_zero_is_identity() {
        let e = expm(&ComplexMatrix::zeros(4)).unwrap();
        assert_eq!(e, ComplexMatrix::identity(4));
    }

    #[test]
    fn expm_diagonal() {
        let d = ComplexMatrix::from_diagonal(&[C64::new(1.0, 2.0), C64::new(-30.0, 0.5), C64::new(0.0, 400.0)]);
        let e = expm(&d).unwrap();
        for i in 0..3 {
            let want = d[(i, i)].exp();
            assert!((e[(i, i)] - want).norm() < 1e-12 * want.norm().max(1.0), "{i}");
        }
    }

    #[test]
    fn expm_spin_rotation() {
        // exp(-i θ σx / 2) = cos(θ/2) - i sin(θ/2) σx
        let [sx, _, _] = spin_operators(Spin::Half);
        let theta = 2.3f64;
        let e = expm(&sx.scale(-I * theta)).unwrap();
        let (s, c) = (theta / 2.0).sin_cos();
        let want = ComplexMatrix::from_fn(2, |i, j| if i == j { C64::new(c, 0.0) } else { C64::new(0.0, -s) });
        assert!(e.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn expm_nilpotent() {
        let mut n = ComplexMatrix::zeros(3);
        n[(0, 1)] = C64::new(2.0, 0.0);
        n[(1, 2)] = C64::new(0.0, 3.0);
        let e = expm(&n).unwrap();
        // I + N + N²/2
        let want = &(&ComplexMatrix::identity(3) + &n) + &(&n * &n).scale_real(0.5);
        assert!(e.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn expm_large_norm_unitary() {
        let [sx, sy, sz] = spin_operators(Spin::One);
        let h = &(&sz * &sz).scale_real(2870.0) + &(&sx.scale_real(50.0) + &sy.scale_real(-13.0));
        let u = expm(&h.scale(-I * std::f64::consts::TAU * 3.7)).unwrap();
        assert!(u.is_unitary(1e-9));
    }

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let [sx, sy, sz] = spin_operators(Spin::One);
        let h = &(&sz * &sz).scale_real(3.0) + &(&sx.scale_real(0.7) + &sy.scale_real(0.2));
        let (vals, vecs) = eigh(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = ComplexMatrix::from_real_diagonal(&vals);
        let rec = &(&vecs * &d) * &vecs.adjoint();
        assert!(rec.max_abs_diff(&h) < 1e-12);
        assert!(vecs.is_unitary(1e-12));
    }

    #[test]
    fn general_eigenvalues_of_triangular() {
        let mut t = ComplexMatrix::from_diagonal(&[C64::new(1.0, 1.0), C64::new(-2.0, 0.0), C64::new(0.0, 5.0)]);
        t[(0, 2)] = C64::new(3.0, 0.0);
        let mut ev = eigenvalues(&t).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - C64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((ev[1] - C64::new(0.0, 5.0)).norm() < 1e-12);
        assert!((ev[2] - C64::new(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn null_vector_of_rank_deficient() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        let (v, sv) = smallest_right_singular_vectors(&a, 1).unwrap();
        assert!(sv[0] < 1e-12);
        let r = a.apply(&v[0]);
        assert!(r.iter().all(|z| z.norm() < 1e-12));
    }
}
