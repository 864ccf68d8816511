//! Dense complex operator algebra for the coupled electron–nucleus system.
//!
//! Everything here is small (at most 36×36), so matrices are always dense.
//! The joint Hilbert space is ordered electron-major: index `e * 2 + n`
//! with electron states `m_s = +1, 0, -1` and nuclear states `↑, ↓`.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dimension of the electron spin (S = 1).
pub const ELECTRON_DIM: usize = 3;
/// Dimension of the nuclear spin (I = 1/2).
pub const NUCLEAR_DIM: usize = 2;
/// Dimension of the joint electron ⊗ nucleus space.
pub const JOINT_DIM: usize = ELECTRON_DIM * NUCLEAR_DIM;

/// Square dense complex matrix.
///
/// Construction from raw data takes row-major entries; storage is delegated
/// to `nalgebra`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { inner: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: DMatrix::identity(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { inner: DMatrix::from_fn(dim, dim, f) }
    }

    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let m = Self::from_fn(dim, |i, j| entries[i * dim + j]);
        if !m.is_finite() {
            return Err(Error::NonFinite("matrix entries".into()));
        }
        Ok(m)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("rows must all have length equal to the row count".into()));
        }
        Self::from_row_major(
            dim,
            &rows.iter().flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0))).collect::<Vec<_>>(),
        )
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// `|ket⟩⟨bra|`
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        assert_eq!(ket.len(), bra.len(), "outer product of vectors with different lengths");
        Self::from_fn(ket.len(), |i, j| ket[i] * bra[j].conj())
    }

    /// Projector onto a (not necessarily normalized) vector.
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    /// Wraps an existing square `nalgebra` matrix.
    pub fn from_nalgebra(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::Shape(format!("{}x{} is not square", inner.nrows(), inner.ncols())));
        }
        Ok(Self { inner })
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let n = self.dim();
        (0..n * n).map(|k| self.inner[(k / n, k % n)]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.inner.column(j).iter().copied().collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.inner[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        Self { inner: self.inner.transpose() }
    }

    pub fn conj(&self) -> Self {
        Self { inner: self.inner.map(|z| z.conj()) }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { inner: &self.inner * s }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `[a, b] = ab − ba`
    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    /// `{a, b} = ab + ba`
    pub fn anticommutator(&self, other: &Self) -> Self {
        self * other + other * self
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn one_norm(&self) -> f64 {
        self.inner
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (i..n).all(|j| (self.inner[(i, j)] - self.inner[(j, i)].conj()).norm() <= tol))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let p = &self.adjoint() * self;
        (&p - &Self::identity(self.dim())).max_abs() <= tol
    }

    /// Largest entrywise deviation from another matrix of the same size.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    /// Hermitian part `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// `⟨u|A|v⟩`
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            let mut row = ZERO;
            for j in 0..n {
                row += self.inner[(i, j)] * v[j];
            }
            acc += u[i].conj() * row;
        }
        acc
    }

    /// Applies the matrix to a vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.inner[(i, j)] * v[j]).sum()).collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.inner[idx]
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { inner: &self.inner $op &rhs.inner }
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { inner: self.inner $op rhs.inner }
            }
        }
        impl $tr<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { inner: self.inner $op &rhs.inner }
            }
        }
        impl $tr<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { inner: &self.inner $op rhs.inner }
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.inner += &rhs.inner;
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { inner: -self.inner }
    }
}

/// Spin quantum numbers supported by [`spin_operators`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    Half,
    One,
}

impl Spin {
    /// Parses `s` given as a float (`0.5` or `1.0`).
    pub fn from_f64(s: f64) -> Result<Self> {
        if s == 0.5 {
            Ok(Spin::Half)
        } else if s == 1.0 {
            Ok(Spin::One)
        } else {
            Err(Error::UnsupportedSpin(s))
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Spin::Half => 2,
            Spin::One => 3,
        }
    }

    fn value(self) -> f64 {
        match self {
            Spin::Half => 0.5,
            Spin::One => 1.0,
        }
    }
}

/// Cartesian spin operators `(Sx, Sy, Sz)` in units of ħ, basis ordered
/// `m = s, s-1, …, -s`.
pub fn spin_operators(s: Spin) -> [ComplexMatrix; 3] {
    let n = s.dim();
    let sv = s.value();
    let m = |k: usize| sv - k as f64;
    // ⟨m+1|S+|m⟩ = sqrt(s(s+1) - m(m+1))
    let mut splus = ComplexMatrix::zeros(n);
    for k in 1..n {
        let mk = m(k);
        splus[(k - 1, k)] = C64::new((sv * (sv + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
    }
    let sminus = splus.adjoint();
    let sx = (&splus + &sminus).scale_real(0.5);
    let sy = (&splus - &sminus).scale(C64::new(0.0, -0.5));
    let sz = ComplexMatrix::from_real_diagonal(&(0..n).map(m).collect::<Vec<_>>());
    [sx, sy, sz]
}

/// Kronecker product; `kron(a, b)[(i·db + k, j·db + l)] = a[i,j]·b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let db = b.dim();
    ComplexMatrix::from_fn(a.dim() * db, |r, c| a[(r / db, c / db)] * b[(r % db, c % db)])
}

/// Lifts an electron operator into the joint space (`A ⊗ 1`).
pub fn electron_op(a: &ComplexMatrix) -> ComplexMatrix {
    kron(a, &ComplexMatrix::identity(NUCLEAR_DIM))
}

/// Lifts a nuclear operator into the joint space (`1 ⊗ B`).
pub fn nuclear_op(b: &ComplexMatrix) -> ComplexMatrix {
    kron(&ComplexMatrix::identity(ELECTRON_DIM), b)
}

/// Electron spin projection labels in basis order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum ElectronLevel {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "-1")]
    Minus,
}

impl ElectronLevel {
    pub const ALL: [ElectronLevel; 3] = [ElectronLevel::Plus, ElectronLevel::Zero, ElectronLevel::Minus];

    /// Index in the spin-1 basis (`+1, 0, -1`).
    pub fn index(self) -> usize {
        match self {
            ElectronLevel::Plus => 0,
            ElectronLevel::Zero => 1,
            ElectronLevel::Minus => 2,
        }
    }

    pub fn ms(self) -> i32 {
        match self {
            ElectronLevel::Plus => 1,
            ElectronLevel::Zero => 0,
            ElectronLevel::Minus => -1,
        }
    }

    /// `|m⟩⟨m|` on the electron alone.
    pub fn electron_projector(self) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(ELECTRON_DIM);
        p[(self.index(), self.index())] = ONE;
        p
    }
}

impl std::fmt::Display for ElectronLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ElectronLevel::Plus => write!(f, "+1"),
            ElectronLevel::Zero => write!(f, "0"),
            ElectronLevel::Minus => write!(f, "-1"),
        }
    }
}

/// `|to⟩⟨from| ⊗ 1_nuc`
pub fn electron_transition(from: ElectronLevel, to: ElectronLevel) -> ComplexMatrix {
    let mut t = ComplexMatrix::zeros(ELECTRON_DIM);
    t[(to.index(), from.index())] = ONE;
    electron_op(&t)
}

/// The operator set of the joint space, built once.
#[derive(Clone, Debug)]
pub struct JointOperators {
    /// Electron `Sx, Sy, Sz` lifted to the joint space.
    pub s: [ComplexMatrix; 3],
    /// Nuclear `Ix, Iy, Iz` lifted to the joint space.
    pub i: [ComplexMatrix; 3],
}

impl JointOperators {
    pub fn new() -> Self {
        let s = spin_operators(Spin::One).map(|m| electron_op(&m));
        let i = spin_operators(Spin::Half).map(|m| nuclear_op(&m));
        Self { s, i }
    }

    /// `1_e ⊗ (n·I)`
    pub fn nuclear_along(&self, axis: [f64; 3]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(JOINT_DIM);
        for (k, a) in axis.iter().enumerate() {
            out += &self.i[k].scale_real(*a);
        }
        out
    }
}

impl Default for JointOperators {
    fn default() -> Self {
        Self::new()
    }
}

/// Magnetic field in spherical coordinates relative to the NV axis.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FieldVector {
    /// Magnitude in mT.
    pub magnitude_mt: f64,
    /// Polar angle from the NV axis, radians, `[0, π]`.
    pub theta: f64,
    /// Azimuth from the NV-frame x axis, radians, `[0, 2π)`.
    pub phi: f64,
}

impl FieldVector {
    pub fn new(magnitude_mt: f64, theta: f64, phi: f64) -> Result<Self> {
        let f = Self { magnitude_mt, theta, phi };
        f.validate()?;
        Ok(f)
    }

    pub fn from_degrees(magnitude_mt: f64, theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(magnitude_mt, theta_deg.to_radians(), phi_deg.to_radians().rem_euclid(std::f64::consts::TAU))
    }

    pub fn aligned(magnitude_mt: f64) -> Self {
        Self { magnitude_mt, theta: 0.0, phi: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.magnitude_mt.is_finite() && self.theta.is_finite() && self.phi.is_finite()) {
            return Err(Error::NonFinite("field vector".into()));
        }
        if self.magnitude_mt < 0.0 {
            return Err(Error::InvalidParameter(format!("field magnitude {} mT is negative", self.magnitude_mt)));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return Err(Error::InvalidParameter(format!("polar angle {} rad outside [0, π]", self.theta)));
        }
        if !(0.0..std::f64::consts::TAU).contains(&self.phi) {
            return Err(Error::InvalidParameter(format!("azimuth {} rad outside [0, 2π)", self.phi)));
        }
        Ok(())
    }

    /// Same direction, different magnitude.
    pub fn with_magnitude(&self, magnitude_mt: f64) -> Self {
        Self { magnitude_mt, ..*self }
    }

    /// Builds a field vector from NV-frame Cartesian components in mT.
    pub fn from_components(b: [f64; 3]) -> Self {
        let mag = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        if mag == 0.0 {
            return Self::aligned(0.0);
        }
        let theta = (b[2] / mag).clamp(-1.0, 1.0).acos();
        let phi = b[1].atan2(b[0]).rem_euclid(std::f64::consts::TAU);
        // rem_euclid can round up to exactly TAU
        let phi = if phi >= std::f64::consts::TAU { 0.0 } else { phi };
        Self { magnitude_mt: mag, theta, phi }
    }
}

/// NV-frame Cartesian components `(Bx, By, Bz)`, in the magnitude's units.
pub fn field_components(f: &FieldVector) -> [f64; 3] {
    let (st, ct) = f.theta.sin_cos();
    let (sp, cp) = f.phi.sin_cos();
    [f.magnitude_mt * st * cp, f.magnitude_mt * st * sp, f.magnitude_mt * ct]
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}
