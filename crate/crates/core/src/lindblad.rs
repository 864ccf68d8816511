//! Dissipative dynamics: density matrices, optical-pumping jump operators,
//! the Liouvillian superoperator, time propagation and steady states.
//!
//! Density matrices are vectorized by stacking columns, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)` and entry `(i, j)` of a `d×d` matrix sits
//! at index `j·d + i`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{Flagged, Warning};
use crate::error::{Error, Result};
use crate::hamiltonian::{Dephasing, InefficiencyModel, SystemParams};
use crate::linalg::{eigenvalues, eigh, expm, smallest_right_singular_vectors, solve};
use crate::spin_ops::{
    electron_op, electron_transition, kron, nuclear_op, spin_operators, ComplexMatrix, ElectronLevel,
    Spin, C64, ELECTRON_DIM, I, JOINT_DIM, NUCLEAR_DIM, ONE, ZERO,
};

use std::f64::consts::TAU;

/// Trace-one, Hermitian, positive semidefinite state of the joint system.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: ComplexMatrix,
}

/// Measured deviations of a matrix from the density-matrix invariants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDiagnostics {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl std::fmt::Display for StateDiagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "max|ρ−ρ†| = {:.3e}, |Tr ρ − 1| = {:.3e}, min eig = {:.3e}",
            self.hermiticity, self.trace_error, self.min_eigenvalue
        )
    }
}

impl StateDiagnostics {
    pub fn of(m: &ComplexMatrix) -> Self {
        let (ev, _) = eigh(m);
        Self {
            hermiticity: (m - &m.adjoint()).max_abs(),
            trace_error: (m.trace() - ONE).norm(),
            min_eigenvalue: ev.first().copied().unwrap_or(0.0),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.hermiticity <= DensityMatrix::HERMITIAN_TOL
            && self.trace_error <= DensityMatrix::TRACE_TOL
            && self.min_eigenvalue >= DensityMatrix::MIN_EIGENVALUE
    }
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const MIN_EIGENVALUE: f64 = -1e-9;

    /// Validates the invariants; the stored matrix is the Hermitian part.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.dim() != JOINT_DIM {
            return Err(Error::Shape(format!("density matrix must be {JOINT_DIM}x{JOINT_DIM}, got {}", m.dim())));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite("density matrix".into()));
        }
        let d = StateDiagnostics::of(&m);
        if !d.is_valid() {
            return Err(Error::InvalidParameter(format!("not a density matrix: {d}")));
        }
        Ok(Self { m: m.hermitian_part() })
    }

    pub fn maximally_mixed() -> Self {
        Self { m: ComplexMatrix::identity(JOINT_DIM).scale_real(1.0 / JOINT_DIM as f64) }
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        if psi.len() != JOINT_DIM {
            return Err(Error::Shape(format!("state vector must have {JOINT_DIM} entries")));
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidParameter("state vector has zero or non-finite norm".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self { m: ComplexMatrix::projector(&v) })
    }

    /// `ρ_e ⊗ ρ_n`
    pub fn product(electron: &ComplexMatrix, nuclear: &ComplexMatrix) -> Result<Self> {
        if electron.dim() != ELECTRON_DIM || nuclear.dim() != NUCLEAR_DIM {
            return Err(Error::Shape("product state needs a 3x3 electron and a 2x2 nuclear factor".into()));
        }
        Self::new(kron(electron, nuclear))
    }

    /// Electron pumped into `m_s = 0` with probability `η`, the remainder
    /// split evenly over `±1`; nucleus maximally mixed.
    pub fn pumped(efficiency: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::InvalidParameter(format!("pump efficiency {efficiency} outside [0, 1]")));
        }
        let rest = 0.5 * (1.0 - efficiency);
        let e = ComplexMatrix::from_real_diagonal(&[rest, efficiency, rest]);
        Ok(Self { m: kron(&e, &ComplexMatrix::identity(NUCLEAR_DIM).scale_real(0.5)) })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        StateDiagnostics::of(&self.m)
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    /// `Tr(ρ A)` for Hermitian `A`.
    pub fn expectation(&self, a: &ComplexMatrix) -> f64 {
        (&self.m * a).trace().re
    }

    /// Reduced nuclear state `Tr_e ρ`.
    pub fn nuclear_state(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(NUCLEAR_DIM, |a, b| {
            (0..ELECTRON_DIM).map(|e| self.m[(e * NUCLEAR_DIM + a, e * NUCLEAR_DIM + b)]).sum()
        })
    }

    /// Reduced electron state `Tr_n ρ`.
    pub fn electron_state(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(ELECTRON_DIM, |e, f| {
            (0..NUCLEAR_DIM).map(|a| self.m[(e * NUCLEAR_DIM + a, f * NUCLEAR_DIM + a)]).sum()
        })
    }

    /// Population of one bare electron level.
    pub fn level_population(&self, level: ElectronLevel) -> f64 {
        self.electron_state()[(level.index(), level.index())].re
    }
}

/// Optical pumping `m_s = ±1 → 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpModel {
    /// Γp, 1/µs
    pub rate: f64,
    /// η
    pub efficiency: f64,
    pub inefficiency: InefficiencyModel,
}

impl PumpModel {
    pub fn new(rate: f64, efficiency: f64) -> Result<Self> {
        let pm = Self { rate, efficiency, inefficiency: InefficiencyModel::Randomize };
        pm.validate()?;
        Ok(pm)
    }

    pub fn from_params(p: &SystemParams) -> Result<Self> {
        let pm = Self { rate: p.pump_rate, efficiency: p.pump_efficiency, inefficiency: p.inefficiency };
        pm.validate()?;
        Ok(pm)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rate.is_finite() || !self.efficiency.is_finite() {
            return Err(Error::NonFinite("pump model".into()));
        }
        if self.rate < 0.0 {
            return Err(Error::InvalidParameter("pump rate must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::InvalidParameter(format!("pump efficiency {} outside [0, 1]", self.efficiency)));
        }
        Ok(())
    }
}

/// A Lindblad channel `r·D[J]`.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpOperator {
    pub operator: ComplexMatrix,
    /// 1/µs
    pub rate: f64,
}

impl JumpOperator {
    pub fn new(operator: ComplexMatrix, rate: f64) -> Self {
        Self { operator, rate }
    }
}

/// Pumping channels, each acting as the identity on the nucleus.
///
/// The successful fraction gives `|0⟩⟨±1| ⊗ 1` at rate `η·Γp`. With
/// [`InefficiencyModel::Randomize`] the remainder gives `|m'⟩⟨m| ⊗ 1` for
/// `m = ±1` and each of the three `m'`, at rate `(1 − η)·Γp / 3`. Channels
/// with zero rate are omitted.
pub fn pump_jump_operators(pm: &PumpModel) -> Vec<JumpOperator> {
    let mut out = Vec::new();
    let good = pm.efficiency * pm.rate;
    if good > 0.0 {
        for from in [ElectronLevel::Minus, ElectronLevel::Plus] {
            out.push(JumpOperator::new(electron_transition(from, ElectronLevel::Zero), good));
        }
    }
    let bad = (1.0 - pm.efficiency) * pm.rate / 3.0;
    if bad > 0.0 && pm.inefficiency == InefficiencyModel::Randomize {
        for from in [ElectronLevel::Minus, ElectronLevel::Plus] {
            for to in ElectronLevel::ALL {
                out.push(JumpOperator::new(electron_transition(from, to), bad));
            }
        }
    }
    out
}

/// Optional pure dephasing: `Sz ⊗ 1` at the electron rate and `2·1 ⊗ Iz` at
/// the nuclear rate.
pub fn dephasing_jump_operators(d: &Dephasing) -> Vec<JumpOperator> {
    let mut out = Vec::new();
    let [_, _, sz] = spin_operators(Spin::One);
    let [_, _, iz] = spin_operators(Spin::Half);
    if d.electron > 0.0 {
        out.push(JumpOperator::new(electron_op(&sz), d.electron));
    }
    if d.nuclear > 0.0 {
        out.push(JumpOperator::new(nuclear_op(&iz).scale_real(2.0), d.nuclear));
    }
    out
}

/// Every incoherent channel implied by the parameters.
pub fn jump_operators(p: &SystemParams) -> Result<Vec<JumpOperator>> {
    let mut jumps = pump_jump_operators(&PumpModel::from_params(p)?);
    jumps.extend(dephasing_jump_operators(&p.dephasing));
    Ok(jumps)
}

/// Column-stacked `vec(ρ)`.
pub fn vectorize(m: &ComplexMatrix) -> Vec<C64> {
    let d = m.dim();
    (0..d * d).map(|k| m[(k % d, k / d)]).collect()
}

pub fn unvectorize(v: &[C64]) -> Result<ComplexMatrix> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::Shape(format!("vector of length {} is not a vectorized square matrix", v.len())));
    }
    Ok(ComplexMatrix::from_fn(d, |i, j| v[j * d + i]))
}

/// Superoperator acting on column-stacked density matrices, 1/µs.
#[derive(Clone, Debug, PartialEq)]
pub struct Liouvillian {
    matrix: ComplexMatrix,
}

/// Generator of `dρ/dt = −i·2π[H, ρ] + Σ r (J ρ J† − ½{J†J, ρ})` with `H` in
/// MHz and `t` in µs.
pub fn build_liouvillian(h: &ComplexMatrix, jumps: &[JumpOperator]) -> Result<Liouvillian> {
    let d = h.dim();
    if !h.is_finite() {
        return Err(Error::NonFinite("Hamiltonian".into()));
    }
    let dev = (h - &h.adjoint()).max_abs();
    let tol = 1e-10 * h.max_abs().max(1.0);
    if dev > tol {
        return Err(Error::NotHermitian { deviation: dev, tolerance: tol });
    }
    let id = ComplexMatrix::identity(d);
    let mut l = (&kron(&id, h) - &kron(&h.transpose(), &id)).scale(-I * TAU);
    for j in jumps {
        if j.operator.dim() != d {
            return Err(Error::Shape(format!("jump operator is {0}x{0}, Hamiltonian {d}x{d}", j.operator.dim())));
        }
        if !j.rate.is_finite() || j.rate < 0.0 {
            return Err(Error::InvalidParameter(format!("jump rate {} must be finite and non-negative", j.rate)));
        }
        let jj = &j.operator.adjoint() * &j.operator;
        let term = &(&kron(&j.operator.conj(), &j.operator) - &kron(&id, &jj).scale_real(0.5))
            - &kron(&jj.transpose(), &id).scale_real(0.5);
        l += &term.scale_real(j.rate);
    }
    Ok(Liouvillian { matrix: l })
}

impl Liouvillian {
    /// Wraps an arbitrary superoperator matrix.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let d = (matrix.dim() as f64).sqrt().round() as usize;
        if d * d != matrix.dim() {
            return Err(Error::Shape(format!("superoperator dimension {} is not a square", matrix.dim())));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Hilbert-space dimension.
    pub fn hilbert_dim(&self) -> usize {
        (self.matrix.dim() as f64).sqrt().round() as usize
    }

    /// `L[ρ]` as a matrix.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        unvectorize(&self.matrix.apply(&vectorize(rho)))
    }

    /// Largest `|Tr L[E_ij]|`; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.hilbert_dim();
        let n = self.matrix.dim();
        (0..n)
            .map(|col| (0..d).map(|k| self.matrix[(k * d + k, col)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }

    /// `exp(L t)`.
    pub fn propagator(&self, t: f64) -> Result<Propagator> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!("propagation time {t} must be finite and non-negative")));
        }
        let a = self.matrix.scale_real(t);
        let matrix = if self.trace_defect() <= 1e-9 * self.matrix.max_abs().max(1.0) {
            // Exponentiate in an orthonormal basis whose first vector is
            // vec(I)/√d. There the trace row of the generator is zero and
            // stays exactly zero through scaling and squaring, so the trace
            // is preserved to rounding error however large ‖L t‖ is.
            let h = self.trace_reflector();
            let mut b = &(&h * &a) * &h;
            for j in 0..b.dim() {
                b[(0, j)] = ZERO;
            }
            &(&h * &expm(&b)?) * &h
        } else {
            expm(&a)?
        };
        Ok(Propagator { matrix, time: t })
    }

    /// Householder reflection swapping `e₀` and `vec(I)/√d`.
    fn trace_reflector(&self) -> ComplexMatrix {
        let d = self.hilbert_dim();
        let n = self.matrix.dim();
        let w = 1.0 / (d as f64).sqrt();
        let mut u = vec![0.0; n];
        u[0] = 1.0;
        for k in 0..d {
            u[k * d + k] -= w;
        }
        let norm2: f64 = u.iter().map(|x| x * x).sum();
        if norm2 == 0.0 {
            return ComplexMatrix::identity(n);
        }
        ComplexMatrix::from_fn(n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            C64::new(delta - 2.0 * u[i] * u[j] / norm2, 0.0)
        })
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        eigenvalues(&self.matrix)
    }
}

/// Precomputed `exp(L t)` for repeated application.
#[derive(Clone, Debug)]
pub struct Propagator {
    matrix: ComplexMatrix,
    time: f64,
}

impl Propagator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Applies the map and checks the density-matrix invariants of the result.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = unvectorize(&self.matrix.apply(&vectorize(rho.matrix())))?;
        if !out.is_finite() {
            return Err(Error::Numerical(format!("non-finite state after propagating for {} µs", self.time)));
        }
        let d = StateDiagnostics::of(&out);
        if !d.is_valid() {
            return Err(Error::Numerical(format!("invalid state after propagating for {} µs: {d}", self.time)));
        }
        Ok(DensityMatrix { m: out.hermitian_part() })
    }
}

/// `ρ(t) = unvec(exp(L t) vec(ρ₀))`.
pub fn propagate(rho0: &DensityMatrix, l: &Liouvillian, t: f64) -> Result<DensityMatrix> {
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    l.propagator(t)?.apply(rho0)
}

/// Eigenvalues with `|λ|` below this count toward the null space.
pub const NULL_TOLERANCE: f64 = 1e-6;
/// Required `‖L vec(ρ)‖` of a returned steady state.
pub const STEADY_RESIDUAL: f64 = 1e-9;

/// Stationary state of `L`.
///
/// If the null space is one-dimensional its basis vector is normalized to
/// unit trace. Otherwise the maximally mixed state is projected onto the null
/// space along the remaining generalized eigenspaces (its infinite-time
/// limit), and a [`Warning::NonUniqueSteadyState`] is attached.
pub fn steady_state(l: &Liouvillian) -> Result<Flagged<DensityMatrix>> {
    let ev = l.eigenvalues()?;
    let nullity = ev.iter().filter(|z| z.norm() < NULL_TOLERANCE).count();
    if nullity == 0 {
        let closest = ev.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        return Err(Error::DegenerateGenerator { closest, tolerance: NULL_TOLERANCE });
    }
    let d = l.hilbert_dim();
    let (right, _) = smallest_right_singular_vectors(l.matrix(), nullity)?;
    let mut warnings = Vec::new();
    let v: Vec<C64> = if nullity == 1 {
        right[0].clone()
    } else {
        warnings.push(Warning::NonUniqueSteadyState { nullity });
        let (left, _) = smallest_right_singular_vectors(&l.matrix().adjoint(), nullity)?;
        let mixed = vectorize(&ComplexMatrix::identity(d).scale_real(1.0 / d as f64));
        project_onto_null_space(&right, &left, &mixed)?
    };
    let m = unvectorize(&v)?;
    let tr = m.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::Numerical("steady-state null vector has zero trace".into()));
    }
    let m = m.scale(ONE / tr).hermitian_part();
    let residual = l.matrix().apply(&vectorize(&m)).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if residual > STEADY_RESIDUAL {
        return Err(Error::Numerical(format!("steady-state residual {residual:.3e} exceeds {STEADY_RESIDUAL:e}")));
    }
    let diag = StateDiagnostics::of(&m);
    if !diag.is_valid() {
        return Err(Error::Numerical(format!("steady state violates density-matrix invariants: {diag}")));
    }
    Ok(Flagged::new(DensityMatrix { m }, warnings))
}

/// `V (W†V)⁻¹ W† x`, falling back to the orthogonal projection `V V† x`
/// when `W†V` is singular.
fn project_onto_null_space(right: &[Vec<C64>], left: &[Vec<C64>], x: &[C64]) -> Result<Vec<C64>> {
    let k = right.len();
    let n = x.len();
    let gram = ComplexMatrix::from_fn(k, |i, j| (0..n).map(|r| left[i][r].conj() * right[j][r]).sum());
    let wx = nalgebra::DMatrix::from_fn(k, 1, |i, _| (0..n).map(|r| left[i][r].conj() * x[r]).sum::<C64>());
    let coeffs: Vec<C64> = match solve(&gram, &wx) {
        Ok(c) => c.iter().copied().collect(),
        Err(_) => right.iter().map(|v| (0..n).map(|r| v[r].conj() * x[r]).sum()).collect(),
    };
    Ok((0..n).map(|r| (0..k).map(|j| coeffs[j] * right[j][r]).sum()).collect())
}

/// Smallest `|Re λ|` over the eigenvalues of `L` outside the null space;
/// the slowest relaxation rate, 1/µs.
pub fn spectral_gap(l: &Liouvillian) -> Result<f64> {
    let ev = l.eigenvalues()?;
    let gap = ev.iter().filter(|z| z.norm() >= NULL_TOLERANCE).map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    if gap.is_finite() {
        Ok(gap)
    } else {
        Err(Error::Numerical("generator has no non-zero eigenvalue".into()))
    }
}
