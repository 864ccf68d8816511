//! Shared fixtures and independent numerical oracles for the integration
//! tests. Nothing here goes through the library's Liouvillian, propagator
//! or rotating-frame code.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rand::Rng;

use nv_dnp::hamiltonian::{HyperfineTensor, InefficiencyModel, SystemParams};
use nv_dnp::lindblad::JumpOperator;
use nv_dnp::spin_ops::{ComplexMatrix, FieldVector};

pub type M = DMatrix<C>;
pub type V = DVector<C>;

/// First-shell ¹³C tensor: axially symmetric, A∥ = 199.7 MHz and
/// A⊥ = 120.3 MHz (Felton et al., PRB 79, 075203), unique axis at 106°
/// from the NV axis in the plane 120° from x.
pub fn fixture_tensor() -> HyperfineTensor {
    HyperfineTensor::axial(199.7, 120.3, 106f64.to_radians(), 120f64.to_radians()).unwrap()
}

pub fn fixture_field() -> FieldVector {
    FieldVector::from_degrees(4.04, 42.0, 85.0).unwrap()
}

/// 4.04 mT at θ = 42°, φ = 85°, pumping 1/(3 µs) at 90 %, drive off.
pub fn fixture_params() -> SystemParams {
    SystemParams::new(fixture_field(), fixture_tensor())
}

pub fn to_na(m: &ComplexMatrix) -> M {
    let d = m.dim();
    M::from_fn(d, d, |i, j| m[(i, j)])
}

pub fn from_na(m: &M) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), |i, j| m[(i, j)])
}

pub fn max_abs_diff(a: &M, b: &M) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `dρ/dt` of the master equation, written out term by term.
pub struct MasterEquation {
    h: M,
    jumps: Vec<(M, M, f64)>,
}

impl MasterEquation {
    pub fn new(h: &ComplexMatrix, jumps: &[JumpOperator]) -> Self {
        let jumps = jumps
            .iter()
            .map(|j| {
                let op = to_na(&j.operator);
                let jdj = op.adjoint() * &op;
                (op, jdj, j.rate)
            })
            .collect();
        Self { h: to_na(h), jumps }
    }

    pub fn rhs(&self, rho: &M) -> M {
        let mi = C::new(0.0, -2.0 * std::f64::consts::PI);
        let mut out = (&self.h * rho - rho * &self.h) * mi;
        for (j, jdj, g) in &self.jumps {
            out += (j * rho * j.adjoint() - (jdj * rho + rho * jdj) * C::new(0.5, 0.0)) * C::new(*g, 0.0);
        }
        out
    }
}

/// Adaptive Dormand–Prince 5(4) integration of `dx/dt = L x` from `x0`
/// over `[0, t]`, with mixed absolute/relative error control.
pub fn dopri5(l: &M, x0: &V, t: f64, rtol: f64, atol: f64) -> V {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let n = x0.len();
    let rows: Vec<C> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| l[(i, j)]).collect();
    let apply = |x: &V, y: &mut V| {
        for (i, row) in rows.chunks_exact(n).enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (a, b) in row.iter().zip(x.iter()) {
                re += a.re * b.re - a.im * b.im;
                im += a.re * b.im + a.im * b.re;
            }
            y[i] = C::new(re, im);
        }
    };
    let zero = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    let mut x = x0.clone();
    let mut k: Vec<V> = vec![V::zeros(n); 7];
    let mut tmp = V::zeros(n);
    let mut err = V::zeros(n);
    apply(&x, &mut k[0]);
    let mut now = 0.0;
    let mut h = (t / 100.0).min(1e-4);
    while now < t {
        if now + h > t {
            h = t - now;
        }
        for s in 0..6 {
            tmp.copy_from(&x);
            for (j, a) in A[s].iter().enumerate().take(s + 1) {
                if *a != 0.0 {
                    tmp.axpy(C::new(h * a, 0.0), &k[j], one);
                }
            }
            apply(&tmp, &mut k[s + 1]);
        }
        // tmp holds the fifth-order solution, k[6] its derivative.
        err.fill(zero);
        for (j, e) in E.iter().enumerate() {
            if *e != 0.0 {
                err.axpy(C::new(h * e, 0.0), &k[j], one);
            }
        }
        let ratio = err
            .iter()
            .zip(x.iter().zip(tmp.iter()))
            .map(|(e, (a, b))| e.norm() / (atol + rtol * a.norm().max(b.norm())))
            .fold(0.0, f64::max);
        if ratio <= 1.0 {
            now += h;
            std::mem::swap(&mut x, &mut tmp);
            k.swap(0, 6);
        }
        h *= if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
    }
    x
}

/// `exp(L·τ)` column by column from [`dopri5`].
pub fn ode_propagator(l: &M, tau: f64, rtol: f64, atol: f64) -> M {
    let n = l.nrows();
    let mut out = M::zeros(n, n);
    for c in 0..n {
        let mut e = V::zeros(n);
        e[c] = C::new(1.0, 0.0);
        out.set_column(c, &dopri5(l, &e, tau, rtol, atol));
    }
    out
}

/// `exp(L·t)` as `exp(L·t/2^k)^(2^k)`, the short-time factor from the ODE.
pub fn ode_propagator_squared(l: &M, t: f64, k: u32, rtol: f64, atol: f64) -> M {
    let mut p = ode_propagator(l, t / 2f64.powi(k as i32), rtol, atol);
    for _ in 0..k {
        p = &p * &p;
    }
    p
}

/// Column-stacking superoperator of the master equation, assembled here
/// from Kronecker products.
pub fn superoperator(h: &M, jumps: &[(M, f64)]) -> M {
    let d = h.nrows();
    let id = M::identity(d, d);
    let mi = C::new(0.0, -2.0 * std::f64::consts::PI);
    let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * mi;
    for (j, g) in jumps {
        let jdj = j.adjoint() * j;
        let g = C::new(*g, 0.0);
        l += (j.conjugate().kronecker(j) - id.kronecker(&jdj) * C::new(0.5, 0.0) - jdj.transpose().kronecker(&id) * C::new(0.5, 0.0)) * g;
    }
    l
}

pub fn vec_of(m: &M) -> V {
    let d = m.nrows();
    V::from_fn(d * d, |k, _| m[(k % d, k / d)])
}

pub fn unvec_of(v: &V) -> M {
    let d = (v.len() as f64).sqrt().round() as usize;
    M::from_fn(d, d, |i, j| v[j * d + i])
}

/// Superoperator of a library Hamiltonian and jump list.
pub fn superoperator_of(h: &ComplexMatrix, jumps: &[JumpOperator]) -> M {
    let jumps: Vec<(M, f64)> = jumps.iter().map(|j| (to_na(&j.operator), j.rate)).collect();
    superoperator(&to_na(h), &jumps)
}

/// Lab-frame evolution under `H + √2·Ω·cos(2πωt)·Sx` with the bare jump
/// operators, without any rotating-wave approximation.
///
/// The one-period propagator is built with fixed-step RK4 on the
/// superoperator and raised to the number of whole periods by repeated
/// squaring; the remaining fraction of a period is integrated directly.
pub struct LabFrameOracle {
    l0: M,
    ld: M,
    omega: f64,
    steps_per_period: usize,
}

impl LabFrameOracle {
    pub fn new(h: &ComplexMatrix, sx: &ComplexMatrix, rabi: f64, omega: f64, jumps: &[JumpOperator], steps_per_period: usize) -> Self {
        let jumps: Vec<(M, f64)> = jumps.iter().map(|j| (to_na(&j.operator), j.rate)).collect();
        let l0 = superoperator(&to_na(h), &jumps);
        let v = to_na(sx) * C::new(std::f64::consts::SQRT_2 * rabi, 0.0);
        let ld = superoperator(&v, &[]);
        Self { l0, ld, omega, steps_per_period }
    }

    fn generator(&self, t: f64) -> M {
        &self.l0 + &self.ld * C::new((2.0 * std::f64::consts::PI * self.omega * t).cos(), 0.0)
    }

    /// RK4 propagator from 0 to `t_end ≤ one period`.
    fn partial_period(&self, t_end: f64) -> M {
        let n = self.l0.nrows();
        let period = 1.0 / self.omega;
        let steps = ((t_end / period) * self.steps_per_period as f64).ceil().max(1.0) as usize;
        let h = t_end / steps as f64;
        let r = |x: f64| C::new(x, 0.0);
        let mut phi = M::identity(n, n);
        for k in 0..steps {
            let t = k as f64 * h;
            let la = self.generator(t);
            let lb = self.generator(t + 0.5 * h);
            let lc = self.generator(t + h);
            let k1 = &la * &phi;
            let k2 = &lb * (&phi + &k1 * r(0.5 * h));
            let k3 = &lb * (&phi + &k2 * r(0.5 * h));
            let k4 = &lc * (&phi + &k3 * r(h));
            phi += (k1 + (k2 + k3) * r(2.0) + k4) * r(h / 6.0);
        }
        phi
    }

    pub fn propagate(&self, rho0: &M, t: f64) -> M {
        let period = 1.0 / self.omega;
        let whole = (t / period).floor() as u64;
        let rest = t - whole as f64 * period;
        let one = self.partial_period(period);
        let mut acc = M::identity(one.nrows(), one.ncols());
        let mut base = one;
        let mut e = whole;
        while e > 0 {
            if e & 1 == 1 {
                acc = &base * &acc;
            }
            base = &base * &base;
            e >>= 1;
        }
        let total = if rest > 0.0 { self.partial_period(rest) * acc } else { acc };
        unvec_of(&(total * vec_of(rho0)))
    }
}

/// A random physically-motivated parameter set: field direction and
/// strength away from the ground-state anti-crossing, random axial tensor,
/// drive near a random allowed transition, pumping and dephasing rates.
pub fn random_params<R: Rng>(rng: &mut R) -> SystemParams {
    let field = FieldVector::new(
        rng.random_range(0.5..30.0),
        rng.random_range(0.0..std::f64::consts::PI),
        rng.random_range(0.0..2.0 * std::f64::consts::PI),
    )
    .unwrap();
    let a = HyperfineTensor::axial(
        rng.random_range(-50.0..250.0),
        rng.random_range(-50.0..150.0),
        rng.random_range(0.0..std::f64::consts::PI),
        rng.random_range(0.0..2.0 * std::f64::consts::PI),
    )
    .unwrap();
    let mut p = SystemParams::new(field, a);
    p.rabi = rng.random_range(0.1..30.0);
    p.pump_rate = rng.random_range(0.05..2.0);
    p.pump_efficiency = rng.random_range(0.5..=1.0);
    p.inefficiency = if rng.random_bool(0.5) { InefficiencyModel::Randomize } else { InefficiencyModel::Loss };
    p.dephasing.electron = rng.random_range(0.0..0.2);
    p.dephasing.nuclear = rng.random_range(0.0..0.05);
    p
}

/// Haar-ish random mixed state: `G G† / Tr`, `G` with Gaussian-like entries.
pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = M::from_fn(d, d, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = &g * g.adjoint();
    let tr = m.trace();
    from_na(&(m / tr))
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    nv_dnp::linalg::eigh(m).0[0]
}

/// The production rotating-frame generator for `p` driven at `omega`: the
/// effective Hamiltonian and the frequency-split jump operators.
pub fn rotating_generator(p: &SystemParams, omega: f64) -> (ComplexMatrix, Vec<JumpOperator>) {
    use nv_dnp::hamiltonian::{build_hamiltonian, rotating_frame_with};
    let h = build_hamiltonian(p).unwrap().value;
    let rf = rotating_frame_with(&h, omega, p.rabi, p.target, &p.thresholds).unwrap().value;
    let jumps = nv_dnp::lindblad::jump_operators(p)
        .unwrap()
        .into_iter()
        .flat_map(|j| {
            let rate = j.rate;
            rf.frequency_components(&j.operator).into_iter().map(move |op| JumpOperator::new(op, rate))
        })
        .collect();
    (rf.hamiltonian, jumps)
}

/// `mid ± half_width` sampled at `n` points, with `mid` half-way between
/// the two `m_s = 0` transitions into `|−1,α↓⟩`.
pub fn centred_grid(p: &SystemParams, half_width: f64, n: usize) -> (f64, Vec<f64>) {
    use nv_dnp::experiments::Resonance;
    use nv_dnp::hamiltonian::{build_hamiltonian, manifold_structure};
    let ms = manifold_structure(&build_hamiltonian(p).unwrap().value).unwrap();
    let mid = Resonance::Midpoint.frequency(&ms, p.target, 0.0);
    let grid = (0..n).map(|k| mid - half_width + 2.0 * half_width * k as f64 / (n - 1) as f64).collect();
    (mid, grid)
}
