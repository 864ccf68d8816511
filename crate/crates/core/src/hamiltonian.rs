//! NV ground-state spin Hamiltonian with one hyperfine-coupled ¹³C.
//!
//! All energies are ordinary frequencies in MHz and fields are in mT. The
//! factor 2π is applied only when a generator is assembled (see
//! [`crate::lindblad::build_liouvillian`]).

use serde::{Deserialize, Serialize};

use crate::diagnostics::{Flagged, Warning};
use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::spin_ops::{
    dot3, field_components, norm3, ComplexMatrix, ElectronLevel, FieldVector, JointOperators, C64, JOINT_DIM,
    NUCLEAR_DIM, ZERO,
};

/// Electron gyromagnetic ratio, MHz/T.
pub const GAMMA_E: f64 = 28024.95;
/// ¹³C gyromagnetic ratio, MHz/T.
pub const GAMMA_N_C13: f64 = 10.7084;
/// NV ground-state zero-field splitting, MHz.
pub const D0: f64 = 2870.0;

/// Hyperfine coupling `I·A·S`, MHz. Row index is nuclear, column electronic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperfineTensor {
    a: [[f64; 3]; 3],
}

impl HyperfineTensor {
    /// Largest tolerated `|A_uv − A_vu|` in MHz.
    pub const ASYMMETRY_TOL: f64 = 1e-9;

    pub fn new(a: [[f64; 3]; 3]) -> Result<Self> {
        if a.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("hyperfine tensor".into()));
        }
        for u in 0..3 {
            for v in 0..u {
                let asym = (a[u][v] - a[v][u]).abs();
                if asym > Self::ASYMMETRY_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "hyperfine tensor asymmetric: |A[{u}][{v}] - A[{v}][{u}]| = {asym:e} MHz"
                    )));
                }
            }
        }
        let mut sym = a;
        for u in 0..3 {
            for v in 0..3 {
                sym[u][v] = 0.5 * (a[u][v] + a[v][u]);
            }
        }
        Ok(Self { a: sym })
    }

    pub fn zero() -> Self {
        Self { a: [[0.0; 3]; 3] }
    }

    /// Axially symmetric tensor `A⊥·1 + (A∥ − A⊥)·u uᵀ` with the symmetry
    /// axis `u` at the given polar angle and azimuth in the NV frame.
    pub fn axial(parallel: f64, perpendicular: f64, polar: f64, azimuth: f64) -> Result<Self> {
        let u = [polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()];
        let mut a = [[0.0; 3]; 3];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (parallel - perpendicular) * u[i] * u[j] + if i == j { perpendicular } else { 0.0 };
            }
        }
        Self::new(a)
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.a
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.a[u][v]
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `R A Rᵀ` for a rotation given as rows.
    pub fn rotated(&self, r: [[f64; 3]; 3]) -> Self {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).flat_map(|k| (0..3).map(move |l| (k, l))).map(|(k, l)| r[i][k] * self.a[k][l] * r[j][l]).sum();
            }
        }
        Self { a: out }
    }
}

/// Which gyromagnetic ratio multiplies the nuclear Zeeman term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuclearZeeman {
    /// `γn I·B`
    #[default]
    GammaN,
    /// `γe I·B`, the literal printed form of the full Hamiltonian. Kept for
    /// comparison only.
    GammaE,
}

/// Which Hamiltonian the dynamics use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianModel {
    /// Every term of the lab-frame Hamiltonian.
    #[default]
    Full,
    /// The aligned-field secular form; needs θ = 0.
    Secular,
}

/// Configurable validity thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Minimum `|D0 − γe|B||`, MHz.
    pub anti_crossing_mhz: f64,
    /// Required `|D0 ± γe B0| / max|A_uv|` for the secular Hamiltonian.
    pub secular_ratio: f64,
    /// Minimum distance from the non-addressed transition, in units of Ω.
    pub rwa_rabi_multiple: f64,
    /// Minimum overlap for an unambiguous electron-level label.
    pub label_overlap: f64,
    /// Excited-state anti-crossing window, mT.
    pub eslac_window_mt: (f64, f64),
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            anti_crossing_mhz: 200.0,
            secular_ratio: 10.0,
            rwa_rabi_multiple: 5.0,
            label_overlap: 0.6,
            eslac_window_mt: (40.0, 60.0),
        }
    }
}

/// Electron–nucleus incoherent rates beyond optical pumping (default zero).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dephasing {
    /// Electron pure-dephasing rate, 1/µs.
    pub electron: f64,
    /// Nuclear pure-dephasing rate, 1/µs.
    pub nuclear: f64,
}

/// How the unsuccessful fraction `1 − η` of pumping events acts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InefficiencyModel {
    /// Jumps from `m_s = ±1` into each electron level at equal rates.
    #[default]
    Randomize,
    /// Unsuccessful events do nothing.
    Loss,
}

/// Every physical input of a simulation. Frequencies MHz, rates 1/µs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub zero_field_splitting: f64,
    /// MHz/T
    pub gamma_e: f64,
    /// MHz/T
    pub gamma_n: f64,
    pub field: FieldVector,
    pub hyperfine: HyperfineTensor,
    /// Rabi frequency Ω on the addressed electron transition.
    pub rabi: f64,
    /// Microwave frequency ω.
    pub drive_frequency: f64,
    pub target: TargetTransition,
    /// Pumping rate Γp.
    pub pump_rate: f64,
    /// Pumping efficiency η.
    pub pump_efficiency: f64,
    pub inefficiency: InefficiencyModel,
    pub dephasing: Dephasing,
    pub nuclear_zeeman: NuclearZeeman,
    pub hamiltonian: HamiltonianModel,
    pub thresholds: Thresholds,
}

impl SystemParams {
    /// Defaults for everything except the field and hyperfine tensor; drive
    /// off, pumping at 1/(3 µs) with 90 % efficiency.
    pub fn new(field: FieldVector, hyperfine: HyperfineTensor) -> Self {
        Self {
            zero_field_splitting: D0,
            gamma_e: GAMMA_E,
            gamma_n: GAMMA_N_C13,
            field,
            hyperfine,
            rabi: 0.0,
            drive_frequency: 0.0,
            target: TargetTransition::Minus,
            pump_rate: 1.0 / 3.0,
            pump_efficiency: 0.9,
            inefficiency: InefficiencyModel::Randomize,
            dephasing: Dephasing::default(),
            nuclear_zeeman: NuclearZeeman::GammaN,
            hamiltonian: HamiltonianModel::Full,
            thresholds: Thresholds::default(),
        }
    }

    pub fn with_drive(mut self, rabi: f64, drive_frequency: f64) -> Self {
        self.rabi = rabi;
        self.drive_frequency = drive_frequency;
        self
    }

    /// Field in tesla, NV-frame Cartesian.
    pub fn field_tesla(&self) -> [f64; 3] {
        field_components(&self.field).map(|b| b * 1e-3)
    }

    /// Checks hard invariants and returns soft validity flags.
    pub fn validate(&self) -> Result<Vec<Warning>> {
        let scalars = [
            ("zero_field_splitting", self.zero_field_splitting),
            ("gamma_e", self.gamma_e),
            ("gamma_n", self.gamma_n),
            ("rabi", self.rabi),
            ("drive_frequency", self.drive_frequency),
            ("pump_rate", self.pump_rate),
            ("pump_efficiency", self.pump_efficiency),
            ("dephasing.electron", self.dephasing.electron),
            ("dephasing.nuclear", self.dephasing.nuclear),
        ];
        if let Some((name, _)) = scalars.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite((*name).into()));
        }
        self.field.validate()?;
        if self.zero_field_splitting <= 0.0 {
            return Err(Error::InvalidParameter("zero-field splitting must be positive".into()));
        }
        if self.pump_rate < 0.0 || self.rabi < 0.0 || self.dephasing.electron < 0.0 || self.dephasing.nuclear < 0.0 {
            return Err(Error::InvalidParameter("rates and Rabi frequency must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.pump_efficiency) {
            return Err(Error::InvalidParameter(format!(
                "pump efficiency {} outside [0, 1]",
                self.pump_efficiency
            )));
        }
        let mut warnings = Vec::new();
        let b = self.field.magnitude_mt;
        let gap = (self.zero_field_splitting - self.gamma_e * b * 1e-3).abs();
        if gap <= self.thresholds.anti_crossing_mhz {
            warnings.push(Warning::AntiCrossing {
                field_mt: b,
                gap_mhz: gap,
                threshold_mhz: self.thresholds.anti_crossing_mhz,
            });
        }
        let (lo, hi) = self.thresholds.eslac_window_mt;
        if b >= lo && b <= hi {
            warnings.push(Warning::ExcitedStateAntiCrossing { field_mt: b, window_mt: (lo, hi) });
        }
        Ok(warnings)
    }
}

/// Full lab-frame Hamiltonian
/// `D0 Sz² + γe S·B + γn I·B + I·A·S` (MHz).
pub fn build_lab_hamiltonian(p: &SystemParams) -> Result<Flagged<ComplexMatrix>> {
    let warnings = p.validate()?;
    let ops = JointOperators::new();
    let b = p.field_tesla();
    let gamma_nuc = match p.nuclear_zeeman {
        NuclearZeeman::GammaN => p.gamma_n,
        NuclearZeeman::GammaE => p.gamma_e,
    };
    let sz = &ops.s[2];
    let mut h = (sz * sz).scale_real(p.zero_field_splitting);
    for k in 0..3 {
        h += &ops.s[k].scale_real(p.gamma_e * b[k]);
        h += &ops.i[k].scale_real(gamma_nuc * b[k]);
    }
    for u in 0..3 {
        for v in 0..3 {
            let a = p.hyperfine.get(u, v);
            if a != 0.0 {
                h += &(&ops.i[u] * &ops.s[v]).scale_real(a);
            }
        }
    }
    Ok(Flagged::new(h, warnings))
}

/// Secular Hamiltonian for a field along the NV axis:
/// `D0 Sz² + (γe Sz + γn Iz) B0 + Sz (Azx Ix + Azy Iy + Azz Iz)`.
///
/// `Azy` is kept rather than rotated away so nuclear axes stay in the NV
/// frame; with `Azy = 0` this is the familiar `Azz Sz Iz + Azx Sz Ix` form.
pub fn build_secular_hamiltonian(p: &SystemParams) -> Result<Flagged<ComplexMatrix>> {
    let mut warnings = p.validate()?;
    let (st, ct) = p.field.theta.sin_cos();
    if st.abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "secular Hamiltonian needs a field along the NV axis (polar angle {} rad)",
            p.field.theta
        )));
    }
    let b0 = p.field.magnitude_mt * 1e-3 * ct.signum();
    let a_max = p.hyperfine.max_abs();
    if a_max > 0.0 {
        let gap = (p.zero_field_splitting - p.gamma_e * b0.abs()).abs().min(p.zero_field_splitting + p.gamma_e * b0.abs());
        let ratio = gap / a_max;
        if ratio < p.thresholds.secular_ratio {
            warnings.push(Warning::Secularity { ratio, required: p.thresholds.secular_ratio });
        }
    }
    let ops = JointOperators::new();
    let (sz, iz) = (&ops.s[2], &ops.i[2]);
    let mut h = (sz * sz).scale_real(p.zero_field_splitting)
        + sz.scale_real(p.gamma_e * b0)
        + iz.scale_real(p.gamma_n * b0);
    for u in 0..3 {
        h += &(&ops.i[u] * sz).scale_real(p.hyperfine.get(u, 2));
    }
    Ok(Flagged::new(h, warnings))
}

/// The lab-frame Hamiltonian selected by `p.hamiltonian`.
pub fn build_hamiltonian(p: &SystemParams) -> Result<Flagged<ComplexMatrix>> {
    match p.hamiltonian {
        HamiltonianModel::Full => build_lab_hamiltonian(p),
        HamiltonianModel::Secular => build_secular_hamiltonian(p),
    }
}

/// Names of the six eigenstates. Within each electron manifold `Up` is the
/// member with the higher energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateLabel {
    /// `|0, β↑⟩`
    ZeroUp,
    /// `|0, β↓⟩`
    ZeroDown,
    /// `|−1, α↑⟩`
    MinusUp,
    /// `|−1, α↓⟩`
    MinusDown,
    /// `|+1, ↑⟩`
    PlusUp,
    /// `|+1, ↓⟩`
    PlusDown,
}

impl StateLabel {
    /// Column order used in every table.
    pub const ALL: [StateLabel; 6] = [
        StateLabel::ZeroUp,
        StateLabel::ZeroDown,
        StateLabel::MinusUp,
        StateLabel::MinusDown,
        StateLabel::PlusUp,
        StateLabel::PlusDown,
    ];

    pub fn new(level: ElectronLevel, upper: bool) -> Self {
        match (level, upper) {
            (ElectronLevel::Zero, true) => StateLabel::ZeroUp,
            (ElectronLevel::Zero, false) => StateLabel::ZeroDown,
            (ElectronLevel::Minus, true) => StateLabel::MinusUp,
            (ElectronLevel::Minus, false) => StateLabel::MinusDown,
            (ElectronLevel::Plus, true) => StateLabel::PlusUp,
            (ElectronLevel::Plus, false) => StateLabel::PlusDown,
        }
    }

    pub fn level(self) -> ElectronLevel {
        match self {
            StateLabel::ZeroUp | StateLabel::ZeroDown => ElectronLevel::Zero,
            StateLabel::MinusUp | StateLabel::MinusDown => ElectronLevel::Minus,
            StateLabel::PlusUp | StateLabel::PlusDown => ElectronLevel::Plus,
        }
    }

    pub fn is_upper(self) -> bool {
        matches!(self, StateLabel::ZeroUp | StateLabel::MinusUp | StateLabel::PlusUp)
    }

    pub fn position(self) -> usize {
        Self::ALL.iter().position(|&s| s == self).unwrap()
    }

    /// Short ASCII column name.
    pub fn column(self) -> &'static str {
        match self {
            StateLabel::ZeroUp => "p_0_beta_up",
            StateLabel::ZeroDown => "p_0_beta_down",
            StateLabel::MinusUp => "p_m1_alpha_up",
            StateLabel::MinusDown => "p_m1_alpha_down",
            StateLabel::PlusUp => "p_p1_up",
            StateLabel::PlusDown => "p_p1_down",
        }
    }
}

impl std::fmt::Display for StateLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StateLabel::ZeroUp => "|0,b_up>",
            StateLabel::ZeroDown => "|0,b_down>",
            StateLabel::MinusUp => "|-1,a_up>",
            StateLabel::MinusDown => "|-1,a_down>",
            StateLabel::PlusUp => "|+1,up>",
            StateLabel::PlusDown => "|+1,down>",
        };
        f.write_str(s)
    }
}

/// One eigenstate of the Hamiltonian with its manifold assignment.
#[derive(Clone, Debug)]
pub struct EigenState {
    pub energy: f64,
    pub vector: Vec<C64>,
    pub label: StateLabel,
    /// Weight of the assigned bare electron level in this state.
    pub overlap: f64,
    pub ambiguous: bool,
    /// Bloch vector of the reduced nuclear state.
    pub nuclear_bloch: [f64; 3],
}

/// Eigen-decomposition of a 6×6 Hamiltonian, organized by electron manifold.
#[derive(Clone, Debug)]
pub struct ManifoldStructure {
    /// Ascending in energy.
    pub states: Vec<EigenState>,
    /// Splitting within the `m_s = 0` pair, MHz.
    pub delta: f64,
    /// Splitting within the `m_s = −1` pair, MHz.
    pub big_delta: f64,
    /// Splitting within the `m_s = +1` pair, MHz.
    pub plus_splitting: f64,
    /// Nuclear quantization axis of each manifold, indexed by
    /// [`ElectronLevel::index`]. It is the Bloch direction of the upper
    /// state's reduced nuclear state.
    pub nuclear_axes: [[f64; 3]; 3],
    pub warnings: Vec<Warning>,
}

fn reduced_nuclear_bloch(v: &[C64]) -> [f64; 3] {
    let mut rho = [[ZERO; NUCLEAR_DIM]; NUCLEAR_DIM];
    for e in 0..3 {
        for a in 0..NUCLEAR_DIM {
            for b in 0..NUCLEAR_DIM {
                rho[a][b] += v[e * NUCLEAR_DIM + a] * v[e * NUCLEAR_DIM + b].conj();
            }
        }
    }
    [2.0 * rho[1][0].re, 2.0 * rho[1][0].im, rho[0][0].re - rho[1][1].re]
}

fn level_weights(v: &[C64]) -> [f64; 3] {
    let mut w = [0.0; 3];
    for (e, x) in w.iter_mut().enumerate() {
        *x = (0..NUCLEAR_DIM).map(|n| v[e * NUCLEAR_DIM + n].norm_sqr()).sum();
    }
    w
}

/// Assigns two states to each electron level, maximizing the total overlap.
fn assign_levels(weights: &[[f64; 3]]) -> [ElectronLevel; JOINT_DIM] {
    let mut best = (f64::NEG_INFINITY, [ElectronLevel::Zero; JOINT_DIM]);
    let n = weights.len();
    for p0 in 0..n {
        for p1 in p0 + 1..n {
            for z0 in 0..n {
                for z1 in z0 + 1..n {
                    if [p0, p1].contains(&z0) || [p0, p1].contains(&z1) {
                        continue;
                    }
                    let mut lv = [ElectronLevel::Minus; JOINT_DIM];
                    lv[p0] = ElectronLevel::Plus;
                    lv[p1] = ElectronLevel::Plus;
                    lv[z0] = ElectronLevel::Zero;
                    lv[z1] = ElectronLevel::Zero;
                    let score: f64 = (0..n).map(|k| weights[k][lv[k].index()]).sum();
                    if score > best.0 + 1e-15 {
                        best = (score, lv);
                    }
                }
            }
        }
    }
    best.1
}

/// Diagonalizes `h` and labels each eigenstate by its dominant electron level.
pub fn manifold_structure(h: &ComplexMatrix) -> Result<ManifoldStructure> {
    manifold_structure_with(h, Thresholds::default().label_overlap)
}

pub fn manifold_structure_with(h: &ComplexMatrix, label_overlap: f64) -> Result<ManifoldStructure> {
    if h.dim() != JOINT_DIM {
        return Err(Error::Shape(format!("expected a {JOINT_DIM}x{JOINT_DIM} Hamiltonian, got {}", h.dim())));
    }
    let dev = (h - &h.adjoint()).max_abs();
    let tol = 1e-10 * h.max_abs().max(1.0);
    if dev > tol {
        return Err(Error::NotHermitian { deviation: dev, tolerance: tol });
    }
    let (energies, vecs) = eigh(h);
    let vectors: Vec<Vec<C64>> = (0..JOINT_DIM).map(|k| vecs.column(k)).collect();
    let weights: Vec<[f64; 3]> = vectors.iter().map(|v| level_weights(v)).collect();
    let levels = assign_levels(&weights);

    let mut warnings = Vec::new();
    let mut states = Vec::with_capacity(JOINT_DIM);
    for k in 0..JOINT_DIM {
        let level = levels[k];
        let overlap = weights[k][level.index()];
        let ambiguous = overlap < label_overlap;
        if ambiguous {
            warnings.push(Warning::AmbiguousLabel { state: k, level, overlap });
        }
        // Energies ascend, so the second member of a manifold is the upper one.
        let upper = levels[..k].contains(&level);
        states.push(EigenState {
            energy: energies[k],
            vector: vectors[k].clone(),
            label: StateLabel::new(level, upper),
            overlap,
            ambiguous,
            nuclear_bloch: reduced_nuclear_bloch(&vectors[k]),
        });
    }

    let energy = |l: StateLabel| states.iter().find(|s| s.label == l).unwrap().energy;
    let delta = energy(StateLabel::ZeroUp) - energy(StateLabel::ZeroDown);
    let big_delta = energy(StateLabel::MinusUp) - energy(StateLabel::MinusDown);
    let plus_splitting = energy(StateLabel::PlusUp) - energy(StateLabel::PlusDown);
    let mut nuclear_axes = [[0.0, 0.0, 1.0]; 3];
    for level in ElectronLevel::ALL {
        let s = states.iter().find(|s| s.label == StateLabel::new(level, true)).unwrap();
        let n = norm3(s.nuclear_bloch);
        if n > 1e-9 {
            nuclear_axes[level.index()] = s.nuclear_bloch.map(|x| x / n);
        }
    }
    Ok(ManifoldStructure { states, delta, big_delta, plus_splitting, nuclear_axes, warnings })
}

impl ManifoldStructure {
    pub fn state(&self, label: StateLabel) -> &EigenState {
        self.states.iter().find(|s| s.label == label).expect("every label is assigned")
    }

    pub fn energy(&self, label: StateLabel) -> f64 {
        self.state(label).energy
    }

    pub fn axis(&self, level: ElectronLevel) -> [f64; 3] {
        self.nuclear_axes[level.index()]
    }

    /// Angle between two manifolds' nuclear axes, radians in `[0, π]`.
    pub fn axis_angle(&self, a: ElectronLevel, b: ElectronLevel) -> f64 {
        dot3(self.axis(a), self.axis(b)).clamp(-1.0, 1.0).acos()
    }

    /// Spectral projector onto one manifold.
    pub fn manifold_projector(&self, level: ElectronLevel) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(JOINT_DIM);
        for s in self.states.iter().filter(|s| s.label.level() == level) {
            p += &ComplexMatrix::projector(&s.vector);
        }
        p
    }

    /// Unitary whose columns are the eigenvectors in [`StateLabel::ALL`] order.
    pub fn labeled_basis(&self) -> ComplexMatrix {
        let mut u = ComplexMatrix::zeros(JOINT_DIM);
        for (col, l) in StateLabel::ALL.iter().enumerate() {
            for (row, z) in self.state(*l).vector.iter().enumerate() {
                u[(row, col)] = *z;
            }
        }
        u
    }

    /// `E(to) − E(from)`, MHz.
    pub fn transition_frequency(&self, from: StateLabel, to: StateLabel) -> f64 {
        self.energy(to) - self.energy(from)
    }

    /// Diagonal of `ρ` in the labeled eigenbasis, [`StateLabel::ALL`] order.
    pub fn populations(&self, rho: &ComplexMatrix) -> [f64; 6] {
        StateLabel::ALL.map(|l| {
            let v = &self.state(l).vector;
            rho.sandwich(v, v).re
        })
    }
}

/// The electron transition driven by the microwave field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetTransition {
    /// `0 ↔ −1`
    #[default]
    #[serde(rename = "0<->-1")]
    Minus,
    /// `0 ↔ +1`
    #[serde(rename = "0<->+1")]
    Plus,
}

impl TargetTransition {
    pub fn level(self) -> ElectronLevel {
        match self {
            TargetTransition::Minus => ElectronLevel::Minus,
            TargetTransition::Plus => ElectronLevel::Plus,
        }
    }

    pub fn other(self) -> ElectronLevel {
        match self {
            TargetTransition::Minus => ElectronLevel::Plus,
            TargetTransition::Plus => ElectronLevel::Minus,
        }
    }
}

/// Time-independent Hamiltonian in the frame rotating with the microwave.
///
/// The frame generator is `ω·P`, where `P` is the spectral projector onto
/// the addressed manifold of the lab Hamiltonian. The drive
/// `√2·Ω·cos(ωt)·Sx` is kept only between the addressed manifold and
/// `m_s = 0`, giving `(Ω/√2)(P Sx P₀ + P₀ Sx P)`; for a field along the NV
/// axis this is `(Ω/2)(|0⟩⟨−1| + |−1⟩⟨0|) ⊗ 1`.
#[derive(Clone, Debug)]
pub struct RotatingFrame {
    pub hamiltonian: ComplexMatrix,
    /// Projector onto the addressed manifold.
    pub projector: ComplexMatrix,
    pub drive_frequency: f64,
    pub rabi: f64,
    pub target: TargetTransition,
}

pub fn rotating_frame(
    h_lab: &ComplexMatrix,
    drive_frequency: f64,
    rabi: f64,
    target: TargetTransition,
) -> Result<Flagged<RotatingFrame>> {
    rotating_frame_with(h_lab, drive_frequency, rabi, target, &Thresholds::default())
}

pub fn rotating_frame_with(
    h_lab: &ComplexMatrix,
    drive_frequency: f64,
    rabi: f64,
    target: TargetTransition,
    thresholds: &Thresholds,
) -> Result<Flagged<RotatingFrame>> {
    if !drive_frequency.is_finite() || !rabi.is_finite() {
        return Err(Error::NonFinite("drive parameters".into()));
    }
    if rabi < 0.0 {
        return Err(Error::InvalidParameter("Rabi frequency must be non-negative".into()));
    }
    let ms = manifold_structure_with(h_lab, thresholds.label_overlap)?;
    let mut warnings = ms.warnings.clone();
    let p = ms.manifold_projector(target.level());
    let p0 = ms.manifold_projector(ElectronLevel::Zero);

    let other = target.other();
    let nearest_other = [StateLabel::ZeroUp, StateLabel::ZeroDown]
        .iter()
        .flat_map(|&z| [true, false].map(|u| ms.transition_frequency(z, StateLabel::new(other, u))))
        .map(|f| (drive_frequency - f).abs())
        .fold(f64::INFINITY, f64::min);
    let limit = thresholds.rwa_rabi_multiple * rabi;
    if rabi > 0.0 && nearest_other < limit {
        warnings.push(Warning::RwaProximity { detuning_mhz: nearest_other, limit_mhz: limit });
    }

    let sx = &JointOperators::new().s[0];
    let coupling = &(&(&p * sx) * &p0) + &(&(&p0 * sx) * &p);
    let h = &(h_lab - &p.scale_real(drive_frequency)) + &coupling.scale_real(rabi / std::f64::consts::SQRT_2);
    Ok(Flagged::new(
        RotatingFrame { hamiltonian: h.hermitian_part(), projector: p, drive_frequency, rabi, target },
        warnings,
    ))
}

impl RotatingFrame {
    /// Splits a lab-frame operator into its parts that are static in this
    /// frame (`PJP + QJQ`) and that rotate at `±ω` (`PJQ`, `QJP`).
    /// Dropping the cross terms between parts is the secular approximation
    /// for a dissipator.
    pub fn frequency_components(&self, op: &ComplexMatrix) -> Vec<ComplexMatrix> {
        let q = &ComplexMatrix::identity(JOINT_DIM) - &self.projector;
        let p = &self.projector;
        let parts = [&(&(p * op) * p) + &(&(&q * op) * &q), &(p * op) * &q, &(&q * op) * p];
        parts.into_iter().filter(|m| m.max_abs() > 1e-14).collect()
    }

    /// Drops coherences between the addressed manifold and the rest, which
    /// oscillate at the drive frequency in the lab frame.
    pub fn secular_part(&self, op: &ComplexMatrix) -> ComplexMatrix {
        let q = &ComplexMatrix::identity(JOINT_DIM) - &self.projector;
        let p = &self.projector;
        &(&(p * op) * p) + &(&(&q * op) * &q)
    }
}

/// One line of a transition table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: StateLabel,
    pub to: StateLabel,
    /// `E(to) − E(from)`, MHz.
    pub frequency: f64,
    /// `|⟨from| Sx⊗1 |to⟩|²`
    pub matrix_element_sq: f64,
    /// Matrix element normalized over the two `m_s = 0` states, so the
    /// weights into any addressed state sum to one.
    pub weight: f64,
}

/// All `m_s = 0` ↔ addressed-manifold transitions.
pub fn transition_table(ms: &ManifoldStructure, target: TargetTransition) -> Vec<Transition> {
    let sx = &JointOperators::new().s[0];
    let mut out = Vec::with_capacity(4);
    for upper_to in [false, true] {
        let to = StateLabel::new(target.level(), upper_to);
        let elems: Vec<(StateLabel, f64)> = [StateLabel::ZeroUp, StateLabel::ZeroDown]
            .iter()
            .map(|&from| (from, sx.sandwich(&ms.state(from).vector, &ms.state(to).vector).norm_sqr()))
            .collect();
        let total: f64 = elems.iter().map(|e| e.1).sum();
        for (from, m2) in elems {
            out.push(Transition {
                from,
                to,
                frequency: ms.transition_frequency(from, to),
                matrix_element_sq: m2,
                weight: if total > 0.0 { m2 / total } else { 0.0 },
            });
        }
    }
    out
}

/// The four NV symmetry axes of the diamond lattice, crystal coordinates.
pub const NV_AXES: [[f64; 3]; 4] = {
    const S: f64 = 0.5773502691896258;
    [[S, S, S], [S, -S, -S], [-S, S, -S], [-S, -S, S]]
};

/// Field as seen in each of the four NV orientations' own frames.
///
/// `field` is given in the frame of orientation 0. The other three frames
/// follow from orientation 0 by the lattice's two-fold rotations about the
/// cubic axes, so the same hyperfine tensor applies in each of them.
pub fn orientation_fields(field: &FieldVector) -> [FieldVector; 4] {
    let inv6 = 1.0 / 6f64.sqrt();
    let inv2 = std::f64::consts::FRAC_1_SQRT_2;
    let z0 = NV_AXES[0];
    let x0 = [inv6, inv6, -2.0 * inv6];
    let y0 = [-inv2, inv2, 0.0];
    let b_nv0 = field_components(field);
    let b_crystal: [f64; 3] = std::array::from_fn(|i| x0[i] * b_nv0[0] + y0[i] * b_nv0[1] + z0[i] * b_nv0[2]);
    let c2 = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    std::array::from_fn(|k| {
        let rot = |v: [f64; 3]| -> [f64; 3] { std::array::from_fn(|i| c2[k][i] * v[i]) };
        let (xk, yk, zk) = (rot(x0), rot(y0), rot(z0));
        FieldVector::from_components([dot3(xk, b_crystal), dot3(yk, b_crystal), dot3(zk, b_crystal)])
    })
}
