//! Simulated experiments: frequency, power and field sweeps of the driven,
//! pumped system, regime classification and the ¹⁴N tone comb.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{push_unique, Flagged, Warning};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_hamiltonian, manifold_structure_with, rotating_frame_with, ManifoldStructure, StateLabel,
    SystemParams, TargetTransition,
};
use crate::lindblad::{build_liouvillian, jump_operators, propagate, DensityMatrix, JumpOperator};
use crate::spin_ops::{ComplexMatrix, ElectronLevel, JointOperators, NUCLEAR_DIM};

/// Dynamical regime set by the Rabi frequency against the two splittings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeLabel {
    Selective,
    Lambda,
    Broadband,
}

impl RegimeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::Selective => "selective",
            RegimeLabel::Lambda => "lambda",
            RegimeLabel::Broadband => "broadband",
        }
    }
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Regime boundaries as multiples of δ and Δ. The defaults give
/// selective for `Ω < δ`, Λ for `δ ≤ Ω < Δ` and broadband for `Ω ≥ Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub lambda_from: f64,
    pub broadband_from: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self { lambda_from: 1.0, broadband_from: 1.0 }
    }
}

pub fn classify_regime(rabi: f64, delta: f64, big_delta: f64) -> Result<RegimeLabel> {
    classify_regime_with(rabi, delta, big_delta, &RegimeThresholds::default())
}

pub fn classify_regime_with(rabi: f64, delta: f64, big_delta: f64, t: &RegimeThresholds) -> Result<RegimeLabel> {
    if [rabi, delta, big_delta].iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidParameter("regime inputs must be finite and non-negative".into()));
    }
    if delta > big_delta {
        return Err(Error::Precondition(format!("δ = {delta} MHz exceeds Δ = {big_delta} MHz")));
    }
    Ok(if rabi < t.lambda_from * delta {
        RegimeLabel::Selective
    } else if rabi < t.broadband_from * big_delta {
        RegimeLabel::Lambda
    } else {
        RegimeLabel::Broadband
    })
}

/// `2·Tr(ρ (1_e ⊗ n·I))` for a unit vector `n`.
pub fn nuclear_polarization(rho: &DensityMatrix, axis: [f64; 3]) -> Result<f64> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("polarization axis must be a unit vector (norm {norm})")));
    }
    Ok(2.0 * rho.expectation(&JointOperators::new().nuclear_along(axis)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptVariable {
    MwFrequency,
    MwPower,
    FieldMagnitude,
}

impl SweptVariable {
    pub fn column(self) -> &'static str {
        match self {
            SweptVariable::MwFrequency => "mw_frequency_mhz",
            SweptVariable::MwPower => "rabi_mhz",
            SweptVariable::FieldMagnitude => "field_mt",
        }
    }
}

/// State at the start of each polarization phase.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum InitialState {
    /// Electron in `m_s = 0` with the pump efficiency, nucleus mixed.
    #[default]
    Pumped,
    MaximallyMixed,
    Custom(DensityMatrix),
}

impl InitialState {
    pub fn resolve(&self, p: &SystemParams) -> Result<DensityMatrix> {
        match self {
            InitialState::Pumped => DensityMatrix::pumped(p.pump_efficiency),
            InitialState::MaximallyMixed => Ok(DensityMatrix::maximally_mixed()),
            InitialState::Custom(rho) => Ok(rho.clone()),
        }
    }
}

/// Equal-weight incoherent superposition of tones at
/// `ω + (k − (n−1)/2)·spacing`, `k = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombSpec {
    pub tone_count: usize,
    /// MHz
    pub spacing: f64,
}

impl Default for CombSpec {
    fn default() -> Self {
        Self { tone_count: 3, spacing: 2.16 }
    }
}

impl CombSpec {
    pub fn validate(&self) -> Result<()> {
        if self.tone_count == 0 {
            return Err(Error::InvalidParameter("comb needs at least one tone".into()));
        }
        if !self.spacing.is_finite() || self.spacing <= 0.0 {
            return Err(Error::InvalidParameter(format!("comb spacing {} must be positive", self.spacing)));
        }
        Ok(())
    }

    pub fn offsets(&self) -> Vec<f64> {
        let mid = (self.tone_count as f64 - 1.0) / 2.0;
        (0..self.tone_count).map(|k| (k as f64 - mid) * self.spacing).collect()
    }
}

/// Where the drive frequency sits when it is not the swept variable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resonance {
    /// `drive_frequency` from the parameters.
    Fixed,
    /// `E(to) − E(from)` of the current Hamiltonian, plus an offset in MHz.
    Transition { from: StateLabel, to: StateLabel, offset: f64 },
    /// Half-way between the two `m_s = 0` states' transitions into the lower
    /// state of the addressed manifold.
    Midpoint,
    /// `|0,β↓⟩ ↔` lower addressed state.
    #[default]
    SelectiveDown,
    /// `|0,β↑⟩ ↔` lower addressed state.
    SelectiveUp,
}

impl Resonance {
    pub fn frequency(&self, ms: &ManifoldStructure, target: TargetTransition, fixed: f64) -> f64 {
        let lower = StateLabel::new(target.level(), false);
        let f = |from| ms.transition_frequency(from, lower).abs();
        match *self {
            Resonance::Fixed => fixed,
            Resonance::Transition { from, to, offset } => ms.transition_frequency(from, to).abs() + offset,
            Resonance::Midpoint => 0.5 * (f(StateLabel::ZeroUp) + f(StateLabel::ZeroDown)),
            Resonance::SelectiveDown => f(StateLabel::ZeroDown),
            Resonance::SelectiveUp => f(StateLabel::ZeroUp),
        }
    }
}

/// One simulated experiment.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub variable: SweptVariable,
    /// Strictly monotonic. MHz for frequency and power, mT for field.
    pub grid: Vec<f64>,
    pub params: SystemParams,
    /// µs
    pub polarization_time: f64,
    pub initial_state: InitialState,
    pub comb: Option<CombSpec>,
    /// Drive placement for power and field sweeps.
    pub resonance: Resonance,
    pub regimes: RegimeThresholds,
}

impl SweepSpec {
    pub fn new(variable: SweptVariable, grid: Vec<f64>, params: SystemParams, polarization_time: f64) -> Self {
        Self {
            variable,
            grid,
            params,
            polarization_time,
            initial_state: InitialState::Pumped,
            comb: None,
            resonance: Resonance::default(),
            regimes: RegimeThresholds::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidParameter("sweep grid is empty".into()));
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("sweep grid".into()));
        }
        let up = self.grid.windows(2).all(|w| w[1] > w[0]);
        let down = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::InvalidParameter("sweep grid must be strictly monotonic".into()));
        }
        if !self.polarization_time.is_finite() || self.polarization_time <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "polarization time {} µs must be positive",
                self.polarization_time
            )));
        }
        if let Some(c) = &self.comb {
            c.validate()?;
        }
        self.params.validate()?;
        Ok(())
    }
}

/// Observables at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    /// Centre drive frequency, MHz.
    pub drive_frequency: f64,
    pub rabi: f64,
    pub field_mt: f64,
    /// Eigenstate populations in [`StateLabel::ALL`] order.
    pub populations: [f64; 6],
    /// Along the `m_s = 0` manifold's nuclear axis.
    pub polarization_zero_axis: f64,
    /// Along the addressed manifold's nuclear axis.
    pub polarization_target_axis: f64,
    /// Along the NV axis.
    pub polarization_z: f64,
    pub delta: f64,
    pub big_delta: f64,
    pub regime: RegimeLabel,
    pub warnings: Vec<Warning>,
}

impl SweepPoint {
    pub fn population(&self, label: StateLabel) -> f64 {
        self.populations[label.position()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub variable: SweptVariable,
    pub points: Vec<SweepPoint>,
    /// Union of the per-point warnings, first occurrence order.
    pub warnings: Vec<Warning>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn populations(&self, label: StateLabel) -> Vec<f64> {
        self.points.iter().map(|p| p.population(label)).collect()
    }

    pub fn polarization_zero_axis(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.polarization_zero_axis).collect()
    }

    pub fn polarization_target_axis(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.polarization_target_axis).collect()
    }
}

/// Observables of a single drive tone after the polarization phase.
#[derive(Clone, Copy, Debug, PartialEq)]
struct ToneObservables {
    populations: [f64; 6],
    pol_zero: f64,
    pol_target: f64,
    pol_z: f64,
}

/// Final state of one polarization phase with a single drive tone,
/// together with the lab-frame manifold structure used to read it out.
///
/// Both the initial and the returned state keep only the parts of `ρ` that
/// are static in the lab frame: coherences between the addressed manifold
/// and the rest oscillate at the drive frequency and average out over the
/// microwave phase.
pub fn evolve_single_tone(
    params: &SystemParams,
    drive_frequency: f64,
    time: f64,
    initial: &DensityMatrix,
) -> Result<Flagged<(DensityMatrix, ManifoldStructure)>> {
    let mut warnings = Vec::new();
    let h = build_hamiltonian(params)?.drain_into(&mut warnings);
    let ms = manifold_structure_with(&h, params.thresholds.label_overlap)?;
    let rf = rotating_frame_with(&h, drive_frequency, params.rabi, params.target, &params.thresholds)?
        .drain_into(&mut warnings);
    let jumps: Vec<JumpOperator> = jump_operators(params)?
        .into_iter()
        .flat_map(|j| {
            let rate = j.rate;
            rf.frequency_components(&j.operator).into_iter().map(move |op| JumpOperator::new(op, rate))
        })
        .collect();
    let l = build_liouvillian(&rf.hamiltonian, &jumps)?;
    // The microwave phase is not locked to the start of pumping; averaging
    // over it removes the initial coherences between the addressed manifold
    // and the rest.
    let initial = DensityMatrix::new(rf.secular_part(initial.matrix()))?;
    let rho = propagate(&initial, &l, time)?;
    let rho = DensityMatrix::new(rf.secular_part(rho.matrix()))?;
    Ok(Flagged::new((rho, ms), warnings))
}

fn tone_observables(rho: &DensityMatrix, ms: &ManifoldStructure, target: TargetTransition) -> Result<ToneObservables> {
    Ok(ToneObservables {
        populations: ms.populations(rho.matrix()),
        pol_zero: nuclear_polarization(rho, ms.axis(ElectronLevel::Zero))?,
        pol_target: nuclear_polarization(rho, ms.axis(target.level()))?,
        pol_z: nuclear_polarization(rho, [0.0, 0.0, 1.0])?,
    })
}

/// Simulates one grid point: the (possibly combed) drive at
/// `drive_frequency` acting for the polarization time.
pub fn simulate_point(
    params: &SystemParams,
    drive_frequency: f64,
    spec: &SweepSpec,
    value: f64,
) -> Result<SweepPoint> {
    let mut warnings = params.validate()?;
    let initial = spec.initial_state.resolve(params)?;
    let offsets = spec.comb.map(|c| c.offsets()).unwrap_or_else(|| vec![0.0]);
    let mut tones = Vec::with_capacity(offsets.len());
    let mut ms_ref = None;
    for off in &offsets {
        let (rho, ms) = evolve_single_tone(params, drive_frequency + off, spec.polarization_time, &initial)?
            .drain_into(&mut warnings);
        tones.push(tone_observables(&rho, &ms, params.target)?);
        ms_ref.get_or_insert(ms);
    }
    let ms = ms_ref.expect("at least one tone");
    let obs = average_tones(&tones);
    let target_split = match params.target {
        TargetTransition::Minus => ms.big_delta,
        TargetTransition::Plus => ms.plus_splitting,
    };
    let (lo, hi) = if ms.delta <= target_split { (ms.delta, target_split) } else { (target_split, ms.delta) };
    let regime = classify_regime_with(params.rabi, lo, hi, &spec.regimes)?;
    Ok(SweepPoint {
        value,
        drive_frequency,
        rabi: params.rabi,
        field_mt: params.field.magnitude_mt,
        populations: obs.populations,
        polarization_zero_axis: obs.pol_zero,
        polarization_target_axis: obs.pol_target,
        polarization_z: obs.pol_z,
        delta: ms.delta,
        big_delta: target_split,
        regime,
        warnings,
    })
}

/// Arithmetic mean, accumulated in tone order.
fn average_tones(tones: &[ToneObservables]) -> ToneObservables {
    let n = tones.len() as f64;
    let mean = |f: &dyn Fn(&ToneObservables) -> f64| tones.iter().map(f).fold(0.0, |acc, x| acc + x) / n;
    ToneObservables {
        populations: std::array::from_fn(|k| mean(&|t| t.populations[k])),
        pol_zero: mean(&|t| t.pol_zero),
        pol_target: mean(&|t| t.pol_target),
        pol_z: mean(&|t| t.pol_z),
    }
}

/// Evaluates every grid point in parallel and assembles them in grid order.
fn run_grid(spec: &SweepSpec, point: impl Fn(f64) -> Result<SweepPoint> + Sync) -> Result<SweepResult> {
    spec.validate()?;
    let points: Vec<SweepPoint> = spec
        .grid
        .par_iter()
        .enumerate()
        .map(|(k, &x)| point(x).map_err(|e| e.at_point(k, x)))
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    for p in &points {
        push_unique(&mut warnings, p.warnings.iter().cloned());
    }
    Ok(SweepResult { variable: spec.variable, points, warnings })
}

fn expect_variable(spec: &SweepSpec, v: SweptVariable) -> Result<()> {
    if spec.variable != v {
        return Err(Error::Precondition(format!("sweep variable is {:?}, expected {v:?}", spec.variable)));
    }
    Ok(())
}

/// Populations and polarizations as a function of the drive frequency.
pub fn frequency_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    expect_variable(spec, SweptVariable::MwFrequency)?;
    run_grid(spec, |w| {
        let p = SystemParams { drive_frequency: w, ..spec.params.clone() };
        simulate_point(&p, w, spec, w)
    })
}

fn resolve_drive(p: &SystemParams, resonance: &Resonance) -> Result<f64> {
    if *resonance == Resonance::Fixed {
        return Ok(p.drive_frequency);
    }
    let h = build_hamiltonian(p)?.value;
    let ms = manifold_structure_with(&h, p.thresholds.label_overlap)?;
    Ok(resonance.frequency(&ms, p.target, p.drive_frequency))
}

/// Populations and polarizations as a function of the Rabi frequency.
pub fn power_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    expect_variable(spec, SweptVariable::MwPower)?;
    spec.validate()?;
    let w = resolve_drive(&spec.params, &spec.resonance)?;
    run_grid(spec, |rabi| {
        let p = SystemParams { rabi, drive_frequency: w, ..spec.params.clone() };
        simulate_point(&p, w, spec, rabi)
    })
}

/// Populations and polarizations as a function of the field magnitude at a
/// fixed orientation, with the drive re-centred on the tracked transition
/// at every point.
pub fn field_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    expect_variable(spec, SweptVariable::FieldMagnitude)?;
    if spec.resonance == Resonance::Fixed {
        return Err(Error::Precondition("field sweep needs a tracked transition, not a fixed frequency".into()));
    }
    if spec.grid.iter().any(|&b| b < 0.0) {
        return Err(Error::InvalidParameter("field magnitudes must be non-negative".into()));
    }
    run_grid(spec, |b| {
        let mut p = SystemParams { field: spec.params.field.with_magnitude(b), ..spec.params.clone() };
        let w = resolve_drive(&p, &spec.resonance)?;
        p.drive_frequency = w;
        simulate_point(&p, w, spec, b)
    })
}

/// The three populations reconstructed by the optical readout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeStateReadout {
    pub zero_up: f64,
    pub zero_down: f64,
    pub target_down: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpectrum {
    pub sweep: SweepResult,
    pub readout: Vec<ThreeStateReadout>,
}

/// Frequency sweep with the three populations the experiment resolves:
/// both `m_s = 0` eigenstates and the lower addressed eigenstate.
pub fn population_spectrum_model(spec: &SweepSpec) -> Result<PopulationSpectrum> {
    let sweep = frequency_sweep(spec)?;
    let lower = StateLabel::new(spec.params.target.level(), false);
    let readout = sweep
        .points
        .iter()
        .map(|p| ThreeStateReadout {
            zero_up: p.population(StateLabel::ZeroUp),
            zero_down: p.population(StateLabel::ZeroDown),
            target_down: p.population(lower),
        })
        .collect();
    Ok(PopulationSpectrum { sweep, readout })
}

/// Stationary state of the single-tone rotating-frame dynamics.
pub fn steady_state_point(params: &SystemParams) -> Result<Flagged<(DensityMatrix, ManifoldStructure)>> {
    let mut warnings = Vec::new();
    let h = build_hamiltonian(params)?.drain_into(&mut warnings);
    let ms = manifold_structure_with(&h, params.thresholds.label_overlap)?;
    let rf = rotating_frame_with(&h, params.drive_frequency, params.rabi, params.target, &params.thresholds)?
        .drain_into(&mut warnings);
    let jumps: Vec<JumpOperator> = jump_operators(params)?
        .into_iter()
        .flat_map(|j| {
            let rate = j.rate;
            rf.frequency_components(&j.operator).into_iter().map(move |op| JumpOperator::new(op, rate))
        })
        .collect();
    let l = build_liouvillian(&rf.hamiltonian, &jumps)?;
    let ss = crate::lindblad::steady_state(&l)?.drain_into(&mut warnings);
    let rho = DensityMatrix::new(rf.secular_part(ss.matrix()))?;
    Ok(Flagged::new((rho, ms), warnings))
}

/// Reduced nuclear Bloch vector of a joint state.
pub fn nuclear_bloch(rho: &DensityMatrix) -> [f64; 3] {
    let n: ComplexMatrix = rho.nuclear_state();
    debug_assert_eq!(n.dim(), NUCLEAR_DIM);
    [2.0 * n[(1, 0)].re, 2.0 * n[(1, 0)].im, n[(0, 0)].re - n[(1, 1)].re]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_examples() {
        assert_eq!(classify_regime(1.4, 8.8, 130.0).unwrap(), RegimeLabel::Selective);
        assert_eq!(classify_regime(11.9, 8.8, 130.0).unwrap(), RegimeLabel::Lambda);
        assert_eq!(classify_regime(500.0, 8.8, 130.0).unwrap(), RegimeLabel::Broadband);
        assert!(matches!(classify_regime(1.0, 10.0, 5.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn comb_offsets_symmetric() {
        assert_eq!(CombSpec::default().offsets(), vec![-2.16, 0.0, 2.16]);
        assert_eq!(CombSpec { tone_count: 1, spacing: 1.0 }.offsets(), vec![0.0]);
    }

    #[test]
    fn polarization_rejects_non_unit_axis() {
        let rho = DensityMatrix::maximally_mixed();
        assert!(nuclear_polarization(&rho, [1.0, 1.0, 0.0]).is_err());
        assert_eq!(nuclear_polarization(&rho, [0.0, 0.0, 1.0]).unwrap(), 0.0);
    }
}
