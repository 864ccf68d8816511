//! Non-fatal validity flags raised while building or evolving a model.

use serde::{Deserialize, Serialize};

use crate::spin_ops::ElectronLevel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// `|D0 − γe|B||` fell below the anti-crossing guard.
    AntiCrossing { field_mt: f64, gap_mhz: f64, threshold_mhz: f64 },
    /// Field magnitude inside the excited-state anti-crossing window.
    ExcitedStateAntiCrossing { field_mt: f64, window_mt: (f64, f64) },
    /// `|D0 ± γe B0|` is not large enough compared with the hyperfine entries.
    Secularity { ratio: f64, required: f64 },
    /// Drive frequency too close to the transition that is not addressed.
    RwaProximity { detuning_mhz: f64, limit_mhz: f64 },
    /// An eigenstate's largest overlap with a bare electron level is small.
    AmbiguousLabel { state: usize, level: ElectronLevel, overlap: f64 },
    /// The generator's null space has more than one dimension.
    NonUniqueSteadyState { nullity: usize },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::AntiCrossing { field_mt, gap_mhz, threshold_mhz } => write!(
                f,
                "anti-crossing guard: |D0 - gamma_e B| = {gap_mhz:.3} MHz < {threshold_mhz} MHz at {field_mt} mT"
            ),
            Warning::ExcitedStateAntiCrossing { field_mt, window_mt } => write!(
                f,
                "field {field_mt} mT inside excited-state anti-crossing window [{}, {}] mT",
                window_mt.0, window_mt.1
            ),
            Warning::Secularity { ratio, required } => {
                write!(f, "secular approximation weak: |D0 ± gamma_e B0| / max|A| = {ratio:.2} < {required}")
            }
            Warning::RwaProximity { detuning_mhz, limit_mhz } => write!(
                f,
                "rotating-wave approximation unreliable: {detuning_mhz:.3} MHz from the non-addressed transition (< {limit_mhz:.3} MHz)"
            ),
            Warning::AmbiguousLabel { state, level, overlap } => {
                write!(f, "eigenstate {state} labeled m_s={level} with overlap only {overlap:.3}")
            }
            Warning::NonUniqueSteadyState { nullity } => {
                write!(f, "steady state not unique (null space dimension {nullity})")
            }
        }
    }
}

/// A value together with the warnings raised while computing it.
#[derive(Clone, Debug)]
pub struct Flagged<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Flagged<T> {
    pub fn new(value: T, warnings: Vec<Warning>) -> Self {
        Self { value, warnings }
    }

    pub fn clean(value: T) -> Self {
        Self { value, warnings: Vec::new() }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Flagged<U> {
        Flagged { value: f(self.value), warnings: self.warnings }
    }

    /// Moves the warnings into `sink` and returns the value.
    pub fn drain_into(self, sink: &mut Vec<Warning>) -> T {
        push_unique(sink, self.warnings);
        self.value
    }
}

/// Appends warnings that are not already present.
pub fn push_unique(sink: &mut Vec<Warning>, new: impl IntoIterator<Item = Warning>) {
    for w in new {
        if !sink.contains(&w) {
            sink.push(w);
        }
    }
}
