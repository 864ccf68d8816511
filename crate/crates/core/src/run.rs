//! Subcommand dispatch for the command-line tool: run one experiment from a
//! [`RunConfig`], write its data file and a JSON run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use crate::config::{parse_config, ConfigError, OutputFormat, RunConfig};
use crate::diagnostics::{push_unique, Warning};
use crate::error::Error;
use crate::experiments::{
    classify_regime_with, field_sweep, frequency_sweep, nuclear_bloch, power_sweep, steady_state_point, Resonance,
    SweepResult, SweepSpec, SweptVariable,
};
use crate::hamiltonian::{
    build_hamiltonian, manifold_structure_with, orientation_fields, transition_table, ManifoldStructure,
    StateLabel, TargetTransition, Transition,
};
use crate::spin_ops::ElectronLevel;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Eigen,
    SweepFrequency,
    SweepPower,
    SweepField,
    SteadyState,
    Transitions,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Eigen => "eigen",
            Subcommand::SweepFrequency => "sweep-frequency",
            Subcommand::SweepPower => "sweep-power",
            Subcommand::SweepField => "sweep-field",
            Subcommand::SteadyState => "steady-state",
            Subcommand::Transitions => "transitions",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numerical(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// 2 configuration, 3 numerical failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(e) => match e.root() {
                Error::InvalidParameter(_) | Error::Precondition(_) | Error::NonFinite(_) | Error::UnsupportedSpin(_) => 2,
                _ => 3,
            },
            RunError::Io { .. } => 4,
        }
    }

    fn config(key: &str, msg: impl Into<String>) -> Self {
        RunError::Config(ConfigError {
            issues: vec![crate::config::ConfigIssue {
                key: key.into(),
                line: None,
                kind: crate::config::IssueKind::Invalid(msg.into()),
            }],
        })
    }
}

/// Options given on the command line, taking precedence over the document.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub threads: Option<usize>,
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub data: String,
    pub manifest: serde_json::Value,
    pub data_path: Option<PathBuf>,
    pub manifest_path: Option<PathBuf>,
}

/// Reads a configuration file. A run manifest is accepted as well; its
/// echoed configuration is used.
pub fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io { path: path.into(), source })?;
    let text = match serde_json::from_str::<serde_json::Value>(&text) {
        Ok(v) => match v.get("resolved_config").and_then(|c| c.as_str()) {
            Some(c) => c.to_string(),
            None => return Err(RunError::config("resolved_config", "JSON input is not a run manifest")),
        },
        Err(_) => text,
    };
    Ok(parse_config(&text)?)
}

/// Runs a subcommand, writing files if an output path is configured.
pub fn run(cmd: Subcommand, mut cfg: RunConfig, opts: &RunOptions) -> Result<RunOutput, RunError> {
    if let Some(out) = &opts.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(f) = opts.format {
        cfg.output.format = f;
    }
    let started = Instant::now();
    let computed = match opts.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| RunError::config("--threads", e.to_string()))?;
            pool.install(|| compute(cmd, &cfg))
        }
        None => compute(cmd, &cfg),
    }?;
    let elapsed = started.elapsed().as_secs_f64();

    let data = match cfg.output.format {
        OutputFormat::Table => computed.table.clone(),
        OutputFormat::Structured => {
            let mut s = serde_json::to_string_pretty(&computed.structured).expect("serializable");
            s.push('\n');
            s
        }
    };
    let manifest = json!({
        "tool": "nv-dnp",
        "version": VERSION,
        "subcommand": cmd.name(),
        "resolved_config": cfg.to_toml(),
        "derived": computed.derived,
        "warnings": computed.warnings,
        "warning_messages": computed.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "wall_clock_seconds": elapsed,
    });

    let data_path = cfg.output.path.clone();
    let manifest_path = cfg.output.manifest.clone().or_else(|| {
        data_path.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    if let Some(p) = &data_path {
        write_file(p, &data)?;
    }
    if let Some(p) = &manifest_path {
        let mut text = serde_json::to_string_pretty(&manifest).expect("serializable");
        text.push('\n');
        write_file(p, &text)?;
    }
    Ok(RunOutput { data, manifest, data_path, manifest_path })
}

fn write_file(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|source| RunError::Io { path: path.into(), source })
}

struct Computed {
    table: String,
    structured: serde_json::Value,
    derived: serde_json::Value,
    warnings: Vec<Warning>,
}

fn fmt_f(x: f64) -> String {
    format!("{x:.11e}")
}

fn structure(cfg: &RunConfig) -> Result<(ManifoldStructure, Vec<Warning>), RunError> {
    let p = &cfg.params;
    let mut warnings = Vec::new();
    let h = build_hamiltonian(p)?.drain_into(&mut warnings);
    let ms = manifold_structure_with(&h, p.thresholds.label_overlap)?;
    push_unique(&mut warnings, ms.warnings.clone());
    Ok((ms, warnings))
}

fn derived(cfg: &RunConfig, ms: &ManifoldStructure) -> Result<serde_json::Value, RunError> {
    let p = &cfg.params;
    let target_split = match p.target {
        TargetTransition::Minus => ms.big_delta,
        TargetTransition::Plus => ms.plus_splitting,
    };
    let (lo, hi) = if ms.delta <= target_split { (ms.delta, target_split) } else { (target_split, ms.delta) };
    let regime = classify_regime_with(p.rabi, lo, hi, &cfg.sweep.regimes)?;
    let lower = StateLabel::new(p.target.level(), false);
    Ok(json!({
        "delta_mhz": ms.delta,
        "big_delta_mhz": ms.big_delta,
        "plus_splitting_mhz": ms.plus_splitting,
        "reference_rabi_mhz": p.rabi,
        "regime": regime.as_str(),
        "nuclear_axis_ms0": ms.axis(ElectronLevel::Zero),
        "nuclear_axis_ms_minus1": ms.axis(ElectronLevel::Minus),
        "nuclear_axis_ms_plus1": ms.axis(ElectronLevel::Plus),
        "axis_angle_deg": ms.axis_angle(ElectronLevel::Zero, p.target.level()).to_degrees(),
        "selective_down_mhz": ms.transition_frequency(StateLabel::ZeroDown, lower).abs(),
        "selective_up_mhz": ms.transition_frequency(StateLabel::ZeroUp, lower).abs(),
    }))
}

fn preamble(cmd: Subcommand, cfg: &RunConfig, ms: &ManifoldStructure) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# nv-dnp {VERSION} {}", cmd.name());
    let _ = writeln!(s, "# delta_mhz {}", fmt_f(ms.delta));
    let _ = writeln!(s, "# big_delta_mhz {}", fmt_f(ms.big_delta));
    let _ = writeln!(s, "# rabi_mhz {}", fmt_f(cfg.params.rabi));
    s
}

fn compute(cmd: Subcommand, cfg: &RunConfig) -> Result<Computed, RunError> {
    let (ms, mut warnings) = structure(cfg)?;
    let derived = derived(cfg, &ms)?;
    let mut table = preamble(cmd, cfg, &ms);
    let structured = match cmd {
        Subcommand::Eigen => {
            table.push_str("index\tlabel\tms\tenergy_mhz\toverlap\tambiguous\tbloch_x\tbloch_y\tbloch_z\n");
            for (k, st) in ms.states.iter().enumerate() {
                let b = st.nuclear_bloch;
                let _ = writeln!(
                    table,
                    "{k}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    st.label,
                    st.label.level(),
                    fmt_f(st.energy),
                    fmt_f(st.overlap),
                    st.ambiguous as u8,
                    fmt_f(b[0]),
                    fmt_f(b[1]),
                    fmt_f(b[2])
                );
            }
            let states: Vec<_> = ms
                .states
                .iter()
                .map(|st| {
                    json!({
                        "label": st.label.to_string(), "ms": st.label.level().to_string(), "energy_mhz": st.energy,
                        "overlap": st.overlap, "ambiguous": st.ambiguous, "nuclear_bloch": st.nuclear_bloch,
                    })
                })
                .collect();
            json!({ "states": states, "derived": derived })
        }
        Subcommand::Transitions => {
            table.push_str("orientation\ttheta_deg\tphi_deg\tfrom\tto\tfrequency_mhz\tmatrix_element_sq\tweight\n");
            let mut all = Vec::new();
            for (k, f) in orientation_fields(&cfg.params.field).iter().enumerate() {
                let p = crate::hamiltonian::SystemParams { field: *f, ..cfg.params.clone() };
                let h = build_hamiltonian(&p)?.drain_into(&mut warnings);
                let oms = manifold_structure_with(&h, p.thresholds.label_overlap)?;
                push_unique(&mut warnings, oms.warnings.clone());
                let rows: Vec<Transition> = transition_table(&oms, p.target);
                for t in &rows {
                    let _ = writeln!(
                        table,
                        "{k}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                        fmt_f(f.theta.to_degrees()),
                        fmt_f(f.phi.to_degrees()),
                        t.from,
                        t.to,
                        fmt_f(t.frequency),
                        fmt_f(t.matrix_element_sq),
                        fmt_f(t.weight)
                    );
                }
                all.push(json!({
                    "orientation": k, "theta_deg": f.theta.to_degrees(), "phi_deg": f.phi.to_degrees(),
                    "delta_mhz": oms.delta, "big_delta_mhz": oms.big_delta, "transitions": rows,
                }));
            }
            json!({ "orientations": all })
        }
        Subcommand::SteadyState => {
            let mut p = cfg.params.clone();
            let resonance = cfg.sweep.resonance.unwrap_or(Resonance::Fixed);
            p.drive_frequency = resonance.frequency(&ms, p.target, p.drive_frequency);
            let (rho, sms) = steady_state_point(&p)?.drain_into(&mut warnings);
            let pops = sms.populations(rho.matrix());
            let pz = crate::experiments::nuclear_polarization(&rho, sms.axis(ElectronLevel::Zero))?;
            let pt = crate::experiments::nuclear_polarization(&rho, sms.axis(p.target.level()))?;
            let bloch = nuclear_bloch(&rho);
            table.push_str("drive_frequency_mhz");
            for l in StateLabel::ALL {
                let _ = write!(table, "\t{}", l.column());
            }
            table.push_str("\tpol_ms0_axis\tpol_target_axis\tpol_z\n");
            let _ = write!(table, "{}", fmt_f(p.drive_frequency));
            for x in pops {
                let _ = write!(table, "\t{}", fmt_f(x));
            }
            let _ = writeln!(table, "\t{}\t{}\t{}", fmt_f(pz), fmt_f(pt), fmt_f(bloch[2]));
            json!({
                "drive_frequency_mhz": p.drive_frequency,
                "populations": StateLabel::ALL.iter().zip(pops).map(|(l, x)| (l.column(), x)).collect::<std::collections::BTreeMap<_, _>>(),
                "polarization_ms0_axis": pz, "polarization_target_axis": pt, "nuclear_bloch": bloch,
            })
        }
        Subcommand::SweepFrequency | Subcommand::SweepPower | Subcommand::SweepField => {
            let variable = match cmd {
                Subcommand::SweepFrequency => SweptVariable::MwFrequency,
                Subcommand::SweepPower => SweptVariable::MwPower,
                _ => SweptVariable::FieldMagnitude,
            };
            let result = sweep(cfg, variable, &ms)?;
            push_unique(&mut warnings, result.warnings.clone());
            write_sweep_table(&mut table, &result);
            serde_json::to_value(&result).expect("serializable")
        }
    };
    Ok(Computed { table, structured, derived, warnings })
}

fn sweep(cfg: &RunConfig, variable: SweptVariable, ms: &ManifoldStructure) -> Result<SweepResult, RunError> {
    let grid = cfg
        .sweep
        .grid
        .as_ref()
        .ok_or_else(|| RunError::config("sweep.values", "a sweep needs `sweep.values` or `sweep.start`/`stop`/`points`"))?
        .values();
    let p = &cfg.params;
    let grid = match (variable, cfg.sweep.center.resonance()) {
        (SweptVariable::MwFrequency, Some(r)) => {
            let c = r.frequency(ms, p.target, p.drive_frequency);
            grid.iter().map(|x| c + x).collect()
        }
        (_, Some(_)) => return Err(RunError::config("sweep.center", "only frequency sweeps can be centred")),
        _ => grid,
    };
    let mut spec = SweepSpec::new(variable, grid, p.clone(), cfg.sweep.time);
    spec.initial_state = cfg.sweep.initial.to_state()?;
    spec.comb = cfg.sweep.comb;
    spec.regimes = cfg.sweep.regimes;
    spec.resonance = match (variable, cfg.sweep.resonance) {
        (_, Some(r)) => r,
        _ => Resonance::SelectiveDown,
    };
    let out = match variable {
        SweptVariable::MwFrequency => frequency_sweep(&spec),
        SweptVariable::MwPower => power_sweep(&spec),
        SweptVariable::FieldMagnitude => field_sweep(&spec),
    }?;
    Ok(out)
}

/// Header row plus one tab-separated row per grid point.
pub fn write_sweep_table(out: &mut String, r: &SweepResult) {
    let mut header = vec![r.variable.column().to_string(), "drive_frequency_mhz".into(), "rabi_mhz".into(), "field_mt".into()];
    header.extend(StateLabel::ALL.iter().map(|l| l.column().to_string()));
    header.extend(
        ["pol_ms0_axis", "pol_target_axis", "pol_z", "delta_mhz", "big_delta_mhz", "regime", "flagged"]
            .iter()
            .map(|s| s.to_string()),
    );
    out.push_str(&header.join("\t"));
    out.push('\n');
    for p in &r.points {
        let mut row = vec![fmt_f(p.value), fmt_f(p.drive_frequency), fmt_f(p.rabi), fmt_f(p.field_mt)];
        row.extend(p.populations.iter().map(|x| fmt_f(*x)));
        row.extend([p.polarization_zero_axis, p.polarization_target_axis, p.polarization_z, p.delta, p.big_delta].map(fmt_f));
        row.push(p.regime.as_str().into());
        row.push((!p.warnings.is_empty() as u8).to_string());
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
}
