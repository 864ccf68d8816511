//! Field strength dependence at fixed orientation, with the drive tracking
//! the selective line. Points inside the excited-state anti-crossing window
//! are flagged.
//!
//! cargo run --release --example field_sweep

use nv_dnp::experiments::{field_sweep, Resonance, SweepSpec, SweptVariable};
use nv_dnp::hamiltonian::{HyperfineTensor, SystemParams};
use nv_dnp::spin_ops::FieldVector;

fn main() -> nv_dnp::Result<()> {
    let mut p = SystemParams::new(
        FieldVector::from_degrees(4.04, 42.0, 85.0)?,
        HyperfineTensor::axial(199.7, 120.3, 106f64.to_radians(), 120f64.to_radians())?,
    );
    p.rabi = 1.4;
    let grid: Vec<f64> = (1..=40).map(|k| 2.0 * k as f64 - 1.0).collect();
    let mut spec = SweepSpec::new(SweptVariable::FieldMagnitude, grid, p, 30.0);
    spec.resonance = Resonance::SelectiveDown;
    let r = field_sweep(&spec)?;

    println!("# field_mt\tdrive_mhz\tpol_ms0_axis\tpol_target_axis\tflagged");
    for pt in &r.points {
        println!(
            "{:.1}\t{:.3}\t{:+.5}\t{:+.5}\t{}",
            pt.value,
            pt.drive_frequency,
            pt.polarization_zero_axis,
            pt.polarization_target_axis,
            !pt.warnings.is_empty()
        );
    }
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}
