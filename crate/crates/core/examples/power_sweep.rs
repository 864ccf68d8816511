//! Polarization against Rabi frequency with the drive on the |0,b_down> line.
//!
//! cargo run --release --example power_sweep

use nv_dnp::analysis::argmax;
use nv_dnp::experiments::{power_sweep, Resonance, SweepSpec, SweptVariable};
use nv_dnp::hamiltonian::{HyperfineTensor, SystemParams};
use nv_dnp::spin_ops::FieldVector;

fn main() -> nv_dnp::Result<()> {
    let p = SystemParams::new(
        FieldVector::from_degrees(4.04, 42.0, 85.0)?,
        HyperfineTensor::axial(199.7, 120.3, 106f64.to_radians(), 120f64.to_radians())?,
    );
    // log spaced, 0.05 to 200 MHz
    let grid: Vec<f64> = (0..37).map(|k| 0.05 * 10f64.powf(k as f64 / 10.0)).take_while(|r| *r <= 200.0).collect();
    let mut spec = SweepSpec::new(SweptVariable::MwPower, grid, p, 30.0);
    spec.resonance = Resonance::SelectiveDown;
    let r = power_sweep(&spec)?;

    println!("# rabi_mhz\tpol_ms0_axis\tregime");
    for pt in &r.points {
        println!("{:.4}\t{:+.5}\t{}", pt.value, pt.polarization_zero_axis, pt.regime.as_str());
    }
    let mag: Vec<f64> = r.polarization_zero_axis().iter().map(|v| v.abs()).collect();
    if let Some(i) = argmax(&mag) {
        eprintln!("largest |P| = {:.4} at {:.3} MHz", mag[i], r.points[i].value);
    }
    Ok(())
}
