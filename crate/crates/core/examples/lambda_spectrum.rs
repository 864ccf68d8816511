//! A drive between delta and Delta addresses both m_s = 0 states at once.
//! The single-tone spectrum is compared with a three-tone comb.
//!
//! cargo run --release --example lambda_spectrum

use nv_dnp::experiments::{frequency_sweep, CombSpec, Resonance, SweepSpec, SweptVariable};
use nv_dnp::hamiltonian::{build_hamiltonian, manifold_structure, HyperfineTensor, SystemParams};
use nv_dnp::spin_ops::FieldVector;

fn main() -> nv_dnp::Result<()> {
    let mut p = SystemParams::new(
        FieldVector::from_degrees(4.04, 42.0, 85.0)?,
        HyperfineTensor::axial(199.7, 120.3, 106f64.to_radians(), 120f64.to_radians())?,
    );
    p.rabi = 30.0;

    let ms = manifold_structure(&build_hamiltonian(&p)?.value)?;
    let centre = Resonance::Midpoint.frequency(&ms, p.target, 0.0);
    let grid: Vec<f64> = (0..61).map(|k| centre - 60.0 + 2.0 * k as f64).collect();

    let mut spec = SweepSpec::new(SweptVariable::MwFrequency, grid, p, 30.0);
    let single = frequency_sweep(&spec)?;
    spec.comb = Some(CombSpec::default());
    let comb = frequency_sweep(&spec)?;

    println!("# offset_mhz\tsingle\tcomb\tregime");
    for (a, b) in single.points.iter().zip(&comb.points) {
        println!("{:+.1}\t{:+.5}\t{:+.5}\t{}", a.value - centre, a.polarization_zero_axis, b.polarization_zero_axis, a.regime.as_str());
    }
    Ok(())
}
