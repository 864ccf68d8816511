//! Frequency sweep with a weak drive that resolves both m_s = 0 lines.
//!
//! cargo run --release --example selective_spectrum

use nv_dnp::analysis::prominent_maxima;
use nv_dnp::experiments::{frequency_sweep, Resonance, SweepSpec, SweptVariable};
use nv_dnp::hamiltonian::{build_hamiltonian, manifold_structure, HyperfineTensor, SystemParams};
use nv_dnp::spin_ops::FieldVector;

fn main() -> nv_dnp::Result<()> {
    let mut p = SystemParams::new(
        FieldVector::from_degrees(4.04, 42.0, 85.0)?,
        HyperfineTensor::axial(199.7, 120.3, 106f64.to_radians(), 120f64.to_radians())?,
    );
    p.rabi = 1.4;

    let ms = manifold_structure(&build_hamiltonian(&p)?.value)?;
    let centre = Resonance::Midpoint.frequency(&ms, p.target, 0.0);
    let grid: Vec<f64> = (0..121).map(|k| centre - 12.0 + 0.2 * k as f64).collect();

    let r = frequency_sweep(&SweepSpec::new(SweptVariable::MwFrequency, grid, p, 30.0))?;
    let pol = r.polarization_zero_axis();
    println!("# offset_mhz\tpolarization");
    for (pt, y) in r.points.iter().zip(&pol) {
        println!("{:+.2}\t{:+.5}", pt.value - centre, y);
    }
    let neg: Vec<f64> = pol.iter().map(|v| -v).collect();
    eprintln!("positive peaks at {:?}", prominent_maxima(&pol, 0.02).iter().map(|&i| r.points[i].value - centre).collect::<Vec<_>>());
    eprintln!("negative peaks at {:?}", prominent_maxima(&neg, 0.02).iter().map(|&i| r.points[i].value - centre).collect::<Vec<_>>());
    Ok(())
}
