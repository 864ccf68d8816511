//! Long-time limit of pumping plus a selective drive, compared with a
//! finite polarization time.
//!
//! cargo run --release --example steady_state

use nv_dnp::experiments::{simulate_point, steady_state_point, nuclear_polarization, Resonance, SweepSpec, SweptVariable};
use nv_dnp::hamiltonian::{HyperfineTensor, StateLabel, SystemParams};
use nv_dnp::spin_ops::{ElectronLevel, FieldVector};

fn main() -> nv_dnp::Result<()> {
    let mut p = SystemParams::new(
        FieldVector::from_degrees(4.04, 42.0, 85.0)?,
        HyperfineTensor::axial(199.7, 120.3, 106f64.to_radians(), 120f64.to_radians())?,
    );
    p.rabi = 1.4;

    for resonance in [Resonance::SelectiveDown, Resonance::SelectiveUp] {
        let h = nv_dnp::hamiltonian::build_hamiltonian(&p)?.value;
        let ms = nv_dnp::hamiltonian::manifold_structure(&h)?;
        let mut q = p.clone();
        q.drive_frequency = resonance.frequency(&ms, q.target, 0.0);

        let ss = steady_state_point(&q)?;
        let (rho, sms) = &ss.value;
        let pops = sms.populations(rho.matrix());
        let p_inf = nuclear_polarization(rho, sms.axis(ElectronLevel::Zero))?;

        let spec = SweepSpec::new(SweptVariable::MwFrequency, vec![q.drive_frequency], q.clone(), 30.0);
        let at_30 = simulate_point(&q, q.drive_frequency, &spec, q.drive_frequency)?;

        println!("{resonance:?} at {:.3} MHz", q.drive_frequency);
        for l in StateLabel::ALL {
            println!("  {:<16} {:.5}", l.column(), pops[l.position()]);
        }
        println!("  polarization: steady {:+.5}, after 30 us {:+.5}", p_inf, at_30.polarization_zero_axis);
    }
    Ok(())
}
