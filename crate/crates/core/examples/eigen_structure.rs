//! Eigenstates of the ground-state NV/13C pair at the reference field.
//!
//! cargo run --example eigen_structure

use nv_dnp::hamiltonian::{build_hamiltonian, manifold_structure, transition_table, HyperfineTensor, SystemParams, TargetTransition};
use nv_dnp::spin_ops::FieldVector;

fn main() -> nv_dnp::Result<()> {
    let field = FieldVector::from_degrees(4.04, 42.0, 85.0)?;
    let tensor = HyperfineTensor::axial(199.7, 120.3, 106f64.to_radians(), 120f64.to_radians())?;
    let params = SystemParams::new(field, tensor);

    let h = build_hamiltonian(&params)?;
    for w in &h.warnings {
        eprintln!("warning: {w}");
    }
    let ms = manifold_structure(&h.value)?;

    println!("{:<14} {:>14} {:>9}  nuclear Bloch vector", "state", "energy (MHz)", "overlap");
    for s in &ms.states {
        let b = s.nuclear_bloch;
        println!("{:<14} {:>14.4} {:>9.5}  ({:+.3}, {:+.3}, {:+.3})", s.label.to_string(), s.energy, s.overlap, b[0], b[1], b[2]);
    }
    println!("\ndelta = {:.4} MHz, Delta = {:.4} MHz", ms.delta, ms.big_delta);

    println!("\nallowed lines into m_s = -1:");
    for t in transition_table(&ms, TargetTransition::Minus) {
        println!("  {} -> {}  {:>10.4} MHz  weight {:.3}", t.from, t.to, t.frequency, t.weight);
    }
    Ok(())
}
