//! The four NV orientations in a diamond see the same field at different
//! angles, and so have different splittings and line weights.
//!
//! cargo run --example orientations

use nv_dnp::hamiltonian::{build_hamiltonian, manifold_structure, orientation_fields, transition_table, HyperfineTensor, SystemParams};
use nv_dnp::spin_ops::FieldVector;

fn main() -> nv_dnp::Result<()> {
    let base = SystemParams::new(
        FieldVector::from_degrees(4.04, 42.0, 85.0)?,
        HyperfineTensor::axial(199.7, 120.3, 106f64.to_radians(), 120f64.to_radians())?,
    );
    for (k, f) in orientation_fields(&base.field).iter().enumerate() {
        let p = SystemParams { field: *f, ..base.clone() };
        let ms = manifold_structure(&build_hamiltonian(&p)?.value)?;
        println!(
            "NV {k}: theta {:6.2} deg  phi {:7.2} deg  delta {:7.3} MHz  Delta {:8.3} MHz",
            f.theta.to_degrees(),
            f.phi.to_degrees(),
            ms.delta,
            ms.big_delta
        );
        for t in transition_table(&ms, p.target).iter().filter(|t| t.weight > 0.05) {
            println!("    {} -> {}  {:10.3} MHz  weight {:.3}", t.from, t.to, t.frequency, t.weight);
        }
    }
    Ok(())
}
