//! Tabulates the reflection coefficient for both atomic branches across the
//! cavity linewidth and prints the on-resonance phases.

use cavity_cz::model::Params;
use cavity_cz::transfer::{reflection_exact, Branch};
use cavity_cz::wavepacket::SpectralGrid;

fn main() -> Result<(), cavity_cz::Error> {
    let params = Params::new(1.0, 2.0, 1.0, 0.0);
    params.validate()?;

    let grid = SpectralGrid::new(-3.0, 3.0, 16)?;
    println!("{:>8}  {:>22}  {:>22}", "nu", "arg r1", "arg r2");
    for k in 0..grid.n_points() {
        let nu = grid.nu(k);
        let r1 = reflection_exact(&params, Branch::Atom1, nu)?;
        let r2 = reflection_exact(&params, Branch::Atom2, nu)?;
        println!("{:8.3}  {:22.15}  {:22.15}", nu, r1.arg(), r2.arg());
    }

    let r1 = reflection_exact(&params, Branch::Atom1, 0.0)?;
    let r2 = reflection_exact(&params, Branch::Atom2, 0.0)?;
    println!();
    println!("on resonance: r1 = {r1}, r2 = {r2}");
    println!("phase difference: {:.15} rad", (r2 / r1).arg());
    Ok(())
}
