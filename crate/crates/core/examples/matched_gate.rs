//! Runs the full controlled-Z protocol at the matched point with a
//! narrowband pulse and prints the resulting truth table.

use cavity_cz::model::{matching_g, Params};
use cavity_cz::protocol::{gate_truth_table, run_gate, StorageModel};
use cavity_cz::wavepacket::{SpectralGrid, Wavepacket};
use num_complex::Complex64;

fn main() -> Result<(), cavity_cz::Error> {
    let kappa = 2.0;
    let delta = 1.0;
    let g = matching_g(kappa, delta)?;
    let params = Params::new(g, kappa, delta, 0.0);

    // a pulse a thousand times narrower than the cavity line
    let grid = SpectralGrid::new(-0.5, 0.5, 4096)?;
    let signal = Wavepacket::gaussian(grid, 0.0, kappa / 1000.0)?;

    let equal = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let result = run_gate(&params, &signal, &StorageModel::default(), (equal, equal))?;
    print!("{}", gate_truth_table(&result));
    Ok(())
}
