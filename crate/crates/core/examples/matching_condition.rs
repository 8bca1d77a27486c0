//! Shows how the controlled phase walks through pi as the coupling crosses
//! the matching condition g = sqrt(kappa delta / 2).

use cavity_cz::model::{matching_delta, matching_g, Params};
use cavity_cz::protocol::{run_gate, StorageModel};
use cavity_cz::wavepacket::{SpectralGrid, Wavepacket};
use num_complex::Complex64;

fn main() -> Result<(), cavity_cz::Error> {
    let kappa = 2.0;
    let delta = 1.0;
    let g_star = matching_g(kappa, delta)?;
    println!("matched coupling: g = {g_star:.12}");
    println!("inverse check: delta = {:.12}", matching_delta(g_star, kappa));
    println!();

    let grid = SpectralGrid::new(-0.5, 0.5, 4096)?;
    let signal = Wavepacket::gaussian(grid, 0.0, kappa / 1000.0)?;
    let equal = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);

    println!("{:>8}  {:>20}  {:>12}", "g", "controlled phase", "phase - pi");
    for step in 0..9 {
        let g = g_star * (0.6 + 0.1 * step as f64);
        let params = Params::new(g, kappa, delta, 0.0);
        let result = run_gate(&params, &signal, &StorageModel::default(), (equal, equal))?;
        println!(
            "{:8.4}  {:20.12}  {:+12.3e}",
            g,
            result.controlled_phase,
            result.controlled_phase - std::f64::consts::PI
        );
    }
    Ok(())
}
