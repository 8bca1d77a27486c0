//! Builds the two pulse shapes on a common grid and reports their norms and
//! moments in both domains.

use cavity_cz::wavepacket::{SpectralGrid, Wavepacket};

fn moments(xs: &[f64], weights: &[f64]) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    let mean: f64 = xs.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / total;
    let var: f64 = xs
        .iter()
        .zip(weights)
        .map(|(x, w)| (x - mean).powi(2) * w)
        .sum::<f64>()
        / total;
    (mean, var.sqrt())
}

fn report(name: &str, packet: Wavepacket) {
    let grid = *packet.grid();
    let spectral_weights: Vec<f64> = packet.spectral().iter().map(|f| f.norm_sqr()).collect();
    let (nu_mean, nu_std) = moments(&grid.frequencies(), &spectral_weights);

    let packet = packet.transform_to_time();
    let temporal_weights: Vec<f64> = packet
        .temporal()
        .expect("transform_to_time fills it")
        .iter()
        .map(|f| f.norm_sqr())
        .collect();
    let (t_mean, t_std) = moments(&grid.times(), &temporal_weights);

    println!("{name}");
    println!("  norm                 {:.12}", packet.norm());
    println!("  spectral mean/std    {nu_mean:+.6} / {nu_std:.6}");
    println!("  temporal mean/std    {t_mean:+.6} / {t_std:.6}");
}

fn main() -> Result<(), cavity_cz::Error> {
    let grid = SpectralGrid::new(-40.0, 40.0, 4096)?;
    report("gaussian (width 0.1)", Wavepacket::gaussian(grid, 0.0, 0.1)?);

    // the lorentzian tails of the rising exponential force a grid several
    // decades wider than its spectral half-width
    let wide = SpectralGrid::new(-4.0e5, 4.0e5, 1 << 22)?;
    report(
        "rising exponential (duration 1)",
        Wavepacket::rising_exponential(wide, 1.0)?,
    );
    Ok(())
}
