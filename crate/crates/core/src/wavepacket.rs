//! Single-photon wavepackets on uniform frequency grids, with an exact
//! discrete bridge between the spectral and temporal pictures.
//!
//! The continuum convention is
//!
//!   f~(t) = 1/sqrt(2 pi) * integral f(nu) exp(-i nu t) dnu
//!
//! and its inverse with exp(+i nu t). The discrete pair below reproduces
//! that convention on the grid exactly: a round trip is an identity up to
//! f64 rounding and Parseval holds with no fudge factors.

use std::f64::consts::PI;
use std::io;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform frequency grid in the rotating frame nu = omega - omega0.
///
/// Samples sit at nu_k = nu_min + k*dnu for k in 0..n_points; nu_max itself
/// is excluded, which is what makes the FFT bridge exact. The conjugate
/// time grid is t_j = (j - n/2)*dt with dt = 2 pi / (n*dnu).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralGrid {
    nu_min: f64,
    nu_max: f64,
    n_points: usize,
}

impl SpectralGrid {
    pub fn new(nu_min: f64, nu_max: f64, n_points: usize) -> Result<Self> {
        if !(nu_min.is_finite() && nu_max.is_finite() && nu_min < nu_max) {
            return Err(Error::InvalidParams(
                "grid needs finite bounds with nu_min < nu_max".into(),
            ));
        }
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::InvalidParams(
                "grid size must be a power of two, at least 16".into(),
            ));
        }
        Ok(SpectralGrid {
            nu_min,
            nu_max,
            n_points,
        })
    }

    pub fn nu_min(&self) -> f64 {
        self.nu_min
    }

    pub fn nu_max(&self) -> f64 {
        self.nu_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn d_nu(&self) -> f64 {
        (self.nu_max - self.nu_min) / self.n_points as f64
    }

    pub fn dt(&self) -> f64 {
        2.0 * PI / (self.n_points as f64 * self.d_nu())
    }

    pub fn nu(&self, k: usize) -> f64 {
        self.nu_min + k as f64 * self.d_nu()
    }

    pub fn t(&self, j: usize) -> f64 {
        (j as f64 - (self.n_points / 2) as f64) * self.dt()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.nu(k)).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.t(j)).collect()
    }
}

/// Discrete version of the frequency-to-time transform. Exact inverse of
/// [`temporal_to_spectral`]; the (-1)^k weave recenters the FFT so that the
/// time axis comes out in natural order.
pub fn spectral_to_temporal(grid: &SpectralGrid, spectral: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(spectral.len(), grid.n_points());
    let n = grid.n_points();
    let mut buf: Vec<Complex64> = spectral
        .iter()
        .enumerate()
        .map(|(k, f)| if k & 1 == 1 { -f } else { *f })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = grid.d_nu() / (2.0 * PI).sqrt();
    for (j, v) in buf.iter_mut().enumerate() {
        *v *= scale * Complex64::from_polar(1.0, -grid.nu_min() * grid.t(j));
    }
    buf
}

/// Discrete version of the time-to-frequency transform.
pub fn temporal_to_spectral(grid: &SpectralGrid, temporal: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(temporal.len(), grid.n_points());
    let n = grid.n_points();
    let mut buf: Vec<Complex64> = temporal
        .iter()
        .enumerate()
        .map(|(j, v)| v * Complex64::from_polar(1.0, grid.nu_min() * grid.t(j)))
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = grid.dt() / (2.0 * PI).sqrt();
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= scale;
        if k & 1 == 1 {
            *v = -*v;
        }
    }
    buf
}

/// A single-photon wavepacket: spectral amplitudes on a [`SpectralGrid`],
/// plus an optional cached temporal representation.
///
/// The named constructors produce unit-norm packets. Scattered outputs keep
/// whatever norm the physics left them with (at most 1), via the `_raw`
/// constructors.
#[derive(Debug, Clone, Serialize)]
pub struct Wavepacket {
    grid: SpectralGrid,
    spectral: Vec<Complex64>,
    temporal: Option<Vec<Complex64>>,
}

impl Wavepacket {
    /// Gaussian spectral amplitude exp(-(nu - center)^2 / (2 width^2)),
    /// normalized on the grid. `width` is the standard deviation of the
    /// amplitude, so the intensity |f|^2 has variance width^2/2.
    pub fn gaussian(grid: SpectralGrid, center_nu: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && center_nu.is_finite()) {
            return Err(Error::InvalidParams(
                "gaussian needs a finite center and positive width".into(),
            ));
        }
        if center_nu - 8.0 * width < grid.nu_min() || center_nu + 8.0 * width > grid.nu_max() {
            return Err(Error::GridTooNarrow(format!(
                "gaussian at {center_nu} with width {width} needs 8 widths of clearance inside [{}, {})",
                grid.nu_min(),
                grid.nu_max(),
            )));
        }
        let spectral = (0..grid.n_points())
            .map(|k| {
                let x = (grid.nu(k) - center_nu) / width;
                Complex64::new((-0.5 * x * x).exp(), 0.0)
            })
            .collect();
        Ok(Self::normalize_spectral(grid, spectral))
    }

    /// Temporal profile N*exp(t / (2 duration)) for t <= 0 and zero
    /// afterwards, the time-reverse of free cavity decay. Both
    /// representations are filled from closed forms and normalized on the
    /// grid; the spectral side is the Lorentzian amplitude
    /// 1/(1/(2 duration) + i nu).
    ///
    /// The Lorentzian tails die off slowly, so the grid has to be very wide
    /// compared to 1/duration before the truncated mass drops below 1e-6.
    pub fn rising_exponential(grid: SpectralGrid, duration: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParams(
                "rising exponential needs a positive duration".into(),
            ));
        }
        let a = 1.0 / (2.0 * duration);
        let inside = ((grid.nu_max() / a).atan() - (grid.nu_min() / a).atan()) / PI;
        let tail = 1.0 - inside;
        if tail > 1e-6 {
            return Err(Error::GridTooNarrow(format!(
                "lorentzian tail mass {tail:.3e} outside the grid exceeds 1e-6; \
                 the grid must extend to roughly |nu| = {:.3e}",
                2.0 * a / (PI * 1e-6)
            )));
        }
        let peak = 1.0 / duration.sqrt();
        let mut temporal: Vec<Complex64> = (0..grid.n_points())
            .map(|j| {
                let t = grid.t(j);
                if t <= 0.0 {
                    Complex64::new(peak * (t / (2.0 * duration)).exp(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let tnorm = (temporal.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dt()).sqrt();
        for v in temporal.iter_mut() {
            *v /= tnorm;
        }

        let scale = peak / (2.0 * PI).sqrt();
        let spectral = (0..grid.n_points())
            .map(|k| scale / Complex64::new(a, grid.nu(k)))
            .collect();
        let mut wp = Self::normalize_spectral(grid, spectral);
        wp.temporal = Some(temporal);
        Ok(wp)
    }

    /// Wraps caller-supplied spectral amplitudes, normalizing them.
    pub fn from_spectral(grid: SpectralGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::check_len(&grid, amplitudes.len())?;
        let norm = spectral_norm(&grid, &amplitudes);
        if norm == 0.0 {
            return Err(Error::InvalidParams("cannot normalize a zero wavepacket".into()));
        }
        Ok(Self::normalize_spectral(grid, amplitudes))
    }

    /// Wraps spectral amplitudes as they are, keeping their norm. Meant for
    /// scattered outputs whose norm below 1 is the loss record.
    pub fn from_spectral_raw(grid: SpectralGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::check_len(&grid, amplitudes.len())?;
        Ok(Wavepacket {
            grid,
            spectral: amplitudes,
            temporal: None,
        })
    }

    /// Builds a packet from temporal samples, computing the spectrum through
    /// the transform bridge. Keeps the norm as given.
    pub fn from_temporal_raw(grid: SpectralGrid, temporal: Vec<Complex64>) -> Result<Self> {
        Self::check_len(&grid, temporal.len())?;
        let spectral = temporal_to_spectral(&grid, &temporal);
        Ok(Wavepacket {
            grid,
            spectral,
            temporal: Some(temporal),
        })
    }

    fn check_len(grid: &SpectralGrid, len: usize) -> Result<()> {
        if len != grid.n_points() {
            return Err(Error::InvalidParams(format!(
                "amplitude count {len} does not match the {}-point grid",
                grid.n_points()
            )));
        }
        Ok(())
    }

    fn normalize_spectral(grid: SpectralGrid, mut spectral: Vec<Complex64>) -> Self {
        let norm = spectral_norm(&grid, &spectral);
        for v in spectral.iter_mut() {
            *v /= norm;
        }
        Wavepacket {
            grid,
            spectral,
            temporal: None,
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn spectral(&self) -> &[Complex64] {
        &self.spectral
    }

    /// Temporal samples, if they have been computed.
    pub fn temporal(&self) -> Option<&[Complex64]> {
        self.temporal.as_deref()
    }

    /// Returns the packet with the temporal cache filled.
    pub fn transform_to_time(mut self) -> Self {
        if self.temporal.is_none() {
            self.temporal = Some(spectral_to_temporal(&self.grid, &self.spectral));
        }
        self
    }

    /// L2 norm of the spectral amplitudes, sqrt(sum |f|^2 dnu).
    pub fn norm(&self) -> f64 {
        spectral_norm(&self.grid, &self.spectral)
    }

    /// Splits the packet into a unit-norm copy and the norm it carried.
    pub fn normalized(mut self) -> Result<(Self, f64)> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::InvalidParams("cannot normalize a zero wavepacket".into()));
        }
        for v in self.spectral.iter_mut() {
            *v /= norm;
        }
        if let Some(temporal) = self.temporal.as_mut() {
            for v in temporal.iter_mut() {
                *v /= norm;
            }
        }
        Ok((self, norm))
    }

    /// Discretized inner product integral conj(f_a) f_b dnu. Hermitian in
    /// its arguments; requires both packets to share one grid.
    pub fn overlap(&self, other: &Wavepacket) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let sum: Complex64 = self
            .spectral
            .iter()
            .zip(&other.spectral)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.grid.d_nu())
    }

    /// Writes the spectral amplitudes as CSV with columns nu, re, im.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "nu,re,im")?;
        for (k, v) in self.spectral.iter().enumerate() {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", self.grid.nu(k), v.re, v.im)?;
        }
        Ok(())
    }
}

fn spectral_norm(grid: &SpectralGrid, spectral: &[Complex64]) -> f64 {
    (spectral.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.d_nu()).sqrt()
}
