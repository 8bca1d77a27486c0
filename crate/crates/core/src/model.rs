//! Physical rates of the cavity/atom system, the branch scattering phase,
//! and the matching condition that ties them together.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates of the coupled cavity/atom system, all expressed in one
/// angular-frequency unit of the caller's choosing. Only the ratios
/// 2g^2/(kappa*delta), nu/kappa and gamma/delta enter any observable, so
/// kappa = 1 is a fine convention and the one the examples use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Atom-cavity coupling rate.
    pub g: f64,
    /// Cavity field decay rate into the single input/output channel.
    pub kappa: f64,
    /// Ground-state splitting. Its sign flips the sign of the gate phase.
    pub delta: f64,
    /// Atomic coherence decay rate, a pure loss channel.
    pub gamma: f64,
    /// Reference frequency of the rotating frame. Bookkeeping only; it
    /// never enters a computed amplitude.
    pub omega0: f64,
}

impl Params {
    pub fn new(g: f64, kappa: f64, delta: f64, gamma: f64) -> Self {
        Params {
            g,
            kappa,
            delta,
            gamma,
            omega0: 0.0,
        }
    }

    /// Checks the physical-regime invariants, reporting the first violated
    /// one by name. The scattering and dynamics routines assume a validated
    /// parameter set but stay well defined in the g -> 0 limit, which some
    /// oracle tests exercise directly.
    pub fn validate(&self) -> Result<()> {
        let finite = self.g.is_finite()
            && self.kappa.is_finite()
            && self.delta.is_finite()
            && self.gamma.is_finite()
            && self.omega0.is_finite();
        if !finite {
            return Err(Error::InvalidParams("all rates must be finite".into()));
        }
        if !(self.g > 0.0) {
            return Err(Error::InvalidParams("g must be positive".into()));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidParams("kappa must be positive".into()));
        }
        if self.delta == 0.0 {
            return Err(Error::InvalidParams("delta must be nonzero".into()));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidParams("gamma must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Branch phase phi, with tan(phi) = 2g^2/(kappa*delta), and the
/// conditional phase 4*phi the full two-pass protocol accumulates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringPhase {
    pub phi: f64,
    pub controlled_phase: f64,
}

/// Narrowband phase picked up on reflection: branch 1 rotates by -2*phi,
/// branch 2 by +2*phi, so one stored control photon shifts the signal by
/// 4*phi relative to none.
pub fn scattering_phase(params: &Params) -> ScatteringPhase {
    let phi = (2.0 * params.g * params.g / (params.kappa * params.delta)).atan();
    ScatteringPhase {
        phi,
        controlled_phase: 4.0 * phi,
    }
}

/// Coupling that puts the branch phase exactly at pi/4 for the given kappa
/// and delta, i.e. solves 2g^2/(kappa*delta) = 1 for g.
pub fn matching_g(kappa: f64, delta: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParams("kappa must be positive".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParams(
            "matching requires delta > 0; a negative delta gives phase -pi/4 with g unchanged".into(),
        ));
    }
    Ok((kappa * delta / 2.0).sqrt())
}

/// Splitting that satisfies the matching condition for the given g and
/// kappa: delta = 2g^2/kappa.
pub fn matching_delta(g: f64, kappa: f64) -> f64 {
    2.0 * g * g / kappa
}
