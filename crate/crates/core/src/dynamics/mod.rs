//! Right-hand sides of every evolution system: deterministic, Stratonovich and
//! Itô Born–Infeld / Maxwell, the Maxwell expectation equation, stochastic
//! Euler vorticity and the high-field MHD limit.

mod bi;
mod euler;
mod mhd;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::State;
use crate::real::Real;

pub use bi::{
    bi_rhs, expectation_rhs, ito_drift_correction, stochastic_increment, BiSystem, Closure,
};
pub use euler::{euler_vorticity_rhs, EulerSystem, VorticityState};
pub use mhd::{mhd_energy_density, mhd_rhs, mhd_stochastic_increment, MhdState, MhdSystem, H_FLOOR};

/// Evolution system `dX = f(X) dt + Σᵢ gᵢ(X) dWᵢ`.
///
/// Stratonovich systems are stepped with Heun; Itô systems include their
/// correction in `drift` and are stepped with Euler–Maruyama.
pub trait System<T: Real>: Send + Sync {
    type State: State<T>;

    fn noise_modes(&self) -> usize {
        0
    }

    fn drift(&self, x: &Self::State) -> Result<Self::State>;

    /// `Σᵢ gᵢ(x) dWᵢ`; `None` for deterministic systems.
    fn noise(&self, _x: &Self::State, _dw: &[T]) -> Result<Option<Self::State>> {
        Ok(None)
    }

    /// `f(x) dt + Σᵢ gᵢ(x) dWᵢ`
    fn increment(&self, x: &Self::State, dt: T, dw: &[T]) -> Result<Self::State> {
        let mut f = self.drift(x)?;
        f.scale(dt);
        if let Some(g) = self.noise(x, dw)? {
            f.axpy(T::one(), &g);
        }
        Ok(f)
    }

    /// Largest transport speed, for the CFL guard.
    fn max_speed(&self, x: &Self::State) -> T;
}

/// Named evolution models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Bi,
    Maxwell,
    BiStratonovich,
    BiIto,
    MaxwellExpectation,
    EulerVorticity,
    Mhd,
    MhdStratonovich,
}

impl Model {
    pub const ALL: [Model; 8] = [
        Model::Bi,
        Model::Maxwell,
        Model::BiStratonovich,
        Model::BiIto,
        Model::MaxwellExpectation,
        Model::EulerVorticity,
        Model::Mhd,
        Model::MhdStratonovich,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::Bi => "bi",
            Model::Maxwell => "maxwell",
            Model::BiStratonovich => "bi-stratonovich",
            Model::BiIto => "bi-ito",
            Model::MaxwellExpectation => "maxwell-expectation",
            Model::EulerVorticity => "euler-vorticity",
            Model::Mhd => "mhd",
            Model::MhdStratonovich => "mhd-stratonovich",
        }
    }

    /// Whether the model draws Wiener increments.
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            Model::BiStratonovich | Model::BiIto | Model::EulerVorticity | Model::MhdStratonovich
        )
    }

    pub fn is_em(self) -> bool {
        matches!(
            self,
            Model::Bi | Model::Maxwell | Model::BiStratonovich | Model::BiIto | Model::MaxwellExpectation
        )
    }

    pub fn is_mhd(self) -> bool {
        matches!(self, Model::Mhd | Model::MhdStratonovich)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model {s:?}")))
    }
}
