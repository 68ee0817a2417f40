//! One type for every model's system and state, so that the driver can
//! step, record and checkpoint any of them.

use std::path::Path;

use sabi_core::diagnostics::{
    magnetic_helicity, pb_orthogonality, total_energy, total_momentum, vorticity_residual,
    DiagnosticsRecord, StateView,
};
use sabi_core::dynamics::{
    BiSystem, Closure, EulerSystem, MhdState, MhdSystem, Model, System, VorticityState,
};
use sabi_core::em::EMState;
use sabi_core::grid::snapshot::{read_vector, write_vector};
use sabi_core::init::{abc, mhd_orthogonal, plane_wave, random_field_on, taylor_green, taylor_green_vorticity};
use sabi_core::integrators::{advance, IntegratorConfig};
use sabi_core::noise::NoiseModel;
use sabi_core::{Error, Grid, Real, Result, VectorField};

use crate::config::{InitialCondition, RunConfig};

#[derive(Clone, Debug)]
pub enum MemberSystem<T: Real> {
    Em(BiSystem<T>),
    Mhd(MhdSystem<T>),
    Euler(EulerSystem<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum MemberState<T: Real> {
    Em(EMState<T>),
    Mhd(MhdState<T>),
    Euler(VorticityState<T>),
}

pub fn build_noise<T: Real>(cfg: &RunConfig, grid: &Grid<T>) -> Result<NoiseModel<T>> {
    let fields = cfg
        .noise
        .iter()
        .map(|m| m.build(grid))
        .collect::<Result<Vec<_>>>()?;
    NoiseModel::from_fields(grid, fields)
}

pub fn build_system<T: Real>(cfg: &RunConfig, grid: Grid<T>) -> Result<MemberSystem<T>> {
    let noise = build_noise(cfg, &grid)?;
    Ok(match cfg.model {
        Model::Bi => MemberSystem::Em(BiSystem::deterministic(grid, Closure::BornInfeld)),
        Model::Maxwell => MemberSystem::Em(BiSystem::deterministic(grid, Closure::Maxwell)),
        Model::BiStratonovich => {
            MemberSystem::Em(BiSystem::stratonovich(grid, Closure::BornInfeld, noise))
        }
        Model::BiIto => MemberSystem::Em(BiSystem::ito(grid, Closure::BornInfeld, noise)),
        Model::MaxwellExpectation => {
            MemberSystem::Em(BiSystem::expectation(grid, Closure::Maxwell, noise)?)
        }
        Model::EulerVorticity => MemberSystem::Euler(EulerSystem::new(grid, noise)),
        Model::Mhd | Model::MhdStratonovich => MemberSystem::Mhd(MhdSystem::new(grid, noise)),
    })
}

pub fn initial_state<T: Real>(cfg: &RunConfig, grid: &Grid<T>) -> Result<MemberState<T>> {
    let spec = *grid.spec();
    let unavailable = || {
        Error::InvalidArgument(format!(
            "preset {} is not available for model {}",
            cfg.initial.name(),
            cfg.model
        ))
    };
    if cfg.model.is_em() {
        let (d, b) = match cfg.initial {
            InitialCondition::PlaneWave { amplitude } => plane_wave(spec, amplitude, 0.0),
            InitialCondition::TaylorGreen { amplitude } => {
                let d = taylor_green(spec, amplitude);
                let b = grid.curl(&d);
                (d, b)
            }
            InitialCondition::Abc { amplitude, shift } => {
                let d = abc(spec, amplitude, shift);
                let b = grid.curl(&d);
                (d, b)
            }
            InitialCondition::RandomBandLimited {
                seed,
                amplitude,
                kmax,
            } => (
                random_field_on(grid, seed, amplitude, kmax, true)?,
                random_field_on(grid, seed.wrapping_add(1), amplitude, kmax, true)?,
            ),
        };
        return Ok(MemberState::Em(EMState::new(grid, d, b)?));
    }
    if cfg.model.is_mhd() {
        let InitialCondition::RandomBandLimited {
            seed,
            amplitude,
            kmax,
        } = cfg.initial
        else {
            return Err(unavailable());
        };
        let (p, b) = mhd_orthogonal(spec, seed, amplitude, kmax)?;
        return Ok(MemberState::Mhd(MhdState::new(p, b)));
    }
    let w = match cfg.initial {
        InitialCondition::TaylorGreen { amplitude } => taylor_green_vorticity(spec, amplitude),
        // Beltrami: the vorticity of the ABC flow is the flow itself
        InitialCondition::Abc { amplitude, shift } => abc(spec, amplitude, shift),
        InitialCondition::RandomBandLimited {
            seed,
            amplitude,
            kmax,
        } => random_field_on(grid, seed, amplitude, kmax, true)?,
        InitialCondition::PlaneWave { .. } => return Err(unavailable()),
    };
    Ok(MemberState::Euler(VorticityState::new(w)))
}

fn mismatch() -> Error {
    Error::InvalidArgument("state does not belong to this model".into())
}

impl<T: Real> MemberSystem<T> {
    pub fn grid(&self) -> &Grid<T> {
        match self {
            MemberSystem::Em(s) => s.grid(),
            MemberSystem::Mhd(s) => s.grid(),
            MemberSystem::Euler(s) => s.grid(),
        }
    }

    pub fn noise_modes(&self) -> usize {
        match self {
            MemberSystem::Em(s) => s.noise_modes(),
            MemberSystem::Mhd(s) => s.noise_modes(),
            MemberSystem::Euler(s) => s.noise_modes(),
        }
    }

    pub fn max_speed(&self, x: &MemberState<T>) -> f64 {
        match (self, x) {
            (MemberSystem::Em(s), MemberState::Em(x)) => s.max_speed(x).as_f64(),
            (MemberSystem::Mhd(s), MemberState::Mhd(x)) => s.max_speed(x).as_f64(),
            (MemberSystem::Euler(s), MemberState::Euler(x)) => s.max_speed(x).as_f64(),
            _ => f64::INFINITY,
        }
    }

    pub fn step(
        &self,
        cfg: &IntegratorConfig,
        x: &MemberState<T>,
        step: u64,
        dw: &[T],
    ) -> Result<MemberState<T>> {
        let dx = self.grid().spec().min_spacing();
        Ok(match (self, x) {
            (MemberSystem::Em(s), MemberState::Em(x)) => {
                MemberState::Em(advance(s, cfg, dx, x, step, dw)?)
            }
            (MemberSystem::Mhd(s), MemberState::Mhd(x)) => {
                MemberState::Mhd(advance(s, cfg, dx, x, step, dw)?)
            }
            (MemberSystem::Euler(s), MemberState::Euler(x)) => {
                MemberState::Euler(advance(s, cfg, dx, x, step, dw)?)
            }
            _ => return Err(mismatch()),
        })
    }

    /// Diagnostics of one state. The vorticity-equation residual is only
    /// meaningful for the deterministic Born–Infeld model.
    pub fn record(&self, model: Model, x: &MemberState<T>, step: u64, time: f64) -> Result<DiagnosticsRecord> {
        let g = self.grid();
        let f = |v: T| v.as_f64();
        let mut r = DiagnosticsRecord {
            step,
            time,
            ..Default::default()
        };
        let view = match (self, x) {
            (MemberSystem::Em(s), MemberState::Em(x)) => {
                r.div_d = Some(f(g.max_div(&x.d)));
                r.div_b = Some(f(g.max_div(&x.b)));
                r.helicity = magnetic_helicity(g, &x.b).ok().map(f);
                if model == Model::Bi {
                    r.vorticity_residual = Some(f(vorticity_residual(g, x)));
                }
                StateView::Em(x, s.closure())
            }
            (MemberSystem::Mhd(s), MemberState::Mhd(x)) => {
                r.div_b = Some(f(g.max_div(&x.b)));
                r.helicity = magnetic_helicity(g, &x.b).ok().map(f);
                r.pb_orth = Some(f(pb_orthogonality(x, s.floor())?));
                StateView::Mhd(x)
            }
            (MemberSystem::Euler(_), MemberState::Euler(x)) => {
                r.div_w = Some(f(g.max_div(&x.w)));
                StateView::Vorticity(x)
            }
            _ => return Err(mismatch()),
        };
        r.energy = f(total_energy(g, view)?);
        r.momentum = total_momentum(g, view)?.map(f);
        if !r.is_finite() {
            return Err(Error::NonFinite {
                what: "diagnostics".into(),
                step: step as usize,
            });
        }
        Ok(r)
    }

    /// Names of the fields a state of this model is stored as.
    pub fn field_names(&self) -> &'static [&'static str] {
        match self {
            MemberSystem::Em(_) => &["D", "B"],
            MemberSystem::Mhd(_) => &["P", "B"],
            MemberSystem::Euler(_) => &["w"],
        }
    }

    /// Writes the state as raw float64 snapshots; returns every file written.
    pub fn write_state(
        &self,
        dir: &Path,
        x: &MemberState<T>,
        time: f64,
        step: u64,
        seed: u64,
    ) -> Result<Vec<std::path::PathBuf>> {
        let fields: Vec<&VectorField<T>> = match x {
            MemberState::Em(s) => vec![&s.d, &s.b],
            MemberState::Mhd(s) => vec![&s.p, &s.b],
            MemberState::Euler(s) => vec![&s.w],
        };
        let mut files = Vec::new();
        for (name, f) in self.field_names().iter().zip(fields) {
            files.extend(write_vector(dir, name, f, time, step, seed)?);
        }
        Ok(files)
    }

    pub fn read_state(&self, dir: &Path) -> Result<MemberState<T>> {
        let dealias = self.grid().spec().dealias;
        let mut fields = Vec::new();
        for name in self.field_names() {
            let (meta, f) = read_vector::<T>(dir, name, dealias)?;
            self.grid().check(&meta.spec(dealias))?;
            fields.push(f);
        }
        let mut it = fields.into_iter();
        let mut next = || it.next().expect("one field per name");
        Ok(match self {
            MemberSystem::Em(_) => MemberState::Em(EMState::new_unchecked(next(), next())),
            MemberSystem::Mhd(_) => MemberState::Mhd(MhdState::new(next(), next())),
            MemberSystem::Euler(_) => MemberState::Euler(VorticityState::new(next())),
        })
    }
}
