//! Fixed-step time integrators: RK4 for deterministic systems, Heun for
//! Stratonovich systems (one shared increment per step) and Euler–Maruyama for
//! Itô systems.

use serde::{Deserialize, Serialize};

use crate::dynamics::{MhdState, System, VorticityState};
use crate::em::EMState;
use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};
use crate::real::Real;

/// Vector-space operations the integrators need.
pub trait State<T: Real>: Clone + Send + Sync {
    /// `self += a x`
    fn axpy(&mut self, a: T, x: &Self);
    fn scale(&mut self, a: T);
    fn is_finite(&self) -> bool;
}

impl<T: Real> State<T> for ScalarField<T> {
    fn axpy(&mut self, a: T, x: &Self) {
        ScalarField::axpy(self, a, x);
    }
    fn scale(&mut self, a: T) {
        for v in self.values_mut() {
            *v = *v * a;
        }
    }
    fn is_finite(&self) -> bool {
        ScalarField::is_finite(self)
    }
}

impl<T: Real> State<T> for VectorField<T> {
    fn axpy(&mut self, a: T, x: &Self) {
        VectorField::axpy(self, a, x);
    }
    fn scale(&mut self, a: T) {
        for c in self.components_mut() {
            State::scale(c, a);
        }
    }
    fn is_finite(&self) -> bool {
        VectorField::is_finite(self)
    }
}

impl<T: Real> State<T> for EMState<T> {
    fn axpy(&mut self, a: T, x: &Self) {
        self.d.axpy(a, &x.d);
        self.b.axpy(a, &x.b);
    }
    fn scale(&mut self, a: T) {
        State::scale(&mut self.d, a);
        State::scale(&mut self.b, a);
    }
    fn is_finite(&self) -> bool {
        EMState::is_finite(self)
    }
}

impl<T: Real> State<T> for MhdState<T> {
    fn axpy(&mut self, a: T, x: &Self) {
        self.p.axpy(a, &x.p);
        self.b.axpy(a, &x.b);
    }
    fn scale(&mut self, a: T) {
        State::scale(&mut self.p, a);
        State::scale(&mut self.b, a);
    }
    fn is_finite(&self) -> bool {
        self.p.is_finite() && self.b.is_finite()
    }
}

impl<T: Real> State<T> for VorticityState<T> {
    fn axpy(&mut self, a: T, x: &Self) {
        self.w.axpy(a, &x.w);
    }
    fn scale(&mut self, a: T) {
        State::scale(&mut self.w, a);
    }
    fn is_finite(&self) -> bool {
        self.w.is_finite()
    }
}

impl<T: Real> State<T> for Vec<T> {
    fn axpy(&mut self, a: T, x: &Self) {
        for (s, &v) in self.iter_mut().zip(x) {
            *s = *s + a * v;
        }
    }
    fn scale(&mut self, a: T) {
        for s in self.iter_mut() {
            *s = *s * a;
        }
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// Tracer points.
impl<T: Real> State<T> for Vec<[T; 3]> {
    fn axpy(&mut self, a: T, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            for c in 0..3 {
                s[c] = s[c] + a * v[c];
            }
        }
    }
    fn scale(&mut self, a: T) {
        for s in self.iter_mut() {
            for c in s.iter_mut() {
                *c = *c * a;
            }
        }
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|p| p.iter().all(|v| v.is_finite()))
    }
}

impl<T: Real, A: State<T>, B: State<T>> State<T> for (A, B) {
    fn axpy(&mut self, a: T, x: &Self) {
        self.0.axpy(a, &x.0);
        self.1.axpy(a, &x.1);
    }
    fn scale(&mut self, a: T) {
        self.0.scale(a);
        self.1.scale(a);
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite() && self.1.is_finite()
    }
}

impl<T: Real, A: State<T>, B: State<T>, C: State<T>> State<T> for (A, B, C) {
    fn axpy(&mut self, a: T, x: &Self) {
        self.0.axpy(a, &x.0);
        self.1.axpy(a, &x.1);
        self.2.axpy(a, &x.2);
    }
    fn scale(&mut self, a: T) {
        self.0.scale(a);
        self.1.scale(a);
        self.2.scale(a);
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite() && self.1.is_finite() && self.2.is_finite()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Rk4,
    Heun,
    EulerMaruyama,
}

fn default_cfl() -> f64 {
    0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Largest allowed `max|v| dt / dx`.
    #[serde(default = "default_cfl")]
    pub cfl_guard: f64,
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        Self {
            scheme,
            dt,
            t_end,
            cfl_guard: default_cfl(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidArgument(format!("t_end = {} must be ≥ 0", self.t_end)));
        }
        if !(self.cfl_guard.is_finite() && self.cfl_guard > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cfl_guard = {} must be positive",
                self.cfl_guard
            )));
        }
        Ok(())
    }

    /// Step count whose total `steps·dt` lies within `dt/2` of `t_end`.
    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }
}

/// Classical RK4 for `dx/dt = f(x)`.
pub fn rk4_step<T: Real, S: State<T>>(
    x: &S,
    dt: T,
    mut f: impl FnMut(&S) -> Result<S>,
) -> Result<S> {
    let half = T::lit(0.5);
    let k1 = f(x)?;
    let mut y = x.clone();
    y.axpy(half * dt, &k1);
    let k2 = f(&y)?;
    let mut y = x.clone();
    y.axpy(half * dt, &k2);
    let k3 = f(&y)?;
    let mut y = x.clone();
    y.axpy(dt, &k3);
    let k4 = f(&y)?;
    let sixth = dt / T::lit(6.0);
    let mut out = x.clone();
    out.axpy(sixth, &k1);
    out.axpy(T::lit(2.0) * sixth, &k2);
    out.axpy(T::lit(2.0) * sixth, &k3);
    out.axpy(sixth, &k4);
    Ok(out)
}

/// Stratonovich Heun step; `inc(x, dt, dW)` returns `f(x)dt + g(x)dW` and is
/// called twice with the same `dW`.
pub fn heun_step<T: Real, S: State<T>>(
    x: &S,
    dt: T,
    dw: &[T],
    mut inc: impl FnMut(&S, T, &[T]) -> Result<S>,
) -> Result<S> {
    let a = inc(x, dt, dw)?;
    let mut pred = x.clone();
    pred.axpy(T::one(), &a);
    let b = inc(&pred, dt, dw)?;
    let half = T::lit(0.5);
    let mut out = x.clone();
    out.axpy(half, &a);
    out.axpy(half, &b);
    Ok(out)
}

/// Itô Euler–Maruyama step; `inc` must already contain the Itô drift.
pub fn euler_maruyama_step<T: Real, S: State<T>>(
    x: &S,
    dt: T,
    dw: &[T],
    mut inc: impl FnMut(&S, T, &[T]) -> Result<S>,
) -> Result<S> {
    let a = inc(x, dt, dw)?;
    let mut out = x.clone();
    out.axpy(T::one(), &a);
    Ok(out)
}

/// Advances a system by one step of `cfg.scheme`, with CFL and NaN guards.
/// `step` is only used to label errors.
pub fn advance<T: Real, Sys: System<T>>(
    sys: &Sys,
    cfg: &IntegratorConfig,
    dx: f64,
    x: &Sys::State,
    step: u64,
    dw: &[T],
) -> Result<Sys::State> {
    let dt = T::lit(cfg.dt);
    let cfl = sys.max_speed(x).as_f64() * cfg.dt / dx;
    if !(cfl <= cfg.cfl_guard) {
        return Err(Error::CflViolation {
            cfl,
            limit: cfg.cfl_guard,
        });
    }
    let next = match cfg.scheme {
        Scheme::Rk4 => {
            if sys.noise_modes() > 0 {
                return Err(Error::InvalidArgument(
                    "RK4 cannot integrate a stochastic system".into(),
                ));
            }
            rk4_step(x, dt, |s| sys.drift(s))?
        }
        Scheme::Heun => heun_step(x, dt, dw, |s, h, w| sys.increment(s, h, w))?,
        Scheme::EulerMaruyama => euler_maruyama_step(x, dt, dw, |s, h, w| sys.increment(s, h, w))?,
    };
    if !next.is_finite() {
        return Err(Error::NonFinite {
            what: "state".into(),
            step: step as usize,
        });
    }
    Ok(next)
}

/// Runs steps `first..last`, drawing increments from `dw_of(step)` and calling
/// `observe(step + 1, &state)` after each step.
#[allow(clippy::too_many_arguments)]
pub fn integrate<T: Real, Sys: System<T>>(
    sys: &Sys,
    cfg: &IntegratorConfig,
    dx: f64,
    x0: Sys::State,
    first: u64,
    last: u64,
    mut dw_of: impl FnMut(u64) -> Vec<T>,
    mut observe: impl FnMut(u64, &Sys::State) -> Result<()>,
) -> Result<Sys::State> {
    let mut x = x0;
    let stochastic = sys.noise_modes() > 0;
    for step in first..last {
        let dw = if stochastic { dw_of(step) } else { Vec::new() };
        x = advance(sys, cfg, dx, &x, step, &dw)?;
        observe(step + 1, &x)?;
    }
    Ok(x)
}
