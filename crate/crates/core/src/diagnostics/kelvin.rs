use std::marker::PhantomData;

use crate::dynamics::{BiSystem, Closure, EulerSystem, System, VorticityState};
use crate::em::{hydro_vars, EMState};
use crate::error::{Error, Result};
use crate::grid::interp::SpectralInterpolant;
use crate::grid::{Grid, VectorField};
use crate::integrators::State;
use crate::noise::NoiseModel;
use crate::real::Real;

use super::loops::{loop_integral, LoopQuadrature, TracerLoop};

/// `γ × curl γ + β × curl β`, the field force in the circulation law.
pub fn kelvin_force_field<T: Real>(grid: &Grid<T>, s: &EMState<T>) -> VectorField<T> {
    let hv = hydro_vars(s);
    let (cg, cb) = grid.curl_pair(&hv.gamma, &hv.beta, false);
    &hv.gamma.cross_pointwise(&cg) + &hv.beta.cross_pointwise(&cb)
}

/// `∮ (γ × curl γ + β × curl β)·dx` around a loop.
pub fn kelvin_force<T: Real>(grid: &Grid<T>, s: &EMState<T>, lp: &TracerLoop<T>) -> T {
    let f = SpectralInterpolant::new(grid, &kelvin_force_field(grid, s));
    let values: Vec<[T; 3]> = lp.points.iter().map(|&p| f.eval(p)).collect();
    loop_integral(&lp.points, &values)
}

/// A system whose state carries a transport velocity for material loops.
pub trait LoopCarrier<T: Real>: System<T> {
    fn carrier_grid(&self) -> &Grid<T>;
    /// Velocity the loops move with and whose circulation is tracked.
    fn loop_velocity(&self, x: &Self::State) -> Result<VectorField<T>>;
    /// Force field whose loop integral balances the circulation change, if any.
    fn loop_force(&self, x: &Self::State) -> Option<VectorField<T>>;
    fn transport_noise(&self) -> &NoiseModel<T>;
}

impl<T: Real> LoopCarrier<T> for BiSystem<T> {
    fn carrier_grid(&self) -> &Grid<T> {
        self.grid()
    }
    fn loop_velocity(&self, x: &EMState<T>) -> Result<VectorField<T>> {
        Ok(hydro_vars(x).v)
    }
    fn loop_force(&self, x: &EMState<T>) -> Option<VectorField<T>> {
        Some(kelvin_force_field(self.grid(), x))
    }
    fn transport_noise(&self) -> &NoiseModel<T> {
        self.noise_model()
    }
}

impl<T: Real> LoopCarrier<T> for EulerSystem<T> {
    fn carrier_grid(&self) -> &Grid<T> {
        self.grid()
    }
    fn loop_velocity(&self, x: &VorticityState<T>) -> Result<VectorField<T>> {
        x.velocity(self.grid())
    }
    fn loop_force(&self, _: &VorticityState<T>) -> Option<VectorField<T>> {
        None
    }
    fn transport_noise(&self) -> &NoiseModel<T> {
        self.noise_model()
    }
}

/// Field state together with tracked loop points and the running time
/// integral of the force around each loop.
#[derive(Clone, Debug, PartialEq)]
pub struct KelvinState<S> {
    pub field: S,
    /// Points of all loops, concatenated.
    pub points: Vec<[f64; 3]>,
    pub force: Vec<f64>,
}

impl<T: Real, S: State<T>> State<T> for KelvinState<S> {
    fn axpy(&mut self, a: T, x: &Self) {
        self.field.axpy(a, &x.field);
        let a = a.as_f64();
        for (p, q) in self.points.iter_mut().zip(&x.points) {
            for c in 0..3 {
                p[c] += a * q[c];
            }
        }
        for (f, g) in self.force.iter_mut().zip(&x.force) {
            *f += a * g;
        }
    }
    fn scale(&mut self, a: T) {
        self.field.scale(a);
        let a = a.as_f64();
        for p in &mut self.points {
            for c in p.iter_mut() {
                *c *= a;
            }
        }
        for f in &mut self.force {
            *f *= a;
        }
    }
    fn is_finite(&self) -> bool {
        self.field.is_finite()
            && self.points.iter().flatten().all(|v| v.is_finite())
            && self.force.iter().all(|v| v.is_finite())
    }
}

/// Couples a field system with material loops moving with its transport
/// velocity (plus the same transport noise), so that loops and fields are
/// stepped by one scheme with one set of increments.
///
/// Loop coordinates and force integrals are kept in double precision.
#[derive(Clone, Debug)]
pub struct KelvinSystem<T, Sys> {
    inner: Sys,
    sizes: Vec<usize>,
    quadrature: LoopQuadrature,
    _real: PhantomData<fn() -> T>,
}

impl<T: Real, Sys: LoopCarrier<T>> KelvinSystem<T, Sys> {
    pub fn new(inner: Sys, sizes: Vec<usize>) -> Self {
        Self {
            inner,
            sizes,
            quadrature: LoopQuadrature::default(),
            _real: PhantomData,
        }
    }

    pub fn with_quadrature(mut self, quadrature: LoopQuadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn inner(&self) -> &Sys {
        &self.inner
    }

    /// Initial augmented state with zero accumulated force.
    pub fn start(&self, field: Sys::State, loops: &[TracerLoop<f64>]) -> Result<KelvinState<Sys::State>> {
        let sizes: Vec<usize> = loops.iter().map(TracerLoop::len).collect();
        if sizes != self.sizes {
            return Err(Error::InvalidArgument(format!(
                "loop sizes {sizes:?} do not match the system's {:?}",
                self.sizes
            )));
        }
        Ok(KelvinState {
            field,
            points: loops.iter().flat_map(|l| l.points.iter().copied()).collect(),
            force: vec![0.0; sizes.len()],
        })
    }

    fn split<'a>(&self, points: &'a [[f64; 3]]) -> Vec<&'a [[f64; 3]]> {
        let mut out = Vec::with_capacity(self.sizes.len());
        let mut at = 0;
        for &n in &self.sizes {
            out.push(&points[at..at + n]);
            at += n;
        }
        out
    }

    fn sample(&self, f: &VectorField<T>, points: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let interp = SpectralInterpolant::new(self.inner.carrier_grid(), f);
        points
            .iter()
            .map(|p| interp.eval(p.map(T::lit)).map(|v| v.as_f64()))
            .collect()
    }

    /// `∮ v·dx` around each loop.
    pub fn circulations(&self, x: &KelvinState<Sys::State>) -> Result<Vec<f64>> {
        let v = self.inner.loop_velocity(&x.field)?;
        let values = self.sample(&v, &x.points);
        let vals = self.split(&values);
        Ok(self
            .split(&x.points)
            .into_iter()
            .zip(vals)
            .map(|(p, v)| self.quadrature.integrate(p, v))
            .collect())
    }

    /// Per loop, `C(t) − C(0) + ∫₀ᵗ ∮ force·dx dt'`.
    pub fn residuals(
        &self,
        x0: &KelvinState<Sys::State>,
        x: &KelvinState<Sys::State>,
    ) -> Result<Vec<f64>> {
        let c0 = self.circulations(x0)?;
        let c1 = self.circulations(x)?;
        Ok(c0
            .iter()
            .zip(&c1)
            .zip(&x.force)
            .zip(&x0.force)
            .map(|(((a, b), f), f0)| b - a + (f - f0))
            .collect())
    }
}

impl<T: Real, Sys: LoopCarrier<T>> System<T> for KelvinSystem<T, Sys> {
    type State = KelvinState<Sys::State>;

    fn noise_modes(&self) -> usize {
        self.inner.noise_modes()
    }

    fn drift(&self, x: &Self::State) -> Result<Self::State> {
        let field = self.inner.drift(&x.field)?;
        let v = self.inner.loop_velocity(&x.field)?;
        let points = self.sample(&v, &x.points);
        let force = match self.inner.loop_force(&x.field) {
            Some(f) => {
                let values = self.sample(&f, &x.points);
                let vals = self.split(&values);
                self.split(&x.points)
                    .into_iter()
                    .zip(vals)
                    .map(|(p, v)| self.quadrature.integrate(p, v))
                    .collect()
            }
            None => vec![0.0; self.sizes.len()],
        };
        Ok(KelvinState { field, points, force })
    }

    fn noise(&self, x: &Self::State, dw: &[T]) -> Result<Option<Self::State>> {
        let Some(field) = self.inner.noise(&x.field, dw)? else {
            return Ok(None);
        };
        let xi = self.inner.transport_noise().combine(dw);
        let points = self.sample(&xi, &x.points);
        Ok(Some(KelvinState {
            field,
            points,
            force: vec![0.0; self.sizes.len()],
        }))
    }

    fn max_speed(&self, x: &Self::State) -> T {
        self.inner.max_speed(&x.field)
    }
}

/// Deterministic Born–Infeld system carrying loops.
pub fn bi_kelvin<T: Real>(grid: Grid<T>, sizes: Vec<usize>) -> KelvinSystem<T, BiSystem<T>> {
    KelvinSystem::new(BiSystem::deterministic(grid, Closure::BornInfeld), sizes)
}
