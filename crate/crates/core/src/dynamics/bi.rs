use serde::{Deserialize, Serialize};

use crate::em::{bi_variational_derivatives, hydro_vars, EMState};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::noise::NoiseModel;
use crate::real::Real;

use super::System;

/// Constitutive closure supplying `(E, H)` from `(D, B)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Closure {
    BornInfeld,
    Maxwell,
}

/// `(∂t D, ∂t B) = (curl H, −curl E)`.
///
/// The Born–Infeld `(E, H)` are truncated before the curl. Since the curls are
/// then band-limited, `∫ E·curl H − H·curl E` cancels exactly and `∫ℋ` is
/// conserved by the semi-discrete system.
pub fn bi_rhs<T: Real>(grid: &Grid<T>, s: &EMState<T>, closure: Closure) -> EMState<T> {
    let (e, h, truncate) = match closure {
        Closure::BornInfeld => {
            let (e, h) = bi_variational_derivatives(s);
            (e, h, true)
        }
        Closure::Maxwell => (s.d.clone(), s.b.clone(), false),
    };
    let (curl_h, curl_e) = grid.curl_pair(&h, &e, truncate);
    EMState::new_unchecked(curl_h, -&curl_e)
}

/// `(δD, δB) = (−𝓛_ξ D, −𝓛_ξ B)` with `ξ = Σᵢ ξᵢ dWᵢ`, i.e. `curl(ξ×D)`.
///
/// The Lie derivative is linear in `ξ`, so the modes are combined first.
pub fn stochastic_increment<T: Real>(
    grid: &Grid<T>,
    s: &EMState<T>,
    noise: &NoiseModel<T>,
    dw: &[T],
) -> EMState<T> {
    if noise.is_empty() || dw.iter().all(|&w| w == T::zero()) {
        return EMState::zeros(grid);
    }
    let xi = noise.combine(dw);
    let (d, b) = grid.curl_pair(&xi.cross_pointwise(&s.d), &xi.cross_pointwise(&s.b), true);
    EMState::new_unchecked(d, b)
}

/// `½ Σᵢ 𝓛_{ξᵢ}(𝓛_{ξᵢ} ·)` applied to `(D, B)`.
pub fn ito_drift_correction<T: Real>(
    grid: &Grid<T>,
    s: &EMState<T>,
    noise: &NoiseModel<T>,
) -> EMState<T> {
    let mut out = EMState::zeros(grid);
    let half = T::lit(0.5);
    for xi in noise.xis() {
        let (ld, lb) = grid.lie_transport_2form_pair(xi, &s.d, &s.b);
        let (lld, llb) = grid.lie_transport_2form_pair(xi, &ld, &lb);
        out.d.axpy(half, &lld);
        out.b.axpy(half, &llb);
    }
    out
}

/// Expected-value dynamics of the weak-field Itô system:
/// `∂t⟨D⟩ = curl⟨B⟩ + ½Σ𝓛𝓛⟨D⟩`, `∂t⟨B⟩ = −curl⟨D⟩ + ½Σ𝓛𝓛⟨B⟩`.
pub fn expectation_rhs<T: Real>(
    grid: &Grid<T>,
    s: &EMState<T>,
    noise: &NoiseModel<T>,
    closure: Closure,
) -> Result<EMState<T>> {
    if closure != Closure::Maxwell {
        return Err(Error::InvalidArgument(
            "the expectation equation holds only for the Maxwell closure".into(),
        ));
    }
    let mut out = bi_rhs(grid, s, Closure::Maxwell);
    let c = ito_drift_correction(grid, s, noise);
    out.d.axpy(T::one(), &c.d);
    out.b.axpy(T::one(), &c.b);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Form {
    Deterministic,
    Stratonovich,
    Ito,
    Expectation,
    Transport,
}

/// Born–Infeld / Maxwell system in one of its deterministic or stochastic
/// forms.
#[derive(Clone, Debug)]
pub struct BiSystem<T: Real> {
    grid: Grid<T>,
    closure: Closure,
    noise: NoiseModel<T>,
    form: Form,
}

impl<T: Real> BiSystem<T> {
    pub fn deterministic(grid: Grid<T>, closure: Closure) -> Self {
        Self {
            grid,
            closure,
            noise: NoiseModel::empty(),
            form: Form::Deterministic,
        }
    }

    /// Stratonovich transport noise; step with Heun.
    pub fn stratonovich(grid: Grid<T>, closure: Closure, noise: NoiseModel<T>) -> Self {
        Self {
            grid,
            closure,
            noise,
            form: Form::Stratonovich,
        }
    }

    /// Itô form with the double-Lie-derivative drift; step with Euler–Maruyama.
    pub fn ito(grid: Grid<T>, closure: Closure, noise: NoiseModel<T>) -> Self {
        Self {
            grid,
            closure,
            noise,
            form: Form::Ito,
        }
    }

    /// Deterministic expectation equation; Maxwell closure only.
    pub fn expectation(grid: Grid<T>, closure: Closure, noise: NoiseModel<T>) -> Result<Self> {
        if closure != Closure::Maxwell {
            return Err(Error::InvalidArgument(
                "the expectation equation holds only for the Maxwell closure".into(),
            ));
        }
        Ok(Self {
            grid,
            closure,
            noise,
            form: Form::Expectation,
        })
    }

    /// Drift-free Stratonovich Lie transport of `(D, B)`; the closure only
    /// selects the energy used by diagnostics.
    pub fn transport(grid: Grid<T>, closure: Closure, noise: NoiseModel<T>) -> Self {
        Self {
            grid,
            closure,
            noise,
            form: Form::Transport,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    pub fn noise_model(&self) -> &NoiseModel<T> {
        &self.noise
    }
}

impl<T: Real> System<T> for BiSystem<T> {
    type State = EMState<T>;

    fn noise_modes(&self) -> usize {
        match self.form {
            Form::Stratonovich | Form::Ito | Form::Transport => self.noise.len(),
            _ => 0,
        }
    }

    fn drift(&self, x: &EMState<T>) -> Result<EMState<T>> {
        if self.form == Form::Transport {
            return Ok(EMState::zeros(&self.grid));
        }
        let mut f = bi_rhs(&self.grid, x, self.closure);
        if matches!(self.form, Form::Ito | Form::Expectation) && !self.noise.is_empty() {
            let c = ito_drift_correction(&self.grid, x, &self.noise);
            f.d.axpy(T::one(), &c.d);
            f.b.axpy(T::one(), &c.b);
        }
        Ok(f)
    }

    fn noise(&self, x: &EMState<T>, dw: &[T]) -> Result<Option<EMState<T>>> {
        match self.form {
            Form::Stratonovich | Form::Ito | Form::Transport if !self.noise.is_empty() => {
                Ok(Some(stochastic_increment(&self.grid, x, &self.noise, dw)))
            }
            _ => Ok(None),
        }
    }

    /// Characteristic speeds of both closures are bounded by 1; the
    /// hydrodynamic speed `|P|/ℋ` never exceeds it.
    fn max_speed(&self, x: &EMState<T>) -> T {
        if self.form == Form::Transport {
            return self.noise.xis().iter().map(|xi| xi.max_norm()).fold(T::zero(), T::max);
        }
        match self.closure {
            Closure::Maxwell => T::one(),
            Closure::BornInfeld => hydro_vars(x).v.max_norm().max(T::one()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, VectorField};
    use crate::init::{plane_wave, random_field};
    use crate::noise::ModeSpec;

    fn grid(n: usize) -> Grid<f64> {
        Grid::new(GridSpec::cube(n)).unwrap()
    }

    fn random_state(g: &Grid<f64>, amp: f64) -> EMState<f64> {
        EMState::new_unchecked(
            random_field(*g.spec(), 21, amp, 3, true),
            random_field(*g.spec(), 22, amp, 3, true),
        )
    }

    #[test]
    fn zero_and_uniform_states_are_stationary() {
        let g = grid(8);
        for closure in [Closure::BornInfeld, Closure::Maxwell] {
            let r = bi_rhs(&g, &EMState::zeros(&g), closure);
            assert_eq!(r.d.max_abs() + r.b.max_abs(), 0.0);
            let s = EMState::new_unchecked(
                VectorField::constant(*g.spec(), [0.4, -0.1, 0.3]),
                VectorField::constant(*g.spec(), [0.0, 0.7, 0.2]),
            );
            let r = bi_rhs(&g, &s, closure);
            assert!(r.d.max_abs() + r.b.max_abs() < 1e-15);
        }
    }

    #[test]
    fn maxwell_plane_wave_satisfies_the_equations() {
        let g = grid(16);
        let t = 0.3;
        let (d, b) = plane_wave::<f64>(*g.spec(), 1.0, t);
        let r = bi_rhs(&g, &EMState::new_unchecked(d, b), Closure::Maxwell);
        // ∂t cos(x − t) = sin(x − t)
        let want = VectorField::from_fn(*g.spec(), |x: f64, _, _| [0.0, (x - t).sin(), 0.0]);
        assert!((&r.d - &want).max_abs() < 1e-13);
        let want = VectorField::from_fn(*g.spec(), |x: f64, _, _| [0.0, 0.0, (x - t).sin()]);
        assert!((&r.b - &want).max_abs() < 1e-13);
    }

    #[test]
    fn bi_rhs_is_divergence_free() {
        let g = grid(16);
        let r = bi_rhs(&g, &random_state(&g, 0.8), Closure::BornInfeld);
        let (dd, db) = r.max_div(&g);
        assert!(dd < 1e-12 && db < 1e-12);
    }

    #[test]
    fn constant_noise_is_advection() {
        let g = grid(16);
        let s = random_state(&g, 0.5);
        let sigma = 0.7;
        let noise = NoiseModel::from_modes(
            &g,
            &[ModeSpec::Constant { a: [sigma, 0.0, 0.0], amplitude: 1.0 }],
        )
        .unwrap();
        let dw = 0.3;
        let inc = stochastic_increment(&g, &s, &noise, &[dw]);
        let dx = |f: &VectorField<f64>| {
            VectorField::new(g.grad(&f.x).x, g.grad(&f.y).x, g.grad(&f.z).x).unwrap()
        };
        assert!((&inc.d - &dx(&s.d).scale(-sigma * dw)).max_abs() < 1e-13);
        assert!((&inc.b - &dx(&s.b).scale(-sigma * dw)).max_abs() < 1e-13);
        let zero = stochastic_increment(&g, &s, &noise, &[0.0]);
        assert_eq!(zero.d.max_abs(), 0.0);

        let c = ito_drift_correction(&g, &s, &noise);
        let dxx = |f: &VectorField<f64>| dx(&dx(f));
        assert!((&c.d - &dxx(&s.d).scale(0.5 * sigma * sigma)).max_abs() < 1e-12);
        assert!((&c.b - &dxx(&s.b).scale(0.5 * sigma * sigma)).max_abs() < 1e-12);
    }

    #[test]
    fn ito_correction_is_composed_lie_derivative() {
        let g = grid(16);
        let s = random_state(&g, 0.5);
        let noise = NoiseModel::from_modes(
            &g,
            &[
                ModeSpec::Harmonic { k: [0, 1, 0], a: [1.0, 0.0, 0.0], phase: 0.2, amplitude: 0.3 },
                ModeSpec::Harmonic { k: [1, 0, 1], a: [0.0, 1.0, 0.0], phase: 0.0, amplitude: 0.2 },
            ],
        )
        .unwrap();
        let c = ito_drift_correction(&g, &s, &noise);
        let mut want = g.zeros_vector();
        for xi in noise.xis() {
            let l = g.lie2form(xi, &s.d).unwrap();
            want.axpy(0.5, &g.lie2form(xi, &l).unwrap());
        }
        assert!((&c.d - &want).max_abs() < 1e-10);
        assert!(ito_drift_correction(&g, &s, &NoiseModel::empty()).d.max_abs() == 0.0);
    }

    #[test]
    fn expectation_rejects_born_infeld() {
        let g = grid(8);
        let s = EMState::zeros(&g);
        assert!(expectation_rhs(&g, &s, &NoiseModel::empty(), Closure::BornInfeld).is_err());
        assert!(BiSystem::expectation(g.clone(), Closure::BornInfeld, NoiseModel::empty()).is_err());
        let r = expectation_rhs(&g, &s, &NoiseModel::empty(), Closure::Maxwell).unwrap();
        assert_eq!(r.d.max_abs(), 0.0);
    }

    #[test]
    fn constant_basis_expectation_is_a_laplacian() {
        let g = grid(16);
        let s = random_state(&g, 0.5);
        let sig = 0.4;
        let modes: Vec<ModeSpec> = (0..3)
            .map(|i| {
                let mut a = [0.0; 3];
                a[i] = sig;
                ModeSpec::Constant { a, amplitude: 1.0 }
            })
            .collect();
        let noise = NoiseModel::from_modes(&g, &modes).unwrap();
        let c = ito_drift_correction(&g, &s, &noise);
        let want = g.vector_laplacian(&s.d).scale(0.5 * sig * sig);
        assert!((&c.d - &want).max_abs() < 1e-10);
    }
}
