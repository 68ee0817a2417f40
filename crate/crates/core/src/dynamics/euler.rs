use crate::error::{Error, Result};
use crate::grid::{div_tolerance, Grid, VectorField};
use crate::noise::NoiseModel;
use crate::real::Real;

use super::System;

/// Vorticity of an incompressible flow on the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct VorticityState<T: Real> {
    pub w: VectorField<T>,
}

impl<T: Real> VorticityState<T> {
    pub fn new(w: VectorField<T>) -> Self {
        Self { w }
    }

    /// Biot–Savart velocity `u = curl⁻¹ ω`.
    pub fn velocity(&self, grid: &Grid<T>) -> Result<VectorField<T>> {
        grid.curl_inv(&self.w)
    }
}

/// `δω = curl((u dt + Σᵢ ξᵢ dWᵢ) × ω)` with `u = curl⁻¹ω`.
///
/// Rejects vorticity with a divergence above 1e−8 or a nonzero mean.
pub fn euler_vorticity_rhs<T: Real>(
    grid: &Grid<T>,
    s: &VorticityState<T>,
    noise: &NoiseModel<T>,
    dw: &[T],
    dt: T,
) -> Result<VectorField<T>> {
    let u = s.velocity(grid)?;
    let mut carrier = u.scale(dt);
    if !noise.is_empty() {
        carrier.axpy(T::one(), &noise.combine(dw));
    }
    Ok(grid.curl_of_product(&carrier.cross_pointwise(&s.w)))
}

/// Stochastic Euler vorticity dynamics.
#[derive(Clone, Debug)]
pub struct EulerSystem<T: Real> {
    grid: Grid<T>,
    noise: NoiseModel<T>,
}

impl<T: Real> EulerSystem<T> {
    pub fn new(grid: Grid<T>, noise: NoiseModel<T>) -> Self {
        Self { grid, noise }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn noise_model(&self) -> &NoiseModel<T> {
        &self.noise
    }

    fn check(&self, s: &VorticityState<T>) -> Result<()> {
        let d = self.grid.max_div(&s.w).as_f64();
        let tol = div_tolerance(1e-8, s.w.max_abs());
        if !(d <= tol) {
            return Err(Error::constraint("max|div w|", d, tol));
        }
        Ok(())
    }
}

impl<T: Real> System<T> for EulerSystem<T> {
    type State = VorticityState<T>;

    fn noise_modes(&self) -> usize {
        self.noise.len()
    }

    fn drift(&self, x: &VorticityState<T>) -> Result<VorticityState<T>> {
        let u = x.velocity(&self.grid)?;
        Ok(VorticityState::new(
            self.grid.curl_of_product(&u.cross_pointwise(&x.w)),
        ))
    }

    fn noise(&self, x: &VorticityState<T>, dw: &[T]) -> Result<Option<VorticityState<T>>> {
        if self.noise.is_empty() {
            return Ok(None);
        }
        let xi = self.noise.combine(dw);
        Ok(Some(VorticityState::new(
            self.grid.curl_of_product(&xi.cross_pointwise(&x.w)),
        )))
    }

    fn increment(&self, x: &VorticityState<T>, dt: T, dw: &[T]) -> Result<VorticityState<T>> {
        self.check(x)?;
        euler_vorticity_rhs(&self.grid, x, &self.noise, dw, dt).map(VorticityState::new)
    }

    fn max_speed(&self, x: &VorticityState<T>) -> T {
        x.velocity(&self.grid)
            .map(|u| u.max_norm())
            .unwrap_or_else(|_| T::infinity())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::init::taylor_green_vorticity;
    use crate::noise::ModeSpec;

    #[test]
    fn uniform_vorticity_is_rejected() {
        let g = Grid::<f64>::new(GridSpec::cube(8)).unwrap();
        let s = VorticityState::new(VectorField::constant(*g.spec(), [0.0, 0.0, 1.0]));
        assert!(euler_vorticity_rhs(&g, &s, &NoiseModel::empty(), &[], 0.1).is_err());
    }

    #[test]
    fn taylor_green_rhs_is_divergence_free_and_fused_form_matches() {
        let g = Grid::<f64>::new(GridSpec::cube(16)).unwrap();
        let noise = NoiseModel::from_modes(
            &g,
            &[ModeSpec::Harmonic { k: [0, 0, 1], a: [1.0, 0.0, 0.0], phase: 0.0, amplitude: 0.1 }],
        )
        .unwrap();
        let sys = EulerSystem::new(g.clone(), noise);
        let s = VorticityState::new(taylor_green_vorticity(*g.spec(), 1.0));
        let fused = sys.increment(&s, 0.01, &[0.05]).unwrap();
        let mut split = sys.drift(&s).unwrap();
        split.w = split.w.scale(0.01);
        split.w.axpy(1.0, &sys.noise(&s, &[0.05]).unwrap().unwrap().w);
        assert!((&fused.w - &split.w).max_abs() < 1e-14);
        assert!(g.max_div(&fused.w) < 1e-13);
    }

    #[test]
    fn constant_noise_translates_vorticity() {
        let g = Grid::<f64>::new(GridSpec::cube(16)).unwrap();
        let noise = NoiseModel::from_modes(
            &g,
            &[ModeSpec::Constant { a: [0.0, 1.0, 0.0], amplitude: 1.0 }],
        )
        .unwrap();
        let s = VorticityState::new(taylor_green_vorticity(*g.spec(), 1.0));
        let inc = euler_vorticity_rhs(&g, &s, &noise, &[1.0], 0.0).unwrap();
        let want = g.grad(&s.w.x).y.scale(-1.0);
        assert!((&inc.x - &want).max_abs() < 1e-12);
    }
}
