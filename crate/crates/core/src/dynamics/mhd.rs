use crate::error::{Error, Result};
use crate::grid::{cross3, dot3, Grid, ScalarField, VectorField};
use crate::noise::NoiseModel;
use crate::real::Real;

use super::System;

/// Default floor on `h = sqrt(|P|² + |B|²)`.
pub const H_FLOOR: f64 = 1e-8;

/// Momentum density and magnetic flux of the high-field limit.
#[derive(Clone, Debug, PartialEq)]
pub struct MhdState<T: Real> {
    pub p: VectorField<T>,
    pub b: VectorField<T>,
}

impl<T: Real> MhdState<T> {
    pub fn new(p: VectorField<T>, b: VectorField<T>) -> Self {
        Self { p, b }
    }
}

/// `h = sqrt(|P|² + |B|²)`, rejected if it drops to `floor` anywhere.
pub fn mhd_energy_density<T: Real>(s: &MhdState<T>, floor: f64) -> Result<ScalarField<T>> {
    let h = s.p.norm_sq().zip_map(&s.b.norm_sq(), |a, b| (a + b).sqrt());
    let min_h = h.min().as_f64();
    if !(min_h > floor) {
        return Err(Error::FloorViolation { min_h, floor });
    }
    Ok(h)
}

/// `∂t P = −div(P⊗P/h − B⊗B/h)`, `∂t B = curl(P×B/h)`, fluxes truncated.
pub fn mhd_rhs<T: Real>(grid: &Grid<T>, s: &MhdState<T>, floor: f64) -> Result<MhdState<T>> {
    let h = mhd_energy_density(s, floor)?;
    let spec = *grid.spec();
    let n = spec.len();
    // symmetric flux tensor, upper triangle 00 01 02 11 12 22
    let mut t: [Vec<T>; 6] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut q: [Vec<T>; 3] = std::array::from_fn(|_| Vec::with_capacity(n));
    for i in 0..n {
        let p = s.p.at(i);
        let b = s.b.at(i);
        let inv = T::one() / h.values()[i];
        let mut m = 0;
        for j in 0..3 {
            for k in j..3 {
                t[m].push((p[j] * p[k] - b[j] * b[k]) * inv);
                m += 1;
            }
        }
        let c = cross3(p, b);
        for a in 0..3 {
            q[a].push(c[a] * inv);
        }
    }
    let fields: Vec<ScalarField<T>> = t
        .into_iter()
        .map(|v| ScalarField::from_vec(spec, v).expect("length"))
        .collect();
    let refs: Vec<&ScalarField<T>> = fields.iter().collect();
    let map = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
    let dp = grid.div_tensor_indexed(&refs, map, None, -T::one());
    let [qx, qy, qz] = q.map(|v| ScalarField::from_vec(spec, v).expect("length"));
    let db = grid.curl_of_product(&VectorField::new(qx, qy, qz)?);
    Ok(MhdState::new(dp, db))
}

/// `(δP, δB) = (−𝓛_ξ(P·dx⊗d³x), −𝓛_ξ B)` with `ξ = Σᵢ ξᵢ dWᵢ`.
pub fn mhd_stochastic_increment<T: Real>(
    grid: &Grid<T>,
    s: &MhdState<T>,
    noise: &NoiseModel<T>,
    dw: &[T],
) -> MhdState<T> {
    if noise.is_empty() || dw.iter().all(|&w| w == T::zero()) {
        return MhdState::new(grid.zeros_vector(), grid.zeros_vector());
    }
    let xi = noise.combine(dw);
    let gxi = noise.combine_gradients(grid, dw);
    let dp = -&grid.lie_1form_density_with_grad(&xi, &gxi, &s.p);
    let db = grid.curl_of_product(&xi.cross_pointwise(&s.b));
    MhdState::new(dp, db)
}

/// High-field MHD system, optionally with Stratonovich transport noise.
#[derive(Clone, Debug)]
pub struct MhdSystem<T: Real> {
    grid: Grid<T>,
    noise: NoiseModel<T>,
    floor: f64,
}

impl<T: Real> MhdSystem<T> {
    pub fn new(grid: Grid<T>, noise: NoiseModel<T>) -> Self {
        Self {
            grid,
            noise,
            floor: H_FLOOR,
        }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }
}

impl<T: Real> System<T> for MhdSystem<T> {
    type State = MhdState<T>;

    fn noise_modes(&self) -> usize {
        self.noise.len()
    }

    fn drift(&self, x: &MhdState<T>) -> Result<MhdState<T>> {
        mhd_rhs(&self.grid, x, self.floor)
    }

    fn noise(&self, x: &MhdState<T>, dw: &[T]) -> Result<Option<MhdState<T>>> {
        if self.noise.is_empty() {
            return Ok(None);
        }
        Ok(Some(mhd_stochastic_increment(&self.grid, x, &self.noise, dw)))
    }

    /// `max |P|/h`, at most 1.
    fn max_speed(&self, x: &MhdState<T>) -> T {
        let spec = *x.p.spec();
        (0..spec.len())
            .map(|i| {
                let p = x.p.at(i);
                let b = x.b.at(i);
                let pp = dot3(p, p);
                let h2 = pp + dot3(b, b);
                if h2 > T::zero() {
                    (pp / h2).sqrt()
                } else {
                    T::zero()
                }
            })
            .fold(T::zero(), T::max)
    }
}
