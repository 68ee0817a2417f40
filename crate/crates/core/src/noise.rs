//! Divergence-free noise correlation fields ξᵢ and the seeded Wiener driver.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{div_tolerance, Grid, GridSpec, VectorField};
use crate::real::Real;

/// One analytic noise mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModeSpec {
    /// `ξ = amplitude · a`
    Constant {
        a: [f64; 3],
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `ξ = amplitude · a⊥ cos(k·x + phase)`
    Harmonic {
        k: [i64; 3],
        a: [f64; 3],
        #[serde(default)]
        phase: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl ModeSpec {
    pub fn build<T: Real>(&self, spec: GridSpec) -> Result<VectorField<T>> {
        match *self {
            ModeSpec::Constant { a, amplitude } => Ok(VectorField::constant(
                spec,
                a.map(|v| T::lit(v * amplitude)),
            )),
            ModeSpec::Harmonic {
                k,
                a,
                phase,
                amplitude,
            } => Ok(make_divfree_mode::<T>(spec, k, a, phase)?.scale(T::lit(amplitude))),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ModeSpec::Constant { .. })
    }
}

/// `ξ(x) = a⊥ cos(k·x + phase)` with `a⊥` the part of `a` normal to `k`.
pub fn make_divfree_mode<T: Real>(
    spec: GridSpec,
    k: [i64; 3],
    a: [f64; 3],
    phase: f64,
) -> Result<VectorField<T>> {
    if k == [0, 0, 0] {
        return Err(Error::InvalidArgument(
            "harmonic mode needs k ≠ 0; use a constant mode instead".into(),
        ));
    }
    let kf = k.map(|v| v as f64);
    let kk: f64 = kf.iter().map(|v| v * v).sum();
    let ka: f64 = (0..3).map(|i| kf[i] * a[i]).sum();
    let ap: [f64; 3] = std::array::from_fn(|i| a[i] - kf[i] * ka / kk);
    let norm_a = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_ap = ap.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm_ap > 1e-12 * norm_a.max(f64::MIN_POSITIVE)) {
        return Err(Error::InvalidArgument(format!(
            "amplitude {a:?} is parallel to k = {k:?}"
        )));
    }
    let lens = spec.lengths();
    let kw: [T; 3] = std::array::from_fn(|i| T::lit(2.0 * std::f64::consts::PI * kf[i] / lens[i]));
    let ap = ap.map(T::lit);
    let ph = T::lit(phase);
    Ok(VectorField::from_fn(spec, |x, y, z| {
        let c = (kw[0] * x + kw[1] * y + kw[2] * z + ph).cos();
        [ap[0] * c, ap[1] * c, ap[2] * c]
    }))
}

/// The fixed set of correlation fields `{ξᵢ}`.
#[derive(Debug)]
pub struct NoiseModel<T: Real> {
    xis: Vec<VectorField<T>>,
    constant: Vec<bool>,
    grads: OnceLock<Vec<[VectorField<T>; 3]>>,
}

impl<T: Real> Clone for NoiseModel<T> {
    fn clone(&self) -> Self {
        Self {
            xis: self.xis.clone(),
            constant: self.constant.clone(),
            grads: self.grads.clone(),
        }
    }
}

impl<T: Real> NoiseModel<T> {
    pub fn empty() -> Self {
        Self {
            xis: Vec::new(),
            constant: Vec::new(),
            grads: OnceLock::new(),
        }
    }

    pub fn from_modes(grid: &Grid<T>, modes: &[ModeSpec]) -> Result<Self> {
        let fields = modes
            .iter()
            .map(|m| m.build(*grid.spec()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_fields(grid, fields)
    }

    /// Validates arbitrary fields: each must be divergence-free to 1e−10.
    pub fn from_fields(grid: &Grid<T>, xis: Vec<VectorField<T>>) -> Result<Self> {
        let mut constant = Vec::with_capacity(xis.len());
        for (i, xi) in xis.iter().enumerate() {
            grid.check(xi.spec())?;
            if !xi.is_finite() {
                return Err(Error::InvalidArgument(format!("noise field {i} is not finite")));
            }
            let d = grid.max_div(xi).as_f64();
            let tol = div_tolerance(1e-10, xi.max_abs());
            if !(d <= tol) {
                return Err(Error::constraint(
                    format!("divergence-free violation: max|div xi_{i}|"),
                    d,
                    tol,
                ));
            }
            constant.push(xi.components().iter().all(|c| {
                let v0 = c.values()[0];
                c.values().iter().all(|&v| v == v0)
            }));
        }
        Ok(Self {
            xis,
            constant,
            grads: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.xis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xis.is_empty()
    }

    pub fn xis(&self) -> &[VectorField<T>] {
        &self.xis
    }

    pub fn all_constant(&self) -> bool {
        self.constant.iter().all(|&c| c)
    }

    /// `Σᵢ wᵢ ξᵢ`
    pub fn combine(&self, w: &[T]) -> VectorField<T> {
        assert_eq!(w.len(), self.xis.len(), "one weight per noise mode");
        let spec = *self.xis.first().map(|x| x.spec()).expect("non-empty noise model");
        let mut out = VectorField::zeros(spec);
        for (xi, &wi) in self.xis.iter().zip(w) {
            if wi != T::zero() {
                out.axpy(wi, xi);
            }
        }
        out
    }

    /// Gradient tensors `∇ξᵢ`, computed once.
    pub fn gradients(&self, grid: &Grid<T>) -> &[[VectorField<T>; 3]] {
        self.grads
            .get_or_init(|| self.xis.iter().map(|xi| grid.gradient_tensor(xi)).collect())
    }

    /// `Σᵢ wᵢ ∇ξᵢ`
    pub fn combine_gradients(&self, grid: &Grid<T>, w: &[T]) -> [VectorField<T>; 3] {
        let g = self.gradients(grid);
        let spec = *grid.spec();
        let mut out = [VectorField::zeros(spec), VectorField::zeros(spec), VectorField::zeros(spec)];
        for (gi, &wi) in g.iter().zip(w) {
            if wi != T::zero() {
                for j in 0..3 {
                    out[j].axpy(wi, &gi[j]);
                }
            }
        }
        out
    }
}

/// Counter-based Wiener increments keyed by `(seed, member, step)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WienerDriver {
    pub seed: u64,
    pub member: u64,
    pub modes: usize,
}

impl WienerDriver {
    pub fn new(seed: u64, member: u64, modes: usize) -> Self {
        Self { seed, member, modes }
    }

    fn rng(&self, step: u64, tag: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.member.to_le_bytes());
        key[16..24].copy_from_slice(&step.to_le_bytes());
        key[24..].copy_from_slice(&tag.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }

    /// `N` independent `Normal(0, dt)` draws for this step, mode `i` at index `i`.
    pub fn sample_increments(&self, step: u64, dt: f64) -> Vec<f64> {
        assert!(dt > 0.0, "dt must be positive");
        let mut rng = self.rng(step, 0);
        let s = dt.sqrt();
        (0..self.modes)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                s * z
            })
            .collect()
    }

    pub fn increments<T: Real>(&self, step: u64, dt: f64) -> Vec<T> {
        self.sample_increments(step, dt).into_iter().map(T::lit).collect()
    }
}

/// Brownian paths on a dyadic time grid, built coarse-to-fine by Lévy midpoint
/// bridging. The path at level `ℓ` (`2^ℓ` steps) is the same whether or not
/// finer levels were generated.
#[derive(Clone, Debug)]
pub struct BrownianPath {
    t_end: f64,
    levels: u32,
    /// `w[mode][j]` = W at `t_j = j·t_end/2^levels`.
    w: Vec<Vec<f64>>,
}

impl BrownianPath {
    pub fn levy(seed: u64, modes: usize, t_end: f64, levels: u32) -> Self {
        assert!(t_end > 0.0 && levels < 31);
        let n = 1usize << levels;
        let w = (0..modes)
            .map(|m| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let mut path = vec![0.0; n + 1];
                let z: f64 = StandardNormal.sample(&mut rng);
                path[n] = t_end.sqrt() * z;
                let mut stride = n;
                while stride > 1 {
                    let half = stride / 2;
                    // conditional variance of the midpoint of an interval of length τ is τ/4
                    let tau = t_end * stride as f64 / n as f64;
                    let sd = (tau / 4.0).sqrt();
                    for left in (0..n).step_by(stride) {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        path[left + half] = 0.5 * (path[left] + path[left + stride]) + sd * z;
                    }
                    stride = half;
                }
                path
            })
            .collect();
        Self { t_end, levels, w }
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn max_level(&self) -> u32 {
        self.levels
    }

    /// Values `W(t)` at the `2^level + 1` nodes of a coarser level.
    pub fn values(&self, mode: usize, level: u32) -> Vec<f64> {
        assert!(level <= self.levels);
        let stride = 1usize << (self.levels - level);
        self.w[mode].iter().step_by(stride).copied().collect()
    }

    /// Per-step increment vectors `[step][mode]` at `level`.
    pub fn increments(&self, level: u32) -> Vec<Vec<f64>> {
        let vals: Vec<Vec<f64>> = (0..self.w.len()).map(|m| self.values(m, level)).collect();
        let steps = 1usize << level;
        (0..steps)
            .map(|j| vals.iter().map(|v| v[j + 1] - v[j]).collect())
            .collect()
    }

    /// `W(t_end)` per mode.
    pub fn terminal(&self) -> Vec<f64> {
        self.w.iter().map(|p| *p.last().expect("non-empty path")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_along_x() {
        let spec = GridSpec::cube(8);
        let xi = make_divfree_mode::<f64>(spec, [1, 0, 0], [0.0, 1.0, 0.0], 0.0).unwrap();
        let want = VectorField::from_fn(spec, |x: f64, _, _| [0.0, x.cos(), 0.0]);
        assert!((&xi - &want).max_abs() < 1e-15);
        let g = Grid::new(spec).unwrap();
        assert!(g.max_div(&xi) < 1e-12);
    }

    #[test]
    fn parallel_amplitude_is_rejected() {
        let spec = GridSpec::cube(8);
        assert!(make_divfree_mode::<f64>(spec, [1, 0, 0], [1.0, 0.0, 0.0], 0.0).is_err());
        assert!(make_divfree_mode::<f64>(spec, [0, 0, 0], [1.0, 0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn diagonal_mode_energy() {
        let spec = GridSpec::cube(8);
        let xi = make_divfree_mode::<f64>(spec, [1, 1, 0], [0.0, 0.0, 1.0], 0.3).unwrap();
        let g = Grid::new(spec).unwrap();
        assert!(g.max_div(&xi) < 1e-12);
        let e = xi.norm_sq().integrate();
        let want = 0.5 * (2.0 * std::f64::consts::PI).powi(3);
        assert!((e - want).abs() < 1e-11);
    }

    #[test]
    fn custom_fields_must_be_divergence_free() {
        let spec = GridSpec::cube(8);
        let g = Grid::<f64>::new(spec).unwrap();
        let bad = VectorField::from_fn(spec, |x: f64, _, _| [x.sin(), 0.0, 0.0]);
        let err = NoiseModel::from_fields(&g, vec![bad]).unwrap_err();
        assert!(err.to_string().contains("divergence-free violation"));
    }

    #[test]
    fn constant_modes_are_detected() {
        let spec = GridSpec::cube(8);
        let g = Grid::<f64>::new(spec).unwrap();
        let m = NoiseModel::from_modes(
            &g,
            &[ModeSpec::Constant { a: [0.1, 0.0, 0.0], amplitude: 1.0 }],
        )
        .unwrap();
        assert!(m.all_constant());
        let h = NoiseModel::from_modes(
            &g,
            &[ModeSpec::Harmonic { k: [0, 1, 0], a: [1.0, 0.0, 0.0], phase: 0.0, amplitude: 0.2 }],
        )
        .unwrap();
        assert!(!h.all_constant());
    }

    #[test]
    fn increments_are_a_pure_function_of_the_key() {
        let d = WienerDriver::new(7, 3, 4);
        assert_eq!(d.sample_increments(11, 0.01), d.sample_increments(11, 0.01));
        assert_ne!(d.sample_increments(11, 0.01), d.sample_increments(12, 0.01));
        let other = WienerDriver::new(7, 4, 4);
        assert_ne!(d.sample_increments(11, 0.01), other.sample_increments(11, 0.01));
    }

    #[test]
    fn coarse_levels_do_not_depend_on_refinement_depth() {
        let a = BrownianPath::levy(5, 2, 1.0, 6);
        let b = BrownianPath::levy(5, 2, 1.0, 9);
        for m in 0..2 {
            assert_eq!(a.values(m, 6), b.values(m, 6));
        }
        let inc = b.increments(3);
        assert_eq!(inc.len(), 8);
        let sum: f64 = inc.iter().map(|v| v[1]).sum();
        assert!((sum - b.terminal()[1]).abs() < 1e-14);
    }
}
