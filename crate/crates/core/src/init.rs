//! Initial-data generators: analytic presets and seeded random band-limited
//! fields.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec, VectorField};
use crate::real::Real;

/// Zero-mean random field with modes `1 ≤ max|k_a| ≤ kmax`, coefficient
/// standard deviation `1/(1+|k|²)`, rescaled so that `max |F(x)| = amplitude`.
///
/// Panics if `kmax` is zero or reaches the Nyquist index; use
/// [`try_random_field`] for a fallible version.
pub fn random_field<T: Real>(
    spec: GridSpec,
    seed: u64,
    amplitude: f64,
    kmax: usize,
    divfree: bool,
) -> VectorField<T> {
    try_random_field(spec, seed, amplitude, kmax, divfree).expect("valid random field request")
}

pub fn try_random_field<T: Real>(
    spec: GridSpec,
    seed: u64,
    amplitude: f64,
    kmax: usize,
    divfree: bool,
) -> Result<VectorField<T>> {
    let grid = Grid::<T>::new(spec)?;
    random_field_on(&grid, seed, amplitude, kmax, divfree)
}

pub fn random_field_on<T: Real>(
    grid: &Grid<T>,
    seed: u64,
    amplitude: f64,
    kmax: usize,
    divfree: bool,
) -> Result<VectorField<T>> {
    let spec = *grid.spec();
    let nmin = spec.nx.min(spec.ny).min(spec.nz);
    if kmax == 0 || kmax >= nmin / 2 {
        return Err(Error::InvalidArgument(format!(
            "kmax = {kmax} must lie in 1..{}",
            nmin / 2
        )));
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::InvalidArgument(format!("amplitude = {amplitude}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = Complex::new(T::zero(), T::zero());
    let mut s = [vec![zero; spec.len()], vec![zero; spec.len()], vec![zero; spec.len()]];
    let conj = grid.conj_index();
    let kmax = kmax as i64;
    for idx in 0..spec.len() {
        let m = grid.mode(idx);
        let cidx = conj[idx];
        if cidx <= idx || m.iter().any(|v| v.abs() > kmax) {
            continue;
        }
        let kk = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
        let w = 1.0 / (1.0 + kk);
        let mut c = [[0.0f64; 2]; 3];
        for comp in c.iter_mut() {
            for part in comp.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *part = w * g;
            }
        }
        if divfree {
            let k = [m[0] as f64, m[1] as f64, m[2] as f64];
            for part in 0..2 {
                let kc: f64 = (0..3).map(|a| k[a] * c[a][part]).sum();
                for a in 0..3 {
                    c[a][part] -= k[a] * kc / kk;
                }
            }
        }
        for a in 0..3 {
            let v = Complex::new(T::lit(c[a][0]), T::lit(c[a][1]));
            s[a][idx] = v;
            s[a][cidx] = v.conj();
        }
    }
    let f = grid.inverse_vec(s);
    let peak = f.max_norm();
    if peak == T::zero() {
        return Ok(f);
    }
    Ok(f.scale(T::lit(amplitude) / peak))
}

/// Transverse plane wave along x: `D = (0, a cos x, 0)`, `B = (0, 0, a cos x)`.
/// Under Maxwell dynamics the exact solution is the same profile at `x − t`.
pub fn plane_wave<T: Real>(spec: GridSpec, amplitude: f64, t: f64) -> (VectorField<T>, VectorField<T>) {
    let a = T::lit(amplitude);
    let t = T::lit(t);
    let d = VectorField::from_fn(spec, |x: T, _: T, _: T| [T::zero(), a * (x - t).cos(), T::zero()]);
    let b = VectorField::from_fn(spec, |x: T, _: T, _: T| [T::zero(), T::zero(), a * (x - t).cos()]);
    (d, b)
}

/// Taylor–Green velocity `a (sin x cos y cos z, −cos x sin y cos z, 0)`.
pub fn taylor_green<T: Real>(spec: GridSpec, amplitude: f64) -> VectorField<T> {
    let a = T::lit(amplitude);
    VectorField::from_fn(spec, |x: T, y: T, z: T| {
        [
            a * x.sin() * y.cos() * z.cos(),
            -a * x.cos() * y.sin() * z.cos(),
            T::zero(),
        ]
    })
}

/// Vorticity of [`taylor_green`]: `a (−cos x sin y sin z, −sin x cos y sin z, 2 sin x sin y cos z)`.
pub fn taylor_green_vorticity<T: Real>(spec: GridSpec, amplitude: f64) -> VectorField<T> {
    let a = T::lit(amplitude);
    let two = T::lit(2.0);
    VectorField::from_fn(spec, |x: T, y: T, z: T| {
        [
            -a * x.cos() * y.sin() * z.sin(),
            -a * x.sin() * y.cos() * z.sin(),
            two * a * x.sin() * y.sin() * z.cos(),
        ]
    })
}

/// Arnold–Beltrami–Childress field with unit coefficients, shifted by `shift`
/// in every coordinate. It satisfies `curl F = F`.
pub fn abc<T: Real>(spec: GridSpec, amplitude: f64, shift: f64) -> VectorField<T> {
    let a = T::lit(amplitude);
    let s = T::lit(shift);
    VectorField::from_fn(spec, |x: T, y: T, z: T| {
        let (x, y, z) = (x + s, y + s, z + s);
        [a * (z.sin() + y.cos()), a * (x.sin() + z.cos()), a * (y.sin() + x.cos())]
    })
}

/// Orthogonal high-field MHD data: the helical flux `B = (0, cos x, sin x)`
/// (`|B| ≡ 1`, `curl B = −B`) and a random momentum with its component along
/// `B` removed. Because `|B|` is constant the projection stays band-limited,
/// and `P·B = 0` holds exactly at every node.
pub fn mhd_orthogonal<T: Real>(
    spec: GridSpec,
    seed: u64,
    p_amplitude: f64,
    kmax: usize,
) -> Result<(VectorField<T>, VectorField<T>)> {
    let b = VectorField::from_fn(spec, |x: T, _: T, _: T| [T::zero(), x.cos(), x.sin()]);
    let p0 = try_random_field::<T>(spec, seed, p_amplitude, kmax, false)?;
    let pb = p0.dot_pointwise(&b);
    let p = &p0 - &b.mul_scalar_pointwise(&pb);
    Ok((p, b))
}
