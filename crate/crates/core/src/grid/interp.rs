//! Point evaluation of gridded fields at off-grid locations.

use num_complex::Complex;

use crate::real::Real;

use super::{signed_mode, Grid, ScalarField, VectorField};

/// Periodic trilinear interpolation of one scalar field.
pub fn trilinear<T: Real>(f: &ScalarField<T>, p: [T; 3]) -> T {
    let spec = f.spec();
    let dims = spec.dims();
    let h = spec.spacing::<T>();
    let mut i0 = [0usize; 3];
    let mut w = [T::zero(); 3];
    for a in 0..3 {
        let s = p[a] / h[a];
        let fl = s.floor();
        w[a] = s - fl;
        let n = dims[a] as i64;
        i0[a] = (fl.to_i64().unwrap_or(0).rem_euclid(n)) as usize;
    }
    let mut acc = T::zero();
    for dz in 0..2 {
        let wz = if dz == 0 { T::one() - w[2] } else { w[2] };
        let k = (i0[2] + dz) % dims[2];
        for dy in 0..2 {
            let wy = if dy == 0 { T::one() - w[1] } else { w[1] };
            let j = (i0[1] + dy) % dims[1];
            for dx in 0..2 {
                let wx = if dx == 0 { T::one() - w[0] } else { w[0] };
                let i = (i0[0] + dx) % dims[0];
                acc = acc + wx * wy * wz * f.get(i, j, k);
            }
        }
    }
    acc
}

pub fn trilinear_vec<T: Real>(f: &VectorField<T>, p: [T; 3]) -> [T; 3] {
    [trilinear(&f.x, p), trilinear(&f.y, p), trilinear(&f.z, p)]
}

/// Evaluates the trigonometric interpolant of a vector field anywhere in the
/// box. Exact for band-limited fields, so tracer quadrature is not limited by
/// the grid spacing. Nyquist modes contribute as cosines to keep the result
/// real.
pub struct SpectralInterpolant<T: Real> {
    dims: [usize; 3],
    /// Wavenumber and Nyquist flag per axis index.
    axis_k: [Vec<(T, bool)>; 3],
    coeffs: [Vec<Complex<T>>; 3],
}

impl<T: Real> SpectralInterpolant<T> {
    pub fn new(grid: &Grid<T>, f: &VectorField<T>) -> Self {
        let spec = *grid.spec();
        let dims = spec.dims();
        let lens = spec.lengths();
        let norm = T::one() / T::from_usize_exact(spec.len());
        let [sx, sy, sz] = grid.forward_vec(f);
        let scale = |s: Vec<Complex<T>>| s.into_iter().map(|c| c * norm).collect();
        let axis = |a: usize| {
            (0..dims[a])
                .map(|m| {
                    let k = 2.0 * std::f64::consts::PI * signed_mode(m, dims[a]) as f64 / lens[a];
                    (T::lit(k), m == dims[a] / 2)
                })
                .collect()
        };
        Self {
            dims,
            axis_k: [axis(0), axis(1), axis(2)],
            coeffs: [scale(sx), scale(sy), scale(sz)],
        }
    }

    fn phases(&self, a: usize, x: T) -> Vec<Complex<T>> {
        self.axis_k[a]
            .iter()
            .map(|&(k, nyq)| {
                let t = k * x;
                if nyq {
                    Complex::new(t.cos(), T::zero())
                } else {
                    Complex::new(t.cos(), t.sin())
                }
            })
            .collect()
    }

    pub fn eval(&self, p: [T; 3]) -> [T; 3] {
        let [nx, ny, nz] = self.dims;
        let ex = self.phases(0, p[0]);
        let ey = self.phases(1, p[1]);
        let ez = self.phases(2, p[2]);
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = [zero; 3];
        for k in 0..nz {
            let mut plane = [zero; 3];
            for j in 0..ny {
                let base = nx * (j + ny * k);
                let mut row = [zero; 3];
                for (i, &e) in ex.iter().enumerate() {
                    for c in 0..3 {
                        row[c] = row[c] + self.coeffs[c][base + i] * e;
                    }
                }
                for c in 0..3 {
                    plane[c] = plane[c] + row[c] * ey[j];
                }
            }
            for c in 0..3 {
                out[c] = out[c] + plane[c] * ez[k];
            }
        }
        [out[0].re, out[1].re, out[2].re]
    }
}
