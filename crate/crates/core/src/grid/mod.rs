//! Periodic 3-torus sampling and the pseudo-spectral operator layer.
//!
//! Fields are stored x-fastest (`i + nx*(j + ny*k)`). All derivatives are
//! computed by multiplying Fourier coefficients, so `div∘curl` and `curl∘grad`
//! vanish to roundoff and integration by parts holds exactly on the grid.
//! First-derivative multipliers are zeroed at the Nyquist index so that every
//! operator maps real fields to real fields.

mod fft;
mod field;
pub mod interp;
mod ops;
pub mod snapshot;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

pub use field::{cross3, dot3, norm3, ScalarField, VectorField};
pub(crate) use ops::div_tolerance;

use fft::Fft3;

pub(crate) type Spectrum<T> = Vec<Complex<T>>;

fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}

/// Sample counts and box lengths of the periodic domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    #[serde(default = "two_pi")]
    pub lx: f64,
    #[serde(default = "two_pi")]
    pub ly: f64,
    #[serde(default = "two_pi")]
    pub lz: f64,
    /// 2/3-rule truncation after pointwise products.
    #[serde(default = "default_dealias")]
    pub dealias: bool,
}

fn default_dealias() -> bool {
    true
}

impl GridSpec {
    /// `n³` samples on `[0, 2π)³` with dealiasing on.
    pub fn cube(n: usize) -> Self {
        Self {
            nx: n,
            ny: n,
            nz: n,
            lx: two_pi(),
            ly: two_pi(),
            lz: two_pi(),
            dealias: true,
        }
    }

    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny), ("nz", self.nz)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n}; sample counts must be even and at least 4"
                )));
            }
        }
        for (name, l) in [("lx", self.lx), ("ly", self.ly), ("lz", self.lz)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn lengths(&self) -> [f64; 3] {
        [self.lx, self.ly, self.lz]
    }

    pub fn volume(&self) -> f64 {
        self.lx * self.ly * self.lz
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn spacing<T: Real>(&self) -> [T; 3] {
        [
            T::lit(self.lx / self.nx as f64),
            T::lit(self.ly / self.ny as f64),
            T::lit(self.lz / self.nz as f64),
        ]
    }

    pub fn min_spacing(&self) -> f64 {
        (self.lx / self.nx as f64)
            .min(self.ly / self.ny as f64)
            .min(self.lz / self.nz as f64)
    }

    /// Largest retained integer mode per axis under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> [usize; 3] {
        [(self.nx - 1) / 3, (self.ny - 1) / 3, (self.nz - 1) / 3]
    }

    /// Node coordinates of sample `idx`.
    pub fn coords<T: Real>(&self, idx: usize) -> [T; 3] {
        let i = idx % self.nx;
        let j = (idx / self.nx) % self.ny;
        let k = idx / (self.nx * self.ny);
        let [dx, dy, dz] = self.spacing::<T>();
        [
            dx * T::from_usize_exact(i),
            dy * T::from_usize_exact(j),
            dz * T::from_usize_exact(k),
        ]
    }
}

/// Signed integer wavenumber for FFT index `m` of an axis with `n` samples.
#[inline]
pub(crate) fn signed_mode(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Grid geometry plus cached FFT plans and wavenumber tables.
///
/// Cheap to clone; all fields built on the grid carry only the `GridSpec`.
#[derive(Clone)]
pub struct Grid<T: Real> {
    inner: Arc<Inner<T>>,
}

struct Inner<T: Real> {
    spec: GridSpec,
    fft: Fft3<T>,
    /// First-derivative wavenumbers per mode (Nyquist zeroed).
    kd: [Vec<T>; 3],
    /// `|k|²` per mode for second derivatives (Nyquist kept).
    k2: Vec<T>,
    /// 2/3-rule retention mask per mode.
    keep: Vec<bool>,
    /// Index of the mode `-k` for each mode `k`.
    conj_index: Vec<usize>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.inner.spec).finish()
    }
}

impl<T: Real> Grid<T> {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let dims = spec.dims();
        let lens = spec.lengths();
        let cut = spec.dealias_cutoff();
        let n = spec.len();

        let axis_k: Vec<Vec<f64>> = (0..3)
            .map(|a| {
                (0..dims[a])
                    .map(|m| two_pi() * signed_mode(m, dims[a]) as f64 / lens[a])
                    .collect()
            })
            .collect();

        let mut kd = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        let mut k2 = Vec::with_capacity(n);
        let mut keep = Vec::with_capacity(n);
        let mut conj_index = Vec::with_capacity(n);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let m = [i, j, k];
                    let mut sq = 0.0;
                    let mut kept = true;
                    for a in 0..3 {
                        let kv = axis_k[a][m[a]];
                        sq += kv * kv;
                        let nyq = m[a] == dims[a] / 2;
                        kd[a].push(if nyq { T::zero() } else { T::lit(kv) });
                        kept &= signed_mode(m[a], dims[a]).unsigned_abs() as usize <= cut[a];
                    }
                    k2.push(T::lit(sq));
                    keep.push(kept);
                    conj_index.push(spec.index(
                        (dims[0] - i) % dims[0],
                        (dims[1] - j) % dims[1],
                        (dims[2] - k) % dims[2],
                    ));
                }
            }
        }

        Ok(Self {
            inner: Arc::new(Inner {
                spec,
                fft: Fft3::new(dims[0], dims[1], dims[2]),
                kd,
                k2,
                keep,
                conj_index,
            }),
        })
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec {
        &self.inner.spec
    }

    pub fn check(&self, spec: &GridSpec) -> Result<()> {
        if spec == self.spec() {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    #[inline]
    pub(crate) fn kd(&self) -> &[Vec<T>; 3] {
        &self.inner.kd
    }

    #[inline]
    pub(crate) fn k2(&self) -> &[T] {
        &self.inner.k2
    }

    /// Index of the mode `-k` for mode `idx`.
    #[inline]
    pub(crate) fn conj_index(&self) -> &[usize] {
        &self.inner.conj_index
    }

    /// Signed integer mode numbers of FFT index `idx`.
    pub(crate) fn mode(&self, idx: usize) -> [i64; 3] {
        let s = &self.inner.spec;
        [
            signed_mode(idx % s.nx, s.nx),
            signed_mode((idx / s.nx) % s.ny, s.ny),
            signed_mode(idx / (s.nx * s.ny), s.nz),
        ]
    }

    /// Whether products are truncated and mode `idx` survives.
    #[inline]
    pub(crate) fn dealias_keep(&self, idx: usize) -> bool {
        !self.inner.spec.dealias || self.inner.keep[idx]
    }

    /// Forward transforms of real fields. Two real fields share one complex
    /// FFT and are separated with the Hermitian symmetry of real data.
    pub(crate) fn forward_real(&self, fields: &[&ScalarField<T>]) -> Vec<Spectrum<T>> {
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            match pair {
                [a, b] => {
                    let mut z: Spectrum<T> = a
                        .values()
                        .iter()
                        .zip(b.values())
                        .map(|(&re, &im)| Complex::new(re, im))
                        .collect();
                    self.inner.fft.forward(&mut z);
                    let (sa, sb) = self.split_packed(&z);
                    out.push(sa);
                    out.push(sb);
                }
                [a] => {
                    let mut z: Spectrum<T> =
                        a.values().iter().map(|&re| Complex::new(re, T::zero())).collect();
                    self.inner.fft.forward(&mut z);
                    out.push(z);
                }
                _ => unreachable!(),
            }
        }
        out
    }

    fn split_packed(&self, z: &[Complex<T>]) -> (Spectrum<T>, Spectrum<T>) {
        let half = T::lit(0.5);
        let conj = &self.inner.conj_index;
        let mut a = Vec::with_capacity(z.len());
        let mut b = Vec::with_capacity(z.len());
        for (idx, &zk) in z.iter().enumerate() {
            let zm = z[conj[idx]].conj();
            a.push((zk + zm) * half);
            // (zk - zm) / (2i)
            let d = (zk - zm) * half;
            b.push(Complex::new(d.im, -d.re));
        }
        (a, b)
    }

    /// Inverse transforms of Hermitian spectra back to real fields, two per
    /// complex FFT.
    pub(crate) fn inverse_real(&self, spectra: Vec<Spectrum<T>>) -> Vec<ScalarField<T>> {
        let spec = *self.spec();
        let mut out = Vec::with_capacity(spectra.len());
        let mut it = spectra.into_iter();
        loop {
            match (it.next(), it.next()) {
                (Some(mut a), Some(b)) => {
                    for (za, zb) in a.iter_mut().zip(&b) {
                        // a + i b
                        *za = Complex::new(za.re - zb.im, za.im + zb.re);
                    }
                    self.inner.fft.inverse(&mut a);
                    let re = a.iter().map(|c| c.re).collect();
                    let im = a.iter().map(|c| c.im).collect();
                    out.push(ScalarField::from_vec(spec, re).expect("length"));
                    out.push(ScalarField::from_vec(spec, im).expect("length"));
                }
                (Some(mut a), None) => {
                    self.inner.fft.inverse(&mut a);
                    let re = a.iter().map(|c| c.re).collect();
                    out.push(ScalarField::from_vec(spec, re).expect("length"));
                    break;
                }
                _ => break,
            }
        }
        out
    }

    pub(crate) fn forward_vec(&self, f: &VectorField<T>) -> [Spectrum<T>; 3] {
        let mut s = self.forward_real(&[&f.x, &f.y, &f.z]).into_iter();
        [s.next().unwrap(), s.next().unwrap(), s.next().unwrap()]
    }

    pub(crate) fn inverse_vec(&self, s: [Spectrum<T>; 3]) -> VectorField<T> {
        let mut f = self.inverse_real(s.into()).into_iter();
        VectorField::from_components(f.next().unwrap(), f.next().unwrap(), f.next().unwrap())
    }

    pub(crate) fn inverse_vec_pair(
        &self,
        a: [Spectrum<T>; 3],
        b: [Spectrum<T>; 3],
    ) -> (VectorField<T>, VectorField<T>) {
        let [a0, a1, a2] = a;
        let [b0, b1, b2] = b;
        let mut f = self.inverse_real(vec![a0, a1, a2, b0, b1, b2]).into_iter();
        let mut next = || f.next().unwrap();
        let va = VectorField::from_components(next(), next(), next());
        let vb = VectorField::from_components(next(), next(), next());
        (va, vb)
    }

    pub fn zeros_scalar(&self) -> ScalarField<T> {
        ScalarField::zeros(*self.spec())
    }

    pub fn zeros_vector(&self) -> VectorField<T> {
        VectorField::zeros(*self.spec())
    }
}
