use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::real::Real;

use super::GridSpec;

/// Real samples of a scalar on the periodic grid, x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    spec: GridSpec,
    data: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(spec: GridSpec) -> Self {
        Self::constant(spec, T::zero())
    }

    pub fn constant(spec: GridSpec, value: T) -> Self {
        Self {
            spec,
            data: vec![value; spec.len()],
        }
    }

    pub fn from_vec(spec: GridSpec, data: Vec<T>) -> Result<Self> {
        if data.len() != spec.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                spec.len(),
                data.len()
            )));
        }
        Ok(Self { spec, data })
    }

    /// Samples `f(x, y, z)` at the grid nodes.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(T, T, T) -> T) -> Self {
        let mut data = Vec::with_capacity(spec.len());
        let [dx, dy, dz] = spec.spacing::<T>();
        for k in 0..spec.nz {
            let z = dz * T::from_usize_exact(k);
            for j in 0..spec.ny {
                let y = dy * T::from_usize_exact(j);
                for i in 0..spec.nx {
                    data.push(f(dx * T::from_usize_exact(i), y, z));
                }
            }
        }
        Self { spec, data }
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[self.spec.index(i, j, k)]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            spec: self.spec,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.spec, other.spec);
        Self {
            spec: self.spec,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, a: T) -> Self {
        self.map(|v| v * a)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: T, x: &Self) {
        debug_assert_eq!(self.spec, x.spec);
        for (s, &v) in self.data.iter_mut().zip(&x.data) {
            *s = *s + a * v;
        }
    }

    /// Pointwise product without truncation.
    pub fn mul_pointwise(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn min(&self) -> T {
        self.data.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max(&self) -> T {
        self.data.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn mean(&self) -> T {
        self.sum() / T::from_usize_exact(self.data.len())
    }

    pub fn sum(&self) -> T {
        self.data.iter().copied().sum()
    }

    /// Quadrature of the periodic trapezoid rule: mean times volume. Exact for
    /// band-limited integrands.
    pub fn integrate(&self) -> T {
        self.mean() * T::lit(self.spec.volume())
    }

    /// `sqrt(∫ f² d³x)`
    pub fn l2_norm(&self) -> T {
        let s: T = self.data.iter().map(|&v| v * v).sum();
        (s * T::lit(self.spec.cell_volume())).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn cast<U: Real>(&self) -> ScalarField<U> {
        ScalarField {
            spec: self.spec,
            data: self
                .data
                .iter()
                .map(|v| U::from_f64(v.as_f64()).unwrap_or(U::nan()))
                .collect(),
        }
    }
}

impl<T: Real> Add for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn add(self, rhs: Self) -> ScalarField<T> {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn sub(self, rhs: Self) -> ScalarField<T> {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl<T: Real> Neg for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn neg(self) -> ScalarField<T> {
        self.map(|v| -v)
    }
}

impl<T: Real> Mul<T> for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn mul(self, rhs: T) -> ScalarField<T> {
        self.scale(rhs)
    }
}

/// Three scalar components sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T> {
    pub x: ScalarField<T>,
    pub y: ScalarField<T>,
    pub z: ScalarField<T>,
}

impl<T: Real> VectorField<T> {
    pub fn new(x: ScalarField<T>, y: ScalarField<T>, z: ScalarField<T>) -> Result<Self> {
        if x.spec != y.spec || x.spec != z.spec {
            return Err(Error::GridMismatch);
        }
        Ok(Self { x, y, z })
    }

    pub(crate) fn from_components(x: ScalarField<T>, y: ScalarField<T>, z: ScalarField<T>) -> Self {
        debug_assert!(x.spec == y.spec && x.spec == z.spec);
        Self { x, y, z }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self::constant(spec, [T::zero(); 3])
    }

    pub fn constant(spec: GridSpec, v: [T; 3]) -> Self {
        Self {
            x: ScalarField::constant(spec, v[0]),
            y: ScalarField::constant(spec, v[1]),
            z: ScalarField::constant(spec, v[2]),
        }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(T, T, T) -> [T; 3]) -> Self {
        Self {
            x: ScalarField::from_fn(spec, |x, y, z| f(x, y, z)[0]),
            y: ScalarField::from_fn(spec, |x, y, z| f(x, y, z)[1]),
            z: ScalarField::from_fn(spec, |x, y, z| f(x, y, z)[2]),
        }
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec {
        self.x.spec()
    }

    pub fn components(&self) -> [&ScalarField<T>; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn components_mut(&mut self) -> [&mut ScalarField<T>; 3] {
        [&mut self.x, &mut self.y, &mut self.z]
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [T; 3] {
        [self.x.data[idx], self.y.data[idx], self.z.data[idx]]
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField<T>) -> ScalarField<T>) -> Self {
        Self::from_components(f(&self.x), f(&self.y), f(&self.z))
    }

    /// Builds a vector field from a pointwise function of the sample index.
    pub fn from_index_fn(spec: GridSpec, f: impl Fn(usize) -> [T; 3]) -> Self {
        let n = spec.len();
        let (mut xs, mut ys, mut zs) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for idx in 0..n {
            let v = f(idx);
            xs.push(v[0]);
            ys.push(v[1]);
            zs.push(v[2]);
        }
        Self::from_components(
            ScalarField { spec, data: xs },
            ScalarField { spec, data: ys },
            ScalarField { spec, data: zs },
        )
    }

    pub fn scale(&self, a: T) -> Self {
        self.map_components(|c| c.scale(a))
    }

    pub fn axpy(&mut self, a: T, other: &Self) {
        self.x.axpy(a, &other.x);
        self.y.axpy(a, &other.y);
        self.z.axpy(a, &other.z);
    }

    /// Pointwise dot product (no truncation).
    pub fn dot_pointwise(&self, other: &Self) -> ScalarField<T> {
        let spec = *self.spec();
        let data = (0..spec.len())
            .map(|i| {
                let a = self.at(i);
                let b = other.at(i);
                a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
            })
            .collect();
        ScalarField { spec, data }
    }

    /// Pointwise cross product (no truncation).
    pub fn cross_pointwise(&self, other: &Self) -> Self {
        Self::from_index_fn(*self.spec(), |i| cross3(self.at(i), other.at(i)))
    }

    /// Pointwise product with a scalar field.
    pub fn mul_scalar_pointwise(&self, s: &ScalarField<T>) -> Self {
        self.map_components(|c| c.mul_pointwise(s))
    }

    pub fn norm_sq(&self) -> ScalarField<T> {
        self.dot_pointwise(self)
    }

    /// `max |F(x)|` over the grid.
    pub fn max_norm(&self) -> T {
        let spec = *self.spec();
        (0..spec.len())
            .map(|i| norm3(self.at(i)))
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.x.max_abs().max(self.y.max_abs()).max(self.z.max_abs())
    }

    pub fn integrate(&self) -> [T; 3] {
        [self.x.integrate(), self.y.integrate(), self.z.integrate()]
    }

    pub fn mean(&self) -> [T; 3] {
        [self.x.mean(), self.y.mean(), self.z.mean()]
    }

    /// `sqrt(∫ |F|² d³x)`
    pub fn l2_norm(&self) -> T {
        let a = self.x.l2_norm();
        let b = self.y.l2_norm();
        let c = self.z.l2_norm();
        (a * a + b * b + c * c).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn cast<U: Real>(&self) -> VectorField<U> {
        VectorField::from_components(self.x.cast(), self.y.cast(), self.z.cast())
    }
}

impl<T: Real> Add for &VectorField<T> {
    type Output = VectorField<T>;
    fn add(self, rhs: Self) -> VectorField<T> {
        VectorField::from_components(&self.x + &rhs.x, &self.y + &rhs.y, &self.z + &rhs.z)
    }
}

impl<T: Real> Sub for &VectorField<T> {
    type Output = VectorField<T>;
    fn sub(self, rhs: Self) -> VectorField<T> {
        VectorField::from_components(&self.x - &rhs.x, &self.y - &rhs.y, &self.z - &rhs.z)
    }
}

impl<T: Real> Neg for &VectorField<T> {
    type Output = VectorField<T>;
    fn neg(self) -> VectorField<T> {
        self.map_components(|c| -c)
    }
}

impl<T: Real> Mul<T> for &VectorField<T> {
    type Output = VectorField<T>;
    fn mul(self, rhs: T) -> VectorField<T> {
        self.scale(rhs)
    }
}

#[inline]
pub fn cross3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn dot3<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm3<T: Real>(a: [T; 3]) -> T {
    dot3(a, a).sqrt()
}
