use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::interp::{trilinear_vec, SpectralInterpolant};
use crate::grid::{dot3, Grid, VectorField};
use crate::integrators::{euler_maruyama_step, heun_step, rk4_step, Scheme};
use crate::noise::NoiseModel;
use crate::real::Real;

/// Closed material loop sampled at equally spaced parameter values
/// `s_j = 2πj/n`. Points are stored unwrapped so the loop stays continuous;
/// field evaluation wraps periodically.
#[derive(Clone, Debug, PartialEq)]
pub struct TracerLoop<T: Real> {
    pub points: Vec<[T; 3]>,
}

impl<T: Real> TracerLoop<T> {
    pub fn new(points: Vec<[T; 3]>) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidArgument(format!(
                "a tracer loop needs at least 4 points, got {}",
                points.len()
            )));
        }
        Ok(Self { points })
    }

    /// Circle of radius `r` about `center` in the plane normal to axis `axis`,
    /// oriented counter-clockwise about that axis.
    pub fn circle(center: [f64; 3], r: f64, axis: usize, n: usize) -> Result<Self> {
        if axis > 2 || !(r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "circle needs axis < 3 and r > 0 (axis {axis}, r {r})"
            )));
        }
        let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
        let points = (0..n)
            .map(|j| {
                let s = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                let mut p = center;
                p[a] += r * s.cos();
                p[b] += r * s.sin();
                p.map(T::lit)
            })
            .collect();
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `dX/ds` by spectral differentiation of the periodic point sequence.
pub fn spectral_tangent<T: Real>(points: &[[T; 3]]) -> Vec<[T; 3]> {
    let n = points.len();
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let norm = T::one() / T::from_usize_exact(n);
    let mut out = vec![[T::zero(); 3]; n];
    for c in 0..3 {
        let mut buf: Vec<Complex<T>> = points.iter().map(|p| Complex::new(p[c], T::zero())).collect();
        fwd.process(&mut buf);
        for (m, v) in buf.iter_mut().enumerate() {
            let k = if 2 * m < n {
                m as i64
            } else if 2 * m == n {
                0
            } else {
                m as i64 - n as i64
            };
            *v = *v * Complex::new(T::zero(), T::lit(k as f64) * norm);
        }
        inv.process(&mut buf);
        for (o, v) in out.iter_mut().zip(&buf) {
            o[c] = v.re;
        }
    }
    out
}

/// `∮ F·dx` from samples of `F` at the loop points: periodic trapezoid rule
/// with a spectral tangent, spectrally accurate for smooth loops.
pub fn loop_integral<T: Real>(points: &[[T; 3]], values: &[[T; 3]]) -> T {
    let tangent = spectral_tangent(points);
    let ds = T::lit(2.0 * std::f64::consts::PI / points.len() as f64);
    values
        .iter()
        .zip(&tangent)
        .map(|(&f, &t)| dot3(f, t))
        .sum::<T>()
        * ds
}

/// `∮ F·dx` over the closed polygon through the points, trapezoid rule on
/// each chord: second order in the loop spacing.
pub fn loop_integral_polygon<T: Real>(points: &[[T; 3]], values: &[[T; 3]]) -> T {
    let n = points.len();
    let half = T::lit(0.5);
    (0..n)
        .map(|j| {
            let (a, b) = (points[j], points[(j + 1) % n]);
            let (fa, fb) = (values[j], values[(j + 1) % n]);
            let mid = [0, 1, 2].map(|c| half * (fa[c] + fb[c]));
            dot3(mid, [b[0] - a[0], b[1] - a[1], b[2] - a[2]])
        })
        .sum()
}

/// Quadrature rule for loop integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopQuadrature {
    /// Periodic trapezoid rule with a spectral tangent.
    #[default]
    Spectral,
    /// Trapezoid rule on the polygon chords.
    Polygon,
}

impl LoopQuadrature {
    pub fn integrate<T: Real>(self, points: &[[T; 3]], values: &[[T; 3]]) -> T {
        match self {
            Self::Spectral => loop_integral(points, values),
            Self::Polygon => loop_integral_polygon(points, values),
        }
    }
}

/// `∮ v·dx` with `v` evaluated by trigonometric interpolation.
pub fn loop_circulation<T: Real>(grid: &Grid<T>, lp: &TracerLoop<T>, v: &VectorField<T>) -> T {
    let interp = SpectralInterpolant::new(grid, v);
    let values: Vec<[T; 3]> = lp.points.iter().map(|&p| interp.eval(p)).collect();
    loop_integral(&lp.points, &values)
}

/// `∮ v·dx` over the polygon through the loop points with trilinear
/// interpolation: second order in both the grid spacing and the loop spacing.
pub fn loop_circulation_polygon<T: Real>(lp: &TracerLoop<T>, v: &VectorField<T>) -> T {
    let values: Vec<[T; 3]> = lp.points.iter().map(|&p| trilinear_vec(v, p)).collect();
    loop_integral_polygon(&lp.points, &values)
}

/// Moves a loop one step through frozen fields: `dX = v(X) dt + Σᵢ ξᵢ(X) dWᵢ`,
/// integrated with `scheme` using the same increments the field step uses.
#[allow(clippy::too_many_arguments)]
pub fn advect_loop<T: Real>(
    grid: &Grid<T>,
    lp: &TracerLoop<T>,
    v: &VectorField<T>,
    noise: &NoiseModel<T>,
    scheme: Scheme,
    dt: T,
    dw: &[T],
) -> Result<TracerLoop<T>> {
    let vi = SpectralInterpolant::new(grid, v);
    let xi = if noise.is_empty() {
        None
    } else {
        Some(SpectralInterpolant::new(grid, &noise.combine(dw)))
    };
    let inc = |x: &Vec<[T; 3]>, h: T, _: &[T]| -> Result<Vec<[T; 3]>> {
        Ok(x.iter()
            .map(|&p| {
                let u = vi.eval(p);
                let w = xi.as_ref().map_or([T::zero(); 3], |f| f.eval(p));
                [0, 1, 2].map(|c| u[c] * h + w[c])
            })
            .collect())
    };
    let points = match scheme {
        Scheme::Rk4 => {
            if xi.is_some() {
                return Err(Error::InvalidArgument(
                    "RK4 cannot integrate a stochastic system".into(),
                ));
            }
            rk4_step(&lp.points, dt, |x| {
                Ok(x.iter().map(|&p| vi.eval(p)).collect())
            })?
        }
        Scheme::Heun => heun_step(&lp.points, dt, dw, inc)?,
        Scheme::EulerMaruyama => euler_maruyama_step(&lp.points, dt, dw, inc)?,
    };
    TracerLoop::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::noise::ModeSpec;
    use std::f64::consts::PI;

    /// Bessel J1 by its power series, ample for arguments below 1.
    fn bessel_j1(x: f64) -> f64 {
        let mut term = x / 2.0;
        let mut sum = term;
        for m in 1..30 {
            term *= -(x * x / 4.0) / (m as f64 * (m + 1) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn tangent_of_a_circle() {
        let lp = TracerLoop::<f64>::circle([1.0, 2.0, 3.0], 0.5, 2, 32).unwrap();
        let t = spectral_tangent(&lp.points);
        for (j, tj) in t.iter().enumerate() {
            let s = 2.0 * PI * j as f64 / 32.0;
            assert!((tj[0] + 0.5 * s.sin()).abs() < 1e-13);
            assert!((tj[1] - 0.5 * s.cos()).abs() < 1e-13);
            assert!(tj[2].abs() < 1e-13);
        }
    }

    #[test]
    fn uniform_field_has_zero_circulation() {
        let g = Grid::<f64>::new(GridSpec::cube(8)).unwrap();
        let v = VectorField::constant(*g.spec(), [0.3, -1.2, 2.0]);
        let lp = TracerLoop::circle([0.4, 5.0, 6.1], 1.3, 0, 64).unwrap();
        assert!(loop_circulation(&g, &lp, &v).abs() < 1e-13);
        assert!(loop_circulation_polygon(&lp, &v).abs() < 1e-13);
    }

    #[test]
    fn stokes_theorem_on_unit_area_disk() {
        // v = (−sin y, 0, 0), curl v = (0, 0, cos y); the disk integral of
        // cos y is 2πR J1(R) cos(c_y).
        let g = Grid::<f64>::new(GridSpec::cube(16)).unwrap();
        let v = VectorField::<f64>::from_fn(*g.spec(), |_, y, _| [-y.sin(), 0.0, 0.0]);
        let r = (1.0 / PI).sqrt();
        let c = [3.0, 2.5, 1.0];
        let want = 2.0 * PI * r * bessel_j1(r) * f64::cos(c[1]);
        let lp = TracerLoop::circle(c, r, 2, 64).unwrap();
        let got = loop_circulation(&g, &lp, &v);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        let mut errs = Vec::new();
        for n in [64, 128] {
            let lp = TracerLoop::circle(c, r, 2, n).unwrap();
            errs.push((loop_circulation_polygon(&lp, &v) - want).abs());
        }
        assert!(errs[1] < 1e-2 && errs[0] > errs[1]);
    }

    #[test]
    fn constant_noise_translates_the_loop() {
        let g = Grid::<f64>::new(GridSpec::cube(8)).unwrap();
        let noise = NoiseModel::from_modes(
            &g,
            &[ModeSpec::Constant { a: [1.0, 0.0, 0.0], amplitude: 0.5 }],
        )
        .unwrap();
        let lp = TracerLoop::circle([1.0, 1.0, 1.0], 0.3, 2, 16).unwrap();
        let moved = advect_loop(&g, &lp, &g.zeros_vector(), &noise, Scheme::Heun, 0.01, &[0.2]).unwrap();
        for (a, b) in lp.points.iter().zip(&moved.points) {
            assert!((b[0] - a[0] - 0.1).abs() < 1e-13);
            assert!((b[1] - a[1]).abs() < 1e-15);
        }
        assert!(advect_loop(&g, &lp, &g.zeros_vector(), &noise, Scheme::Rk4, 0.01, &[0.2]).is_err());
    }

    #[test]
    fn rk4_advection_in_a_shear() {
        // v = (sin y, 0, 0) moves points along x at their own height.
        let g = Grid::<f64>::new(GridSpec::cube(8)).unwrap();
        let v = VectorField::<f64>::from_fn(*g.spec(), |_, y, _| [y.sin(), 0.0, 0.0]);
        let lp = TracerLoop::circle([1.0, 1.0, 1.0], 0.3, 2, 16).unwrap();
        let moved = advect_loop(&g, &lp, &v, &NoiseModel::empty(), Scheme::Rk4, 0.1, &[]).unwrap();
        for (a, b) in lp.points.iter().zip(&moved.points) {
            assert!((b[0] - a[0] - 0.1 * a[1].sin()).abs() < 1e-12);
        }
    }
}
