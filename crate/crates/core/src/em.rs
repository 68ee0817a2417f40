//! Born–Infeld and Maxwell field densities, variational derivatives, the
//! Poynting momentum and the derived hydrodynamic variables.

use crate::error::{Error, Result};
use crate::grid::{cross3, div_tolerance, dot3, Grid, ScalarField, VectorField};
use crate::real::Real;

/// Bound on `max|div D|`, `max|div B|` for a valid double-precision state of
/// unit magnitude; larger fields and single precision scale it up.
pub const DIV_TOL: f64 = 1e-8;

/// Displacement and magnetic flux fields, both divergence-free.
#[derive(Clone, Debug, PartialEq)]
pub struct EMState<T: Real> {
    pub d: VectorField<T>,
    pub b: VectorField<T>,
}

impl<T: Real> EMState<T> {
    /// Checked constructor: rejects states whose divergences exceed [`DIV_TOL`]
    /// relative to the field magnitude and the working precision.
    pub fn new(grid: &Grid<T>, d: VectorField<T>, b: VectorField<T>) -> Result<Self> {
        grid.check(d.spec())?;
        grid.check(b.spec())?;
        let s = Self { d, b };
        let (dd, db) = s.max_div(grid);
        for (name, v, f) in [("max|div D|", dd, &s.d), ("max|div B|", db, &s.b)] {
            let v = v.as_f64();
            let tol = div_tolerance(DIV_TOL, f.max_abs());
            if !(v < tol) {
                return Err(Error::constraint(name, v, tol));
            }
        }
        Ok(s)
    }

    pub fn new_unchecked(d: VectorField<T>, b: VectorField<T>) -> Self {
        Self { d, b }
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        Self::new_unchecked(grid.zeros_vector(), grid.zeros_vector())
    }

    pub fn max_div(&self, grid: &Grid<T>) -> (T, T) {
        (grid.max_div(&self.d), grid.max_div(&self.b))
    }

    pub fn is_finite(&self) -> bool {
        self.d.is_finite() && self.b.is_finite()
    }
}

/// Pointwise hydrodynamic variables of a Born–Infeld state.
#[derive(Clone, Debug)]
pub struct HydroVars<T: Real> {
    /// Energy density ℋ ≥ 1.
    pub hd: ScalarField<T>,
    /// `P/ℋ`
    pub v: VectorField<T>,
    /// `D/ℋ`
    pub gamma: VectorField<T>,
    /// `B/ℋ`
    pub beta: VectorField<T>,
}

#[inline]
fn bi_density_at<T: Real>(d: [T; 3], b: [T; 3]) -> T {
    let p = cross3(d, b);
    (T::one() + dot3(d, d) + dot3(b, b) + dot3(p, p)).sqrt()
}

/// `ℋ = sqrt(1 + |D|² + |B|² + |D×B|²)`
pub fn bi_energy_density<T: Real>(s: &EMState<T>) -> ScalarField<T> {
    let spec = *s.d.spec();
    let data = (0..spec.len())
        .map(|i| bi_density_at(s.d.at(i), s.b.at(i)))
        .collect();
    ScalarField::from_vec(spec, data).expect("length")
}

/// `E = (D + B×P)/ℋ`, `H = (B − D×P)/ℋ` with `P = D×B`, evaluated pointwise.
pub fn bi_variational_derivatives<T: Real>(s: &EMState<T>) -> (VectorField<T>, VectorField<T>) {
    let spec = *s.d.spec();
    let n = spec.len();
    let mut e = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut h = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for i in 0..n {
        let d = s.d.at(i);
        let b = s.b.at(i);
        let p = cross3(d, b);
        let inv = T::one() / (T::one() + dot3(d, d) + dot3(b, b) + dot3(p, p)).sqrt();
        let bp = cross3(b, p);
        let dp = cross3(d, p);
        for a in 0..3 {
            e[a].push((d[a] + bp[a]) * inv);
            h[a].push((b[a] - dp[a]) * inv);
        }
    }
    let build = |v: [Vec<T>; 3]| {
        let [x, y, z] = v;
        VectorField::new(
            ScalarField::from_vec(spec, x).expect("length"),
            ScalarField::from_vec(spec, y).expect("length"),
            ScalarField::from_vec(spec, z).expect("length"),
        )
        .expect("same grid")
    };
    (build(e), build(h))
}

/// Weak-field closure: `E = D`, `H = B`.
pub fn maxwell_variational_derivatives<T: Real>(s: &EMState<T>) -> (VectorField<T>, VectorField<T>) {
    (s.d.clone(), s.b.clone())
}

/// `P = D×B`, pointwise.
pub fn poynting<T: Real>(s: &EMState<T>) -> VectorField<T> {
    s.d.cross_pointwise(&s.b)
}

/// `max|E×H − D×B| / max(max|D×B|, 1)` for the Born–Infeld closure.
pub fn poynting_eh_discrepancy<T: Real>(s: &EMState<T>) -> T {
    let (e, h) = bi_variational_derivatives(s);
    let p = poynting(s);
    let diff = &e.cross_pointwise(&h) - &p;
    diff.max_norm() / p.max_norm().max(T::one())
}

pub fn hydro_vars<T: Real>(s: &EMState<T>) -> HydroVars<T> {
    let hd = bi_energy_density(s);
    let inv = hd.map(|v| T::one() / v);
    let p = poynting(s);
    HydroVars {
        v: p.mul_scalar_pointwise(&inv),
        gamma: s.d.mul_scalar_pointwise(&inv),
        beta: s.b.mul_scalar_pointwise(&inv),
        hd,
    }
}

/// Both sides of the momentum-map identity `⟨P, ξ⟩ = ⟨⟨A, −𝓛_ξ D⟩⟩` with
/// `B = curl A`: `lhs = ∫ ξ·(D×curl A)`, `rhs = ∫ A·curl(ξ×D)`.
pub fn momentum_map_pairing<T: Real>(
    grid: &Grid<T>,
    a: &VectorField<T>,
    d: &VectorField<T>,
    xi: &VectorField<T>,
) -> Result<(T, T)> {
    for f in [a, d, xi] {
        grid.check(f.spec())?;
    }
    for (name, f) in [("D", d), ("xi", xi)] {
        let v = grid.max_div(f).as_f64();
        let tol = crate::grid::div_tolerance(1e-10, f.max_abs());
        if v > tol {
            return Err(Error::constraint(format!("max|div {name}|"), v, tol));
        }
    }
    let b = grid.curl(a);
    let lhs = xi.dot_pointwise(&d.cross_pointwise(&b)).integrate();
    let rhs = a.dot_pointwise(&grid.curl(&xi.cross_pointwise(d))).integrate();
    Ok((lhs, rhs))
}

/// `P = D×B − A div D`, the momentum density without the divergence
/// constraint.
pub fn poynting_general<T: Real>(
    grid: &Grid<T>,
    d: &VectorField<T>,
    b: &VectorField<T>,
    a: &VectorField<T>,
) -> VectorField<T> {
    let divd = grid.div(d);
    &d.cross_pointwise(b) - &a.mul_scalar_pointwise(&divd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::init::random_field;

    fn uniform(spec: GridSpec, d: [f64; 3], b: [f64; 3]) -> EMState<f64> {
        EMState::new_unchecked(VectorField::constant(spec, d), VectorField::constant(spec, b))
    }

    #[test]
    fn vacuum_density_is_one() {
        let s = uniform(GridSpec::cube(4), [0.0; 3], [0.0; 3]);
        let h = bi_energy_density(&s);
        assert!(h.values().iter().all(|&v| v == 1.0));
        let (e, hh) = bi_variational_derivatives(&s);
        assert_eq!(e.max_abs(), 0.0);
        assert_eq!(hh.max_abs(), 0.0);
        let hv = hydro_vars(&s);
        assert_eq!(hv.v.max_abs() + hv.gamma.max_abs() + hv.beta.max_abs(), 0.0);
    }

    #[test]
    fn crossed_unit_fields() {
        let s = uniform(GridSpec::cube(4), [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert!(bi_energy_density(&s).values().iter().all(|&v| (v - 2.0).abs() < 1e-15));
        let (e, h) = bi_variational_derivatives(&s);
        assert_eq!(e.at(0), [1.0, 0.0, 0.0]);
        assert_eq!(h.at(0), [0.0, 1.0, 0.0]);
        assert_eq!(poynting(&s).at(3), [0.0, 0.0, 1.0]);
        let hv = hydro_vars(&s);
        assert_eq!(hv.v.at(0), [0.0, 0.0, 0.5]);
        assert_eq!(hv.gamma.at(0), [0.5, 0.0, 0.0]);
        assert_eq!(hv.beta.at(0), [0.0, 0.5, 0.0]);
    }

    #[test]
    fn parallel_fields_carry_no_momentum() {
        let s = uniform(GridSpec::cube(4), [0.3, -0.2, 0.1], [0.6, -0.4, 0.2]);
        assert!(poynting(&s).max_abs() < 1e-16);
    }

    #[test]
    fn weak_field_series() {
        let spec = GridSpec::cube(8);
        for amp in [1e-2, 1e-3] {
            let s = EMState::new_unchecked(
                random_field::<f64>(spec, 1, amp, 2, true),
                random_field::<f64>(spec, 2, amp, 2, true),
            );
            let h = bi_energy_density(&s);
            let quad = s.d.norm_sq().zip_map(&s.b.norm_sq(), |a, b| 1.0 + 0.5 * (a + b));
            // remainder is O(amp⁴) with an O(1) constant
            assert!((&h - &quad).max_abs() < 2.0 * amp.powi(4));
            let (e, hh) = bi_variational_derivatives(&s);
            let rel = (&e - &s.d).max_abs().max((&hh - &s.b).max_abs()) / amp;
            if amp <= 1e-3 {
                assert!(rel < 1e-5, "rel = {rel}");
            }
        }
    }

    #[test]
    fn poynting_forms_agree() {
        let spec = GridSpec::cube(8);
        let s = EMState::new_unchecked(
            random_field::<f64>(spec, 3, 0.8, 2, true),
            random_field::<f64>(spec, 4, 0.8, 2, true),
        );
        assert!(poynting_eh_discrepancy(&s) < 1e-12);
        let p = poynting(&s);
        assert!(p.dot_pointwise(&s.d).max_abs() < 1e-15);
        assert!(p.dot_pointwise(&s.b).max_abs() < 1e-15);
    }

    #[test]
    fn checked_constructor_rejects_divergent_fields() {
        let spec = GridSpec::cube(8);
        let g = Grid::<f64>::new(spec).unwrap();
        let d = VectorField::from_fn(spec, |x: f64, _, _| [x.sin(), 0.0, 0.0]);
        assert!(EMState::new(&g, d, g.zeros_vector()).is_err());
    }

    #[test]
    fn general_poynting_gradient_case() {
        let spec = GridSpec::cube(8);
        let g = Grid::<f64>::new(spec).unwrap();
        let f = ScalarField::from_fn(spec, |x: f64, _, _| x.sin());
        let d = g.grad(&f);
        let a = VectorField::constant(spec, [0.0, 1.0, 0.0]);
        let p = poynting_general(&g, &d, &g.zeros_vector(), &a);
        let want = VectorField::from_fn(spec, |x: f64, _, _| [0.0, x.sin(), 0.0]);
        assert!((&p - &want).max_abs() < 1e-13);
    }
}
