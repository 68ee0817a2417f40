use crate::dynamics::{bi_rhs, Closure};
use crate::em::{bi_variational_derivatives, hydro_vars, EMState};
use crate::error::{Error, Result};
use crate::grid::{div_tolerance, dot3, Grid, VectorField};
use crate::real::Real;

use super::kelvin::kelvin_force_field;

/// Sign `s` in `{F_ξ, F_η} = s ⟨P, [ξ, η]⟩` for the smeared momentum
/// functionals `F_ξ = ⟨P, ξ⟩` under the canonical `(D, A)` bracket. Fixed by
/// a brute-force finite-difference evaluation of the bracket in the tests.
pub const LP_SIGN: f64 = -1.0;

/// `α ⋄ D = D × curl α − α div D`, the dual of the 2-form Lie derivative.
pub fn diamond<T: Real>(grid: &Grid<T>, alpha: &VectorField<T>, d: &VectorField<T>) -> VectorField<T> {
    let c = d.cross_pointwise(&grid.curl(alpha));
    &c - &alpha.mul_scalar_pointwise(&grid.div(d))
}

/// `[ξ, η] = (ξ·∇)η − (η·∇)ξ`, products not truncated.
pub fn vector_field_bracket<T: Real>(grid: &Grid<T>, xi: &VectorField<T>, eta: &VectorField<T>) -> VectorField<T> {
    let gx = grid.gradient_tensor(xi);
    let ge = grid.gradient_tensor(eta);
    VectorField::from_index_fn(*grid.spec(), |i| {
        let a = xi.at(i);
        let b = eta.at(i);
        [0, 1, 2].map(|k| dot3(a, ge[k].at(i)) - dot3(b, gx[k].at(i)))
    })
}

/// Unsigned sides of the momentum bracket identity, without constraint
/// checks: `lhs = ∫ δF_ξ/δD·δF_η/δA − δF_η/δD·δF_ξ/δA` from the closed-form
/// derivatives `δF/δD = (curl A)×ξ`, `δF/δA = curl(ξ×D)`, and
/// `⟨P, [ξ, η]⟩` with `P = D × curl A`.
pub fn lp_bracket_sides<T: Real>(
    grid: &Grid<T>,
    d: &VectorField<T>,
    a: &VectorField<T>,
    xi: &VectorField<T>,
    eta: &VectorField<T>,
) -> (T, T) {
    let b = grid.curl(a);
    let (fa_xi, fa_eta) = grid.curl_pair(&xi.cross_pointwise(d), &eta.cross_pointwise(d), false);
    let fd_xi = b.cross_pointwise(xi);
    let fd_eta = b.cross_pointwise(eta);
    let lhs = fd_xi.dot_pointwise(&fa_eta).integrate() - fd_eta.dot_pointwise(&fa_xi).integrate();
    let p = d.cross_pointwise(&b);
    let pairing = p.dot_pointwise(&vector_field_bracket(grid, xi, eta)).integrate();
    (lhs, pairing)
}

fn require_divfree<T: Real>(grid: &Grid<T>, name: &str, f: &VectorField<T>) -> Result<()> {
    let d = grid.max_div(f).as_f64();
    let tol = div_tolerance(1e-10, f.max_abs());
    if !(d <= tol) {
        return Err(Error::constraint(format!("max|div {name}|"), d, tol));
    }
    Ok(())
}

/// Lie–Poisson bracket check of the Poynting momentum through smeared
/// functionals: returns `({F_ξ, F_η}, LP_SIGN·⟨P, [ξ, η]⟩)`.
///
/// `D`, `ξ` and `η` must be divergence-free.
pub fn lp_bracket_check<T: Real>(
    grid: &Grid<T>,
    d: &VectorField<T>,
    a: &VectorField<T>,
    xi: &VectorField<T>,
    eta: &VectorField<T>,
) -> Result<(T, T)> {
    for f in [d, a, xi, eta] {
        grid.check(f.spec())?;
    }
    require_divfree(grid, "D", d)?;
    require_divfree(grid, "xi", xi)?;
    require_divfree(grid, "eta", eta)?;
    let (lhs, pairing) = lp_bracket_sides(grid, d, a, xi, eta);
    Ok((lhs, T::lit(LP_SIGN) * pairing))
}

/// `∂t P` in conservative form, `−div(P⊗P/ℋ − D⊗D/ℋ − B⊗B/ℋ) + ∇(1/ℋ)`.
fn momentum_rate_conservative<T: Real>(grid: &Grid<T>, s: &EMState<T>) -> VectorField<T> {
    let hv = hydro_vars(s);
    let p = s.d.cross_pointwise(&s.b);
    let spec = *grid.spec();
    let comps: [VectorField<T>; 3] = [0, 1, 2].map(|k| {
        // column k of the flux tensor, T_jk for j = 0..3
        VectorField::from_index_fn(spec, |i| {
            let (pv, dv, bv) = (p.at(i), s.d.at(i), s.b.at(i));
            let inv = T::one() / hv.hd.values()[i];
            [0, 1, 2].map(|j| (pv[j] * pv[k] - dv[j] * dv[k] - bv[j] * bv[k]) * inv)
        })
    });
    let divs = comps.map(|c| grid.div(&c));
    let inv_h = hv.hd.map(|h| T::one() / h);
    let g = grid.grad(&inv_h);
    let [dx, dy, dz] = divs;
    let flux = VectorField::new(dx, dy, dz).expect("same grid");
    &g - &flux
}

/// `∂t P` in Lie–Poisson form,
/// `−𝓛_v(P·dx⊗d³x) − (δH/δB) ⋄ B − (δH/δD) ⋄ D`, with `(B, D, P)` varied
/// independently so that `δH/δP = v`, `δH/δD = γ`, `δH/δB = β`.
fn momentum_rate_lie_poisson<T: Real>(grid: &Grid<T>, s: &EMState<T>) -> VectorField<T> {
    let hv = hydro_vars(s);
    let p = s.d.cross_pointwise(&s.b);
    let spec = *grid.spec();
    let gv = grid.gradient_tensor(&hv.v);
    let transport = [0, 1, 2].map(|k| grid.div(&hv.v.mul_scalar_pointwise(p.components()[k])));
    let stretch = VectorField::from_index_fn(spec, |i| {
        let pi = p.at(i);
        [0, 1, 2].map(|k| pi[0] * gv[0].at(i)[k] + pi[1] * gv[1].at(i)[k] + pi[2] * gv[2].at(i)[k])
    });
    let [tx, ty, tz] = transport;
    let lie = &VectorField::new(tx, ty, tz).expect("same grid") + &stretch;
    let forces = &diamond(grid, &hv.beta, &s.b) + &diamond(grid, &hv.gamma, &s.d);
    -&(&lie + &forces)
}

/// L² norm of the difference between the conservative and the Lie–Poisson
/// forms of the momentum equation at the state `s`. Both are evaluated
/// independently with untruncated spectral derivatives.
pub fn km_bracket_residual<T: Real>(grid: &Grid<T>, s: &EMState<T>) -> T {
    let a = momentum_rate_conservative(grid, s);
    let b = momentum_rate_lie_poisson(grid, s);
    (&a - &b).l2_norm()
}

/// L² norm of `∂tϖ − curl(v×ϖ) + curl(γ×curl γ + β×curl β)` with `ϖ = curl v`,
/// where `∂t v` follows from the Born–Infeld field equations at `s`.
pub fn vorticity_residual<T: Real>(grid: &Grid<T>, s: &EMState<T>) -> T {
    let rate = bi_rhs(grid, s, Closure::BornInfeld);
    let (e, h) = bi_variational_derivatives(s);
    let hv = hydro_vars(s);
    let spec = *grid.spec();
    let p = s.d.cross_pointwise(&s.b);
    // ∂t v = Ṗ/ℋ − P ℋ̇/ℋ² with Ṗ = Ḋ×B + D×Ḃ, ℋ̇ = E·Ḋ + H·Ḃ
    let dv = VectorField::from_index_fn(spec, |i| {
        let (dd, db) = (rate.d.at(i), rate.b.at(i));
        let pd = crate::grid::cross3(dd, s.b.at(i));
        let pb = crate::grid::cross3(s.d.at(i), db);
        let hdot = dot3(e.at(i), dd) + dot3(h.at(i), db);
        let inv = T::one() / hv.hd.values()[i];
        let pi = p.at(i);
        [0, 1, 2].map(|k| (pd[k] + pb[k]) * inv - pi[k] * hdot * inv * inv)
    });
    let w = grid.curl(&hv.v);
    let dw = grid.curl(&dv);
    let advect = grid.curl(&hv.v.cross_pointwise(&w));
    let force = grid.curl(&kelvin_force_field(grid, s));
    let r = &(&dw - &advect) + &force;
    r.l2_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::init::random_field;

    fn smooth_state(n: usize, amp: f64) -> (Grid<f64>, EMState<f64>) {
        let g = Grid::<f64>::new(GridSpec::cube(n)).unwrap();
        let d = random_field(*g.spec(), 11, amp, 2, true);
        let b = random_field(*g.spec(), 12, amp, 2, true);
        let s = EMState::new(&g, d, b).unwrap();
        (g, s)
    }

    /// Discrete `F_ξ(D, A) = Σ A·curl(ξ×D) ΔV`.
    fn functional(g: &Grid<f64>, d: &VectorField<f64>, a: &VectorField<f64>, xi: &VectorField<f64>) -> f64 {
        a.dot_pointwise(&g.curl(&xi.cross_pointwise(d))).integrate()
    }

    /// Gradient of a discrete functional by centered differences, divided by
    /// the cell volume to give a density.
    fn fd_gradient(
        f: impl Fn(&VectorField<f64>) -> f64,
        at: &VectorField<f64>,
        dv: f64,
    ) -> VectorField<f64> {
        let mut out = at.clone();
        let h = 1e-3;
        for c in 0..3 {
            for i in 0..at.spec().len() {
                let mut p = at.clone();
                p.components_mut()[c].values_mut()[i] += h;
                let mut m = at.clone();
                m.components_mut()[c].values_mut()[i] -= h;
                out.components_mut()[c].values_mut()[i] = (f(&p) - f(&m)) / (2.0 * h * dv);
            }
        }
        out
    }

    #[test]
    fn bracket_sign_matches_brute_force_canonical_bracket() {
        let g = Grid::<f64>::new(GridSpec::cube(8)).unwrap();
        let spec = *g.spec();
        let d = random_field(spec, 1, 1.0, 2, true);
        let a = random_field(spec, 2, 1.0, 2, false);
        let xi = VectorField::<f64>::from_fn(spec, |x, _, _| [0.0, x.cos(), 0.0]);
        let eta = VectorField::<f64>::from_fn(spec, |_, y, _| [0.0, 0.0, y.cos()]);
        let dv = spec.cell_volume();
        let fd = |xi: &VectorField<f64>| {
            let dd = fd_gradient(|x| functional(&g, x, &a, xi), &d, dv);
            let da = fd_gradient(|x| functional(&g, &d, x, xi), &a, dv);
            (dd, da)
        };
        let (dxi_d, dxi_a) = fd(&xi);
        let (deta_d, deta_a) = fd(&eta);
        let brute =
            dxi_d.dot_pointwise(&deta_a).integrate() - deta_d.dot_pointwise(&dxi_a).integrate();
        let (lhs, pairing) = lp_bracket_sides(&g, &d, &a, &xi, &eta);
        assert!((brute - lhs).abs() < 1e-8 * lhs.abs(), "{brute} vs {lhs}");
        assert!(pairing.abs() > 1e-3);
        let sign = (lhs / pairing).signum();
        assert_eq!(sign, LP_SIGN);
        assert!((lhs - sign * pairing).abs() < 1e-10 * lhs.abs());
    }

    #[test]
    fn lp_bracket_identity_on_16_cubed() {
        let g = Grid::<f64>::new(GridSpec::cube(16)).unwrap();
        let spec = *g.spec();
        let d = random_field(spec, 5, 1.0, 3, true);
        let a = random_field(spec, 6, 1.0, 3, false);
        let xi = VectorField::<f64>::from_fn(spec, |x, _, _| [0.0, x.cos(), 0.0]);
        let eta = VectorField::<f64>::from_fn(spec, |_, y, _| [0.0, 0.0, y.cos()]);
        let (lhs, rhs) = lp_bracket_check(&g, &d, &a, &xi, &eta).unwrap();
        assert!((lhs - rhs).abs() / lhs.abs().max(1e-14) < 1e-8, "{lhs} vs {rhs}");
        let (l, r) = lp_bracket_check(&g, &d, &a, &xi, &xi).unwrap();
        assert!(l.abs() < 1e-11 && r.abs() < 1e-11);
        let c1 = VectorField::constant(spec, [1.0, 0.0, 0.0]);
        let c2 = VectorField::constant(spec, [0.0, 0.5, 0.2]);
        let (l, r) = lp_bracket_check(&g, &d, &a, &c1, &c2).unwrap();
        assert!(l.abs() < 1e-11 && r.abs() < 1e-11, "{l} {r}");
        let bad = VectorField::<f64>::from_fn(spec, |x, _, _| [x.sin(), 0.0, 0.0]);
        assert!(lp_bracket_check(&g, &d, &a, &bad, &eta).is_err());
    }

    #[test]
    fn diamond_of_divfree_flux_is_cross_with_curl() {
        let g = Grid::<f64>::new(GridSpec::cube(8)).unwrap();
        let d = random_field(*g.spec(), 3, 1.0, 2, true);
        let al = random_field(*g.spec(), 4, 1.0, 2, false);
        let want = d.cross_pointwise(&g.curl(&al));
        assert!((&diamond(&g, &al, &d) - &want).max_abs() < 1e-13);
        let f = VectorField::<f64>::from_fn(*g.spec(), |x, _, _| [x.sin(), 0.0, 0.0]);
        let c = VectorField::constant(*g.spec(), [0.0, 2.0, 0.0]);
        let out = diamond(&g, &c, &f);
        let want = VectorField::<f64>::from_fn(*g.spec(), |x, _, _| [0.0, -2.0 * x.cos(), 0.0]);
        assert!((&out - &want).max_abs() < 1e-13);
    }

    #[test]
    fn km_residual_vanishes_for_trivial_states() {
        let g = Grid::<f64>::new(GridSpec::cube(8)).unwrap();
        assert!(km_bracket_residual(&g, &EMState::zeros(&g)) < 1e-14);
        let s = EMState::new_unchecked(
            VectorField::constant(*g.spec(), [0.3, 0.1, 0.0]),
            VectorField::constant(*g.spec(), [0.0, 0.7, 0.2]),
        );
        assert!(km_bracket_residual(&g, &s) < 1e-13);
        assert!(vorticity_residual(&g, &s) < 1e-13);
    }

    #[test]
    fn km_forms_agree_on_smooth_state() {
        let (g, s) = smooth_state(32, 0.5);
        let r = km_bracket_residual(&g, &s);
        let scale = momentum_rate_conservative(&g, &s).l2_norm();
        assert!(r < 1e-6, "residual {r} (scale {scale})");
    }

    #[test]
    fn conservative_form_is_the_rate_of_poynting() {
        let (g, s) = smooth_state(64, 0.5);
        let scale = momentum_rate_conservative(&g, &s).l2_norm();
        let rate = bi_rhs(&g, &s, Closure::BornInfeld);
        let pdot = &rate.d.cross_pointwise(&s.b) + &s.d.cross_pointwise(&rate.b);
        let err = (&pdot - &momentum_rate_conservative(&g, &s)).l2_norm();
        assert!(err < 1e-8 * scale.max(1.0), "{err}");
    }

    #[test]
    fn vorticity_equation_holds_on_smooth_state() {
        let mut prev = f64::INFINITY;
        for n in [16, 32, 64] {
            let (g, s) = smooth_state(n, 0.5);
            let r = vorticity_residual(&g, &s);
            assert!(r < prev / 100.0, "{n}: residual {r} after {prev}");
            prev = r;
        }
        assert!(prev < 1e-7, "residual {prev}");
    }
}
