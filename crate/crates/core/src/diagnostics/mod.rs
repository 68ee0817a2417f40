//! Conserved totals, constraint residuals, circulation around tracked loops and
//! numerical checks of the Hamiltonian structure.

mod brackets;
mod kelvin;
mod loops;
mod record;

use crate::dynamics::{mhd_energy_density, Closure, MhdState, VorticityState};
use crate::em::{bi_energy_density, poynting, EMState};
use crate::error::{Error, Result};
use crate::grid::{dot3, Grid};
use crate::real::Real;

pub use brackets::{
    diamond, km_bracket_residual, lp_bracket_check, lp_bracket_sides, vector_field_bracket,
    vorticity_residual, LP_SIGN,
};
pub use kelvin::{bi_kelvin, kelvin_force, kelvin_force_field, KelvinState, KelvinSystem, LoopCarrier};
pub use loops::{
    advect_loop, loop_circulation, loop_circulation_polygon, loop_integral, loop_integral_polygon,
    spectral_tangent, LoopQuadrature,
    TracerLoop,
};
pub use record::{DiagnosticsRecord, CSV_COLUMNS};

/// Borrowed view of any evolved state, for model-independent diagnostics.
#[derive(Clone, Copy, Debug)]
pub enum StateView<'a, T: Real> {
    Em(&'a EMState<T>, Closure),
    Mhd(&'a MhdState<T>),
    Vorticity(&'a VorticityState<T>),
}

/// Total energy of a state.
///
/// Born–Infeld: `∫ℋ`; Maxwell: `½∫(|D|² + |B|²)`; MHD: `∫h`, rejected below
/// the `h` floor; Euler: `½∫|u|²`.
pub fn total_energy<T: Real>(grid: &Grid<T>, state: StateView<'_, T>) -> Result<T> {
    match state {
        StateView::Em(s, Closure::BornInfeld) => Ok(bi_energy_density(s).integrate()),
        StateView::Em(s, Closure::Maxwell) => {
            let e = &s.d.norm_sq() + &s.b.norm_sq();
            Ok(T::lit(0.5) * e.integrate())
        }
        StateView::Mhd(s) => Ok(mhd_energy_density(s, crate::dynamics::H_FLOOR)?.integrate()),
        StateView::Vorticity(s) => {
            let u = s.velocity(grid)?;
            Ok(T::lit(0.5) * u.norm_sq().integrate())
        }
    }
}

/// Total momentum: `∫D×B` for field states, `∫P` for MHD, `∫u` for Euler.
pub fn total_momentum<T: Real>(grid: &Grid<T>, state: StateView<'_, T>) -> Result<[T; 3]> {
    match state {
        StateView::Em(s, _) => Ok(poynting(s).integrate()),
        StateView::Mhd(s) => Ok(s.p.integrate()),
        StateView::Vorticity(s) => Ok(s.velocity(grid)?.integrate()),
    }
}

/// Magnetic helicity `∫ A·B` with `A = curl⁻¹ B`.
///
/// Requires a divergence-free, zero-mean `B`.
pub fn magnetic_helicity<T: Real>(grid: &Grid<T>, b: &crate::grid::VectorField<T>) -> Result<T> {
    let a = grid.curl_inv(b)?;
    Ok(a.dot_pointwise(b).integrate())
}

/// `max |P·B| / h` over the grid.
pub fn pb_orthogonality<T: Real>(s: &MhdState<T>, floor: f64) -> Result<T> {
    let h = mhd_energy_density(s, floor)?;
    let spec = *s.p.spec();
    let worst = (0..spec.len())
        .map(|i| dot3(s.p.at(i), s.b.at(i)).abs() / h.values()[i])
        .fold(T::zero(), T::max);
    if !worst.is_finite() {
        return Err(Error::NonFinite {
            what: "P·B/h".into(),
            step: 0,
        });
    }
    Ok(worst)
}

/// Relative change `|a − b| / max(|b|, tiny)`.
pub fn relative_drift(now: f64, start: f64) -> f64 {
    (now - start).abs() / start.abs().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, ScalarField, VectorField};
    use crate::init::{abc, random_field};
    use std::f64::consts::PI;

    fn vol() -> f64 {
        (2.0 * PI).powi(3)
    }

    #[test]
    fn vacuum_and_uniform_energies() {
        let g = Grid::<f64>::new(GridSpec::cube(8)).unwrap();
        let s = EMState::zeros(&g);
        let e = total_energy(&g, StateView::Em(&s, Closure::BornInfeld)).unwrap();
        assert!((e - vol()).abs() < 1e-10);
        let s = EMState::new_unchecked(
            VectorField::constant(*g.spec(), [1.0, 0.0, 0.0]),
            VectorField::constant(*g.spec(), [0.0, 1.0, 0.0]),
        );
        let e = total_energy(&g, StateView::Em(&s, Closure::BornInfeld)).unwrap();
        assert!((e - 2.0 * vol()).abs() < 1e-10);
        let m = total_momentum(&g, StateView::Em(&s, Closure::BornInfeld)).unwrap();
        assert!(m[0].abs() + m[1].abs() < 1e-12);
        assert!((m[2] - vol()).abs() < 1e-10);
        let e = total_energy(&g, StateView::Em(&s, Closure::Maxwell)).unwrap();
        assert!((e - vol()).abs() < 1e-10);
    }

    #[test]
    fn zero_mhd_state_is_rejected() {
        let g = Grid::<f64>::new(GridSpec::cube(8)).unwrap();
        let s = MhdState::new(g.zeros_vector(), g.zeros_vector());
        assert!(matches!(
            total_energy(&g, StateView::Mhd(&s)),
            Err(Error::FloorViolation { .. })
        ));
    }

    #[test]
    fn helicity_of_single_mode_and_abc() {
        let g = Grid::<f64>::new(GridSpec::cube(16)).unwrap();
        let b = VectorField::<f64>::from_fn(*g.spec(), |x, _, _| [0.0, 0.0, x.cos()]);
        assert!(magnetic_helicity(&g, &b).unwrap().abs() < 1e-12);
        let b = abc::<f64>(*g.spec(), 1.0, 0.0);
        let h = magnetic_helicity(&g, &b).unwrap();
        assert!((h - 3.0 * vol()).abs() < 1e-9 * vol(), "{h}");
        let bad = VectorField::constant(*g.spec(), [0.0, 0.0, 1.0]);
        assert!(magnetic_helicity(&g, &bad).is_err());
    }

    #[test]
    fn helicity_is_gauge_invariant() {
        let g = Grid::<f64>::new(GridSpec::cube(16)).unwrap();
        let b = random_field::<f64>(*g.spec(), 4, 1.0, 3, true);
        let a = g.curl_inv(&b).unwrap();
        let psi = ScalarField::<f64>::from_fn(*g.spec(), |x, y, z| (x + 2.0 * y).sin() * z.cos());
        let shifted = &a + &g.grad(&psi);
        let h0 = a.dot_pointwise(&b).integrate();
        let h1 = shifted.dot_pointwise(&b).integrate();
        assert!((h1 - h0).abs() < 1e-10 * h0.abs().max(1.0));
        assert!((magnetic_helicity(&g, &b).unwrap() - h0).abs() < 1e-12 * h0.abs().max(1.0));
    }

    #[test]
    fn euler_energy_of_taylor_green() {
        let g = Grid::<f64>::new(GridSpec::cube(16)).unwrap();
        let w = crate::init::taylor_green_vorticity::<f64>(*g.spec(), 1.0);
        let s = VorticityState::new(w);
        let e = total_energy(&g, StateView::Vorticity(&s)).unwrap();
        // u = (sin x cos y cos z, −cos x sin y cos z, 0): mean |u|² = 1/4
        assert!((e - vol() / 8.0).abs() < 1e-10, "{e}");
    }

    #[test]
    fn orthogonal_mhd_data_has_zero_pb() {
        let spec = GridSpec::cube(16);
        let (p, b) = crate::init::mhd_orthogonal::<f64>(spec, 1, 0.5, 2).unwrap();
        let s = MhdState::new(p, b);
        assert!(pb_orthogonality(&s, 1e-8).unwrap() < 1e-15);
    }
}
