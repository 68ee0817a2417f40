//! Independent oracles for the field layer: finite differences, exact
//! solutions and quadrature identities.

use sabi_core::dynamics::{
    bi_rhs, mhd_energy_density, mhd_rhs, BiSystem, Closure, MhdState, H_FLOOR,
};
use sabi_core::em::{
    bi_energy_density, bi_variational_derivatives, maxwell_variational_derivatives,
    momentum_map_pairing, EMState,
};
use sabi_core::init::{mhd_orthogonal, plane_wave, random_field};
use sabi_core::integrators::{advance, IntegratorConfig, Scheme};
use sabi_core::{Grid64, GridSpec, VectorField64};

fn grid(n: usize) -> Grid64 {
    Grid64::new(GridSpec::cube(n)).unwrap()
}

/// `∂(Σ ℋ ΔV)/∂F_c(i) / ΔV` by centred differences, where `F` is `D` or `B`.
/// Only the perturbed sample's density changes, so the difference of the
/// total is accumulated as a sum of per-sample differences to avoid
/// cancellation against the full integral.
fn fd_density_gradient(s: &EMState<f64>, perturb_d: bool, h: f64) -> VectorField64 {
    let spec = *s.d.spec();
    let mut out = VectorField64::zeros(spec);
    let base = if perturb_d { &s.d } else { &s.b };
    for c in 0..3 {
        for i in 0..spec.len() {
            let bump = |sign: f64| {
                let mut f = base.clone();
                f.components_mut()[c].values_mut()[i] += sign * h;
                if perturb_d {
                    EMState::new_unchecked(f, s.b.clone())
                } else {
                    EMState::new_unchecked(s.d.clone(), f)
                }
            };
            let hp = bi_energy_density(&bump(1.0));
            let hm = bi_energy_density(&bump(-1.0));
            let dv = spec.cell_volume();
            let diff: f64 = hp.values().iter().zip(hm.values()).map(|(a, b)| (a - b) * dv).sum();
            out.components_mut()[c].values_mut()[i] = diff / (2.0 * h * dv);
        }
    }
    out
}

#[test]
fn variational_derivatives_match_finite_differences() {
    let g = grid(8);
    for seed in [1u64, 2, 3] {
        let d = random_field::<f64>(*g.spec(), seed, 1.5, 2, true);
        let b = random_field::<f64>(*g.spec(), seed + 100, 1.5, 2, true);
        let s = EMState::new(&g, d, b).unwrap();
        let (e, h) = bi_variational_derivatives(&s);
        let fe = fd_density_gradient(&s, true, 1e-6);
        let fh = fd_density_gradient(&s, false, 1e-6);
        let re = (&fe - &e).max_abs() / e.max_abs();
        let rh = (&fh - &h).max_abs() / h.max_abs();
        assert!(re < 1e-6 && rh < 1e-6, "seed {seed}: {re:e} {rh:e}");
    }
}

#[test]
fn weak_fields_reduce_to_maxwell() {
    let g = grid(8);
    for amp in [1e-3, 1e-4] {
        let d = random_field::<f64>(*g.spec(), 5, amp, 2, true);
        let b = random_field::<f64>(*g.spec(), 6, amp, 2, true);
        let s = EMState::new_unchecked(d, b);
        let (e, h) = bi_variational_derivatives(&s);
        let (em, hm) = maxwell_variational_derivatives(&s);
        assert!((&e - &em).max_abs() < 1e-5 * em.max_abs());
        assert!((&h - &hm).max_abs() < 1e-5 * hm.max_abs());
    }
}

#[test]
fn momentum_map_pairing_on_random_inputs() {
    let g = grid(16);
    let a = random_field::<f64>(*g.spec(), 1, 1.0, 4, false);
    let d = random_field::<f64>(*g.spec(), 2, 1.0, 4, true);
    let xi = random_field::<f64>(*g.spec(), 3, 1.0, 3, true);
    let (lhs, rhs) = momentum_map_pairing(&g, &a, &d, &xi).unwrap();
    assert!((lhs - rhs).abs() < 1e-10 * lhs.abs(), "{lhs} {rhs}");
    let (l0, r0) = momentum_map_pairing(&g, &a, &d, &g.zeros_vector()).unwrap();
    assert_eq!((l0, r0), (0.0, 0.0));
}

#[test]
fn rk4_maxwell_plane_wave_is_fourth_order() {
    let g = grid(32);
    let sys = BiSystem::deterministic(g.clone(), Closure::Maxwell);
    let mut errs = Vec::new();
    for steps in [16u64, 32, 64] {
        let dt = 1.0 / steps as f64;
        let cfg = IntegratorConfig::new(Scheme::Rk4, dt, 1.0);
        let (d, b) = plane_wave::<f64>(*g.spec(), 1.0, 0.0);
        let mut x = EMState::new(&g, d, b).unwrap();
        for step in 0..steps {
            x = advance(&sys, &cfg, g.spec().min_spacing(), &x, step, &[]).unwrap();
        }
        let (d1, b1) = plane_wave::<f64>(*g.spec(), 1.0, 1.0);
        errs.push(((&x.d - &d1).l2_norm().powi(2) + (&x.b - &b1).l2_norm().powi(2)).sqrt());
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 4.0).abs() < 0.3, "order {order} from {errs:?}");
    }
}

#[test]
fn maxwell_plane_wave_is_an_exact_rhs_solution() {
    let g = grid(16);
    let (d, b) = plane_wave::<f64>(*g.spec(), 0.7, 0.3);
    let s = EMState::new(&g, d, b).unwrap();
    let r = bi_rhs(&g, &s, Closure::Maxwell);
    // ∂t of cos(x − t) is sin(x − t)
    let want = VectorField64::from_fn(*g.spec(), |x, _, _| [0.0, 0.7 * (x - 0.3).sin(), 0.0]);
    assert!((&r.d - &want).max_abs() < 1e-12);
}

fn mhd_energy_rate(n: usize) -> f64 {
    let g = grid(n);
    let (p, b) = mhd_orthogonal::<f64>(*g.spec(), 7, 0.5, 2).unwrap();
    let s = MhdState::new(p, b);
    let r = mhd_rhs(&g, &s, H_FLOOR).unwrap();
    assert!(g.max_div(&r.b) < 1e-12);
    let h = mhd_energy_density(&s, H_FLOOR).unwrap();
    (&s.p.dot_pointwise(&r.p) + &s.b.dot_pointwise(&r.b))
        .zip_map(&h, |a, h| a / h)
        .integrate()
}

/// `∫h` is conserved up to the aliasing of the non-polynomial density, which
/// decays spectrally with resolution.
#[test]
fn mhd_energy_rate_vanishes() {
    let rates: Vec<f64> = [16, 32, 64].iter().map(|&n| mhd_energy_rate(n).abs()).collect();
    assert!(rates[1] < 1e-3 * rates[0] && rates[2] < 1e-3 * rates[1], "{rates:?}");
    assert!(rates[2] < 1e-9, "{rates:?}");
}
