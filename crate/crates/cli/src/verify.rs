//! Canned verification suites, one per acceptance criterion. Each suite runs
//! at its documented defaults, measures the quantities its criterion names
//! and reports pass or fail together with the measured values and runtime.

use std::fmt;
use std::time::Instant;

use sabi_core::diagnostics::{
    km_bracket_residual, lp_bracket_check, KelvinSystem, magnetic_helicity, pb_orthogonality, total_energy,
    total_momentum, vector_field_bracket, LoopQuadrature, StateView, TracerLoop,
};
use sabi_core::dynamics::{mhd_energy_density, BiSystem, Closure, MhdState, MhdSystem, System, H_FLOOR};
use sabi_core::em::{bi_energy_density, bi_variational_derivatives, momentum_map_pairing, poynting, EMState};
use sabi_core::ensemble::run_members;
use sabi_core::grid::interp::SpectralInterpolant;
use sabi_core::init::{mhd_orthogonal, plane_wave, random_field_on};
use sabi_core::integrators::{advance, IntegratorConfig, Scheme};
use sabi_core::noise::{BrownianPath, ModeSpec, NoiseModel, WienerDriver};
use sabi_core::{Error, Grid64, GridSpec, Result, VectorField64};

use crate::error::{CliError, CliResult};

/// Suite names in criterion order.
pub const SUITES: [&str; 11] = [
    "operators",
    "variational-derivatives",
    "energy-deterministic",
    "stochastic-energy",
    "momentum-dichotomy",
    "ito-stratonovich",
    "expectation",
    "pure-transport",
    "mhd",
    "hamiltonian-structure",
    "kelvin",
];

/// Overrides of a suite's default grid size and (coarsest) time step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VerifyOptions {
    pub grid: Option<usize>,
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub criterion: usize,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub seconds: f64,
    pub limit: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: {} (runtime {:.1} s, limit {:.0} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.name,
            self.summary,
            self.seconds,
            self.limit
        )
    }
}

/// Numerical verdict of a suite before the runtime limit is applied.
struct Outcome {
    passed: bool,
    summary: String,
}

impl Outcome {
    fn new(passed: bool, summary: String) -> Self {
        Self { passed, summary }
    }
}

/// Runs one suite by name, or every suite for `"all"`.
pub fn run_suite(name: &str, opts: &VerifyOptions) -> CliResult<Vec<Check>> {
    if name == "all" {
        return SUITES.iter().map(|s| run_one(s, opts)).collect();
    }
    Ok(vec![run_one(name, opts)?])
}

fn run_one(name: &str, opts: &VerifyOptions) -> CliResult<Check> {
    let Some(index) = SUITES.iter().position(|s| *s == name) else {
        return Err(CliError::Config(format!(
            "unknown suite {name:?}; expected one of {} or all",
            SUITES.join(", ")
        )));
    };
    if let Some(n) = opts.grid {
        GridSpec::cube(n)
            .validate()
            .map_err(|e| CliError::Config(format!("--grid: {e}")))?;
    }
    if let Some(dt) = opts.dt {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CliError::Config(format!("--dt: {dt} must be positive")));
        }
    }
    let (suite, limit): (fn(&VerifyOptions) -> Result<Outcome>, f64) = match index {
        0 => (operators, 10.0),
        1 => (variational_derivatives, 30.0),
        2 => (energy_deterministic, 300.0),
        3 => (stochastic_energy, 300.0),
        4 => (momentum_dichotomy, 300.0),
        5 => (ito_stratonovich, 600.0),
        6 => (expectation, 600.0),
        7 => (pure_transport, 120.0),
        8 => (mhd, 300.0),
        9 => (hamiltonian_structure, 60.0),
        _ => (kelvin, 300.0),
    };
    let start = Instant::now();
    let outcome = suite(opts).map_err(|e| match e {
        e if e.is_numerical() => CliError::Numerical(e),
        Error::InvalidGrid(_) | Error::InvalidArgument(_) => CliError::Config(e.to_string()),
        e => CliError::Numerical(e),
    })?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(Check {
        criterion: index + 1,
        name: SUITES[index],
        passed: outcome.passed && seconds < limit,
        summary: outcome.summary,
        seconds,
        limit,
    })
}

fn grid(opts: &VerifyOptions, default: usize) -> Result<Grid64> {
    Grid64::new(GridSpec::cube(opts.grid.unwrap_or(default)))
}

/// Random divergence-free `(D, B)` with `max|D| = max|B| = amplitude`.
fn random_em(g: &Grid64, seed: u64, amplitude: f64, kmax: usize) -> Result<EMState<f64>> {
    let d = random_field_on(g, seed, amplitude, kmax, true)?;
    let b = random_field_on(g, seed + 1, amplitude, kmax, true)?;
    EMState::new(g, d, b)
}

fn step_all<S: System<f64>>(
    sys: &S,
    cfg: &IntegratorConfig,
    g: &Grid64,
    mut x: S::State,
    mut dw: impl FnMut(u64) -> Vec<f64>,
    mut observe: impl FnMut(&S::State) -> Result<()>,
) -> Result<S::State> {
    let dx = g.spec().min_spacing();
    for step in 0..cfg.steps() {
        x = advance(sys, cfg, dx, &x, step, &dw(step))?;
        observe(&x)?;
    }
    Ok(x)
}

/// Least-squares slope of `log err` against `log dt`.
pub fn convergence_order(dts: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Sample mean and standard error of the mean.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Dyadic levels starting at the coarsest `dt` (rounded to a power of two).
fn dyadic_levels(opts: &VerifyOptions, coarsest: u32, count: u32) -> Vec<u32> {
    let first = opts
        .dt
        .map(|dt| (-dt.log2()).round().max(1.0) as u32)
        .unwrap_or(coarsest);
    (first..first + count).collect()
}

// 1. spectral operator identities

fn operators(opts: &VerifyOptions) -> Result<Outcome> {
    let g = grid(opts, 32)?;
    let n = g.spec().nx.min(g.spec().ny).min(g.spec().nz);
    let kmax = ((n - 1) / 3).clamp(1, n / 2 - 1);
    let f = random_field_on(&g, 1, 1.0, kmax, false)?;
    let div_curl = g.max_div(&g.curl(&f));
    let s = f.components()[0].clone();
    let curl_grad = g.curl(&g.grad(&s)).max_abs();
    // products of two fields at this band limit are resolved without truncation
    let kl = ((n - 1) / 6).max(1);
    let xi = random_field_on(&g, 2, 1.0, kl, true)?;
    let d = random_field_on(&g, 3, 1.0, kl, true)?;
    let lie = g.lie2form(&xi, &d)?;
    let lie_err = (&lie - &vector_field_bracket(&g, &xi, &d)).max_abs();
    let passed = div_curl < 1e-12 && curl_grad < 1e-12 && lie_err < 1e-10;
    Ok(Outcome::new(
        passed,
        format!(
            "{n}³: max|div curl F| = {div_curl:.2e}, max|curl grad f| = {curl_grad:.2e} (tol 1e-12), \
             max|lie2form − [ξ,D]| = {lie_err:.2e} (tol 1e-10)"
        ),
    ))
}

// 2. variational derivatives against finite differences

/// `∂(∫ℋ)/∂F_c(i) / ΔV` by centred differences of the perturbed sample's
/// density, the only one that changes.
fn fd_gradient(s: &EMState<f64>, perturb_d: bool, h: f64) -> VectorField64 {
    let spec = *s.d.spec();
    let mut out = VectorField64::zeros(spec);
    for c in 0..3 {
        for i in 0..spec.len() {
            let density = |sign: f64| {
                let mut v = [s.d.at(i), s.b.at(i)];
                v[usize::from(!perturb_d)][c] += sign * h;
                let single = EMState::new_unchecked(
                    VectorField64::constant(GridSpec::cube(1), v[0]),
                    VectorField64::constant(GridSpec::cube(1), v[1]),
                );
                bi_energy_density(&single).values()[0]
            };
            out.components_mut()[c].values_mut()[i] = (density(1.0) - density(-1.0)) / (2.0 * h);
        }
    }
    out
}

fn variational_derivatives(opts: &VerifyOptions) -> Result<Outcome> {
    let g = grid(opts, 8)?;
    let mut worst: f64 = 0.0;
    for seed in [1u64, 3, 5] {
        let s = random_em(&g, seed, 1.5, 2)?;
        let (e, h) = bi_variational_derivatives(&s);
        let re = (&fd_gradient(&s, true, 1e-6) - &e).max_abs() / e.max_abs();
        let rh = (&fd_gradient(&s, false, 1e-6) - &h).max_abs() / h.max_abs();
        worst = worst.max(re).max(rh);
    }
    Ok(Outcome::new(
        worst < 1e-6,
        format!(
            "{}³, 3 states: max relative |FD − (E,H)| = {worst:.2e} (tol 1e-6)",
            g.spec().nx
        ),
    ))
}

// 3. deterministic Born–Infeld conservation

fn energy_deterministic(opts: &VerifyOptions) -> Result<Outcome> {
    let g = grid(opts, 32)?;
    let dt = opts.dt.unwrap_or(1e-3);
    let sys = BiSystem::deterministic(g.clone(), Closure::BornInfeld);
    let x0 = random_em(&g, 1, 0.5, 2)?;
    fn view(x: &EMState<f64>) -> StateView<'_, f64> {
        StateView::Em(x, Closure::BornInfeld)
    }
    let e0 = total_energy(&g, view(&x0))?;
    let p0 = total_momentum(&g, view(&x0))?;
    let pscale = poynting(&x0).norm_sq().map(f64::sqrt).integrate();
    let cfg = IntegratorConfig::new(Scheme::Rk4, dt, 1.0);
    let (mut de, mut dp) = (0.0f64, 0.0f64);
    step_all(&sys, &cfg, &g, x0, |_| Vec::new(), |x| {
        de = de.max((total_energy(&g, view(x))? - e0).abs() / e0);
        dp = dp.max(norm3(sub3(total_momentum(&g, view(x))?, p0)) / pscale);
        Ok(())
    })?;
    Ok(Outcome::new(
        de < 1e-8 && dp < 1e-8,
        format!(
            "{}³, RK4 dt {dt:e}, t 1: max |Δ∫ℋ|/∫ℋ = {de:.2e}, max |Δ∫P|/∫|P| = {dp:.2e} (tol 1e-8)",
            g.spec().nx
        ),
    ))
}

// 4. stochastic energy on a fixed Brownian path

fn single_harmonic(g: &Grid64) -> Result<NoiseModel<f64>> {
    NoiseModel::from_modes(
        g,
        &[ModeSpec::Harmonic {
            k: [0, 1, 0],
            a: [1.0, 0.0, 0.0],
            phase: 0.0,
            amplitude: 0.5,
        }],
    )
}

fn stochastic_energy(opts: &VerifyOptions) -> Result<Outcome> {
    let g = grid(opts, 16)?;
    let sys = BiSystem::stratonovich(g.clone(), Closure::BornInfeld, single_harmonic(&g)?);
    let levels = dyadic_levels(opts, 6, 4);
    let x0 = random_em(&g, 1, 0.5, 2)?;
    let e0 = bi_energy_density(&x0).integrate();
    let paths = 4u64;
    let mut drifts = vec![0.0; levels.len()];
    for seed in 0..paths {
        let path = BrownianPath::levy(seed, 1, 1.0, *levels.last().expect("levels"));
        for (acc, &level) in drifts.iter_mut().zip(&levels) {
            let incs = path.increments(level);
            let cfg = IntegratorConfig::new(Scheme::Heun, 1.0 / incs.len() as f64, 1.0);
            let x = step_all(&sys, &cfg, &g, x0.clone(), |s| incs[s as usize].clone(), |_| Ok(()))?;
            *acc += (bi_energy_density(&x).integrate() - e0).abs() / e0 / paths as f64;
        }
    }
    let dts: Vec<f64> = levels.iter().map(|&l| 0.5f64.powi(l as i32)).collect();
    let order = convergence_order(&dts, &drifts);
    let list: Vec<String> = drifts.iter().map(|d| format!("{d:.2e}")).collect();
    Ok(Outcome::new(
        order >= 0.8,
        format!(
            "{}³, Heun, dt 2^-{}..2^-{}, {paths} paths: mean |Δ∫ℋ|/∫ℋ = [{}], order {order:.2} (need ≥ 0.8)",
            g.spec().nx,
            levels[0],
            levels[levels.len() - 1],
            list.join(", ")
        ),
    ))
}

// 5. momentum conservation only for constant noise

fn axis_modes(amplitude: f64, constant: bool) -> Vec<ModeSpec> {
    (0..3)
        .map(|a| {
            let mut dir = [0.0; 3];
            dir[(a + 1) % 3] = 1.0;
            if constant {
                ModeSpec::Constant { a: dir, amplitude }
            } else {
                let mut k = [0; 3];
                k[a] = 1;
                ModeSpec::Harmonic {
                    k,
                    a: dir,
                    phase: 0.0,
                    amplitude,
                }
            }
        })
        .collect()
}

fn momentum_drifts(
    g: &Grid64,
    modes: &[ModeSpec],
    members: usize,
    seed: u64,
    dt: f64,
    x0: &EMState<f64>,
) -> Result<Vec<f64>> {
    let sys = BiSystem::stratonovich(g.clone(), Closure::BornInfeld, NoiseModel::from_modes(g, modes)?);
    let cfg = IntegratorConfig::new(Scheme::Heun, dt, 0.5);
    let p0 = poynting(x0).integrate();
    let scale = poynting(x0).norm_sq().map(f64::sqrt).integrate();
    run_members(members, |m| {
        let drv = WienerDriver::new(seed, m as u64, modes.len());
        let x = step_all(&sys, &cfg, g, x0.clone(), |s| drv.increments(s, dt), |_| Ok(()))?;
        Ok(norm3(sub3(poynting(&x).integrate(), p0)) / scale)
    })
}

fn momentum_dichotomy(opts: &VerifyOptions) -> Result<Outcome> {
    let g = grid(opts, 16)?;
    let dt = opts.dt.unwrap_or(0.01);
    let x0 = random_em(&g, 31, 0.5, 2)?;
    let constant = momentum_drifts(&g, &axis_modes(0.5, true), 8, 5, dt, &x0)?;
    let harmonic = momentum_drifts(&g, &axis_modes(0.5, false), 64, 6, dt, &x0)?;
    let bound = constant.iter().copied().fold(0.0, f64::max);
    let rms = (harmonic.iter().map(|d| d * d).sum::<f64>() / harmonic.len() as f64).sqrt();
    Ok(Outcome::new(
        rms >= 10.0 * bound,
        format!(
            "{}³, Heun dt {dt}, t 0.5: constant-ξ bound max|Δ∫P|/∫|P| = {bound:.2e} (8 members), \
             harmonic-ξ RMS drift = {rms:.2e} (64 members), ratio {:.1e} (need ≥ 10)",
            g.spec().nx,
            rms / bound
        ),
    ))
}

// 6. Itô and Stratonovich ensembles agree in distribution

/// Cosine and sine projections of `F_{(a+1)%3}` on `k = e_a`, for `F = D, B`.
fn fourier_observables(x: &EMState<f64>) -> Vec<f64> {
    let spec = *x.d.spec();
    let mut out = Vec::with_capacity(12);
    for f in [&x.d, &x.b] {
        for a in 0..3 {
            let c = f.components()[(a + 1) % 3];
            let (mut cs, mut sn) = (0.0, 0.0);
            for (i, v) in c.values().iter().enumerate() {
                let phase = spec.coords::<f64>(i)[a];
                cs += v * phase.cos();
                sn += v * phase.sin();
            }
            let n = spec.len() as f64;
            out.push(2.0 * cs / n);
            out.push(2.0 * sn / n);
        }
    }
    out
}

fn ensemble_observables(
    sys: &BiSystem<f64>,
    scheme: Scheme,
    members: usize,
    seed: u64,
    dt: f64,
    x0: &EMState<f64>,
) -> Result<Vec<Vec<f64>>> {
    let cfg = IntegratorConfig::new(scheme, dt, 0.5);
    let modes = sys.noise_modes();
    run_members(members, |m| {
        let drv = WienerDriver::new(seed, m as u64, modes);
        let x = step_all(sys, &cfg, sys.grid(), x0.clone(), |s| drv.increments(s, dt), |_| Ok(()))?;
        Ok(fourier_observables(&x))
    })
}

fn ito_stratonovich(opts: &VerifyOptions) -> Result<Outcome> {
    let g = grid(opts, 16)?;
    let dt = opts.dt.unwrap_or(0.01);
    let members = 512;
    let noise = NoiseModel::from_modes(&g, &axis_modes(0.5, false))?;
    let x0 = random_em(&g, 41, 0.05, 1)?;
    let strat = BiSystem::stratonovich(g.clone(), Closure::BornInfeld, noise.clone());
    let ito = BiSystem::ito(g.clone(), Closure::BornInfeld, noise);
    let s = ensemble_observables(&strat, Scheme::Heun, members, 101, dt, &x0)?;
    let i = ensemble_observables(&ito, Scheme::EulerMaruyama, members, 202, dt, &x0)?;
    let mut worst: f64 = 0.0;
    for c in 0..s[0].len() {
        let col = |v: &[Vec<f64>]| v.iter().map(|r| r[c]).collect::<Vec<_>>();
        let (ms, ss) = mean_se(&col(&s));
        let (mi, si) = mean_se(&col(&i));
        worst = worst.max((ms - mi).abs() / (ss * ss + si * si).sqrt());
    }
    Ok(Outcome::new(
        worst <= 3.0,
        format!(
            "{}³, dt {dt}, t 0.5, {members}+{members} members, 12 Fourier observables: \
             max |Δmean|/se = {worst:.2} (need ≤ 3)",
            g.spec().nx
        ),
    ))
}

// 7. Itô Maxwell ensemble mean against the expectation equation

fn expectation(opts: &VerifyOptions) -> Result<Outcome> {
    let g = grid(opts, 16)?;
    let dt = opts.dt.unwrap_or(0.01);
    let t_end = 0.5;
    let members = 256;
    let noise = single_harmonic(&g)?;
    let x0 = random_em(&g, 51, 0.5, 1)?;
    let ito = BiSystem::ito(g.clone(), Closure::Maxwell, noise.clone());
    let cfg = IntegratorConfig::new(Scheme::EulerMaruyama, dt, t_end);
    let finals = run_members(members, |m| {
        let drv = WienerDriver::new(61, m as u64, 1);
        step_all(&ito, &cfg, &g, x0.clone(), |s| drv.increments(s, dt), |_| Ok(()))
    })?;
    let exp_sys = BiSystem::expectation(g.clone(), Closure::Maxwell, noise)?;
    let exp = step_all(&exp_sys, &IntegratorConfig::new(Scheme::Rk4, dt, t_end), &g, x0, |_| Vec::new(), |_| Ok(()))?;

    // pointwise mean and standard error over all six components
    let flat = |x: &EMState<f64>| -> Vec<f64> {
        x.d.components()
            .into_iter()
            .chain(x.b.components())
            .flat_map(|c| c.values().iter().copied())
            .collect()
    };
    let samples: Vec<Vec<f64>> = finals.iter().map(flat).collect();
    let target = flat(&exp);
    let dv = g.spec().cell_volume();
    let (mut dist2, mut se2) = (0.0, 0.0);
    for j in 0..target.len() {
        let col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
        let (m, se) = mean_se(&col);
        dist2 += (m - target[j]).powi(2) * dv;
        se2 += se * se * dv;
    }
    let (dist, se) = (dist2.sqrt(), se2.sqrt());

    // envelope of a plane wave under constant noise along its wave vector
    let sigma = 0.5;
    let t_env = 1.0;
    let env_noise = NoiseModel::from_modes(
        &g,
        &[ModeSpec::Constant {
            a: [1.0, 0.0, 0.0],
            amplitude: sigma,
        }],
    )?;
    let env_sys = BiSystem::expectation(g.clone(), Closure::Maxwell, env_noise)?;
    let (d, b) = plane_wave::<f64>(*g.spec(), 1.0, 0.0);
    let w0 = EMState::new(&g, d, b)?;
    let amp = |x: &EMState<f64>| {
        let o = fourier_observables(x);
        // D_y on k = (1,0,0)
        (o[0] * o[0] + o[1] * o[1]).sqrt()
    };
    let a0 = amp(&w0);
    let w = step_all(&env_sys, &IntegratorConfig::new(Scheme::Rk4, dt, t_env), &g, w0, |_| Vec::new(), |_| Ok(()))?;
    let ratio = amp(&w) / a0 / (-0.5 * sigma * sigma * t_env).exp();
    let env_ok = (ratio - 1.0).abs() <= 0.05;
    Ok(Outcome::new(
        dist <= 3.0 * se && env_ok,
        format!(
            "{}³, EM dt {dt}, t {t_end}, {members} members: ‖mean − expectation‖ = {dist:.3e}, \
             3·se = {:.3e}; plane-wave envelope / e^(−σ²t/2) = {ratio:.4} at t {t_env} (need within 5%)",
            g.spec().nx,
            3.0 * se
        ),
    ))
}

// 8. pure transport by constant noise

fn pure_transport(opts: &VerifyOptions) -> Result<Outcome> {
    let g = grid(opts, 16)?;
    let xi = [0.7, 0.4, 0.2];
    let noise = NoiseModel::from_modes(&g, &[ModeSpec::Constant { a: xi, amplitude: 1.0 }])?;
    let sys = BiSystem::transport(g.clone(), Closure::BornInfeld, noise);
    let x0 = random_em(&g, 71, 0.5, 2)?;
    let (id, ib) = (SpectralInterpolant::new(&g, &x0.d), SpectralInterpolant::new(&g, &x0.b));
    let levels = dyadic_levels(opts, 4, 5);
    let paths = 8u64;
    let spec = *g.spec();
    let mut errs = vec![0.0; levels.len()];
    for seed in 0..paths {
        let path = BrownianPath::levy(100 + seed, 1, 1.0, *levels.last().expect("levels"));
        let w = path.terminal()[0];
        let shifted = |f: &SpectralInterpolant<f64>| {
            VectorField64::from_fn(spec, |x, y, z| f.eval([x - xi[0] * w, y - xi[1] * w, z - xi[2] * w]))
        };
        let (dx, bx) = (shifted(&id), shifted(&ib));
        for (acc, &level) in errs.iter_mut().zip(&levels) {
            let incs = path.increments(level);
            let cfg = IntegratorConfig::new(Scheme::Heun, 1.0 / incs.len() as f64, 1.0);
            let x = step_all(&sys, &cfg, &g, x0.clone(), |s| incs[s as usize].clone(), |_| Ok(()))?;
            let e2 = (&x.d - &dx).l2_norm().powi(2) + (&x.b - &bx).l2_norm().powi(2);
            *acc += e2.sqrt() / paths as f64;
        }
    }
    let dts: Vec<f64> = levels.iter().map(|&l| 0.5f64.powi(l as i32)).collect();
    let order = convergence_order(&dts, &errs);
    let list: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
    Ok(Outcome::new(
        (order - 1.0).abs() <= 0.25,
        format!(
            "{}³, ξ = {xi:?}, Heun dt 2^-{}..2^-{}, {paths} paths: mean L² error = [{}], order {order:.2} (need 1 ± 0.25)",
            spec.nx,
            levels[0],
            levels[levels.len() - 1],
            list.join(", ")
        ),
    ))
}

// 9. high-field MHD limit

fn mhd(opts: &VerifyOptions) -> Result<Outcome> {
    let g = grid(opts, 32)?;
    let dt = opts.dt.unwrap_or(0.01);
    let (p, b) = mhd_orthogonal::<f64>(*g.spec(), 7, 0.2, 1)?;
    let x0 = MhdState::new(p, b);
    let sys = MhdSystem::new(g.clone(), NoiseModel::empty());
    let hel0 = magnetic_helicity(&g, &x0.b)?;
    let h0 = mhd_energy_density(&x0, H_FLOOR)?.integrate();
    let cfg = IntegratorConfig::new(Scheme::Rk4, dt, 0.5);
    let (mut dhel, mut dh, mut pb) = (0.0f64, 0.0f64, pb_orthogonality(&x0, H_FLOOR)?);
    step_all(&sys, &cfg, &g, x0, |_| Vec::new(), |x| {
        dhel = dhel.max((magnetic_helicity(&g, &x.b)? - hel0).abs() / hel0.abs());
        dh = dh.max((mhd_energy_density(x, H_FLOOR)?.integrate() - h0).abs() / h0);
        pb = pb.max(pb_orthogonality(x, H_FLOOR)?);
        Ok(())
    })?;
    Ok(Outcome::new(
        dhel < 1e-6 && pb < 1e-6 && dh < 1e-8,
        format!(
            "{}³, RK4 dt {dt}, t 0.5: helicity drift {dhel:.2e} (tol 1e-6), max|P·B|/h = {pb:.2e} (tol 1e-6), \
             ∫h drift {dh:.2e} (tol 1e-8)",
            g.spec().nx
        ),
    ))
}

// 10. Hamiltonian-structure identities

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn hamiltonian_structure(opts: &VerifyOptions) -> Result<Outcome> {
    let g = grid(opts, 16)?;
    let a = random_field_on(&g, 1, 1.0, 4, false)?;
    let d = random_field_on(&g, 2, 1.0, 4, true)?;
    let xi = random_field_on(&g, 3, 1.0, 3, true)?;
    let (l, r) = momentum_map_pairing(&g, &a, &d, &xi)?;
    let pairing = relative_gap(l, r);

    let d = random_field_on(&g, 4, 1.0, 3, true)?;
    let a = random_field_on(&g, 5, 1.0, 3, false)?;
    let xi = random_field_on(&g, 6, 1.0, 2, true)?;
    let eta = random_field_on(&g, 7, 1.0, 2, true)?;
    let (l, r) = lp_bracket_check(&g, &d, &a, &xi, &eta)?;
    let lp = relative_gap(l, r);

    let n_km = opts.grid.unwrap_or(32);
    let gk = Grid64::new(GridSpec::cube(n_km))?;
    let km = km_bracket_residual(&gk, &random_em(&gk, 11, 0.5, 2)?);
    Ok(Outcome::new(
        pairing < 1e-8 && lp < 1e-8 && km < 1e-6,
        format!(
            "{}³: momentum-map pairing gap {pairing:.2e}, LP bracket gap {lp:.2e} (tol 1e-8); \
             {n_km}³: KM residual {km:.2e} (tol 1e-6)",
            g.spec().nx
        ),
    ))
}

// 11. Kelvin circulation of a tracked loop

fn kelvin(opts: &VerifyOptions) -> Result<Outcome> {
    let g = grid(opts, 32)?;
    let dt0 = opts.dt.unwrap_or(0.08);
    let x0 = random_em(&g, 21, 0.3, 1)?;
    let mut res = Vec::new();
    for level in 0..3 {
        let dt = dt0 / f64::from(1u32 << level);
        let points = 16usize << level;
        let lp = TracerLoop::circle([3.0, 3.0, 3.0], 0.8, 0, points)?;
        let sys = KelvinSystem::new(BiSystem::deterministic(g.clone(), Closure::BornInfeld), vec![points])
            .with_quadrature(LoopQuadrature::Spectral);
        let k0 = sys.start(x0.clone(), &[lp])?;
        let cfg = IntegratorConfig::new(Scheme::Rk4, dt, 0.5);
        let k = step_all(&sys, &cfg, &g, k0.clone(), |_| Vec::new(), |_| Ok(()))?;
        res.push(sys.residuals(&k0, &k)?[0].abs());
    }
    let ratios: Vec<f64> = res.windows(2).map(|w| w[0] / w[1]).collect();
    let passed = ratios.iter().all(|&r| r >= 4.0);
    let fmt = |v: &[f64], p: usize| v.iter().map(|x| format!("{x:.p$e}")).collect::<Vec<_>>().join(", ");
    Ok(Outcome::new(
        passed,
        format!(
            "{}³, RK4, (dt, points) from ({dt0}, 16) halved/doubled twice, t 0.5: |residual| = [{}], \
             decrease factors [{}] (need ≥ 4)",
            g.spec().nx,
            fmt(&res, 2),
            ratios.iter().map(|r| format!("{r:.1}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}
