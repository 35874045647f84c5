//! Acceptance gate. Each test prints one `PASS`/`FAIL` line to stderr and
//! then asserts.

use std::io::Write;
use std::time::Instant;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rav_core::dispersion::{self, LinearizationParams};
use rav_core::exec::{self, Execution};
use rav_core::fields::{self, Boundary, ClassicalTarget, EvolveOptions, Field1D, GaussianBump, Grid1D, SineWaves};
use rav_core::jump::{hugoniot_solve, lax_classify, shock_speed_pair};
use rav_core::kinematics::make_state;
use rav_core::profile::{self, integrate_profile};
use rav_core::{EquationOfState, Error, FluidState, HugoniotBranch, ShockData, ShockFamily};

fn report(n: usize, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{verdict} criterion {n}: {detail}");
}

// Shared samples.

fn random_eos(rng: &mut ChaCha8Rng, polytropic: bool) -> EquationOfState {
    if polytropic {
        let gamma = [4.0 / 3.0, 5.0 / 3.0, 2.0][rng.random_range(0..3)];
        EquationOfState::polytropic(0.1, gamma).unwrap()
    } else {
        EquationOfState::isothermal(rng.random_range(0.2..0.8)).unwrap()
    }
}

/// `n` Lax-admissible shocks over both EOS kinds and both families.
fn admissible_shocks(n: usize) -> Vec<(EquationOfState, ShockData)> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let eos = random_eos(&mut rng, out.len() % 2 == 1);
        let left = make_state(rng.random_range(0.5..2.0), rng.random_range(-0.8..0.8)).unwrap();
        let u_r = left.u() - rng.random_range(0.05..0.6);
        let branch = if rng.random_bool(0.5) { HugoniotBranch::One } else { HugoniotBranch::Two };
        if let Ok(sh) = hugoniot_solve(&eos, &left, u_r, branch) {
            if sh.family.is_admissible() {
                out.push((eos, sh));
            }
        }
    }
    out
}

fn reference_shock() -> (EquationOfState, ShockData) {
    let eos = EquationOfState::isothermal(0.5).unwrap();
    let left = make_state(1.0, 0.8).unwrap();
    let sh = hugoniot_solve(&eos, &left, 0.3, HugoniotBranch::One).unwrap();
    (eos, sh)
}

// 1. Decay of every Fourier mode.

#[test]
fn criterion_01_dispersion_decay_sweep() {
    const N: u32 = 10_000;
    let samples: Vec<(f64, f64, f64)> = (0..N)
        .map(|i| {
            let s = |d| sobol_burley::sample(i, d, 17) as f64;
            (10f64.powf(-1.0 + 3.0 * s(0)), 0.01 + 0.98 * s(1), 10f64.powf(-2.0 + 4.0 * s(2)))
        })
        .collect();
    let start = Instant::now();
    let spectra: Vec<_> = samples
        .iter()
        .map(|&(kt, sigma, xi)| {
            let p = LinearizationParams::from_reduced(kt, sigma).unwrap();
            (p, dispersion::dispersion_roots(&p, xi))
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let mut max_re = f64::NEG_INFINITY;
    let mut max_resid: f64 = 0.0;
    for (p, sp) in &spectra {
        max_re = max_re.max(sp.max_real_part);
        for z in &sp.cubic_roots {
            max_resid = max_resid.max(dispersion::relative_residual(&p.cubic(sp.xi), *z));
        }
        for z in &sp.quadratic_roots {
            max_resid = max_resid.max(dispersion::relative_residual(&p.quadratic(sp.xi), *z));
        }
    }
    let pass = max_re < 0.0 && max_resid <= 1e-8 && elapsed <= 10.0;
    report(
        1,
        pass,
        &format!("{N} samples, max Re(lambda) = {max_re:.3e}, max relative residual = {max_resid:.3e}, {elapsed:.2} s sequential"),
    );
    assert!(pass);
}

// 2. Full determinant vanishes exactly at the returned roots.

fn hadamard_scale(m: &Matrix4<Complex64>) -> f64 {
    (0..4)
        .map(|r| (0..4).map(|c| m[(r, c)].norm_sqr()).sum::<f64>().sqrt())
        .product()
}

#[test]
fn criterion_02_block_determinant_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    let (mut worst_root, mut least_off) = (0.0f64, f64::INFINITY);
    for k in 0..100 {
        let params = LinearizationParams::new(
            rng.random_range(0.1..10.0),
            rng.random_range(0.05..0.95),
            rng.random_range(0.1..2.0),
        )
        .unwrap();
        let xi3 = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let sp = dispersion::dispersion_roots(&params, dispersion::reduce_wavevector(xi3));
        let roots: Vec<Complex64> = sp.roots().collect();
        let lambda = if k % 2 == 0 {
            roots[rng.random_range(0..roots.len())]
        } else {
            Complex64::new(rng.random_range(-5.0..1.0), rng.random_range(-5.0..5.0))
        };
        let m = dispersion::linearized_matrix(&params, lambda, xi3);
        let ratio = m.determinant().norm() / hadamard_scale(&m);
        let near = roots.iter().any(|r| (r - lambda).norm() <= 1e-8 * r.norm().max(1.0));
        let small = ratio <= 1e-8;
        if near != small {
            mismatches += 1;
        }
        if near {
            worst_root = worst_root.max(ratio);
        } else {
            least_off = least_off.min(ratio);
        }
    }
    let pass = mismatches == 0;
    report(
        2,
        pass,
        &format!("100 pairs, {mismatches} mismatches; |det|/scale <= {worst_root:.3e} at roots, >= {least_off:.3e} elsewhere"),
    );
    assert!(pass);
}

// 3. Rankine-Hugoniot solver against a brute-force scan.

fn oracle_tensor(eos: &EquationOfState, rho: f64, u: f64) -> [f64; 3] {
    let p = eos.pressure(rho).unwrap();
    let u0 = (1.0 + u * u).sqrt();
    [(p + rho) * u0 * u0 - p, (p + rho) * u0 * u, (p + rho) * u * u + p]
}

/// `[T00][T11] − [T01]²`, zero exactly on the Hugoniot locus.
fn locus(eos: &EquationOfState, tl: [f64; 3], rho: f64, u_r: f64) -> f64 {
    let tr = oracle_tensor(eos, rho, u_r);
    let j = [tl[0] - tr[0], tl[1] - tr[1], tl[2] - tr[2]];
    j[0] * j[2] - j[1] * j[1]
}

/// Right density on the requested branch: coarse log scan, then a
/// 1e-6-step scan of the bracketing cell, then linear interpolation.
fn oracle_hugoniot(eos: &EquationOfState, left: &FluidState, u_r: f64, branch: HugoniotBranch) -> Option<(f64, f64)> {
    let tl = oracle_tensor(eos, left.rho(), left.u());
    let (lo, hi) = eos.interval();
    let (lo, hi) = (lo.max(1e-6), hi.min(1e3));
    let n = 4000;
    let coarse: Vec<f64> = (0..=n).map(|k| lo * (hi / lo).powf(k as f64 / n as f64)).collect();
    let coarse: Vec<f64> = coarse.into_iter().filter(|r| eos.contains(*r)).collect();
    let mut best: Option<f64> = None;
    for w in coarse.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (locus(eos, tl, a, u_r), locus(eos, tl, b, u_r));
        if fa.signum() == fb.signum() {
            continue;
        }
        let steps = ((b - a) / 1e-6).ceil() as usize;
        let mut x0 = a;
        let mut f0 = fa;
        let mut root = None;
        for k in 1..=steps {
            let x1 = if k == steps { b } else { a + k as f64 * 1e-6 };
            let f1 = locus(eos, tl, x1, u_r);
            if f0 == 0.0 {
                root = Some(x0);
                break;
            }
            if f0.signum() != f1.signum() {
                root = Some(x0 - f0 * (x1 - x0) / (f1 - f0));
                break;
            }
            x0 = x1;
            f0 = f1;
        }
        let Some(r) = root else { continue };
        let orient = (r - left.rho()) * (u_r - left.u());
        let on_branch = match branch {
            HugoniotBranch::One => orient < 0.0,
            HugoniotBranch::Two => orient > 0.0,
        };
        if on_branch && best.is_none_or(|b0| (r - left.rho()).abs() < (b0 - left.rho()).abs()) {
            best = Some(r);
        }
    }
    best.map(|r| {
        let tr = oracle_tensor(eos, r, u_r);
        (r, (tl[1] - tr[1]) / (tl[0] - tr[0]))
    })
}

#[test]
fn criterion_03_rankine_hugoniot() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cases = Vec::new();
    while cases.len() < 200 {
        let polytropic = cases.len() >= 100;
        let eos = random_eos(&mut rng, polytropic);
        let left = make_state(rng.random_range(0.5..2.0), rng.random_range(-0.8..0.8)).unwrap();
        let mut du: f64 = rng.random_range(0.05..0.8);
        if rng.random_bool(0.5) {
            du = -du;
        }
        let branch = if cases.len() % 2 == 0 { HugoniotBranch::One } else { HugoniotBranch::Two };
        cases.push((eos, left, left.u() + du, branch));
    }
    let results = exec::map_slice(Execution::Parallel, &cases, |(eos, left, u_r, branch)| {
        (hugoniot_solve(eos, left, *u_r, *branch), oracle_hugoniot(eos, left, *u_r, *branch))
    });
    let (mut solved, mut disagreements) = (0, 0);
    let (mut max_resid, mut max_pair, mut max_oracle) = (0.0f64, 0.0f64, 0.0f64);
    for ((eos, left, _, _), (sol, oracle)) in cases.iter().zip(&results) {
        match (sol, oracle) {
            (Ok(sh), Some((rho, s))) => {
                solved += 1;
                max_resid = max_resid.max(sh.residual_norm());
                let (s1, s2) = shock_speed_pair(eos, left, &sh.right).unwrap();
                max_pair = max_pair.max((s1 - s2).abs());
                max_oracle = max_oracle.max((sh.right.rho() - rho).abs()).max((sh.s - s).abs());
            }
            (Err(Error::NoBracket { .. }), None) => {}
            _ => disagreements += 1,
        }
    }
    let pass = disagreements == 0 && solved >= 150 && max_resid <= 1e-10 && max_pair <= 1e-10 && max_oracle <= 1e-5;
    report(
        3,
        pass,
        &format!(
            "{solved}/200 points solved, {disagreements} existence disagreements; residual {max_resid:.3e}, speed pair {max_pair:.3e}, oracle {max_oracle:.3e}"
        ),
    );
    assert!(pass);
}

// 4. Profiles exist exactly for admissible shocks.

#[test]
fn criterion_04_profile_existence_both_directions() {
    let shocks = admissible_shocks(100);
    let results = exec::map_slice(Execution::Parallel, &shocks, |(eos, sh)| {
        let prof = integrate_profile(eos, sh, 1.0, 1e-8);
        let rev = sh.reversed(eos).unwrap();
        let refused = integrate_profile(eos, &rev, 1.0, 1e-8);
        let lax = lax_classify(eos, &rev.left, &rev.right, rev.s).unwrap();
        let zeros = profile::rest_points(eos, sh, 10_000).unwrap();
        (prof, refused, lax, zeros.len())
    });
    let mut bad = Vec::new();
    let mut max_err: f64 = 0.0;
    for (k, (prof, refused, lax, zeros)) in results.iter().enumerate() {
        let ok_fwd = match prof {
            Ok(p) => {
                let e = p.endpoint_errors[0].max(p.endpoint_errors[1]);
                max_err = max_err.max(e);
                e <= 1e-6 && p.is_strictly_monotone()
            }
            Err(_) => false,
        };
        let ok_rev = matches!(refused, Err(Error::NotAdmissible)) && *lax == ShockFamily::Inadmissible;
        if !(ok_fwd && ok_rev && *zeros == 2) {
            bad.push(k);
        }
    }
    let pass = bad.is_empty();
    report(
        4,
        pass,
        &format!("100 shocks, max endpoint error {max_err:.3e}, failing cases {bad:?}"),
    );
    assert!(pass);
}

// 5. Endpoint slopes of the profile vector field.

#[test]
fn criterion_05_phi_prime_formula() {
    let shocks = admissible_shocks(100);
    let mut worst: f64 = 0.0;
    let mut sign_ok = true;
    for (eos, sh) in &shocks {
        let analytic = profile::rest_frame_phi_primes(eos, sh).unwrap();
        let mut rest = profile::boost_shock(eos, sh, sh.s).unwrap();
        rest.s = 0.0;
        let h = 1e-4 * (rest.left.u() - rest.right.u()).abs();
        for (i, u) in [rest.left.u(), rest.right.u()].into_iter().enumerate() {
            let fd = (profile::phi(eos, &rest, u + h).unwrap() - profile::phi(eos, &rest, u - h).unwrap()) / (2.0 * h);
            worst = worst.max((fd - analytic[i]).abs() / analytic[i].abs());
        }
        sign_ok &= analytic[1] < 0.0 && 0.0 < analytic[0];
        let rev = sh.reversed(eos).unwrap();
        let r = profile::rest_frame_phi_primes(eos, &rev).unwrap();
        sign_ok &= !(r[1] < 0.0 && 0.0 < r[0]);
    }
    let pass = worst <= 1e-6 && sign_ok;
    report(
        5,
        pass,
        &format!("100 shocks, max relative FD mismatch {worst:.3e}, sign pattern holds exactly on admissible orientation: {sign_ok}"),
    );
    assert!(pass);
}

// 6. Lorentz invariance.

#[test]
fn criterion_06_boost_invariance() {
    let shocks = admissible_shocks(100);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let jobs: Vec<(usize, f64)> = (0..shocks.len())
        .flat_map(|k| (0..10).map(move |_| k))
        .map(|k| (k, rng.random_range(-0.9..0.9)))
        .collect();
    let outcomes = exec::map_slice(Execution::Parallel, &jobs, |&(k, beta)| {
        let (eos, sh) = &shocks[k];
        let b = profile::boost_shock(eos, sh, beta)?;
        let prof = integrate_profile(eos, &b, 1.0, 1e-8);
        Ok::<_, Error>((b.family == sh.family, prof.is_ok(), b.residual_norm()))
    });
    let mut failures = 0;
    let mut max_resid: f64 = 0.0;
    for o in &outcomes {
        match o {
            Ok((fam, exists, r)) => {
                max_resid = max_resid.max(*r);
                if !(*fam && *exists && *r <= 1e-10) {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }

    let eos = EquationOfState::isothermal(0.5).unwrap();
    let bump = GaussianBump::default();
    let levels = [1.0 / 100.0, 1.0 / 200.0, 1.0 / 400.0];
    let betas: Vec<f64> = (0..5).map(|_| rng.random_range(-0.9..0.9)).collect();
    let orders: Vec<f64> = betas
        .iter()
        .map(|&b| fields::covariance_check(&eos, &bump, b, 0.5, &levels, (-1.0, 1.0)).unwrap().observed_order)
        .collect();
    let orders_ok = orders.iter().all(|p| (p - 2.0).abs() <= 0.3);
    let pass = failures == 0 && orders_ok;
    report(
        6,
        pass,
        &format!(
            "{} boosts, {failures} invariance failures, max boosted residual {max_resid:.3e}; covariance orders {:?}",
            jobs.len(),
            orders.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>()
        ),
    );
    assert!(pass);
}

// 7. Classical limit.

#[test]
fn criterion_07_classical_limit() {
    let eos = EquationOfState::isothermal(0.5).unwrap();
    let waves = SineWaves::default();
    let cs = [10.0, 100.0, 1000.0];
    let period = std::f64::consts::TAU / waves.k;
    let points: Vec<(f64, f64)> = (0..64).map(|i| (0.3, period * i as f64 / 64.0)).collect();
    let stated = fields::classical_limit_check(&eos, &waves, 0.5, &cs, &points, ClassicalTarget::AsStated).unwrap();
    let inviscid_mass =
        fields::classical_limit_check(&eos, &waves, 0.5, &cs, &points, ClassicalTarget::MassConserving).unwrap();
    let pass = stated.observed_order >= 1.0;
    report(
        7,
        pass,
        &format!(
            "order {:.3} (errors {:?}); with an inviscid mass equation the order is {:.3} (errors {:?})",
            stated.observed_order,
            stated.errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>(),
            inviscid_mass.observed_order,
            inviscid_mass.errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>(),
        ),
    );
    assert!(pass);
}

// 8 and 9. Evolver runs.

struct EvolverRuns {
    drift: f64,
    constant_change: f64,
    det_deviations: Vec<(&'static str, f64)>,
}

fn max_change(a: &Field1D, b: &Field1D) -> f64 {
    a.rho
        .iter()
        .zip(&b.rho)
        .chain(a.u.iter().zip(&b.u))
        .chain(a.w.iter().zip(&b.w))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn evolver_runs() -> EvolverRuns {
    let mut det = Vec::new();
    let (eos, sh) = reference_shock();
    let prof = integrate_profile(&eos, &sh, 0.1, 1e-10).unwrap();
    let range = (-6.0, 4.0);
    let n = 800;
    let h = (range.1 - range.0) / (n - 1) as f64;
    let steady = fields::profile_steadiness(&eos, &prof, range, n, 0.4 * h, 1.0, Execution::Parallel).unwrap();
    det.push(("profile", steady.max_det_deviation));

    let mut constant_change: f64 = 0.0;
    let state = make_state(1.3, -0.4).unwrap();
    for boundary in [Boundary::Periodic, Boundary::Dirichlet { left: state, right: state }] {
        let grid = Grid1D::new(-1.0, 1.0, 200, boundary).unwrap();
        let start = Field1D::constant(grid, state).unwrap();
        let opts = EvolveOptions {
            epsilon: 0.1,
            dt: 0.4 * grid.h(),
            t_end: 1.0,
            exec: Execution::Parallel,
            snapshot_every: 0,
        };
        let rep = fields::evolve_with(&eos, &start, &opts, &mut |_| {}).unwrap();
        constant_change = constant_change.max(max_change(&start, &rep.field));
        det.push(("constant", rep.max_det_deviation));
    }

    let poly = EquationOfState::polytropic(0.1, 5.0 / 3.0).unwrap();
    let grid = Grid1D::periodic(0.0, std::f64::consts::TAU, 128).unwrap();
    let start = Field1D::from_fn(grid, 0.0, |x| (1.0 + 1e-3 * x.sin(), 0.2 + 1e-3 * (2.0 * x).cos(), 0.0)).unwrap();
    for (eos, eps) in [(&eos, 0.1), (&poly, 1.0)] {
        let opts = EvolveOptions {
            epsilon: eps,
            dt: 0.4 * grid.h(),
            t_end: 5.0,
            exec: Execution::Parallel,
            snapshot_every: 0,
        };
        let rep = fields::evolve_with(eos, &start, &opts, &mut |_| {}).unwrap();
        det.push(("perturbation", rep.max_det_deviation));
    }

    let left = make_state(1.0, 0.3).unwrap();
    let psh = hugoniot_solve(&poly, &left, -0.1, HugoniotBranch::One).unwrap();
    let pprof = integrate_profile(&poly, &psh, 0.2, 1e-10).unwrap();
    let run = fields::profile_steadiness(&poly, &pprof, (-8.0, 8.0), 400, 0.01, 0.5, Execution::Sequential).unwrap();
    det.push(("polytropic profile", run.max_det_deviation));

    EvolverRuns {
        drift: steady.drift,
        constant_change,
        det_deviations: det,
    }
}

#[test]
fn criterion_08_profile_steadiness() {
    let runs = evolver_runs();
    let pass = runs.drift <= 0.02 && runs.constant_change <= 1e-12;
    report(
        8,
        pass,
        &format!(
            "n = 800, eps = 0.1, T = 1: drift {:.3e}; constant states change by {:.3e}",
            runs.drift, runs.constant_change
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_determinant_identity() {
    let runs = evolver_runs();
    let worst = runs.det_deviations.iter().map(|d| d.1).fold(0.0, f64::max);
    let pass = worst <= 1e-12;
    report(
        9,
        pass,
        &format!("{} runs, max |det/eps - 1| = {worst:.3e}", runs.det_deviations.len()),
    );
    assert!(pass);
}

// 10. CLI determinism.

#[test]
fn criterion_10_cli_determinism() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let configs = [
        (
            "dispersion",
            r#"{"kappa_tilde":0.7,"sigma":0.4,"sweep":{"min":0.01,"max":100,"n":200,"spacing":"random"}}"#,
        ),
        (
            "hugoniot",
            r#"{"eos":{"kind":"polytropic","K":0.1,"gamma":2.0},"left":{"rho":1.0,"u":0.5},"sweep":{"min":-0.3,"max":0.45,"n":50,"spacing":"linear"}}"#,
        ),
        (
            "profile",
            r#"{"eos":{"kind":"isothermal","sigma":0.5},"left":{"rho":1.0,"u":0.8},"u_r":0.3,"epsilon":1.0}"#,
        ),
        (
            "evolve",
            r#"{"eos":{"kind":"isothermal","sigma":0.5},"epsilon":0.1,"grid":{"x_min":0,"x_max":6.2,"n":64,"boundary":"periodic"},"t_end":0.5,"initial":{"kind":"perturbation","rho":1.0,"u":0.0,"amplitude":0.01,"modes":3},"snapshot_every":5}"#,
        ),
    ];
    let runs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    let mut differing = Vec::new();
    for (name, body) in configs {
        let cfg = cfg_dir.path().join(format!("{name}.json"));
        std::fs::write(&cfg, body).unwrap();
        let mut bytes = Vec::new();
        for dir in &runs {
            let prefix = dir.path().join(name);
            let code = rav_cli::run([
                "rav",
                name,
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                prefix.to_str().unwrap(),
                "--seed",
                "11",
            ]);
            assert_eq!(code, 0, "{name} run failed");
            bytes.push(std::fs::read(format!("{}.csv", prefix.display())).unwrap());
        }
        if bytes[0] != bytes[1] || bytes[0].is_empty() {
            differing.push(name);
        }
    }
    let pass = differing.is_empty();
    report(
        10,
        pass,
        &format!("4 subcommands run twice with seed 11, differing CSVs: {differing:?}"),
    );
    assert!(pass);
}
