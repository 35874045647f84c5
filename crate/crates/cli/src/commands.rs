//! Subcommand bodies. Each returns the result entries of its summary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use rav_core::dispersion::{self, CertificateVariant};
use rav_core::fields::{self, Boundary, ClassicalTarget, EvolveOptions, Field1D, GaussianBump, Grid1D, SineWaves, CFL};
use rav_core::jump::hugoniot_solve;
use rav_core::profile::{integrate_profile, ShockProfile};
use rav_core::{exec, EquationOfState};

use crate::config::*;
use crate::output::{artifact, CsvSink};
use crate::{Context, Failure};

type Outcome = Result<Map<String, Value>, Failure>;

/// Tolerance on `|det A / ε − 1|` for the pointwise rate systems.
pub const DET_TOL: f64 = 1e-12;

/// Tolerance on the profile endpoint errors.
pub const ENDPOINT_TOL: f64 = 1e-6;

pub fn execute(config: &RunConfig, ctx: &Context) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    match config {
        RunConfig::Dispersion(c) => dispersion_run(c, ctx, &mut rng),
        RunConfig::Hugoniot(c) => hugoniot_run(c, ctx, &mut rng),
        RunConfig::Profile(c) => profile_run(c, ctx),
        RunConfig::Evolve(c) => evolve_run(c, ctx, &mut rng),
        RunConfig::Verify(c) => match c.check {
            Some(VerifyCheck::Covariance) => covariance_run(c, ctx, &mut rng),
            Some(VerifyCheck::ClassicalLimit) => classical_run(c, ctx),
            None => Err(ConfigError::new("check", "missing; pass covariance or classical-limit").into()),
        },
    }
}

/// Finish the sink whatever happened, then surface the first failure.
fn with_sink<T>(sink: CsvSink, body: impl FnOnce(&mut CsvSink) -> Result<T, Failure>) -> Result<(T, usize), Failure> {
    let mut sink = sink;
    let res = body(&mut sink);
    let rows = sink.finish()?;
    Ok((res?, rows))
}

fn dispersion_run(c: &DispersionConfig, ctx: &Context, rng: &mut ChaCha8Rng) -> Outcome {
    let params = c.params()?;
    let xis = c.wave_numbers(rng)?;
    let spectra = dispersion::dispersion_sweep(ctx.exec, &params, &xis);

    let mut header = vec!["xi".to_string()];
    header.extend((1..=5).map(|k| format!("re_lambda_{k}")));
    header.extend((1..=5).map(|k| format!("im_lambda_{k}")));
    header.push("max_re".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let path = artifact(&ctx.prefix, ".csv");
    let sink = CsvSink::create(&path, &header)?;

    let ((), rows) = with_sink(sink, |sink| {
        for sp in &spectra {
            let roots: Vec<_> = sp.roots().collect();
            let mut cells = vec![sp.xi.into()];
            cells.extend(roots.iter().map(|z| z.re.into()));
            cells.extend(roots.iter().map(|z| z.im.into()));
            cells.push(sp.max_real_part.into());
            sink.row(&cells)?;
        }
        Ok(())
    })?;

    let mut max_re = f64::NEG_INFINITY;
    let mut max_resid: f64 = 0.0;
    for sp in &spectra {
        max_re = max_re.max(sp.max_real_part);
        let cubic = params.cubic(sp.xi);
        let quad = params.quadratic(sp.xi);
        for z in &sp.cubic_roots {
            max_resid = max_resid.max(dispersion::relative_residual(&cubic, *z));
        }
        for z in &sp.quadratic_roots {
            max_resid = max_resid.max(dispersion::relative_residual(&quad, *z));
        }
    }
    let positive = |variant| {
        xis.iter()
            .filter(|&&x| x > 0.0)
            .all(|&x| dispersion::decay_certificate_coeffs(&params, x, variant).all_positive())
    };

    let mut m = Map::new();
    m.insert("csv".into(), json!(path.display().to_string()));
    m.insert("rows".into(), json!(rows));
    m.insert("kappa_tilde".into(), json!(params.kappa_tilde()));
    m.insert("sigma".into(), json!(params.sigma));
    m.insert("max_re".into(), json!(max_re));
    m.insert("max_relative_residual".into(), json!(max_resid));
    m.insert("all_decaying".into(), json!(spectra.iter().all(|sp| sp.max_real_part < 0.0)));
    m.insert(
        "certificate_positive".into(),
        json!({
            "sigma_squared": positive(CertificateVariant::SigmaSquared),
            "sigma_linear": positive(CertificateVariant::SigmaLinear),
        }),
    );
    Ok(m)
}

fn hugoniot_run(c: &HugoniotConfig, ctx: &Context, rng: &mut ChaCha8Rng) -> Outcome {
    let eos = validate_eos(&c.eos)?;
    let left = validate_state(&eos, &c.left, "left")?;
    let velocities = c.velocities(rng)?;
    let results = exec::map_slice(ctx.exec, &velocities, |&u_r| hugoniot_solve(&eos, &left, u_r, c.branch));

    let path = artifact(&ctx.prefix, ".csv");
    let sink = CsvSink::create(&path, &["u_R", "rho_R", "s", "family", "r0", "r1"])?;
    let ((max_resid, admissible), rows) = with_sink(sink, |sink| {
        let mut max_resid: f64 = 0.0;
        let mut admissible = 0usize;
        for r in &results {
            let sh = r.as_ref().map_err(|e| Failure::Domain(e.clone()))?;
            sink.row(&[
                sh.right.u().into(),
                sh.right.rho().into(),
                sh.s.into(),
                sh.family.as_str().into(),
                sh.rh_residual[0].into(),
                sh.rh_residual[1].into(),
            ])?;
            max_resid = max_resid.max(sh.residual_norm());
            admissible += sh.family.is_admissible() as usize;
        }
        Ok((max_resid, admissible))
    })?;

    let mut m = Map::new();
    m.insert("csv".into(), json!(path.display().to_string()));
    m.insert("rows".into(), json!(rows));
    m.insert("max_rh_residual".into(), json!(max_resid));
    m.insert("admissible".into(), json!(admissible));
    Ok(m)
}

#[allow(clippy::too_many_arguments)]
fn solve_profile(
    eos: &EquationOfState,
    left: &rav_core::kinematics::StateSpec,
    u_r: f64,
    branch: rav_core::HugoniotBranch,
    reverse: bool,
    epsilon: f64,
    tol: Option<f64>,
    field: &str,
) -> Result<ShockProfile, Failure> {
    let left = validate_state(eos, left, field)?;
    let tol = tol.unwrap_or(DEFAULT_PROFILE_TOL);
    if !(tol > 0.0 && tol < 1.0) {
        return Err(ConfigError::new("tol", format!("must lie in (0, 1), got {tol}")).into());
    }
    let mut shock = hugoniot_solve(eos, &left, u_r, branch)?;
    if reverse {
        shock = shock.reversed(eos)?;
    }
    Ok(integrate_profile(eos, &shock, epsilon, tol)?)
}

fn profile_run(c: &ProfileConfig, ctx: &Context) -> Outcome {
    let eos = validate_eos(&c.eos)?;
    if !(c.epsilon > 0.0 && c.epsilon.is_finite()) {
        return Err(ConfigError::new("epsilon", "must be finite and > 0").into());
    }
    let prof = solve_profile(&eos, &c.left, c.u_r, c.branch, c.reverse, c.epsilon, c.tol, "left")?;

    let path = artifact(&ctx.prefix, ".csv");
    let sink = CsvSink::create(&path, &["zeta", "u", "rho", "v"])?;
    let ((), rows) = with_sink(sink, |sink| {
        for p in &prof.samples {
            let v = rav_core::kinematics::classical_velocity(p.u);
            sink.row(&[p.zeta.into(), p.u.into(), p.rho.into(), v.into()])?;
        }
        Ok(())
    })?;

    let sh = &prof.shock;
    let mut m = Map::new();
    m.insert("csv".into(), json!(path.display().to_string()));
    m.insert("rows".into(), json!(rows));
    m.insert("s".into(), json!(sh.s));
    m.insert("family".into(), json!(sh.family.as_str()));
    m.insert("rho_R".into(), json!(sh.right.rho()));
    m.insert("phi_prime_L".into(), json!(prof.phi_prime[0]));
    m.insert("phi_prime_R".into(), json!(prof.phi_prime[1]));
    m.insert("phi_sign".into(), json!(prof.phi_sign));
    m.insert("orientation".into(), json!(prof.orientation));
    m.insert("zeta_range".into(), json!(prof.zeta_range()));
    m.insert("width".into(), json!(prof.width()));
    m.insert("endpoint_errors".into(), json!(prof.endpoint_errors));
    m.insert("endpoints_ok".into(), json!(prof.endpoint_errors.iter().all(|&e| e <= ENDPOINT_TOL)));
    m.insert("monotone".into(), json!(prof.is_strictly_monotone()));
    Ok(m)
}

fn initial_field(c: &EvolveConfig, eos: &EquationOfState, rng: &mut ChaCha8Rng) -> Result<(Field1D, Option<ShockProfile>), Failure> {
    let g = &c.grid;
    match &c.initial {
        InitialData::Constant { rho, u } => {
            let state = validate_state(eos, &rav_core::kinematics::StateSpec { rho: *rho, u: *u }, "initial")?;
            let boundary = match g.boundary {
                BoundaryKind::Periodic => Boundary::Periodic,
                BoundaryKind::Dirichlet => Boundary::Dirichlet { left: state, right: state },
            };
            let grid = Grid1D::new(g.x_min, g.x_max, g.n, boundary)?;
            Ok((Field1D::constant(grid, state)?, None))
        }
        InitialData::Perturbation { rho, u, amplitude, modes } => {
            validate_state(eos, &rav_core::kinematics::StateSpec { rho: *rho, u: *u }, "initial")?;
            let grid = Grid1D::new(g.x_min, g.x_max, g.n, Boundary::Periodic)?;
            let period = g.n as f64 * grid.h();
            let phases: Vec<(f64, f64)> = (0..*modes)
                .map(|_| {
                    let tau = std::f64::consts::TAU;
                    (tau * rng.random::<f64>(), tau * rng.random::<f64>())
                })
                .collect();
            let amp = amplitude / *modes as f64;
            let x0 = g.x_min;
            let field = Field1D::from_fn(grid, 0.0, |x| {
                let mut dr = 0.0;
                let mut du = 0.0;
                for (m, (pr, pu)) in phases.iter().enumerate() {
                    let k = std::f64::consts::TAU * (m + 1) as f64 / period;
                    dr += (k * (x - x0) + pr).sin();
                    du += (k * (x - x0) + pu).sin();
                }
                (rho * (1.0 + amp * dr), u + amp * du, 0.0)
            })?;
            if let Some(i) = field.rho.iter().position(|r| !eos.contains(*r)) {
                return Err(ConfigError::new(
                    "initial.amplitude",
                    format!("density {} at node {i} leaves the EOS interval", field.rho[i]),
                )
                .into());
            }
            Ok((field, None))
        }
        InitialData::Profile { left, u_r, branch, tol } => {
            let prof = solve_profile(eos, left, *u_r, *branch, false, c.epsilon, *tol, "initial.left")?;
            let field = fields::profile_field(eos, &prof, (g.x_min, g.x_max), g.n, 0.0)?;
            Ok((field, Some(prof)))
        }
    }
}

fn evolve_run(c: &EvolveConfig, ctx: &Context, rng: &mut ChaCha8Rng) -> Outcome {
    let eos = validate_eos(&c.eos)?;
    c.validate()?;
    let (start, prof) = initial_field(c, &eos, rng)?;
    let limit = CFL * start.grid.h();
    let dt = match c.dt {
        Some(dt) if dt > limit * (1.0 + 1e-12) => {
            return Err(ConfigError::new("dt", format!("{dt} exceeds the CFL limit {limit}")).into())
        }
        Some(dt) => dt,
        None => limit,
    };
    let opts = EvolveOptions {
        epsilon: c.epsilon,
        dt,
        t_end: c.t_end,
        exec: ctx.exec,
        snapshot_every: c.snapshot_every,
    };

    let path = artifact(&ctx.prefix, ".csv");
    let sink = CsvSink::create(&path, &["t", "x", "rho", "u", "v", "w"])?;
    let (report, rows) = with_sink(sink, |sink| {
        let mut io_err = None;
        let mut observer = |f: &Field1D| {
            if io_err.is_some() {
                return;
            }
            for (i, v) in f.v().into_iter().enumerate() {
                let cells = [f.t.into(), f.grid.x(i).into(), f.rho[i].into(), f.u[i].into(), v.into(), f.w[i].into()];
                if let Err(e) = sink.row(&cells) {
                    io_err = Some(e);
                    return;
                }
            }
        };
        let rep = fields::evolve_with(&eos, &start, &opts, &mut observer);
        if let Some(e) = io_err {
            return Err(e.into());
        }
        Ok(rep?)
    })?;

    let f = &report.field;
    let mut m = Map::new();
    m.insert("csv".into(), json!(path.display().to_string()));
    m.insert("rows".into(), json!(rows));
    m.insert("dt".into(), json!(dt));
    m.insert("steps".into(), json!(report.steps));
    m.insert("t_final".into(), json!(f.t));
    m.insert("max_det_deviation".into(), json!(report.max_det_deviation));
    m.insert("det_identity_ok".into(), json!(report.max_det_deviation <= DET_TOL));
    m.insert("min_rho".into(), json!(f.rho.iter().copied().fold(f64::INFINITY, f64::min)));
    if let Some(p) = &prof {
        let (drift, shift) = fields::translated_drift(p, f);
        m.insert("s".into(), json!(p.shock.s));
        m.insert("drift".into(), json!(drift));
        m.insert("shift".into(), json!(shift));
    }
    Ok(m)
}

fn covariance_run(c: &VerifyConfig, ctx: &Context, rng: &mut ChaCha8Rng) -> Outcome {
    let eos = validate_eos(&c.eos)?;
    if !(c.epsilon >= 0.0 && c.epsilon.is_finite()) {
        return Err(ConfigError::new("epsilon", "must be finite and >= 0").into());
    }
    let mut betas = c.betas.clone().unwrap_or_default();
    for (i, b) in betas.iter().enumerate() {
        if !(b.abs() < 1.0) {
            return Err(ConfigError::new(format!("betas[{i}]"), format!("must satisfy |beta| < 1, got {b}")).into());
        }
    }
    betas.extend((0..c.random_betas).map(|_| rng.random_range(-0.9..0.9)));
    if betas.is_empty() {
        betas.push(0.5);
    }
    let levels = c.levels.clone().unwrap_or_else(|| vec![0.01, 0.005, 0.0025]);
    if levels.len() < 2 || levels.iter().any(|h| !(*h > 0.0)) {
        return Err(ConfigError::new("levels", "need at least two positive step sizes").into());
    }
    let x_range = c.x_range.unwrap_or((-1.0, 1.0));
    let bump = c.bump.unwrap_or_default();
    if let Some(rho) = [bump.rho0, bump.rho0 + bump.rho_amp].into_iter().find(|r| !eos.contains(*r)) {
        return Err(ConfigError::new("bump.rho0", format!("density {rho} outside the EOS interval")).into());
    }

    let reports = exec::map_slice(ctx.exec, &betas, |&b| {
        fields::covariance_check(&eos, &bump as &GaussianBump, b, c.epsilon, &levels, x_range)
    });
    let mut runs = Vec::new();
    let mut worst = vec![0.0f64; levels.len()];
    let mut orders = Vec::new();
    for (b, r) in betas.iter().zip(reports) {
        let r = r?;
        for (w, e) in worst.iter_mut().zip(&r.errors) {
            *w = w.max(*e);
        }
        orders.push(r.observed_order);
        runs.push(json!({"beta": b, "errors": r.errors, "observed_order": r.observed_order}));
    }
    let order = fields::fit_order(&levels, &worst);

    let mut m = Map::new();
    m.insert("check".into(), json!("covariance"));
    m.insert("levels".into(), json!(levels));
    m.insert("errors".into(), json!(worst));
    m.insert("observed_order".into(), json!(order));
    m.insert("order_ok".into(), json!(orders.iter().all(|p| (p - 2.0).abs() <= 0.3)));
    m.insert("runs".into(), Value::Array(runs));
    Ok(m)
}

fn classical_run(c: &VerifyConfig, ctx: &Context) -> Outcome {
    let _ = ctx;
    let eos = validate_eos(&c.eos)?;
    if !(c.epsilon >= 0.0 && c.epsilon.is_finite()) {
        return Err(ConfigError::new("epsilon", "must be finite and >= 0").into());
    }
    let cs = c.c_values.clone().unwrap_or_else(|| vec![10.0, 100.0, 1000.0]);
    if cs.len() < 2 || cs.iter().any(|x| !(*x > 1.0)) {
        return Err(ConfigError::new("c_values", "need at least two light speeds above 1").into());
    }
    let waves = c.waves.unwrap_or_default();
    if !eos.contains(waves.rho0 - waves.rho_amp.abs()) || !eos.contains(waves.rho0 + waves.rho_amp.abs()) {
        return Err(ConfigError::new("waves.rho0", "density range leaves the EOS interval").into());
    }
    let n = c.n_points.unwrap_or(64);
    if n == 0 {
        return Err(ConfigError::new("n_points", "must be at least 1").into());
    }
    let period = std::f64::consts::TAU / waves.k;
    let points: Vec<(f64, f64)> = (0..n).map(|i| (0.3, period * i as f64 / n as f64)).collect();
    let report = fields::classical_limit_check(&eos, &waves as &SineWaves, c.epsilon, &cs, &points, c.target)?;
    let other = match c.target {
        ClassicalTarget::AsStated => ClassicalTarget::MassConserving,
        ClassicalTarget::MassConserving => ClassicalTarget::AsStated,
    };
    let alt = fields::classical_limit_check(&eos, &waves as &SineWaves, c.epsilon, &cs, &points, other)?;

    let mut m = Map::new();
    m.insert("check".into(), json!("classical_limit"));
    m.insert("target".into(), json!(report.target));
    m.insert("levels".into(), json!(report.levels));
    m.insert("errors".into(), json!(report.errors));
    m.insert("observed_order".into(), json!(report.observed_order));
    m.insert("order_ok".into(), json!(report.observed_order >= 1.0));
    m.insert("mass_viscous_term".into(), json!(report.mass_viscous_term));
    m.insert(
        "alternate".into(),
        json!({"target": alt.target, "errors": alt.errors, "observed_order": alt.observed_order}),
    );
    Ok(m)
}
