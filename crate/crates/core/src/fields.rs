//! Discrete 1D fields, the viscous residual operator and its evolution.
//!
//! The residual of `∂_ν T^{μν} = ε □u^μ` is affine in `(∂ₜρ, ∂ₜw)` once
//! `w = ∂ₜu` is carried as an unknown. Per grid point the coefficient matrix
//! is
//!
//! ```text
//! A = [[∂T00/∂ρ, εv], [∂T01/∂ρ, ε]],   det A = ε (∂T00/∂ρ − v ∂T01/∂ρ) = ε,
//! ```
//!
//! since `∂T00/∂ρ = (1+σ²)u⁰² − σ²` and `v ∂T01/∂ρ = (1+σ²)u²`.

use serde::{Deserialize, Serialize};

use crate::eos::EquationOfState;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::kinematics::{boost_velocity, boost_vector, gamma, make_state, time_component, FluidState};
use crate::profile::{density_of_u, ShockProfile};

/// CFL constant against unit light speed.
pub const CFL: f64 = 0.4;
/// Densities below this abort an evolution.
pub const RHO_FLOOR: f64 = 1e-12;
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Boundary {
    /// End nodes pinned to the given states.
    Dirichlet { left: FluidState, right: FluidState },
    /// `n` distinct nodes, node `n` coinciding with node `0`.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub boundary: Boundary,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize, boundary: Boundary) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Domain(format!("grid needs at least {MIN_NODES} nodes, got {n}")));
        }
        if !(x_max > x_min && x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::Domain(format!("invalid grid extent [{x_min}, {x_max}]")));
        }
        Ok(Self {
            x_min,
            x_max,
            n,
            boundary,
        })
    }

    /// Periodic grid of `n` nodes covering one period starting at `x0`.
    pub fn periodic(x0: f64, period: f64, n: usize) -> Result<Self> {
        let h = period / n as f64;
        Self::new(x0, x0 + period - h, n, Boundary::Periodic)
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.x_max
        } else {
            self.x_min + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.boundary, Boundary::Periodic)
    }

    /// Nodes carrying a residual / evolving freely.
    pub fn interior(&self) -> std::ops::Range<usize> {
        if self.is_periodic() {
            0..self.n
        } else {
            1..self.n - 1
        }
    }

    fn neighbours(&self, i: usize) -> (usize, usize) {
        let n = self.n;
        ((i + n - 1) % n, (i + 1) % n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field1D {
    pub grid: Grid1D,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    /// `∂ₜu`.
    pub w: Vec<f64>,
    pub t: f64,
}

impl Field1D {
    pub fn new(grid: Grid1D, rho: Vec<f64>, u: Vec<f64>, w: Vec<f64>, t: f64) -> Result<Self> {
        if rho.len() != grid.n || u.len() != grid.n || w.len() != grid.n {
            return Err(Error::Domain(format!(
                "field arrays must have length {}, got {}/{}/{}",
                grid.n,
                rho.len(),
                u.len(),
                w.len()
            )));
        }
        if let Some((index, &r)) = rho.iter().enumerate().find(|(_, r)| !(**r > 0.0)) {
            return Err(Error::NonPositiveDensity { index, rho: r, t });
        }
        Ok(Self { grid, rho, u, w, t })
    }

    /// Sample `x ↦ (ρ, u, w)` on the grid nodes.
    pub fn from_fn(grid: Grid1D, t: f64, f: impl Fn(f64) -> (f64, f64, f64)) -> Result<Self> {
        let (mut rho, mut u, mut w) = (Vec::with_capacity(grid.n), Vec::with_capacity(grid.n), Vec::with_capacity(grid.n));
        for x in grid.nodes() {
            let (a, b, c) = f(x);
            rho.push(a);
            u.push(b);
            w.push(c);
        }
        Self::new(grid, rho, u, w, t)
    }

    pub fn constant(grid: Grid1D, state: FluidState) -> Result<Self> {
        Self::from_fn(grid, 0.0, |_| (state.rho(), state.u(), 0.0))
    }

    pub fn v(&self) -> Vec<f64> {
        self.u.iter().map(|&u| u / time_component(u)).collect()
    }

    fn spatial(&self, i: usize) -> (f64, f64, f64) {
        let (l, r) = self.grid.neighbours(i);
        let h = self.grid.h();
        let rho_x = (self.rho[r] - self.rho[l]) / (2.0 * h);
        let u_x = (self.u[r] - self.u[l]) / (2.0 * h);
        let u_xx = (self.u[r] - 2.0 * self.u[i] + self.u[l]) / (h * h);
        (rho_x, u_x, u_xx)
    }

    /// Local derivative data at node `i` with the given time rates.
    pub fn jet(&self, i: usize, rho_t: f64, w_t: f64) -> PointJet {
        let (rho_x, u_x, u_xx) = self.spatial(i);
        PointJet {
            rho: self.rho[i],
            rho_t,
            rho_x,
            u: self.u[i],
            u_t: self.w[i],
            u_tt: w_t,
            u_x,
            u_xx,
        }
    }
}

/// Values and first/second derivatives of `(ρ, u)` at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PointJet {
    pub rho: f64,
    pub rho_t: f64,
    pub rho_x: f64,
    pub u: f64,
    pub u_t: f64,
    pub u_tt: f64,
    pub u_x: f64,
    pub u_xx: f64,
}

/// Time rates `(∂ₜρ, ∂ₜw)` on every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRates {
    pub rho_t: Vec<f64>,
    pub w_t: Vec<f64>,
}

impl FieldRates {
    pub fn zeros(n: usize) -> Self {
        Self {
            rho_t: vec![0.0; n],
            w_t: vec![0.0; n],
        }
    }

    /// Rates of a wave translating with speed `s`: `∂ₜ = −s ∂ₓ`, by central
    /// differences.
    pub fn traveling(field: &Field1D, s: f64) -> Self {
        let n = field.grid.n;
        let h = field.grid.h();
        let mut rates = Self::zeros(n);
        for i in field.grid.interior() {
            let (l, r) = field.grid.neighbours(i);
            rates.rho_t[i] = -s * (field.rho[r] - field.rho[l]) / (2.0 * h);
            rates.w_t[i] = -s * (field.w[r] - field.w[l]) / (2.0 * h);
        }
        rates
    }
}

/// `r^μ = c⁻¹∂ₜT^{μ0} + ∂ₓT^{μ1} − ε(−c⁻²∂ₜₜ + ∂ₓₓ)u^μ` at one point, for
/// `T^{μν} = (ρ + p/c²)u^μu^ν + pη^{μν}` and `u⁰ = √(c² + u²)`.
pub fn point_residual(eos: &EquationOfState, j: &PointJet, epsilon: f64, c: f64) -> Result<[f64; 2]> {
    let p = eos.pressure(j.rho)?;
    let s2 = eos.dp_drho(j.rho)?;
    let c2 = c * c;
    let e = j.rho + p / c2;
    let e_rho = 1.0 + s2 / c2;
    let u = j.u;
    let u0 = (c2 + u * u).sqrt();
    let mix = u * u / u0 + u0;
    let dt_t00 = (e_rho * u0 * u0 - s2) * j.rho_t + 2.0 * e * u * j.u_t;
    let dx_t01 = e_rho * u0 * u * j.rho_x + e * mix * j.u_x;
    let dt_t01 = e_rho * u0 * u * j.rho_t + e * mix * j.u_t;
    let dx_t11 = (e_rho * u * u + s2) * j.rho_x + 2.0 * e * u * j.u_x;
    let k = c2 / (u0 * u0 * u0);
    let box_u0 = -((u / u0) * j.u_tt + k * j.u_t * j.u_t) / c2 + (u / u0) * j.u_xx + k * j.u_x * j.u_x;
    let box_u = -j.u_tt / c2 + j.u_xx;
    Ok([
        dt_t00 / c + dx_t01 - epsilon * box_u0,
        dt_t01 / c + dx_t11 - epsilon * box_u,
    ])
}

/// Residual on the residual-carrying nodes `grid.interior()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub first: usize,
    pub r0: Vec<f64>,
    pub r1: Vec<f64>,
}

impl Residual {
    pub fn max_abs(&self) -> f64 {
        self.r0
            .iter()
            .chain(self.r1.iter())
            .fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Discrete residual of the viscous system with 2nd-order central
/// differences in `x` and the supplied time rates.
pub fn rav_residual(
    eos: &EquationOfState,
    field: &Field1D,
    rates: &FieldRates,
    epsilon: f64,
    c: f64,
) -> Result<Residual> {
    let range = field.grid.interior();
    let mut r0 = Vec::with_capacity(range.len());
    let mut r1 = Vec::with_capacity(range.len());
    for i in range.clone() {
        let r = point_residual(eos, &field.jet(i, rates.rho_t[i], rates.w_t[i]), epsilon, c)?;
        r0.push(r[0]);
        r1.push(r[1]);
    }
    Ok(Residual {
        first: range.start,
        r0,
        r1,
    })
}

/// Coefficients of `(∂ₜρ, ∂ₜw)` in the residual at unit light speed.
pub fn rate_matrix(eos: &EquationOfState, rho: f64, u: f64, epsilon: f64) -> Result<[[f64; 2]; 2]> {
    let s2 = eos.dp_drho(rho)?;
    let u0 = time_component(u);
    Ok([
        [(1.0 + s2) * u0 * u0 - s2, epsilon * u / u0],
        [(1.0 + s2) * u0 * u, epsilon],
    ])
}

fn solve_point(eos: &EquationOfState, field: &Field1D, i: usize, epsilon: f64) -> Result<(f64, f64, f64)> {
    let b = point_residual(eos, &field.jet(i, 0.0, 0.0), epsilon, 1.0)?;
    let a = rate_matrix(eos, field.rho[i], field.u[i], epsilon)?;
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(det.abs() > 0.0) || !det.is_finite() {
        return Err(Error::SingularSystem { index: i, det });
    }
    let rho_t = -(a[1][1] * b[0] - a[0][1] * b[1]) / det;
    let w_t = -(a[0][0] * b[1] - a[1][0] * b[0]) / det;
    Ok((rho_t, w_t, (det / epsilon - 1.0).abs()))
}

/// Rates making the residual vanish on every interior node, with the
/// largest relative deviation `|det A/ε − 1|` seen.
pub fn solve_rates(eos: &EquationOfState, field: &Field1D, epsilon: f64, exec: Execution) -> Result<(FieldRates, f64)> {
    let range = field.grid.interior();
    let first = range.start;
    let solved = exec::map_range(exec, range.len(), |k| solve_point(eos, field, first + k, epsilon));
    let mut rates = FieldRates::zeros(field.grid.n);
    let mut worst: f64 = 0.0;
    for (k, r) in solved.into_iter().enumerate() {
        let (a, b, d) = r?;
        rates.rho_t[first + k] = a;
        rates.w_t[first + k] = b;
        worst = worst.max(d);
    }
    Ok((rates, worst))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub exec: Execution,
    /// Observer cadence in steps; 0 reports only the initial and final fields.
    #[serde(default)]
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveReport {
    pub field: Field1D,
    pub steps: usize,
    pub max_det_deviation: f64,
}

/// Advance to `t_end` with classical RK4 and step `dt`.
pub fn evolve(eos: &EquationOfState, field: &Field1D, epsilon: f64, dt: f64, t_end: f64) -> Result<Field1D> {
    let opts = EvolveOptions {
        epsilon,
        dt,
        t_end,
        exec: Execution::default(),
        snapshot_every: 0,
    };
    Ok(evolve_with(eos, field, &opts, &mut |_| {})?.field)
}

/// `evolve` with an execution policy and a snapshot observer.
pub fn evolve_with(
    eos: &EquationOfState,
    field: &Field1D,
    opts: &EvolveOptions,
    observer: &mut dyn FnMut(&Field1D),
) -> Result<EvolveReport> {
    let h = field.grid.h();
    let limit = CFL * h;
    if !(opts.dt > 0.0 && opts.dt <= limit * (1.0 + 1e-12)) {
        return Err(Error::CflViolation { dt: opts.dt, limit });
    }
    if !(opts.epsilon > 0.0 && opts.epsilon.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be > 0, got {}", opts.epsilon)));
    }
    if !(opts.t_end >= field.t) {
        return Err(Error::Domain(format!("t_end {} precedes field time {}", opts.t_end, field.t)));
    }
    check_boundary(field)?;
    let mut cur = field.clone();
    let mut worst: f64 = 0.0;
    let mut steps = 0usize;
    observer(&cur);
    let span = opts.t_end - field.t;
    let total = (span / opts.dt - 1e-9).ceil().max(0.0) as usize;
    for step in 0..total {
        let t0 = field.t + step as f64 * opts.dt;
        let t1 = if step + 1 == total { opts.t_end } else { t0 + opts.dt };
        let (next, dev) = rk4_step(eos, &cur, t1 - t0, opts.epsilon, opts.exec)?;
        cur = next;
        cur.t = t1;
        worst = worst.max(dev);
        steps += 1;
        if opts.snapshot_every > 0 && steps.is_multiple_of(opts.snapshot_every) && steps != total {
            observer(&cur);
        }
    }
    if steps > 0 {
        observer(&cur);
    }
    Ok(EvolveReport {
        field: cur,
        steps,
        max_det_deviation: worst,
    })
}

fn check_boundary(field: &Field1D) -> Result<()> {
    if let Boundary::Dirichlet { left, right } = field.grid.boundary {
        let n = field.grid.n;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        let ok = close(field.rho[0], left.rho())
            && close(field.u[0], left.u())
            && close(field.rho[n - 1], right.rho())
            && close(field.u[n - 1], right.u());
        if !ok {
            return Err(Error::Domain("boundary nodes differ from the Dirichlet states".into()));
        }
    }
    Ok(())
}

struct Derivs {
    rho: Vec<f64>,
    u: Vec<f64>,
    w: Vec<f64>,
}

fn derivatives(eos: &EquationOfState, f: &Field1D, epsilon: f64, exec: Execution) -> Result<(Derivs, f64)> {
    if let Some((index, &rho)) = f.rho.iter().enumerate().find(|(_, r)| !(**r >= RHO_FLOOR)) {
        return Err(Error::NonPositiveDensity { index, rho, t: f.t });
    }
    let (rates, dev) = solve_rates(eos, f, epsilon, exec)?;
    let mut du = f.w.clone();
    if !f.grid.is_periodic() {
        du[0] = 0.0;
        du[f.grid.n - 1] = 0.0;
    }
    Ok((
        Derivs {
            rho: rates.rho_t,
            u: du,
            w: rates.w_t,
        },
        dev,
    ))
}

fn axpy(base: &Field1D, a: f64, d: &Derivs) -> Field1D {
    let add = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(x, y)| x + a * y).collect();
    Field1D {
        grid: base.grid,
        rho: add(&base.rho, &d.rho),
        u: add(&base.u, &d.u),
        w: add(&base.w, &d.w),
        t: base.t + a,
    }
}

fn rk4_step(eos: &EquationOfState, f: &Field1D, dt: f64, epsilon: f64, exec: Execution) -> Result<(Field1D, f64)> {
    let (k1, d1) = derivatives(eos, f, epsilon, exec)?;
    let (k2, d2) = derivatives(eos, &axpy(f, 0.5 * dt, &k1), epsilon, exec)?;
    let (k3, d3) = derivatives(eos, &axpy(f, 0.5 * dt, &k2), epsilon, exec)?;
    let (k4, d4) = derivatives(eos, &axpy(f, dt, &k3), epsilon, exec)?;
    let comb = |x: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..x.len())
            .map(|i| x[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
            .collect()
    };
    let next = Field1D {
        grid: f.grid,
        rho: comb(&f.rho, &k1.rho, &k2.rho, &k3.rho, &k4.rho),
        u: comb(&f.u, &k1.u, &k2.u, &k3.u, &k4.u),
        w: comb(&f.w, &k1.w, &k2.w, &k3.w, &k4.w),
        t: f.t + dt,
    };
    Ok((next, d1.max(d2).max(d3).max(d4)))
}

/// Grid-refinement study result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub levels: Vec<f64>,
    pub errors: Vec<f64>,
    pub observed_order: f64,
}

/// Least-squares slope of `log e` against `log level`.
pub fn fit_order(levels: &[f64], errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > 0.0)
        .map(|(l, e)| (l.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Closed-form `(ρ, u)` on space-time.
pub trait AnalyticField: Sync {
    fn rho(&self, t: f64, x: f64) -> f64;
    fn u(&self, t: f64, x: f64) -> f64;
}

/// Gaussian bumps in `ρ` and `u`, each translating with its own speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub rho0: f64,
    pub rho_amp: f64,
    pub rho_speed: f64,
    pub u0: f64,
    pub u_amp: f64,
    pub u_speed: f64,
    pub width: f64,
}

impl Default for GaussianBump {
    fn default() -> Self {
        Self {
            rho0: 1.0,
            rho_amp: 0.3,
            rho_speed: 0.4,
            u0: 0.1,
            u_amp: 0.2,
            u_speed: -0.3,
            width: 0.3,
        }
    }
}

impl AnalyticField for GaussianBump {
    fn rho(&self, t: f64, x: f64) -> f64 {
        let z = (x - self.rho_speed * t) / self.width;
        self.rho0 + self.rho_amp * (-z * z).exp()
    }

    fn u(&self, t: f64, x: f64) -> f64 {
        let z = (x - self.u_speed * t) / self.width;
        self.u0 + self.u_amp * (-z * z).exp()
    }
}

/// Central-difference jet of an analytic field at `(t, x)`.
pub fn fd_jet(f: &(impl Fn(f64, f64) -> (f64, f64) + ?Sized), t: f64, x: f64, h: f64) -> PointJet {
    let c = f(t, x);
    let (xm, xp) = (f(t, x - h), f(t, x + h));
    let (tm, tp) = (f(t - h, x), f(t + h, x));
    PointJet {
        rho: c.0,
        rho_t: (tp.0 - tm.0) / (2.0 * h),
        rho_x: (xp.0 - xm.0) / (2.0 * h),
        u: c.1,
        u_t: (tp.1 - tm.1) / (2.0 * h),
        u_tt: (tp.1 - 2.0 * c.1 + tm.1) / (h * h),
        u_x: (xp.1 - xm.1) / (2.0 * h),
        u_xx: (xp.1 - 2.0 * c.1 + xm.1) / (h * h),
    }
}

/// Compare the residual computed in the frame moving with `β` against the
/// boosted residual of the original frame, on `t' = 0`, `x' ∈ x_range`.
pub fn covariance_check(
    eos: &EquationOfState,
    field: &dyn AnalyticField,
    beta: f64,
    epsilon: f64,
    levels: &[f64],
    x_range: (f64, f64),
) -> Result<ConvergenceReport> {
    if !(beta.abs() < 1.0) {
        return Err(Error::Domain(format!("boost velocity must satisfy |beta| < 1, got {beta}")));
    }
    let g = gamma(beta);
    let frame_a = |t: f64, x: f64| (field.rho(t, x), field.u(t, x));
    let frame_b = |tp: f64, xp: f64| {
        let (t, x) = (g * (tp + beta * xp), g * (xp + beta * tp));
        (field.rho(t, x), boost_velocity(field.u(t, x), beta))
    };
    let mut errors = Vec::with_capacity(levels.len());
    for &h in levels {
        let n = ((x_range.1 - x_range.0) / h).round() as usize + 1;
        let x_max = x_range.0 + (n - 1) as f64 * h;
        let end = |xp: f64| {
            let (r, u) = frame_b(0.0, xp);
            make_state(r, u)
        };
        let grid = Grid1D::new(
            x_range.0,
            x_max,
            n,
            Boundary::Dirichlet {
                left: end(x_range.0)?,
                right: end(x_max)?,
            },
        )?;
        let xs = grid.nodes();
        let mut rates = FieldRates::zeros(n);
        let (mut rho, mut u, mut w) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for (i, &xp) in xs.iter().enumerate() {
            let c = frame_b(0.0, xp);
            let m = frame_b(-h, xp);
            let p = frame_b(h, xp);
            rho[i] = c.0;
            u[i] = c.1;
            w[i] = (p.1 - m.1) / (2.0 * h);
            rates.rho_t[i] = (p.0 - m.0) / (2.0 * h);
            rates.w_t[i] = (p.1 - 2.0 * c.1 + m.1) / (h * h);
        }
        let fb = Field1D::new(grid, rho, u, w, 0.0)?;
        let rb = rav_residual(eos, &fb, &rates, epsilon, 1.0)?;
        let mut worst: f64 = 0.0;
        for (k, i) in grid.interior().enumerate() {
            let xp = xs[i];
            let (t, x) = (g * beta * xp, g * xp);
            let ra = point_residual(eos, &fd_jet(&frame_a, t, x, h), epsilon, 1.0)?;
            let ra_b = boost_vector(ra, beta);
            worst = worst.max((ra_b[0] - rb.r0[k]).abs()).max((ra_b[1] - rb.r1[k]).abs());
        }
        errors.push(worst);
    }
    Ok(ConvergenceReport {
        levels: levels.to_vec(),
        observed_order: fit_order(levels, &errors),
        errors,
    })
}

/// Derivatives of a classical field `(ρ, v)` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassicalJet {
    pub rho: f64,
    pub rho_t: f64,
    pub rho_x: f64,
    pub v: f64,
    pub v_t: f64,
    pub v_x: f64,
    pub v_tt: f64,
    pub v_xx: f64,
}

/// Closed-form classical field with exact derivatives.
pub trait ClassicalField: Sync {
    fn jet(&self, t: f64, x: f64) -> ClassicalJet;
}

/// `ρ = ρ₀ + a sin(kx − ωt)`, `v = b cos(kx + νt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineWaves {
    pub rho0: f64,
    pub rho_amp: f64,
    pub v_amp: f64,
    pub k: f64,
    pub omega: f64,
    pub nu: f64,
}

impl Default for SineWaves {
    fn default() -> Self {
        Self {
            rho0: 1.0,
            rho_amp: 0.2,
            v_amp: 0.5,
            k: 1.0,
            omega: 0.7,
            nu: 0.4,
        }
    }
}

impl ClassicalField for SineWaves {
    fn jet(&self, t: f64, x: f64) -> ClassicalJet {
        let a = self.k * x - self.omega * t;
        let b = self.k * x + self.nu * t;
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        ClassicalJet {
            rho: self.rho0 + self.rho_amp * sa,
            rho_t: -self.omega * self.rho_amp * ca,
            rho_x: self.k * self.rho_amp * ca,
            v: self.v_amp * cb,
            v_t: -self.nu * self.v_amp * sb,
            v_x: -self.k * self.v_amp * sb,
            v_tt: -self.nu * self.nu * self.v_amp * cb,
            v_xx: -self.k * self.k * self.v_amp * cb,
        }
    }
}

/// Which classical system the relativistic residual is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalTarget {
    /// Mass equation `ρₜ + (ρv)ₓ = ε v vₓₓ`, momentum `ρ(vₜ + v vₓ) + pₓ = ε vₓₓ`.
    #[default]
    AsStated,
    /// Inviscid mass equation `ρₜ + (ρv)ₓ = 0`, same momentum equation.
    MassConserving,
}

/// `[mass, momentum]` residual of the classical viscous system.
pub fn classical_residual(eos: &EquationOfState, j: &ClassicalJet, epsilon: f64, target: ClassicalTarget) -> Result<[f64; 2]> {
    let s2 = eos.dp_drho(j.rho)?;
    let mut mass = j.rho_t + j.rho_x * j.v + j.rho * j.v_x;
    if target == ClassicalTarget::AsStated {
        mass -= epsilon * j.v * j.v_xx;
    }
    let mom = j.rho * (j.v_t + j.v * j.v_x) + s2 * j.rho_x - epsilon * j.v_xx;
    Ok([mass, mom])
}

/// Relativistic jet of `u = γ(v)v`, `γ = (1 − v²/c²)^{−1/2}`.
pub fn relativistic_jet(j: &ClassicalJet, c: f64) -> PointJet {
    let c2 = c * c;
    let g = 1.0 / (1.0 - j.v * j.v / c2).sqrt();
    let g3 = g * g * g;
    let d2 = 3.0 * g3 * g * g * j.v / c2;
    PointJet {
        rho: j.rho,
        rho_t: j.rho_t,
        rho_x: j.rho_x,
        u: g * j.v,
        u_t: g3 * j.v_t,
        u_tt: d2 * j.v_t * j.v_t + g3 * j.v_tt,
        u_x: g3 * j.v_x,
        u_xx: d2 * j.v_x * j.v_x + g3 * j.v_xx,
    }
}

/// Normalized relativistic residual pair `[r⁰/c, r¹ − v r⁰/c]`.
pub fn normalized_residual(eos: &EquationOfState, j: &ClassicalJet, epsilon: f64, c: f64) -> Result<[f64; 2]> {
    let r = point_residual(eos, &relativistic_jet(j, c), epsilon, c)?;
    let mass = r[0] / c;
    Ok([mass, r[1] - j.v * mass])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalLimitReport {
    pub target: ClassicalTarget,
    /// Light speeds.
    pub levels: Vec<f64>,
    /// Max deviation over the sample points for each light speed.
    pub errors: Vec<f64>,
    /// Decay order in `1/c`.
    pub observed_order: f64,
    /// Max `|ε □u⁰ / c|` for each light speed.
    pub mass_viscous_term: Vec<f64>,
}

/// Deviation between the normalized relativistic residual and the
/// classical residual at each light speed in `cs`.
pub fn classical_limit_check(
    eos: &EquationOfState,
    field: &dyn ClassicalField,
    epsilon: f64,
    cs: &[f64],
    points: &[(f64, f64)],
    target: ClassicalTarget,
) -> Result<ClassicalLimitReport> {
    let mut errors = Vec::with_capacity(cs.len());
    let mut visc = Vec::with_capacity(cs.len());
    for &c in cs {
        let mut worst: f64 = 0.0;
        let mut worst_visc: f64 = 0.0;
        for &(t, x) in points {
            let j = field.jet(t, x);
            if !(j.v.abs() < c) {
                return Err(Error::Domain(format!("|v| = {} is not below c = {c}", j.v.abs())));
            }
            let rel = normalized_residual(eos, &j, epsilon, c)?;
            let cls = classical_residual(eos, &j, epsilon, target)?;
            worst = worst.max((rel[0] - cls[0]).abs()).max((rel[1] - cls[1]).abs());
            let inviscid = normalized_residual(eos, &j, 0.0, c)?;
            worst_visc = worst_visc.max((rel[0] - inviscid[0]).abs());
        }
        errors.push(worst);
        visc.push(worst_visc);
    }
    let inv: Vec<f64> = cs.iter().map(|c| 1.0 / c).collect();
    Ok(ClassicalLimitReport {
        target,
        levels: cs.to_vec(),
        observed_order: fit_order(&inv, &errors),
        errors,
        mass_viscous_term: visc,
    })
}

/// Grid field sampling a shock profile at time `t`, Dirichlet-pinned to
/// the asymptotic states, with `w = −s ∂ₓu`.
pub fn profile_field(
    eos: &EquationOfState,
    profile: &ShockProfile,
    x_range: (f64, f64),
    n: usize,
    t: f64,
) -> Result<Field1D> {
    let sh = &profile.shock;
    let grid = Grid1D::new(
        x_range.0,
        x_range.1,
        n,
        Boundary::Dirichlet {
            left: sh.left,
            right: sh.right,
        },
    )?;
    let mut rho = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for (i, x) in grid.nodes().into_iter().enumerate() {
        let (ui, wi) = if i == 0 {
            (sh.left.u(), 0.0)
        } else if i == n - 1 {
            (sh.right.u(), 0.0)
        } else {
            profile.field_at(x, t)
        };
        let ri = if i == 0 {
            sh.left.rho()
        } else if i == n - 1 {
            sh.right.rho()
        } else {
            density_of_u(eos, sh, ui)?
        };
        rho.push(ri);
        u.push(ui);
        w.push(wi);
    }
    Field1D::new(grid, rho, u, w, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadinessReport {
    /// `min_δ max_i |u_i − u_exact(x_i − sT − δ)| / |u_L − u_R|`.
    pub drift: f64,
    pub shift: f64,
    pub steps: usize,
    pub max_det_deviation: f64,
}

/// L∞ distance, relative to the jump, between `field` and the profile
/// translated by `s·t + δ`, minimized over `δ`.
pub fn translated_drift(profile: &ShockProfile, field: &Field1D) -> (f64, f64) {
    let sh = &profile.shock;
    let jump = (sh.left.u() - sh.right.u()).abs();
    let xs = field.grid.nodes();
    let t = field.t;
    let dist = |delta: f64| {
        xs.iter()
            .zip(&field.u)
            .map(|(&x, &u)| (u - profile.field_at(x - delta, t).0).abs())
            .fold(0.0, f64::max)
            / jump
    };
    let h = field.grid.h();
    let mut best = (dist(0.0), 0.0);
    for k in -100..=100 {
        let d = 0.1 * h * k as f64;
        let e = dist(d);
        if e < best.0 {
            best = (e, d);
        }
    }
    let (mut a, mut b) = (best.1 - 0.1 * h, best.1 + 0.1 * h);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let m1 = b - phi * (b - a);
        let m2 = a + phi * (b - a);
        if dist(m1) < dist(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let m = 0.5 * (a + b);
    let e = dist(m);
    if e < best.0 {
        (e, m)
    } else {
        best
    }
}

/// Evolve a sampled profile and measure its drift from exact translation.
pub fn profile_steadiness(
    eos: &EquationOfState,
    profile: &ShockProfile,
    x_range: (f64, f64),
    n: usize,
    dt: f64,
    t_end: f64,
    exec: Execution,
) -> Result<SteadinessReport> {
    let start = profile_field(eos, profile, x_range, n, 0.0)?;
    let opts = EvolveOptions {
        epsilon: profile.epsilon,
        dt,
        t_end,
        exec,
        snapshot_every: 0,
    };
    let rep = evolve_with(eos, &start, &opts, &mut |_| {})?;
    let (drift, shift) = translated_drift(profile, &rep.field);
    Ok(SteadinessReport {
        drift,
        shift,
        steps: rep.steps,
        max_det_deviation: rep.max_det_deviation,
    })
}
