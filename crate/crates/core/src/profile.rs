//! Viscous shock profiles through the scalar traveling-wave reduction.
//!
//! With `ζ = (x − st)/ε` and `ζ_ν = (−s, 1)`, a traveling wave satisfies
//! `(T^{μν} − T^{μν}_R) ζ_ν = (1 − s²) du^μ/dζ`. The `μ = 0` component
//! fixes the density as an explicit function of `u`, leaving the scalar
//! ODE `du/dζ = Φ(u)/(1 − s²)`.

use serde::{Deserialize, Serialize};

use crate::eos::EquationOfState;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::jump::{lax_classify, ShockData, ShockFamily, RH_TOL};
use crate::kinematics::{
    boost_state, boost_velocity, classical_velocity, gamma, stress_tensor, stress_tensor_with_pressure,
    velocity_add, FluidState, StressTensor,
};

/// `|s − v(u)|` below which the density map is singular.
pub const SONIC_TOL: f64 = 1e-12;
/// Default stopping distance to the endpoint states.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Hard cap on `|ζ|`.
pub const ZETA_CAP: f64 = 1e6;
/// Relative RH residual accepted after a boost.
pub const BOOST_RH_TOL: f64 = 1e-10;
/// `|s|` accepted as a rest frame.
pub const REST_FRAME_TOL: f64 = 1e-12;

const MAX_STEPS: usize = 2_000_000;

/// Which asymptotic state provides the constant of integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Left,
    #[default]
    Right,
}

fn reference_flux(eos: &EquationOfState, shock: &ShockData, at: Endpoint) -> Result<[f64; 2]> {
    let state = match at {
        Endpoint::Left => &shock.left,
        Endpoint::Right => &shock.right,
    };
    Ok(stress_tensor(eos, state)?.contract_normal(shock.s))
}

fn density_from_flux(flux: [f64; 2], s: f64, u: f64) -> Result<f64> {
    let v = classical_velocity(u);
    if (s - v).abs() < SONIC_TOL {
        return Err(Error::SonicDegenerate { u });
    }
    Ok((v * flux[1] - flux[0]) / (s - v))
}

/// `ρ(u) = (v·A¹ − A⁰)/(s − v)` with `A^μ = T^{μν}_R ζ_ν`.
pub fn density_of_u(eos: &EquationOfState, shock: &ShockData, u: f64) -> Result<f64> {
    density_from_flux(reference_flux(eos, shock, Endpoint::Right)?, shock.s, u)
}

fn phi_from_flux(eos: &EquationOfState, flux: [f64; 2], s: f64, u: f64) -> Result<f64> {
    let rho = density_from_flux(flux, s, u)?;
    let t = stress_tensor_with_pressure(rho, eos.pressure(rho)?, u);
    Ok(t.contract_normal(s)[1] - flux[1])
}

/// `Φ(u) = (T^{1ν}(ρ(u), u) − T^{1ν}_R) ζ_ν`.
pub fn phi(eos: &EquationOfState, shock: &ShockData, u: f64) -> Result<f64> {
    phi_with_reference(eos, shock, u, Endpoint::Right)
}

/// `Φ` with either endpoint as the reference; the two agree when the
/// jump conditions hold.
pub fn phi_with_reference(eos: &EquationOfState, shock: &ShockData, u: f64, at: Endpoint) -> Result<f64> {
    phi_from_flux(eos, reference_flux(eos, shock, at)?, shock.s, u)
}

/// `Φ'(u_±) = ((v² − σ²)/v²)(p + ρ)u` in the shock rest frame.
pub fn phi_prime_endpoint(eos: &EquationOfState, shock: &ShockData, at: Endpoint) -> Result<f64> {
    if shock.s.abs() > REST_FRAME_TOL {
        return Err(Error::NotRestFrame { s: shock.s });
    }
    let state = match at {
        Endpoint::Left => shock.left,
        Endpoint::Right => shock.right,
    };
    endpoint_slope(eos, &state)
}

fn endpoint_slope(eos: &EquationOfState, state: &FluidState) -> Result<f64> {
    let u = state.u();
    if u == 0.0 {
        return Err(Error::ZeroVelocity);
    }
    let v = state.v();
    let s2 = eos.dp_drho(state.rho())?;
    let w = eos.pressure(state.rho())? + state.rho();
    Ok((v * v - s2) / (v * v) * w * u)
}

/// Endpoint slopes `[Φ'(u_L), Φ'(u_R)]` after boosting to the rest frame.
pub fn rest_frame_phi_primes(eos: &EquationOfState, shock: &ShockData) -> Result<[f64; 2]> {
    let rest = to_rest_frame(eos, shock)?;
    Ok([
        phi_prime_endpoint(eos, &rest, Endpoint::Left)?,
        phi_prime_endpoint(eos, &rest, Endpoint::Right)?,
    ])
}

/// Re-express a shock in the frame moving with velocity `β`.
pub fn boost_shock(eos: &EquationOfState, shock: &ShockData, beta: f64) -> Result<ShockData> {
    if !(beta.abs() < 1.0) {
        return Err(Error::Domain(format!("boost velocity must satisfy |beta| < 1, got {beta}")));
    }
    let left = boost_state(&shock.left, beta);
    let right = boost_state(&shock.right, beta);
    let s = velocity_add(shock.s, beta);
    let boosted = ShockData::new(eos, left, right, s)?;
    let scale = stress_tensor(eos, &left)?
        .max_abs()
        .max(stress_tensor(eos, &right)?.max_abs())
        .max(1.0);
    let tolerance = BOOST_RH_TOL * scale;
    let residual = boosted.residual_norm();
    if !(residual <= tolerance) {
        return Err(Error::NotAJump { residual, tolerance });
    }
    Ok(boosted)
}

fn to_rest_frame(eos: &EquationOfState, shock: &ShockData) -> Result<ShockData> {
    if shock.s == 0.0 {
        return Ok(*shock);
    }
    let mut rest = boost_shock(eos, shock, shock.s)?;
    rest.s = 0.0;
    Ok(rest)
}

/// Zeros of `Φ` on the closed velocity interval between the endpoints.
///
/// Endpoints are reported when `|Φ|` is at round-off level there; interior
/// zeros are located by bisecting sign changes of an `n_scan`-point scan.
pub fn rest_points(eos: &EquationOfState, shock: &ShockData, n_scan: usize) -> Result<Vec<f64>> {
    let (lo, hi) = {
        let (a, b) = (shock.left.u(), shock.right.u());
        (a.min(b), a.max(b))
    };
    let flux = reference_flux(eos, shock, Endpoint::Right)?;
    let f = |u: f64| phi_from_flux(eos, flux, shock.s, u);
    let scale = round_off_scale(eos, shock)?;
    if lo == hi {
        return Ok(if f(lo)?.abs() <= scale { vec![lo] } else { vec![] });
    }
    let n = n_scan.max(3);
    let grid: Vec<f64> = (0..n)
        .map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
        .collect();
    let vals = grid.iter().map(|&u| f(u)).collect::<Result<Vec<f64>>>()?;
    let mut zeros = Vec::new();
    if vals[0].abs() <= scale {
        zeros.push(lo);
    }
    for k in 1..n - 2 {
        if vals[k] == 0.0 {
            zeros.push(grid[k]);
        } else if vals[k] * vals[k + 1] < 0.0 {
            zeros.push(bisect(&f, grid[k], grid[k + 1], vals[k])?);
        }
    }
    if vals[n - 1].abs() <= scale {
        zeros.push(hi);
    }
    zeros.dedup_by(|a, b| (*a - *b).abs() <= 1e-10);
    Ok(zeros)
}

fn round_off_scale(eos: &EquationOfState, shock: &ShockData) -> Result<f64> {
    let m = stress_tensor(eos, &shock.left)?
        .max_abs()
        .max(stress_tensor(eos, &shock.right)?.max_abs());
    Ok(RH_TOL * m.max(1.0))
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// `Ψ(v) = p(ρ(v)) + v·T01_R − T11_R` for a rest-frame shock, with
/// `ρ(v) = −T11_R + T01_R/v`.
pub fn aux_psi(eos: &EquationOfState, shock: &ShockData, v: f64) -> Result<f64> {
    let tr = rest_tensor(eos, shock)?;
    if v == 0.0 {
        return Err(Error::ZeroVelocity);
    }
    let rho = -tr.t11 + tr.t01 / v;
    Ok(eos.pressure(rho)? + v * tr.t01 - tr.t11)
}

/// `Ψ'(v) = T01_R (v² − σ²(ρ(v)))/v²`.
pub fn aux_psi_prime(eos: &EquationOfState, shock: &ShockData, v: f64) -> Result<f64> {
    let tr = rest_tensor(eos, shock)?;
    if v == 0.0 {
        return Err(Error::ZeroVelocity);
    }
    let rho = -tr.t11 + tr.t01 / v;
    let s2 = eos.dp_drho(rho)?;
    Ok(tr.t01 * (v * v - s2) / (v * v))
}

fn rest_tensor(eos: &EquationOfState, shock: &ShockData) -> Result<StressTensor> {
    if shock.s.abs() > REST_FRAME_TOL {
        return Err(Error::NotRestFrame { s: shock.s });
    }
    stress_tensor(eos, &shock.right)
}

/// Direction of the transition as `ζ` increases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Decreasing,
    Increasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub zeta: f64,
    pub u: f64,
    pub rho: f64,
    pub du_dzeta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockProfile {
    pub shock: ShockData,
    pub epsilon: f64,
    /// Ordered by increasing `ζ`; `u(ζ_min) ≈ u_L`, `u(ζ_max) ≈ u_R`.
    pub samples: Vec<ProfileSample>,
    /// `[|u(ζ_min) − u_L|, |u(ζ_max) − u_R|]`.
    pub endpoint_errors: [f64; 2],
    /// Sign of `Φ` strictly between the endpoints.
    pub phi_sign: f64,
    pub orientation: Orientation,
    /// Rest-frame `[Φ'(u_L), Φ'(u_R)]`.
    pub phi_prime: [f64; 2],
}

impl ShockProfile {
    pub fn zeta_range(&self) -> (f64, f64) {
        (self.samples[0].zeta, self.samples[self.samples.len() - 1].zeta)
    }

    /// Physical position of a sample at time `t`.
    pub fn x_of(&self, zeta: f64, t: f64) -> f64 {
        self.epsilon * zeta + self.shock.s * t
    }

    /// Cubic Hermite interpolation of `u(ζ)`, constant beyond the sampled
    /// range.
    pub fn velocity_at(&self, zeta: f64) -> f64 {
        let (a, b) = self.zeta_range();
        if zeta <= a {
            return if zeta == a { self.samples[0].u } else { self.shock.left.u() };
        }
        if zeta >= b {
            return if zeta == b { self.samples[self.samples.len() - 1].u } else { self.shock.right.u() };
        }
        let k = self.samples.partition_point(|p| p.zeta <= zeta) - 1;
        let (p, q) = (&self.samples[k], &self.samples[k + 1]);
        let h = q.zeta - p.zeta;
        let t = (zeta - p.zeta) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * p.u + h10 * h * p.du_dzeta + h01 * q.u + h11 * h * q.du_dzeta
    }

    /// `u` and `∂ₜu = −s ∂ₓu` at physical position `x` and time `t`.
    pub fn field_at(&self, x: f64, t: f64) -> (f64, f64) {
        let zeta = (x - self.shock.s * t) / self.epsilon;
        let u = self.velocity_at(zeta);
        let (a, b) = self.zeta_range();
        let du = if zeta <= a || zeta >= b { 0.0 } else { self.slope_at(zeta) };
        (u, -self.shock.s * du / self.epsilon)
    }

    fn slope_at(&self, zeta: f64) -> f64 {
        let k = self.samples.partition_point(|p| p.zeta <= zeta).max(1) - 1;
        let k = k.min(self.samples.len() - 2);
        let (p, q) = (&self.samples[k], &self.samples[k + 1]);
        let h = q.zeta - p.zeta;
        let t = ((zeta - p.zeta) / h).clamp(0.0, 1.0);
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * p.u + d10 * p.du_dzeta + d01 * q.u + d11 * q.du_dzeta
    }

    /// `ζ` at which `u` crosses `target`, or `None` outside the range.
    pub fn zeta_at(&self, target: f64) -> Option<f64> {
        let sgn = if self.orientation == Orientation::Decreasing { -1.0 } else { 1.0 };
        let key = |u: f64| sgn * u;
        let k = self.samples.partition_point(|p| key(p.u) < key(target));
        if k == 0 || k == self.samples.len() {
            return None;
        }
        let (mut a, mut b) = (self.samples[k - 1].zeta, self.samples[k].zeta);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if key(self.velocity_at(m)) < key(target) {
                a = m;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    }

    /// `ζ`-extent between the 10% and 90% levels of the transition.
    pub fn width(&self) -> f64 {
        let (ul, ur) = (self.shock.left.u(), self.shock.right.u());
        match (self.zeta_at(ul + 0.1 * (ur - ul)), self.zeta_at(ul + 0.9 * (ur - ul))) {
            (Some(a), Some(b)) => (b - a).abs(),
            _ => f64::NAN,
        }
    }

    pub fn is_strictly_monotone(&self) -> bool {
        let sgn = if self.orientation == Orientation::Decreasing { -1.0 } else { 1.0 };
        self.samples.windows(2).all(|w| sgn * (w[1].u - w[0].u) > 0.0)
    }
}

/// Integrate the traveling-wave ODE for an admissible shock.
///
/// The integration runs in the shock rest frame by adaptive Dormand–Prince
/// stepping from `u(0) = (u_L + u_R)/2`, forward to `u_R` and backward to
/// `u_L`, and the samples are mapped back to the frame of `shock`.
pub fn integrate_profile(eos: &EquationOfState, shock: &ShockData, epsilon: f64, tol: f64) -> Result<ShockProfile> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be > 0, got {epsilon}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Domain(format!("tol must be > 0, got {tol}")));
    }
    let family = lax_classify(eos, &shock.left, &shock.right, shock.s)?;
    if !matches!(family, ShockFamily::Shock1 | ShockFamily::Shock2) {
        return Err(Error::NotAdmissible);
    }
    let rest = to_rest_frame(eos, shock)?;
    let phi_prime = [
        phi_prime_endpoint(eos, &rest, Endpoint::Left)?,
        phi_prime_endpoint(eos, &rest, Endpoint::Right)?,
    ];
    let s = shock.s;
    let g = gamma(s);
    let lab_u = |up: f64| boost_velocity(up, -s);
    let flux = reference_flux(eos, &rest, Endpoint::Right)?;
    let rhs = |u: f64| phi_from_flux(eos, flux, 0.0, u);

    let u_mid_lab = 0.5 * (shock.left.u() + shock.right.u());
    let u0 = boost_velocity(u_mid_lab, s);
    let phi_mid = rhs(u0)?;
    if phi_mid == 0.0 {
        return Err(Error::IntegrationFailed("interior rest point at the anchor".into()));
    }
    let lam = phi_prime[0].abs().max(phi_prime[1].abs());
    let cfg = StepConfig {
        tol,
        h_max: 1.0 / lam,
        zeta_cap: ZETA_CAP * g,
    };
    let fwd = march(&rhs, u0, rest.right.u(), shock.right.u(), 1.0, &cfg, &lab_u)?;
    let bwd = march(&rhs, u0, rest.left.u(), shock.left.u(), -1.0, &cfg, &lab_u)?;

    let mut rest_samples: Vec<(f64, f64, f64)> = bwd.into_iter().rev().collect();
    rest_samples.pop();
    rest_samples.extend(fwd);

    let lab_flux = reference_flux(eos, shock, Endpoint::Right)?;
    let mut samples = Vec::with_capacity(rest_samples.len());
    for (zp, up, dup) in rest_samples {
        let u = if zp == 0.0 { u_mid_lab } else { lab_u(up) };
        let rho = density_from_flux(lab_flux, s, u)?;
        let vp = classical_velocity(up);
        samples.push(ProfileSample {
            zeta: zp / g,
            u,
            rho,
            du_dzeta: g * g * (1.0 + s * vp) * dup,
        });
    }
    let endpoint_errors = [
        (samples[0].u - shock.left.u()).abs(),
        (samples[samples.len() - 1].u - shock.right.u()).abs(),
    ];
    let phi_sign = phi_mid.signum();
    let orientation = if shock.right.u() < shock.left.u() {
        Orientation::Decreasing
    } else {
        Orientation::Increasing
    };
    Ok(ShockProfile {
        shock: ShockData { family, ..*shock },
        epsilon,
        samples,
        endpoint_errors,
        phi_sign,
        orientation,
        phi_prime,
    })
}

/// Profiles for many shocks.
pub fn profile_sweep(
    exec: Execution,
    eos: &EquationOfState,
    shocks: &[ShockData],
    epsilon: f64,
    tol: f64,
) -> Vec<Result<ShockProfile>> {
    exec::map_slice(exec, shocks, |sh| integrate_profile(eos, sh, epsilon, tol))
}

struct StepConfig {
    tol: f64,
    h_max: f64,
    zeta_cap: f64,
}

// Dormand–Prince 5(4) tableau for an autonomous equation.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// March `du/dτ = dir·f(u)` from `u0` towards the rest point `target`
/// until the mapped velocity is within `tol` of `target_lab`. Returns
/// `(ζ, u, du/dζ)` triples with `ζ = dir·τ`.
fn march(
    f: &impl Fn(f64) -> Result<f64>,
    u0: f64,
    target: f64,
    target_lab: f64,
    dir: f64,
    cfg: &StepConfig,
    lab_u: &impl Fn(f64) -> f64,
) -> Result<Vec<(f64, f64, f64)>> {
    let toward = (target - u0).signum();
    let mut out = vec![(0.0, u0, f(u0)?)];
    let (mut tau, mut u) = (0.0_f64, u0);
    let mut k1 = dir * f(u)?;
    if k1 * toward <= 0.0 {
        return Err(Error::IntegrationFailed("flow does not point towards the endpoint".into()));
    }
    let atol = 1e-3 * cfg.tol;
    let rtol = 1e-10;
    let mut h = 1e-2 * cfg.h_max;
    for _ in 0..MAX_STEPS {
        if (lab_u(u) - target_lab).abs() <= cfg.tol {
            return Ok(out);
        }
        if tau > cfg.zeta_cap {
            return Err(Error::IntegrationFailed(format!(
                "endpoint not reached within |zeta| <= {ZETA_CAP}"
            )));
        }
        h = h.min(cfg.h_max);
        let mut k = [0.0; 7];
        k[0] = k1;
        for i in 1..7 {
            let ui = u + h * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
            k[i] = dir * f(ui)?;
        }
        let u5 = u + h * (0..7).map(|j| B5[j] * k[j]).sum::<f64>();
        let u4 = u + h * (0..7).map(|j| B4[j] * k[j]).sum::<f64>();
        let err = (u5 - u4).abs();
        let scale = atol + rtol * u.abs();
        let moved = (u5 - u) * toward;
        let overshoot = (u5 - target) * toward >= 0.0;
        if err <= scale && moved > 0.0 && !overshoot {
            tau += h;
            u = u5;
            k1 = k[6];
            out.push((dir * tau, u, k1 * dir));
            let fac = if err == 0.0 { 5.0 } else { (0.9 * (scale / err).powf(0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            let fac = if err > scale { (0.9 * (scale / err).powf(0.2)).clamp(0.1, 0.5) } else { 0.5 };
            h *= fac;
            if h < 1e-14 * cfg.h_max {
                return Err(Error::IntegrationFailed("step size underflow".into()));
            }
        }
    }
    Err(Error::IntegrationFailed("step budget exhausted".into()))
}
