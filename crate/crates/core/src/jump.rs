//! Rankine–Hugoniot jumps, characteristic speeds and Lax admissibility.

use serde::{Deserialize, Serialize};

use crate::eos::EquationOfState;
use crate::error::{Error, Result};
use crate::kinematics::{self, make_state, stress_tensor, FluidState, StressTensor};

/// Number of log-spaced density probes used to bracket Hugoniot roots.
pub const BRACKET_PROBES: usize = 256;
/// Tolerance on each Lax inequality.
pub const LAX_TOL: f64 = 1e-12;
/// Relative RH residual accepted as a genuine jump.
pub const RH_TOL: f64 = 1e-9;
/// Relative threshold on `[T00]` below which the shock speed is undefined.
pub const DEGENERATE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShockFamily {
    Shock1,
    Shock2,
    Inadmissible,
    Degenerate,
}

impl ShockFamily {
    pub fn is_admissible(self) -> bool {
        matches!(self, ShockFamily::Shock1 | ShockFamily::Shock2)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ShockFamily::Shock1 => "Shock1",
            ShockFamily::Shock2 => "Shock2",
            ShockFamily::Inadmissible => "Inadmissible",
            ShockFamily::Degenerate => "Degenerate",
        }
    }
}

/// Which of the two Hugoniot curves through the left state to follow.
///
/// The 1-curve has `(ρ_R − ρ_L)(u_R − u_L) < 0`, the 2-curve has it `> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HugoniotBranch {
    #[default]
    One,
    Two,
}

/// Sign pattern of the endpoint velocities, reported alongside the Lax
/// classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VelocitySigns {
    BothPositive,
    BothNegative,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockData {
    pub left: FluidState,
    pub right: FluidState,
    pub s: f64,
    pub rh_residual: [f64; 2],
    pub family: ShockFamily,
}

impl ShockData {
    /// Validate an RH-consistent jump and classify it.
    pub fn new(eos: &EquationOfState, left: FluidState, right: FluidState, s: f64) -> Result<Self> {
        if !(s.abs() < 1.0) {
            return Err(Error::Domain(format!("shock speed must be subluminal, got {s}")));
        }
        let rh_residual = rh_residual(eos, &left, &right, s)?;
        let family = lax_classify(eos, &left, &right, s)?;
        Ok(Self {
            left,
            right,
            s,
            rh_residual,
            family,
        })
    }

    /// Swap the states, keeping `s`.
    pub fn reversed(&self, eos: &EquationOfState) -> Result<Self> {
        Self::new(eos, self.right, self.left, self.s)
    }

    pub fn velocity_signs(&self) -> VelocitySigns {
        match (self.left.u() > 0.0, self.right.u() > 0.0) {
            (true, true) => VelocitySigns::BothPositive,
            (false, false) if self.left.u() < 0.0 && self.right.u() < 0.0 => {
                VelocitySigns::BothNegative
            }
            _ => VelocitySigns::Mixed,
        }
    }

    pub fn residual_norm(&self) -> f64 {
        self.rh_residual[0].abs().max(self.rh_residual[1].abs())
    }
}

/// `r^μ = [T^{μν}] ζ_ν` with `ζ_ν = (−s, 1)` and `[X] = X_L − X_R`.
pub fn rh_residual(
    eos: &EquationOfState,
    left: &FluidState,
    right: &FluidState,
    s: f64,
) -> Result<[f64; 2]> {
    let jump = stress_tensor(eos, left)? - stress_tensor(eos, right)?;
    Ok(jump.contract_normal(s))
}

fn rh_scale(eos: &EquationOfState, left: &FluidState, right: &FluidState) -> Result<f64> {
    Ok(stress_tensor(eos, left)?
        .max_abs()
        .max(stress_tensor(eos, right)?.max_abs()))
}

/// `(λ₁, λ₂) = ((v−σ)/(1−vσ), (v+σ)/(1+vσ))`.
pub fn characteristic_speeds(eos: &EquationOfState, state: &FluidState) -> Result<(f64, f64)> {
    let sigma = eos.sound_speed(state.rho())?;
    let v = state.v();
    Ok(((v - sigma) / (1.0 - v * sigma), (v + sigma) / (1.0 + v * sigma)))
}

/// Lax classification of an RH-consistent jump.
pub fn lax_classify(
    eos: &EquationOfState,
    left: &FluidState,
    right: &FluidState,
    s: f64,
) -> Result<ShockFamily> {
    if left == right {
        return Ok(ShockFamily::Degenerate);
    }
    let r = rh_residual(eos, left, right, s)?;
    let residual = r[0].abs().max(r[1].abs());
    let tolerance = RH_TOL * rh_scale(eos, left, right)?.max(1.0);
    if !(residual <= tolerance) {
        return Err(Error::NotAJump {
            residual,
            tolerance,
        });
    }
    let (l1_l, l2_l) = characteristic_speeds(eos, left)?;
    let (l1_r, l2_r) = characteristic_speeds(eos, right)?;
    let le = |a: f64, b: f64| a <= b + LAX_TOL;
    if le(l1_r, s) && le(s, l1_l) && le(s, l2_r) {
        Ok(ShockFamily::Shock1)
    } else if le(l2_r, s) && le(s, l2_l) && le(l1_l, s) {
        Ok(ShockFamily::Shock2)
    } else {
        Ok(ShockFamily::Inadmissible)
    }
}

/// Scalar Hugoniot residual `[T01]² − [T00][T11]` as a function of `ρ_R`,
/// with its derivative.
struct HugoniotResidual<'a> {
    eos: &'a EquationOfState,
    left: StressTensor,
    u_r: f64,
}

impl HugoniotResidual<'_> {
    fn jump(&self, rho: f64) -> StressTensor {
        let p = self.eos.pressure_unchecked(rho);
        self.left - kinematics::stress_tensor_with_pressure(rho, p, self.u_r)
    }

    fn value(&self, rho: f64) -> f64 {
        let j = self.jump(rho);
        j.t01 * j.t01 - j.t00 * j.t11
    }

    fn derivative(&self, rho: f64) -> f64 {
        let j = self.jump(rho);
        let dp = self.eos.dp_drho_unchecked(rho);
        let u = self.u_r;
        let u0sq = 1.0 + u * u;
        // d/dρ of the right-state components; the jump carries a minus sign.
        let d00 = (1.0 + dp) * u0sq - dp;
        let d01 = (1.0 + dp) * u0sq.sqrt() * u;
        let d11 = (1.0 + dp) * u * u + dp;
        -2.0 * j.t01 * d01 + d00 * j.t11 + j.t00 * d11
    }
}

fn log_probes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * (k as f64 + 0.5) / n as f64).exp())
        .collect()
}

/// Bisect `f` on `[a, b]` (sign change assumed) to relative width `rel`,
/// then polish with guarded Newton steps.
fn bisect_polish(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    rel: f64,
) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= rel * a.abs().max(b.abs()) {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    let width = (b - a).abs().max(f64::EPSILON * x.abs());
    let mut fx = f(x);
    for _ in 0..4 {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let cand = x - fx / d;
        if (cand - x).abs() > 4.0 * width {
            break;
        }
        let fc = f(cand);
        if fc.abs() >= fx.abs() {
            break;
        }
        x = cand;
        fx = fc;
    }
    x
}

/// All densities `ρ_R` in the EOS interval for which `(ρ_R, u_R)` lies on
/// the Hugoniot locus of `left`, in increasing order.
pub fn hugoniot_roots(eos: &EquationOfState, left: &FluidState, u_r: f64) -> Result<Vec<f64>> {
    let f = HugoniotResidual {
        eos,
        left: stress_tensor(eos, left)?,
        u_r,
    };
    let (lo, hi) = eos.interval();
    // ρ_L separates the two curves' roots when the jump is weak.
    let mut probes = log_probes(lo, hi, BRACKET_PROBES);
    if eos.contains(left.rho()) {
        let at = probes.partition_point(|&r| r < left.rho());
        if probes.get(at) != Some(&left.rho()) {
            probes.insert(at, left.rho());
        }
    }
    let values: Vec<f64> = probes.iter().map(|&r| f.value(r)).collect();
    let mut roots = Vec::new();
    for k in 0..probes.len() - 1 {
        let (fa, fb) = (values[k], values[k + 1]);
        if fa == 0.0 {
            roots.push(probes[k]);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            roots.push(bisect_polish(
                |r| f.value(r),
                |r| f.derivative(r),
                probes[k],
                probes[k + 1],
                1e-12,
            ));
        }
    }
    if values.last() == Some(&0.0) {
        roots.push(*probes.last().unwrap());
    }
    Ok(roots)
}

/// Solve for the right state with velocity `u_R` on the chosen Hugoniot
/// curve through `left`, with its shock speed and Lax family.
pub fn hugoniot_solve(
    eos: &EquationOfState,
    left: &FluidState,
    u_r: f64,
    branch: HugoniotBranch,
) -> Result<ShockData> {
    if u_r == left.u() {
        return Err(Error::Domain("u_R must differ from u_L".into()));
    }
    let roots = hugoniot_roots(eos, left, u_r)?;
    let du = u_r - left.u();
    let rho_r = roots
        .into_iter()
        .filter(|&r| {
            let orient = (r - left.rho()) * du;
            match branch {
                HugoniotBranch::One => orient < 0.0,
                HugoniotBranch::Two => orient > 0.0,
            }
        })
        .min_by(|a, b| {
            (a - left.rho())
                .abs()
                .partial_cmp(&(b - left.rho()).abs())
                .unwrap()
        })
        .ok_or(Error::NoBracket { u_r })?;
    let right = make_state(rho_r, u_r)?;
    let tl = stress_tensor(eos, left)?;
    let jump = tl - stress_tensor(eos, &right)?;
    let scale = tl.max_abs().max(stress_tensor(eos, &right)?.max_abs());
    if jump.t00.abs() < DEGENERATE_TOL * scale {
        return Err(Error::DegenerateJump);
    }
    let s = jump.t01 / jump.t00;
    if !(s.abs() < 1.0) {
        return Err(Error::NoBracket { u_r });
    }
    ShockData::new(eos, *left, right, s)
}

/// The two shock-speed expressions `[T01]/[T00]` and `[T11]/[T10]`.
pub fn shock_speed_pair(
    eos: &EquationOfState,
    left: &FluidState,
    right: &FluidState,
) -> Result<(f64, f64)> {
    let j = stress_tensor(eos, left)? - stress_tensor(eos, right)?;
    Ok((j.t01 / j.t00, j.t11 / j.t10()))
}

/// Partner state of `left` across a standing (`s = 0`) shock: the non-trivial
/// solution of `[T01] = 0 = [T11]`.
pub fn standing_shock_partner(eos: &EquationOfState, left: &FluidState) -> Result<FluidState> {
    let tl = stress_tensor(eos, left)?;
    let m = tl.t01;
    if m == 0.0 {
        return Err(Error::Domain("left state at rest has no standing-shock partner".into()));
    }
    // Given ρ, [T01] = 0 fixes u: u²(1+u²) = (m/w)², sign(u) = sign(m).
    let velocity = |rho: f64| {
        let w = eos.pressure_unchecked(rho) + rho;
        let q = m / w;
        let u2 = 2.0 * q * q / (1.0 + (1.0 + 4.0 * q * q).sqrt());
        u2.sqrt().copysign(m)
    };
    let g = |rho: f64| {
        let p = eos.pressure_unchecked(rho);
        let u = velocity(rho);
        (p + rho) * u * u + p - tl.t11
    };
    // g vanishes at ρ_L; deflate that root before bracketing.
    let rho_l = left.rho();
    let h = |rho: f64| g(rho) / (rho - rho_l);
    let (lo, hi) = eos.interval();
    let probes: Vec<f64> = log_probes(lo, hi, BRACKET_PROBES)
        .into_iter()
        .filter(|r| ((r - rho_l) / rho_l).abs() > 1e-6)
        .collect();
    for w in probes.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a < rho_l && b > rho_l {
            continue;
        }
        if h(a).signum() != h(b).signum() {
            let dh = |r: f64| {
                let e = 1e-7 * r;
                (h(r + e) - h(r - e)) / (2.0 * e)
            };
            let rho_r = bisect_polish(h, dh, a, b, 1e-13);
            return make_state(rho_r, velocity(rho_r));
        }
    }
    Err(Error::NoBracket { u_r: f64::NAN })
}
