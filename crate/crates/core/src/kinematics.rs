//! Fluid states, boosts and the perfect-fluid stress tensor in 1+1 dimensions.
//!
//! Units have `c = 1` and the metric is `diag(-1, 1)`. A state stores the
//! spatial four-velocity component `u = u¹`; the time component
//! `u⁰ = √(1 + u²)` is derived, so `u^σ u_σ = -1` holds by construction.

use serde::{Deserialize, Serialize};

use crate::eos::EquationOfState;
use crate::error::{Error, Result};

/// Density and spatial four-velocity of a fluid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateSpec", into = "StateSpec")]
pub struct FluidState {
    rho: f64,
    u: f64,
}

/// Wire form `{"rho": …, "u": …}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub rho: f64,
    pub u: f64,
}

impl TryFrom<StateSpec> for FluidState {
    type Error = Error;
    fn try_from(s: StateSpec) -> Result<Self> {
        make_state(s.rho, s.u)
    }
}

impl From<FluidState> for StateSpec {
    fn from(s: FluidState) -> Self {
        StateSpec { rho: s.rho, u: s.u }
    }
}

pub fn make_state(rho: f64, u: f64) -> Result<FluidState> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("density must be finite and > 0, got {rho}")));
    }
    if !u.is_finite() {
        return Err(Error::Domain(format!("velocity must be finite, got {u}")));
    }
    Ok(FluidState { rho, u })
}

impl FluidState {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Spatial component `u¹`.
    pub fn u(&self) -> f64 {
        self.u
    }

    /// Time component `u⁰ = √(1 + u²)`.
    pub fn u0(&self) -> f64 {
        time_component(self.u)
    }

    /// Classical velocity `v = u / √(1 + u²)`.
    pub fn v(&self) -> f64 {
        classical_velocity(self.u)
    }

    pub fn lorentz_factor(&self) -> f64 {
        self.u0()
    }
}

#[inline]
pub fn time_component(u: f64) -> f64 {
    u.mul_add(u, 1.0).sqrt()
}

#[inline]
pub fn classical_velocity(u: f64) -> f64 {
    u / time_component(u)
}

/// Inverse of [`classical_velocity`]: `u = v / √(1 - v²)`.
#[inline]
pub fn four_velocity_from_v(v: f64) -> f64 {
    v / ((1.0 - v) * (1.0 + v)).sqrt()
}

/// `γ = (1 - β²)^{-1/2}`.
#[inline]
pub fn gamma(beta: f64) -> f64 {
    1.0 / ((1.0 - beta) * (1.0 + beta)).sqrt()
}

/// Components `T⁰⁰, T⁰¹, T¹¹` of a symmetric 2-tensor in 1+1D.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StressTensor {
    pub t00: f64,
    pub t01: f64,
    pub t11: f64,
}

impl StressTensor {
    pub fn t10(&self) -> f64 {
        self.t01
    }

    /// `T00·T11 − T01²`, a Lorentz scalar in 1+1D. Equals `p·ρ` for a
    /// perfect fluid.
    pub fn determinant(&self) -> f64 {
        self.t00 * self.t11 - self.t01 * self.t01
    }

    /// Contraction `T^{μν} ζ_ν` with `ζ_ν = (-s, 1)`.
    pub fn contract_normal(&self, s: f64) -> [f64; 2] {
        [-s * self.t00 + self.t01, -s * self.t01 + self.t11]
    }

    pub fn max_abs(&self) -> f64 {
        self.t00.abs().max(self.t01.abs()).max(self.t11.abs())
    }
}

impl std::ops::Sub for StressTensor {
    type Output = StressTensor;
    fn sub(self, o: StressTensor) -> StressTensor {
        StressTensor {
            t00: self.t00 - o.t00,
            t01: self.t01 - o.t01,
            t11: self.t11 - o.t11,
        }
    }
}

/// Perfect-fluid tensor `(p+ρ) u^μ u^ν + p η^{μν}`.
pub fn stress_tensor(eos: &EquationOfState, state: &FluidState) -> Result<StressTensor> {
    let p = eos.pressure(state.rho)?;
    Ok(stress_tensor_with_pressure(state.rho, p, state.u))
}

pub(crate) fn stress_tensor_with_pressure(rho: f64, p: f64, u: f64) -> StressTensor {
    let w = p + rho;
    let u0 = time_component(u);
    StressTensor {
        t00: w * u0 * u0 - p,
        t01: w * u0 * u,
        t11: w * u * u + p,
    }
}

/// Relativistic velocity addition: velocity `v̄` seen from a frame moving
/// with velocity `s`.
pub fn velocity_add(v_bar: f64, s: f64) -> f64 {
    (v_bar - s) / (1.0 - s * v_bar)
}

/// Re-express a state in the frame moving with velocity `β` along `+x`.
pub fn boost_state(state: &FluidState, beta: f64) -> FluidState {
    FluidState {
        rho: state.rho,
        u: boost_velocity(state.u, beta),
    }
}

/// `u' = γ(u − β u⁰)`.
#[inline]
pub fn boost_velocity(u: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return u;
    }
    gamma(beta) * (u - beta * time_component(u))
}

/// `T' = Λ T Λᵀ` with `Λ = γ [[1, −β], [−β, 1]]`.
pub fn boost_tensor(t: &StressTensor, beta: f64) -> StressTensor {
    if beta == 0.0 {
        return *t;
    }
    let g2 = {
        let g = gamma(beta);
        g * g
    };
    let b = beta;
    StressTensor {
        t00: g2 * (t.t00 - 2.0 * b * t.t01 + b * b * t.t11),
        t01: g2 * ((1.0 + b * b) * t.t01 - b * (t.t00 + t.t11)),
        t11: g2 * (b * b * t.t00 - 2.0 * b * t.t01 + t.t11),
    }
}

/// Boost a contravariant 2-vector `(a⁰, a¹)`.
pub fn boost_vector(a: [f64; 2], beta: f64) -> [f64; 2] {
    let g = gamma(beta);
    [g * (a[0] - beta * a[1]), g * (a[1] - beta * a[0])]
}
