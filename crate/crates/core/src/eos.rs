//! Barotropic equations of state `p = p(ρ)` with subluminal sound speed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Margin kept below the speed of light when shrinking polytropic intervals.
pub const SUBLUMINAL_MARGIN: f64 = 1e-9;

const DEFAULT_RHO_MIN: f64 = 1e-8;
const DEFAULT_RHO_MAX: f64 = 1e8;

/// Pressure law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EosKind {
    /// `p = σ² ρ`.
    Isothermal { sigma: f64 },
    /// `p = K ρ^γ`.
    Polytropic {
        #[serde(rename = "K")]
        k: f64,
        gamma: f64,
    },
}

/// Serialized form of an equation of state as it appears in run configs:
/// `{"kind":"isothermal","sigma":0.5}` or
/// `{"kind":"polytropic","K":1.0,"gamma":2.0}`, with optional
/// `rho_min` / `rho_max` bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EosSpec {
    #[serde(flatten)]
    pub kind: EosKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_max: Option<f64>,
}

/// A validated barotropic EOS together with the open density interval
/// `(rho_min, rho_max)` on which `dp/dρ > 0` and `0 < σ < 1` hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationOfState {
    kind: EosKind,
    rho_min: f64,
    rho_max: f64,
}

impl EquationOfState {
    pub fn isothermal(sigma: f64) -> Result<Self> {
        Self::from_spec(&EosSpec {
            kind: EosKind::Isothermal { sigma },
            rho_min: None,
            rho_max: None,
        })
    }

    pub fn polytropic(k: f64, gamma: f64) -> Result<Self> {
        Self::from_spec(&EosSpec {
            kind: EosKind::Polytropic { k, gamma },
            rho_min: None,
            rho_max: None,
        })
    }

    /// Validate a spec. Polytropic upper bounds are shrunk so that
    /// `σ(ρ) ≤ 1 - SUBLUMINAL_MARGIN` on the whole interval.
    pub fn from_spec(spec: &EosSpec) -> Result<Self> {
        let rho_min = spec.rho_min.unwrap_or(DEFAULT_RHO_MIN);
        if !(rho_min.is_finite() && rho_min > 0.0) {
            return Err(Error::Domain(format!("rho_min must be finite and > 0, got {rho_min}")));
        }
        let user_max = spec.rho_max.unwrap_or(f64::INFINITY);
        if user_max.is_nan() {
            return Err(Error::Domain("rho_max is NaN".into()));
        }
        let rho_max = match spec.kind {
            EosKind::Isothermal { sigma } => {
                if !(sigma > 0.0 && sigma < 1.0) {
                    return Err(Error::Domain(format!("sigma must lie in (0, 1), got {sigma}")));
                }
                spec.rho_max.unwrap_or(DEFAULT_RHO_MAX)
            }
            EosKind::Polytropic { k, gamma } => {
                if !(k > 0.0 && k.is_finite()) {
                    return Err(Error::Domain(format!("K must be finite and > 0, got {k}")));
                }
                if !(gamma > 1.0 && gamma.is_finite()) {
                    return Err(Error::Domain(format!("gamma must be finite and > 1, got {gamma}")));
                }
                let c2 = (1.0 - SUBLUMINAL_MARGIN).powi(2);
                let cap = (c2 / (k * gamma)).powf(1.0 / (gamma - 1.0));
                user_max.min(cap)
            }
        };
        if !(rho_max > rho_min) {
            return Err(Error::Domain(format!(
                "empty validity interval ({rho_min}, {rho_max})"
            )));
        }
        Ok(Self {
            kind: spec.kind,
            rho_min,
            rho_max,
        })
    }

    pub fn kind(&self) -> EosKind {
        self.kind
    }

    pub fn spec(&self) -> EosSpec {
        EosSpec {
            kind: self.kind,
            rho_min: Some(self.rho_min),
            rho_max: Some(self.rho_max),
        }
    }

    /// Open validity interval `(rho_min, rho_max)`.
    pub fn interval(&self) -> (f64, f64) {
        (self.rho_min, self.rho_max)
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho > self.rho_min && rho < self.rho_max
    }

    fn check(&self, rho: f64) -> Result<()> {
        if self.contains(rho) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "density {rho} outside validity interval ({}, {})",
                self.rho_min, self.rho_max
            )))
        }
    }

    pub fn pressure(&self, rho: f64) -> Result<f64> {
        self.check(rho)?;
        Ok(self.pressure_unchecked(rho))
    }

    /// `dp/dρ = σ²`.
    pub fn dp_drho(&self, rho: f64) -> Result<f64> {
        self.check(rho)?;
        Ok(self.dp_drho_unchecked(rho))
    }

    pub fn sound_speed(&self, rho: f64) -> Result<f64> {
        let sigma = self.dp_drho(rho)?.sqrt();
        if sigma >= 1.0 {
            return Err(Error::Domain(format!("superluminal sound speed {sigma} at rho = {rho}")));
        }
        Ok(sigma)
    }

    pub(crate) fn pressure_unchecked(&self, rho: f64) -> f64 {
        match self.kind {
            EosKind::Isothermal { sigma } => sigma * sigma * rho,
            EosKind::Polytropic { k, gamma } => k * rho.powf(gamma),
        }
    }

    pub(crate) fn dp_drho_unchecked(&self, rho: f64) -> f64 {
        match self.kind {
            EosKind::Isothermal { sigma } => sigma * sigma,
            EosKind::Polytropic { k, gamma } => k * gamma * rho.powf(gamma - 1.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn isothermal_pressure() {
        let eos = EquationOfState::isothermal(0.5).unwrap();
        assert_eq!(eos.pressure(1.0).unwrap(), 0.25);
        assert_eq!(eos.sound_speed(1.0).unwrap(), 0.5);
        assert_eq!(eos.sound_speed(37.0).unwrap(), 0.5);
    }

    #[test]
    fn polytropic_underflow_boundary() {
        let eos = EquationOfState::polytropic(1.0, 2.0).unwrap();
        assert!(matches!(eos.pressure(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn polytropic_sound_speed() {
        let eos = EquationOfState::polytropic(1.0, 2.0).unwrap();
        assert_eq!(eos.sound_speed(0.125).unwrap(), 0.5);
        // dp/dρ = 2ρ = 1.2 at ρ = 0.6 is superluminal and excluded.
        assert!(matches!(eos.sound_speed(0.6), Err(Error::Domain(_))));
        let (_, hi) = eos.interval();
        assert!(hi < 0.5 && hi > 0.5 * (1.0 - 3e-9));
    }

    #[test]
    fn polytropic_five_thirds() {
        // 0.1 * 2^(5/3), reference from a 50-digit evaluation.
        let expected = 0.317_480_210_393_639_89_f64;
        let eos = EquationOfState::polytropic(0.1, 5.0 / 3.0).unwrap();
        let p = eos.pressure(2.0).unwrap();
        assert!((p - expected).abs() <= 2e-16 * expected, "{p}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(EquationOfState::isothermal(1.0).is_err());
        assert!(EquationOfState::isothermal(0.0).is_err());
        assert!(EquationOfState::polytropic(1.0, 1.0).is_err());
        assert!(EquationOfState::polytropic(-1.0, 2.0).is_err());
    }

    #[test]
    fn config_format() {
        let spec: EosSpec = serde_json::from_str(r#"{"kind":"polytropic","K":1.0,"gamma":2.0}"#).unwrap();
        assert_eq!(spec.kind, EosKind::Polytropic { k: 1.0, gamma: 2.0 });
        let spec: EosSpec = serde_json::from_str(r#"{"kind":"isothermal","sigma":0.5}"#).unwrap();
        assert_eq!(spec.kind, EosKind::Isothermal { sigma: 0.5 });
        assert_eq!(spec.rho_min, None);
        let back: EosSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn sound_speed_matches_pressure_derivative(rho in 0.01f64..0.45, iso in any::<bool>()) {
            let eos = if iso {
                EquationOfState::isothermal(0.7).unwrap()
            } else {
                EquationOfState::polytropic(1.0, 2.0).unwrap()
            };
            let h = 1e-5 * rho;
            let fd = (eos.pressure(rho + h).unwrap() - eos.pressure(rho - h).unwrap()) / (2.0 * h);
            let s2 = eos.sound_speed(rho).unwrap().powi(2);
            prop_assert!(((s2 - fd) / s2).abs() < 1e-6);
        }

        #[test]
        fn pressure_is_monotone(a in 0.01f64..0.49, b in 0.01f64..0.49) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            for eos in [EquationOfState::isothermal(0.3).unwrap(), EquationOfState::polytropic(0.1, 5.0 / 3.0).unwrap()] {
                prop_assert!(eos.pressure(lo).unwrap() < eos.pressure(hi).unwrap());
            }
        }

        #[test]
        fn subluminal_everywhere(rho in 1e-6f64..0.4999) {
            let eos = EquationOfState::polytropic(1.0, 2.0).unwrap();
            let s = eos.sound_speed(rho).unwrap();
            prop_assert!(s > 0.0 && s < 1.0);
        }
    }
}
