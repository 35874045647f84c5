//! Run configurations and their validation.

use rav_core::dispersion::LinearizationParams;
use rav_core::fields::{ClassicalTarget, GaussianBump, SineWaves};
use rav_core::kinematics::{make_state, StateSpec};
use rav_core::{EosKind, EosSpec, EquationOfState, FluidState, HugoniotBranch};
use serde::{Deserialize, Serialize};

/// A validation failure tied to a config field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

type Check<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum RunConfig {
    Dispersion(DispersionConfig),
    Hugoniot(HugoniotConfig),
    Profile(ProfileConfig),
    Evolve(EvolveConfig),
    Verify(VerifyConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Dispersion(_) => "dispersion",
            RunConfig::Hugoniot(_) => "hugoniot",
            RunConfig::Profile(_) => "profile",
            RunConfig::Evolve(_) => "evolve",
            RunConfig::Verify(_) => "verify",
        }
    }

    fn common_mut(&mut self) -> (&mut Option<String>, &mut Option<u64>) {
        match self {
            RunConfig::Dispersion(c) => (&mut c.out, &mut c.seed),
            RunConfig::Hugoniot(c) => (&mut c.out, &mut c.seed),
            RunConfig::Profile(c) => (&mut c.out, &mut c.seed),
            RunConfig::Evolve(c) => (&mut c.out, &mut c.seed),
            RunConfig::Verify(c) => (&mut c.out, &mut c.seed),
        }
    }

    /// Apply command-line overrides and fill defaults, returning the output
    /// prefix and seed.
    pub fn resolve(&mut self, out: Option<String>, seed: Option<u64>) -> (String, u64) {
        let (o, s) = self.common_mut();
        if out.is_some() {
            *o = out;
        }
        if seed.is_some() {
            *s = seed;
        }
        let prefix = o.get_or_insert_with(|| "rav_out".to_string()).clone();
        let seed = *s.get_or_insert(0);
        (prefix, seed)
    }
}

/// Evenly spaced, log-spaced or log-uniform random sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
    pub n: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
    Random,
}

impl Sweep {
    fn validate(&self, field: &str) -> Check<()> {
        if self.n == 0 {
            return Err(ConfigError::new(format!("{field}.n"), "must be at least 1"));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.max >= self.min) {
            return Err(ConfigError::new(format!("{field}.max"), "sweep needs finite min <= max"));
        }
        if self.spacing != Spacing::Linear && !(self.min > 0.0) {
            return Err(ConfigError::new(format!("{field}.min"), "log and random spacing need min > 0"));
        }
        Ok(())
    }

    pub fn points(&self, rng: &mut impl rand::Rng) -> Vec<f64> {
        let n = self.n;
        let frac = |k: usize| if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
        match self.spacing {
            Spacing::Linear => (0..n).map(|k| self.min + (self.max - self.min) * frac(k)).collect(),
            Spacing::Log => {
                let (a, b) = (self.min.ln(), self.max.ln());
                (0..n).map(|k| (a + (b - a) * frac(k)).exp()).collect()
            }
            Spacing::Random => {
                let (a, b) = (self.min.ln(), self.max.ln());
                (0..n).map(|_| (a + (b - a) * rng.random::<f64>()).exp()).collect()
            }
        }
    }
}

pub fn validate_eos(spec: &EosSpec) -> Check<EquationOfState> {
    match spec.kind {
        EosKind::Isothermal { sigma } => {
            if !(sigma > 0.0 && sigma < 1.0) {
                return Err(ConfigError::new("eos.sigma", format!("must lie in (0, 1), got {sigma}")));
            }
        }
        EosKind::Polytropic { k, gamma } => {
            if !(k > 0.0 && k.is_finite()) {
                return Err(ConfigError::new("eos.K", format!("must be finite and > 0, got {k}")));
            }
            if !(gamma > 1.0 && gamma.is_finite()) {
                return Err(ConfigError::new("eos.gamma", format!("must be finite and > 1, got {gamma}")));
            }
        }
    }
    EquationOfState::from_spec(spec).map_err(|e| ConfigError::new("eos", e.to_string()))
}

pub fn validate_state(eos: &EquationOfState, s: &StateSpec, field: &str) -> Check<FluidState> {
    if !eos.contains(s.rho) {
        let (lo, hi) = eos.interval();
        return Err(ConfigError::new(
            format!("{field}.rho"),
            format!("{} outside the EOS interval ({lo}, {hi})", s.rho),
        ));
    }
    make_state(s.rho, s.u).map_err(|e| ConfigError::new(format!("{field}.u"), e.to_string()))
}

fn positive(x: f64, field: &str) -> Check<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::new(field, format!("must be finite and > 0, got {x}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eos: Option<EosSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_tilde: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl DispersionConfig {
    pub fn params(&self) -> Check<LinearizationParams> {
        match (&self.eos, self.kappa_tilde, self.sigma) {
            (Some(spec), None, None) => {
                let eos = validate_eos(spec)?;
                let rho0 = self.rho0.ok_or_else(|| ConfigError::new("rho0", "required with eos"))?;
                if !eos.contains(rho0) {
                    return Err(ConfigError::new("rho0", format!("{rho0} outside the EOS interval")));
                }
                let eps = positive(
                    self.epsilon.ok_or_else(|| ConfigError::new("epsilon", "required with eos"))?,
                    "epsilon",
                )?;
                LinearizationParams::from_eos(&eos, rho0, eps).map_err(|e| ConfigError::new("eos", e.to_string()))
            }
            (None, Some(kt), Some(sigma)) => {
                positive(kt, "kappa_tilde")?;
                if !(sigma > 0.0 && sigma < 1.0) {
                    return Err(ConfigError::new("sigma", format!("must lie in (0, 1), got {sigma}")));
                }
                LinearizationParams::from_reduced(kt, sigma).map_err(|e| ConfigError::new("kappa_tilde", e.to_string()))
            }
            (None, _, None) => Err(ConfigError::new("sigma", "give either eos or kappa_tilde and sigma")),
            (None, None, _) => Err(ConfigError::new("kappa_tilde", "give either eos or kappa_tilde and sigma")),
            _ => Err(ConfigError::new("eos", "give either eos or kappa_tilde and sigma, not both")),
        }
    }

    pub fn wave_numbers(&self, rng: &mut impl rand::Rng) -> Check<Vec<f64>> {
        match (&self.xi, &self.sweep) {
            (Some(list), None) => {
                for (i, &x) in list.iter().enumerate() {
                    if !(x >= 0.0 && x.is_finite()) {
                        return Err(ConfigError::new(format!("xi[{i}]"), format!("must be finite and >= 0, got {x}")));
                    }
                }
                Ok(list.clone())
            }
            (None, Some(s)) => {
                s.validate("sweep")?;
                if !(s.min >= 0.0) {
                    return Err(ConfigError::new("sweep.min", "wave numbers must be >= 0"));
                }
                Ok(s.points(rng))
            }
            _ => Err(ConfigError::new("xi", "give exactly one of xi or sweep")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HugoniotConfig {
    pub eos: EosSpec,
    pub left: StateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_r: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub branch: HugoniotBranch,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl HugoniotConfig {
    pub fn velocities(&self, rng: &mut impl rand::Rng) -> Check<Vec<f64>> {
        match (&self.u_r, &self.sweep) {
            (Some(list), None) => {
                if let Some(i) = list.iter().position(|x| !x.is_finite()) {
                    return Err(ConfigError::new(format!("u_r[{i}]"), "must be finite"));
                }
                Ok(list.clone())
            }
            (None, Some(s)) => {
                s.validate("sweep")?;
                Ok(s.points(rng))
            }
            _ => Err(ConfigError::new("u_r", "give exactly one of u_r or sweep")),
        }
    }
}

pub const DEFAULT_PROFILE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub eos: EosSpec,
    pub left: StateSpec,
    pub u_r: f64,
    #[serde(default)]
    pub branch: HugoniotBranch,
    /// Swap the two states of the solved jump before integrating.
    #[serde(default)]
    pub reverse: bool,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub boundary: BoundaryKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialData {
    Constant {
        rho: f64,
        u: f64,
    },
    /// Sum of `modes` Fourier modes with seeded random phases on a constant
    /// state; periodic grids only.
    Perturbation {
        rho: f64,
        u: f64,
        amplitude: f64,
        #[serde(default = "one")]
        modes: usize,
    },
    /// Traveling-wave profile of the jump from `left` to `u_r`.
    Profile {
        left: StateSpec,
        u_r: f64,
        #[serde(default)]
        branch: HugoniotBranch,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub eos: EosSpec,
    pub epsilon: f64,
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
    pub initial: InitialData,
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl EvolveConfig {
    pub fn validate(&self) -> Check<()> {
        positive(self.epsilon, "epsilon")?;
        if self.grid.n < rav_core::fields::MIN_NODES {
            return Err(ConfigError::new("grid.n", format!("must be at least {}", rav_core::fields::MIN_NODES)));
        }
        if !(self.grid.x_max > self.grid.x_min) {
            return Err(ConfigError::new("grid.x_max", "must exceed grid.x_min"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(ConfigError::new("t_end", "must be finite and >= 0"));
        }
        if let Some(dt) = self.dt {
            positive(dt, "dt")?;
        }
        match (&self.initial, self.grid.boundary) {
            (InitialData::Perturbation { .. }, BoundaryKind::Dirichlet) => {
                Err(ConfigError::new("grid.boundary", "perturbation runs need a periodic grid"))
            }
            (InitialData::Profile { .. }, BoundaryKind::Periodic) => {
                Err(ConfigError::new("grid.boundary", "profile runs need a dirichlet grid"))
            }
            (InitialData::Perturbation { amplitude, modes, .. }, _) if !(amplitude.is_finite() && *modes >= 1) => {
                Err(ConfigError::new("initial.amplitude", "needs a finite amplitude and modes >= 1"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyCheck {
    Covariance,
    ClassicalLimit,
}

impl VerifyCheck {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "covariance" => Some(Self::Covariance),
            "classical-limit" | "classical_limit" => Some(Self::ClassicalLimit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<VerifyCheck>,
    pub eos: EosSpec,
    pub epsilon: f64,
    /// Boost velocities; random ones are appended when `random_betas > 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default)]
    pub random_betas: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_range: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<GaussianBump>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waves: Option<SineWaves>,
    #[serde(default)]
    pub target: ClassicalTarget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}
