use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{config_err, Result};
use crate::min_solvers::{self, MinSolverParams, RegMinParams};
use crate::minimax_solvers::{self, MinimaxSolverParams, PpmParams, RegMinimaxParams, StepPolicy, Stepsize};
use crate::oracles::{OracleKind, OracleSpec};
use crate::problems::{Instance, InstanceDoc};
use crate::run::Schedule;

use super::channel_accepts;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Two independent runs that differ in the perturbation channel.
    TwoRun,
    /// An exact run (`delta = 0`) against a perturbed one, all seeds shared.
    ReferenceRun,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Initialization,
    DeterministicGradient,
    StochasticGradient,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Initialization => "initialization",
            Channel::DeterministicGradient => "deterministic_gradient",
            Channel::StochasticGradient => "stochastic_gradient",
        }
    }
}

/// How the reference point `u0` is chosen.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    #[default]
    Origin,
    /// Uniform on the sphere of the given radius; per block for minimax.
    Sphere { radius: f64 },
    /// Explicit flattened coordinates.
    Point { point: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScscParams {
    pub iters: usize,
    #[serde(default)]
    pub schedule: Schedule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InexactAgdParams {
    /// Strong convexity used for the momentum; the problem's modulus when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stepsize: Option<f64>,
    pub iters: usize,
    #[serde(default)]
    pub schedule: Schedule,
}

impl InexactAgdParams {
    pub fn solver(&self) -> MinSolverParams {
        MinSolverParams { stepsize: self.stepsize, iters: self.iters, schedule: self.schedule.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AlgoSpec {
    Gd(MinSolverParams),
    Agd(MinSolverParams),
    InexactAgd(InexactAgdParams),
    RegMin(RegMinParams),
    Gda(MinimaxSolverParams),
    Sgda(MinimaxSolverParams),
    Eg(MinimaxSolverParams),
    InexactGdaScsc(ScscParams),
    InexactEgScsc(ScscParams),
    RegMinimax(RegMinimaxParams),
    InexactPpm(PpmParams),
}

impl AlgoSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgoSpec::Gd(_) => "gd",
            AlgoSpec::Agd(_) => "agd",
            AlgoSpec::InexactAgd(_) => "inexact_agd",
            AlgoSpec::RegMin(_) => "reg_min",
            AlgoSpec::Gda(_) => "gda",
            AlgoSpec::Sgda(_) => "sgda",
            AlgoSpec::Eg(_) => "eg",
            AlgoSpec::InexactGdaScsc(_) => "inexact_gda_scsc",
            AlgoSpec::InexactEgScsc(_) => "inexact_eg_scsc",
            AlgoSpec::RegMinimax(_) => "reg_minimax",
            AlgoSpec::InexactPpm(_) => "inexact_ppm",
        }
    }

    fn schedule_mut(&mut self) -> &mut Schedule {
        match self {
            AlgoSpec::Gd(p) | AlgoSpec::Agd(p) => &mut p.schedule,
            AlgoSpec::InexactAgd(p) => &mut p.schedule,
            AlgoSpec::RegMin(p) => &mut p.schedule,
            AlgoSpec::Gda(p) | AlgoSpec::Sgda(p) | AlgoSpec::Eg(p) => &mut p.schedule,
            AlgoSpec::InexactGdaScsc(p) | AlgoSpec::InexactEgScsc(p) => &mut p.schedule,
            AlgoSpec::RegMinimax(p) => &mut p.schedule,
            AlgoSpec::InexactPpm(p) => &mut p.schedule,
        }
    }
}

/// Parameter presets from the convergence theory, filled in from the
/// configured `delta` and the problem's `l` and domain diameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Preset {
    /// `r` and `eps_r` of the regularized frameworks under an inexact
    /// initialization.
    RegInit { eps: f64 },
    /// `r` and `eps_r` of the minimization framework under inexact gradients.
    RegGrad { eps: f64 },
    /// `alpha = 1/l` and `eps_hat = delta^2 / (2 alpha T^2)`.
    PpmInit,
    /// `1 / (l eps T)` for GDA or SGDA.
    SgdaStep { eps: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoEntry {
    /// Display name in reports; the algorithm name when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(flatten)]
    pub algo: AlgoSpec,
}

impl AlgoEntry {
    pub fn new(label: &str, algo: AlgoSpec) -> Self {
        Self { label: Some(label.to_string()), preset: None, algo }
    }

    pub fn with_preset(mut self, preset: Preset) -> Self {
        self.preset = Some(preset);
        self
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.algo.name().to_string())
    }

    /// The concrete algorithm after schedule override and preset.
    pub fn resolve(&self, config: &ExperimentConfig, instance: &Instance) -> Result<AlgoSpec> {
        let mut algo = self.algo.clone();
        if let Some(schedule) = &config.schedule {
            *algo.schedule_mut() = schedule.clone();
        }
        let Some(preset) = &self.preset else {
            return Ok(algo);
        };
        let delta = config.oracle.delta;
        let (ell, diameter) = match instance {
            Instance::Min(p) => (p.ell(), p.domain().diameter()),
            Instance::Minimax(p) => (p.ell(), p.dom_x().diameter().zip(p.dom_y().diameter()).map(|(a, b)| a.max(b))),
        };
        let diameter = || match diameter {
            Some(d) if d.is_finite() => Ok(d),
            _ => config_err("theory presets need a bounded domain"),
        };
        match (preset, &mut algo) {
            (Preset::RegInit { eps }, AlgoSpec::RegMin(p)) => {
                (p.r, p.eps_r) = min_solvers::presets::reg_min_init(*eps, delta, diameter()?);
            }
            (Preset::RegGrad { eps }, AlgoSpec::RegMin(p)) => {
                (p.r, p.eps_r) = min_solvers::presets::reg_min_grad(*eps, delta, diameter()?, ell);
            }
            (Preset::RegInit { eps }, AlgoSpec::RegMinimax(p)) => {
                (p.r, p.eps_r) = minimax_solvers::presets::reg_minimax_init(*eps, delta, diameter()?);
            }
            (Preset::PpmInit, AlgoSpec::InexactPpm(p)) => {
                (p.alpha, p.eps_hat) = minimax_solvers::presets::ppm_init(ell, delta, p.outer_iters);
            }
            (Preset::SgdaStep { eps }, AlgoSpec::Gda(p) | AlgoSpec::Sgda(p)) => {
                p.eps = Some(*eps);
                p.stepsize = Stepsize::Policy(StepPolicy::Sgda);
            }
            (preset, algo) => {
                return config_err(format!("preset {preset:?} does not apply to {}", algo.name()));
            }
        }
        Ok(algo)
    }
}

fn default_master_seed() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    /// The instance seed is combined with the master seed.
    pub problem: InstanceDoc,
    /// The seed field is ignored; run seeds come from the master seed.
    pub oracle: OracleSpec,
    pub algorithms: Vec<AlgoEntry>,
    pub protocol: Protocol,
    pub channel: Channel,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    /// Pairs per algorithm; 32 for the stochastic channel and 1 otherwise
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeats: Option<usize>,
    #[serde(default)]
    pub init: InitSpec,
    /// Overrides every algorithm's checkpoint schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| crate::Error::Config(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Parses `text`, applies `key=value` overrides on dotted paths and
    /// type-checks the result.
    pub fn from_json_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| crate::Error::Config(format!("config: {e}")))?;
        for (key, raw) in overrides {
            apply_override(&mut value, key, raw)?;
        }
        let config: Self =
            serde_json::from_value(value).map_err(|e| crate::Error::Config(format!("config after overrides: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn repeat_count(&self) -> usize {
        self.repeats.unwrap_or(if self.channel == Channel::StochasticGradient { 32 } else { 1 })
    }

    pub fn validate(&self) -> Result<()> {
        self.oracle.validate()?;
        if self.algorithms.is_empty() {
            return config_err("config lists no algorithms");
        }
        if self.repeat_count() == 0 {
            return config_err("repeats must be at least 1");
        }
        if !channel_accepts(self.channel, self.oracle.kind) {
            return config_err(format!(
                "oracle kind {:?} does not perturb the {} channel",
                self.oracle.kind,
                self.channel.as_str()
            ));
        }
        if self.oracle.kind == OracleKind::Exact && self.oracle.delta != 0.0 {
            return config_err("an exact oracle must have delta = 0");
        }
        if let InitSpec::Sphere { radius } = self.init {
            if !(radius >= 0.0 && radius.is_finite()) {
                return config_err(format!("init sphere radius must be finite and nonnegative, got {radius}"));
            }
        }
        if let Some(s) = &self.schedule {
            s.validate()?;
        }
        Ok(())
    }
}

/// Sets the dotted path `key` (array indices as numbers) to `raw`, parsed as
/// JSON when possible and as a string otherwise.
pub fn apply_override(root: &mut Value, key: &str, raw: &str) -> Result<()> {
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), parsed);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let Ok(idx) = part.parse::<usize>() else {
                    return config_err(format!("override {key}: '{part}' is not an array index"));
                };
                let len = items.len();
                let Some(slot) = items.get_mut(idx) else {
                    return config_err(format!("override {key}: index {idx} out of range (length {len})"));
                };
                if last {
                    *slot = parsed;
                    return Ok(());
                }
                slot
            }
            _ => return config_err(format!("override {key}: '{part}' is not inside an object or array")),
        };
    }
    config_err(format!("override key '{key}' is empty"))
}
