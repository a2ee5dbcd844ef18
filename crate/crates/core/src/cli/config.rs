//! Run configuration, read from TOML. Unknown keys are rejected.

use crate::error::{Error, Result};
use crate::geometry::Worldline;
use crate::series::{McConfig, ModelParams};
use crate::smearing::{AdiabaticCutoff, Plateau, SmearingFunction, TestFunction2D};
use crate::states::StateW;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    K0,
    Identities,
    Energy,
    Qei,
    Conservation,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::K0 => "k0",
            Command::Identities => "identities",
            Command::Energy => "energy",
            Command::Qei => "qei",
            Command::Conservation => "conservation",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorldlineCfg {
    // braces so that unknown keys are rejected for this variant too
    Static {},
    Boosted { eta: f64 },
    Accelerated { a: f64 },
    Spline { knots: Vec<f64>, z1: Vec<f64> },
}

impl WorldlineCfg {
    pub fn build(&self) -> Result<Worldline> {
        match self {
            WorldlineCfg::Static {} => Ok(Worldline::static_line()),
            WorldlineCfg::Boosted { eta } => Ok(Worldline::boosted(*eta)),
            WorldlineCfg::Accelerated { a } => Worldline::accelerated(*a),
            WorldlineCfg::Spline { knots, z1 } => Worldline::spline(knots.clone(), z1.clone()),
        }
    }
}

fn zero() -> f64 {
    0.0
}
fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FCfg {
    Gaussian {
        sigma: f64,
        #[serde(default = "zero")]
        center: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Bump {
        radius: f64,
        #[serde(default = "zero")]
        center: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    HermiteGaussian {
        degree: u32,
        sigma: f64,
        #[serde(default = "zero")]
        center: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

impl FCfg {
    pub fn build(&self) -> Result<SmearingFunction> {
        let f = match *self {
            FCfg::Gaussian { sigma, center, amplitude } => SmearingFunction::gaussian(sigma).centered(center).scaled(amplitude),
            FCfg::Bump { radius, center, amplitude } => SmearingFunction::bump(radius).centered(center).scaled(amplitude),
            FCfg::HermiteGaussian { degree, sigma, center, amplitude } => SmearingFunction::hermite_gaussian(degree, sigma).centered(center).scaled(amplitude),
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GCfg {
    pub g0: f64,
    pub sigma: [f64; 2],
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau_half_width: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau_ramp: Option<[f64; 2]>,
}

impl GCfg {
    pub fn build(&self) -> Result<AdiabaticCutoff> {
        let mut g = AdiabaticCutoff::gaussian(self.g0, self.sigma[0], self.sigma[1]);
        g.center = self.center;
        g.plateau = match (self.plateau_half_width, self.plateau_ramp) {
            (None, None) => None,
            (Some(half_width), Some(ramp)) => Some(Plateau { half_width, ramp }),
            _ => return Err(Error::Config("[g] plateau_half_width and plateau_ramp must be given together".into())),
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateCfg {
    Vacuum {},
    ThermalWindow { e0: f64, e1: f64, b: f64 },
}

impl StateCfg {
    pub fn build(&self) -> Result<StateW> {
        match *self {
            StateCfg::Vacuum {} => Ok(StateW::Vacuum),
            StateCfg::ThermalWindow { e0, e1, b } => StateW::thermal_window(e0, e1, b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCfg {
    pub beta_sq: f64,
}

fn default_samples() -> usize {
    20_000
}
fn default_seed() -> u64 {
    1
}
fn default_ladder() -> Vec<f64> {
    vec![1e-2, 5e-3, 2.5e-3]
}
fn default_max_order() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McCfg {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<f64>,
    #[serde(default = "default_max_order")]
    pub max_order: usize,
    #[serde(default = "one")]
    pub mu: f64,
}

impl Default for McCfg {
    fn default() -> Self {
        McCfg { samples: default_samples(), seed: default_seed(), ladder: default_ladder(), max_order: default_max_order(), mu: 1.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputCfg {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

fn default_n_max() -> usize {
    32
}
fn default_configs() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesCfg {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_configs")]
    pub configurations: usize,
    /// Compare against a deliberately wrong closed form; the run must then fail.
    #[serde(default)]
    pub self_test: bool,
}

impl Default for IdentitiesCfg {
    fn default() -> Self {
        IdentitiesCfg { n_max: default_n_max(), configurations: default_configs(), self_test: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentCfg {
    U,
    V,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConservationCfg {
    /// Time profile of the spacetime test function.
    pub t: FCfg,
    /// Space profile.
    pub x: FCfg,
    #[serde(default = "both")]
    pub component: ComponentCfg,
}

fn both() -> ComponentCfg {
    ComponentCfg::Both
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Eta,
    A,
    BetaSq,
    G0,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Eta => "eta",
            SweepParam::A => "a",
            SweepParam::BetaSq => "beta_sq",
            SweepParam::G0 => "g0",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    K0,
    Energy,
    Qei,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCfg {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
    pub target: SweepTarget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worldline: Option<WorldlineCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<FCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<GCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identities: Option<IdentitiesCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conservation: Option<ConservationCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepCfg>,
}

fn missing(block: &str, cmd: Command) -> Error {
    Error::Config(format!("missing [{block}] block, required by command `{}`", cmd.name()))
}

impl RunConfig {
    /// Parse; TOML syntax and schema errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check that every block the command needs is present and builds.
    pub fn validate(&self) -> Result<()> {
        let c = self.command;
        let need_wl = matches!(c, Command::K0 | Command::Energy | Command::Qei | Command::Sweep);
        if need_wl {
            self.worldline()?;
            self.f()?;
        }
        if matches!(c, Command::Energy | Command::Qei | Command::Conservation | Command::Sweep) {
            self.params()?;
            self.state()?;
            self.mc(0)?.validate()?;
        }
        if c == Command::Identities {
            self.state()?;
            ModelParams::new(self.beta_sq(), AdiabaticCutoff::gaussian(1.0, 1.0, 1.0))?;
        }
        if c == Command::Conservation {
            self.test_function_2d()?;
        }
        if c == Command::Sweep {
            let s = self.sweep.as_ref().ok_or_else(|| missing("sweep", c))?;
            if s.values.is_empty() {
                return Err(Error::Config("[sweep] values must not be empty".into()));
            }
        }
        Ok(())
    }

    pub fn worldline(&self) -> Result<Worldline> {
        self.worldline.as_ref().ok_or_else(|| missing("worldline", self.command))?.build()
    }

    pub fn f(&self) -> Result<SmearingFunction> {
        self.f.as_ref().ok_or_else(|| missing("f", self.command))?.build()
    }

    pub fn state(&self) -> Result<StateW> {
        self.state.as_ref().map_or(Ok(StateW::Vacuum), |s| s.build())
    }

    /// β², π when [model] is absent.
    pub fn beta_sq(&self) -> f64 {
        self.model.as_ref().map_or(PI, |m| m.beta_sq)
    }

    pub fn params(&self) -> Result<ModelParams> {
        let g = self.g.as_ref().ok_or_else(|| missing("g", self.command))?.build()?;
        ModelParams::new(self.beta_sq(), g)
    }

    pub fn mc(&self, threads: usize) -> Result<McConfig> {
        let m = self.mc.clone().unwrap_or_default();
        let cfg = McConfig { samples: m.samples, seed: m.seed, ladder: m.ladder, max_order: m.max_order, threads, mu: m.mu };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn test_function_2d(&self) -> Result<TestFunction2D> {
        let c = self.conservation.as_ref().ok_or_else(|| missing("conservation", self.command))?;
        Ok(TestFunction2D::new(c.t.build()?, c.x.build()?))
    }

    pub fn identities(&self) -> IdentitiesCfg {
        self.identities.clone().unwrap_or_default()
    }

    /// Override the seed (creating the [mc] block if absent).
    pub fn set_seed(&mut self, seed: u64) {
        self.mc.get_or_insert_with(McCfg::default).seed = seed;
    }

    /// SHA-256 of the canonical TOML rendering (after overrides).
    pub fn sha256(&self) -> Result<String> {
        let text = toml::to_string(self).map_err(|e| Error::Config(format!("cannot render config: {e}")))?;
        let d = Sha256::digest(text.as_bytes());
        Ok(d.iter().map(|b| format!("{b:02x}")).collect())
    }
}
