//! TOML configuration: a `[scenario]` for random snapshots or a `[network]`
//! with explicit gains, plus optional `[experiment]` settings.
//!
//! SINRs are given in dB (`target_sinr_db`); an explicit network may give
//! linear values in `target_sinr` instead. Everything else is in watts and
//! meters.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::experiment::{Algorithm, ExperimentConfig, Sweep, SweepAxis};
use crate::network::NetworkInstance;
use crate::scenario::{Assignment, ScenarioConfig, ScenarioKind};
use crate::{db_to_linear, Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scenario: Option<ScenarioTable>,
    network: Option<NetworkTable>,
    experiment: Option<ExperimentTable>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioTable {
    kind: ScenarioKind,
    area_width: Option<f64>,
    area_height: Option<f64>,
    bs_separation: Option<f64>,
    bs_height: Option<f64>,
    num_pu: Option<usize>,
    num_su: Option<usize>,
    target_sinr_db: Option<Vec<f64>>,
    pbs_target_sinr_db: Option<Vec<f64>>,
    noise: Option<f64>,
    attenuation: Option<f64>,
    p_max: Option<f64>,
    path_loss_exponent: Option<f64>,
    snapshots: Option<usize>,
    seed: Option<u64>,
    alphas: Option<Vec<f64>>,
    assignment: Option<Assignment>,
    max_link_distance: Option<f64>,
    require_full_feasibility: Option<bool>,
    max_redraws: Option<usize>,
}

impl ScenarioTable {
    fn resolve(self) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::new(self.kind);
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        set!(
            area_width,
            area_height,
            bs_separation,
            bs_height,
            num_pu,
            num_su,
            target_sinr_db,
            noise,
            attenuation,
            p_max,
            path_loss_exponent,
            snapshots,
            seed,
            alphas,
            assignment,
            max_link_distance,
            require_full_feasibility,
            max_redraws
        );
        if self.pbs_target_sinr_db.is_some() {
            cfg.pbs_target_sinr_db = self.pbs_target_sinr_db;
        }
        cfg
    }
}

/// Explicit network: gains are rows per station (PBSs then SBSs), columns
/// per user (PUs then SUs).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkTable {
    num_pu: usize,
    num_su: usize,
    num_pbs: usize,
    num_sbs: usize,
    serving: Vec<usize>,
    gains: Vec<Vec<f64>>,
    noise: Vec<f64>,
    p_max: Vec<f64>,
    target_sinr_db: Option<Vec<f64>>,
    target_sinr: Option<Vec<f64>>,
}

impl NetworkTable {
    fn build(self) -> Result<NetworkInstance> {
        let targets = match (self.target_sinr_db, self.target_sinr) {
            (Some(db), None) => db.into_iter().map(db_to_linear).collect(),
            (None, Some(lin)) => lin,
            _ => {
                return Err(Error::Config(
                    "network needs exactly one of target_sinr_db or target_sinr".into(),
                ))
            }
        };
        NetworkInstance::builder(self.num_pu, self.num_su, self.num_pbs, self.num_sbs)
            .serving(self.serving)
            .gains(self.gains)
            .noise(self.noise)
            .p_max(self.p_max)
            .target_sinr(targets)
            .build()
            .map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentTable {
    algorithms: Option<Vec<Algorithm>>,
    sweep: Option<SweepAxis>,
    values: Option<Vec<f64>>,
    timing: Option<bool>,
    gp_tol: Option<f64>,
    gp_max_outer: Option<usize>,
}

/// A loaded configuration. At most one of `scenario` and `network` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub scenario: Option<ScenarioConfig>,
    pub network: Option<NetworkInstance>,
    pub experiment: ExperimentConfig,
}

/// Parses a TOML document.
pub fn parse_config(text: &str) -> Result<Config> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if file.scenario.is_some() && file.network.is_some() {
        return Err(Error::Config("give either [scenario] or [network], not both".into()));
    }
    if file.scenario.is_none() && file.network.is_none() {
        return Err(Error::Config("missing [scenario] or [network] table".into()));
    }
    let scenario = file.scenario.map(ScenarioTable::resolve);
    if let Some(s) = &scenario {
        s.validate().map_err(|e| Error::Config(e.to_string()))?;
    }
    let network = file.network.map(NetworkTable::build).transpose()?;
    let mut experiment = ExperimentConfig::default();
    if let Some(t) = file.experiment {
        if let Some(a) = t.algorithms {
            experiment.algorithms = a;
        }
        let axis = t.sweep.unwrap_or(SweepAxis::None);
        let values = t.values.unwrap_or_default();
        if axis != SweepAxis::None && values.is_empty() {
            return Err(Error::Config(format!("sweep over {} needs values", axis.name())));
        }
        experiment.sweep = Sweep { axis, values };
        if let Some(timing) = t.timing {
            experiment.timing = timing;
        }
        if let Some(tol) = t.gp_tol {
            experiment.gp.tol = tol;
        }
        if let Some(n) = t.gp_max_outer {
            experiment.gp.max_outer = n;
        }
    }
    Ok(Config {
        scenario,
        network,
        experiment,
    })
}

/// Reads and parses a TOML file.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Config(format!("not a number: {s:?}")))
}

/// Parses `"a..b step s"`, `"a..b"` (unit step), `"x,y,z"` or a single value.
///
/// Range endpoints are inclusive and values are rounded to 9 decimals so
/// `0.2..2.0 step 0.2` yields exactly ten clean values.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Config("empty range".into()));
    }
    if let Some((lo, rest)) = text.split_once("..") {
        let (hi, step) = match rest.split_once("step") {
            Some((hi, step)) => (hi, number(step)?),
            None => (rest, 1.0),
        };
        let (lo, hi) = (number(lo)?, number(hi)?);
        if step <= 0.0 || hi < lo {
            return Err(Error::Config(format!("bad range {text:?}")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(Error::Config(format!("range {text:?} is too long")));
        }
        return Ok((0..count)
            .map(|k| ((lo + k as f64 * step) * 1e9).round() / 1e9)
            .collect());
    }
    text.split(',').map(number).collect()
}
