//! Random network snapshots for two-cell, four-cell and ad-hoc topologies.
//!
//! Every user is a ground-level transmitter. In the cellular kinds the
//! receivers are base stations mounted `bs_height` meters high; in the ad-hoc
//! kind each link has its own ground-level receiver, which acts as a
//! single-user station. Path gain is `attenuation * d^-exponent` over the 3-D
//! transmitter-receiver distance, clamped below at [`MIN_DISTANCE`].

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::network::{is_sinr_feasible, targets_for, NetworkInstance, SinrVector};
use crate::{db_to_linear, Error, Result};

/// Distances are clamped to at least this many meters.
pub const MIN_DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// Two PBSs on the horizontal midline of the area; PUs only.
    TwoPbs,
    /// Four corner BSs; users anywhere in the area, serving BS drawn at random.
    FourCellA,
    /// Four corner BSs; users confined to their serving BS's quadrant.
    FourCellB,
    /// Independent transmitter-receiver links.
    AdHoc,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::TwoPbs => "two-pbs",
            ScenarioKind::FourCellA => "four-cell-a",
            ScenarioKind::FourCellB => "four-cell-b",
            ScenarioKind::AdHoc => "ad-hoc",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-pbs" => Ok(ScenarioKind::TwoPbs),
            "four-cell-a" => Ok(ScenarioKind::FourCellA),
            "four-cell-b" => Ok(ScenarioKind::FourCellB),
            "ad-hoc" => Ok(ScenarioKind::AdHoc),
            other => Err(Error::InvalidScenario(format!("unknown scenario kind {other:?}"))),
        }
    }
}

/// How two-cell PUs pick their PBS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assignment {
    Random,
    Nearest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub area_width: f64,
    pub area_height: f64,
    /// Distance `d` between BSs along each axis (cellular kinds only).
    pub bs_separation: f64,
    pub bs_height: f64,
    /// PUs, or primary links for the ad-hoc kind.
    pub num_pu: usize,
    /// SUs, or secondary links for the ad-hoc kind.
    pub num_su: usize,
    /// Each user's target is drawn uniformly from this set.
    pub target_sinr_db: Vec<f64>,
    /// Per-PBS PU target overriding `target_sinr_db` when set.
    pub pbs_target_sinr_db: Option<Vec<f64>>,
    pub noise: f64,
    pub attenuation: f64,
    pub p_max: f64,
    pub path_loss_exponent: f64,
    pub snapshots: usize,
    pub seed: u64,
    /// Box-baseline scalings of the axis intercepts.
    pub alphas: Vec<f64>,
    pub assignment: Assignment,
    /// Longest ad-hoc link in meters.
    pub max_link_distance: f64,
    /// Redraw until every user can reach its target, not just the PUs.
    pub require_full_feasibility: bool,
    pub max_redraws: usize,
}

impl ScenarioConfig {
    /// Defaults for `kind`.
    pub fn new(kind: ScenarioKind) -> Self {
        let (w, h, targets, num_su) = match kind {
            ScenarioKind::TwoPbs => (1000.0, 500.0, vec![-18.0], 0),
            ScenarioKind::FourCellA => (1000.0, 1000.0, vec![-20.0, -24.0], 20),
            ScenarioKind::FourCellB => (1000.0, 1000.0, vec![-12.0, -16.0], 20),
            ScenarioKind::AdHoc => (1000.0, 1000.0, vec![-16.0, -20.0], 28),
        };
        let num_pu = if kind == ScenarioKind::AdHoc { 28 } else { 20 };
        Self {
            kind,
            area_width: w,
            area_height: h,
            bs_separation: 150.0,
            bs_height: 20.0,
            num_pu,
            num_su,
            target_sinr_db: targets,
            pbs_target_sinr_db: None,
            noise: 5e-13,
            attenuation: 0.09,
            p_max: 0.1,
            path_loss_exponent: 4.0,
            snapshots: 200,
            seed: 1,
            alphas: vec![0.1, 1.0, 10.0],
            assignment: if kind == ScenarioKind::TwoPbs {
                Assignment::Nearest
            } else {
                Assignment::Random
            },
            max_link_distance: 250.0,
            require_full_feasibility: false,
            max_redraws: 1000,
        }
    }

    pub fn num_pbs(&self) -> usize {
        match self.kind {
            ScenarioKind::TwoPbs | ScenarioKind::FourCellA | ScenarioKind::FourCellB => 2,
            ScenarioKind::AdHoc => self.num_pu,
        }
    }

    pub fn num_sbs(&self) -> usize {
        match self.kind {
            ScenarioKind::TwoPbs => 0,
            ScenarioKind::FourCellA | ScenarioKind::FourCellB => 2,
            ScenarioKind::AdHoc => self.num_su,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        for (name, v) in [
            ("area_width", self.area_width),
            ("area_height", self.area_height),
            ("noise", self.noise),
            ("attenuation", self.attenuation),
            ("p_max", self.p_max),
            ("path_loss_exponent", self.path_loss_exponent),
            ("max_link_distance", self.max_link_distance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and positive, got {v}"));
            }
        }
        if !(self.bs_height.is_finite() && self.bs_height >= 0.0) {
            return bad(format!("bs_height must be >= 0, got {}", self.bs_height));
        }
        if !(self.bs_separation.is_finite() && self.bs_separation >= 0.0) {
            return bad(format!("bs_separation must be >= 0, got {}", self.bs_separation));
        }
        if self.kind != ScenarioKind::AdHoc && self.bs_separation >= self.area_width.min(self.area_height) {
            return bad(format!(
                "bs_separation {} must be below the smaller area side {}",
                self.bs_separation,
                self.area_width.min(self.area_height)
            ));
        }
        if self.num_pu == 0 {
            return bad("num_pu must be positive".into());
        }
        if self.kind == ScenarioKind::TwoPbs && self.num_su > 0 {
            return bad("two-pbs scenarios have no secondary network; set num_su = 0".into());
        }
        if self.target_sinr_db.is_empty() || self.target_sinr_db.iter().any(|t| !t.is_finite()) {
            return bad("target_sinr_db must be a nonempty list of finite values".into());
        }
        if let Some(per) = &self.pbs_target_sinr_db {
            if per.len() != self.num_pbs() || per.iter().any(|t| !t.is_finite()) {
                return bad(format!("pbs_target_sinr_db needs {} finite values", self.num_pbs()));
            }
        }
        if self.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return bad("alphas must be finite and >= 0".into());
        }
        if self.max_redraws == 0 {
            return bad("max_redraws must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A generated snapshot with the geometry it came from.
#[derive(Debug, Clone)]
pub struct Layout {
    pub net: NetworkInstance,
    /// Receiver positions, station-indexed.
    pub stations: Vec<Point>,
    /// Transmitter positions, user-indexed.
    pub users: Vec<Point>,
    /// Receiver height per station.
    pub station_heights: Vec<f64>,
    /// Draws rejected before this one.
    pub redraws: usize,
}

/// `attenuation * d^-exponent` with `d` the 3-D distance, clamped at [`MIN_DISTANCE`].
pub fn path_gain(attenuation: f64, exponent: f64, horizontal: f64, height: f64) -> f64 {
    let d = horizontal.hypot(height).max(MIN_DISTANCE);
    attenuation * d.powf(-exponent)
}

struct Draw {
    stations: Vec<Point>,
    heights: Vec<f64>,
    users: Vec<Point>,
    serving: Vec<usize>,
}

fn uniform_in(rng: &mut ChaCha8Rng, x0: f64, x1: f64, y0: f64, y1: f64) -> Point {
    Point::new(rng.random_range(x0..=x1), rng.random_range(y0..=y1))
}

fn nearest(stations: &[Point], candidates: std::ops::Range<usize>, at: Point) -> usize {
    candidates
        .min_by(|&a, &b| at.dist(stations[a]).total_cmp(&at.dist(stations[b])))
        .expect("nonempty station range")
}

fn draw_two_pbs(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Draw {
    let (w, h, d) = (cfg.area_width, cfg.area_height, cfg.bs_separation);
    let stations = vec![Point::new(w / 2.0 - d / 2.0, h / 2.0), Point::new(w / 2.0 + d / 2.0, h / 2.0)];
    let mut users = Vec::with_capacity(cfg.num_pu);
    let mut serving = Vec::with_capacity(cfg.num_pu);
    for _ in 0..cfg.num_pu {
        let at = uniform_in(rng, 0.0, w, 0.0, h);
        let b = match cfg.assignment {
            Assignment::Nearest => nearest(&stations, 0..2, at),
            Assignment::Random => rng.random_range(0..2),
        };
        users.push(at);
        serving.push(b);
    }
    Draw {
        heights: vec![cfg.bs_height; 2],
        stations,
        users,
        serving,
    }
}

fn draw_four_cell(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng, quadrants: bool) -> Draw {
    let (hw, hh, s) = (cfg.area_width / 2.0, cfg.area_height / 2.0, cfg.bs_separation / 2.0);
    // PBS 0, PBS 1, SBS 0, SBS 1
    let stations = vec![
        Point::new(-s, -s),
        Point::new(s, s),
        Point::new(s, -s),
        Point::new(-s, s),
    ];
    let mut users = Vec::new();
    let mut serving = Vec::new();
    for (count, tier) in [(cfg.num_pu, 0usize), (cfg.num_su, 2usize)] {
        for _ in 0..count {
            let b = tier + rng.random_range(0..2);
            let at = if quadrants {
                let bs = stations[b];
                let (x0, x1) = if bs.x < 0.0 { (-hw, 0.0) } else { (0.0, hw) };
                let (y0, y1) = if bs.y < 0.0 { (-hh, 0.0) } else { (0.0, hh) };
                uniform_in(rng, x0, x1, y0, y1)
            } else {
                uniform_in(rng, -hw, hw, -hh, hh)
            };
            users.push(at);
            serving.push(b);
        }
    }
    Draw {
        heights: vec![cfg.bs_height; 4],
        stations,
        users,
        serving,
    }
}

fn draw_ad_hoc(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Draw {
    let (w, h) = (cfg.area_width, cfg.area_height);
    let links = cfg.num_pu + cfg.num_su;
    let mut users = Vec::with_capacity(links);
    let mut stations = Vec::with_capacity(links);
    for _ in 0..links {
        let tx = uniform_in(rng, 0.0, w, 0.0, h);
        let rx = loop {
            // uniform over the disk around the transmitter
            let r = cfg.max_link_distance * rng.random::<f64>().sqrt();
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let p = Point::new(tx.x + r * theta.cos(), tx.y + r * theta.sin());
            if (0.0..=w).contains(&p.x) && (0.0..=h).contains(&p.y) {
                break p;
            }
        };
        users.push(tx);
        stations.push(rx);
    }
    Draw {
        heights: vec![0.0; links],
        stations,
        users,
        serving: (0..links).collect(),
    }
}

fn draw_targets(cfg: &ScenarioConfig, serving: &[usize], rng: &mut ChaCha8Rng) -> Vec<f64> {
    serving
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let db = match (&cfg.pbs_target_sinr_db, i < cfg.num_pu) {
                (Some(per), true) => per[b],
                _ => *cfg.target_sinr_db.choose(rng).expect("nonempty target set"),
            };
            db_to_linear(db)
        })
        .collect()
}

fn build(cfg: &ScenarioConfig, draw: &Draw, targets: Vec<f64>) -> Result<NetworkInstance> {
    let gains = draw
        .stations
        .iter()
        .zip(&draw.heights)
        .map(|(rx, &height)| {
            draw.users
                .iter()
                .map(|tx| path_gain(cfg.attenuation, cfg.path_loss_exponent, tx.dist(*rx), height))
                .collect()
        })
        .collect();
    let users = draw.users.len();
    NetworkInstance::builder(cfg.num_pu, cfg.num_su, cfg.num_pbs(), cfg.num_sbs())
        .serving(draw.serving.clone())
        .gains(gains)
        .noise(vec![cfg.noise; draw.stations.len()])
        .p_max(vec![cfg.p_max; users])
        .target_sinr(targets)
        .build()
}

/// Deterministic snapshot for `(cfg, seed)` with its geometry.
///
/// Draws are repeated until the PUs alone can reach their targets (or the
/// whole system can, with `require_full_feasibility`).
pub fn generate_layout(cfg: &ScenarioConfig, seed: u64) -> Result<Layout> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for redraws in 0..cfg.max_redraws {
        let draw = match cfg.kind {
            ScenarioKind::TwoPbs => draw_two_pbs(cfg, &mut rng),
            ScenarioKind::FourCellA => draw_four_cell(cfg, &mut rng, false),
            ScenarioKind::FourCellB => draw_four_cell(cfg, &mut rng, true),
            ScenarioKind::AdHoc => draw_ad_hoc(cfg, &mut rng),
        };
        let targets = draw_targets(cfg, &draw.serving, &mut rng);
        let net = build(cfg, &draw, targets)?;
        let wanted = if cfg.require_full_feasibility {
            SinrVector(net.target_sinr().to_vec())
        } else {
            targets_for(&net, &[])
        };
        if is_sinr_feasible(&net, &wanted) {
            return Ok(Layout {
                net,
                stations: draw.stations,
                users: draw.users,
                station_heights: draw.heights,
                redraws,
            });
        }
    }
    Err(Error::InvalidScenario(format!(
        "no feasible draw in {} attempts for seed {seed}",
        cfg.max_redraws
    )))
}

/// Deterministic snapshot for `(cfg, seed)`.
pub fn generate_snapshot(cfg: &ScenarioConfig, seed: u64) -> Result<NetworkInstance> {
    generate_layout(cfg, seed).map(|l| l.net)
}
