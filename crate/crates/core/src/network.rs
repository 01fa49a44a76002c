//! Two-tier uplink network model and the SINR/power duality.

use std::ops::{Deref, DerefMut};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, RHO_LIMIT};
use crate::{Error, Result};

/// Gains below this floor are clamped to it.
pub const MIN_GAIN: f64 = 1e-30;

/// Per-user transmit powers in watts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerVector(pub Vec<f64>);

/// Per-user SINRs, linear scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SinrVector(pub Vec<f64>);

macro_rules! vec_newtype {
    ($name:ident) => {
        impl $name {
            pub fn zeros(n: usize) -> Self {
                Self(vec![0.0; n])
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }
    };
}

vec_newtype!(PowerVector);
vec_newtype!(SinrVector);

/// Primary or secondary tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Primary,
    Secondary,
}

/// Immutable snapshot of a two-tier network.
///
/// `gain[(m, i)]` is the path gain from user `i` to station `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    num_pu: usize,
    num_su: usize,
    num_pbs: usize,
    num_sbs: usize,
    serving: Vec<usize>,
    gain: DMatrix<f64>,
    noise: Vec<f64>,
    p_max: Vec<f64>,
    target_sinr: Vec<f64>,
}

/// Builder for [`NetworkInstance`]; validation happens in [`build`](Self::build).
#[derive(Debug, Clone, Default)]
pub struct NetworkBuilder {
    num_pu: usize,
    num_su: usize,
    num_pbs: usize,
    num_sbs: usize,
    serving: Vec<usize>,
    gain: Vec<Vec<f64>>,
    noise: Vec<f64>,
    p_max: Vec<f64>,
    target_sinr: Vec<f64>,
}

impl NetworkBuilder {
    pub fn serving(mut self, serving: Vec<usize>) -> Self {
        self.serving = serving;
        self
    }

    /// Row `m` holds the gains from every user to station `m`.
    pub fn gains(mut self, gain: Vec<Vec<f64>>) -> Self {
        self.gain = gain;
        self
    }

    pub fn noise(mut self, noise: Vec<f64>) -> Self {
        self.noise = noise;
        self
    }

    pub fn p_max(mut self, p_max: Vec<f64>) -> Self {
        self.p_max = p_max;
        self
    }

    pub fn target_sinr(mut self, target_sinr: Vec<f64>) -> Self {
        self.target_sinr = target_sinr;
        self
    }

    pub fn build(self) -> Result<NetworkInstance> {
        let m = self.num_pu + self.num_su;
        let b = self.num_pbs + self.num_sbs;
        let bad = |msg: String| Err(Error::InvalidNetwork(msg));
        if self.num_pu > 0 && self.num_pbs == 0 {
            return bad("primary users without a primary station".into());
        }
        if self.num_su > 0 && self.num_sbs == 0 {
            return bad("secondary users without a secondary station".into());
        }
        for (name, len, want) in [
            ("serving", self.serving.len(), m),
            ("p_max", self.p_max.len(), m),
            ("target_sinr", self.target_sinr.len(), m),
            ("noise", self.noise.len(), b),
            ("gain rows", self.gain.len(), b),
        ] {
            if len != want {
                return bad(format!("{name} has length {len}, expected {want}"));
            }
        }
        for (i, &s) in self.serving.iter().enumerate() {
            let ok = if i < self.num_pu {
                s < self.num_pbs
            } else {
                s >= self.num_pbs && s < b
            };
            if !ok {
                return bad(format!("user {i} has invalid serving station {s}"));
            }
        }
        let positive = |name: &str, v: &[f64]| -> Result<()> {
            match v.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
                Some(k) => Err(Error::InvalidNetwork(format!("{name}[{k}] must be finite and positive"))),
                None => Ok(()),
            }
        };
        positive("noise", &self.noise)?;
        positive("p_max", &self.p_max)?;
        positive("target_sinr", &self.target_sinr)?;
        let mut gain = DMatrix::zeros(b, m);
        for (row, values) in self.gain.iter().enumerate() {
            if values.len() != m {
                return bad(format!("gain row {row} has length {}, expected {m}", values.len()));
            }
            for (col, &g) in values.iter().enumerate() {
                if !(g.is_finite() && g > 0.0) {
                    return bad(format!("gain[{row}][{col}] must be finite and positive"));
                }
                gain[(row, col)] = g.max(MIN_GAIN);
            }
        }
        Ok(NetworkInstance {
            num_pu: self.num_pu,
            num_su: self.num_su,
            num_pbs: self.num_pbs,
            num_sbs: self.num_sbs,
            serving: self.serving,
            gain,
            noise: self.noise,
            p_max: self.p_max,
            target_sinr: self.target_sinr,
        })
    }
}

impl NetworkInstance {
    pub fn builder(num_pu: usize, num_su: usize, num_pbs: usize, num_sbs: usize) -> NetworkBuilder {
        NetworkBuilder {
            num_pu,
            num_su,
            num_pbs,
            num_sbs,
            ..Default::default()
        }
    }

    pub fn num_pu(&self) -> usize {
        self.num_pu
    }

    pub fn num_su(&self) -> usize {
        self.num_su
    }

    pub fn num_users(&self) -> usize {
        self.num_pu + self.num_su
    }

    pub fn num_pbs(&self) -> usize {
        self.num_pbs
    }

    pub fn num_sbs(&self) -> usize {
        self.num_sbs
    }

    pub fn num_stations(&self) -> usize {
        self.num_pbs + self.num_sbs
    }

    pub fn pu_indices(&self) -> std::ops::Range<usize> {
        0..self.num_pu
    }

    pub fn su_indices(&self) -> std::ops::Range<usize> {
        self.num_pu..self.num_users()
    }

    pub fn tier(&self, user: usize) -> Tier {
        if user < self.num_pu {
            Tier::Primary
        } else {
            Tier::Secondary
        }
    }

    pub fn serving(&self, user: usize) -> usize {
        self.serving[user]
    }

    pub fn serving_all(&self) -> &[usize] {
        &self.serving
    }

    /// Path gain from `user` to `station`.
    pub fn gain(&self, station: usize, user: usize) -> f64 {
        self.gain[(station, user)]
    }

    /// Gain from `user` to its own serving station.
    pub fn direct_gain(&self, user: usize) -> f64 {
        self.gain[(self.serving[user], user)]
    }

    pub fn gain_matrix(&self) -> &DMatrix<f64> {
        &self.gain
    }

    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    pub fn p_max(&self) -> &[f64] {
        &self.p_max
    }

    pub fn target_sinr(&self) -> &[f64] {
        &self.target_sinr
    }

    /// Target SINRs of the primary users.
    pub fn pu_targets(&self) -> &[f64] {
        &self.target_sinr[..self.num_pu]
    }

    /// Users served by `station`.
    pub fn users_of(&self, station: usize) -> impl Iterator<Item = usize> + '_ {
        self.serving
            .iter()
            .enumerate()
            .filter(move |(_, &s)| s == station)
            .map(|(i, _)| i)
    }

    /// Same network with every noise power and power cap multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.noise.iter_mut().for_each(|n| *n *= factor);
        out.p_max.iter_mut().for_each(|p| *p *= factor);
        out
    }

    /// Same network with different target SINRs.
    pub fn with_targets(&self, target_sinr: Vec<f64>) -> Result<Self> {
        check_len(self.num_users(), target_sinr.len())?;
        let mut out = self.clone();
        out.target_sinr = target_sinr;
        Ok(out)
    }

    /// Total received power plus noise at every station.
    pub(crate) fn received_plus_noise(&self, p: &[f64]) -> Vec<f64> {
        let mut phi = self.noise.clone();
        for (i, &pi) in p.iter().enumerate() {
            if pi != 0.0 {
                for (m, slot) in phi.iter_mut().enumerate() {
                    *slot += self.gain[(m, i)] * pi;
                }
            }
        }
        phi
    }

    /// Interference plus noise seen by each user at its serving station.
    pub(crate) fn interference_plus_noise(&self, p: &[f64]) -> Vec<f64> {
        let phi = self.received_plus_noise(p);
        (0..self.num_users())
            .map(|i| {
                let b = self.serving[i];
                (phi[b] - self.gain[(b, i)] * p[i]).max(self.noise[b])
            })
            .collect()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Uplink SINR of every user under powers `p`.
pub fn sinr_of(net: &NetworkInstance, p: &PowerVector) -> Result<SinrVector> {
    check_len(net.num_users(), p.len())?;
    let m = net.num_users();
    let mut gamma = Vec::with_capacity(m);
    for i in 0..m {
        let b = net.serving[i];
        let interference: f64 = (0..m)
            .filter(|&j| j != i)
            .map(|j| net.gain[(b, j)] * p[j])
            .sum();
        gamma.push(net.gain[(b, i)] * p[i] / (interference + net.noise[b]));
    }
    Ok(SinrVector(gamma))
}

/// Normalized cross-gain matrix `F(gamma)` with zero diagonal.
pub fn cross_gain_matrix(net: &NetworkInstance, gamma: &[f64]) -> DMatrix<f64> {
    let m = net.num_users();
    DMatrix::from_fn(m, m, |i, j| {
        if i == j || gamma[i] == 0.0 {
            0.0
        } else {
            let b = net.serving[i];
            gamma[i] * net.gain[(b, j)] / net.gain[(b, i)]
        }
    })
}

/// Powers that realize `gamma` exactly: `p = (I - F)^-1 U`.
pub fn powers_from_sinr(net: &NetworkInstance, gamma: &SinrVector) -> Result<PowerVector> {
    check_len(net.num_users(), gamma.len())?;
    if let Some(k) = gamma.iter().position(|g| !(g.is_finite() && *g >= 0.0)) {
        return Err(Error::InvalidNetwork(format!("gamma[{k}] must be finite and >= 0")));
    }
    let f = cross_gain_matrix(net, gamma);
    let rho = linalg::spectral_radius_nonneg(&f);
    if rho.hi >= RHO_LIMIT && rho.estimate() >= RHO_LIMIT {
        return Err(Error::InfeasibleSinr {
            spectral_radius: rho.estimate(),
        });
    }
    let u = DVector::from_fn(net.num_users(), |i, _| {
        let b = net.serving[i];
        gamma[i] * net.noise[b] / net.gain[(b, i)]
    });
    let mut p = linalg::solve_identity_minus(&f, &u).ok_or(Error::InfeasibleSinr {
        spectral_radius: rho.estimate(),
    })?;
    // a zero target is met exactly by silence; LU can leave -0.0 or -1e-18 there
    for (x, g) in p.iter_mut().zip(gamma.iter()) {
        if *g == 0.0 {
            *x = 0.0;
        }
    }
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InfeasibleSinr {
            spectral_radius: rho.estimate(),
        });
    }
    Ok(PowerVector(p.iter().copied().collect()))
}

/// True when `gamma` is reachable with every power inside `[0, p_max]`.
pub fn is_sinr_feasible(net: &NetworkInstance, gamma: &SinrVector) -> bool {
    match powers_from_sinr(net, gamma) {
        Ok(p) => p.iter().zip(&net.p_max).all(|(pi, cap)| *pi <= *cap * (1.0 + 1e-12)),
        Err(_) => false,
    }
}

/// SINR vector with the targets of the PUs and of `admitted` SUs, zero elsewhere.
pub fn targets_for(net: &NetworkInstance, admitted: &[usize]) -> SinrVector {
    let mut gamma = vec![0.0; net.num_users()];
    for i in net.pu_indices() {
        gamma[i] = net.target_sinr[i];
    }
    for &i in admitted {
        gamma[i] = net.target_sinr[i];
    }
    SinrVector(gamma)
}

/// Interference from the SUs in `active_sus` at each PBS.
pub fn cognitive_interference(net: &NetworkInstance, p: &PowerVector, active_sus: &[usize]) -> Vec<f64> {
    (0..net.num_pbs)
        .map(|m| active_sus.iter().map(|&i| p[i] * net.gain[(m, i)]).sum())
        .collect()
}

/// Interference at each PBS from every user not served by it.
pub fn total_interference(net: &NetworkInstance, p: &PowerVector) -> Vec<f64> {
    (0..net.num_pbs)
        .map(|m| {
            (0..net.num_users())
                .filter(|&i| net.serving[i] != m)
                .map(|i| p[i] * net.gain[(m, i)])
                .sum()
        })
        .collect()
}
