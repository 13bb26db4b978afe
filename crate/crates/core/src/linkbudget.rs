//! Free-space link budget for inter-plane ISLs.
//!
//! Signal power is folded into a single EIRPG figure (transmit power times
//! both peak antenna gains). Rates are Shannon rates with zero outage: the
//! SINR rate is selected for the worst interference any permissible
//! activation of the co-channel pairs can produce.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Constellation, SatId};

/// Speed of light used throughout the link budget (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.998e8;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Antenna {
    /// Perfectly steered narrow beams: no interference at all.
    NarrowBeam,
    /// Isotropic antennas: every co-channel transmitter interferes.
    Isotropic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessScheme {
    Ofdma,
    Cdma,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_temp_k: f64,
    pub eirpg_w: f64,
    pub r_min_bps: f64,
    pub antenna: Antenna,
}

impl Default for RadioConfig {
    /// S-band defaults: 2.4 GHz, 20 MHz, 354.81 K, 3.74 W, 10 kbps.
    fn default() -> Self {
        Self {
            frequency_hz: 2.4e9,
            bandwidth_hz: 20e6,
            noise_temp_k: 354.81,
            eirpg_w: 3.74,
            r_min_bps: 10e3,
            antenna: Antenna::NarrowBeam,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("frequency", self.frequency_hz),
            ("bandwidth", self.bandwidth_hz),
            ("noise temperature", self.noise_temp_k),
            ("EIRPG", self.eirpg_w),
            ("minimum rate", self.r_min_bps),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Thermal noise power `k_B·τ·b` over bandwidth `b`.
    pub fn noise_power(&self, bandwidth_hz: f64) -> f64 {
        BOLTZMANN * self.noise_temp_k * bandwidth_hz
    }

    /// Minimum SNR for the minimum rate, `2^(R_min/B) − 1`.
    pub fn snr_threshold(&self) -> f64 {
        (self.r_min_bps / self.bandwidth_hz).exp2() - 1.0
    }

    /// Largest path loss at which `R_min` is still reachable without
    /// interference.
    pub fn max_path_loss(&self) -> f64 {
        self.eirpg_w / (self.noise_power(self.bandwidth_hz) * self.snr_threshold())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceSet {
    pub count: usize,
    pub scheme: AccessScheme,
}

impl ResourceSet {
    pub fn new(count: usize, scheme: AccessScheme) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidConfig(
                "at least one resource required".into(),
            ));
        }
        Ok(Self { count, scheme })
    }

    /// CDMA rate divisor `1 + log2(K)`.
    pub fn spreading_factor(&self) -> f64 {
        1.0 + (self.count as f64).log2()
    }
}

/// Free-space path loss factor. `Blocked` stands for the Earth occluding the
/// link; it yields zero SNR and zero interference and never enters arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathLoss {
    Finite(f64),
    Blocked,
}

impl PathLoss {
    pub fn finite(self) -> Option<f64> {
        match self {
            PathLoss::Finite(l) => Some(l),
            PathLoss::Blocked => None,
        }
    }

    pub fn db(self) -> f64 {
        match self {
            PathLoss::Finite(l) => 10.0 * l.log10(),
            PathLoss::Blocked => f64::INFINITY,
        }
    }
}

pub fn fspl(cfg: &RadioConfig, dist_m: f64, los: bool) -> Result<PathLoss> {
    if !los {
        return Ok(PathLoss::Blocked);
    }
    if dist_m.is_nan() || dist_m <= 0.0 {
        return Err(Error::Domain(format!(
            "path loss undefined at distance {dist_m} m"
        )));
    }
    Ok(PathLoss::Finite(fspl_factor(cfg.frequency_hz, dist_m)))
}

fn fspl_factor(freq_hz: f64, dist_m: f64) -> f64 {
    (4.0 * PI * dist_m * freq_hz / SPEED_OF_LIGHT).powi(2)
}

pub fn snr(cfg: &RadioConfig, loss: PathLoss) -> f64 {
    match loss {
        PathLoss::Finite(l) => cfg.eirpg_w / (cfg.noise_power(cfg.bandwidth_hz) * l),
        PathLoss::Blocked => 0.0,
    }
}

pub fn rate_snr(cfg: &RadioConfig, snr_value: f64) -> f64 {
    cfg.bandwidth_hz * snr_value.ln_1p() / std::f64::consts::LN_2
}

/// Full-band rate under interference power `interference_w`.
pub fn rate_sinr(cfg: &RadioConfig, loss: PathLoss, interference_w: f64) -> f64 {
    rate_in_band(cfg, loss, interference_w, cfg.bandwidth_hz)
}

fn rate_in_band(cfg: &RadioConfig, loss: PathLoss, interference_w: f64, band_hz: f64) -> f64 {
    match loss {
        PathLoss::Finite(l) => {
            let sinr = cfg.eirpg_w / (l * (cfg.noise_power(band_hz) + interference_w));
            band_hz * sinr.ln_1p() / std::f64::consts::LN_2
        }
        PathLoss::Blocked => 0.0,
    }
}

/// Rate after sharing the band among `rs.count` resources: OFDMA shrinks the
/// sub-carrier bandwidth to `B/K`, CDMA divides the full-band rate by the
/// spreading factor.
pub fn effective_rate(
    cfg: &RadioConfig,
    rs: &ResourceSet,
    loss: PathLoss,
    interference_w: f64,
) -> f64 {
    match rs.scheme {
        AccessScheme::Ofdma => rate_in_band(
            cfg,
            loss,
            interference_w,
            cfg.bandwidth_hz / rs.count as f64,
        ),
        AccessScheme::Cdma => rate_sinr(cfg, loss, interference_w) / rs.spreading_factor(),
    }
}

/// Smallest EIRPG that reaches `r_min_bps` over path loss `mpl`.
pub fn min_eirpg(bandwidth_hz: f64, noise_temp_k: f64, r_min_bps: f64, mpl: f64) -> f64 {
    mpl * BOLTZMANN * noise_temp_k * bandwidth_hz * ((r_min_bps / bandwidth_hz).exp2() - 1.0)
}

/// Power `rx` receives from `tx`. A satellite hears itself with unit path
/// loss; occluded transmitters contribute nothing.
pub fn received_power(c: &Constellation, cfg: &RadioConfig, tx: SatId, rx: SatId) -> f64 {
    if tx == rx {
        return cfg.eirpg_w;
    }
    if !c.has_los(tx, rx) {
        return 0.0;
    }
    let l = fspl_factor(cfg.frequency_hz, c.distance(tx, rx)).max(1.0);
    cfg.eirpg_w / l
}

/// Worst-case interference one co-channel pair `(i, j)` causes at `rx`:
/// at most one of its endpoints transmits, so the louder one is taken.
pub fn pair_interference(
    c: &Constellation,
    cfg: &RadioConfig,
    rx: SatId,
    i: SatId,
    j: SatId,
) -> f64 {
    match cfg.antenna {
        Antenna::NarrowBeam => 0.0,
        Antenna::Isotropic => received_power(c, cfg, i, rx).max(received_power(c, cfg, j, rx)),
    }
}

/// Worst-case interference at `rx`, an endpoint of `pair`, from every other
/// pair sharing resource `k` in `alloc`.
pub fn worst_case_interference(
    c: &Constellation,
    cfg: &RadioConfig,
    alloc: &crate::graph::Allocation,
    rx: SatId,
    pair: (SatId, SatId),
    k: usize,
) -> Result<f64> {
    let (a, b) = pair;
    if rx != a && rx != b {
        return Err(Error::Precondition(format!(
            "receiver {rx} is not an endpoint of ({a}, {b})"
        )));
    }
    let own = alloc
        .assignments()
        .iter()
        .find(|x| x.pair.same_pair(a, b))
        .ok_or_else(|| Error::Precondition(format!("pair ({a}, {b}) is not allocated")))?;
    if own.resource != k {
        return Err(Error::Precondition(format!(
            "pair ({a}, {b}) holds resource {}, not {k}",
            own.resource
        )));
    }
    Ok(alloc
        .assignments()
        .iter()
        .filter(|x| x.resource == k && !x.pair.same_pair(a, b))
        .map(|x| pair_interference(c, cfg, rx, x.pair.u, x.pair.v))
        .sum())
}
