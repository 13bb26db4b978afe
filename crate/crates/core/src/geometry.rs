//! Walker-star constellation geometry.
//!
//! Satellites sit on circular polar orbits. Plane `p` (zero-based here) has
//! altitude `h_1 + p·Δh` and longitude `ε_p = π·p/P` by default, so the planes
//! span `[0, π)` and the first and last planes face each other across the seam.
//! A satellite's position in spherical coordinates is
//! `(R_E + h_p, ε_p, θ)` where `θ ∈ [0, 2π)` is its orbit phase measured from
//! the north pole; `θ > π` is the descending half of the orbit.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkbudget::SPEED_OF_LIGHT;

/// Mean Earth radius (m).
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
/// Standard gravitational parameter of the Earth (m³/s²).
pub const EARTH_MU: f64 = 3.986_004_418e14;
/// Phase samples per plane used by [`Constellation::max_doppler`].
pub const DEFAULT_DOPPLER_GRID: usize = 720;

/// Identifier of a satellite: its index in [`Constellation::satellites`].
/// Satellites are numbered plane-major, so ids grow with the plane index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SatId(pub usize);

impl SatId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for SatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Side of the pitch axis an inter-plane antenna points to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Minus,
    Zero,
    Plus,
}

impl Direction {
    /// Antenna slot for the direction, `None` for [`Direction::Zero`].
    pub fn slot(self) -> Option<usize> {
        match self {
            Direction::Minus => Some(0),
            Direction::Plus => Some(1),
            Direction::Zero => None,
        }
    }

    /// Maps the signed plane-side indicator `f_d(v, u)` of the other
    /// satellite onto a direction.
    pub fn from_side(fd: f64) -> Self {
        if fd > 0.0 {
            Direction::Minus
        } else if fd < 0.0 {
            Direction::Plus
        } else {
            Direction::Zero
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstellationConfig {
    pub planes: usize,
    pub sats_per_plane: usize,
    pub base_altitude_m: f64,
    pub delta_altitude_m: f64,
    /// Explicit plane longitudes (rad). `None` selects `ε_p = π·p/P`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane_longitudes: Option<Vec<f64>>,
    /// Initial phase of the first satellite of each plane (rad). Empty means
    /// all zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phase_offsets: Vec<f64>,
}

impl ConstellationConfig {
    /// Walker-star layout with the default longitude rule and zero phasing.
    pub fn walker_star(
        planes: usize,
        sats_per_plane: usize,
        base_altitude_m: f64,
        delta_altitude_m: f64,
    ) -> Self {
        Self {
            planes,
            sats_per_plane,
            base_altitude_m,
            delta_altitude_m,
            plane_longitudes: None,
            phase_offsets: Vec::new(),
        }
    }

    pub fn total_satellites(&self) -> usize {
        self.planes * self.sats_per_plane
    }

    pub fn altitude(&self, plane: usize) -> f64 {
        self.base_altitude_m + self.delta_altitude_m * plane as f64
    }

    pub fn radius(&self, plane: usize) -> f64 {
        EARTH_RADIUS_M + self.altitude(plane)
    }

    pub fn longitude(&self, plane: usize) -> f64 {
        match &self.plane_longitudes {
            Some(eps) => eps[plane],
            None => PI * plane as f64 / self.planes as f64,
        }
    }

    pub fn phase_offset(&self, plane: usize) -> f64 {
        self.phase_offsets.get(plane).copied().unwrap_or(0.0)
    }

    /// Angular width of one intra-plane slot, `2π/N_p`.
    pub fn slot_width(&self) -> f64 {
        TAU / self.sats_per_plane as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.planes < 2 {
            return Err(Error::InvalidConfig(format!(
                "at least 2 orbital planes required, got {}",
                self.planes
            )));
        }
        if self.sats_per_plane < 1 {
            return Err(Error::InvalidConfig(
                "at least 1 satellite per plane required".into(),
            ));
        }
        for p in 0..self.planes {
            let h = self.altitude(p);
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "plane {p} has non-positive altitude {h} m"
                )));
            }
        }
        if let Some(eps) = &self.plane_longitudes {
            if eps.len() != self.planes {
                return Err(Error::InvalidConfig(format!(
                    "{} plane longitudes given for {} planes",
                    eps.len(),
                    self.planes
                )));
            }
            if eps.iter().any(|e| !(0.0..PI).contains(e)) {
                return Err(Error::InvalidConfig(
                    "plane longitudes must lie in [0, π)".into(),
                ));
            }
        }
        if !self.phase_offsets.is_empty() && self.phase_offsets.len() != self.planes {
            return Err(Error::InvalidConfig(format!(
                "{} phase offsets given for {} planes",
                self.phase_offsets.len(),
                self.planes
            )));
        }
        Ok(())
    }

    /// Maximum line-of-sight distance between planes `p` and `q` over a
    /// spherical Earth.
    pub fn max_slant_range(&self, p: usize, q: usize) -> f64 {
        horizon_distance(self.altitude(p)) + horizon_distance(self.altitude(q))
    }
}

fn horizon_distance(h: f64) -> f64 {
    (h * (h + 2.0 * EARTH_RADIUS_M)).max(0.0).sqrt()
}

/// Period of a circular Keplerian orbit at altitude `h` (s).
pub fn orbital_period(h: f64) -> f64 {
    TAU * ((EARTH_RADIUS_M + h).powi(3) / EARTH_MU).sqrt()
}

/// Orbital speed on a circular orbit at altitude `h` (m/s).
pub fn orbital_speed(h: f64) -> f64 {
    (EARTH_MU / (EARTH_RADIUS_M + h)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Satellite {
    pub id: SatId,
    /// Zero-based plane index.
    pub plane: usize,
    /// Position of the satellite within its plane, `0..N_p`.
    pub slot: usize,
    /// Orbit phase θ in `[0, 2π)`.
    pub phase: f64,
}

/// Immutable snapshot of the constellation at `epoch_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    config: ConstellationConfig,
    /// Phase of slot 0 of each plane, in `[0, 2π)`.
    plane_phase: Vec<f64>,
    epoch_s: f64,
    satellites: Vec<Satellite>,
}

impl Constellation {
    pub fn new(config: ConstellationConfig) -> Result<Self> {
        config.validate()?;
        let plane_phase = (0..config.planes)
            .map(|p| config.phase_offset(p).rem_euclid(TAU))
            .collect();
        Ok(Self::assemble(config, plane_phase, 0.0))
    }

    fn assemble(config: ConstellationConfig, plane_phase: Vec<f64>, epoch_s: f64) -> Self {
        let np = config.sats_per_plane;
        let slot = config.slot_width();
        let mut satellites = Vec::with_capacity(config.total_satellites());
        for (plane, base) in plane_phase.iter().enumerate() {
            for s in 0..np {
                satellites.push(Satellite {
                    id: SatId(plane * np + s),
                    plane,
                    slot: s,
                    phase: wrap_phase(base + slot * s as f64),
                });
            }
        }
        Self {
            config,
            plane_phase,
            epoch_s,
            satellites,
        }
    }

    pub fn config(&self) -> &ConstellationConfig {
        &self.config
    }

    pub fn satellites(&self) -> &[Satellite] {
        &self.satellites
    }

    pub fn satellite(&self, id: SatId) -> &Satellite {
        &self.satellites[id.0]
    }

    pub fn len(&self) -> usize {
        self.satellites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.satellites.is_empty()
    }

    pub fn epoch(&self) -> f64 {
        self.epoch_s
    }

    /// Phase of slot 0 of `plane`.
    pub fn plane_phase(&self, plane: usize) -> f64 {
        self.plane_phase[plane]
    }

    /// Advances every plane along its orbit by `dt` seconds.
    pub fn propagate(&self, dt: f64) -> Result<Self> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::Precondition(format!(
                "propagation step must be finite and non-negative, got {dt}"
            )));
        }
        let plane_phase = self
            .plane_phase
            .iter()
            .enumerate()
            .map(|(p, &phi)| {
                let omega = TAU / orbital_period(self.config.altitude(p));
                wrap_phase(phi + omega * dt)
            })
            .collect();
        Ok(Self::assemble(
            self.config.clone(),
            plane_phase,
            self.epoch_s + dt,
        ))
    }

    /// Euclidean distance between two satellites from their spherical
    /// coordinates.
    pub fn distance(&self, u: SatId, v: SatId) -> f64 {
        if u == v {
            return 0.0;
        }
        let (a, b) = (self.satellite(u), self.satellite(v));
        let (ru, rv) = (self.config.radius(a.plane), self.config.radius(b.plane));
        let cos_eps = (self.config.longitude(a.plane) - self.config.longitude(b.plane)).cos();
        spherical_distance(ru, rv, a.phase, b.phase, cos_eps)
    }

    /// Signed side indicator `f_d(u, v) = sin θ_u · sin(ε_p(u) − ε_p(v))`.
    pub fn side_indicator(&self, u: SatId, v: SatId) -> f64 {
        let (a, b) = (self.satellite(u), self.satellite(v));
        if a.plane == b.plane {
            return 0.0;
        }
        a.phase.sin() * (self.config.longitude(a.plane) - self.config.longitude(b.plane)).sin()
    }

    /// Direction of `v` as seen from `u`'s pitch axis.
    pub fn relative_direction(&self, u: SatId, v: SatId) -> Direction {
        Direction::from_side(self.side_indicator(v, u))
    }

    pub fn max_slant_range(&self, p: usize, q: usize) -> f64 {
        self.config.max_slant_range(p, q)
    }

    pub fn has_los(&self, u: SatId, v: SatId) -> bool {
        let (p, q) = (self.satellite(u).plane, self.satellite(v).plane);
        self.distance(u, v) <= self.max_slant_range(p, q)
    }

    /// Largest Doppler shift (Hz) between line-of-sight satellite pairs of
    /// planes `p` and `q` at carrier `freq_hz`.
    pub fn max_doppler(&self, p: usize, q: usize, freq_hz: f64) -> f64 {
        self.max_doppler_with_grid(p, q, freq_hz, DEFAULT_DOPPLER_GRID)
    }

    pub fn max_doppler_with_grid(&self, p: usize, q: usize, freq_hz: f64, grid: usize) -> f64 {
        if freq_hz == 0.0 || grid == 0 {
            return 0.0;
        }
        let cfg = &self.config;
        let lstar = cfg.max_slant_range(p, q);
        let sample = |plane: usize| -> Vec<([f64; 3], [f64; 3])> {
            let r = cfg.radius(plane);
            let speed = orbital_speed(cfg.altitude(plane));
            let (se, ce) = cfg.longitude(plane).sin_cos();
            (0..grid)
                .map(|i| {
                    let (st, ct) = (TAU * i as f64 / grid as f64).sin_cos();
                    (
                        [r * st * ce, r * st * se, r * ct],
                        [speed * ct * ce, speed * ct * se, -speed * st],
                    )
                })
                .collect()
        };
        let (a, b) = (sample(p), sample(q));
        let mut best = 0.0f64;
        for (pu, vu) in &a {
            for (pv, vv) in &b {
                let d = [pv[0] - pu[0], pv[1] - pu[1], pv[2] - pu[2]];
                let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                if dist == 0.0 || dist > lstar {
                    continue;
                }
                let dv = [vv[0] - vu[0], vv[1] - vu[1], vv[2] - vu[2]];
                let range_rate = (d[0] * dv[0] + d[1] * dv[1] + d[2] * dv[2]) / dist;
                best = best.max(range_rate.abs());
            }
        }
        best * freq_hz / SPEED_OF_LIGHT
    }
}

/// Distance between points at radii `ru`, `rv`, polar angles `tu`, `tv` on
/// planes whose longitudes differ by an angle with cosine `cos_eps`.
pub(crate) fn spherical_distance(ru: f64, rv: f64, tu: f64, tv: f64, cos_eps: f64) -> f64 {
    let (su, cu) = tu.sin_cos();
    let (sv, cv) = tv.sin_cos();
    let cross = cu * cv + cos_eps * su * sv;
    (ru * ru + rv * rv - 2.0 * ru * rv * cross).max(0.0).sqrt()
}

fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_ii(planes: usize) -> Constellation {
        Constellation::new(ConstellationConfig::walker_star(planes, 40, 600e3, 10e3)).unwrap()
    }

    fn cartesian(c: &Constellation, id: SatId) -> [f64; 3] {
        let s = c.satellite(id);
        let r = c.config().radius(s.plane);
        let e = c.config().longitude(s.plane);
        [
            r * s.phase.sin() * e.cos(),
            r * s.phase.sin() * e.sin(),
            r * s.phase.cos(),
        ]
    }

    #[test]
    fn propagate_zero_is_identity() {
        let c = table_ii(5);
        assert_eq!(c.propagate(0.0).unwrap(), c);
    }

    #[test]
    fn propagate_full_period_returns_phases() {
        let c = Constellation::new(ConstellationConfig::walker_star(2, 12, 600e3, 0.0)).unwrap();
        let t = orbital_period(600e3);
        let d = c.propagate(t).unwrap();
        for (a, b) in c.satellites().iter().zip(d.satellites()) {
            let diff = (a.phase - b.phase).abs();
            assert!(diff.min(TAU - diff) < 1e-9, "{} vs {}", a.phase, b.phase);
        }
        assert!((d.epoch() - t).abs() < 1e-9);
    }

    #[test]
    fn thirty_second_step_is_below_cadence_bound() {
        let t = orbital_period(600e3);
        assert!((t - 5792.33).abs() < 1.0, "T = {t}");
        let step = TAU / t * 30.0;
        assert!((step - 0.03254).abs() < 1e-4, "step = {step}");
        assert!(step < 0.01 * TAU * 2.0);
        let c = table_ii(5);
        let d = c.propagate(30.0).unwrap();
        let adv = d.satellites()[0].phase - c.satellites()[0].phase;
        assert!((adv - step).abs() < 1e-12);
    }

    #[test]
    fn negative_step_rejected() {
        assert!(table_ii(5).propagate(-1.0).is_err());
    }

    #[test]
    fn antipodal_same_plane_distance() {
        let c = table_ii(5);
        // slots 0 and 20 of 40 are half an orbit apart
        let d = c.distance(SatId(0), SatId(20));
        assert!((d - 2.0 * (EARTH_RADIUS_M + 600e3)).abs() < 1e-3, "{d}");
        assert!((d - 13_942e3).abs() < 1.0);
        assert!(!c.has_los(SatId(0), SatId(20)));
        assert_eq!(c.distance(SatId(3), SatId(3)), 0.0);
        assert!(c.has_los(SatId(3), SatId(3)));
    }

    #[test]
    fn adjacent_slots_have_los() {
        let c = table_ii(5);
        let d = c.distance(SatId(0), SatId(1));
        let chord = 2.0 * (EARTH_RADIUS_M + 600e3) * (PI / 40.0).sin();
        assert!((d - chord).abs() < 1e-6 * chord);
        assert!((d - 1094e3).abs() < 1e3);
        assert!(c.has_los(SatId(0), SatId(1)));
    }

    #[test]
    fn spherical_form_matches_cartesian() {
        let c = table_ii(7).propagate(1234.5).unwrap();
        for u in (0..c.len()).step_by(7) {
            for v in (0..c.len()).step_by(11) {
                let (a, b) = (cartesian(&c, SatId(u)), cartesian(&c, SatId(v)));
                let want =
                    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                let got = c.distance(SatId(u), SatId(v));
                assert!(
                    (got - want).abs() <= 1e-6 * want.max(1.0),
                    "{u},{v}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn max_slant_range_values() {
        let cfg = ConstellationConfig::walker_star(5, 40, 600e3, 0.0);
        let l = cfg.max_slant_range(0, 1);
        assert!((l - 5_658.6e3).abs() < 0.1e3, "{l}");
        let zero = ConstellationConfig::walker_star(2, 1, 0.0, 600e3);
        assert_eq!(horizon_distance(zero.altitude(0)), 0.0);
        let stepped = ConstellationConfig::walker_star(3, 1, 600e3, 10e3);
        assert!(stepped.max_slant_range(2, 0) > stepped.max_slant_range(1, 0));
        assert_eq!(stepped.max_slant_range(2, 0), stepped.max_slant_range(0, 2));
    }

    #[test]
    fn same_plane_direction_is_zero() {
        let c = table_ii(5);
        assert_eq!(c.relative_direction(SatId(0), SatId(5)), Direction::Zero);
    }

    #[test]
    fn direction_worked_example() {
        // u at θ = π/2 in plane 0, v at θ = π/2 in plane 1 of P = 5
        let mut cfg = ConstellationConfig::walker_star(5, 1, 600e3, 0.0);
        cfg.phase_offsets = vec![PI / 2.0; 5];
        let c = Constellation::new(cfg).unwrap();
        let fd = c.side_indicator(SatId(1), SatId(0));
        assert!((fd - (PI / 5.0).sin()).abs() < 1e-12);
        assert_eq!(c.relative_direction(SatId(0), SatId(1)), Direction::Minus);
        assert_eq!(c.relative_direction(SatId(1), SatId(0)), Direction::Plus);
    }

    #[test]
    fn doppler_zero_carrier() {
        assert_eq!(table_ii(5).max_doppler(0, 4, 0.0), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(ConstellationConfig::walker_star(1, 40, 600e3, 10e3)
            .validate()
            .is_err());
        assert!(ConstellationConfig::walker_star(3, 0, 600e3, 10e3)
            .validate()
            .is_err());
        assert!(ConstellationConfig::walker_star(3, 4, 10e3, -20e3)
            .validate()
            .is_err());
        let mut cfg = ConstellationConfig::walker_star(3, 4, 600e3, 10e3);
        cfg.phase_offsets = vec![0.0];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_longitudes_increase_within_half_turn() {
        let cfg = ConstellationConfig::walker_star(7, 40, 600e3, 10e3);
        let eps: Vec<f64> = (0..7).map(|p| cfg.longitude(p)).collect();
        assert!(eps.windows(2).all(|w| w[0] < w[1]));
        assert!(eps.iter().all(|e| (0.0..PI).contains(e)));
    }
}
