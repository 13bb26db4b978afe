//! Constellation sizing: worst nearest-neighbour range between adjacent
//! planes and the EIRPG needed to close a link over it at `R_min`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{spherical_distance, ConstellationConfig};
use crate::linkbudget::{fspl, min_eirpg, PathLoss, RadioConfig};

/// Default grid for [`l_adj_grid`]: samples of `θ_u` and of `Δθ`.
pub const DEFAULT_GRID: (usize, usize) = (2000, 200);

/// Closed-form maximum nearest-neighbour distance between adjacent planes,
/// evaluated at `θ_u = π/2`, `Δθ = π/N_p` on the two highest planes.
pub fn l_adj_star(cfg: &ConstellationConfig) -> Result<f64> {
    cfg.validate()?;
    let p = cfg.planes;
    let np = cfg.sats_per_plane as f64;
    let (a, b) = (cfg.radius(p - 2), cfg.radius(p - 1));
    let x = (PI / p as f64).cos() * (PI * (2.0 + np) / (2.0 * np)).sin();
    Ok((a * a + b * b - 2.0 * a * b * x).max(0.0).sqrt())
}

/// Grid maximisation of the nearest-neighbour distance over `θ_u ∈ [0, 2π)`,
/// `Δθ ∈ [0, π/N_p]` and every non-seam pair of adjacent planes. Uses the
/// configured plane longitudes.
pub fn l_adj_grid(
    cfg: &ConstellationConfig,
    theta_steps: usize,
    delta_steps: usize,
) -> Result<f64> {
    cfg.validate()?;
    if theta_steps == 0 || delta_steps == 0 {
        return Err(Error::InvalidConfig(
            "grid needs at least one step per axis".into(),
        ));
    }
    let half_slot = PI / cfg.sats_per_plane as f64;
    let mut best = 0.0f64;
    for p in 0..cfg.planes - 1 {
        let (a, b) = (cfg.radius(p), cfg.radius(p + 1));
        let cos_eps = (cfg.longitude(p) - cfg.longitude(p + 1)).cos();
        for i in 0..theta_steps {
            let t = TAU * i as f64 / theta_steps as f64;
            for j in 0..=delta_steps {
                let dt = half_slot * j as f64 / delta_steps as f64;
                best = best.max(spherical_distance(a, b, t, t + dt, cos_eps));
            }
        }
    }
    Ok(best)
}

/// Path loss at the design range, `L*(P, N_p, f)`.
pub fn mpl(cfg: &ConstellationConfig, frequency_hz: f64) -> Result<f64> {
    let radio = RadioConfig {
        frequency_hz,
        ..RadioConfig::default()
    };
    match fspl(&radio, l_adj_star(cfg)?, true)? {
        PathLoss::Finite(l) => Ok(l),
        PathLoss::Blocked => unreachable!("line of sight was asserted"),
    }
}

/// EIRPG that lets every satellite reach its nearest inter-plane neighbour at
/// `R_min`. Only the frequency, bandwidth, noise temperature and `R_min` of
/// `radio` are read.
pub fn required_eirpg(cfg: &ConstellationConfig, radio: &RadioConfig) -> Result<f64> {
    if radio.r_min_bps.is_nan() || radio.r_min_bps < 0.0 {
        return Err(Error::InvalidConfig(
            "minimum rate must be non-negative".into(),
        ));
    }
    let loss = mpl(cfg, radio.frequency_hz)?;
    Ok(min_eirpg(
        radio.bandwidth_hz,
        radio.noise_temp_k,
        radio.r_min_bps,
        loss,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct DesignReport {
    pub l_adj_star_m: f64,
    pub mpl_db: f64,
    pub required_eirpg_w: f64,
    /// Grid maximum, present when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_adj_grid_m: Option<f64>,
}

pub fn design_report(
    cfg: &ConstellationConfig,
    radio: &RadioConfig,
    grid: Option<(usize, usize)>,
) -> Result<DesignReport> {
    let l = l_adj_star(cfg)?;
    let loss = mpl(cfg, radio.frequency_hz)?;
    Ok(DesignReport {
        l_adj_star_m: l,
        mpl_db: 10.0 * loss.log10(),
        required_eirpg_w: required_eirpg(cfg, radio)?,
        l_adj_grid_m: grid.map(|(a, b)| l_adj_grid(cfg, a, b)).transpose()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EARTH_RADIUS_M;

    fn table_ii(planes: usize) -> ConstellationConfig {
        ConstellationConfig::walker_star(planes, 40, 600e3, 10e3)
    }

    #[test]
    fn closed_form_value() {
        // independent evaluation with planes at 650 and 660 km
        let (a, b) = (EARTH_RADIUS_M + 650e3, EARTH_RADIUS_M + 660e3);
        let x = (PI / 7.0).cos() * (PI / 40.0).cos();
        let want = (a * a + b * b - 2.0 * a * b * x).sqrt();
        let got = l_adj_star(&table_ii(7)).unwrap();
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        assert!((got - 3_170.42e3).abs() < 0.1e3, "{got}");
    }

    #[test]
    fn closed_form_tracks_grid() {
        for p in [5, 7, 8] {
            let c = l_adj_star(&table_ii(p)).unwrap();
            let g = l_adj_grid(&table_ii(p), DEFAULT_GRID.0, DEFAULT_GRID.1).unwrap();
            assert!((c - g).abs() <= 1e-3 * g, "P = {p}: {c} vs {g}");
        }
    }

    #[test]
    fn dense_planes_approach_chord() {
        let cfg = ConstellationConfig::walker_star(7, 100_000, 600e3, 10e3);
        let l = l_adj_star(&cfg).unwrap();
        let (a, b) = (cfg.radius(5), cfg.radius(6));
        let chord = (a * a + b * b - 2.0 * a * b * (PI / 7.0).cos()).sqrt();
        assert!((l - chord).abs() < 1e-4 * chord);
    }

    #[test]
    fn eirpg_scaling() {
        let radio = RadioConfig::default();
        let p7 = required_eirpg(&table_ii(7), &radio).unwrap();
        let p8 = required_eirpg(&table_ii(8), &radio).unwrap();
        assert!(p8 < p7);
        assert!((p7 - 3.4546).abs() < 1e-3, "{p7}");
        let zero = RadioConfig {
            r_min_bps: 0.0,
            ..radio
        };
        assert_eq!(required_eirpg(&table_ii(7), &zero).unwrap(), 0.0);
    }

    #[test]
    fn report_fields_agree() {
        let r = design_report(&table_ii(7), &RadioConfig::default(), None).unwrap();
        let l = PathLoss::Finite(mpl(&table_ii(7), 2.4e9).unwrap()).db();
        assert!((r.mpl_db - l).abs() < 1e-12);
        assert!(r.l_adj_grid_m.is_none());
    }
}
