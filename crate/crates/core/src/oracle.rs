//! Brute-force reference solvers for small instances.
//!
//! The solvers reuse neither the greedy machinery nor the closed-form
//! interference sum: geometry is recomputed from Cartesian coordinates and
//! worst cases are found by enumerating every activation pattern.
//! [`compare_random`] runs both sides on random instances.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::allocation::{evaluate, gra, ordered_pairs, random_alloc_with, round_robin};
use crate::error::{Error, Result};
use crate::geometry::{Constellation, ConstellationConfig, Direction, SatId};
use crate::graph::{Edge, FeasibilityGraph};
use crate::linkbudget::{
    worst_case_interference, AccessScheme, Antenna, RadioConfig, ResourceSet, BOLTZMANN,
    SPEED_OF_LIGHT,
};
use crate::matching::giem;

/// Largest edge count accepted by [`optimal_matching`].
pub const MAX_MATCHING_EDGES: usize = 24;
/// Largest co-channel pair count accepted by the pattern enumeration.
pub const MAX_PATTERN_PAIRS: usize = 10;

fn position(c: &Constellation, x: SatId) -> [f64; 3] {
    let s = c.satellite(x);
    let r = c.config().radius(s.plane);
    let e = c.config().longitude(s.plane);
    [
        r * s.phase.sin() * e.cos(),
        r * s.phase.sin() * e.sin(),
        r * s.phase.cos(),
    ]
}

fn received(c: &Constellation, cfg: &RadioConfig, tx: SatId, rx: SatId) -> f64 {
    if tx == rx {
        return cfg.eirpg_w;
    }
    let (a, b) = (position(c, tx), position(c, rx));
    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    let (pa, pb) = (c.satellite(tx).plane, c.satellite(rx).plane);
    if d > c.config().max_slant_range(pa, pb) {
        return 0.0;
    }
    let l = (4.0 * PI * d * cfg.frequency_hz / SPEED_OF_LIGHT).powi(2);
    cfg.eirpg_w / l.max(1.0)
}

/// Best permissible matching found by trying every subset of the edges that
/// reach `r_min_bps`. Returns its weight and edges.
pub fn optimal_matching(
    g: &FeasibilityGraph,
    q: usize,
    r_min_bps: f64,
) -> Result<(f64, Vec<Edge>)> {
    let edges: Vec<&Edge> = g
        .edges()
        .iter()
        .filter(|e| e.rate_snr_bps >= r_min_bps)
        .collect();
    if edges.len() > MAX_MATCHING_EDGES {
        return Err(Error::Precondition(format!(
            "{} edges exceed the brute-force limit of {MAX_MATCHING_EDGES}",
            edges.len()
        )));
    }
    let n = g.vertex_count();
    let mut best = (0.0, Vec::new());
    for mask in 0u32..(1u32 << edges.len()) {
        let chosen: Vec<&Edge> = (0..edges.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| edges[i])
            .collect();
        if !permissible(n, &chosen, q) {
            continue;
        }
        let w: f64 = chosen.iter().map(|e| 2.0 * e.rate_snr_bps).sum();
        if w > best.0 {
            best = (w, chosen.into_iter().copied().collect());
        }
    }
    Ok(best)
}

/// At most `q` links per satellite and at most one towards each side.
pub fn permissible(vertices: usize, edges: &[&Edge], q: usize) -> bool {
    let mut minus = vec![0usize; vertices];
    let mut plus = vec![0usize; vertices];
    for e in edges {
        for (x, d) in [(e.u, e.dir_u), (e.v, e.dir_v)] {
            match d {
                Direction::Minus => minus[x.0] += 1,
                Direction::Plus => plus[x.0] += 1,
                Direction::Zero => return false,
            }
        }
    }
    (0..vertices).all(|x| minus[x] <= 1 && plus[x] <= 1 && minus[x] + plus[x] <= q)
}

/// Worst interference at `rx` over every permissible activation of
/// `others`: each pair is silent or has exactly one of its endpoints
/// transmitting.
pub fn interference_by_enumeration(
    c: &Constellation,
    cfg: &RadioConfig,
    rx: SatId,
    others: &[(SatId, SatId)],
) -> Result<f64> {
    if others.len() > MAX_PATTERN_PAIRS {
        return Err(Error::Precondition(format!(
            "{} pairs exceed the enumeration limit of {MAX_PATTERN_PAIRS}",
            others.len()
        )));
    }
    if cfg.antenna == Antenna::NarrowBeam {
        return Ok(0.0);
    }
    let patterns = 3usize.pow(others.len() as u32);
    let mut worst = 0.0f64;
    for code in 0..patterns {
        let mut rest = code;
        let mut total = 0.0;
        for &(i, j) in others {
            match rest % 3 {
                1 => total += received(c, cfg, i, rx),
                2 => total += received(c, cfg, j, rx),
                _ => {}
            }
            rest /= 3;
        }
        worst = worst.max(total);
    }
    Ok(worst)
}

fn rate(
    cfg: &RadioConfig,
    rs: &ResourceSet,
    c: &Constellation,
    tx: SatId,
    rx: SatId,
    i: f64,
) -> f64 {
    let band = match rs.scheme {
        AccessScheme::Ofdma => cfg.bandwidth_hz / rs.count as f64,
        AccessScheme::Cdma => cfg.bandwidth_hz,
    };
    let signal = received(c, cfg, tx, rx);
    let r = band * (1.0 + signal / (BOLTZMANN * cfg.noise_temp_k * band + i)).log2();
    match rs.scheme {
        AccessScheme::Ofdma => r,
        AccessScheme::Cdma => r / (1.0 + (rs.count as f64).log2()),
    }
}

/// Worst-case sum rate of `pairs` holding `resources`, interference found by
/// enumeration.
pub fn allocation_value(
    c: &Constellation,
    cfg: &RadioConfig,
    rs: &ResourceSet,
    pairs: &[(SatId, SatId)],
    resources: &[usize],
) -> Result<f64> {
    let mut total = 0.0;
    for (n, &(u, v)) in pairs.iter().enumerate() {
        let others: Vec<_> = pairs
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != n && resources[m] == resources[n])
            .map(|(_, &p)| p)
            .collect();
        total += rate(
            cfg,
            rs,
            c,
            u,
            v,
            interference_by_enumeration(c, cfg, v, &others)?,
        );
        total += rate(
            cfg,
            rs,
            c,
            v,
            u,
            interference_by_enumeration(c, cfg, u, &others)?,
        );
    }
    Ok(total)
}

/// Best of all `K^M` allocations. Returns its value and resources.
pub fn optimal_allocation(
    c: &Constellation,
    cfg: &RadioConfig,
    rs: &ResourceSet,
    pairs: &[(SatId, SatId)],
) -> Result<(f64, Vec<usize>)> {
    let m = pairs.len() as u32;
    let total = (rs.count as u64)
        .checked_pow(m)
        .filter(|&t| t <= 1 << 20)
        .ok_or_else(|| {
            Error::Precondition(format!(
                "{} resources over {m} pairs is too many to enumerate",
                rs.count
            ))
        })?;
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut ks = vec![0usize; pairs.len()];
    for code in 0..total {
        let mut rest = code;
        for k in ks.iter_mut() {
            *k = (rest % rs.count as u64) as usize;
            rest /= rs.count as u64;
        }
        let v = allocation_value(c, cfg, rs, pairs, &ks)?;
        if v > best.0 {
            best = (v, ks.clone());
        }
    }
    if pairs.is_empty() {
        best.0 = 0.0;
    }
    Ok(best)
}

/// Random small constellation of at most 8 satellites: 3 or 4 planes of 2
/// satellites with random plane longitudes, plane phases, slot spacing and
/// altitudes, and isotropic antennas.
pub fn random_instance<R: Rng>(rng: &mut R) -> Result<(Constellation, RadioConfig)> {
    let planes = rng.random_range(3..=4);
    let spread = rng.random_range(0.05..PI);
    let mut eps: Vec<f64> = (0..planes).map(|_| rng.random_range(0.0..spread)).collect();
    eps.sort_by(f64::total_cmp);
    let mut cfg = ConstellationConfig::walker_star(
        planes,
        2,
        rng.random_range(500e3..700e3),
        rng.random_range(0.0..20e3),
    );
    cfg.plane_longitudes = Some(eps);
    cfg.phase_offsets = (0..planes).map(|_| rng.random_range(0.0..TAU)).collect();
    let radio = RadioConfig {
        antenna: Antenna::Isotropic,
        eirpg_w: rng.random_range(1.0..50.0),
        ..RadioConfig::default()
    };
    Ok((Constellation::new(cfg)?, radio))
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct OracleSummary {
    pub instances: usize,
    /// Smallest `w(GIEM)/w(M*)` over instances with a non-empty optimum.
    pub matching_min_ratio: f64,
    /// Instances where greedy fell below half the optimum.
    pub matching_violations: usize,
    pub interference_checks: usize,
    pub interference_max_rel_err: f64,
    pub allocation_checks: usize,
    /// Instances where GRA beat the exhaustive optimum.
    pub gra_above_optimum: usize,
    /// Instances where round-robin beat GRA.
    pub gra_below_round_robin: usize,
    /// Instances where the best of 100 random allocations beat GRA.
    pub gra_below_random: usize,
    /// Smallest `w(GRA)/w(A*)`.
    pub gra_min_ratio: f64,
}

/// Compares the greedy solvers with the brute-force ones on `instances`
/// random constellations, with `Q = 1` for matching and `Q = 2`, `K ≤ 3` for
/// allocation.
pub fn compare_random(instances: usize, seed: u64) -> Result<OracleSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = OracleSummary {
        instances,
        matching_min_ratio: f64::INFINITY,
        gra_min_ratio: f64::INFINITY,
        ..OracleSummary::default()
    };
    for _ in 0..instances {
        let (c, radio) = random_instance(&mut rng)?;
        let g = FeasibilityGraph::build(&c, &radio);

        let greedy = giem(&g, 1, radio.r_min_bps).weight();
        let (best, _) = optimal_matching(&g, 1, radio.r_min_bps)?;
        if best > 0.0 {
            out.matching_min_ratio = out.matching_min_ratio.min(greedy / best);
        }
        if greedy < 0.5 * best * (1.0 - 1e-12) {
            out.matching_violations += 1;
        }

        let m = giem(&g, 2, radio.r_min_bps);
        if m.is_empty() || m.len() > 5 {
            continue;
        }
        let pairs: Vec<_> = ordered_pairs(&m).iter().map(|e| (e.u, e.v)).collect();
        let k = rng.random_range(1..=3);
        let scheme = if rng.random_bool(0.5) {
            AccessScheme::Ofdma
        } else {
            AccessScheme::Cdma
        };
        let rs = ResourceSet::new(k, scheme)?;

        // closed form against enumeration on one random plan
        let plan: Vec<_> = ordered_pairs(&m)
            .into_iter()
            .map(|e| (e, rng.random_range(0..k)))
            .collect();
        let alloc = evaluate(&c, &radio, &rs, &plan);
        for x in alloc.assignments() {
            let others: Vec<_> = alloc
                .assignments()
                .iter()
                .filter(|y| y.resource == x.resource && y.pair.key() != x.pair.key())
                .map(|y| (y.pair.u, y.pair.v))
                .collect();
            for rx in [x.pair.u, x.pair.v] {
                let closed = worst_case_interference(
                    &c,
                    &radio,
                    &alloc,
                    rx,
                    (x.pair.u, x.pair.v),
                    x.resource,
                )?;
                let brute = interference_by_enumeration(&c, &radio, rx, &others)?;
                let err = if brute == 0.0 {
                    closed.abs()
                } else {
                    (closed - brute).abs() / brute
                };
                out.interference_max_rel_err = out.interference_max_rel_err.max(err);
                out.interference_checks += 1;
            }
        }

        let w_gra = gra(&c, &radio, &rs, &m).value();
        let (w_opt, _) = optimal_allocation(&c, &radio, &rs, &pairs)?;
        let w_rr = round_robin(&c, &radio, &rs, &m).value();
        let w_rand = (0..100)
            .map(|_| random_alloc_with(&c, &radio, &rs, &m, &mut rng).value())
            .fold(0.0, f64::max);
        let tol = 1e-9 * w_opt.max(1.0);
        out.allocation_checks += 1;
        out.gra_above_optimum += usize::from(w_gra > w_opt + tol);
        out.gra_below_round_robin += usize::from(w_rr > w_gra + tol);
        out.gra_below_random += usize::from(w_rand > w_gra + tol);
        if w_opt > 0.0 {
            out.gra_min_ratio = out.gra_min_ratio.min(w_gra / w_opt);
        }
    }
    Ok(out)
}
