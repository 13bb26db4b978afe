//! Orthogonal resource allocation over a fixed matching.
//!
//! Every directed rate is the worst-case SINR rate: at the receiver, each
//! other pair on the same resource contributes the louder of its two
//! endpoints. Rates already include the access-scheme adjustment, so
//! [`Allocation::value`] is the effective sum rate.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::Constellation;
use crate::graph::{Allocation, Assignment, Edge, Matching};
use crate::linkbudget::{effective_rate, pair_interference, RadioConfig, ResourceSet};

/// Generator behind [`random_alloc`]; recorded in run manifests.
pub const RANDOM_GENERATOR: &str = "chacha8/rand_chacha-0.9/seed_from_u64/rand-0.9-random_range";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationAlgorithm {
    Gra,
    #[serde(alias = "rr")]
    RoundRobin,
    Random,
    None,
}

impl AllocationAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            AllocationAlgorithm::Gra => "gra",
            AllocationAlgorithm::RoundRobin => "rr",
            AllocationAlgorithm::Random => "random",
            AllocationAlgorithm::None => "none",
        }
    }
}

impl fmt::Display for AllocationAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AllocationAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gra" => Ok(AllocationAlgorithm::Gra),
            "rr" | "round_robin" | "round-robin" => Ok(AllocationAlgorithm::RoundRobin),
            "random" => Ok(AllocationAlgorithm::Random),
            "none" => Ok(AllocationAlgorithm::None),
            other => Err(Error::InvalidConfig(format!(
                "unknown allocation algorithm '{other}'"
            ))),
        }
    }
}

/// Matched pairs in descending weight order (the list `L_M`).
pub fn ordered_pairs(m: &Matching) -> Vec<Edge> {
    let mut pairs = m.pairs().to_vec();
    pairs.sort_by(Edge::greedy_order);
    pairs
}

/// Computes the worst-case rates of every pair given the resource of each.
pub fn evaluate(
    c: &Constellation,
    cfg: &RadioConfig,
    rs: &ResourceSet,
    plan: &[(Edge, usize)],
) -> Allocation {
    let assignments = plan
        .iter()
        .enumerate()
        .map(|(i, &(pair, k))| {
            let (mut at_u, mut at_v) = (0.0, 0.0);
            for (j, &(other, kk)) in plan.iter().enumerate() {
                if j == i || kk != k {
                    continue;
                }
                at_v += pair_interference(c, cfg, pair.v, other.u, other.v);
                at_u += pair_interference(c, cfg, pair.u, other.u, other.v);
            }
            Assignment {
                pair,
                resource: k,
                rate_uv_bps: effective_rate(cfg, rs, pair.path_loss(), at_v),
                rate_vu_bps: effective_rate(cfg, rs, pair.path_loss(), at_u),
            }
        })
        .collect();
    Allocation::new(assignments)
}

/// `w(A)` recomputed from scratch on the final resources of `alloc`.
pub fn allocation_value(
    c: &Constellation,
    cfg: &RadioConfig,
    rs: &ResourceSet,
    alloc: &Allocation,
) -> f64 {
    let plan: Vec<_> = alloc
        .assignments()
        .iter()
        .map(|a| (a.pair, a.resource))
        .collect();
    evaluate(c, cfg, rs, &plan).value()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GraMode {
    /// Only pairs sharing the candidate resource are re-evaluated.
    #[default]
    Incremental,
    /// Every candidate allocation is evaluated from scratch.
    Full,
}

/// Counters collected while running GRA.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GraStats {
    /// Pairwise interference terms computed.
    pub interference_terms: u64,
    /// Directed rates computed.
    pub rate_evaluations: u64,
    /// `w(A)` as tracked step by step.
    pub incremental_value: f64,
}

/// Relative gap below which two GRA gains count as tied. Gains that are
/// equal in exact arithmetic come out of different summation orders.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Member of a resource while GRA runs, with its accumulated interference.
#[derive(Clone, Copy)]
struct Member {
    pair: Edge,
    at_u: f64,
    at_v: f64,
}

impl Member {
    fn value(&self, cfg: &RadioConfig, rs: &ResourceSet) -> f64 {
        effective_rate(cfg, rs, self.pair.path_loss(), self.at_v)
            + effective_rate(cfg, rs, self.pair.path_loss(), self.at_u)
    }
}

/// Greedy resource allocation: pairs in descending weight order each take
/// the resource that maximises the total worst-case sum rate so far; ties go
/// to the lowest resource index.
pub fn gra(c: &Constellation, cfg: &RadioConfig, rs: &ResourceSet, m: &Matching) -> Allocation {
    gra_instrumented(c, cfg, rs, m, GraMode::Incremental).0
}

pub fn gra_instrumented(
    c: &Constellation,
    cfg: &RadioConfig,
    rs: &ResourceSet,
    m: &Matching,
    mode: GraMode,
) -> (Allocation, GraStats) {
    let k_count = rs.count;
    let mut stats = GraStats::default();
    let mut members: Vec<Vec<Member>> = vec![Vec::new(); k_count];
    let mut value_of: Vec<f64> = vec![0.0; k_count];
    let mut plan: Vec<(Edge, usize)> = Vec::with_capacity(m.len());

    for pair in ordered_pairs(m) {
        let mut best: Option<(usize, f64, Vec<Member>, f64)> = None;
        for k in 0..k_count {
            let (candidate, new_value, gain) = match mode {
                GraMode::Incremental => {
                    let mut cand = members[k].clone();
                    let mut me = Member {
                        pair,
                        at_u: 0.0,
                        at_v: 0.0,
                    };
                    for x in cand.iter_mut() {
                        me.at_u += pair_interference(c, cfg, pair.u, x.pair.u, x.pair.v);
                        me.at_v += pair_interference(c, cfg, pair.v, x.pair.u, x.pair.v);
                        x.at_u += pair_interference(c, cfg, x.pair.u, pair.u, pair.v);
                        x.at_v += pair_interference(c, cfg, x.pair.v, pair.u, pair.v);
                        stats.interference_terms += 4;
                    }
                    cand.push(me);
                    stats.rate_evaluations += 2 * cand.len() as u64;
                    let v: f64 = cand.iter().map(|x| x.value(cfg, rs)).sum();
                    (cand, v, v - value_of[k])
                }
                GraMode::Full => {
                    let mut trial = plan.clone();
                    trial.push((pair, k));
                    let total = evaluate(c, cfg, rs, &trial).value();
                    let n = trial.len() as u64;
                    stats.interference_terms += 2 * n * n.saturating_sub(1);
                    stats.rate_evaluations += 2 * n;
                    let current: f64 = value_of.iter().sum();
                    (Vec::new(), 0.0, total - current)
                }
            };
            if best
                .as_ref()
                .is_none_or(|b| gain > b.1 + TIE_TOLERANCE * b.1.abs().max(1.0))
            {
                best = Some((k, gain, candidate, new_value));
            }
        }
        let (k, gain, candidate, new_value) = best.expect("at least one resource");
        match mode {
            GraMode::Incremental => {
                members[k] = candidate;
                value_of[k] = new_value;
            }
            GraMode::Full => value_of[k] += gain,
        }
        plan.push((pair, k));
    }

    stats.incremental_value = value_of.iter().sum();
    (evaluate(c, cfg, rs, &plan), stats)
}

/// Pair `i` of the descending-weight list gets resource `i mod K`.
pub fn round_robin(
    c: &Constellation,
    cfg: &RadioConfig,
    rs: &ResourceSet,
    m: &Matching,
) -> Allocation {
    let plan: Vec<_> = ordered_pairs(m)
        .into_iter()
        .enumerate()
        .map(|(i, e)| (e, i % rs.count))
        .collect();
    evaluate(c, cfg, rs, &plan)
}

/// Each pair draws a uniform resource from `rng`, in descending-weight order.
pub fn random_alloc_with<R: Rng>(
    c: &Constellation,
    cfg: &RadioConfig,
    rs: &ResourceSet,
    m: &Matching,
    rng: &mut R,
) -> Allocation {
    let plan: Vec<_> = ordered_pairs(m)
        .into_iter()
        .map(|e| (e, rng.random_range(0..rs.count)))
        .collect();
    evaluate(c, cfg, rs, &plan)
}

pub fn random_alloc(
    c: &Constellation,
    cfg: &RadioConfig,
    rs: &ResourceSet,
    m: &Matching,
    seed: u64,
) -> Allocation {
    random_alloc_with(c, cfg, rs, m, &mut ChaCha8Rng::seed_from_u64(seed))
}
