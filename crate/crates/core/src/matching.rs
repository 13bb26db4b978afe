//! Satellite matching: greedy from scratch (GIEM), greedy with memory of the
//! previous realization (GMM) and the logical-location benchmark (GEO).

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{Constellation, SatId};
use crate::graph::{Edge, FeasibilityGraph, Matching};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchingAlgorithm {
    Giem,
    Gmm,
    Geo,
}

impl MatchingAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            MatchingAlgorithm::Giem => "giem",
            MatchingAlgorithm::Gmm => "gmm",
            MatchingAlgorithm::Geo => "geo",
        }
    }

    /// Runs the algorithm. `prev` is only consulted by GMM.
    pub fn run(
        self,
        c: &Constellation,
        g: &FeasibilityGraph,
        q: usize,
        r_min_bps: f64,
        prev: &Matching,
    ) -> Matching {
        match self {
            MatchingAlgorithm::Giem => giem(g, q, r_min_bps),
            MatchingAlgorithm::Gmm => gmm(g, q, r_min_bps, prev),
            MatchingAlgorithm::Geo => geo(c, g, q, r_min_bps),
        }
    }
}

impl fmt::Display for MatchingAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatchingAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "giem" => Ok(MatchingAlgorithm::Giem),
            "gmm" => Ok(MatchingAlgorithm::Gmm),
            "geo" => Ok(MatchingAlgorithm::Geo),
            other => Err(Error::InvalidConfig(format!(
                "unknown matching algorithm '{other}'"
            ))),
        }
    }
}

/// One realization of a matching algorithm.
#[derive(Clone, Debug)]
pub struct MatchingResult {
    pub matching: Matching,
    pub realization: usize,
    pub runtime_s: f64,
    /// Pairs of `matching` absent from the previous realization.
    pub churn: usize,
    /// Per pair of `matching`: whether it was present in the previous
    /// realization.
    pub retained: Vec<bool>,
}

impl MatchingResult {
    /// Times `algo` on the given snapshot and compares it with `prev`.
    pub fn realize(
        algo: MatchingAlgorithm,
        realization: usize,
        c: &Constellation,
        g: &FeasibilityGraph,
        q: usize,
        r_min_bps: f64,
        prev: &Matching,
    ) -> Self {
        let start = Instant::now();
        let matching = algo.run(c, g, q, r_min_bps, prev);
        let runtime_s = start.elapsed().as_secs_f64();
        let mut out = Self {
            matching,
            realization,
            runtime_s,
            churn: 0,
            retained: Vec::new(),
        };
        out.compare_with(prev);
        out
    }

    /// Recomputes `retained` and `churn` against `prev`.
    pub fn compare_with(&mut self, prev: &Matching) {
        let previous: HashSet<_> = prev.pairs().iter().map(Edge::key).collect();
        self.retained = self
            .matching
            .pairs()
            .iter()
            .map(|e| previous.contains(&e.key()))
            .collect();
        self.churn = self.retained.iter().filter(|&&r| !r).count();
    }
}

fn greedy_fill<'a>(m: &mut Matching, candidates: impl IntoIterator<Item = &'a Edge>, q: usize) {
    let mut list: Vec<&Edge> = candidates.into_iter().collect();
    list.sort_by(|a, b| Edge::greedy_order(a, b));
    for e in list {
        m.try_insert(e, q);
    }
}

/// Greedy matching from scratch: heaviest admissible edge first.
pub fn giem(g: &FeasibilityGraph, q: usize, r_min_bps: f64) -> Matching {
    let mut m = Matching::new(g.vertex_count());
    greedy_fill(
        &mut m,
        g.edges().iter().filter(|e| e.above_threshold(r_min_bps)),
        q,
    );
    m
}

/// Greedy matching that first keeps every pair of `prev` that is still
/// feasible, then fills the remaining antennas greedily.
pub fn gmm(g: &FeasibilityGraph, q: usize, r_min_bps: f64, prev: &Matching) -> Matching {
    let mut m = Matching::new(g.vertex_count());

    let mut kept: Vec<(&Edge, f64)> = prev
        .pairs()
        .iter()
        .filter_map(|old| g.get(old.u, old.v).map(|cur| (cur, old.weight())))
        .filter(|(cur, _)| cur.above_threshold(r_min_bps))
        .collect();
    kept.sort_by(|(a, wa), (b, wb)| wb.total_cmp(wa).then_with(|| a.key().cmp(&b.key())));

    for (e, _) in kept {
        m.try_insert(e, q);
    }

    // sides taken by retained pairs stay taken
    let retained = m.clone();
    greedy_fill(
        &mut m,
        g.edges().iter().filter(|e| {
            e.above_threshold(r_min_bps)
                && retained.side_free(e.u, e.dir_u)
                && retained.side_free(e.v, e.dir_v)
        }),
        q,
    );
    m
}

/// Logical location (`0..N_p`) of every satellite: the index of the
/// `2π/N_p`-wide phase band it occupies.
pub fn logical_locations(c: &Constellation) -> Vec<usize> {
    let cfg = c.config();
    let np = cfg.sats_per_plane;
    let width = cfg.slot_width();
    let base: Vec<usize> = (0..cfg.planes)
        .map(|p| ((c.plane_phase(p) / width).floor() as usize).min(np - 1))
        .collect();
    c.satellites()
        .iter()
        .map(|s| (base[s.plane] + s.slot) % np)
        .collect()
}

/// Geographic benchmark: satellites of neighbouring planes sharing a logical
/// location are paired in one pass. With a single transceiver the pairings
/// alternate between the two neighbours in a checkerboard over
/// (plane, location) so that each satellite gets at most one link.
pub fn geo(c: &Constellation, g: &FeasibilityGraph, q: usize, r_min_bps: f64) -> Matching {
    let cfg = c.config();
    let (planes, np) = (cfg.planes, cfg.sats_per_plane);
    let mut m = Matching::new(g.vertex_count());
    if planes < 3 {
        return m;
    }
    let loc = logical_locations(c);
    let mut at = vec![vec![SatId(0); np]; planes];
    for s in c.satellites() {
        at[s.plane][loc[s.id.0]] = s.id;
    }
    for p in 0..planes - 1 {
        for (l, (&a, &b)) in at[p].iter().zip(&at[p + 1]).enumerate() {
            if q == 1 && (p + l) % 2 == 1 {
                continue;
            }
            if let Some(e) = g.get(a, b) {
                if e.above_threshold(r_min_bps) {
                    m.try_insert(e, q);
                }
            }
        }
    }
    m
}
