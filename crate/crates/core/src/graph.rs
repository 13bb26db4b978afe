//! Feasibility, matching and allocation graphs.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{Constellation, Direction, SatId};
use crate::linkbudget::{fspl, rate_snr, snr, PathLoss, RadioConfig};

/// Feasible inter-plane satellite pair. Stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: SatId,
    pub v: SatId,
    pub plane_u: usize,
    pub plane_v: usize,
    pub dist_m: f64,
    pub loss: f64,
    /// Interference-free rate in either direction, `R*_SNR(uv)`.
    pub rate_snr_bps: f64,
    /// Direction of `v` seen from `u`.
    pub dir_u: Direction,
    /// Direction of `u` seen from `v`.
    pub dir_v: Direction,
}

impl Edge {
    /// Matching weight `2·R*_SNR(uv)`.
    pub fn weight(&self) -> f64 {
        2.0 * self.rate_snr_bps
    }

    pub fn key(&self) -> (SatId, SatId) {
        (self.u, self.v)
    }

    pub fn same_pair(&self, a: SatId, b: SatId) -> bool {
        (self.u == a && self.v == b) || (self.u == b && self.v == a)
    }

    pub fn touches(&self, x: SatId) -> bool {
        self.u == x || self.v == x
    }

    pub fn path_loss(&self) -> PathLoss {
        PathLoss::Finite(self.loss)
    }

    pub fn above_threshold(&self, r_min_bps: f64) -> bool {
        self.rate_snr_bps >= r_min_bps
    }

    /// Descending weight, ties broken by `(plane_u, u, plane_v, v)`.
    pub fn greedy_order(a: &Edge, b: &Edge) -> std::cmp::Ordering {
        b.weight()
            .total_cmp(&a.weight())
            .then_with(|| (a.plane_u, a.u, a.plane_v, a.v).cmp(&(b.plane_u, b.u, b.plane_v, b.v)))
    }
}

pub fn ordered_key(a: SatId, b: SatId) -> (SatId, SatId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Graph of feasible inter-plane ISLs at one instant. Edges below `R_min`
/// are kept; consumers filter with [`Edge::above_threshold`].
#[derive(Clone, Debug)]
pub struct FeasibilityGraph {
    vertices: usize,
    edges: Vec<Edge>,
    index: HashMap<(SatId, SatId), usize>,
}

impl FeasibilityGraph {
    pub fn build(c: &Constellation, cfg: &RadioConfig) -> Self {
        let planes = c.config().planes;
        let sats = c.satellites();
        let edges: Vec<Edge> = sats
            .par_iter()
            .flat_map_iter(|a| {
                sats[a.id.0 + 1..].iter().filter_map(move |b| {
                    let gap = a.plane.abs_diff(b.plane);
                    if gap == 0 || gap == planes - 1 || !c.has_los(a.id, b.id) {
                        return None;
                    }
                    let dist = c.distance(a.id, b.id);
                    let loss = match fspl(cfg, dist, true) {
                        Ok(PathLoss::Finite(l)) => l,
                        _ => {
                            log::warn!("satellites {} and {} coincide; pair skipped", a.id, b.id);
                            return None;
                        }
                    };
                    Some(Edge {
                        u: a.id,
                        v: b.id,
                        plane_u: a.plane,
                        plane_v: b.plane,
                        dist_m: dist,
                        loss,
                        rate_snr_bps: rate_snr(cfg, snr(cfg, PathLoss::Finite(loss))),
                        dir_u: c.relative_direction(a.id, b.id),
                        dir_v: c.relative_direction(b.id, a.id),
                    })
                })
            })
            .collect();
        Self::from_edges(c.len(), edges)
    }

    /// Graph over `vertices` satellites from pre-built edges. Edge endpoints
    /// are normalised to `u < v`.
    pub fn from_edges(vertices: usize, edges: Vec<Edge>) -> Self {
        let edges: Vec<Edge> = edges
            .into_iter()
            .map(|e| {
                if e.u <= e.v {
                    e
                } else {
                    Edge {
                        u: e.v,
                        v: e.u,
                        plane_u: e.plane_v,
                        plane_v: e.plane_u,
                        dir_u: e.dir_v,
                        dir_v: e.dir_u,
                        ..e
                    }
                }
            })
            .collect();
        let index = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.key(), i))
            .collect();
        Self {
            vertices,
            edges,
            index,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn get(&self, a: SatId, b: SatId) -> Option<&Edge> {
        self.index.get(&ordered_key(a, b)).map(|&i| &self.edges[i])
    }

    /// Degree of every vertex counting only edges that reach `r_min_bps`.
    pub fn degrees(&self, r_min_bps: f64) -> Vec<usize> {
        let mut deg = vec![0; self.vertices];
        for e in self.edges.iter().filter(|e| e.above_threshold(r_min_bps)) {
            deg[e.u.0] += 1;
            deg[e.v.0] += 1;
        }
        deg
    }

    /// δ(G) over edges that reach `r_min_bps`.
    pub fn min_degree(&self, r_min_bps: f64) -> usize {
        self.degrees(r_min_bps).into_iter().min().unwrap_or(0)
    }

    /// Edge list as CSV: `u,v,plane_u,plane_v,dist_m,rate_snr_bps`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "v", "plane_u", "plane_v", "dist_m", "rate_snr_bps"])?;
        for e in &self.edges {
            w.write_record([
                e.u.to_string(),
                e.v.to_string(),
                e.plane_u.to_string(),
                e.plane_v.to_string(),
                crate::report::sig9(e.dist_m),
                crate::report::sig9(e.rate_snr_bps),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Inter-plane matching with per-satellite antenna bookkeeping.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Matching {
    pairs: Vec<Edge>,
    /// Occupied antenna slots per satellite, indexed by [`Direction::slot`].
    slots: Vec<[bool; 2]>,
}

impl Matching {
    pub fn new(vertices: usize) -> Self {
        Self {
            pairs: Vec::new(),
            slots: vec![[false; 2]; vertices],
        }
    }

    pub fn pairs(&self) -> &[Edge] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.slots.len()
    }

    pub fn degree(&self, x: SatId) -> usize {
        self.slots[x.0].iter().filter(|&&s| s).count()
    }

    pub fn directional_degree(&self, x: SatId, d: Direction) -> usize {
        d.slot().map_or(0, |s| self.slots[x.0][s] as usize)
    }

    /// Σ of edge weights, `w(M)`.
    pub fn weight(&self) -> f64 {
        self.pairs.iter().map(Edge::weight).sum()
    }

    pub fn contains(&self, a: SatId, b: SatId) -> bool {
        self.pairs.iter().any(|e| e.same_pair(a, b))
    }

    /// Whether the antenna of `x` facing `d` is unused.
    pub fn side_free(&self, x: SatId, d: Direction) -> bool {
        d.slot().is_some_and(|s| !self.slots[x.0][s])
    }

    /// Whether `e` can join the matching while both endpoints keep a
    /// permissible neighborhood with `q` transceivers.
    pub fn degree_check(&self, e: &Edge, q: usize) -> bool {
        let (Some(su), Some(sv)) = (e.dir_u.slot(), e.dir_v.slot()) else {
            log::debug!(
                "edge ({}, {}) has no pitch-axis direction; rejected",
                e.u,
                e.v
            );
            return false;
        };
        !self.slots[e.u.0][su]
            && !self.slots[e.v.0][sv]
            && self.degree(e.u) < q
            && self.degree(e.v) < q
    }

    /// Adds `e` if [`Matching::degree_check`] passes.
    pub fn try_insert(&mut self, e: &Edge, q: usize) -> bool {
        if !self.degree_check(e, q) {
            return false;
        }
        self.slots[e.u.0][e.dir_u.slot().unwrap()] = true;
        self.slots[e.v.0][e.dir_v.slot().unwrap()] = true;
        self.pairs.push(*e);
        true
    }

    /// Definition check used after every realization: no satellite exceeds
    /// `q` links or uses one antenna side twice.
    pub fn is_permissible(&self, q: usize) -> bool {
        let mut used = vec![[0usize; 2]; self.slots.len()];
        for e in &self.pairs {
            for (x, d) in [(e.u, e.dir_u), (e.v, e.dir_v)] {
                match d.slot() {
                    Some(s) => used[x.0][s] += 1,
                    None => return false,
                }
            }
        }
        used.iter().all(|[m, p]| *m <= 1 && *p <= 1 && m + p <= q)
    }
}

/// Resource assigned to one matched pair with its worst-case directed rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Assignment {
    pub pair: Edge,
    /// Zero-based resource index.
    pub resource: usize,
    /// `R*_SINR(u, v, k)`: rate from `pair.u` to `pair.v`.
    pub rate_uv_bps: f64,
    /// `R*_SINR(v, u, k)`.
    pub rate_vu_bps: f64,
}

impl Assignment {
    pub fn weight(&self) -> f64 {
        self.rate_uv_bps + self.rate_vu_bps
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Allocation {
    assignments: Vec<Assignment>,
}

impl Allocation {
    pub fn new(assignments: Vec<Assignment>) -> Self {
        Self { assignments }
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// `w(A)`: sum of both directed rates over all assignments.
    pub fn value(&self) -> f64 {
        self.assignments.iter().map(Assignment::weight).sum()
    }

    pub fn resources(&self) -> Vec<usize> {
        self.assignments.iter().map(|a| a.resource).collect()
    }

    /// True when every pair of `m` holds exactly one resource and nothing
    /// else is allocated.
    pub fn covers(&self, m: &Matching) -> bool {
        if self.assignments.len() != m.len() {
            return false;
        }
        let mut seen = HashMap::new();
        for a in &self.assignments {
            if seen.insert(a.pair.key(), ()).is_some() {
                return false;
            }
        }
        m.pairs().iter().all(|e| seen.contains_key(&e.key()))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::ConstellationConfig;

    pub(crate) fn edge(u: usize, v: usize, du: Direction, dv: Direction, rate: f64) -> Edge {
        Edge {
            u: SatId(u),
            v: SatId(v),
            plane_u: u,
            plane_v: v,
            dist_m: 1e6,
            loss: 1e17,
            rate_snr_bps: rate,
            dir_u: du,
            dir_v: dv,
        }
    }

    #[test]
    fn two_planes_have_no_edges() {
        let c = Constellation::new(ConstellationConfig::walker_star(2, 20, 600e3, 10e3)).unwrap();
        let g = FeasibilityGraph::build(&c, &RadioConfig::default());
        assert!(g.edges().is_empty());
    }

    #[test]
    fn edges_are_simple_and_inter_plane() {
        let c = Constellation::new(ConstellationConfig::walker_star(5, 10, 600e3, 10e3))
            .unwrap()
            .propagate(300.0)
            .unwrap();
        let g = FeasibilityGraph::build(&c, &RadioConfig::default());
        let n = c.len();
        let bound = (n * n - 5 * 10 * 10) / 2;
        assert!(!g.edges().is_empty());
        assert!(g.edges().len() < bound);
        let mut keys: Vec<_> = g.edges().iter().map(Edge::key).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), g.edges().len());
        for e in g.edges() {
            assert!(e.u < e.v);
            let gap = e.plane_u.abs_diff(e.plane_v);
            assert!(gap != 0 && gap != 4);
            assert!(c.has_los(e.u, e.v));
            assert_eq!(g.get(e.v, e.u).unwrap(), e);
        }
    }

    #[test]
    fn degree_check_cases() {
        use Direction::*;
        let mut m = Matching::new(4);
        let a = edge(0, 1, Plus, Minus, 1e5);
        assert!(m.degree_check(&a, 1));
        assert!(m.try_insert(&a, 1));
        // quota reached at satellite 0
        let b = edge(0, 2, Minus, Plus, 1e5);
        assert!(!m.degree_check(&b, 1));

        let mut m = Matching::new(4);
        m.try_insert(&edge(0, 1, Minus, Plus, 1e5), 2);
        assert!(m.degree_check(&edge(0, 2, Plus, Minus, 1e5), 2));
        assert!(!m.degree_check(&edge(0, 3, Minus, Minus, 1e5), 2));
        assert!(!m.degree_check(&edge(2, 3, Zero, Minus, 1e5), 2));
        assert!(m.is_permissible(2));
    }

    #[test]
    fn allocation_cover() {
        use Direction::*;
        let mut m = Matching::new(4);
        let e = edge(0, 1, Plus, Minus, 1e5);
        m.try_insert(&e, 2);
        let a = Allocation::new(vec![Assignment {
            pair: e,
            resource: 0,
            rate_uv_bps: 1.0,
            rate_vu_bps: 2.0,
        }]);
        assert!(a.covers(&m));
        assert_eq!(a.value(), 3.0);
        assert!(!Allocation::default().covers(&m));
    }
}
