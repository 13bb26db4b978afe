//! Monte Carlo experiments: the constellation is rotated by one matching
//! period, the feasibility graph is rebuilt, and matching plus optional
//! resource allocation run on the new snapshot.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{gra, random_alloc, round_robin, AllocationAlgorithm};
use crate::error::{Error, Result};
use crate::geometry::{Constellation, ConstellationConfig, SatId};
use crate::graph::{Allocation, Edge, FeasibilityGraph, Matching};
use crate::linkbudget::{RadioConfig, ResourceSet, SPEED_OF_LIGHT};
use crate::matching::{MatchingAlgorithm, MatchingResult};

/// Realizations whose snapshots are built together before being consumed in
/// order.
const CHUNK: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub constellation: ConstellationConfig,
    pub radio: RadioConfig,
    /// `Q`.
    pub transceivers: usize,
    pub matching_algo: MatchingAlgorithm,
    pub allocation_algo: AllocationAlgorithm,
    pub resource_set: ResourceSet,
    /// `T` (s).
    pub period_s: f64,
    /// `N_sim`.
    pub n_sim: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.constellation.validate()?;
        self.radio.validate()?;
        if self.transceivers == 0 {
            return Err(Error::InvalidConfig(
                "at least one transceiver required".into(),
            ));
        }
        if !(self.period_s > 0.0 && self.period_s.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "matching period must be positive, got {}",
                self.period_s
            )));
        }
        if self.n_sim == 0 {
            return Err(Error::InvalidConfig(
                "at least one realization required".into(),
            ));
        }
        if self.resource_set.count == 0 {
            return Err(Error::InvalidConfig(
                "at least one resource required".into(),
            ));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!(
            "P{}-Np{}-Q{}-{}-{}-K{}-{}-{}",
            self.constellation.planes,
            self.constellation.sats_per_plane,
            self.transceivers,
            self.matching_algo,
            self.allocation_algo,
            self.resource_set.count,
            match self.resource_set.scheme {
                crate::linkbudget::AccessScheme::Ofdma => "ofdma",
                crate::linkbudget::AccessScheme::Cdma => "cdma",
            },
            match self.radio.antenna {
                crate::linkbudget::Antenna::NarrowBeam => "narrow",
                crate::linkbudget::Antenna::Isotropic => "isotropic",
            }
        )
    }

    /// Seed of the random allocator at realization `n`.
    pub fn realization_seed(&self, n: usize) -> u64 {
        self.seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }

    fn allocate(&self, n: usize, c: &Constellation, m: &Matching) -> Option<Allocation> {
        let (cfg, rs) = (&self.radio, &self.resource_set);
        match self.allocation_algo {
            AllocationAlgorithm::None => None,
            AllocationAlgorithm::Gra => Some(gra(c, cfg, rs, m)),
            AllocationAlgorithm::RoundRobin => Some(round_robin(c, cfg, rs, m)),
            AllocationAlgorithm::Random => {
                Some(random_alloc(c, cfg, rs, m, self.realization_seed(n)))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Keep every realization (matching, allocation) in [`Run::realizations`].
    pub keep_realizations: bool,
    /// Also keep each realization's feasibility edges.
    pub keep_edges: bool,
}

/// One matching period.
#[derive(Clone, Debug)]
pub struct Realization {
    /// One-based realization index.
    pub n: usize,
    pub epoch_s: f64,
    /// δ(G) over edges reaching `R_min`.
    pub min_degree: usize,
    pub matching: MatchingResult,
    pub allocation: Option<Allocation>,
    pub allocation_runtime_s: f64,
    pub edges: Option<Vec<Edge>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeRow {
    pub sat: usize,
    pub plane: usize,
    pub slot: usize,
    pub phase: f64,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub label: String,
    /// `μ̂_M` from matching sizes.
    pub mu_m_hat: f64,
    /// `μ̂_M` from matched degrees; equals `mu_m_hat`.
    pub mu_m_hat_degrees: f64,
    /// `μ̂_M` over its ceiling `Q(P−1)N_p/(2N)`.
    pub mu_m_hat_relative: f64,
    /// `μ_R*SNR(M)` (bit/s).
    pub mu_r_snr: f64,
    /// `μ̂_R*SINR(A)`; `None` without allocation or without any link.
    pub mu_r_sinr_hat: Option<f64>,
    /// Mean `w(A)` (bit/s).
    pub mu_r_sinr: Option<f64>,
    /// Sorted per-ISL `R*_SNR` (bit/s).
    pub rate_cdf: Vec<f64>,
    /// Sorted per-ISL propagation delay (s).
    pub delay_cdf: Vec<f64>,
    /// Per-realization matching runtime (s), in realization order.
    pub matching_runtime_s: Vec<f64>,
    /// Per-realization allocation runtime (s), in realization order.
    pub allocation_runtime_s: Vec<f64>,
    /// Sorted matching plus allocation runtime (s).
    pub runtime_cdf: Vec<f64>,
    /// Pairs of `M(n)` absent from `M(n−1)`, with `M(0) = ∅`.
    pub churn_series: Vec<usize>,
    pub matched_series: Vec<usize>,
    /// δ(G) per realization.
    pub min_degree_series: Vec<usize>,
    /// Realizations whose matching broke the per-satellite antenna rules.
    pub permissibility_violations: usize,
    /// Degrees after the first realization.
    pub first_degrees: Vec<DegreeRow>,
}

impl MetricsReport {
    pub fn min_degree(&self) -> usize {
        self.min_degree_series.iter().copied().min().unwrap_or(0)
    }

    /// The report with wall-clock fields cleared, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            matching_runtime_s: Vec::new(),
            allocation_runtime_s: Vec::new(),
            runtime_cdf: Vec::new(),
            ..self.clone()
        }
    }
}

pub struct Run {
    pub spec: ExperimentSpec,
    pub report: MetricsReport,
    pub realizations: Vec<Realization>,
}

struct Snapshot {
    n: usize,
    constellation: Constellation,
    graph: FeasibilityGraph,
}

fn snapshot(spec: &ExperimentSpec, c0: &Constellation, n: usize) -> Result<Snapshot> {
    let constellation = c0.propagate(spec.period_s * n as f64)?;
    let graph = FeasibilityGraph::build(&constellation, &spec.radio);
    Ok(Snapshot {
        n,
        constellation,
        graph,
    })
}

fn realize(spec: &ExperimentSpec, s: &Snapshot, prev: &Matching, opts: &RunOptions) -> Realization {
    let q = spec.transceivers;
    let r_min = spec.radio.r_min_bps;
    let matching = MatchingResult::realize(
        spec.matching_algo,
        s.n,
        &s.constellation,
        &s.graph,
        q,
        r_min,
        prev,
    );
    let start = Instant::now();
    let allocation = spec.allocate(s.n, &s.constellation, &matching.matching);
    let allocation_runtime_s = if allocation.is_some() {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    Realization {
        n: s.n,
        epoch_s: s.constellation.epoch(),
        min_degree: s.graph.min_degree(r_min),
        matching,
        allocation,
        allocation_runtime_s,
        edges: opts.keep_edges.then(|| s.graph.edges().to_vec()),
    }
}

#[derive(Default)]
struct Accumulator {
    pairs: usize,
    degree_sum: usize,
    w_m: f64,
    w_a: f64,
    allocated: bool,
    rates: Vec<f64>,
    delays: Vec<f64>,
    match_rt: Vec<f64>,
    alloc_rt: Vec<f64>,
    churn: Vec<usize>,
    matched: Vec<usize>,
    min_degree: Vec<usize>,
    violations: usize,
    first_degrees: Vec<DegreeRow>,
}

impl Accumulator {
    fn push(&mut self, spec: &ExperimentSpec, r: &Realization, c: &Constellation) {
        let m = &r.matching.matching;
        self.pairs += m.len();
        self.degree_sum += (0..m.vertex_count())
            .map(|x| m.degree(SatId(x)))
            .sum::<usize>();
        self.w_m += m.weight();
        if let Some(a) = &r.allocation {
            self.allocated = true;
            self.w_a += a.value();
        }
        for e in m.pairs() {
            self.rates.push(e.rate_snr_bps);
            self.delays.push(e.dist_m / SPEED_OF_LIGHT);
        }
        self.match_rt.push(r.matching.runtime_s);
        self.alloc_rt.push(r.allocation_runtime_s);
        self.churn.push(r.matching.churn);
        self.matched.push(m.len());
        self.min_degree.push(r.min_degree);
        if !m.is_permissible(spec.transceivers) {
            self.violations += 1;
        }
        if r.n == 1 {
            self.first_degrees = c
                .satellites()
                .iter()
                .map(|s| DegreeRow {
                    sat: s.id.0,
                    plane: s.plane,
                    slot: s.slot,
                    phase: s.phase,
                    degree: m.degree(s.id),
                })
                .collect();
        }
    }

    fn finish(mut self, spec: &ExperimentSpec) -> MetricsReport {
        let n_sim = spec.n_sim as f64;
        let sats = spec.constellation.total_satellites() as f64;
        let mu_m_hat = self.pairs as f64 / (n_sim * sats);
        let ceiling = (spec.transceivers.min(2)
            * (spec.constellation.planes - 1)
            * spec.constellation.sats_per_plane) as f64
            / (2.0 * sats);
        let mu_r_snr = self.w_m / n_sim;
        let (mu_r_sinr_hat, mu_r_sinr) = if self.allocated {
            let hat = (self.w_m > 0.0).then(|| self.w_a / self.w_m);
            (hat, Some(self.w_a / n_sim))
        } else {
            (None, None)
        };
        self.rates.sort_by(f64::total_cmp);
        self.delays.sort_by(f64::total_cmp);
        let mut runtime_cdf: Vec<f64> = self
            .match_rt
            .iter()
            .zip(&self.alloc_rt)
            .map(|(a, b)| a + b)
            .collect();
        runtime_cdf.sort_by(f64::total_cmp);
        MetricsReport {
            label: spec.label(),
            mu_m_hat,
            mu_m_hat_degrees: self.degree_sum as f64 / (2.0 * n_sim * sats),
            mu_m_hat_relative: if ceiling > 0.0 {
                mu_m_hat / ceiling
            } else {
                0.0
            },
            mu_r_snr,
            mu_r_sinr_hat,
            mu_r_sinr,
            rate_cdf: self.rates,
            delay_cdf: self.delays,
            matching_runtime_s: self.match_rt,
            allocation_runtime_s: self.alloc_rt,
            runtime_cdf,
            churn_series: self.churn,
            matched_series: self.matched,
            min_degree_series: self.min_degree,
            permissibility_violations: self.violations,
            first_degrees: self.first_degrees,
        }
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<MetricsReport> {
    Ok(run_detailed(spec, &RunOptions::default())?.report)
}

/// Runs all realizations of `spec`. GMM realizations are matched strictly in
/// order; the others are matched in parallel and compared with their
/// predecessor afterwards.
pub fn run_detailed(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Run> {
    spec.validate()?;
    let c0 = Constellation::new(spec.constellation.clone())?;
    let empty = Matching::new(c0.len());
    let mut prev = empty.clone();
    let mut acc = Accumulator::default();
    let mut kept = Vec::new();

    let mut start = 1;
    while start <= spec.n_sim {
        let end = (start + CHUNK).min(spec.n_sim + 1);
        let snaps: Vec<Snapshot> = (start..end)
            .into_par_iter()
            .map(|n| snapshot(spec, &c0, n))
            .collect::<Result<_>>()?;
        let reals: Vec<Realization> = if spec.matching_algo == MatchingAlgorithm::Gmm {
            let mut out = Vec::with_capacity(snaps.len());
            for s in &snaps {
                let r = realize(spec, s, &prev, opts);
                prev = r.matching.matching.clone();
                out.push(r);
            }
            out
        } else {
            let mut out: Vec<Realization> = snaps
                .par_iter()
                .map(|s| realize(spec, s, &empty, opts))
                .collect();
            for r in out.iter_mut() {
                r.matching.compare_with(&prev);
                prev = r.matching.matching.clone();
            }
            out
        };
        for (r, s) in reals.into_iter().zip(&snaps) {
            acc.push(spec, &r, &s.constellation);
            if opts.keep_realizations {
                kept.push(r);
            }
        }
        start = end;
    }

    Ok(Run {
        spec: spec.clone(),
        report: acc.finish(spec),
        realizations: kept,
    })
}

/// Runs every spec, in parallel, keeping input order. A failing spec does
/// not stop the others.
pub fn sweep(specs: &[ExperimentSpec]) -> Vec<Result<MetricsReport>> {
    specs.par_iter().map(run_experiment).collect()
}

pub fn sweep_detailed(specs: &[ExperimentSpec], opts: &RunOptions) -> Vec<Result<Run>> {
    specs.par_iter().map(|s| run_detailed(s, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkbudget::{AccessScheme, Antenna};

    fn small(algo: MatchingAlgorithm) -> ExperimentSpec {
        ExperimentSpec {
            constellation: ConstellationConfig::walker_star(5, 12, 600e3, 10e3),
            radio: RadioConfig::default(),
            transceivers: 2,
            matching_algo: algo,
            allocation_algo: AllocationAlgorithm::None,
            resource_set: ResourceSet::new(1, AccessScheme::Ofdma).unwrap(),
            period_s: 30.0,
            n_sim: 70,
            seed: 3,
        }
    }

    #[test]
    fn estimator_forms_agree() {
        for algo in [
            MatchingAlgorithm::Giem,
            MatchingAlgorithm::Gmm,
            MatchingAlgorithm::Geo,
        ] {
            let r = run_experiment(&small(algo)).unwrap();
            assert!(r.mu_m_hat > 0.0);
            assert_eq!(r.mu_m_hat, r.mu_m_hat_degrees);
            assert_eq!(r.permissibility_violations, 0);
            assert_eq!(r.churn_series.len(), 70);
            assert_eq!(r.churn_series[0], r.matched_series[0]);
            assert!(r.rate_cdf.windows(2).all(|w| w[0] <= w[1]));
            assert!(r.delay_cdf.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(r.first_degrees.len(), 60);
        }
    }

    #[test]
    fn single_pair_estimator() {
        // one satellite per plane on the equator; with one transceiver only a
        // single link fits
        let mut spec = small(MatchingAlgorithm::Giem);
        spec.constellation = ConstellationConfig::walker_star(3, 1, 600e3, 0.0);
        spec.constellation.plane_longitudes = Some(vec![0.0, 0.2, 0.4]);
        spec.constellation.phase_offsets = vec![std::f64::consts::FRAC_PI_2; 3];
        spec.transceivers = 1;
        spec.n_sim = 1;
        spec.period_s = 1e-9;
        let r = run_experiment(&spec).unwrap();
        assert_eq!(r.matched_series, vec![1]);
        assert!((r.mu_m_hat - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_planes_give_empty_results() {
        let mut spec = small(MatchingAlgorithm::Giem);
        spec.constellation = ConstellationConfig::walker_star(2, 12, 600e3, 10e3);
        spec.n_sim = 3;
        let r = run_experiment(&spec).unwrap();
        assert_eq!(r.mu_m_hat, 0.0);
        assert!(r.rate_cdf.is_empty());
    }

    #[test]
    fn narrow_beam_single_resource_is_lossless() {
        let mut spec = small(MatchingAlgorithm::Giem);
        spec.allocation_algo = AllocationAlgorithm::Gra;
        let r = run_experiment(&spec).unwrap();
        let hat = r.mu_r_sinr_hat.unwrap();
        assert!((hat - 1.0).abs() < 1e-12, "{hat}");
    }

    #[test]
    fn isotropic_rates_bounded() {
        let mut spec = small(MatchingAlgorithm::Giem);
        spec.radio.antenna = Antenna::Isotropic;
        for algo in [
            AllocationAlgorithm::Gra,
            AllocationAlgorithm::RoundRobin,
            AllocationAlgorithm::Random,
        ] {
            spec.allocation_algo = algo;
            spec.resource_set = ResourceSet::new(3, AccessScheme::Cdma).unwrap();
            let hat = run_experiment(&spec).unwrap().mu_r_sinr_hat.unwrap();
            assert!((0.0..=1.0).contains(&hat), "{algo}: {hat}");
        }
    }

    #[test]
    fn deterministic_apart_from_timing() {
        let mut spec = small(MatchingAlgorithm::Gmm);
        spec.radio.antenna = Antenna::Isotropic;
        spec.allocation_algo = AllocationAlgorithm::Random;
        spec.resource_set = ResourceSet::new(2, AccessScheme::Ofdma).unwrap();
        let a = run_experiment(&spec).unwrap().without_timing();
        let b = run_experiment(&spec).unwrap().without_timing();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_keeps_order_and_isolates_failures() {
        let mut bad = small(MatchingAlgorithm::Giem);
        bad.n_sim = 0;
        let specs = vec![
            small(MatchingAlgorithm::Geo),
            bad,
            small(MatchingAlgorithm::Gmm),
        ];
        let out = sweep(&specs);
        assert_eq!(out[0].as_ref().unwrap().label, specs[0].label());
        assert!(out[1].is_err());
        assert_eq!(out[2].as_ref().unwrap().label, specs[2].label());
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = small(MatchingAlgorithm::Giem);
        s.period_s = 0.0;
        assert!(s.validate().is_err());
        let mut s = small(MatchingAlgorithm::Giem);
        s.transceivers = 0;
        assert!(s.validate().is_err());
    }
}
