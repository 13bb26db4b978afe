//! CSV and JSON outputs.
//!
//! | file | columns |
//! |------|---------|
//! | `metrics.csv` | one row per spec, see [`METRICS_HEADER`] |
//! | `rate_cdf.csv` | `spec,label,rank,rate_snr_bps,cdf` |
//! | `delay_cdf.csv` | `spec,label,rank,delay_s,cdf` |
//! | `ksweep.csv` | `spec,label,scheme,allocation,resources,mu_r_sinr_hat,mu_r_sinr_bps` |
//! | `churn.csv` | `spec,label,n,churn,matched,min_degree` |
//! | `degrees.csv` | `spec,label,sat,plane,slot,phase_rad,degree` |
//! | `runtimes.csv` | `spec,label,n,matching_s,allocation_s` |
//! | `matching_dump.csv` | `spec,n,u,v,rate_snr_bps,dist_m,retained` |
//! | `allocation_dump.csv` | `spec,n,u,v,k,rate_uv_bps,rate_vu_bps` |
//! | `edges_dump.csv` | `spec,n,u,v,plane_u,plane_v,dist_m,rate_snr_bps` |
//!
//! Every float is written with 9 significant digits. Only `runtimes.csv`
//! carries wall-clock values.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::linkbudget::AccessScheme;
use crate::sim::{MetricsReport, Run};

pub const METRICS_HEADER: [&str; 20] = [
    "spec",
    "label",
    "planes",
    "sats_per_plane",
    "transceivers",
    "matching",
    "allocation",
    "resources",
    "scheme",
    "antenna",
    "nsim",
    "seed",
    "mu_m_hat",
    "mu_m_hat_degrees",
    "mu_m_hat_relative",
    "mu_r_snr_bps",
    "mu_r_sinr_hat",
    "mu_r_sinr_bps",
    "min_degree",
    "permissibility_violations",
];

/// Nine significant digits in scientific notation.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(
        dir.join(name),
    )?)))
}

fn scheme_name(s: AccessScheme) -> &'static str {
    match s {
        AccessScheme::Ofdma => "ofdma",
        AccessScheme::Cdma => "cdma",
    }
}

/// Writes the summary families for `runs` into `dir`. Dumps are written only
/// for runs that kept their realizations.
pub fn write_all(dir: &Path, runs: &[&Run]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_metrics(dir, runs)?;
    write_cdfs(dir, runs)?;
    write_ksweep(dir, runs)?;
    write_series(dir, runs)?;
    write_degrees(dir, runs)?;
    write_runtimes(dir, runs)?;
    if runs.iter().any(|r| !r.realizations.is_empty()) {
        write_dumps(dir, runs)?;
    }
    Ok(())
}

fn write_metrics(dir: &Path, runs: &[&Run]) -> Result<()> {
    let mut w = writer(dir, "metrics.csv")?;
    w.write_record(METRICS_HEADER)?;
    for (i, run) in runs.iter().enumerate() {
        let (s, r) = (&run.spec, &run.report);
        w.write_record([
            i.to_string(),
            r.label.clone(),
            s.constellation.planes.to_string(),
            s.constellation.sats_per_plane.to_string(),
            s.transceivers.to_string(),
            s.matching_algo.to_string(),
            s.allocation_algo.to_string(),
            s.resource_set.count.to_string(),
            scheme_name(s.resource_set.scheme).into(),
            crate::config::AntennaName::from(s.radio.antenna)
                .name()
                .into(),
            s.n_sim.to_string(),
            s.seed.to_string(),
            sig9(r.mu_m_hat),
            sig9(r.mu_m_hat_degrees),
            sig9(r.mu_m_hat_relative),
            sig9(r.mu_r_snr),
            opt(r.mu_r_sinr_hat),
            opt(r.mu_r_sinr),
            r.min_degree().to_string(),
            r.permissibility_violations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_cdf<'a>(
    dir: &Path,
    name: &str,
    column: &str,
    runs: &[&'a Run],
    samples: impl Fn(&'a MetricsReport) -> &'a [f64],
) -> Result<()> {
    let mut w = writer(dir, name)?;
    w.write_record(["spec", "label", "rank", column, "cdf"])?;
    for (i, run) in runs.iter().enumerate() {
        let xs = samples(&run.report);
        let n = xs.len() as f64;
        for (k, x) in xs.iter().enumerate() {
            w.write_record([
                i.to_string(),
                run.report.label.clone(),
                k.to_string(),
                sig9(*x),
                sig9((k + 1) as f64 / n),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_cdfs(dir: &Path, runs: &[&Run]) -> Result<()> {
    write_cdf(dir, "rate_cdf.csv", "rate_snr_bps", runs, |r| &r.rate_cdf)?;
    write_cdf(dir, "delay_cdf.csv", "delay_s", runs, |r| &r.delay_cdf)
}

fn write_ksweep(dir: &Path, runs: &[&Run]) -> Result<()> {
    let mut w = writer(dir, "ksweep.csv")?;
    w.write_record([
        "spec",
        "label",
        "scheme",
        "allocation",
        "resources",
        "mu_r_sinr_hat",
        "mu_r_sinr_bps",
    ])?;
    for (i, run) in runs.iter().enumerate() {
        let Some(hat) = run.report.mu_r_sinr_hat else {
            continue;
        };
        w.write_record([
            i.to_string(),
            run.report.label.clone(),
            scheme_name(run.spec.resource_set.scheme).into(),
            run.spec.allocation_algo.to_string(),
            run.spec.resource_set.count.to_string(),
            sig9(hat),
            opt(run.report.mu_r_sinr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_series(dir: &Path, runs: &[&Run]) -> Result<()> {
    let mut w = writer(dir, "churn.csv")?;
    w.write_record(["spec", "label", "n", "churn", "matched", "min_degree"])?;
    for (i, run) in runs.iter().enumerate() {
        let r = &run.report;
        for n in 0..r.churn_series.len() {
            w.write_record([
                i.to_string(),
                r.label.clone(),
                (n + 1).to_string(),
                r.churn_series[n].to_string(),
                r.matched_series[n].to_string(),
                r.min_degree_series[n].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_degrees(dir: &Path, runs: &[&Run]) -> Result<()> {
    let mut w = writer(dir, "degrees.csv")?;
    w.write_record([
        "spec",
        "label",
        "sat",
        "plane",
        "slot",
        "phase_rad",
        "degree",
    ])?;
    for (i, run) in runs.iter().enumerate() {
        for d in &run.report.first_degrees {
            w.write_record([
                i.to_string(),
                run.report.label.clone(),
                d.sat.to_string(),
                d.plane.to_string(),
                d.slot.to_string(),
                sig9(d.phase),
                d.degree.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_runtimes(dir: &Path, runs: &[&Run]) -> Result<()> {
    let mut w = writer(dir, "runtimes.csv")?;
    w.write_record(["spec", "label", "n", "matching_s", "allocation_s"])?;
    for (i, run) in runs.iter().enumerate() {
        let r = &run.report;
        for n in 0..r.matching_runtime_s.len() {
            w.write_record([
                i.to_string(),
                r.label.clone(),
                (n + 1).to_string(),
                sig9(r.matching_runtime_s[n]),
                sig9(r.allocation_runtime_s[n]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_dumps(dir: &Path, runs: &[&Run]) -> Result<()> {
    let mut m = writer(dir, "matching_dump.csv")?;
    m.write_record(["spec", "n", "u", "v", "rate_snr_bps", "dist_m", "retained"])?;
    let mut a = writer(dir, "allocation_dump.csv")?;
    a.write_record(["spec", "n", "u", "v", "k", "rate_uv_bps", "rate_vu_bps"])?;
    let mut e = writer(dir, "edges_dump.csv")?;
    e.write_record([
        "spec",
        "n",
        "u",
        "v",
        "plane_u",
        "plane_v",
        "dist_m",
        "rate_snr_bps",
    ])?;
    for (i, run) in runs.iter().enumerate() {
        for r in &run.realizations {
            let (spec, n) = (i.to_string(), r.n.to_string());
            let mr = &r.matching;
            for (pair, kept) in mr.matching.pairs().iter().zip(&mr.retained) {
                m.write_record([
                    spec.clone(),
                    n.clone(),
                    pair.u.to_string(),
                    pair.v.to_string(),
                    sig9(pair.rate_snr_bps),
                    sig9(pair.dist_m),
                    u8::from(*kept).to_string(),
                ])?;
            }
            for x in r.allocation.iter().flat_map(|al| al.assignments()) {
                a.write_record([
                    spec.clone(),
                    n.clone(),
                    x.pair.u.to_string(),
                    x.pair.v.to_string(),
                    x.resource.to_string(),
                    sig9(x.rate_uv_bps),
                    sig9(x.rate_vu_bps),
                ])?;
            }
            for x in r.edges.iter().flatten() {
                e.write_record([
                    spec.clone(),
                    n.clone(),
                    x.u.to_string(),
                    x.v.to_string(),
                    x.plane_u.to_string(),
                    x.plane_v.to_string(),
                    sig9(x.dist_m),
                    sig9(x.rate_snr_bps),
                ])?;
            }
        }
    }
    m.flush()?;
    a.flush()?;
    e.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub git_hash: String,
    pub rng: &'static str,
    pub seeds: Vec<u64>,
    pub configs: &'a [C],
}

/// Commit of the working directory, or `"unknown"` outside a git checkout.
pub fn git_hash() -> String {
    std::process::Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_owned())
        .unwrap_or_else(|| "unknown".into())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(1.0), "1.00000000e0");
        assert_eq!(sig9(123456789.0), "1.23456789e8");
        assert_eq!(sig9(0.011770001), "1.17700010e-2");
        let back: f64 = sig9(std::f64::consts::PI).parse().unwrap();
        assert!((back - std::f64::consts::PI).abs() < 1e-8);
    }
}
