use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use isl_core::allocation::{AllocationAlgorithm, RANDOM_GENERATOR};
use isl_core::config::{AntennaName, SpecConfig, SweepConfig};
use isl_core::design::{design_report, DEFAULT_GRID};
use isl_core::error::{Error, Result};
use isl_core::geometry::Constellation;
use isl_core::graph::FeasibilityGraph;
use isl_core::linkbudget::AccessScheme;
use isl_core::matching::MatchingAlgorithm;
use isl_core::oracle::compare_random;
use isl_core::report::{self, sig9, Manifest};
use isl_core::sim::{run_detailed, sweep_detailed, RunOptions};

#[derive(Parser)]
#[command(
    name = "islsim",
    version,
    about = "Inter-plane ISL simulator for Walker-star constellations"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design range, MPL and required EIRPG.
    Design {
        #[command(flatten)]
        spec: SpecArgs,
        /// Also maximise the range on a 2000 x 200 grid.
        #[arg(long)]
        grid: bool,
        /// Also report the largest Doppler shift for planes 1-2 and the seam.
        #[arg(long)]
        doppler: bool,
    },
    /// Feasibility graph at one epoch, as CSV.
    Graph {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 0.0)]
        epoch_s: f64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Matching (and allocation) of one realization, as CSV.
    Match {
        #[command(flatten)]
        spec: SpecArgs,
        /// One-based realization; earlier ones run first so GMM has its history.
        #[arg(long, default_value_t = 1)]
        realization: usize,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full experiment.
    Run {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Several experiments from a sweep file; flags override every spec.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Greedy solvers against brute force on random small instances.
    Oracle {
        #[arg(long, default_value_t = 500)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    dump_edges: bool,
    #[arg(long)]
    dump_matching: bool,
    #[arg(long)]
    dump_allocation: bool,
}

impl OutputArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            keep_realizations: self.dump_edges || self.dump_matching || self.dump_allocation,
            keep_edges: self.dump_edges,
        }
    }
}

#[derive(Args, Default)]
struct SpecArgs {
    /// JSON config; for `sweep` a sweep file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    planes: Option<usize>,
    #[arg(long)]
    sats_per_plane: Option<usize>,
    #[arg(long)]
    base_altitude_km: Option<f64>,
    #[arg(long)]
    delta_altitude_km: Option<f64>,
    #[arg(long)]
    phase_step_deg: Option<f64>,
    #[arg(long)]
    freq_ghz: Option<f64>,
    #[arg(long)]
    bandwidth_mhz: Option<f64>,
    #[arg(long)]
    noise_temp_k: Option<f64>,
    #[arg(long)]
    eirpg_w: Option<f64>,
    #[arg(long)]
    rmin_kbps: Option<f64>,
    /// Q.
    #[arg(long)]
    transceivers: Option<usize>,
    #[arg(long, value_parser = parse_matching)]
    matching: Option<MatchingAlgorithm>,
    #[arg(long, value_parser = parse_allocation)]
    allocation: Option<AllocationAlgorithm>,
    /// K.
    #[arg(long)]
    resources: Option<usize>,
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<AccessScheme>,
    #[arg(long, value_parser = parse_antenna)]
    antenna: Option<AntennaName>,
    #[arg(long)]
    period_s: Option<f64>,
    #[arg(long)]
    nsim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_matching(s: &str) -> std::result::Result<MatchingAlgorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_allocation(s: &str) -> std::result::Result<AllocationAlgorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scheme(s: &str) -> std::result::Result<AccessScheme, String> {
    match s.to_ascii_lowercase().as_str() {
        "ofdma" => Ok(AccessScheme::Ofdma),
        "cdma" => Ok(AccessScheme::Cdma),
        _ => Err(format!("unknown access scheme '{s}'")),
    }
}

fn parse_antenna(s: &str) -> std::result::Result<AntennaName, String> {
    match s.to_ascii_lowercase().as_str() {
        "narrow" => Ok(AntennaName::Narrow),
        "isotropic" => Ok(AntennaName::Isotropic),
        _ => Err(format!("unknown antenna '{s}'")),
    }
}

impl SpecArgs {
    fn apply(&self, c: &mut SpecConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { c.$f = v; })*};
        }
        set!(
            planes,
            sats_per_plane,
            base_altitude_km,
            delta_altitude_km,
            phase_step_deg,
            freq_ghz,
            bandwidth_mhz,
            noise_temp_k,
            eirpg_w,
            rmin_kbps,
            transceivers,
            matching,
            allocation,
            resources,
            scheme,
            antenna,
            period_s,
            nsim,
            seed
        );
    }

    /// Config file (if any) overlaid with the flags.
    fn resolve(&self) -> Result<SpecConfig> {
        let mut c = match &self.config {
            Some(p) => SpecConfig::load(p)?,
            None => SpecConfig::default(),
        };
        self.apply(&mut c);
        Ok(c)
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn design(spec: &SpecArgs, grid: bool, doppler: bool) -> Result<()> {
    let cfg = spec.resolve()?;
    let (constellation, radio) = (cfg.constellation(), cfg.radio());
    radio.validate()?;
    let r = design_report(&constellation, &radio, grid.then_some(DEFAULT_GRID))?;
    println!("l_adj_star_km = {:.3}", r.l_adj_star_m / 1e3);
    if let Some(g) = r.l_adj_grid_m {
        println!("l_adj_grid_km = {:.3}", g / 1e3);
    }
    println!("mpl_db = {:.3}", r.mpl_db);
    println!("required_eirpg_w = {:.4}", r.required_eirpg_w);
    if doppler {
        let c = Constellation::new(constellation)?;
        let p = cfg.planes;
        if p >= 2 {
            let f = radio.frequency_hz;
            println!(
                "max_doppler_planes_1_2_khz = {:.3}",
                c.max_doppler(0, 1, f) / 1e3
            );
            println!(
                "max_doppler_seam_khz = {:.3}",
                c.max_doppler(0, p - 1, f) / 1e3
            );
        }
    }
    Ok(())
}

fn graph(spec: &SpecArgs, epoch_s: f64, out: Option<&Path>) -> Result<()> {
    let cfg = spec.resolve()?;
    let s = cfg.to_spec()?;
    let c = Constellation::new(s.constellation)?.propagate(epoch_s)?;
    let g = FeasibilityGraph::build(&c, &s.radio);
    log::info!(
        "{} edges, min degree {} at epoch {epoch_s} s",
        g.edges().len(),
        g.min_degree(s.radio.r_min_bps)
    );
    g.write_csv(open_out(out)?)
}

fn single(spec: &SpecArgs, realization: usize, out: Option<&Path>) -> Result<()> {
    if realization == 0 {
        return Err(Error::InvalidConfig(
            "realizations are numbered from 1".into(),
        ));
    }
    let mut cfg = spec.resolve()?;
    cfg.nsim = realization;
    let s = cfg.to_spec()?;
    let run = run_detailed(
        &s,
        &RunOptions {
            keep_realizations: true,
            keep_edges: false,
        },
    )?;
    let r = run.realizations.last().expect("at least one realization");
    let mut w = csv::Writer::from_writer(open_out(out)?);
    w.write_record([
        "n",
        "u",
        "v",
        "rate_snr_bps",
        "dist_m",
        "retained",
        "k",
        "rate_uv_bps",
        "rate_vu_bps",
    ])?;
    let mr = &r.matching;
    for (e, kept) in mr.matching.pairs().iter().zip(&mr.retained) {
        // allocations list pairs in descending weight; look the pair up
        let a = r
            .allocation
            .as_ref()
            .and_then(|a| a.assignments().iter().find(|x| x.pair.key() == e.key()));
        w.write_record([
            r.n.to_string(),
            e.u.to_string(),
            e.v.to_string(),
            sig9(e.rate_snr_bps),
            sig9(e.dist_m),
            u8::from(*kept).to_string(),
            a.map(|x| x.resource.to_string()).unwrap_or_default(),
            a.map(|x| sig9(x.rate_uv_bps)).unwrap_or_default(),
            a.map(|x| sig9(x.rate_vu_bps)).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    log::info!(
        "realization {}: {} pairs, w(M) = {:.6e} bit/s",
        r.n,
        mr.matching.len(),
        mr.matching.weight()
    );
    Ok(())
}

fn execute(configs: Vec<SpecConfig>, output: &OutputArgs) -> Result<()> {
    let specs = configs
        .iter()
        .map(SpecConfig::to_spec)
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(&output.out)?;
    let results = sweep_detailed(&specs, &output.options());
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(run) => runs.push(run),
            Err(e) => {
                log::error!("spec {i} ({}) failed: {e}", specs[i].label());
                failures.push(i);
            }
        }
    }
    let refs: Vec<_> = runs.iter().collect();
    report::write_all(&output.out, &refs)?;
    if !output.dump_edges {
        let _ = std::fs::remove_file(output.out.join("edges_dump.csv"));
    }
    if !output.dump_matching {
        let _ = std::fs::remove_file(output.out.join("matching_dump.csv"));
    }
    if !output.dump_allocation {
        let _ = std::fs::remove_file(output.out.join("allocation_dump.csv"));
    }
    if configs.len() == 1 {
        std::fs::write(output.out.join("config.json"), configs[0].to_json() + "\n")?;
    }
    report::write_json(&output.out.join("configs.json"), &configs)?;
    report::write_json(
        &output.out.join("manifest.json"),
        &Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            git_hash: report::git_hash(),
            rng: RANDOM_GENERATOR,
            seeds: configs.iter().map(|c| c.seed).collect(),
            configs: &configs,
        },
    )?;
    for run in &runs {
        let r = &run.report;
        println!(
            "{}: mu_M = {:.4}, mu_R_SNR = {:.4e} bit/s{}",
            r.label,
            r.mu_m_hat,
            r.mu_r_snr,
            r.mu_r_sinr_hat
                .map(|h| format!(", mu_R_SINR_hat = {h:.4}"))
                .unwrap_or_default()
        );
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{} of {} specs failed",
            failures.len(),
            specs.len()
        )))
    }
}

fn oracle(instances: usize, seed: u64) -> Result<()> {
    let s = compare_random(instances, seed)?;
    println!("{}", serde_json::to_string_pretty(&s)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::InvalidConfig("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::Domain(e.to_string()))?;
    }
    match cli.command {
        Command::Design {
            spec,
            grid,
            doppler,
        } => design(&spec, grid, doppler),
        Command::Graph { spec, epoch_s, out } => graph(&spec, epoch_s, out.as_deref()),
        Command::Match {
            spec,
            realization,
            out,
        } => single(&spec, realization, out.as_deref()),
        Command::Run { spec, output } => execute(vec![spec.resolve()?], &output),
        Command::Sweep { spec, output } => {
            let path = spec
                .config
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("sweep needs --config".into()))?;
            let mut configs = SweepConfig::load(path)?.expand(&SpecConfig::default())?;
            for c in configs.iter_mut() {
                spec.apply(c);
            }
            execute(configs, &output)
        }
        Command::Oracle { instances, seed } => oracle(instances, seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
