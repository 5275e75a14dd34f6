use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use leo_swarm::channel::{noise_power, transmit_power_full_band, transmit_power_per_carrier, ChannelModel};
use leo_swarm::config::{ConfigFile, PRESETS};
use leo_swarm::export::run_campaign;
use leo_swarm::geometry::design_swarm;
use leo_swarm::{Mode, Result, ScenarioConfig};

#[derive(Parser)]
#[command(name = "leo-swarm", version, about = "LEO swarm MMSE beamforming downlink simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ScenarioArgs {
    /// Flat TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// One of set-a-600, set-b-600, set-a-1200, set-b-1200.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Users per km^2.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign and export samples, CDFs and a summary.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated list of pac, mpc, baseline, or `all`.
        #[arg(long, default_value = "all")]
        mode: String,
    },
    /// Print the link budget and swarm layout of a scenario.
    Budget {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// List the built-in presets.
    Presets,
}

fn resolve(args: &ScenarioArgs) -> Result<ScenarioConfig> {
    let mut file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(p) = &args.preset {
        file.override_preset(p);
    }
    if args.iterations.is_some() {
        file.iterations = args.iterations;
    }
    if args.seed.is_some() {
        file.seed = args.seed;
    }
    if args.rho.is_some() {
        file.rho = args.rho;
    }
    if args.out_dir.is_some() {
        file.out_dir = args.out_dir.clone();
    }
    if args.workers.is_some() {
        file.workers = args.workers;
    }
    file.resolve()
}

fn parse_modes(s: &str) -> Result<Vec<Mode>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Mode::ALL.to_vec());
    }
    let mut modes = s.split(',').map(|m| m.trim().parse()).collect::<Result<Vec<Mode>>>()?;
    modes.sort();
    modes.dedup();
    Ok(modes)
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn budget(config: &ScenarioConfig) -> Result<()> {
    let params = config.link_params();
    let model = ChannelModel::new(params, config.reflector()?, config.user_antenna())?;
    let theta = model.antenna().solve_theta_3db()?;
    let swarm = design_swarm(config.altitude_m, theta, config.n_satellites, config.lattice)?;
    let p_t = config.power_budget.transmit_power(&params);
    println!("antenna set           {}", config.antenna_set.as_str());
    println!("altitude              {} km", config.altitude_m / 1e3);
    println!("theta_3db             {:.4} deg", theta.to_degrees());
    println!("beam radius (uv)      {:.6}", swarm.beam_radius_uv);
    println!("SSP spacing           {:.3} km", swarm.lattice_spacing / 1e3);
    println!("intra-node separation {:.4} deg", swarm.intra_node_separation.to_degrees());
    println!("inter-node separation {:.4} deg", swarm.inter_node_separation.to_degrees());
    println!("noise power           {:.2} dBW", db(noise_power(&params)));
    println!("P_t per carrier       {:.2} dBW", db(transmit_power_per_carrier(&params)));
    println!("P_t full band         {:.2} dBW", db(transmit_power_full_band(&params)));
    println!("P_t used ({:?})   {:.2} dBW", config.power_budget, db(p_t));
    let ssp = swarm.satellites[0].ssp;
    let h = model.coefficient(&ssp, &swarm.satellites[0])?;
    println!("boresight |h|^2       {:.2} dB", db(h.norm_sqr()));
    println!("boresight SNR         {:.2} dB", db(p_t * h.norm_sqr()));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Presets => {
            for p in PRESETS {
                println!("{p}");
            }
            Ok(())
        }
        Command::Budget { scenario } => resolve(&scenario).and_then(|c| budget(&c)),
        Command::Run { scenario, mode } => resolve(&scenario).and_then(|config| {
            let modes = parse_modes(&mode)?;
            let export = run_campaign(&config, &modes)?;
            for r in &export.summary.records {
                println!(
                    "{:<8} p50 {:6.2} dB  p90 {:6.2} dB  avg capacity {:8.1} kbit/s",
                    r.mode.as_str(),
                    r.sinr_db.p50,
                    r.sinr_db.p90,
                    r.avg_capacity_kbit_s
                );
            }
            println!("summary written to {}", export.summary_path.display());
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
