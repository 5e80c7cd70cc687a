use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phyqoe::cascade::{evaluate, sweep, write_sweep_csv};
use phyqoe::environment::service_rate;
use phyqoe::oracle_sim::SimConfig;
use phyqoe::packet_model::{HarqMode, QueueConfig};
use phyqoe::scenario::{Scenario, ScenarioDoc};
use phyqoe::service_quality::ServiceKind;
use phyqoe::validation::{validate, ValidationInput};

#[derive(Parser)]
#[command(
    name = "phyqoe",
    version,
    about = "Map PHY link curves through a packet model to MOS"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario TOML file
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Bundled preset: video_call, buffered_video, voice_call, mobile_game
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one operating point and print the layer-by-layer report as JSON
    Evaluate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a SINR grid (same SINR in both directions) and emit CSV
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, allow_hyphen_values = true)]
        sinr_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        sinr_max: f64,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the packet-layer closed forms against the simulation oracle
    Validate(ValidateArgs),
    /// Print the bundled preset scenarios
    Presets {
        /// Only this preset
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ValidateArgs {
    /// Take queue, BLER and HARQ settings from the scenario's uplink
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// One BLER for every attempt, or a comma-separated per-attempt list
    #[arg(long, value_delimiter = ',')]
    bler: Option<Vec<f64>>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, value_parser = parse_harq_mode)]
    harq_mode: Option<HarqMode>,
    #[arg(long)]
    rx_window: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Queue arrivals to simulate
    #[arg(long, default_value_t = 1_000_000)]
    arrivals: usize,
    /// HARQ procedures to simulate
    #[arg(long, default_value_t = 1_000_000)]
    trials: usize,
    #[arg(long, default_value_t = 0.1)]
    warmup: f64,
    /// Emit JSON instead of a table
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_harq_mode(s: &str) -> Result<HarqMode, String> {
    match s {
        "paper_verbatim" => Ok(HarqMode::PaperVerbatim),
        "cumulative_product" => Ok(HarqMode::CumulativeProduct),
        other => Err(format!("unknown HARQ mode {other:?}")),
    }
}

/// Input problems exit with 2, failed validation with 1.
enum Failure {
    Input(String),
    Validation,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn preset_kind(name: &str) -> Result<ServiceKind, Failure> {
    ServiceKind::from_name(name).ok_or_else(|| Failure::Input(format!("unknown preset {name:?}")))
}

fn load_scenario(args: &ScenarioArgs) -> Result<Option<Scenario>, Failure> {
    match (&args.scenario, &args.preset) {
        (Some(path), _) => Ok(Some(Scenario::load(path)?)),
        (None, Some(name)) => Ok(Some(Scenario::preset(preset_kind(name)?))),
        (None, None) => Ok(None),
    }
}

fn require_scenario(args: &ScenarioArgs) -> Result<Scenario, Failure> {
    load_scenario(args)?
        .ok_or_else(|| Failure::Input("one of --scenario or --preset is required".into()))
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            Failure::Input(format!("cannot create {}: {e}", path.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn validation_input(args: &ValidateArgs) -> Result<ValidationInput, Failure> {
    let base = load_scenario(&args.scenario)?;
    let missing =
        |flag: &str| Failure::Input(format!("--{flag} is required without --scenario/--preset"));

    let (mut lambda, mut mu, mut k, mut bler_seq, mut n_max, mut mode, mut rx_window) =
        (None, None, None, None, None, None, None);
    if let Some(s) = &base {
        let sinr = s.ul_sinr.sinr_at(s.ul_time);
        lambda = Some(s.ul_arrival_rate);
        mu = Some(service_rate(
            s.ul_curves.goodput_at(sinr),
            s.service.packet_len,
        )?);
        k = Some(s.service.queue_k);
        bler_seq = Some(s.ul_curves.retx_bler_sequence(sinr, s.timing.n_harq_max));
        n_max = Some(s.timing.n_harq_max);
        mode = Some(s.harq_mode);
        rx_window = Some(s.timing.t_rxwin);
    }
    let lambda = args.lambda.or(lambda).ok_or_else(|| missing("lambda"))?;
    let mu = args.mu.or(mu).ok_or_else(|| missing("mu"))?;
    let k = args.k.or(k).ok_or_else(|| missing("k"))?;
    let n_max = args
        .n_max
        .or(n_max)
        .or(args.bler.as_ref().map(|b| b.len().max(1)));
    let bler_seq = match (&args.bler, n_max) {
        (Some(b), Some(n)) if b.len() == 1 => vec![b[0]; n],
        (Some(b), _) => b.clone(),
        (None, _) => bler_seq.ok_or_else(|| missing("bler"))?,
    };
    let n_max = n_max.unwrap_or(bler_seq.len());

    Ok(ValidationInput {
        queue: QueueConfig::new(lambda, mu, k)?,
        rx_window: args.rx_window.or(rx_window).unwrap_or(0.3),
        bler_seq,
        n_max,
        harq_mode: args.harq_mode.or(mode).unwrap_or_default(),
        sim: SimConfig {
            seed: args.seed,
            n_arrivals: args.arrivals,
            warmup_fraction: args.warmup,
        },
        harq_trials: args.trials,
    })
}

fn write_presets(name: &Option<String>, out: &Option<PathBuf>) -> Result<(), Failure> {
    let kinds = match name {
        Some(n) => vec![preset_kind(n)?],
        None => ServiceKind::ALL.to_vec(),
    };
    let mut w = output(out)?;
    for (i, kind) in kinds.iter().enumerate() {
        if kinds.len() > 1 {
            if i > 0 {
                writeln!(w)?;
            }
            writeln!(w, "# ---- preset: {kind} ----")?;
        }
        write!(w, "{}", ScenarioDoc::preset(*kind).to_toml())?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Evaluate { scenario, out } => {
            let s = require_scenario(&scenario)?;
            let report = evaluate(&s)?;
            let mut w = output(&out)?;
            writeln!(w, "{}", report.to_json())?;
            w.flush()?;
        }
        Command::Sweep {
            scenario,
            sinr_min,
            sinr_max,
            step,
            out,
        } => {
            let s = require_scenario(&scenario)?;
            let rows = sweep(&s, sinr_min, sinr_max, step)?;
            write_sweep_csv(&rows, output(&out)?)?;
        }
        Command::Validate(args) => {
            let input = validation_input(&args)?;
            let report = validate(&input)?;
            let mut w = output(&args.out)?;
            if args.json {
                writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                writeln!(w, "{report}")?;
            }
            w.flush()?;
            if !report.passed {
                return Err(Failure::Validation);
            }
        }
        Command::Presets { name, out } => write_presets(&name, &out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
