use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use whichpath::analysis::{run_analysis, write_report, AnalysisConfig, AnalysisError};
use whichpath::campaign::{run_campaign, Campaign, CampaignConfig, CampaignError};
use whichpath::limits::{run_limits, write_limits, LimitsConfig};

#[derive(Parser)]
#[command(name = "whichpath", version, about = "Which-path and quantum-eraser campaign runner and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (TOML, or a campaign manifest.json)
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override the configured RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of CPUs)
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a campaign over the (φ, α) grid
    Campaign {
        #[command(flatten)]
        common: Common,
    },
    /// Cross-validate gate-model tiers on one or more campaign directories
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Campaign directory (repeatable)
        #[arg(long, short, required = true)]
        input: Vec<PathBuf>,
    },
    /// Exact limit curves for a biased gate model over α ∈ [0, 4π]
    Limits {
        #[command(flatten)]
        common: Common,
    },
    /// Apply readout mitigation to a campaign directory
    Mitigate {
        #[command(flatten)]
        common: Common,
        #[arg(long, short, required = true)]
        input: PathBuf,
    },
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<CampaignError> for Failure {
    fn from(e: CampaignError) -> Self {
        match e {
            CampaignError::Config(_) => Failure::Config(e.to_string()),
            CampaignError::Noise(_) => Failure::Numerical(e.to_string()),
            CampaignError::Io { .. } | CampaignError::Format { .. } => Failure::Io(e.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Config(_) => Failure::Config(e.to_string()),
            AnalysisError::Io { .. } | AnalysisError::Csv { .. } => Failure::Io(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

fn setup_workers(n: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot configure workers: {e}")))?;
    }
    Ok(())
}

fn campaign(common: &Common) -> Result<(), Failure> {
    let path = common.config.as_ref().ok_or_else(|| Failure::Config("campaign requires --config".into()))?;
    if !path.is_file() {
        return Err(Failure::Config(format!("cannot read {}", path.display())));
    }
    let mut cfg = CampaignConfig::load(path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let out = common.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let c = run_campaign(&cfg)?;
    c.write(&out)?;
    log::info!("wrote {} points to {}", c.points.len(), out.display());
    Ok(())
}

fn analyze(common: &Common, inputs: &[PathBuf]) -> Result<(), Failure> {
    let mut cfg = match &common.config {
        Some(p) => AnalysisConfig::from_toml(&read_text(p)?)?,
        None => AnalysisConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let datasets = inputs.iter().map(|p| Campaign::read(p)).collect::<Result<Vec<_>, _>>()?;
    let report = run_analysis(&datasets, &cfg)?;
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("analysis"));
    write_report(&report, &out)?;
    for t in &report.targets {
        for tier in &t.tiers {
            println!(
                "{:>6} {:>12}  chi2_red = {:.5} ± {:.5}  RSE = {:.5}{}",
                t.target.name(),
                tier.tier.name(),
                tier.cv.chi2_red,
                tier.cv.chi2_red_se,
                tier.cv.rse,
                if t.selected == Some(tier.tier) { "  *" } else { "" }
            );
        }
    }
    Ok(())
}

fn limits(common: &Common) -> Result<(), Failure> {
    let cfg: LimitsConfig = match &common.config {
        Some(p) => toml::from_str(&read_text(p)?).map_err(|e| Failure::Config(e.to_string()))?,
        None => LimitsConfig::default(),
    };
    let rows = run_limits(&cfg).map_err(|e| Failure::Numerical(e.to_string()))?;
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("limits"));
    std::fs::create_dir_all(&out).map_err(|e| Failure::Io(e.to_string()))?;
    write_limits(&rows, &out.join("limits.csv")).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(())
}

fn mitigate(common: &Common, input: &Path) -> Result<(), Failure> {
    let c = Campaign::read(input)?;
    let m = c.mitigated().map_err(|e| Failure::Numerical(e.to_string()))?;
    let out = common.out.clone().unwrap_or_else(|| input.join("mitigated"));
    m.write(&out)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Campaign { common } => setup_workers(common.workers).and_then(|_| campaign(common)),
        Command::Analyze { common, input } => setup_workers(common.workers).and_then(|_| analyze(common, input)),
        Command::Limits { common } => setup_workers(common.workers).and_then(|_| limits(common)),
        Command::Mitigate { common, input } => setup_workers(common.workers).and_then(|_| mitigate(common, input)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
