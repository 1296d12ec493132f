//! `swarmtrack`: generate synthetic campaigns, reconstruct orbits from them and
//! inspect the pieces in between.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use swarmtrack::config::{ConfigError, RunConfig};
use swarmtrack::formats::{self, FormatError};
use swarmtrack::problem::ReconstructionError;
use swarmtrack::{
    evaluate, generate, reconstruct, score_assignments, solve, Candidate, FitnessError, ScenarioError, TraceRow,
};

#[derive(Parser)]
#[command(name = "swarmtrack", version, about = "Multi-object orbit reconstruction from anonymous angle measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a campaign and write it with its truth elements.
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruct the object orbits that best explain a campaign.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        campaign: PathBuf,
        /// Swarm threads; overrides the config.
        #[arg(long)]
        workers: Option<usize>,
        /// Seed the swarm with the configured truth orbits (debugging aid).
        #[arg(long)]
        warm_start_truth: bool,
    },
    /// Score an element table against a campaign.
    Evaluate {
        #[arg(long)]
        campaign: PathBuf,
        #[arg(long)]
        elements: PathBuf,
    },
    /// Solve one assignment problem read from a whitespace-separated matrix file.
    Assign { matrix: PathBuf },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed (generate) or the swarm seed (optimize).
    #[arg(long)]
    seed: Option<u64>,
}

/// Exit codes, one per failure category.
#[derive(Debug)]
enum CliError {
    Config(String),
    Input(String),
    Io(String),
    Compute(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) => 3,
            Self::Input(_) => 4,
            Self::Io(_) => 5,
            Self::Compute(_) => 6,
        }
    }

    fn message(&self) -> String {
        match self {
            Self::Config(m) => format!("config error: {m}"),
            Self::Input(m) => format!("input error: {m}"),
            Self::Io(m) => format!("i/o error: {m}"),
            Self::Compute(m) => format!("computation failed: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Self::Io(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Config { .. } | ScenarioError::OverlappingNights { .. } | ScenarioError::BelowHorizon { .. } => {
                Self::Config(e.to_string())
            }
            _ => Self::Compute(e.to_string()),
        }
    }
}

impl From<FitnessError> for CliError {
    fn from(e: FitnessError) -> Self {
        Self::Compute(e.to_string())
    }
}

impl From<ReconstructionError> for CliError {
    fn from(e: ReconstructionError) -> Self {
        Self::Compute(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn input_error(path: &Path, e: FormatError) -> CliError {
    match e {
        FormatError::Io(e) => CliError::Io(format!("{}: {e}", path.display())),
        e => CliError::Input(format!("{}: {e}", path.display())),
    }
}

fn load_config(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let out = common.out.clone().unwrap_or_else(|| config.out_dir.clone());
    fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    Ok((config, out))
}

fn cmd_generate(common: &Common) -> Result<(), CliError> {
    let (config, out) = load_config(common)?;
    let mut scenario = config.scenario()?;
    if let Some(seed) = common.seed {
        scenario.seed = seed;
    }
    let set = generate(&scenario)?;
    let campaign_path = out.join("campaign.txt");
    output::write_file(&campaign_path, formats::write_campaign(&set.observations, Some(&set.labels)).as_bytes())?;
    output::write_elements(&out.join("truth.csv"), &set.truth)?;

    let sizes: Vec<usize> = set.observations.batches().iter().map(Vec::len).collect();
    println!("wrote {}", campaign_path.display());
    println!("dates: {}", set.observations.date_count());
    println!("objects: {}", set.observations.targets());
    println!(
        "rows per date: {}..={}",
        sizes.iter().min().copied().unwrap_or(0),
        sizes.iter().max().copied().unwrap_or(0)
    );
    Ok(())
}

fn load_campaign(path: &Path) -> Result<formats::CampaignFile, CliError> {
    formats::parse_campaign(&read(path)?).map_err(|e| input_error(path, e))
}

fn cmd_optimize(common: &Common, campaign: &Path, workers: Option<usize>, warm_start_truth: bool) -> Result<(), CliError> {
    let (config, out) = load_config(common)?;
    let file = load_campaign(campaign)?;
    let obs = &file.observations;

    let mut swarm = config.swarm()?;
    if let Some(seed) = common.seed {
        swarm.seed = seed;
    }
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Config("invalid `workers`: must be at least 1".into()));
        }
        swarm.workers = w;
    }
    let warm = if warm_start_truth {
        let truth = config.scenario()?.truth;
        if truth.len() != obs.targets() {
            return Err(CliError::Config(format!(
                "--warm-start-truth: config has {} truth objects, campaign has {}",
                truth.len(),
                obs.targets()
            )));
        }
        vec![Candidate::new(truth)]
    } else {
        Vec::new()
    };

    let stride = (swarm.iterations / 10).max(1);
    let mut progress = |row: &TraceRow| {
        if row.iteration.is_multiple_of(stride) {
            eprintln!(
                "iteration {:>5}  best {:.6e}  mean {:.6e}  evaluations {}",
                row.iteration, row.best_fitness, row.mean_fitness, row.evaluations
            );
        }
    };
    let rec = reconstruct(obs, &config.orbit_box(), &swarm, &warm, Some(&mut progress))?;

    output::write_elements(&out.join("elements.csv"), &rec.candidate)?;
    output::write_convergence(&out.join("convergence.csv"), &rec.trace)?;
    output::write_residuals(&out.join("residuals.csv"), obs, &rec.report)?;
    output::write_assignments(&out.join("assignments.csv"), obs, &rec.candidate, &rec.report)?;

    println!("fitness: {:e}", rec.report.fitness);
    println!("evaluations: {}", rec.evaluations);
    if let Some(labels) = &file.labels {
        let score = score_assignments(&rec.report, labels)?;
        output::write_scores(&out.join("scores.csv"), &score)?;
        println!("purity: {}", score.purity);
        println!("consistency: {}", score.consistency);
    }
    println!("results in {}", out.display());
    Ok(())
}

fn cmd_evaluate(campaign: &Path, elements: &Path) -> Result<(), CliError> {
    let file = load_campaign(campaign)?;
    let candidate = output::read_elements(elements)?;
    if candidate.len() != file.observations.targets() {
        return Err(CliError::Input(format!(
            "{}: {} objects, campaign expects {}",
            elements.display(),
            candidate.len(),
            file.observations.targets()
        )));
    }
    let report = evaluate(&candidate, &file.observations)?;
    println!("F = {:e}", report.fitness);
    println!("date,epoch_s,cost");
    for (j, k) in report.per_date_costs.iter().enumerate() {
        println!("{},{},{:e}", j + 1, file.observations.dates()[j], k);
    }
    println!("object,residual");
    for (i, r) in report.final_residuals().iter().enumerate() {
        println!("{},{:e}", i + 1, r);
    }
    let gap = report.dual_accounting_gap();
    println!("sum over dates minus sum over objects (relative): {gap:e}");
    if gap >= 1e-9 {
        return Err(CliError::Compute(format!("dual accounting gap {gap:e} exceeds 1e-9")));
    }
    if let Some(labels) = &file.labels {
        let score = score_assignments(&report, labels)?;
        println!("purity: {}", score.purity);
        println!("consistency: {}", score.consistency);
    }
    Ok(())
}

fn cmd_assign(path: &Path) -> Result<(), CliError> {
    let matrix = formats::parse_matrix(&read(path)?).map_err(|e| input_error(path, e))?;
    let assignment = solve(&matrix);
    println!("column,row,cost");
    for (col, &row) in assignment.row_of.iter().enumerate() {
        println!("{},{},{}", col + 1, row + 1, matrix.get(row, col));
    }
    println!("total cost: {}", assignment.total_cost);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate { common } => cmd_generate(common),
        Command::Optimize {
            common,
            campaign,
            workers,
            warm_start_truth,
        } => cmd_optimize(common, campaign, *workers, *warm_start_truth),
        Command::Evaluate { campaign, elements } => cmd_evaluate(campaign, elements),
        Command::Assign { matrix } => cmd_assign(matrix),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swarmtrack: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
