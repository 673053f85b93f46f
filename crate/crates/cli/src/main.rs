//! `scoreshape` command-line tool.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use scoreshape::data::{load_csv, Dataset, Schema};
use scoreshape::dgp::{
    generate, resample_iterative, resample_rejection, DgpId, DgpSpec, IterativeOptions, RejectionOptions,
};
use scoreshape::distributions::{fit_beta_mle, BetaPrior};
use scoreshape::harness::{
    grids_from_toml_str, real_data_study, replicate, write_real_data_outputs, write_study_outputs, Criterion,
    GridSpec, LearnerKind, RealDataConfig, StudyConfig,
};
use scoreshape::metrics::{metric_table, ReferenceProfile};

#[derive(Parser, Debug)]
#[command(name = "scoreshape", version, about = "Score-distribution-aware model selection studies")]
struct Cli {
    /// Log progress (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a synthetic sample and write it as CSV plus a schema file.
    Simulate(SimulateArgs),
    /// Replicated regression-tree study over a grid of minimum leaf sizes.
    TreeStudy(StudyArgs),
    /// Replicated grid-search study for any learners.
    Select(SelectArgs),
    /// GLM-prior study on a user-supplied dataset.
    RealStudy(RealStudyArgs),
    /// Rejection-resample a sample's probabilities toward a Beta target.
    Resample(ResampleArgs),
    /// Metrics for a CSV of scores and labels.
    Metrics(MetricsArgs),
    /// Markdown summary and SVG histograms for a study directory.
    Report(ReportArgs),
}

fn parse_dgp(s: &str) -> std::result::Result<DgpId, String> {
    s.parse::<DgpId>().map_err(|e| e.to_string())
}

fn parse_noise(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n @ (0 | 10 | 50 | 100)) => Ok(n),
        _ => Err(format!("noise must be one of 0, 10, 50, 100 (got `{s}`)")),
    }
}

fn positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

fn epsilon(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(e) if e > 0.0 && e <= 0.5 => Ok(e),
        _ => Err(format!("epsilon must lie in (0, 0.5], got `{s}`")),
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_dgp)]
    dgp: DgpId,
    #[arg(long, value_parser = positive)]
    n: usize,
    #[arg(long, default_value = "0", value_parser = parse_noise)]
    noise: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; the schema goes to `<out stem>.schema.toml`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct StudyArgs {
    #[arg(long, value_parser = parse_dgp)]
    dgp: DgpId,
    #[arg(long, default_value = "0", value_parser = parse_noise)]
    noise: usize,
    /// Rows per split.
    #[arg(long, default_value = "10000", value_parser = positive)]
    n: usize,
    #[arg(long, default_value = "10", value_parser = positive)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// TOML file of `[[grids]]` overrides.
    #[arg(long)]
    grid_file: Option<PathBuf>,
    /// Also fit the logistic baseline.
    #[arg(long)]
    glm: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Learner {
    Tree,
    Forest,
    Boost,
}

impl From<Learner> for LearnerKind {
    fn from(l: Learner) -> Self {
        match l {
            Learner::Tree => LearnerKind::Tree,
            Learner::Forest => LearnerKind::Forest,
            Learner::Boost => LearnerKind::Boost,
        }
    }
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[command(flatten)]
    study: StudyArgs,
    /// Learners to tune (comma separated).
    #[arg(long, value_delimiter = ',', default_values = ["forest", "boost"])]
    learners: Vec<Learner>,
    /// Selection criteria (comma separated, e.g. `auc,kl`).
    #[arg(long, value_delimiter = ',', value_parser = parse_criterion)]
    criteria: Vec<Criterion>,
    /// DGP4 only: resample toward DGP1's Beta fit before splitting.
    #[arg(long)]
    resample: bool,
    #[arg(long, default_value = "0.05", value_parser = epsilon)]
    epsilon: f64,
}

fn parse_criterion(s: &str) -> std::result::Result<Criterion, String> {
    s.parse::<Criterion>().map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Prior {
    Glm,
}

#[derive(Args, Debug)]
struct RealStudyArgs {
    /// Input CSV.
    #[arg(long)]
    data: PathBuf,
    /// Column schema (TOML); defaults to `<data stem>.schema.toml`.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "glm")]
    prior: Prior,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    grid_file: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Iterative,
    Rejection,
}

#[derive(Args, Debug)]
struct ResampleArgs {
    /// CSV with a true-probability column (the scores to reshape).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Target Beta(α, β); alternatively use `--target-dgp`.
    #[arg(long, requires = "beta", conflicts_with = "target_dgp")]
    alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    beta: Option<f64>,
    /// Target = Beta MLE fit of this DGP's probabilities (10^5 draws).
    #[arg(long, value_parser = parse_dgp, required_unless_present = "alpha")]
    target_dgp: Option<DgpId>,
    #[arg(long, value_enum, default_value = "iterative")]
    method: Method,
    #[arg(long, default_value = "0.05", value_parser = epsilon)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// CSV holding score and label columns.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "score")]
    score_column: String,
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Column of true probabilities used as the KL/QR reference.
    #[arg(long)]
    truth_column: Option<String>,
    /// Beta reference when no truth column is given.
    #[arg(long, requires = "beta")]
    alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    beta: Option<f64>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Study output directory.
    dir: PathBuf,
}

fn ensure_writable(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        bail!("{} already exists; pass --force to overwrite", path.display());
    }
    Ok(())
}

fn schema_path(data: &Path, explicit: Option<&PathBuf>) -> PathBuf {
    explicit.cloned().unwrap_or_else(|| data.with_extension("schema.toml"))
}

fn load(data: &Path, schema: Option<&PathBuf>) -> Result<Dataset> {
    let schema_file = schema_path(data, schema);
    let schema = Schema::from_toml_file(&schema_file)
        .with_context(|| format!("reading schema {}", schema_file.display()))?;
    load_csv(data, &schema).with_context(|| format!("reading {}", data.display()))
}

fn read_grids(path: Option<&PathBuf>) -> Result<Vec<GridSpec>> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(grids_from_toml_str(&text)?)
        }
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let schema_file = args.out.with_extension("schema.toml");
    ensure_writable(&args.out, args.force)?;
    ensure_writable(&schema_file, args.force)?;
    let sample = generate(&DgpSpec::new(args.dgp, args.noise, args.seed), args.n)?;
    sample.write_csv(fs::File::create(&args.out)?)?;
    fs::write(&schema_file, scoreshape::data::write_schema(&sample.dataset).to_toml_string())?;
    log::info!("wrote {} rows to {}", args.n, args.out.display());
    Ok(())
}

fn study_config(args: &StudyArgs, learners: Vec<LearnerKind>) -> Result<StudyConfig> {
    let mut config = StudyConfig::new(args.dgp, args.noise, args.n, args.reps, args.seed);
    config.learners = learners;
    config.grids = read_grids(args.grid_file.as_ref())?;
    config.include_glm = args.glm;
    Ok(config)
}

fn run_study(config: &StudyConfig, out: &Path, force: bool) -> Result<()> {
    if out.join("manifest.json").exists() && !force {
        bail!("{} already holds results; pass --force to overwrite", out.display());
    }
    let result = replicate(config)?;
    write_study_outputs(out, &result, force)?;
    println!("{} rows written to {}", result.rows.len(), out.display());
    Ok(())
}

fn real_study(args: &RealStudyArgs) -> Result<()> {
    let Prior::Glm = args.prior;
    if args.out.join("manifest.json").exists() && !args.force {
        bail!("{} already holds results; pass --force to overwrite", args.out.display());
    }
    let ds = load(&args.data, args.schema.as_ref())?.without_true_prob();
    let mut config = RealDataConfig::new(ds.n_features(), args.seed);
    let grids = read_grids(args.grid_file.as_ref())?;
    if !grids.is_empty() {
        config.grids = grids;
    }
    let report = real_data_study(&ds, &config)?;
    write_real_data_outputs(&args.out, &report, args.seed, serde_json::to_value(&config)?, args.force)?;
    println!(
        "prior Beta({:.4}, {:.4}); results in {}",
        report.prior.alpha,
        report.prior.beta,
        args.out.display()
    );
    Ok(())
}

fn resample(args: &ResampleArgs) -> Result<()> {
    ensure_writable(&args.out, args.force)?;
    let target = match (args.alpha, args.beta, args.target_dgp) {
        (Some(a), Some(b), _) => BetaPrior::new(a, b)?,
        (_, _, Some(dgp)) => {
            let draw = generate(&DgpSpec::new(dgp, 0, args.seed), 100_000)?;
            fit_beta_mle(draw.true_prob())?
        }
        _ => unreachable!("clap enforces a target"),
    };
    let ds = load(&args.data, args.schema.as_ref())?;
    let scores = ds
        .true_prob()
        .context("resampling needs a true-probability column in the schema")?;
    let kept = match args.method {
        Method::Iterative => {
            let out = resample_iterative(scores, &target, &IterativeOptions::new(args.epsilon, args.seed))?;
            log::info!("KS trace {:?}", out.ks_trace);
            out.kept
        }
        Method::Rejection => {
            let opts = RejectionOptions {
                seed: args.seed,
                ..RejectionOptions::default()
            };
            let out = resample_rejection(scores, &target, &opts)?;
            log::info!("c = {:.4}, KS = {:.4}", out.c, out.ks);
            out.kept
        }
    };
    let subset = ds.subset(&kept);
    scoreshape::data::write_csv(&subset, fs::File::create(&args.out)?)?;
    let schema_file = args.out.with_extension("schema.toml");
    fs::write(&schema_file, scoreshape::data::write_schema(&subset).to_toml_string())?;
    println!(
        "kept {} of {} rows toward Beta({:.4}, {:.4})",
        kept.len(),
        ds.n(),
        target.alpha,
        target.beta
    );
    Ok(())
}

fn metrics(args: &MetricsArgs) -> Result<()> {
    let mut reader = csv::Reader::from_path(&args.data).with_context(|| format!("reading {}", args.data.display()))?;
    let headers = reader.headers()?.clone();
    let index = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("column `{name}` not found in {}", args.data.display()))
    };
    let si = index(&args.score_column)?;
    let li = index(&args.label_column)?;
    let ti = args.truth_column.as_deref().map(index).transpose()?;
    let (mut scores, mut labels, mut truth) = (Vec::new(), Vec::new(), Vec::new());
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .trim()
                .parse::<f64>()
                .with_context(|| format!("row {}, column `{}`: `{}` is not numeric", row + 1, &headers[i], &rec[i]))
        };
        scores.push(num(si)?);
        labels.push(num(li)?);
        if let Some(t) = ti {
            truth.push(num(t)?);
        }
    }
    let reference = match (ti, args.alpha, args.beta) {
        (Some(_), _, _) => ReferenceProfile::from_true_probabilities(&truth)?,
        (None, Some(a), Some(b)) => ReferenceProfile::from_beta(&BetaPrior::new(a, b)?),
        _ => bail!("give --truth-column or --alpha/--beta for the KL reference"),
    };
    let table = metric_table(&scores, &labels, &reference)?;
    println!("{}", serde_json::to_string_pretty(&table)?);
    Ok(())
}

fn report(args: &ReportArgs) -> Result<()> {
    let files = scoreshape::report::write_report(&args.dir)?;
    println!("{} ({} figures)", files.markdown.display(), files.figures.len());
    Ok(())
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SCORESHAPE_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("SCORESHAPE_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::TreeStudy(a) => run_study(&study_config(a, vec![LearnerKind::Tree])?, &a.out, a.force),
        Command::Select(a) => {
            let mut config = study_config(&a.study, a.learners.iter().map(|&l| l.into()).collect())?;
            if !a.criteria.is_empty() {
                config.criteria = a.criteria.clone();
            }
            config.resample_toward_dgp1 = a.resample;
            config.epsilon = a.epsilon;
            run_study(&config, &a.study.out, a.study.force)
        }
        Command::RealStudy(a) => real_study(a),
        Command::Resample(a) => resample(a),
        Command::Metrics(a) => metrics(a),
        Command::Report(a) => report(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2));
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
