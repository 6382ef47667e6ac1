use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rankabstain::eval::{self, CrossValidation, FoldInstances, Method, QGrid};
use rankabstain::io::{self as dio, CurveRow};
use rankabstain::synth::{self, Generator, GeneratorKind, SynthSpec};
use rankabstain::{Dataset, LearnerConfig, Threshold};

#[derive(Parser, Debug)]
#[command(name = "rankabstain", version, about = "Label ranking with partial abstention")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and check a label-ranking CSV.
    Ingest(IngestArgs),
    /// Generate a seeded synthetic dataset.
    Synth(SynthArgs),
    /// Trade-off curve of one method (cross-validated, or train/test with --test).
    Sweep(SweepArgs),
    /// Probabilistic method and ensemble baseline on identical folds and seeds.
    Compare(SweepArgs),
    /// Partial order predicted for one feature vector.
    Predict(PredictArgs),
}

#[derive(Args, Debug)]
struct IngestArgs {
    path: PathBuf,
    /// Only validate; print a summary.
    #[arg(long)]
    validate: bool,
    /// Write the dataset back out in canonical form.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_parser = parse_generator)]
    generator: GeneratorKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// pl-linear: standard deviation of the score weights (0 gives uniform rankings).
    #[arg(long, default_value_t = 1.0)]
    weight_scale: f64,
    /// mallows-regions: number of regions.
    #[arg(long, default_value_t = 4)]
    regions: usize,
    /// mallows-regions: Mallows spread within each region.
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Mallows,
    Pl,
    Baseline,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Mallows => Method::Mallows,
            MethodArg::Pl => Method::PlackettLuce,
            MethodArg::Baseline => Method::Baseline,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct LearnerArgs {
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    ensemble_size: usize,
    #[arg(long)]
    seed: u64,
}

impl LearnerArgs {
    fn config(&self) -> Result<LearnerConfig> {
        let cfg = LearnerConfig { k: self.k, ensemble_size: self.ensemble_size, seed: self.seed, ..Default::default() };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Training data (cross-validated unless --test is given).
    #[arg(long)]
    data: PathBuf,
    /// Held-out test data; disables cross-validation.
    #[arg(long)]
    test: Option<PathBuf>,
    /// For `compare`, the probabilistic model to pit against the baseline.
    #[arg(long, value_enum, default_value_t = MethodArg::Pl)]
    method: MethodArg,
    #[command(flatten)]
    learner: LearnerArgs,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Threshold grid as lo:hi:step.
    #[arg(long, default_value = "0.5:0.95:0.05", value_parser = parse_grid)]
    q_grid: QGrid,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-instance scores (method,fold,row,q,completeness,correctness).
    #[arg(long)]
    per_instance: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated feature vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[command(flatten)]
    learner: LearnerArgs,
    #[arg(long, default_value = "0.5", value_parser = parse_threshold)]
    q: Threshold,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn parse_generator(s: &str) -> Result<GeneratorKind, String> {
    s.parse().map_err(|e: rankabstain::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<QGrid, String> {
    s.parse().map_err(|e: rankabstain::Error| e.to_string())
}

fn parse_threshold(s: &str) -> Result<Threshold, String> {
    let q: f64 = s.parse().map_err(|_| format!("bad threshold {s:?}"))?;
    Threshold::new(q).map_err(|e| e.to_string())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(path: &Path) -> Result<Dataset> {
    dio::read_dataset(path).with_context(|| format!("reading {}", path.display()))
}

fn run_ingest(args: &IngestArgs) -> Result<()> {
    let data = load(&args.path)?;
    println!(
        "{}: ok, {} rows, {} features, {} labels ({})",
        args.path.display(),
        data.len(),
        data.dims(),
        data.labels(),
        data.label_names().join(",")
    );
    if let Some(out) = &args.out {
        if args.validate {
            bail!("--validate does not write output; drop --out or --validate");
        }
        let mut w = output(Some(out))?;
        dio::write_dataset(&data, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let generator = match args.generator {
        GeneratorKind::PlLinear => Generator::PlLinear { weight_scale: args.weight_scale },
        GeneratorKind::MallowsRegions => Generator::MallowsRegions { regions: args.regions, theta: args.theta },
    };
    let spec = SynthSpec { generator, instances: args.n, labels: args.m, dims: args.d };
    let data = synth::synth(&spec, args.seed)?;
    let mut w = output(args.out.as_deref())?;
    dio::write_dataset(&data, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Curves (and optional per-instance scores) of one method.
struct MethodRun {
    rows: Vec<CurveRow>,
    instances: Vec<(i64, FoldInstances)>,
}

fn run_method(args: &SweepArgs, method: Method, data: &Dataset, test: Option<&Dataset>) -> Result<MethodRun> {
    let cfg = args.learner.config()?;
    match test {
        Some(test) => {
            let scores = eval::score_instances(data, test, method, &cfg, &args.q_grid)?;
            let curve = eval::aggregate(method, &args.q_grid, &scores);
            let rows = dio::curve_rows(&curve, -1);
            Ok(MethodRun { rows, instances: vec![(-1, FoldInstances { rows: (0..test.len()).collect(), scores })] })
        }
        None => {
            let cv: CrossValidation = eval::cross_validate(data, args.folds, method, &cfg, &args.q_grid)?;
            let rows = dio::cross_validation_rows(&cv);
            Ok(MethodRun {
                rows,
                instances: cv.instances.into_iter().enumerate().map(|(f, i)| (f as i64, i)).collect(),
            })
        }
    }
}

fn write_per_instance(path: &Path, grid: &QGrid, runs: &[(Method, MethodRun)]) -> Result<()> {
    let mut w = output(Some(path))?;
    writeln!(w, "method,fold,row,q,completeness,correctness")?;
    for (method, run) in runs {
        for (fold, inst) in &run.instances {
            for (row, scores) in inst.rows.iter().zip(&inst.scores) {
                for (q, s) in grid.thresholds().iter().zip(scores) {
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        method.tag(),
                        fold,
                        row,
                        dio::format_sig(q.value(), 6),
                        dio::format_sig(s.completeness, 6),
                        s.correctness.map(|c| dio::format_sig(c, 6)).unwrap_or_default()
                    )?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn run_sweep(args: &SweepArgs, methods: &[Method]) -> Result<()> {
    let data = load(&args.data)?;
    let test = args.test.as_deref().map(load).transpose()?;
    if let Some(t) = &test {
        if t.label_names() != data.label_names() || t.dims() != data.dims() {
            bail!("test data must share the training data's labels and feature count");
        }
    }
    if methods.contains(&Method::Baseline) {
        eprintln!(
            "note: baseline-ensemble uses {} bootstrap k-NN Borda rankers (k={}) voting pairwise; \
             other ensemble designs may behave differently",
            args.learner.ensemble_size, args.learner.k
        );
    }
    let runs =
        methods.iter().map(|&m| Ok((m, run_method(args, m, &data, test.as_ref())?))).collect::<Result<Vec<_>>>()?;
    let rows: Vec<CurveRow> = runs.iter().flat_map(|(_, r)| r.rows.iter().cloned()).collect();

    let mut w = output(args.out.as_deref())?;
    match args.format {
        Format::Csv => dio::write_curves_csv(&rows, &mut w)?,
        Format::Json => w.write_all(dio::curves_json(&rows).as_bytes())?,
    }
    w.flush()?;
    if let Some(path) = &args.per_instance {
        write_per_instance(path, &args.q_grid, &runs)?;
    }
    Ok(())
}

fn run_predict(args: &PredictArgs) -> Result<()> {
    let data = load(&args.data)?;
    let cfg = args.learner.config()?;
    let predictor = eval::Predictor::fit(&data, args.method.into(), &cfg)?;
    let pred = predictor.predict(&args.x, args.q)?;
    let names = data.label_names();
    let pairs: Vec<(String, String)> = pred.order.edges().map(|(i, j)| (names[i].clone(), names[j].clone())).collect();
    let mut out = io::stdout().lock();
    match args.format {
        Format::Csv => {
            writeln!(out, "preferred,over")?;
            for (a, b) in &pairs {
                writeln!(out, "{a},{b}")?;
            }
            writeln!(out, "# effective_q={}", dio::format_sig(pred.effective_q.value(), 6))?;
            writeln!(out, "# repaired={}", pred.repaired)?;
        }
        Format::Json => {
            let value = json!({
                "pairs": pairs,
                "requested_q": dio::format_sig(pred.requested_q.value(), 6).parse::<f64>()?,
                "effective_q": dio::format_sig(pred.effective_q.value(), 6).parse::<f64>()?,
                "repaired": pred.repaired,
            });
            writeln!(out, "{value}")?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(args) => run_ingest(&args),
        Command::Synth(args) => run_synth(&args),
        Command::Sweep(args) => {
            let method = args.method.into();
            run_sweep(&args, &[method])
        }
        Command::Compare(args) => {
            if args.method == MethodArg::Baseline {
                bail!("compare needs a probabilistic --method (mallows or pl)");
            }
            let method = args.method.into();
            run_sweep(&args, &[method, Method::Baseline])
        }
        Command::Predict(args) => run_predict(&args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
