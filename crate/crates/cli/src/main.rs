//! `subgraph-entropy`: graphlet census, entropy embeddings, kernels,
//! classification and correlation-network series from the command line.
//!
//! Every subcommand writes its result to `--out` and a config echo to
//! `<out>.run.json`. Exit codes: 0 success, 1 computation error, 2 usage or
//! input error.

mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use subgraph_entropy::census::{write_census_csv, TopologyMask};
use subgraph_entropy::dataset::{parse_tudataset, GraphDataset};
use subgraph_entropy::entropy::{
    write_embeddings_csv, EdgeIntegral, Embedder, EntropyEmbedding, Stirling, ThermoParams,
};
use subgraph_entropy::finnet::{
    build_windows, entropy_series, flag_changes, ingest_prices, write_prices_csv,
    write_series_csv, FillPolicy, NodeLabeling, RegimeSwitch, WindowConfig,
};
use subgraph_entropy::kernel::{
    gram, kpca, read_precomputed, standardize, write_gram_csv, write_precomputed, BaseKernelSpec,
    GramMatrix,
};
use subgraph_entropy::pipeline::{census_dataset, embed_dataset};
use subgraph_entropy::svm::{cross_validate, CvReport};

#[derive(Parser, Debug)]
#[command(name = "subgraph-entropy", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
enum Command {
    /// Rooted graphlet census of every graph in a TUDataset directory.
    #[command(args_override_self = true)]
    Census(CensusArgs),
    /// Subgraph-entropy embedding of every graph.
    #[command(args_override_self = true)]
    Embed(EmbedArgs),
    /// Gram matrix of a base kernel over the embeddings.
    #[command(args_override_self = true)]
    Gram(GramArgs),
    /// Kernel PCA coordinates.
    #[command(args_override_self = true)]
    Kpca(KpcaArgs),
    /// Stratified k-fold C-SVM accuracy with nested selection of C.
    #[command(args_override_self = true)]
    Classify(ClassifyArgs),
    /// Sliding-window correlation networks and their entropy series.
    #[command(args_override_self = true)]
    Finnet(FinnetArgs),
    /// Synthetic price panel with one correlation-regime switch.
    #[command(args_override_self = true)]
    SynthPrices(SynthArgs),
}

#[derive(Args, Debug, Serialize)]
struct Common {
    /// Output file; the config echo goes to `<out>.run.json`.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all available cores). Output does not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON object of flag values (`{"beta": 0.5, "c_grid": [1, 10]}`); explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_mask(s: &str) -> Result<String, String> {
    TopologyMask::parse(s).map(|_| s.to_string())
}

#[derive(Args, Debug, Serialize)]
struct DatasetArgs {
    /// TUDataset directory holding NAME_A.txt, NAME_graph_indicator.txt, ...
    dataset: PathBuf,
    /// File prefix inside the directory (default: the directory name).
    #[arg(long)]
    name: Option<String>,
    /// Topology selection: all, small, include=<ids> or exclude=<ids>.
    #[arg(long, default_value = "all", value_parser = parse_mask)]
    topologies: String,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Mode {
    Closed,
    Mayer,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum StirlingArg {
    /// ln k! ≈ k ln k
    Leading,
    /// ln k! ≈ k ln k - k
    WithLinear,
}

#[derive(Args, Debug, Serialize)]
struct ThermoArgs {
    /// Inverse temperature β.
    #[arg(long, default_value_t = ThermoParams::default().beta)]
    beta: f64,
    /// Prefactor p of the closed-form edge integral p·e^β + R.
    #[arg(long, default_value_t = ThermoParams::default().p)]
    p: f64,
    #[arg(long, default_value_t = ThermoParams::default().r_min)]
    r_min: f64,
    #[arg(long, default_value_t = ThermoParams::default().r_max)]
    r_max: f64,
    /// Radial step Δr; R = -(r_max - r_min)/Δr.
    #[arg(long, default_value_t = ThermoParams::default().delta_r)]
    delta_r: f64,
    #[arg(long, default_value_t = ThermoParams::default().sigma)]
    sigma: f64,
    #[arg(long, default_value_t = ThermoParams::default().epsilon_well)]
    epsilon_well: f64,
    /// Edge integral: closed form or the Mayer sum over the radial grid.
    #[arg(long, value_enum, default_value_t = Mode::Closed)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = StirlingArg::Leading)]
    stirling: StirlingArg,
}

impl ThermoArgs {
    fn embedder(&self) -> Result<Embedder, Failure> {
        let params = ThermoParams {
            beta: self.beta,
            p: self.p,
            r_min: self.r_min,
            r_max: self.r_max,
            delta_r: self.delta_r,
            sigma: self.sigma,
            epsilon_well: self.epsilon_well,
        };
        let mode = match self.mode {
            Mode::Closed => EdgeIntegral::Closed,
            Mode::Mayer => EdgeIntegral::Mayer,
        };
        let stirling = match self.stirling {
            StirlingArg::Leading => Stirling::Leading,
            StirlingArg::WithLinear => Stirling::WithLinear,
        };
        let e = Embedder::with_stirling(params, mode, stirling)?;
        eprintln!(
            "epsilon = {}, R = {}, beta = {}",
            e.edge_integral(),
            params.r_offset(),
            params.beta
        );
        Ok(e)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum KernelKind {
    Linear,
    Rbf,
    Polynomial,
    Sigmoid,
}

#[derive(Args, Debug, Serialize)]
struct KernelArgs {
    /// Base kernel; sigmoid is not positive semi-definite.
    #[arg(long, value_enum, default_value_t = KernelKind::Linear)]
    kernel: KernelKind,
    /// RBF width (default 1/dim).
    #[arg(long)]
    gamma: Option<f64>,
    /// Polynomial degree.
    #[arg(long, default_value_t = 3)]
    degree: u32,
    /// Additive constant of the polynomial and sigmoid kernels.
    #[arg(long, default_value_t = 0.0)]
    coef0: f64,
    /// Sigmoid slope (default 1/dim).
    #[arg(long)]
    alpha: Option<f64>,
    /// Scale every embedding coordinate to zero mean and unit variance first.
    #[arg(long)]
    standardize: bool,
}

impl KernelArgs {
    fn spec(&self, dim: usize) -> BaseKernelSpec {
        let inv_dim = 1.0 / dim.max(1) as f64;
        match self.kernel {
            KernelKind::Linear => BaseKernelSpec::Linear,
            KernelKind::Rbf => BaseKernelSpec::Rbf {
                gamma: self.gamma.unwrap_or(inv_dim),
            },
            KernelKind::Polynomial => BaseKernelSpec::Polynomial {
                degree: self.degree,
                coef0: self.coef0,
            },
            KernelKind::Sigmoid => BaseKernelSpec::Sigmoid {
                alpha: self.alpha.unwrap_or(inv_dim),
                coef0: self.coef0,
            },
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct CensusArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
struct EmbedArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    thermo: ThermoArgs,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum GramFormat {
    Csv,
    Json,
    /// libsvm precomputed-kernel lines
    Precomputed,
}

#[derive(Args, Debug, Serialize)]
struct GramArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    thermo: ThermoArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, value_enum, default_value_t = GramFormat::Csv)]
    format: GramFormat,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct KpcaArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    thermo: ThermoArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 2)]
    components: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct ClassifyArgs {
    /// TUDataset directory (omit when using --precomputed).
    #[arg(required_unless_present = "precomputed")]
    dataset: Option<PathBuf>,
    /// Read the kernel and labels from a precomputed-kernel file instead.
    #[arg(long, conflicts_with = "dataset")]
    precomputed: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    /// Topology selection: all, small, include=<ids> or exclude=<ids>.
    #[arg(long, default_value = "all", value_parser = parse_mask)]
    topologies: String,
    #[command(flatten)]
    thermo: ThermoArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Candidate C values for nested selection.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,1,10,100")]
    c_grid: Vec<f64>,
    /// Independent repetitions; repetition r uses seed + r.
    #[arg(long, default_value_t = 1)]
    repetitions: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum LabelingArg {
    Unlabeled,
    DegreeBands,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum FillArg {
    Reject,
    ForwardFill,
}

#[derive(Args, Debug, Serialize)]
struct FinnetArgs {
    /// CSV with a date column followed by one price column per ticker.
    prices: PathBuf,
    #[arg(long, default_value_t = 28)]
    window: usize,
    /// Fraction of ticker pairs kept as edges in each window.
    #[arg(long, default_value_t = 0.05)]
    quantile: f64,
    /// Correlate daily log-returns instead of price levels.
    #[arg(long)]
    returns: bool,
    #[arg(long, value_enum, default_value_t = LabelingArg::Unlabeled)]
    labeling: LabelingArg,
    /// 1-based day ending the first window (default: the window length).
    #[arg(long)]
    first_end_day: Option<usize>,
    /// Trailing windows forming the z-score baseline.
    #[arg(long, default_value_t = 28)]
    baseline_window: usize,
    #[arg(long, default_value_t = 3.0)]
    z_threshold: f64,
    /// Handling of gaps after a ticker's first price.
    #[arg(long, value_enum, default_value_t = FillArg::Reject)]
    fill: FillArg,
    /// Topologies summed into the series.
    #[arg(long, default_value = "small", value_parser = parse_mask)]
    topologies: String,
    #[command(flatten)]
    thermo: ThermoArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = RegimeSwitch::default().tickers)]
    tickers: usize,
    #[arg(long, default_value_t = RegimeSwitch::default().days)]
    days: usize,
    /// 0-based day from which the block is correlated.
    #[arg(long, default_value_t = RegimeSwitch::default().switch_day)]
    switch_day: usize,
    #[arg(long, default_value_t = RegimeSwitch::default().block)]
    block: usize,
    #[arg(long, default_value_t = RegimeSwitch::default().correlation)]
    correlation: f64,
    #[arg(long, default_value_t = RegimeSwitch::default().volatility)]
    volatility: f64,
    #[command(flatten)]
    common: Common,
}

/// An error with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<subgraph_entropy::Error> for Failure {
    fn from(e: subgraph_entropy::Error) -> Self {
        Failure {
            code: if e.is_input_error() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::from(subgraph_entropy::Error::from(e))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", path.display())))
}

fn load_dataset(dir: &Path, name: Option<&str>) -> Result<GraphDataset, Failure> {
    if !dir.is_dir() {
        return Err(Failure::input(format!(
            "dataset directory {} does not exist",
            dir.display()
        )));
    }
    let name = match name {
        Some(n) => n.to_string(),
        None => dir
            .canonicalize()?
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .ok_or_else(|| Failure::input(format!("cannot name dataset {}", dir.display())))?,
    };
    Ok(parse_tudataset(dir, &name)?)
}

fn mask(spec: &str) -> TopologyMask {
    TopologyMask::parse(spec).expect("validated by clap")
}

fn embeddings(
    dir: &Path,
    name: Option<&str>,
    topologies: &str,
    thermo: &ThermoArgs,
) -> Result<(GraphDataset, Vec<EntropyEmbedding>), Failure> {
    let embedder = thermo.embedder()?;
    let ds = load_dataset(dir, name)?;
    if ds.is_empty() {
        return Err(Failure::input(format!("{} holds no graphs", dir.display())));
    }
    let censuses = census_dataset(&ds, &mask(topologies));
    let e = embed_dataset(&ds, &censuses, &embedder)?;
    Ok((ds, e))
}

fn kernel_matrix(
    mut e: Vec<EntropyEmbedding>,
    kernel: &KernelArgs,
) -> Result<GramMatrix, Failure> {
    if kernel.standardize {
        standardize(&mut e);
    }
    let spec = kernel.spec(e[0].dim());
    spec.validate()?;
    if !spec.is_psd() {
        eprintln!("warning: {spec:?} is not positive semi-definite");
    }
    Ok(gram(&e, &spec)?)
}

fn run_census(a: &CensusArgs) -> Result<(), Failure> {
    let ds = load_dataset(&a.data.dataset, a.data.name.as_deref())?;
    let tables = census_dataset(&ds, &mask(&a.data.topologies));
    write_census_csv(&tables, &ds.label_alphabet, create(&a.common.out)?)?;
    Ok(())
}

fn run_embed(a: &EmbedArgs) -> Result<(), Failure> {
    let (ds, e) = embeddings(&a.data.dataset, a.data.name.as_deref(), &a.data.topologies, &a.thermo)?;
    let out = create(&a.common.out)?;
    match a.format {
        TableFormat::Csv => write_embeddings_csv(&e, &ds.label_alphabet, out)?,
        TableFormat::Json => serde_json::to_writer_pretty(out, &e)?,
    }
    Ok(())
}

fn run_gram(a: &GramArgs) -> Result<(), Failure> {
    let (ds, e) = embeddings(&a.data.dataset, a.data.name.as_deref(), &a.data.topologies, &a.thermo)?;
    let g = kernel_matrix(e, &a.kernel)?;
    let out = create(&a.common.out)?;
    match a.format {
        GramFormat::Csv => write_gram_csv(&g, out)?,
        GramFormat::Json => serde_json::to_writer(out, &g)?,
        GramFormat::Precomputed => write_precomputed(&g, &ds.class_labels, out)?,
    }
    Ok(())
}

fn run_kpca(a: &KpcaArgs) -> Result<(), Failure> {
    let (_, e) = embeddings(&a.data.dataset, a.data.name.as_deref(), &a.data.topologies, &a.thermo)?;
    let g = kernel_matrix(e, &a.kernel)?;
    let r = kpca(&g, a.components)?;
    let mut out = create(&a.common.out)?;
    let header: Vec<String> = (1..=a.components).map(|c| format!("pc{c}")).collect();
    writeln!(out, "graph_id,{}", header.join(","))?;
    for (id, row) in g.graph_ids.iter().zip(&r.coordinates) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{id},{}", cells.join(","))?;
    }
    out.flush()?;
    eprintln!("explained variance ratio: {:?}", r.explained_ratio);
    Ok(())
}

fn run_classify(a: &ClassifyArgs) -> Result<(), Failure> {
    let (g, labels) = match (&a.precomputed, &a.dataset) {
        (Some(path), _) => {
            let file = File::open(path)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
            read_precomputed(BufReader::new(file))?
        }
        (None, Some(dir)) => {
            let (ds, e) = embeddings(dir, a.name.as_deref(), &a.topologies, &a.thermo)?;
            (kernel_matrix(e, &a.kernel)?, ds.class_labels)
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    if a.repetitions == 0 {
        return Err(Failure::input("--repetitions must be at least 1"));
    }
    let reports: Vec<CvReport> = (0..a.repetitions)
        .map(|r| cross_validate(&g, &labels, a.folds, &a.c_grid, a.seed.wrapping_add(r)))
        .collect::<Result<_, _>>()?;
    for r in &reports {
        eprint!("{r}");
    }
    let out = create(&a.common.out)?;
    if let [single] = reports.as_slice() {
        serde_json::to_writer_pretty(out, single)?;
    } else {
        let means: Vec<f64> = reports.iter().map(|r| r.mean).collect();
        let overall = means.iter().sum::<f64>() / means.len() as f64;
        serde_json::to_writer_pretty(
            out,
            &serde_json::json!({ "mean": overall, "repetitions": reports }),
        )?;
    }
    Ok(())
}

fn run_finnet(a: &FinnetArgs) -> Result<(), Failure> {
    let embedder = a.thermo.embedder()?;
    let policy = match a.fill {
        FillArg::Reject => FillPolicy::Reject,
        FillArg::ForwardFill => FillPolicy::ForwardFill,
    };
    let prices = ingest_prices(&a.prices, policy)?;
    let config = WindowConfig {
        window: a.window,
        quantile: a.quantile,
        returns: a.returns,
        labeling: match a.labeling {
            LabelingArg::Unlabeled => NodeLabeling::Unlabeled,
            LabelingArg::DegreeBands => NodeLabeling::DegreeBands,
        },
        first_end_day: a.first_end_day,
    };
    let series = build_windows(&prices, &config)?;
    let entropy = entropy_series(&series, &embedder, &mask(&a.topologies))?;
    let flagged = flag_changes(&entropy.subgraph, a.z_threshold, a.baseline_window)?;
    eprintln!(
        "{} windows, {} flagged: {:?}",
        series.graphs.len(),
        flagged.len(),
        flagged
            .iter()
            .map(|&i| series.window_end_dates[i].as_str())
            .collect::<Vec<_>>()
    );
    write_series_csv(&series.window_end_dates, &entropy, &flagged, create(&a.common.out)?)?;
    Ok(())
}

fn run_synth(a: &SynthArgs) -> Result<(), Failure> {
    let spec = RegimeSwitch {
        tickers: a.tickers,
        days: a.days,
        switch_day: a.switch_day,
        block: a.block,
        correlation: a.correlation,
        volatility: a.volatility,
    };
    if spec.block > spec.tickers || !(0.0..=1.0).contains(&spec.correlation) || spec.days < 2 {
        return Err(Failure::input(
            "need block <= tickers, correlation in [0, 1] and at least 2 days",
        ));
    }
    write_prices_csv(&spec.generate(a.seed), create(&a.common.out)?)?;
    Ok(())
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Census(a) => &a.common,
            Command::Embed(a) => &a.common,
            Command::Gram(a) => &a.common,
            Command::Kpca(a) => &a.common,
            Command::Classify(a) => &a.common,
            Command::Finnet(a) => &a.common,
            Command::SynthPrices(a) => &a.common,
        }
    }

    fn run(&self) -> Result<(), Failure> {
        match self {
            Command::Census(a) => run_census(a),
            Command::Embed(a) => run_embed(a),
            Command::Gram(a) => run_gram(a),
            Command::Kpca(a) => run_kpca(a),
            Command::Classify(a) => run_classify(a),
            Command::Finnet(a) => run_finnet(a),
            Command::SynthPrices(a) => run_synth(a),
        }
    }
}

fn write_echo(command: &Command) -> Result<(), Failure> {
    let mut path = command.common().out.clone().into_os_string();
    path.push(".run.json");
    let echo = serde_json::json!({
        "program": "subgraph-entropy",
        "version": env!("CARGO_PKG_VERSION"),
        "run": command,
    });
    let mut out = create(Path::new(&path))?;
    serde_json::to_writer_pretty(&mut out, &echo)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn execute(command: &Command) -> Result<(), Failure> {
    if let Some(jobs) = command.common().jobs {
        if jobs == 0 {
            return Err(Failure::input("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::input(e.to_string()))?;
    }
    write_echo(command)?;
    command.run()
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
