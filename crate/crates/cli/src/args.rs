use std::path::PathBuf;

use casgd::comm::LayoutKind;
use casgd::sparse::LabelPolicy;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "casgd",
    version,
    about = "SGD and s-step CA-SGD for sparse logistic regression on a simulated cluster"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train one solver and write a per-epoch CSV trace.
    Train(TrainArgs),
    /// Run SGD and CA-SGD with matched seeds and report the relative solution error.
    Compare(CompareArgs),
    /// Print theoretical counters and modeled times.
    Costs(CostsArgs),
    /// Time solver phases on the host over several repeats.
    Bench(BenchArgs),
    /// Write a synthetic LIBSVM dataset.
    Generate(GenerateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Libsvm,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Sgd,
    Casgd,
    Gd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    Col,
    Row,
}

impl From<Layout> for LayoutKind {
    fn from(l: Layout) -> Self {
        match l {
            Layout::Col => LayoutKind::BlockColumn,
            Layout::Row => LayoutKind::BlockRow,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// LIBSVM input file.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Libsvm)]
    pub format: Format,
    /// Input is gzip-compressed.
    #[arg(long)]
    pub gzip: bool,
    /// Force the feature count (at least the largest index in the file).
    #[arg(long)]
    pub num_features: Option<usize>,
    /// Label encoding: `auto` ({-1,0}→-1, 1→+1), `pm1`, `01`, or `NEG,POS`.
    #[arg(long, default_value = "auto", value_parser = parse_labels)]
    pub labels: LabelPolicy,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = Layout::Col)]
    pub layout: Layout,
    /// Number of simulated ranks.
    #[arg(long, default_value_t = 1)]
    pub procs: usize,
    #[arg(long, default_value_t = 1)]
    pub batch: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: u64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Algo::Sgd)]
    pub algo: Algo,
    /// Unrolling depth for CA-SGD.
    #[arg(long, default_value_t = 1)]
    pub s_step: usize,
    /// CSV trace output.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Comma-separated unrolling depths.
    #[arg(long, value_delimiter = ',', required = true)]
    pub s_list: Vec<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    /// CSV output (standard output if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CostsArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    pub n: u64,
    /// Density of the data matrix.
    #[arg(long)]
    pub f: f64,
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub b: u64,
    #[arg(long)]
    pub s: u64,
    #[arg(long)]
    pub epochs: u64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = casgd::cost::MachineModel::DEFAULT_OMEGA)]
    pub omega: f64,
    /// Largest s scanned for the crossover.
    #[arg(long, default_value_t = 1024)]
    pub s_max: u64,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Algo::Casgd)]
    pub algo: Algo,
    #[arg(long, default_value_t = 1)]
    pub s_step: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Random sparse rows labelled by a planted hyperplane.
    Gaussian,
    /// One-hot categorical rows shaped like the mushrooms set.
    Mushrooms,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = Kind::Gaussian)]
    pub kind: Kind,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_labels(s: &str) -> Result<LabelPolicy, String> {
    match s {
        "auto" => Ok(LabelPolicy::Auto),
        "pm1" => Ok(LabelPolicy::PlusMinusOne),
        "01" => Ok(LabelPolicy::ZeroOne),
        _ => {
            let (neg, pos) = s
                .split_once(',')
                .ok_or_else(|| format!("unknown label policy `{s}`"))?;
            let parse = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("label `{t}`: {e}"))
            };
            let (negative, positive) = (parse(neg)?, parse(pos)?);
            if negative == positive {
                return Err("the two labels must differ".into());
            }
            Ok(LabelPolicy::Map { negative, positive })
        }
    }
}
