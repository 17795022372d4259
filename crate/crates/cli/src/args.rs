use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zlattice::lattice::IndexBox;

#[derive(Parser, Debug)]
#[command(name = "zlattice", version, about = "Lattice Z-transforms, convolutions and difference-equation solvers")]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "ZLATTICE_THREADS")]
    pub threads: Option<usize>,

    /// Format of result tables written with `--out`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the run report here instead of standard output.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Forward evaluation and contour inversion.
    #[command(subcommand)]
    Transform(TransformCmd),
    /// Convolution of two sequence tables.
    Convolve(ConvolveArgs),
    /// Cesàro kernels and Weyl fractional differences.
    #[command(subcommand)]
    Fractional(FractionalCmd),
    /// Solve a pencil or Volterra problem and verify the residual.
    Solve(SolveArgs),
    /// Sample the smallest singular value of a problem symbol.
    ProbeUniqueness(ProbeArgs),
    /// Run a named test vector (or `all`).
    Fixtures(FixtureArgs),
}

#[derive(Subcommand, Debug)]
pub enum TransformCmd {
    /// Evaluate F(z) of a stored sequence with its tail bound.
    Eval {
        #[arg(long)]
        seq: PathBuf,
        /// Point as comma-separated complex numbers; may be repeated.
        #[arg(long, required = true, allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// Recover coefficients on a window from values on a polycircle.
    Invert(Box<InvertArgs>),
    /// Propose inversion radii as 1.5 times the envelope rates.
    SuggestRadii {
        #[arg(long)]
        seq: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct InvertArgs {
    /// Built-in evaluator: probability, binomial or constant.
    #[arg(long, conflicts_with_all = ["rational", "seq"])]
    pub fixture: Option<String>,
    /// Rational-expression document.
    #[arg(long, conflicts_with = "seq")]
    pub rational: Option<PathBuf>,
    /// Sequence table whose transform is inverted.
    #[arg(long)]
    pub seq: Option<PathBuf>,
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    #[arg(long, default_value_t = 0.3)]
    pub a: f64,
    #[arg(long, default_value_t = 0.4)]
    pub b: f64,
    /// Value of the constant evaluator.
    #[arg(long, default_value = "1")]
    pub value: String,
    /// Lattice dimension of the constant evaluator.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 60)]
    pub truncation: usize,
    #[arg(long, value_parser = parse_f64_list)]
    pub radii: Floats,
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
    pub window: IndexBox,
    #[arg(long, value_parser = parse_usize_list)]
    pub grid: Option<Sizes>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConvMode {
    Faltung,
    Weyl,
    General,
    Axes,
}

#[derive(Args, Debug)]
pub struct ConvolveArgs {
    #[arg(long, value_enum, default_value_t = ConvMode::General)]
    pub mode: ConvMode,
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Convolution axes (1-based), for `--mode axes`.
    #[arg(long, value_parser = parse_usize_list)]
    pub axes: Option<Sizes>,
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
    pub window: IndexBox,
    /// Relative tolerance on the truncated tail of each sum.
    #[arg(long, default_value_t = 1e-12)]
    pub tail_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum FractionalCmd {
    /// Cesàro numbers c^alpha(0..len).
    Cesaro {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 64)]
        len: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weyl fractional difference of a sequence.
    Weyl {
        #[arg(long)]
        alpha: f64,
        /// Difference order; the kernel is c^(m - alpha). Defaults to ceil(alpha).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        seq: PathBuf,
        #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
        window: IndexBox,
        /// Number of stored kernel values.
        #[arg(long, default_value_t = 512)]
        kernel_len: usize,
        #[arg(long, default_value_t = 1e-12)]
        tail_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Data table; overrides the `data` entry of the problem document.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_parser = parse_f64_list)]
    pub radii: Floats,
    /// Kernel window; defaults to the window covering the output and the data support.
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
    pub kernel_window: Option<IndexBox>,
    /// Window on which the residual is checked.
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
    pub check_window: IndexBox,
    /// Output window of the solution; widened to what the residual check needs.
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
    pub out_window: Option<IndexBox>,
    #[arg(long, value_parser = parse_usize_list)]
    pub grid: Option<Sizes>,
    /// Residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Polycircle radii of the samples.
    #[arg(long, value_parser = parse_f64_list)]
    pub radii: Floats,
    /// Samples per axis.
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
    #[arg(long, default_value_t = zlattice::solver::DEFAULT_PROBE_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Args, Debug)]
pub struct FixtureArgs {
    /// Fixture name, or `all`.
    pub name: String,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Largest index of the checked window.
    #[arg(long)]
    pub window: Option<i64>,
    #[arg(long, value_parser = parse_f64_list)]
    pub radii: Option<Floats>,
    #[arg(long, value_parser = parse_usize_list)]
    pub grid: Option<Sizes>,
    #[arg(long)]
    pub truncation: Option<usize>,
    /// Write the fixture's table here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

// clap treats `Vec<T>` fields as repeated arguments; wrapping keeps one value per flag.
#[derive(Clone, Debug)]
pub struct Floats(pub Vec<f64>);

#[derive(Clone, Debug)]
pub struct Sizes(pub Vec<usize>);

fn parse_f64_list(s: &str) -> Result<Floats, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Floats)
}

fn parse_usize_list(s: &str) -> Result<Sizes, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Sizes)
}

/// `lo:hi` per axis, comma separated, e.g. `0:12,-3:3`.
pub fn parse_box(s: &str) -> Result<IndexBox, String> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in s.split(',') {
        let (a, b) = part.split_once(':').ok_or_else(|| format!("expected lo:hi, got {part:?}"))?;
        lo.push(a.trim().parse::<i64>().map_err(|e| format!("{a:?}: {e}"))?);
        hi.push(b.trim().parse::<i64>().map_err(|e| format!("{b:?}: {e}"))?);
    }
    IndexBox::from_bounds(&lo, &hi).map_err(|e| e.to_string())
}
