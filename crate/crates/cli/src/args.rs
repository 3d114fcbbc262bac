use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "minima-forge", version, about = "Templates, contraction rates and successive minima along the diagonal flow")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<String>,
    /// json or csv; defaults to the output extension, else json.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuildKind {
    Zero,
    Quad,
    Pulse,
    Reflect,
}

impl BuildKind {
    pub fn name(self) -> &'static str {
        match self {
            BuildKind::Zero => "zero",
            BuildKind::Quad => "quad",
            BuildKind::Pulse => "pulse",
            BuildKind::Reflect => "reflect",
        }
    }
}

/// A lattice given by basis rows, or a flow point `(m, n, A, u)`.
#[derive(Debug, Clone, Args)]
pub struct LatticeArgs {
    /// JSON rows of a matrix whose columns are the basis vectors.
    #[arg(long, conflicts_with_all = ["m", "n", "a", "u"])]
    pub basis: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// A-spec: inline JSON rows, @file, fib:k or rand:seed.
    #[arg(long)]
    pub a: Option<String>,
    /// Flow scale u >= 1.
    #[arg(long)]
    pub u: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a template document against the axioms.
    Validate { file: String },
    /// Average contraction rates of a template.
    Rate {
        file: String,
        /// Comma-separated rationals, or `breakpoints`.
        #[arg(long, default_value = "breakpoints")]
        at: String,
        /// Tail rate bounds up to this horizon.
        #[arg(long)]
        bounds: Option<String>,
        /// Skip validation on load.
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build a template document.
    Build {
        #[arg(value_enum)]
        kind: BuildKind,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        /// Quadrilateral period length.
        #[arg(long, default_value = "1")]
        scale: String,
        #[arg(long, default_value_t = 1)]
        periods: usize,
        /// `min` or a table entry.
        #[arg(long, default_value = "min")]
        tau1: String,
        #[arg(long, default_value = "min")]
        tau2: String,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
        /// Template document to reflect.
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Successive minima along the flow with order verdicts.
    Flow {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// A-spec: inline JSON rows, @file, fib:k or rand:seed.
        #[arg(long)]
        a: String,
        /// Geometric scale grid `u0:ratio:count`.
        #[arg(long = "u-grid", default_value = "1:2:8")]
        u_grid: String,
        /// Comma-separated orders r.
        #[arg(long, default_value = "1")]
        orders: String,
        #[arg(long, default_value = "l2")]
        norm: String,
        #[arg(long, default_value = "1/10")]
        threshold: String,
        /// Add dual-product columns per order.
        #[arg(long)]
        dual: bool,
        /// Append the correspondence report with this Q_max.
        #[arg(long = "cross-check")]
        cross_check: Option<i64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Arithmetic scan for independent small-score tuples.
    Scan {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        a: String,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long = "q-max")]
        q_max: i64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Dual successive-minima bounds, plus the dual-flow identity for flow points.
    DualCheck {
        #[command(flatten)]
        lattice: LatticeArgs,
    },
    /// Minkowski's second theorem bounds.
    MinkCheck {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value = "l2")]
        norm: String,
    },
    /// Run the embedded acceptance suite.
    Selftest {
        /// Corrupt one component: zero-template, quadrilateral, pulse or minima.
        #[arg(long)]
        inject: Option<String>,
        /// Comma-separated criterion ids.
        #[arg(long)]
        only: Option<String>,
        /// Do not fail criteria that exceed their time limit.
        #[arg(long)]
        no_time_limits: bool,
    },
}
