use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use volterra_core::mc::NoiseLaw;

use crate::config::RunConfig;

const AFTER_HELP: &str = "\
Exit codes: 0 success, 1 usage error, 2 a tolerance check failed, 3 numeric failure.
Artifacts go to --out, else $VOLTERRA_OUT, else ./volterra-out; every run writes run.json there.";

#[derive(Parser, Debug)]
#[command(name = "volterra", version, about = "Stationary discrete-time Volterra processes: simulation, chaos decomposition and limit theorems", after_help = AFTER_HELP)]
pub struct Cli {
    /// JSON run configuration; fields it sets override the flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Root seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tolerance manifest (defaults to the built-in one).
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Kernel utilities.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Set partitions of {1..k} in canonical brace notation.
    Partitions {
        #[arg(long)]
        k: Option<usize>,
    },
    /// Appell polynomials A_0..A_K of a noise law or an explicit moment list.
    Appell {
        /// A law name (gaussian, rademacher, uniform, exponential) or moments mu_0,mu_1,... .
        #[arg(long, allow_negative_numbers = true)]
        moments: Option<String>,
        #[arg(long = "K")]
        order: Option<usize>,
    },
    /// Terms (partition, Appell orders) of the chaos decomposition of an order-k kernel.
    Terms {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_parser = parse_law)]
        noise: Option<NoiseLaw>,
    },
    /// Simulate paths X(1..N) to CSV.
    Simulate {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        process: ProcessArgs,
        /// Add the innovation column eps.
        #[arg(long)]
        with_eps: bool,
    },
    /// Exact mean of X against a Monte Carlo estimate.
    Mean {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        process: ProcessArgs,
    },
    /// Check that the chaos terms of a path add up to the centred path.
    DecomposeCheck {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        process: ProcessArgs,
        /// Use a random symmetric coefficient table instead of a kernel.
        #[arg(long)]
        random_table: bool,
    },
    /// Long or short memory from kernel exponents.
    Classify {
        #[command(flatten)]
        kernel: KernelArgs,
        /// Power bounds hold only off the diagonal.
        #[arg(long)]
        off_diagonal: bool,
    },
    /// Empirical autocovariance and its log-log slope.
    Acf {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        max_lag: Option<usize>,
        #[arg(long)]
        lag_lo: Option<usize>,
        #[arg(long)]
        lag_hi: Option<usize>,
    },
    /// Var S_N over dyadic N and its log-log slope.
    Varscale {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        log2_n_lo: Option<u32>,
        #[arg(long)]
        log2_n_hi: Option<u32>,
    },
    /// Simulate the limit Z(t) on a discretized grid.
    Hermite {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        limit: LimitArgs,
    },
    /// Normalized partial sums against the Hermite-type limit.
    Nclt {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        process: ProcessArgs,
        #[command(flatten)]
        limit: LimitArgs,
        /// Sample sizes (overrides --N).
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
    },
    /// Normalized partial sums of a short-memory process against the normal law.
    Clt {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        max_lag: Option<usize>,
        #[arg(long)]
        off_diagonal: bool,
    },
    /// Hypercontractivity ratio ||Q||_p / ||Q||_2 of a discrete chaos.
    Hyper {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Bootstrap replications for the interval (0 skips it).
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long)]
        random_table: bool,
    },
    /// Run the acceptance suite against the tolerance manifest.
    Verify {
        /// Criterion numbers to run (default all).
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<usize>>,
        /// Also write nclt_sweep.csv: limit-variance bias against the truncation horizon.
        #[arg(long)]
        sweep_horizon: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum KernelCommand {
    /// Check the homogeneity, boundedness and exponent conditions.
    Validate {
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Evaluate the r-fold diagonal trace at a point.
    Trace {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
    },
    /// Squared L2 norm of the limit integrand h_t of the r-fold trace.
    Htnorm {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        t: Option<f64>,
    },
}

#[derive(Args, Debug, Default)]
pub struct KernelArgs {
    /// powersum, productpower, ratioform, an inline JSON document or a *.json file.
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Product-power exponents.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gammas: Option<Vec<f64>>,
    /// Ratio-form numerator exponents.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    /// Ratio-form denominator exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct ProcessArgs {
    #[arg(long, value_parser = parse_law)]
    pub noise: Option<NoiseLaw>,
    /// Truncation horizon.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Path length.
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Simulate the untruncated process.
    #[arg(long)]
    pub untruncated: bool,
}

#[derive(Args, Debug, Default)]
pub struct LimitArgs {
    #[arg(long, value_delimiter = ',')]
    pub ts: Option<Vec<f64>>,
    /// Replications of the limit.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Grid cells.
    #[arg(long)]
    pub cells: Option<usize>,
}

fn parse_law(s: &str) -> Result<NoiseLaw, String> {
    NoiseLaw::parse(s).ok_or_else(|| format!("unknown noise law '{s}' (gaussian, rademacher, uniform, exponential)"))
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

impl KernelArgs {
    fn fill(&self, c: &mut RunConfig) {
        c.kernel = self.kernel.clone().map(serde_json::Value::String);
        c.k = self.k;
        c.alpha = self.alpha;
        c.gammas = self.gammas.clone();
        c.a = self.a.clone();
        c.b = self.b;
    }
}

impl ProcessArgs {
    fn fill(&self, c: &mut RunConfig) {
        c.noise = self.noise;
        c.m = self.m;
        c.n = self.n;
        c.paths = self.paths;
        c.untruncated = flag(self.untruncated);
    }
}

impl LimitArgs {
    fn fill(&self, c: &mut RunConfig) {
        c.ts = self.ts.clone();
        c.reps = self.reps;
        c.cells = self.cells;
    }
}

impl Cli {
    /// Command name and the configuration the flags describe.
    pub fn to_config(&self) -> (String, RunConfig) {
        let mut c = RunConfig {
            out: self.out.clone(),
            threads: self.threads,
            seed: self.seed,
            manifest: self.manifest.clone(),
            ..RunConfig::default()
        };
        let name = match &self.command {
            Command::Kernel(sub) => match sub {
                KernelCommand::Validate { kernel } => {
                    kernel.fill(&mut c);
                    "kernel validate"
                }
                KernelCommand::Trace { kernel, r, x } => {
                    kernel.fill(&mut c);
                    c.r = *r;
                    c.x = x.clone();
                    "kernel trace"
                }
                KernelCommand::Htnorm { kernel, r, t } => {
                    kernel.fill(&mut c);
                    c.r = *r;
                    c.t = *t;
                    "kernel htnorm"
                }
            },
            Command::Partitions { k } => {
                c.k = *k;
                "partitions"
            }
            Command::Appell { moments, order } => {
                c.moments = moments.clone();
                c.order = *order;
                "appell"
            }
            Command::Terms { k, noise } => {
                c.k = *k;
                c.noise = *noise;
                "terms"
            }
            Command::Simulate { kernel, process, with_eps } => {
                kernel.fill(&mut c);
                process.fill(&mut c);
                c.with_eps = flag(*with_eps);
                "simulate"
            }
            Command::Mean { kernel, process } => {
                kernel.fill(&mut c);
                process.fill(&mut c);
                "mean"
            }
            Command::DecomposeCheck { kernel, process, random_table } => {
                kernel.fill(&mut c);
                process.fill(&mut c);
                c.random_table = flag(*random_table);
                "decompose-check"
            }
            Command::Classify { kernel, off_diagonal } => {
                kernel.fill(&mut c);
                c.off_diagonal = flag(*off_diagonal);
                "classify"
            }
            Command::Acf { kernel, process, max_lag, lag_lo, lag_hi } => {
                kernel.fill(&mut c);
                process.fill(&mut c);
                c.max_lag = *max_lag;
                c.lag_lo = *lag_lo;
                c.lag_hi = *lag_hi;
                "acf"
            }
            Command::Varscale { kernel, process, log2_n_lo, log2_n_hi } => {
                kernel.fill(&mut c);
                process.fill(&mut c);
                c.log2_n_lo = *log2_n_lo;
                c.log2_n_hi = *log2_n_hi;
                "varscale"
            }
            Command::Hermite { kernel, limit } => {
                kernel.fill(&mut c);
                limit.fill(&mut c);
                "hermite"
            }
            Command::Nclt { kernel, process, limit, ns } => {
                kernel.fill(&mut c);
                process.fill(&mut c);
                limit.fill(&mut c);
                c.ns = ns.clone();
                "nclt"
            }
            Command::Clt { kernel, process, max_lag, off_diagonal } => {
                kernel.fill(&mut c);
                process.fill(&mut c);
                c.max_lag = *max_lag;
                c.off_diagonal = flag(*off_diagonal);
                "clt"
            }
            Command::Hyper { kernel, process, p, samples, bootstrap, random_table } => {
                kernel.fill(&mut c);
                process.fill(&mut c);
                c.p = *p;
                c.samples = *samples;
                c.bootstrap = *bootstrap;
                c.random_table = flag(*random_table);
                "hyper"
            }
            Command::Verify { criteria, sweep_horizon } => {
                c.criteria = criteria.clone();
                c.sweep_horizon = flag(*sweep_horizon);
                "verify"
            }
        };
        (name.to_string(), c)
    }
}
