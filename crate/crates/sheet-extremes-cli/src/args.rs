//! Command-line surface. Data goes to stdout or `--out`; progress and
//! warnings go to stderr. Exit codes: 0 success, 1 computation or
//! certification failure, 2 usage.

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "sheet-extremes",
    about = "Tail bounds for suprema of anisotropic self-similar Gaussian fields, \
             with Monte-Carlo certification",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Evaluate bound families over a threshold grid
    Bound(BoundArgs),
    /// Minimize parametric bounds over p and compare families
    Optimize(OptimizeArgs),
    /// Run a Monte-Carlo certification campaign against the bounds
    Certify(CertifyArgs),
    /// Run the model-identity and consistency checks
    Verify(VerifyArgs),
    /// Summarize a saved certification report
    Report(ReportArgs),
}

#[derive(Args, Clone)]
pub struct CommonOut {
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<String>,

    /// Output format
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    pub format: String,
}

#[derive(Args)]
pub struct BoundArgs {
    /// Hurst indices as H1,H2
    #[arg(long = "h", value_name = "H1,H2", default_value = "0.5,0.5")]
    pub hurst: String,

    /// Domain: unit | rect:T1,T2 | square12 | quadrant
    #[arg(long, default_value = "unit")]
    pub domain: String,

    /// Bound family ids (repeatable); all applicable families when omitted
    #[arg(long, value_delimiter = ',')]
    pub family: Vec<String>,

    /// Threshold grid (ascending)
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,

    /// Fixed p for parametric families; optimized when omitted
    #[arg(long)]
    pub p: Option<f64>,

    /// Growth schedule for the annulus families: exp | geometric:R
    #[arg(long, default_value = "exp")]
    pub schedule: String,

    /// Normalizer for the annulus families
    #[arg(long, default_value = "loglog", value_parser = ["loglog"])]
    pub normalizer: String,

    /// Weight function for the dyadic quadrant families
    #[arg(long, value_parser = ["phi1", "phi2"])]
    pub phi: Option<String>,

    /// Series truncation tolerance
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,

    /// Power-modulus constant C for the eq9 family
    #[arg(long, default_value_t = 2.0)]
    pub sigma_c: f64,

    /// Power-modulus exponent alpha for the eq9 family (min Hurst index
    /// when omitted)
    #[arg(long)]
    pub sigma_alpha: Option<f64>,

    /// Sup of point standard deviations for the eq9 family
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,

    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Args)]
pub struct OptimizeArgs {
    /// Hurst indices as H1,H2
    #[arg(long = "h", value_name = "H1,H2", default_value = "0.5,0.5")]
    pub hurst: String,

    /// Domain: unit | rect:T1,T2 | square12
    #[arg(long, default_value = "unit")]
    pub domain: String,

    /// Parametric family to optimize; compares all families when omitted
    #[arg(long)]
    pub family: Option<String>,

    /// Threshold grid (ascending)
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,

    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Args, Default)]
pub struct CertifyArgs {
    /// Campaign file (TOML); command-line flags override its entries
    #[arg(long)]
    pub config: Option<String>,

    /// Hurst index pairs H1,H2 (repeatable)
    #[arg(long = "h", value_name = "H1,H2")]
    pub hurst: Vec<String>,

    /// Domain: unit | rect:T1,T2 | square12 | quadrant
    #[arg(long)]
    pub domain: Option<String>,

    /// Threshold grid (ascending); a per-family default when omitted
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,

    /// Monte-Carlo paths
    #[arg(long)]
    pub paths: Option<u64>,

    /// RNG seed (SHEET_EXTREMES_SEED, then 0, when omitted)
    #[arg(long)]
    pub seed: Option<u64>,

    /// Grid resolution as N1xN2
    #[arg(long)]
    pub grid: Option<String>,

    /// Worker threads (output is independent of this)
    #[arg(long)]
    pub workers: Option<usize>,

    /// Growth schedule for the annulus protocol: exp | geometric:R
    #[arg(long)]
    pub schedule: Option<String>,

    /// Normalizer for the annulus protocol
    #[arg(long)]
    pub normalizer: Option<String>,

    /// Weight function; switches the quadrant protocol to [1,inf)^2
    #[arg(long)]
    pub phi: Option<String>,

    /// Series truncation tolerance
    #[arg(long)]
    pub tol: Option<f64>,

    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<String>,

    /// Output format
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Hurst indices as H1,H2
    #[arg(long = "h", value_name = "H1,H2", default_value = "0.3,0.7")]
    pub hurst: String,

    /// Grid resolution as N1xN2
    #[arg(long, default_value = "16x16")]
    pub grid: String,

    /// Monte-Carlo paths for the empirical moment checks
    #[arg(long, default_value_t = 20_000)]
    pub paths: u64,

    /// RNG seed (SHEET_EXTREMES_SEED, then 0, when omitted)
    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads
    #[arg(long, default_value_t = 1)]
    pub workers: usize,

    /// Use the alternate vertical-increment exponent; the identity
    /// check is expected to fail for anisotropic indices
    #[arg(long = "use-paper-eq7-exponent")]
    pub use_alt_vertical_exponent: bool,

    /// Also run the covering-bound vs packing-oracle sweep
    #[arg(long)]
    pub covering_sweep: bool,

    #[command(flatten)]
    pub out: CommonOut,
}

#[derive(Args)]
pub struct ReportArgs {
    /// A certify output file (CSV or JSON)
    #[arg(long, required = true)]
    pub input: String,
}
