//! Shared parsing, error handling and output plumbing.

use std::fmt;
use std::fs::File;
use std::io::Write;

use serde::Serialize;
use sheet_extremes::{GrowthSchedule, HurstPair, Normalizer, Rect, WeightFn};

pub const SCHEMA_VERSION: &str = "1";
pub const SEED_ENV: &str = "SHEET_EXTREMES_SEED";

/// Usage errors exit 2, computation errors exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Computation(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Computation(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Computation(_) => 1,
        }
    }
}

impl From<sheet_extremes::Error> for CliError {
    fn from(e: sheet_extremes::Error) -> Self {
        match e {
            sheet_extremes::Error::InvalidParam { .. }
            | sheet_extremes::Error::InvalidHurst(..)
            | sheet_extremes::Error::InvalidRect(..)
            | sheet_extremes::Error::InvalidPoint(..)
            | sheet_extremes::Error::UnsupportedDomain(..)
            | sheet_extremes::Error::FamilyDomainMismatch { .. }
            | sheet_extremes::Error::GridTooLarge(..) => CliError::Usage(e.to_string()),
            other => CliError::Computation(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_hurst(s: &str) -> CliResult<HurstPair> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(usage(format!("--h expects H1,H2, got '{s}'")));
    }
    let h1: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad H1 in '{s}'")))?;
    let h2: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad H2 in '{s}'")))?;
    Ok(HurstPair::new(h1, h2)?)
}

/// The domain shapes the commands route on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Unit,
    Rect { t1: f64, t2: f64 },
    Square12,
    Quadrant,
}

impl Domain {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "unit" => Ok(Domain::Unit),
            "square12" => Ok(Domain::Square12),
            "quadrant" => Ok(Domain::Quadrant),
            other => {
                if let Some(dims) = other.strip_prefix("rect:") {
                    let parts: Vec<&str> = dims.split(',').collect();
                    if parts.len() != 2 {
                        return Err(usage(format!(
                            "--domain rect expects rect:T1,T2, got '{s}'"
                        )));
                    }
                    let t1: f64 = parts[0]
                        .trim()
                        .parse()
                        .map_err(|_| usage(format!("bad T1 in '{s}'")))?;
                    let t2: f64 = parts[1]
                        .trim()
                        .parse()
                        .map_err(|_| usage(format!("bad T2 in '{s}'")))?;
                    Ok(Domain::Rect { t1, t2 })
                } else {
                    Err(usage(format!(
                        "--domain must be unit, rect:T1,T2, square12 or quadrant, got '{s}'"
                    )))
                }
            }
        }
    }

    pub fn rect(&self) -> CliResult<Rect> {
        match self {
            Domain::Unit => Ok(Rect::unit()),
            Domain::Rect { t1, t2 } => Ok(Rect::new(*t1, *t2)?),
            Domain::Square12 => Ok(Rect::square12()),
            Domain::Quadrant => Err(usage(
                "the quadrant domain has no finite rectangle".to_string(),
            )),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Domain::Unit => "unit".to_string(),
            Domain::Rect { t1, t2 } => format!("rect:{t1},{t2}"),
            Domain::Square12 => "square12".to_string(),
            Domain::Quadrant => "quadrant".to_string(),
        }
    }
}

pub fn parse_schedule(s: &str) -> CliResult<GrowthSchedule> {
    match s {
        "exp" => Ok(GrowthSchedule::Exp),
        other => {
            if let Some(r) = other.strip_prefix("geometric:") {
                let ratio: f64 = r
                    .trim()
                    .parse()
                    .map_err(|_| usage(format!("bad ratio in '{s}'")))?;
                Ok(GrowthSchedule::geometric(ratio)?)
            } else {
                Err(usage(format!(
                    "--schedule must be exp or geometric:R, got '{s}'"
                )))
            }
        }
    }
}

pub fn parse_normalizer(s: &str) -> CliResult<Normalizer> {
    match s {
        "loglog" => Ok(Normalizer::LogLog),
        other => Err(usage(format!("--normalizer must be loglog, got '{other}'"))),
    }
}

pub fn parse_phi(s: &str) -> CliResult<WeightFn> {
    match s {
        "phi1" => Ok(WeightFn::phi1()),
        "phi2" => Ok(WeightFn::phi2()),
        other => Err(usage(format!("--phi must be phi1 or phi2, got '{other}'"))),
    }
}

pub fn parse_grid_spec(s: &str) -> CliResult<(usize, usize)> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 2 {
        return Err(usage(format!("--grid expects N1xN2, got '{s}'")));
    }
    let n1: usize = parts[0]
        .parse()
        .map_err(|_| usage(format!("bad N1 in '{s}'")))?;
    let n2: usize = parts[1]
        .parse()
        .map_err(|_| usage(format!("bad N2 in '{s}'")))?;
    Ok((n1, n2))
}

pub fn check_eps_ascending(eps: &[f64]) -> CliResult<()> {
    if eps.is_empty() {
        return Err(usage("--eps must be non-empty"));
    }
    if eps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("--eps must be strictly ascending"));
    }
    Ok(())
}

pub fn seed_default(cli: Option<u64>) -> u64 {
    cli.or_else(|| std::env::var(SEED_ENV).ok().and_then(|v| v.parse().ok()))
        .unwrap_or(0)
}

/// Serialize rows as CSV (RFC-4180 via the csv crate) or JSON with a
/// fixed key order, to stdout or a file.
pub fn emit<T: Serialize>(
    command: &str,
    rows: &[T],
    format: &str,
    out: Option<&str>,
) -> CliResult<()> {
    let bytes = match format {
        "csv" => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row)
                    .map_err(|e| CliError::Computation(e.to_string()))?;
            }
            w.into_inner()
                .map_err(|e| CliError::Computation(e.to_string()))?
        }
        "json" => {
            #[derive(Serialize)]
            struct Doc<'a, T> {
                version: &'a str,
                command: &'a str,
                rows: &'a [T],
            }
            let doc = Doc {
                version: SCHEMA_VERSION,
                command,
                rows,
            };
            let mut v = serde_json::to_vec_pretty(&doc)
                .map_err(|e| CliError::Computation(e.to_string()))?;
            v.push(b'\n');
            v
        }
        other => {
            return Err(usage(format!(
                "--format must be csv or json, got '{other}'"
            )))
        }
    };
    match out {
        None => {
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::Computation(e.to_string()))?;
        }
        Some(path) => {
            let mut f = File::create(path)
                .map_err(|e| CliError::Computation(format!("cannot create {path}: {e}")))?;
            f.write_all(&bytes)
                .map_err(|e| CliError::Computation(e.to_string()))?;
            eprintln!("wrote {path}");
        }
    }
    Ok(())
}
