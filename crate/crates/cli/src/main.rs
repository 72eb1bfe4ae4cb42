use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sqval::drivers::{
    self, parse_fields, parse_tower, CmdStatus, DriverError, RunContext, TheoremId, VerifyParams,
};

/// Exact counting of square-value patterns of polynomial systems over
/// finite fields, with theorem-verification sweeps.
#[derive(Parser)]
#[command(name = "sqval", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// System file (field, ambient, vars, poly and option lines).
    #[arg(long)]
    system: PathBuf,
    /// Write the CSV report here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Seed for every randomized search.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker-partition count; results are identical for any value.
    #[arg(long)]
    workers: Option<usize>,
    /// Hard cap on enumerated points per sweep.
    #[arg(long)]
    ceiling: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count one pattern of a system over F_{q^e}.
    Count {
        #[command(flatten)]
        common: Common,
        /// Pattern string over '+'/'-', one sign per polynomial.
        #[arg(long)]
        pattern: String,
        /// Tower level: count over F_{q^ext}.
        #[arg(long, default_value_t = 1)]
        ext: u32,
    },
    /// Verify a main-term/exponent claim across a tower.
    Verify {
        /// One of thm1, thm2, thm3, cor1, cor2.
        theorem: String,
        #[command(flatten)]
        common: Common,
        /// Tower levels, e.g. 1..6 (default: everything under the ceiling).
        #[arg(long)]
        tower: Option<String>,
        /// Explicit field sizes for corollary sweeps, e.g. 5,9,13,25.
        #[arg(long)]
        fields: Option<String>,
        /// Restrict to one pattern (default: all 2^m).
        #[arg(long)]
        pattern: Option<String>,
        /// Explicit-bound constant C_user (also the cor1 pass limit).
        #[arg(long)]
        constant: Option<f64>,
        /// Witness-search extension bound.
        #[arg(long, default_value_t = 2)]
        max_ext: u32,
        /// Witness-search sample budget per index and level.
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        /// Tower depth for singularity censuses.
        #[arg(long, default_value_t = 2)]
        sigma_level: u32,
    },
    /// Census the degeneracy loci and report sigma, l, gamma.
    Sigma {
        #[command(flatten)]
        common: Common,
        /// Deepest census level.
        #[arg(long, default_value_t = 2)]
        max_level: u32,
    },
    /// Classify every plane point against a smooth conic.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Tower level to classify over.
        #[arg(long, default_value_t = 1)]
        ext: u32,
        /// Classification constant (field element); required above n = 2.
        #[arg(long)]
        constant: Option<String>,
    },
    /// Search for independence-condition witness pairs.
    Witness {
        #[command(flatten)]
        common: Common,
        /// Highest extension level to search.
        #[arg(long, default_value_t = 2)]
        max_ext: u32,
        /// Sample budget per index and level.
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
    /// Count every pattern across a tower and emit the full report.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Tower levels, e.g. 1..4.
        #[arg(long)]
        tower: Option<String>,
    },
}

fn context(common: &Common, constant: Option<f64>) -> Result<RunContext, DriverError> {
    let file = drivers::load_system_file(&common.system)?;
    Ok(RunContext::merge(
        &file,
        common.workers,
        common.ceiling,
        common.seed,
        constant,
        common.csv.clone(),
    ))
}

fn dispatch(cli: Cli) -> Result<CmdStatus, DriverError> {
    match cli.cmd {
        Cmd::Count {
            common,
            pattern,
            ext,
        } => {
            let ctx = context(&common, None)?;
            drivers::run_count(&common.system, &pattern, ext, &ctx)
        }
        Cmd::Verify {
            theorem,
            common,
            tower,
            fields,
            pattern,
            constant,
            max_ext,
            budget,
            sigma_level,
        } => {
            let theorem = TheoremId::parse(&theorem)?;
            let ctx = context(&common, constant)?;
            let params = VerifyParams {
                tower: tower.as_deref().map(parse_tower).transpose()?,
                field_sizes: fields.as_deref().map(parse_fields).transpose()?,
                patterns: pattern
                    .as_deref()
                    .map(|p| {
                        sqval_core::count::PatternSpec::parse(p)
                            .map(|p| vec![p])
                            .map_err(DriverError::from)
                    })
                    .transpose()?,
                max_ext,
                budget,
                sigma_level,
            };
            drivers::run_verify(theorem, &common.system, &params, &ctx)
        }
        Cmd::Sigma { common, max_level } => {
            let ctx = context(&common, None)?;
            drivers::run_sigma(&common.system, max_level, &ctx)
        }
        Cmd::Classify {
            common,
            ext,
            constant,
        } => {
            let ctx = context(&common, None)?;
            drivers::run_classify(&common.system, ext, constant.as_deref(), &ctx)
        }
        Cmd::Witness {
            common,
            max_ext,
            budget,
        } => {
            let ctx = context(&common, None)?;
            drivers::run_witness(&common.system, max_ext, budget, &ctx)
        }
        Cmd::Sweep { common, tower } => {
            let ctx = context(&common, None)?;
            let tower = tower.as_deref().map(parse_tower).transpose()?;
            drivers::run_sweep(&common.system, tower, &ctx)
        }
    }
}

fn main() -> ExitCode {
    // die quietly when a downstream pipe closes (e.g. `sqval ... | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(CmdStatus::Pass) => ExitCode::SUCCESS,
        Ok(CmdStatus::VerdictFail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
