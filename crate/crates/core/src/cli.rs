//! Command-line front end for the `twconv` binary.
//!
//! Exit codes: 0 success, 1 `verify` residuals above `--tol`, 2 not
//! invertible / not a frame, 3 truncation did not converge, 4 malformed input
//! or invalid parameters (including command-line usage errors).

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::conv_inverse::InversionConfig;
use crate::error::{Error, Result};
use crate::finite::{finite_twisted_convolve, invert_block_circulant, FiniteGrid, DEFAULT_SINGULAR_TOL};
use crate::gabor::{dual_window, GaborConfig};
use crate::io::{from_json, to_canonical_json, FiniteGridFile};
use crate::params::TwistParams;
use crate::sequence::Sequence;
use crate::twisted_inverse::{invert_twisted, verify_inverse, InversionReport};

#[derive(Debug, Parser)]
#[command(name = "twconv", version, about = "Twisted convolution inversion and Gabor dual windows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invert a sequence under twisted convolution.
    Invert {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        twist: TwistArgs,
        #[command(flatten)]
        numerics: NumericArgs,
    },
    /// Invert a p×p grid under the finite twisted convolution.
    FiniteInvert {
        #[command(flatten)]
        io: IoArgs,
        /// Overrides the `q` stored in the input file.
        #[arg(long)]
        q: Option<i64>,
        /// Bound on the residual of both products against the finite delta.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Canonical dual window of a Gabor system on Z_L.
    DualWindow {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        numerics: NumericArgs,
    },
    /// Residuals of a candidate inverse.
    Verify {
        #[command(flatten)]
        io: IoArgs,
        /// Candidate inverse: a sequence or an `invert` report ("-" for stdin).
        #[arg(long)]
        inverse: PathBuf,
        #[command(flatten)]
        twist: TwistArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// Input JSON file ("-" for stdin).
    #[arg(long)]
    pub input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TwistArgs {
    #[arg(long)]
    pub p: i64,
    #[arg(long)]
    pub q: i64,
}

#[derive(Debug, Args)]
pub struct NumericArgs {
    /// Residual bound for the certified inverse.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Starting FFT grid size per axis (power of two).
    #[arg(long, default_value_t = 256)]
    pub fft_size: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub symbol_floor: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tail_tol: f64,
    #[arg(long, default_value_t = 4)]
    pub max_refine: usize,
}

impl NumericArgs {
    pub fn config(&self) -> Result<InversionConfig> {
        let cfg = InversionConfig {
            grid_size: self.fft_size,
            symbol_floor: self.symbol_floor,
            tail_tol: self.tail_tol,
            residual_tol: self.tol,
            max_refine: self.max_refine,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Output of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub residual_right: f64,
    pub residual_left: f64,
    pub tol: f64,
    pub passed: bool,
}

/// What a command produced: the JSON text and the exit status to report.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub json: String,
    pub exit_code: i32,
}

fn read_source(path: &Path) -> Result<String> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::Malformed(format!("stdin: {e}")))?;
    } else {
        text = fs::read_to_string(path).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")))
    }
}

/// Accepts either a bare sequence or an `invert` report.
fn parse_candidate(text: &str) -> Result<Sequence> {
    if let Ok(report) = serde_json::from_str::<InversionReport>(text) {
        return Ok(report.inverse);
    }
    from_json(text)
}

/// Runs one command; errors carry their exit status via [`Error::exit_code`].
pub fn execute(command: &Command) -> Result<Outcome> {
    let json = match command {
        Command::Invert { io, twist, numerics } => {
            let tp = TwistParams::new(twist.p, twist.q, 1)?;
            let cfg = numerics.config()?;
            let a: Sequence = from_json(&read_source(&io.input)?)?;
            let tp = if a.dim() == tp.dim() { tp } else { TwistParams::new(twist.p, twist.q, a.dim())? };
            to_canonical_json(&invert_twisted(&a, &tp, &cfg)?)?
        }
        Command::FiniteInvert { io, q, tol } => {
            check_tol(*tol)?;
            let file: FiniteGridFile = from_json(&read_source(&io.input)?)?;
            let q = q.unwrap_or(file.q);
            TwistParams::new(file.p as i64, q, 1)?;
            let g = file.to_grid()?;
            let h = invert_block_circulant(&g, q, DEFAULT_SINGULAR_TOL)?;
            let delta = FiniteGrid::delta(g.p());
            let residual = finite_twisted_convolve(&g, &h, q)?
                .max_abs_diff(&delta)
                .max(finite_twisted_convolve(&h, &g, q)?.max_abs_diff(&delta));
            if residual > *tol {
                return Err(Error::NotInvertible(format!("inverse residual {residual:e} exceeds {tol:e}")));
            }
            to_canonical_json(&FiniteGridFile::from_grid(&h, q))?
        }
        Command::DualWindow { io, numerics } => {
            let inv_cfg = numerics.config()?;
            let cfg: GaborConfig = from_json(&read_source(&io.input)?)?;
            to_canonical_json(&dual_window(&cfg, &inv_cfg)?)?
        }
        Command::Verify { io, inverse, twist, tol } => {
            check_tol(*tol)?;
            if io.input == Path::new("-") && inverse == Path::new("-") {
                return Err(Error::Malformed("only one of --input and --inverse may read stdin".into()));
            }
            let a: Sequence = from_json(&read_source(&io.input)?)?;
            let b = parse_candidate(&read_source(inverse)?)?;
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
            }
            let tp = TwistParams::new(twist.p, twist.q, a.dim())?;
            let (residual_right, residual_left) = verify_inverse(&a, &b, &tp)?;
            let passed = residual_right <= *tol && residual_left <= *tol;
            let report = VerifyReport { residual_right, residual_left, tol: *tol, passed };
            return Ok(Outcome { json: to_canonical_json(&report)?, exit_code: if passed { 0 } else { 1 } });
        }
    };
    Ok(Outcome { json, exit_code: 0 })
}

/// Where the command's JSON goes.
pub fn output_path(command: &Command) -> Option<&Path> {
    match command {
        Command::Invert { io, .. }
        | Command::FiniteInvert { io, .. }
        | Command::DualWindow { io, .. }
        | Command::Verify { io, .. } => io.output.as_deref(),
    }
}
