//! Command-line parsing into [`RunConfig`].

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::{run, Command, Format, RunConfig, SeedArg};

#[derive(Debug, Parser)]
#[command(name = "ballpoly", version, about = "Farthest-point experiments on intersections of balls")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Minimize the DC objective over {h <= 1} and report y*, the value and r_lower.
    Solve(Opts),
    /// Solve, then classify the instance and report the certified interval.
    Classify(Opts),
    /// Run the forward hull procedure and list sequence elements at a probe radius.
    Sequence(Opts),
    /// Estimate the farthest distance by growing a sphere (randomized).
    Estimate(Opts),
    /// Bracket the farthest distance by volume-ratio bisection (randomized).
    Volume(Opts),
    /// Encode a subset-sum instance {"s": [..], "t": .., "beta": ..} as a ball set.
    SspEncode(Opts),
    /// Exact farthest point in the plane; boundary sampling (randomized) otherwise.
    Oracle(Opts),
    /// Write layered SVG figures of a planar instance.
    Figures(Opts),
}

#[derive(Debug, Args)]
pub struct Opts {
    /// Input JSON: an instance, or a subset-sum instance for ssp-encode.
    pub input: PathBuf,
    /// Directory for report.json, timings.json and any traces or figures.
    #[arg(short, long, default_value = "out")]
    pub out: PathBuf,
    /// Output format: json (report only), csv (adds traces) or svg (adds figures; planar only).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Override lambda in (0, 1) (ssp-encode: lambda of the encoded instance, default 0.5).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// RNG seed, or `auto` to draw one from the clock. Required by randomized commands.
    #[arg(long)]
    pub seed: Option<SeedArg>,
    /// Sample count per probe (estimate 4096, volume 20000; oracle: boundary samples per ball, 10000).
    #[arg(long)]
    pub samples: Option<u64>,
    /// Worker streams for sampling; results depend on (seed, workers).
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Sequence index (estimate: negative, default -20; volume: default -p).
    #[arg(short = 'i', long = "index", allow_negative_numbers = true)]
    pub i: Option<i64>,
    /// Index offset between the volume elements (default 2).
    #[arg(short = 'p', long)]
    pub p: Option<u32>,
    /// Growth step of the estimate sphere (default max(0.01, 0.01 * r_init)).
    #[arg(long)]
    pub step: Option<f64>,
    /// Starting radius of the estimate sphere (default from the solver).
    #[arg(long)]
    pub r_init: Option<f64>,
    /// Bisection rounds of the estimate refinement (default 20).
    #[arg(long)]
    pub bisect_iters: Option<u32>,
    /// Volume bracket as LO,HI (default from the solver bounds).
    #[arg(long, value_parser = parse_bracket)]
    pub bracket: Option<(f64, f64)>,
    /// Wilson lower bound at which a volume ratio reads as 1 (default 0.995).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Volume bisection rounds (default 12).
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Probe radius R for sequence (default: the solver's r_lower).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Iteration cap of the forward hull procedure (default 50).
    #[arg(long)]
    pub max_iter: Option<u32>,
    /// Comma-separated sequence indices for sequence and figures (default -30,-10,-3,0,2).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub indices: Option<Vec<i64>>,
    /// Imprint depth of the subset-sum facet balls (default sqrt(n)/2).
    #[arg(long)]
    pub offset: Option<f64>,
    /// Half-width of the band |h(y*)| that counts as the boundary case (default 1e-6).
    #[arg(long)]
    pub boundary_tol: Option<f64>,
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got `{s}`"))?;
    let f = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((f(a)?, f(b)?))
}

impl Cli {
    pub fn into_config(self) -> RunConfig {
        let (command, o) = match self.command {
            Sub::Solve(o) => (Command::Solve, o),
            Sub::Classify(o) => (Command::Classify, o),
            Sub::Sequence(o) => (Command::Sequence, o),
            Sub::Estimate(o) => (Command::Estimate, o),
            Sub::Volume(o) => (Command::Volume, o),
            Sub::SspEncode(o) => (Command::SspEncode, o),
            Sub::Oracle(o) => (Command::Oracle, o),
            Sub::Figures(o) => (Command::Figures, o),
        };
        RunConfig {
            command,
            instance_path: o.input,
            output_dir: o.out,
            lambda: o.lambda,
            seed: o.seed,
            samples: o.samples,
            workers: o.workers,
            i: o.i,
            p: o.p,
            step: o.step,
            format: o.format,
            r_init: o.r_init,
            bracket: o.bracket,
            threshold: o.threshold,
            rounds: o.rounds,
            bisect_iters: o.bisect_iters,
            radius: o.radius,
            max_iter: o.max_iter,
            indices: o.indices,
            offset: o.offset,
            boundary_tol: o.boundary_tol,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli.into_config()),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
