use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_alphabet, parse_levels, Mode, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "nsi", version, about = "Embed logic programs into Cantor space and approximate T_P")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a program and print it in canonical form.
    Parse(Invocation),
    /// Print the ground instances up to the grounding depth.
    Ground(Invocation),
    /// Print the level mapping as `level,atom` CSV.
    Levels(Invocation),
    /// Iterate T_P and print the trace as JSON.
    Tp(Invocation),
    /// Estimate the Lipschitz constant of the embedded operator.
    Lipschitz(Invocation),
    /// Embed the interpretation given by `--from` into Cantor space.
    Embed(Invocation),
    /// Sample the embedded operator on every level-I prefix.
    Sample(Invocation),
    /// Build the fractal interpolation IFS through the samples.
    Ifs(Invocation),
    /// Approximate the attractor of an IFS file as `x,y` CSV.
    Attractor(Invocation),
    /// Evaluate the interpolation function of an IFS file at `--x`.
    EvalFif(Invocation),
    /// Uniform error of the interpolants at each of `--levels`.
    Converge(Invocation),
    /// Train a feedforward approximator on level-I samples.
    Train(Invocation),
    /// Run the threshold network of a propositional program.
    Core(Invocation),
    /// Run the whole pipeline and write every artifact plus report.json.
    Report(Invocation),
}

impl Command {
    pub fn invocation(&self) -> &Invocation {
        match self {
            Command::Parse(i)
            | Command::Ground(i)
            | Command::Levels(i)
            | Command::Tp(i)
            | Command::Lipschitz(i)
            | Command::Embed(i)
            | Command::Sample(i)
            | Command::Ifs(i)
            | Command::Attractor(i)
            | Command::EvalFif(i)
            | Command::Converge(i)
            | Command::Train(i)
            | Command::Core(i)
            | Command::Report(i) => i,
        }
    }
}

#[derive(Debug, Args)]
pub struct Invocation {
    /// Program file (`.lp`), or an IFS JSON file for `attractor` and `eval-fif`.
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Args, Default)]
pub struct Opts {
    /// Flat `key = value` file; flags given here override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Level-mapping length [default: what the command needs].
    #[arg(long)]
    pub n: Option<usize>,
    /// Grounding depth [default: the smallest sufficient depth].
    #[arg(long)]
    pub depth: Option<usize>,
    /// Output truncation (levels of T_P computed exactly).
    #[arg(long)]
    pub m: Option<usize>,
    /// Sample level.
    #[arg(long)]
    pub level: Option<usize>,
    /// Radix of the Cantor digits.
    #[arg(long)]
    pub base: Option<u32>,
    /// Digits for false and true, as `lo,hi`.
    #[arg(long, value_parser = parse_alphabet)]
    pub alphabet: Option<(u32, u32)>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for output files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Zero all wall-clock fields so that output is reproducible.
    #[arg(long)]
    pub canonical: bool,
    /// Iteration count for `tp` and `core`.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Initial interpretation as a comma-separated atom list.
    #[arg(long)]
    pub from: Option<String>,
    /// Random pairs for the Lipschitz estimate.
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Vertical scaling factor d of every interpolation map.
    #[arg(long, allow_hyphen_values = true)]
    pub scaling: Option<f64>,
    /// Do not append the node at x = 1.
    #[arg(long)]
    pub no_augment: bool,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Chaos-game points, or deterministic rounds.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Evaluation point for `eval-fif`.
    #[arg(long)]
    pub x: Option<f64>,
    /// Maximum inverse-map steps in `eval-fif`.
    #[arg(long)]
    pub eval_depth: Option<usize>,
    /// Sample levels for `converge`, comma separated.
    #[arg(long, value_parser = parse_levels)]
    pub levels: Option<Vec<usize>>,
    /// Reference level for `converge`.
    #[arg(long)]
    pub reference: Option<usize>,
    /// Extra output digits for the samples in `converge`.
    #[arg(long)]
    pub slack: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Sample level of the training set in `report`.
    #[arg(long)]
    pub train_level: Option<usize>,
}

impl Invocation {
    /// Defaults, then the config file, then the flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.opts.config {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                stage: "config",
                path: path.display().to_string(),
                source,
            })?;
            c.apply_file(&text)?;
        }
        let o = &self.opts;
        if self.input.is_some() {
            c.program = self.input.clone();
        }
        macro_rules! over {
            ($($field:ident),*) => { $( if let Some(v) = &o.$field { c.$field = v.clone(); } )* };
        }
        macro_rules! over_opt {
            ($($field:ident),*) => { $( if o.$field.is_some() { c.$field = o.$field.clone(); } )* };
        }
        over!(base, alphabet, seed, from, pairs, scaling, mode, iters, eval_depth, levels, reference, slack, hidden, epochs, lr, train_level);
        over_opt!(n, depth, m, level, out, steps, x);
        if o.canonical {
            c.canonical = true;
        }
        if o.no_augment {
            c.augment = false;
        }
        Ok(c)
    }
}
