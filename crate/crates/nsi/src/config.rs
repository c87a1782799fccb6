//! Run configuration: a flat `key = value` file whose keys mirror the
//! command-line flags. Flags given on the command line win over the file.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use nsi_core::BaseConfig;

use crate::error::CliError;

/// How the chaos game or the deterministic algorithm draws the attractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Chaos,
    Deterministic,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Chaos => "chaos",
            Mode::Deterministic => "deterministic",
        }
    }
}

/// Every tunable of the pipeline. `None` means "derive a default from the
/// other settings" (see the accessor methods).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub program: Option<PathBuf>,
    /// Level-mapping length.
    pub n: Option<usize>,
    /// Grounding depth.
    pub depth: Option<usize>,
    /// Output truncation.
    pub m: Option<usize>,
    /// Sample level.
    pub level: Option<usize>,
    pub base: u32,
    pub alphabet: (u32, u32),
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub canonical: bool,
    pub steps: Option<usize>,
    pub from: String,
    pub pairs: usize,
    pub scaling: f64,
    pub augment: bool,
    pub mode: Mode,
    pub iters: usize,
    pub x: Option<f64>,
    pub eval_depth: usize,
    pub levels: Vec<usize>,
    pub reference: usize,
    pub slack: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    pub train_level: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            program: None,
            n: None,
            depth: None,
            m: None,
            level: None,
            base: 3,
            alphabet: (0, 2),
            seed: 1,
            out: None,
            canonical: false,
            steps: None,
            from: String::new(),
            pairs: 10_000,
            scaling: 0.0,
            augment: true,
            mode: Mode::Chaos,
            iters: 10_000,
            x: None,
            eval_depth: 64,
            levels: vec![2, 4, 6],
            reference: 10,
            slack: 0,
            hidden: 4,
            epochs: 20_000,
            lr: 0.5,
            train_level: 8,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{value}`")))
}

fn parse_opt<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, CliError> {
    if value == "auto" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

pub fn parse_alphabet(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let digit = |d: &str| d.trim().parse::<u32>().map_err(|_| format!("bad digit `{d}`"));
    Ok((digit(lo)?, digit(hi)?))
}

pub fn parse_levels(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad level `{t}`")))
        .collect()
}

fn opt_str<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), T::to_string)
}

impl RunConfig {
    pub fn base_config(&self) -> nsi_core::Result<BaseConfig> {
        BaseConfig::new(self.base, self.alphabet.0, self.alphabet.1)
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", no + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "program" => self.program = Some(PathBuf::from(value)),
            "n" => self.n = parse_opt(key, value)?,
            "depth" => self.depth = parse_opt(key, value)?,
            "m" => self.m = parse_opt(key, value)?,
            "level" => self.level = parse_opt(key, value)?,
            "base" => self.base = parse(key, value)?,
            "alphabet" => self.alphabet = parse_alphabet(value).map_err(CliError::Usage)?,
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "canonical" => self.canonical = parse(key, value)?,
            "steps" => self.steps = parse_opt(key, value)?,
            "from" => self.from = value.to_string(),
            "pairs" => self.pairs = parse(key, value)?,
            "scaling" => self.scaling = parse(key, value)?,
            "augment" => self.augment = parse(key, value)?,
            "mode" => {
                self.mode = <Mode as clap::ValueEnum>::from_str(value, true)
                    .map_err(|_| CliError::Usage(format!("config key `mode`: unknown mode `{value}`")))?
            }
            "iters" => self.iters = parse(key, value)?,
            "x" => self.x = parse_opt(key, value)?,
            "eval_depth" => self.eval_depth = parse(key, value)?,
            "levels" => self.levels = parse_levels(value).map_err(CliError::Usage)?,
            "reference" => self.reference = parse(key, value)?,
            "slack" => self.slack = parse(key, value)?,
            "hidden" => self.hidden = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "train_level" => self.train_level = parse(key, value)?,
            _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// The file form; [`RunConfig::apply_file`] on it restores `self`.
    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        if let Some(p) = path(&self.program) {
            let _ = writeln!(s, "program = {p}");
        }
        let _ = writeln!(s, "n = {}", opt_str(&self.n));
        let _ = writeln!(s, "depth = {}", opt_str(&self.depth));
        let _ = writeln!(s, "m = {}", opt_str(&self.m));
        let _ = writeln!(s, "level = {}", opt_str(&self.level));
        let _ = writeln!(s, "base = {}", self.base);
        let _ = writeln!(s, "alphabet = {},{}", self.alphabet.0, self.alphabet.1);
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(p) = path(&self.out) {
            let _ = writeln!(s, "out = {p}");
        }
        let _ = writeln!(s, "canonical = {}", self.canonical);
        let _ = writeln!(s, "steps = {}", opt_str(&self.steps));
        let _ = writeln!(s, "from = {}", self.from);
        let _ = writeln!(s, "pairs = {}", self.pairs);
        let _ = writeln!(s, "scaling = {:?}", self.scaling);
        let _ = writeln!(s, "augment = {}", self.augment);
        let _ = writeln!(s, "mode = {}", self.mode.as_str());
        let _ = writeln!(s, "iters = {}", self.iters);
        let _ = writeln!(s, "x = {}", self.x.map_or_else(|| "auto".into(), |x| format!("{x:?}")));
        let _ = writeln!(s, "eval_depth = {}", self.eval_depth);
        let levels: Vec<String> = self.levels.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "levels = {}", levels.join(","));
        let _ = writeln!(s, "reference = {}", self.reference);
        let _ = writeln!(s, "slack = {}", self.slack);
        let _ = writeln!(s, "hidden = {}", self.hidden);
        let _ = writeln!(s, "epochs = {}", self.epochs);
        let _ = writeln!(s, "lr = {:?}", self.lr);
        let _ = writeln!(s, "train_level = {}", self.train_level);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_form_round_trips() {
        let mut c = RunConfig {
            program: Some("programs/even.lp".into()),
            depth: Some(7),
            x: Some(0.1),
            scaling: -0.3,
            mode: Mode::Deterministic,
            levels: vec![1, 3],
            from: "even(0), even(s(0))".into(),
            ..RunConfig::default()
        };
        c.lr = 0.123456789;
        let mut back = RunConfig::default();
        back.apply_file(&c.to_file_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn comments_and_unknown_keys() {
        let mut c = RunConfig::default();
        c.apply_file("# experiment\n\nm = 9\n").unwrap();
        assert_eq!(c.m, Some(9));
        assert!(c.apply_file("bogus = 1").is_err());
        assert!(c.apply_file("m 9").is_err());
    }
}
