//! File formats: JSON documents via serde and CSV tables via `csv`.
//! CSV output always uses `,`, `.` decimals and LF line endings.

use serde::{Deserialize, Serialize};

use nsi_core::fractal::{AffineMap, ConvergenceRow, Frame, Ifs, PointCloud, SampleSet};
use nsi_core::network::{FeedforwardNet, HiddenUnit, ThresholdNet, TrainingReport};
use nsi_core::{Interpretation, LevelMapping, TpTrace};

use crate::error::CliError;

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>, stage: &'static str) -> Result<String, CliError> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Format { stage, message: e.to_string() })?;
    String::from_utf8(bytes).map_err(|e| CliError::Format { stage, message: e.to_string() })
}

fn csv_err(stage: &'static str) -> impl Fn(csv::Error) -> CliError {
    move |e| CliError::Format { stage, message: e.to_string() }
}

/// `level,atom` rows.
pub fn levels_csv(levels: &LevelMapping) -> Result<String, CliError> {
    let mut w = csv_writer();
    w.write_record(["level", "atom"]).map_err(csv_err("levels"))?;
    for (i, a) in levels.atoms().iter().enumerate() {
        w.write_record([(i + 1).to_string(), a.to_string()]).map_err(csv_err("levels"))?;
    }
    finish(w, "levels")
}

/// `x,y` rows.
pub fn points_csv(cloud: &PointCloud) -> Result<String, CliError> {
    let mut w = csv_writer();
    w.write_record(["x", "y"]).map_err(csv_err("attractor"))?;
    for p in &cloud.points {
        w.write_record([format!("{:?}", p[0]), format!("{:?}", p[1])]).map_err(csv_err("attractor"))?;
    }
    finish(w, "attractor")
}

/// `level,epsilon,runtime_ms` rows.
pub fn convergence_csv(rows: &[(ConvergenceRow, f64)]) -> Result<String, CliError> {
    let mut w = csv_writer();
    w.write_record(["level", "epsilon", "runtime_ms"]).map_err(csv_err("converge"))?;
    for (r, ms) in rows {
        w.write_record([r.level.to_string(), format!("{:?}", r.epsilon), format!("{ms:?}")])
            .map_err(csv_err("converge"))?;
    }
    finish(w, "converge")
}

/// One row per sample: prefix digits, exact `x`, and `y` as exact interval
/// plus float midpoint and radius.
pub fn samples_csv(samples: &SampleSet) -> Result<String, CliError> {
    let mut w = csv_writer();
    w.write_record(["digits", "x", "x_exact", "y", "y_radius", "y_lo", "y_hi"])
        .map_err(csv_err("sample"))?;
    for (x, y) in &samples.pairs {
        let digits: String = x.digit_values().map(|d| char::from_digit(d, 36).unwrap_or('?')).collect();
        let xe = x.exact_value().expect("sample points have known tails");
        let yr = y.to_real();
        let (lo, hi) = y.interval();
        w.write_record([
            digits,
            format!("{:?}", x.to_real().midpoint),
            xe.to_string(),
            format!("{:?}", yr.midpoint),
            format!("{:?}", yr.radius),
            lo.to_string(),
            hi.to_string(),
        ])
        .map_err(csv_err("sample"))?;
    }
    finish(w, "sample")
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    pub true_atoms: Vec<String>,
    pub changed: Vec<String>,
}

/// A list of `{step, true_atoms, changed}` records.
pub fn trace_json(trace: &TpTrace, levels: &LevelMapping) -> Vec<TraceStep> {
    let name = |l: usize| levels.atom(l).map_or_else(|| format!("#{l}"), ToString::to_string);
    trace
        .states
        .iter()
        .zip(&trace.changed)
        .enumerate()
        .map(|(step, (s, ch)): (usize, (&Interpretation, &Vec<usize>))| TraceStep {
            step,
            true_atoms: s.true_atoms_through(levels, trace.m).iter().map(|a| a.to_string()).collect(),
            changed: ch.iter().map(|&l| name(l)).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct FrameJson {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct MapJson {
    pub a: f64,
    pub e: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IfsJson {
    pub base_frame: FrameJson,
    pub maps: Vec<MapJson>,
    pub nodes: Vec<[f64; 2]>,
    pub d_max: f64,
}

impl From<&Ifs> for IfsJson {
    fn from(ifs: &Ifs) -> Self {
        let Frame { x_min, x_max, y_min, y_max } = ifs.frame;
        IfsJson {
            base_frame: FrameJson { x_min, x_max, y_min, y_max },
            maps: ifs.maps.iter().map(|w| MapJson { a: w.a, e: w.e, c: w.c, d: w.d, f: w.f }).collect(),
            nodes: ifs.nodes.clone(),
            d_max: ifs.d_max,
        }
    }
}

impl IfsJson {
    /// Rebuilds the IFS; the frame and `d_max` are recomputed from the maps.
    pub fn to_ifs(&self) -> nsi_core::Result<Ifs> {
        let maps = self.maps.iter().map(|m| AffineMap { a: m.a, e: m.e, c: m.c, d: m.d, f: m.f }).collect();
        Ifs::new(maps, self.nodes.clone())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Arch {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Weights {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Biases {
    pub hidden: Vec<f64>,
    pub output: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainingJson {
    pub mse: f64,
    pub sup_error: f64,
    pub epochs: usize,
    pub seed: u64,
    pub initial_mse: f64,
    pub learning_rate: f64,
    pub hidden: usize,
}

impl From<&TrainingReport> for TrainingJson {
    fn from(r: &TrainingReport) -> Self {
        TrainingJson {
            mse: r.mse,
            sup_error: r.sup_error,
            epochs: r.epochs,
            seed: r.seed,
            initial_mse: r.initial_mse,
            learning_rate: r.learning_rate,
            hidden: r.hidden,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NetworkJson {
    pub arch: Arch,
    pub activation: String,
    pub weights: Weights,
    pub biases: Biases,
    pub meta: Option<TrainingJson>,
}

impl From<&FeedforwardNet> for NetworkJson {
    fn from(n: &FeedforwardNet) -> Self {
        NetworkJson {
            arch: Arch { inputs: 1, hidden: n.hidden.len(), outputs: 1 },
            activation: "logistic".into(),
            weights: Weights {
                input: n.hidden.iter().map(|u| u.input_weight).collect(),
                output: n.hidden.iter().map(|u| u.output_weight).collect(),
            },
            biases: Biases { hidden: n.hidden.iter().map(|u| u.bias).collect(), output: n.output_bias },
            meta: n.report.as_ref().map(TrainingJson::from),
        }
    }
}

impl NetworkJson {
    pub fn to_net(&self) -> Result<FeedforwardNet, String> {
        let h = self.arch.hidden;
        if self.arch.inputs != 1 || self.arch.outputs != 1 || self.activation != "logistic" {
            return Err("only 1-input, 1-output logistic networks are supported".into());
        }
        if self.weights.input.len() != h || self.weights.output.len() != h || self.biases.hidden.len() != h {
            return Err(format!("weight vectors must have {h} entries"));
        }
        let hidden = (0..h)
            .map(|k| HiddenUnit {
                input_weight: self.weights.input[k],
                bias: self.biases.hidden[k],
                output_weight: self.weights.output[k],
            })
            .collect();
        Ok(FeedforwardNet { hidden, output_bias: self.biases.output, report: None })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoreStep {
    pub step: usize,
    pub true_atoms: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoreJson {
    pub atoms: Vec<String>,
    pub units: usize,
    pub trace: Vec<CoreStep>,
    pub fixpoint: bool,
    pub cycle: bool,
}

pub fn core_json(net: &ThresholdNet, states: &[Vec<bool>], fixpoint: bool, cycle: bool) -> CoreJson {
    CoreJson {
        atoms: net.atoms.clone(),
        units: net.unit_count(),
        trace: states
            .iter()
            .enumerate()
            .map(|(step, s)| CoreStep {
                step,
                true_atoms: net.true_atoms(s).into_iter().map(String::from).collect(),
            })
            .collect(),
        fixpoint,
        cycle,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nsi_core::{enumerate_base, parse_program, DEFAULT_GROUNDING_CAP};

    #[test]
    fn levels_csv_rows() {
        let p = parse_program("even(0). even(s(s(X))) :- even(X).").unwrap();
        let l = enumerate_base(&p, 3, DEFAULT_GROUNDING_CAP).unwrap();
        assert_eq!(
            levels_csv(&l).unwrap(),
            "level,atom\n1,even(0)\n2,even(s(0))\n3,even(s(s(0)))\n"
        );
    }

    #[test]
    fn network_json_round_trips() {
        let net = FeedforwardNet::random(3, 5);
        let json = serde_json::to_string(&NetworkJson::from(&net)).unwrap();
        let back: NetworkJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_net().unwrap(), net);
    }
}
