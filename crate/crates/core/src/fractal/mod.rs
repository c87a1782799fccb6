//! Fractal interpolation of the embedded operator.
//!
//! Level-`i` samples of `ι(T_P)` are taken at the left endpoints of the `2^i`
//! level-`i` Cantor intervals. Those nodes (optionally closed off by the
//! point `x = 1`) determine an iterated function system of shear maps whose
//! attractor is the graph of a continuous interpolant. Refining the level
//! gives a sequence of interpolants; [`convergence_report`] measures their
//! uniform distance to a finer reference.

mod ifs;
mod recurrent;

pub use ifs::{
    attractor_points, build_fif_ifs, chaos_orbit, chaos_selectors, eval_fif, fif_from_nodes,
    AffineMap, AttractorMode, ExactMap, Fif, Frame, Ifs, PointCloud, CHAOS_BURN_IN,
    DETERMINISTIC_POINT_CAP,
};
pub use recurrent::{encode_ifs_as_recurrent_net, one_hot, MapSubnet, RecurrentIfsNet};

use alloc::format;
use alloc::vec::Vec;

use num_traits::ToPrimitive;

use crate::cantor::{BaseConfig, CantorPoint, EmbeddedOperator, EmbeddedValue, Tail};
use crate::error::{Error, Result};
use crate::herbrand::LevelMapping;
use crate::syntax::Program;

/// Largest sample level accepted (`2^level` evaluations).
pub const MAX_SAMPLE_LEVEL: usize = 24;

/// The `2^level` pairs `(x, ι(T_P)(x))`, ascending in `x`, plus the pair at
/// `x = 1` (the all-`hi` point) used to close the interpolation domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub level: usize,
    pub m: usize,
    pub pairs: Vec<(CantorPoint, CantorPoint)>,
    pub upper: (CantorPoint, CantorPoint),
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `(x, y)` as floats, `y` taken at the midpoint of its interval.
    pub fn midpoints(&self) -> Vec<(f64, f64)> {
        self.pairs
            .iter()
            .map(|(x, y)| (x.to_real().midpoint, y.to_real().midpoint))
            .collect()
    }

    pub fn max_radius(&self) -> f64 {
        self.pairs.iter().map(|(_, y)| y.to_real().radius).fold(0.0, f64::max)
    }
}

/// Level-`level` prefix number `index`, most significant digit first.
pub(crate) fn prefix_digits(index: usize, level: usize) -> Vec<bool> {
    (1..=level).map(|j| (index >> (level - j)) & 1 == 1).collect()
}

fn check_level(level: usize) -> Result<()> {
    if level == 0 || level > MAX_SAMPLE_LEVEL {
        return Err(Error::InvalidArgument(format!(
            "sample level must lie in 1..={MAX_SAMPLE_LEVEL}, got {level}"
        )));
    }
    Ok(())
}

/// Samples an already compiled operator at every level-`level` prefix.
pub fn sample_with(op: &EmbeddedOperator<'_>, level: usize) -> Result<SampleSet> {
    check_level(level)?;
    if op.truncation() < level {
        return Err(Error::InvalidArgument(format!(
            "output truncation {} is below the sample level {level}",
            op.truncation()
        )));
    }
    let config = op.config();
    let pairs = (0..1usize << level)
        .map(|idx| {
            let x = CantorPoint::new(config, prefix_digits(idx, level), Tail::AllLo);
            let y = op.apply(&x)?;
            Ok((x, y))
        })
        .collect::<Result<Vec<_>>>()?;
    let top = CantorPoint::new(config, Vec::new(), Tail::AllHi);
    let upper = (top.clone(), op.apply(&top)?);
    Ok(SampleSet { level, m: op.truncation(), pairs, upper })
}

/// The `2^level` explicitly computable values of `ι(T_P)` at output
/// truncation `m >= level`.
pub fn sample_embedded_tp(
    program: &Program,
    levels: &LevelMapping,
    level: usize,
    m: usize,
    depth: usize,
    config: BaseConfig,
) -> Result<SampleSet> {
    check_level(level)?;
    let op = EmbeddedOperator::new(program, levels, m, depth, config)?;
    sample_with(&op, level)
}

/// Reference values of the operator on every level-`level` prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub level: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<EmbeddedValue>,
}

impl Reference {
    pub fn new(op: &EmbeddedOperator<'_>, level: usize) -> Result<Self> {
        let samples = sample_with(op, level)?;
        let xs = samples
            .pairs
            .iter()
            .map(|(x, _)| x.prefix_value().to_f64().unwrap_or(f64::NAN))
            .collect();
        let ys = samples.pairs.iter().map(|(_, y)| y.to_real()).collect();
        Ok(Reference { level, xs, ys })
    }

    pub fn max_radius(&self) -> f64 {
        self.ys.iter().map(|y| y.radius).fold(0.0, f64::max)
    }
}

/// One row of a convergence experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    /// Upper bound on `max_x |f_level(x) - ι(T_P)(x)|` over the reference
    /// points: distance to the reference midpoint plus its radius plus the
    /// attractor evaluation bound.
    pub epsilon: f64,
    pub reference_radius: f64,
}

/// Evaluation depth used when comparing an interpolant with the reference.
pub const CONVERGENCE_EVAL_DEPTH: usize = 64;

/// Uniform error of the level-`level` interpolant built from `samples`.
pub fn interpolation_error(
    samples: &SampleSet,
    reference: &Reference,
    d: f64,
) -> Result<ConvergenceRow> {
    let ifs = build_fif_ifs(samples, d, true)?.to_ifs()?;
    let mut epsilon: f64 = 0.0;
    for (x, y) in reference.xs.iter().zip(&reference.ys) {
        let (fx, bound) = eval_fif(&ifs, *x, CONVERGENCE_EVAL_DEPTH)?;
        epsilon = epsilon.max((fx - y.midpoint).abs() + y.radius + bound);
    }
    Ok(ConvergenceRow {
        level: samples.level,
        epsilon,
        reference_radius: reference.max_radius(),
    })
}

/// Parameters of a convergence experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    /// Sample levels, strictly increasing.
    pub levels: Vec<usize>,
    /// Reference level, above every sample level.
    pub reference_level: usize,
    /// Vertical scaling shared by every map.
    pub d: f64,
    /// Output truncation of the reference values.
    pub m: usize,
    /// Level-`i` samples are truncated at `i + slack` output digits.
    pub slack: usize,
    pub depth: usize,
    pub base: BaseConfig,
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("levels must be nonempty and increasing".into()));
        }
        let top = *self.levels.last().expect("nonempty");
        if self.reference_level <= top {
            return Err(Error::InvalidArgument(format!(
                "reference level {} must exceed the largest sample level {top}",
                self.reference_level
            )));
        }
        if self.m < self.reference_level {
            return Err(Error::InvalidArgument(format!(
                "reference truncation {} is below the reference level {}",
                self.m, self.reference_level
            )));
        }
        Ok(())
    }

    /// Level-mapping length the experiment needs.
    pub fn needed_levels(&self) -> usize {
        let top = self.levels.last().copied().unwrap_or(0) + self.slack;
        self.m.max(top)
    }
}

/// `(level, ε)` rows for the interpolants at each requested level.
pub fn convergence_report(
    program: &Program,
    levels: &LevelMapping,
    config: &ConvergenceConfig,
) -> Result<Vec<ConvergenceRow>> {
    config.validate()?;
    let ref_op = EmbeddedOperator::new(program, levels, config.m, config.depth, config.base)?;
    let reference = Reference::new(&ref_op, config.reference_level)?;
    config
        .levels
        .iter()
        .map(|&level| {
            let op = EmbeddedOperator::new(
                program,
                levels,
                level + config.slack,
                config.depth,
                config.base,
            )?;
            interpolation_error(&sample_with(&op, level)?, &reference, config.d)
        })
        .collect()
}
