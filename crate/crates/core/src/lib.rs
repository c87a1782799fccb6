//! Embedding of first-order logic programs into Cantor space.
//!
//! The crate maps interpretations of a normal logic program onto the Cantor
//! set through a level mapping of the Herbrand base, evaluates the embedded
//! immediate consequence operator exactly, and approximates its graph both by
//! fractal interpolation (an iterated function system on the plane) and by
//! small feedforward networks. Propositional programs additionally compile to
//! recurrent networks of threshold units.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line live in the companion `nsi` crate.
#![no_std]

extern crate alloc;

pub mod cantor;
pub mod consequence;
pub mod error;
pub mod fractal;
pub mod ground;
pub mod herbrand;
pub mod network;
pub mod parser;
pub mod syntax;

pub use cantor::{BaseConfig, CantorPoint, EmbeddedOperator, EmbeddedValue, Tail};
pub use consequence::{
    apply_tp, check_acyclic, estimate_lipschitz, iterate_tp, Acyclicity, LipschitzEstimate,
    TpEvaluator, TpTrace,
};
pub use error::{Error, Result};
pub use fractal::{
    attractor_points, build_fif_ifs, eval_fif, sample_embedded_tp, AttractorMode, Fif, Ifs,
    PointCloud, RecurrentIfsNet, SampleSet,
};
pub use ground::{ground_program, GroundProgram, DEFAULT_GROUNDING_CAP};
pub use herbrand::{enumerate_base, first_disagreement, Interpretation, LevelMapping, TailPolicy};
pub use network::{FeedforwardNet, ThresholdNet, TrainConfig, TrainingReport};
pub use parser::{parse_atom_list, parse_program};
pub use syntax::{Atom, Clause, Literal, Program, Signature, Term};
