use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::herbrand::Interpretation;
use crate::syntax::{Atom, Program};

/// Hidden unit for one clause: fires iff `Σ weights·input ≥ threshold`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseUnit {
    /// One entry per atom: +1 per positive, -1 per negative occurrence.
    pub weights: Vec<i32>,
    /// Number of positive body literals.
    pub threshold: i32,
    /// Index of the output unit (the clause head).
    pub head: usize,
}

/// Recurrent network of threshold units computing `T_P` for a
/// propositional program. Inputs and outputs are indexed by [`Self::atoms`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdNet {
    pub atoms: Vec<String>,
    pub clauses: Vec<ClauseUnit>,
}

/// Threshold of every output unit: it fires iff some clause unit for its
/// atom fires.
pub const OUTPUT_THRESHOLD: f64 = 0.5;

pub fn build_core_network(program: &Program) -> Result<ThresholdNet> {
    if !program.is_propositional() {
        return Err(Error::NotPropositional);
    }
    // Predicates are 0-ary, so sorting by name is the canonical base order.
    let atoms: Vec<String> = program.signature().predicates.keys().cloned().collect();
    let index: BTreeMap<&str, usize> =
        atoms.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let clauses = program
        .clauses()
        .iter()
        .map(|c| {
            let mut weights = alloc::vec![0; atoms.len()];
            let mut threshold = 0;
            for lit in &c.body {
                let k = index[lit.atom.predicate.as_str()];
                if lit.positive {
                    weights[k] += 1;
                    threshold += 1;
                } else {
                    weights[k] -= 1;
                }
            }
            ClauseUnit { weights, threshold, head: index[c.head.predicate.as_str()] }
        })
        .collect();
    Ok(ThresholdNet { atoms, clauses })
}

impl ThresholdNet {
    /// Input units, clause units and output units.
    pub fn unit_count(&self) -> usize {
        2 * self.atoms.len() + self.clauses.len()
    }

    /// Clause unit activations for an input state.
    pub fn hidden(&self, input: &[bool]) -> Vec<bool> {
        assert_eq!(input.len(), self.atoms.len(), "input width");
        self.clauses
            .iter()
            .map(|u| {
                let sum: i32 =
                    u.weights.iter().zip(input).map(|(&w, &x)| if x { w } else { 0 }).sum();
                sum >= u.threshold
            })
            .collect()
    }

    /// One forward pass: input state to output state.
    pub fn forward(&self, input: &[bool]) -> Vec<bool> {
        let mut drive = alloc::vec![0.0; self.atoms.len()];
        for (u, fired) in self.clauses.iter().zip(self.hidden(input)) {
            if fired {
                drive[u.head] += 1.0;
            }
        }
        drive.into_iter().map(|d| d >= OUTPUT_THRESHOLD).collect()
    }

    pub fn encode(&self, i: &Interpretation) -> Vec<bool> {
        match i {
            Interpretation::TrueSet(set) => {
                self.atoms.iter().map(|a| set.contains(&Atom::prop(a.clone()))).collect()
            }
            Interpretation::Prefix { digits, tail } => (0..self.atoms.len())
                .map(|k| digits.get(k).copied().unwrap_or(*tail == crate::herbrand::TailPolicy::AllTrue))
                .collect(),
        }
    }

    pub fn decode(&self, state: &[bool]) -> Interpretation {
        Interpretation::TrueSet(
            self.atoms
                .iter()
                .zip(state)
                .filter(|(_, &b)| b)
                .map(|(a, _)| Atom::prop(a.clone()))
                .collect(),
        )
    }

    /// Names of the true atoms of a state.
    pub fn true_atoms<'a>(&'a self, state: &[bool]) -> Vec<&'a str> {
        self.atoms.iter().zip(state).filter(|(_, &b)| b).map(|(a, _)| a.as_str()).collect()
    }
}

/// States of a recurrent run, the input first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreTrace {
    pub states: Vec<Vec<bool>>,
    /// The last state equals the one before it.
    pub fixpoint: bool,
    /// The last state repeats an earlier, non-adjacent state.
    pub cycle: bool,
}

/// Feeds outputs back as inputs for at most `steps` passes, stopping at the
/// first state already seen.
pub fn run_core_network(net: &ThresholdNet, i0: &[bool], steps: usize) -> CoreTrace {
    let mut states = alloc::vec![i0.to_vec()];
    let mut seen = BTreeMap::new();
    seen.insert(i0.to_vec(), 0usize);
    for t in 1..=steps {
        let next = net.forward(&states[t - 1]);
        let earlier = seen.get(&next).copied();
        states.push(next.clone());
        if let Some(s) = earlier {
            return CoreTrace { states, fixpoint: s == t - 1, cycle: s != t - 1 };
        }
        seen.insert(next, t);
    }
    CoreTrace { states, fixpoint: false, cycle: false }
}
