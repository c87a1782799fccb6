//! Level mappings of the Herbrand base and interpretations over them.
//!
//! The canonical enumeration orders ground atoms by size (predicate symbol
//! plus argument term sizes) and breaks ties by printed form. Extending the
//! prefix never reorders earlier levels, because each size class is complete
//! before the next one starts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ground::{arg_tuples, Universe};
use crate::syntax::{Atom, Program, Signature};

/// A bijection between the first `len()` ground atoms and `1..=len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelMapping {
    signature: Signature,
    atoms: Vec<Atom>,
    index: BTreeMap<Atom, usize>,
    complete: bool,
}

impl LevelMapping {
    /// Builds a mapping from an explicit enumeration. `complete` declares
    /// that the list covers the whole (finite) Herbrand base.
    pub fn from_atoms(signature: Signature, atoms: Vec<Atom>, complete: bool) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, a) in atoms.iter().enumerate() {
            if !a.is_ground() {
                return Err(Error::NotGround { term: a.to_string() });
            }
            if !signature.admits(a) {
                return Err(Error::UnknownSymbol { atom: a.to_string() });
            }
            if index.insert(a.clone(), i + 1).is_some() {
                return Err(Error::InvalidArgument(alloc::format!("atom {a} is listed twice")));
            }
        }
        Ok(LevelMapping { signature, atoms, index, complete })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// True when the mapping enumerates the entire (finite) base. Levels past
    /// `len()` are then padding: no atom lives there.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// True when levels `1..=m` are all decidable.
    pub fn covers(&self, m: usize) -> bool {
        self.complete || self.atoms.len() >= m
    }

    pub fn require(&self, m: usize) -> Result<()> {
        if self.covers(m) {
            Ok(())
        } else {
            Err(Error::PrefixTooShort { needed: m, available: self.atoms.len() })
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// The atom at a 1-based level.
    pub fn atom(&self, level: usize) -> Option<&Atom> {
        level.checked_sub(1).and_then(|i| self.atoms.get(i))
    }

    /// Level of `atom` if it lies in the enumerated prefix.
    pub fn lookup(&self, atom: &Atom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    pub fn level_of(&self, atom: &Atom) -> Result<usize> {
        if let Some(l) = self.lookup(atom) {
            return Ok(l);
        }
        if !atom.is_ground() {
            return Err(Error::NotGround { term: atom.to_string() });
        }
        if !self.signature.admits(atom) {
            return Err(Error::UnknownSymbol { atom: atom.to_string() });
        }
        Err(Error::OutOfPrefix { atom: atom.to_string(), n: self.atoms.len() })
    }

    /// Largest argument-term size among atoms of `predicate` on levels
    /// `1..=m`, or `None` if the predicate does not occur there.
    pub(crate) fn max_term_size(&self, predicate: &str, m: usize) -> Option<usize> {
        self.atoms
            .iter()
            .take(m)
            .filter(|a| a.predicate == predicate)
            .map(Atom::max_term_size)
            .max()
    }
}

/// The canonical size-then-lexicographic enumeration of the first `n` atoms.
/// For a finite base with fewer than `n` atoms the whole base is returned and
/// the mapping is marked complete.
pub fn enumerate_base(program: &Program, n: usize, cap: usize) -> Result<LevelMapping> {
    if n == 0 {
        return Err(Error::InvalidArgument("prefix length must be at least 1".to_string()));
    }
    enumerate(program.signature(), Stop::Count(n), cap)
}

/// Every atom of size at most `max_size`, in canonical order.
pub fn enumerate_base_through_size(
    program: &Program,
    max_size: usize,
    cap: usize,
) -> Result<LevelMapping> {
    enumerate(program.signature(), Stop::Size(max_size), cap)
}

enum Stop {
    Count(usize),
    Size(usize),
}

fn enumerate(signature: &Signature, stop: Stop, cap: usize) -> Result<LevelMapping> {
    let max_arity = signature.predicates.values().copied().max();
    // Size of the largest atom when the base is finite.
    let finite_limit = match max_arity {
        None => Some(0),
        Some(k) if signature.finite_base() => Some(1 + k),
        Some(_) => None,
    };
    let mut universe = Universe::new(signature, cap);
    let mut atoms: Vec<Atom> = Vec::new();
    let mut size = 0;
    loop {
        let done = match stop {
            Stop::Count(n) => atoms.len() >= n,
            Stop::Size(s) => size >= s,
        };
        if done || finite_limit.is_some_and(|lim| size >= lim) {
            break;
        }
        size += 1;
        let mut class: Vec<(String, Atom)> = Vec::new();
        for (p, &arity) in &signature.predicates {
            if arity == 0 {
                if size == 1 {
                    class.push((p.clone(), Atom::prop(p.clone())));
                }
                continue;
            }
            if size < 1 + arity {
                continue;
            }
            universe.ensure(size - arity)?;
            for args in arg_tuples(universe.classes(), arity, size - 1) {
                let atom = Atom::new(p.clone(), args);
                class.push((atom.to_string(), atom));
                if atoms.len() + class.len() > cap {
                    return Err(Error::ResourceCap { what: "enumerating the Herbrand base", cap });
                }
            }
        }
        class.sort_by(|a, b| a.0.cmp(&b.0));
        atoms.extend(class.into_iter().map(|(_, a)| a));
    }
    let complete = finite_limit.is_some_and(|lim| size >= lim)
        && match stop {
            Stop::Count(n) => atoms.len() <= n,
            Stop::Size(_) => true,
        };
    if let Stop::Count(n) = stop {
        atoms.truncate(n);
    }
    LevelMapping::from_atoms(signature.clone(), atoms, complete)
}

/// What an interpretation says about atoms it does not list explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailPolicy {
    AllFalse,
    AllTrue,
}

/// A truth assignment to ground atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interpretation {
    /// Exactly these atoms are true.
    TrueSet(BTreeSet<Atom>),
    /// Truth values of levels `1..=digits.len()`; later levels follow `tail`.
    Prefix { digits: Vec<bool>, tail: TailPolicy },
}

impl Interpretation {
    pub fn empty() -> Self {
        Interpretation::TrueSet(BTreeSet::new())
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for a in atoms {
            if !a.is_ground() {
                return Err(Error::NotGround { term: a.to_string() });
            }
            set.insert(a);
        }
        Ok(Interpretation::TrueSet(set))
    }

    pub fn prefix(digits: Vec<bool>, tail: TailPolicy) -> Self {
        Interpretation::Prefix { digits, tail }
    }

    /// True when every atom outside a finite set is false.
    pub fn has_false_tail(&self) -> bool {
        matches!(
            self,
            Interpretation::TrueSet(_) | Interpretation::Prefix { tail: TailPolicy::AllFalse, .. }
        )
    }

    /// Truth value at a level, `None` when the level lies beyond an
    /// incomplete mapping and the interpretation cannot name its atom.
    pub fn truth_at_level(&self, level: usize, levels: &LevelMapping) -> Option<bool> {
        if level > levels.len() && levels.is_complete() {
            return Some(false);
        }
        match self {
            Interpretation::TrueSet(set) => levels.atom(level).map(|a| set.contains(a)),
            Interpretation::Prefix { digits, tail } => Some(
                digits
                    .get(level - 1)
                    .copied()
                    .unwrap_or(*tail == TailPolicy::AllTrue),
            ),
        }
    }

    /// Truth value of an arbitrary ground atom of the base.
    pub fn truth_of(&self, atom: &Atom, levels: &LevelMapping) -> bool {
        match self {
            Interpretation::TrueSet(set) => set.contains(atom),
            Interpretation::Prefix { digits, tail } => match levels.lookup(atom) {
                Some(l) if l <= digits.len() => digits[l - 1],
                _ => *tail == TailPolicy::AllTrue,
            },
        }
    }

    /// True atoms on levels `1..=m` (capped at the mapping length).
    pub fn true_atoms_through<'l>(&self, levels: &'l LevelMapping, m: usize) -> Vec<&'l Atom> {
        (1..=m.min(levels.len()))
            .filter(|&l| self.truth_at_level(l, levels) == Some(true))
            .filter_map(|l| levels.atom(l))
            .collect()
    }

    /// Every atom known to be true when the tail is all-false.
    pub(crate) fn finite_support<'a>(&'a self, levels: &'a LevelMapping) -> Option<Vec<&'a Atom>> {
        match self {
            Interpretation::TrueSet(set) => Some(set.iter().collect()),
            Interpretation::Prefix { digits, tail: TailPolicy::AllFalse } => Some(
                digits
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d)
                    .filter_map(|(i, _)| levels.atom(i + 1))
                    .collect(),
            ),
            Interpretation::Prefix { tail: TailPolicy::AllTrue, .. } => None,
        }
    }
}

/// Smallest level in `1..=levels.len()` where the interpretations differ.
/// `None` means they agree on the whole enumerated prefix.
pub fn first_disagreement(
    i: &Interpretation,
    j: &Interpretation,
    levels: &LevelMapping,
) -> Option<usize> {
    (1..=levels.len()).find(|&l| i.truth_at_level(l, levels) != j.truth_at_level(l, levels))
}
