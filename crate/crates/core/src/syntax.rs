//! Terms, atoms, clauses and programs.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result, SymbolKind};

/// Variable bindings, keyed by variable name.
pub type Substitution = BTreeMap<String, Term>;

/// A first-order term. Constants are zero-ary applications.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::App(name.into(), Vec::new())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App(name.into(), args)
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    /// Total number of symbol occurrences (variables count as one).
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Variables in order of first occurrence, without repeats.
    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Number of function-symbol occurrences.
    pub(crate) fn symbol_count(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::symbol_count).sum::<usize>(),
        }
    }

    /// Occurrences of each variable.
    pub(crate) fn var_occurrences(&self, out: &mut BTreeMap<String, usize>) {
        match self {
            Term::Var(v) => *out.entry(v.clone()).or_insert(0) += 1,
            Term::App(_, args) => args.iter().for_each(|a| a.var_occurrences(out)),
        }
    }

    pub fn apply(&self, subst: &Substitution) -> Term {
        match self {
            Term::Var(v) => subst.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.apply(subst)).collect()),
        }
    }

    /// Size of `self` under `subst`, counting unbound variables as 1.
    pub(crate) fn size_under(&self, subst: &Substitution) -> usize {
        match self {
            Term::Var(v) => subst.get(v).map_or(1, Term::size),
            Term::App(_, args) => 1 + args.iter().map(|a| a.size_under(subst)).sum::<usize>(),
        }
    }

    /// One-way matching of the pattern `self` against a ground term,
    /// extending `subst`. On failure `subst` may hold partial bindings.
    pub fn match_ground(&self, ground: &Term, subst: &mut Substitution) -> bool {
        match (self, ground) {
            (Term::Var(v), g) => match subst.get(v) {
                Some(bound) => bound == g,
                None => {
                    subst.insert(v.clone(), g.clone());
                    true
                }
            },
            (Term::App(f, args), Term::App(g, gargs)) => {
                f == g
                    && args.len() == gargs.len()
                    && args.iter().zip(gargs).all(|(a, b)| a.match_ground(b, subst))
            }
            (Term::App(..), Term::Var(_)) => false,
        }
    }

    /// Canonical order: size first, then the printed form.
    pub fn canonical_cmp(&self, other: &Term) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.to_string().cmp(&other.to_string()))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::App(name, args) => {
                f.write_str(name)?;
                write_args(f, args)
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom { predicate: predicate.into(), args }
    }

    pub fn prop(predicate: impl Into<String>) -> Self {
        Atom::new(predicate, Vec::new())
    }

    /// Predicate symbol plus the sizes of the argument terms.
    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Term::size).sum::<usize>()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        self.args.iter().for_each(|a| a.collect_vars(out));
    }

    pub fn apply(&self, subst: &Substitution) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|a| a.apply(subst)).collect(),
        }
    }

    pub fn match_ground(&self, ground: &Atom, subst: &mut Substitution) -> bool {
        self.predicate == ground.predicate
            && self.args.len() == ground.args.len()
            && self.args.iter().zip(&ground.args).all(|(p, g)| p.match_ground(g, subst))
    }

    /// Largest argument term size, 0 for propositional atoms.
    pub fn max_term_size(&self) -> usize {
        self.args.iter().map(Term::size).max().unwrap_or(0)
    }

    pub fn canonical_cmp(&self, other: &Atom) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.to_string().cmp(&other.to_string()))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        write_args(f, &self.args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, positive: false }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("not ")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// A normal clause `head :- body`. An empty body is a fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Literal>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<Literal>) -> Self {
        Clause { head, body }
    }

    pub fn fact(head: Atom) -> Self {
        Clause { head, body: Vec::new() }
    }

    /// Variables in order of first occurrence (head first, then body).
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.head.collect_vars(&mut out);
        for lit in &self.body {
            lit.atom.collect_vars(&mut out);
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.head.is_ground() && self.body.iter().all(|l| l.atom.is_ground())
    }

    pub fn apply(&self, subst: &Substitution) -> Clause {
        Clause {
            head: self.head.apply(subst),
            body: self
                .body
                .iter()
                .map(|l| Literal { atom: l.atom.apply(subst), positive: l.positive })
                .collect(),
        }
    }

    /// All argument terms of the head and body atoms.
    pub(crate) fn terms(&self) -> impl Iterator<Item = &Term> {
        self.head
            .args
            .iter()
            .chain(self.body.iter().flat_map(|l| l.atom.args.iter()))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        for (i, lit) in self.body.iter().enumerate() {
            f.write_str(if i == 0 { " :- " } else { ", " })?;
            write!(f, "{lit}")?;
        }
        f.write_str(".")
    }
}

/// Functor and predicate symbols with their arities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub functors: BTreeMap<String, usize>,
    pub predicates: BTreeMap<String, usize>,
}

impl Signature {
    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.functors.iter().filter(|(_, &a)| a == 0).map(|(n, _)| n.as_str())
    }

    /// True when some functor takes arguments, making the universe infinite.
    pub fn has_function_symbols(&self) -> bool {
        self.functors.values().any(|&a| a > 0)
    }

    /// True when the Herbrand base is finite.
    pub fn finite_base(&self) -> bool {
        !self.has_function_symbols() || self.predicates.values().all(|&a| a == 0)
    }

    /// Checks that a ground atom uses only known symbols at their arities.
    pub fn admits(&self, atom: &Atom) -> bool {
        fn term_ok(sig: &Signature, t: &Term) -> bool {
            match t {
                Term::Var(_) => false,
                Term::App(f, args) => {
                    sig.functors.get(f) == Some(&args.len()) && args.iter().all(|a| term_ok(sig, a))
                }
            }
        }
        self.predicates.get(&atom.predicate) == Some(&atom.args.len())
            && atom.args.iter().all(|t| term_ok(self, t))
    }

    fn record(
        map: &mut BTreeMap<String, usize>,
        kind: SymbolKind,
        name: &str,
        arity: usize,
    ) -> Result<()> {
        match map.get(name) {
            Some(&a) if a != arity => Err(Error::ArityConflict {
                kind,
                name: name.to_string(),
                first: a,
                second: arity,
            }),
            Some(_) => Ok(()),
            None => {
                map.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    fn record_term(&mut self, t: &Term) -> Result<()> {
        if let Term::App(f, args) = t {
            Self::record(&mut self.functors, SymbolKind::Functor, f, args.len())?;
            for a in args {
                self.record_term(a)?;
            }
        }
        Ok(())
    }

    fn record_atom(&mut self, a: &Atom) -> Result<()> {
        Self::record(&mut self.predicates, SymbolKind::Predicate, &a.predicate, a.args.len())?;
        a.args.iter().try_for_each(|t| self.record_term(t))
    }
}

/// A normal logic program with its derived signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    clauses: Vec<Clause>,
    signature: Signature,
    injected_constant: Option<String>,
}

impl Program {
    /// Builds a program, checking arity consistency. When no constant occurs
    /// a reserved constant is added to the signature so that the Herbrand
    /// universe is nonempty.
    pub fn new(clauses: Vec<Clause>) -> Result<Self> {
        let mut signature = Signature::default();
        for c in &clauses {
            signature.record_atom(&c.head)?;
            for l in &c.body {
                signature.record_atom(&l.atom)?;
            }
        }
        let mut injected_constant = None;
        if signature.constants().next().is_none() {
            let name = core::iter::once(String::from("a"))
                .chain((0..).map(|i| alloc::format!("a_{i}")))
                .find(|n| !signature.functors.contains_key(n))
                .expect("infinitely many candidate names");
            signature.functors.insert(name.clone(), 0);
            injected_constant = Some(name);
        }
        Ok(Program { clauses, signature, injected_constant })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// The reserved constant added to the signature, if any.
    pub fn injected_constant(&self) -> Option<&str> {
        self.injected_constant.as_deref()
    }

    /// True iff every predicate is 0-ary and no variable occurs.
    pub fn is_propositional(&self) -> bool {
        self.signature.predicates.values().all(|&a| a == 0)
            && self.clauses.iter().all(Clause::is_ground)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn term_size_counts_symbols() {
        let t = Term::app("s", vec![Term::app("s", vec![Term::constant("0")])]);
        assert_eq!(t.size(), 3);
        assert_eq!(Atom::new("even", vec![t]).size(), 4);
    }

    #[test]
    fn matching_respects_repeated_variables() {
        let pat = Atom::new("p", vec![Term::var("X"), Term::var("X")]);
        let mut s = Substitution::new();
        let a = Atom::new("p", vec![Term::constant("a"), Term::constant("b")]);
        assert!(!pat.match_ground(&a, &mut s));
        let mut s = Substitution::new();
        let b = Atom::new("p", vec![Term::constant("a"), Term::constant("a")]);
        assert!(pat.match_ground(&b, &mut s));
        assert_eq!(s.get("X"), Some(&Term::constant("a")));
    }

    #[test]
    fn constant_is_injected_when_absent() {
        let p = Program::new(vec![Clause::fact(Atom::prop("p"))]).unwrap();
        assert_eq!(p.injected_constant(), Some("a"));
        assert_eq!(p.signature().functors.get("a"), Some(&0));
        let q = Program::new(vec![Clause::fact(Atom::new(
            "p",
            vec![Term::app("a", vec![Term::var("X")])],
        ))])
        .unwrap();
        assert_eq!(q.injected_constant(), Some("a_0"));
    }

    #[test]
    fn arity_conflict_names_symbol() {
        let err = Program::new(vec![
            Clause::fact(Atom::prop("p")),
            Clause::fact(Atom::new("p", vec![Term::constant("b")])),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::ArityConflict { ref name, .. } if name == "p"));
    }
}
