//! Herbrand universe stratified by term size, and depth-bounded grounding.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::syntax::{Clause, Program, Signature, Substitution, Term};

/// Default cap on generated instances (and on enumerated terms or atoms).
pub const DEFAULT_GROUNDING_CAP: usize = 1_000_000;

/// Ground terms of the universe, generated lazily one size class at a time.
/// Within a size class terms are sorted by their printed form.
#[derive(Debug, Clone)]
pub(crate) struct Universe<'s> {
    signature: &'s Signature,
    by_size: Vec<Vec<Term>>,
    total: usize,
    cap: usize,
}

impl<'s> Universe<'s> {
    pub(crate) fn new(signature: &'s Signature, cap: usize) -> Self {
        Universe { signature, by_size: Vec::new(), total: 0, cap }
    }

    /// Makes every size class up to `size` available.
    pub(crate) fn ensure(&mut self, size: usize) -> Result<()> {
        while self.by_size.len() < size {
            let s = self.by_size.len() + 1;
            let mut class: Vec<Term> = if s == 1 {
                self.signature.constants().map(Term::constant).collect()
            } else {
                let mut class = Vec::new();
                for (f, &arity) in &self.signature.functors {
                    if arity == 0 || arity > s - 1 {
                        continue;
                    }
                    for args in arg_tuples(&self.by_size, arity, s - 1) {
                        class.push(Term::App(f.clone(), args));
                        if self.total + class.len() > self.cap {
                            return Err(Error::ResourceCap {
                                what: "enumerating the Herbrand universe",
                                cap: self.cap,
                            });
                        }
                    }
                }
                class
            };
            sort_by_printed(&mut class);
            self.total += class.len();
            self.by_size.push(class);
        }
        Ok(())
    }

    /// Terms of exactly `size` symbols; `ensure(size)` must have been called.
    #[cfg(test)]
    pub(crate) fn class(&self, size: usize) -> &[Term] {
        &self.by_size[size - 1]
    }

    pub(crate) fn classes(&self) -> &[Vec<Term>] {
        &self.by_size
    }
}

fn sort_by_printed(terms: &mut Vec<Term>) {
    let mut keyed: Vec<_> = terms.drain(..).map(|t| (t.to_string(), t)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    terms.extend(keyed.into_iter().map(|(_, t)| t));
}

/// All `k`-tuples of ground terms whose sizes sum to `total`, taken from
/// the size classes in `by_size` (index = size - 1).
pub(crate) fn arg_tuples(by_size: &[Vec<Term>], k: usize, total: usize) -> Vec<Vec<Term>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fill_tuples(by_size, k, total, &mut current, &mut out);
    out
}

fn fill_tuples(
    by_size: &[Vec<Term>],
    k: usize,
    total: usize,
    current: &mut Vec<Term>,
    out: &mut Vec<Vec<Term>>,
) {
    if k == 0 {
        if total == 0 {
            out.push(current.clone());
        }
        return;
    }
    if total < k {
        return;
    }
    for first in 1..=(total - (k - 1)).min(by_size.len()) {
        for t in &by_size[first - 1] {
            current.push(t.clone());
            fill_tuples(by_size, k - 1, total - first, current, out);
            current.pop();
        }
    }
}

/// A ground instance together with the index of the clause it instantiates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundInstance {
    pub clause_index: usize,
    pub clause: Clause,
}

/// Depth-bounded grounding of a program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundProgram {
    pub depth: usize,
    pub instances: Vec<GroundInstance>,
}

impl GroundProgram {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.instances.iter().map(|i| &i.clause)
    }

    pub fn contains(&self, clause: &Clause) -> bool {
        self.clauses().any(|c| c == clause)
    }
}

/// All ground instances of the clauses of `program` in which every term has
/// at most `depth` symbols. Instances are ordered by clause index, then by
/// substitution: variables in order of first occurrence, each ranging over
/// the universe in size-then-printed order.
pub fn ground_program(program: &Program, depth: usize, cap: usize) -> Result<GroundProgram> {
    if depth == 0 {
        return Err(Error::InvalidArgument("grounding depth must be at least 1".to_string()));
    }
    let mut universe = Universe::new(program.signature(), cap);
    universe.ensure(depth)?;
    let domain: Vec<&Term> = universe.classes().iter().flatten().collect();

    let mut instances = Vec::new();
    let mut budget = Budget { left: cap.saturating_mul(16), cap };
    for (clause_index, clause) in program.clauses().iter().enumerate() {
        let vars = clause.vars();
        let mut subst = Substitution::new();
        let mut sink = |c: Clause| -> Result<()> {
            if instances.len() >= cap {
                return Err(Error::ResourceCap { what: "grounding the program", cap });
            }
            instances.push(GroundInstance { clause_index, clause: c });
            Ok(())
        };
        bind(clause, &vars, &domain, depth, &mut subst, &mut budget, &mut sink)?;
    }
    Ok(GroundProgram { depth, instances })
}

struct Budget {
    left: usize,
    cap: usize,
}

fn bind(
    clause: &Clause,
    vars: &[&str],
    domain: &[&Term],
    depth: usize,
    subst: &mut Substitution,
    budget: &mut Budget,
    sink: &mut dyn FnMut(Clause) -> Result<()>,
) -> Result<()> {
    if clause.terms().any(|t| t.size_under(subst) > depth) {
        return Ok(());
    }
    let Some((var, rest)) = vars.split_first() else {
        return sink(clause.apply(subst));
    };
    for &value in domain {
        if budget.left == 0 {
            return Err(Error::ResourceCap { what: "grounding the program", cap: budget.cap });
        }
        budget.left -= 1;
        subst.insert(var.to_string(), value.clone());
        bind(clause, rest, domain, depth, subst, budget, sink)?;
    }
    subst.remove(*var);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;
    use alloc::string::String;

    fn printed(g: &GroundProgram) -> Vec<String> {
        g.clauses().map(|c| c.to_string()).collect()
    }

    #[test]
    fn universe_is_sorted_by_size_then_text() {
        let p = parse_program("p(f(X, Y)). q(b). q(a).").unwrap();
        let mut u = Universe::new(p.signature(), 100);
        u.ensure(3).unwrap();
        let names: Vec<String> = u.class(3).iter().map(|t| t.to_string()).collect();
        assert_eq!(names, ["f(a,a)", "f(a,b)", "f(b,a)", "f(b,b)"]);
    }

    #[test]
    fn propositional_grounding_is_identity() {
        let p = parse_program("p :- q. q. r :- p, not s.").unwrap();
        for d in 1..4 {
            let g = ground_program(&p, d, DEFAULT_GROUNDING_CAP).unwrap();
            assert_eq!(g.clauses().cloned().collect::<Vec<_>>(), p.clauses());
        }
    }

    #[test]
    fn shallow_depth_drops_clauses_silently() {
        let p = parse_program("p(f(f(a))). q(a).").unwrap();
        let g = ground_program(&p, 2, DEFAULT_GROUNDING_CAP).unwrap();
        assert_eq!(printed(&g), ["q(a)."]);
    }

    #[test]
    fn cap_is_enforced() {
        let p = parse_program("p(X, Y, Z) :- q(X), q(Y), q(Z). q(a). q(b). q(c).").unwrap();
        let err = ground_program(&p, 1, 10).unwrap_err();
        assert!(matches!(err, Error::ResourceCap { .. }));
    }

    #[test]
    fn zero_depth_is_rejected() {
        let p = parse_program("p.").unwrap();
        assert!(ground_program(&p, 0, 10).is_err());
    }
}
