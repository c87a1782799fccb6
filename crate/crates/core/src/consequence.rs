//! The immediate consequence operator and what can be measured about it.
//!
//! A ground atom `A` is true in `T_P(I)` iff some ground instance
//! `A :- L1, ..., Lk` of a clause has every positive `Li` true in `I` and
//! every negative `Li` false in `I`.
//!
//! Evaluation is always truncated: [`TpEvaluator`] compiles the ground
//! instances whose heads lie on levels `1..=m` and answers exactly for those
//! levels. It refuses to compile when the grounding depth cannot be shown to
//! cover every relevant instance.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cantor::{BaseConfig, CantorPoint, EmbeddedOperator, Tail};
use crate::error::{Error, RequiredDepth, Result};
use crate::ground::GroundProgram;
use crate::herbrand::{Interpretation, LevelMapping, TailPolicy};
use crate::syntax::{Atom, Clause, Literal, Program, Substitution, Term};

/// Cap on partial joins while certifying an all-false output tail.
const CERTIFY_JOIN_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
enum AtomRef {
    Level(usize),
    Beyond(Atom),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct GroundBody {
    positive: Vec<AtomRef>,
    negative: Vec<AtomRef>,
}

/// Smallest grounding depth guaranteed to contain every ground instance whose
/// head lies on levels `1..=m`, derived from term-size arithmetic. `None`
/// when some relevant clause has a variable that its head does not bind and
/// the universe is infinite.
pub fn required_depth(program: &Program, levels: &LevelMapping, m: usize) -> RequiredDepth {
    let signature = program.signature();
    let mut required = 1usize;
    for clause in program.clauses() {
        let Some(head_max) = levels.max_term_size(&clause.head.predicate, m) else {
            continue;
        };
        required = required.max(head_max);
        let mut bounds: BTreeMap<&str, usize> = BTreeMap::new();
        for t in &clause.head.args {
            let mut occ = BTreeMap::new();
            t.var_occurrences(&mut occ);
            let total: usize = occ.values().sum();
            for (v, &n) in &occ {
                let fixed = t.symbol_count() + (total - n);
                let b = head_max.saturating_sub(fixed) / n;
                let name = clause.head.args.iter().find_map(|h| find_var(h, v)).unwrap_or("");
                bounds.entry(name).and_modify(|x| *x = (*x).min(b)).or_insert(b);
            }
        }
        for lit in &clause.body {
            for t in &lit.atom.args {
                let mut occ = BTreeMap::new();
                t.var_occurrences(&mut occ);
                let mut size = t.symbol_count();
                for (v, n) in occ {
                    let b = match bounds.get(v.as_str()) {
                        Some(&b) => b,
                        None if signature.has_function_symbols() => return RequiredDepth(None),
                        None => 1,
                    };
                    size += n * b;
                }
                required = required.max(size);
            }
        }
    }
    RequiredDepth(Some(required))
}

fn find_var<'a>(t: &'a Term, name: &str) -> Option<&'a str> {
    match t {
        Term::Var(v) if v == name => Some(v),
        Term::Var(_) => None,
        Term::App(_, args) => args.iter().find_map(|a| find_var(a, name)),
    }
}

/// `T_P` compiled for output levels `1..=m`.
#[derive(Debug, Clone)]
pub struct TpEvaluator<'a> {
    program: &'a Program,
    levels: &'a LevelMapping,
    m: usize,
    /// Ground bodies per output level (index `level - 1`).
    rules: Vec<Vec<GroundBody>>,
}

impl<'a> TpEvaluator<'a> {
    pub fn new(program: &'a Program, levels: &'a LevelMapping, m: usize, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidArgument("grounding depth must be at least 1".to_string()));
        }
        levels.require(m)?;
        let required = required_depth(program, levels, m);
        match required.0 {
            Some(r) if r <= depth => {}
            _ => return Err(Error::InsufficientDepth { depth, required }),
        }
        let constants: Vec<Term> = program.signature().constants().map(Term::constant).collect();
        let mut rules = Vec::with_capacity(m);
        for level in 1..=m {
            let mut bodies = Vec::new();
            if let Some(head) = levels.atom(level) {
                for clause in program.clauses() {
                    let mut subst = Substitution::new();
                    if !clause.head.match_ground(head, &mut subst) {
                        continue;
                    }
                    let local: Vec<&str> = clause
                        .vars()
                        .into_iter()
                        .filter(|v| !subst.contains_key(*v))
                        .collect();
                    for_each_extension(&local, &constants, &mut subst, &mut |s| {
                        bodies.push(ground_body(&clause.body, s, levels));
                    });
                }
            }
            rules.push(bodies);
        }
        Ok(TpEvaluator { program, levels, m, rules })
    }

    pub fn truncation(&self) -> usize {
        self.m
    }

    pub fn levels(&self) -> &'a LevelMapping {
        self.levels
    }

    /// Number of compiled ground instances.
    pub fn instance_count(&self) -> usize {
        self.rules.iter().map(Vec::len).sum()
    }

    fn holds(&self, r: &AtomRef, i: &Interpretation) -> bool {
        match r {
            AtomRef::Level(l) => i.truth_at_level(*l, self.levels).unwrap_or(false),
            AtomRef::Beyond(a) => i.truth_of(a, self.levels),
        }
    }

    /// Truth values of `T_P(i)` on levels `1..=m`, as a prefix with an
    /// all-false tail.
    pub fn apply(&self, i: &Interpretation) -> Interpretation {
        let digits = self
            .rules
            .iter()
            .map(|bodies| {
                bodies.iter().any(|b| {
                    b.positive.iter().all(|r| self.holds(r, i))
                        && !b.negative.iter().any(|r| self.holds(r, i))
                })
            })
            .collect();
        Interpretation::Prefix { digits, tail: TailPolicy::AllFalse }
    }

    /// True when `T_P(i)` provably has no true atom beyond level `m`.
    ///
    /// Requires `i` to have finite support. Positive body literals are joined
    /// against the true atoms of `i`; every head reachable that way must lie
    /// on a level `<= m`, and clauses without positive literals must have a
    /// ground head on such a level.
    pub fn certify_false_tail(&self, i: &Interpretation) -> bool {
        if self.levels.is_complete() && self.m >= self.levels.len() {
            return true;
        }
        let Some(support) = i.finite_support(self.levels) else {
            return false;
        };
        let within = |a: &Atom| self.levels.lookup(a).is_some_and(|l| l <= self.m);
        for clause in self.program.clauses() {
            let positives: Vec<&Atom> =
                clause.body.iter().filter(|l| l.positive).map(|l| &l.atom).collect();
            let mut substs = vec![Substitution::new()];
            for pattern in positives {
                let mut next = Vec::new();
                for s in &substs {
                    for &a in &support {
                        let mut s2 = s.clone();
                        if pattern.match_ground(a, &mut s2) {
                            next.push(s2);
                        }
                    }
                }
                if next.len() > CERTIFY_JOIN_CAP {
                    return false;
                }
                substs = next;
                if substs.is_empty() {
                    break;
                }
            }
            for s in &substs {
                let head = clause.head.apply(s);
                if !head.is_ground() || !within(&head) {
                    return false;
                }
            }
        }
        true
    }
}

fn for_each_extension(
    vars: &[&str],
    domain: &[Term],
    subst: &mut Substitution,
    f: &mut dyn FnMut(&Substitution),
) {
    let Some((v, rest)) = vars.split_first() else {
        f(subst);
        return;
    };
    for t in domain {
        subst.insert(v.to_string(), t.clone());
        for_each_extension(rest, domain, subst, f);
    }
    subst.remove(*v);
}

fn ground_body(body: &[Literal], subst: &Substitution, levels: &LevelMapping) -> GroundBody {
    let mut gb = GroundBody { positive: Vec::new(), negative: Vec::new() };
    for lit in body {
        let atom = lit.atom.apply(subst);
        let r = match levels.lookup(&atom) {
            Some(l) => AtomRef::Level(l),
            None => AtomRef::Beyond(atom),
        };
        if lit.positive {
            gb.positive.push(r);
        } else {
            gb.negative.push(r);
        }
    }
    gb
}

/// `T_P(i)` on levels `1..=m`.
pub fn apply_tp(
    program: &Program,
    levels: &LevelMapping,
    i: &Interpretation,
    m: usize,
    depth: usize,
) -> Result<Interpretation> {
    Ok(TpEvaluator::new(program, levels, m, depth)?.apply(i))
}

/// States `I0, T_P(I0), T_P²(I0), ...` compared on levels `1..=m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TpTrace {
    pub m: usize,
    pub states: Vec<Interpretation>,
    /// Levels whose truth value changed at each step; empty for step 0.
    pub changed: Vec<Vec<usize>>,
    pub fixpoint: bool,
}

/// Iterates `T_P` at most `steps` times, stopping once two consecutive states
/// agree on levels `1..=m`.
pub fn iterate_tp(
    program: &Program,
    levels: &LevelMapping,
    i0: &Interpretation,
    steps: usize,
    m: usize,
    depth: usize,
) -> Result<TpTrace> {
    let eval = TpEvaluator::new(program, levels, m, depth)?;
    Ok(iterate_with(&eval, i0, steps))
}

pub(crate) fn iterate_with(eval: &TpEvaluator<'_>, i0: &Interpretation, steps: usize) -> TpTrace {
    let levels = eval.levels;
    let m = eval.m;
    let mut trace = TpTrace { m, states: vec![i0.clone()], changed: vec![Vec::new()], fixpoint: false };
    for _ in 0..steps {
        let current = trace.states.last().expect("trace is never empty");
        let next = eval.apply(current);
        let changed: Vec<usize> = (1..=m)
            .filter(|&l| current.truth_at_level(l, levels) != next.truth_at_level(l, levels))
            .collect();
        let done = changed.is_empty();
        trace.states.push(next);
        trace.changed.push(changed);
        if done {
            trace.fixpoint = true;
            break;
        }
    }
    trace
}

/// Outcome of an acyclicity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Acyclicity {
    pub acyclic: bool,
    /// First ground clause whose head is not above all of its body atoms.
    pub witness: Option<Clause>,
}

/// Checks that every ground clause has its head on a strictly higher level
/// than each body atom.
pub fn check_acyclic(g: &GroundProgram, levels: &LevelMapping) -> Result<Acyclicity> {
    for clause in g.clauses() {
        let head = levels.level_of(&clause.head)?;
        for lit in &clause.body {
            if levels.level_of(&lit.atom)? >= head {
                return Ok(Acyclicity { acyclic: false, witness: Some(clause.clone()) });
            }
        }
    }
    Ok(Acyclicity { acyclic: true, witness: None })
}

/// Empirical Lipschitz constant of the embedded operator.
///
/// This is a lower bound on the true constant: it is a maximum over finitely
/// many sampled pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzEstimate {
    pub ratio: BigRational,
    pub value: f64,
    pub pair_count: usize,
    pub maximizing_pair: Option<(CantorPoint, CantorPoint)>,
    /// Ratio for the pair (0, 0 with digit `k` flipped), per level `k`.
    pub flip_ratios: Vec<(usize, BigRational)>,
    pub note: &'static str,
}

pub const LIPSCHITZ_NOTE: &str = "empirical lower bound on the Lipschitz constant";

/// Running maximum of `|f(x) - f(y)| / |x - y|` over observed digit pairs,
/// with `f` the embedded operator and `x`, `y` all-`lo`-tailed prefixes.
/// When an output is only known up to its truncation interval, `|f(x) - f(y)|`
/// is taken as the gap between the two intervals, so every observed ratio is
/// a certified lower bound on the true quotient.
#[derive(Debug, Clone)]
pub struct LipschitzSampler<'a> {
    op: &'a EmbeddedOperator<'a>,
    cache: BTreeMap<Vec<bool>, (BigRational, (BigRational, BigRational))>,
    best: Option<(BigRational, Vec<bool>, Vec<bool>)>,
    count: usize,
}

impl<'a> LipschitzSampler<'a> {
    pub fn new(op: &'a EmbeddedOperator<'a>) -> Self {
        LipschitzSampler { op, cache: BTreeMap::new(), best: None, count: 0 }
    }

    /// Exact x value and the interval enclosing f(x) for digits `x`.
    fn point(&mut self, x: &[bool]) -> Result<(BigRational, (BigRational, BigRational))> {
        if let Some(v) = self.cache.get(x) {
            return Ok(v.clone());
        }
        let xp = CantorPoint::new(self.op.config(), x.to_vec(), Tail::AllLo);
        let y = self.op.apply(&xp)?;
        let v = (xp.prefix_value(), y.interval());
        self.cache.insert(x.to_vec(), v.clone());
        Ok(v)
    }

    /// Records one pair; returns its ratio, or `None` if the points coincide.
    pub fn observe(&mut self, x: &[bool], y: &[bool]) -> Result<Option<BigRational>> {
        let (x1, f1) = self.point(x)?;
        let (x2, f2) = self.point(y)?;
        let dx = (&x1 - &x2).abs();
        if dx.is_zero() {
            return Ok(None);
        }
        let lo = if f1.0 > f2.0 { &f1.0 } else { &f2.0 };
        let hi = if f1.1 < f2.1 { &f1.1 } else { &f2.1 };
        let gap = if lo > hi { lo - hi } else { BigRational::zero() };
        let ratio = gap / dx;
        self.count += 1;
        if self.best.as_ref().is_none_or(|(b, _, _)| &ratio > b) {
            self.best = Some((ratio.clone(), x.to_vec(), y.to_vec()));
        }
        Ok(Some(ratio))
    }

    pub fn pair_count(&self) -> usize {
        self.count
    }

    pub fn current(&self) -> BigRational {
        self.best.as_ref().map_or_else(BigRational::zero, |(b, _, _)| b.clone())
    }

    pub fn finish(self, flip_ratios: Vec<(usize, BigRational)>) -> LipschitzEstimate {
        let config = self.op.config();
        let ratio = self.current();
        LipschitzEstimate {
            value: ratio.to_f64().unwrap_or(f64::NAN),
            ratio,
            pair_count: self.count,
            maximizing_pair: self.best.map(|(_, x, y)| {
                (CantorPoint::new(config, x, Tail::AllLo), CantorPoint::new(config, y, Tail::AllLo))
            }),
            flip_ratios,
            note: LIPSCHITZ_NOTE,
        }
    }
}

/// Number of input digits that can influence the operator.
pub(crate) fn effective_digits(levels: &LevelMapping, m: usize) -> usize {
    if levels.is_complete() {
        m.min(levels.len())
    } else {
        m
    }
}

/// Estimates the Lipschitz constant of `ι(T_P)` from every single-digit flip
/// of the origin at levels `1..=m` plus `pairs` seeded random pairs of
/// `m`-digit prefixes.
#[allow(clippy::too_many_arguments)]
pub fn estimate_lipschitz(
    program: &Program,
    levels: &LevelMapping,
    pairs: usize,
    seed: u64,
    m: usize,
    depth: usize,
    config: BaseConfig,
) -> Result<LipschitzEstimate> {
    let op = EmbeddedOperator::new(program, levels, m, depth, config)?;
    let k = effective_digits(levels, m);
    let mut sampler = LipschitzSampler::new(&op);
    let origin = vec![false; k];
    let mut flips = Vec::with_capacity(k);
    for level in 1..=k {
        let mut x = origin.clone();
        x[level - 1] = true;
        if let Some(r) = sampler.observe(&origin, &x)? {
            flips.push((level, r));
        }
    }
    if k > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..pairs {
            let x: Vec<bool> = (0..k).map(|_| rng.gen()).collect();
            let y: Vec<bool> = (0..k).map(|_| rng.gen()).collect();
            sampler.observe(&x, &y)?;
        }
    }
    Ok(sampler.finish(flips))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{ground_program, DEFAULT_GROUNDING_CAP};
    use crate::herbrand::{enumerate_base, enumerate_base_through_size};
    use crate::parser::{parse_atom_list, parse_program};
    use alloc::string::String;

    const EVEN: &str = "even(0). even(s(s(X))) :- even(X).";
    const PROP: &str = "p :- q. q. r :- p, not s.";

    fn setup(src: &str, n: usize) -> (Program, LevelMapping) {
        let p = parse_program(src).unwrap();
        let l = enumerate_base(&p, n, DEFAULT_GROUNDING_CAP).unwrap();
        (p, l)
    }

    fn true_names(i: &Interpretation, l: &LevelMapping, m: usize) -> Vec<String> {
        i.true_atoms_through(l, m).iter().map(|a| a.to_string()).collect()
    }

    fn atoms(s: &str) -> Interpretation {
        Interpretation::from_atoms(parse_atom_list(s).unwrap()).unwrap()
    }

    #[test]
    fn even_single_steps() {
        let (p, l) = setup(EVEN, 8);
        let out = apply_tp(&p, &l, &Interpretation::empty(), 5, 5).unwrap();
        assert_eq!(out, Interpretation::prefix(vec![true, false, false, false, false], TailPolicy::AllFalse));
        let out = apply_tp(&p, &l, &atoms("even(0)"), 5, 5).unwrap();
        assert_eq!(true_names(&out, &l, 5), ["even(0)", "even(s(s(0)))"]);
    }

    #[test]
    fn propositional_single_step() {
        let (p, l) = setup(PROP, 4);
        let out = apply_tp(&p, &l, &atoms("p, q"), 4, 1).unwrap();
        assert_eq!(true_names(&out, &l, 4), ["p", "q", "r"]);
    }

    #[test]
    fn required_depth_for_even() {
        let (p, l) = setup(EVEN, 8);
        assert_eq!(required_depth(&p, &l, 5), RequiredDepth(Some(5)));
        assert!(matches!(
            apply_tp(&p, &l, &Interpretation::empty(), 5, 2),
            Err(Error::InsufficientDepth { depth: 2, required: RequiredDepth(Some(5)) })
        ));
    }

    #[test]
    fn local_variables_over_infinite_universe_are_refused() {
        let (p, l) = setup("q(0). p :- q(X). q(s(X)) :- q(X).", 6);
        assert_eq!(required_depth(&p, &l, 3), RequiredDepth(None));
        assert!(matches!(
            apply_tp(&p, &l, &Interpretation::empty(), 3, 50),
            Err(Error::InsufficientDepth { required: RequiredDepth(None), .. })
        ));
    }

    #[test]
    fn local_variables_over_finite_universe_are_enumerated() {
        let (p, l) = setup("p :- q(X), not r(X). q(a). q(b). r(a).", 8);
        let out = apply_tp(&p, &l, &atoms("q(a), r(a)"), l.len(), 1).unwrap();
        assert!(!true_names(&out, &l, l.len()).contains(&"p".to_string()));
        let out = apply_tp(&p, &l, &atoms("q(a), q(b), r(a)"), l.len(), 1).unwrap();
        assert!(true_names(&out, &l, l.len()).contains(&"p".to_string()));
    }

    #[test]
    fn even_iteration_grows_by_one_fact_per_step() {
        let (p, l) = setup(EVEN, 8);
        let t = iterate_tp(&p, &l, &Interpretation::empty(), 4, 8, 8).unwrap();
        assert_eq!(t.states.len(), 5);
        assert!(!t.fixpoint);
        for (j, s) in t.states.iter().enumerate() {
            let expected: Vec<String> = (0..j)
                .map(|t| {
                    let mut s = String::from("0");
                    for _ in 0..2 * t {
                        s = alloc::format!("s({s})");
                    }
                    alloc::format!("even({s})")
                })
                .collect();
            assert_eq!(true_names(s, &l, 8), expected);
        }
        assert_eq!(t.changed[1], [1]);
        assert_eq!(t.changed[2], [3]);
    }

    #[test]
    fn propositional_iteration_reaches_fixpoint() {
        let (p, l) = setup(PROP, 4);
        let t = iterate_tp(&p, &l, &Interpretation::empty(), 10, 4, 1).unwrap();
        let names: Vec<Vec<String>> = t.states.iter().map(|s| true_names(s, &l, 4)).collect();
        assert_eq!(
            names,
            [vec![], vec!["q"], vec!["p", "q"], vec!["p", "q", "r"], vec!["p", "q", "r"]]
        );
        assert!(t.fixpoint);

        let fix = atoms("p, q, r");
        let t = iterate_tp(&p, &l, &fix, 10, 4, 1).unwrap();
        assert_eq!(t.states.len(), 2);
        assert!(t.fixpoint);
    }

    #[test]
    fn acyclicity() {
        let p = parse_program(EVEN).unwrap();
        let g = ground_program(&p, 7, DEFAULT_GROUNDING_CAP).unwrap();
        let l = enumerate_base_through_size(&p, 8, DEFAULT_GROUNDING_CAP).unwrap();
        assert_eq!(check_acyclic(&g, &l).unwrap(), Acyclicity { acyclic: true, witness: None });

        let p = parse_program("p :- p.").unwrap();
        let g = ground_program(&p, 1, DEFAULT_GROUNDING_CAP).unwrap();
        let l = enumerate_base(&p, 1, DEFAULT_GROUNDING_CAP).unwrap();
        let v = check_acyclic(&g, &l).unwrap();
        assert!(!v.acyclic);
        assert_eq!(v.witness.unwrap().to_string(), "p :- p.");

        let p = parse_program("p :- not q. q.").unwrap();
        let g = ground_program(&p, 1, DEFAULT_GROUNDING_CAP).unwrap();
        let l = enumerate_base(&p, 2, DEFAULT_GROUNDING_CAP).unwrap();
        let v = check_acyclic(&g, &l).unwrap();
        assert_eq!(v.witness.unwrap().to_string(), "p :- not q.");
    }

    #[test]
    fn acyclicity_requires_enumerated_atoms() {
        let p = parse_program(EVEN).unwrap();
        let g = ground_program(&p, 7, DEFAULT_GROUNDING_CAP).unwrap();
        let l = enumerate_base(&p, 3, DEFAULT_GROUNDING_CAP).unwrap();
        assert!(matches!(check_acyclic(&g, &l), Err(Error::OutOfPrefix { .. })));
    }

    #[test]
    fn lipschitz_of_self_negation_is_one() {
        let (p, l) = setup("p :- not p.", 1);
        let est = estimate_lipschitz(&p, &l, 100, 7, 10, 1, BaseConfig::default()).unwrap();
        assert_eq!(est.ratio, BigRational::from_integer(1.into()));
        assert_eq!(est.flip_ratios.len(), 1);
    }

    #[test]
    fn lipschitz_of_empty_program_is_zero() {
        let (p, l) = setup("", 1);
        let est = estimate_lipschitz(&p, &l, 100, 7, 10, 1, BaseConfig::default()).unwrap();
        assert!(est.ratio.is_zero());
        assert_eq!(est.pair_count, 0);
        assert_eq!(est.note, LIPSCHITZ_NOTE);
    }

    #[test]
    fn lipschitz_of_even_flips_are_one_ninth() {
        let (p, l) = setup(EVEN, 10);
        let est = estimate_lipschitz(&p, &l, 500, 3, 10, 10, BaseConfig::default()).unwrap();
        let ninth = BigRational::new(1.into(), 9.into());
        for (k, r) in &est.flip_ratios {
            if k + 2 <= 10 {
                assert_eq!(r, &ninth, "level {k}");
            }
        }
        assert!(est.ratio <= BigRational::new(1.into(), 3.into()));
    }
}
