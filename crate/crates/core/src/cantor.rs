//! Exact Cantor-space embedding of interpretations.
//!
//! A [`CantorPoint`] stores base-`B` digits drawn from a two-letter alphabet
//! `(lo, hi)`; level `i` true maps to `hi`, false to `lo`. All arithmetic is
//! done on big rationals. Floating point appears only in [`EmbeddedValue`],
//! which is rounded outward so that it always encloses the exact value.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::consequence::TpEvaluator;
use crate::error::{Error, Result};
use crate::herbrand::{Interpretation, LevelMapping, TailPolicy};
use crate::syntax::Program;

/// Base and digit alphabet of the embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BaseConfig {
    base: u32,
    lo: u32,
    hi: u32,
}

impl Default for BaseConfig {
    /// Base 3 with digits 0 and 2: the classical middle-thirds Cantor set.
    fn default() -> Self {
        BaseConfig { base: 3, lo: 0, hi: 2 }
    }
}

impl BaseConfig {
    pub fn new(base: u32, lo: u32, hi: u32) -> Result<Self> {
        if base < 3 {
            return Err(Error::InvalidBase(alloc::format!("base {base} is below 3")));
        }
        if !(lo < hi && hi < base) {
            return Err(Error::InvalidBase(alloc::format!(
                "alphabet ({lo},{hi}) must satisfy lo < hi < {base}"
            )));
        }
        Ok(BaseConfig { base, lo, hi })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn lo(&self) -> u32 {
        self.lo
    }

    pub fn hi(&self) -> u32 {
        self.hi
    }

    fn digit(&self, bit: bool) -> u32 {
        if bit {
            self.hi
        } else {
            self.lo
        }
    }

    /// `B^{-k}` as an exact rational.
    pub fn weight(&self, k: usize) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(self.base).pow(k as u32))
    }

    /// Value of an infinite run of digit `d` starting after position `k`.
    fn run_value(&self, d: u32, k: usize) -> BigRational {
        self.weight(k) * BigRational::new(BigInt::from(d), BigInt::from(self.base - 1))
    }
}

/// What follows the stored digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tail {
    AllLo,
    AllHi,
    Unknown,
}

/// A point (or, with an unknown tail, a closed interval) of Cantor space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CantorPoint {
    config: BaseConfig,
    digits: Vec<bool>,
    tail: Tail,
}

impl CantorPoint {
    /// Digits given as truth values: `true` is `hi`, `false` is `lo`.
    pub fn new(config: BaseConfig, digits: Vec<bool>, tail: Tail) -> Self {
        CantorPoint { config, digits, tail }
    }

    /// Digits given as numerals, each of which must be `lo` or `hi`.
    pub fn from_digit_values(config: BaseConfig, values: &[u32], tail: Tail) -> Result<Self> {
        let digits = values
            .iter()
            .enumerate()
            .map(|(i, &d)| match d {
                d if d == config.hi => Ok(true),
                d if d == config.lo => Ok(false),
                d => Err(Error::DigitOutOfAlphabet { position: i + 1, digit: d }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CantorPoint { config, digits, tail })
    }

    pub fn config(&self) -> BaseConfig {
        self.config
    }

    pub fn digits(&self) -> &[bool] {
        &self.digits
    }

    pub fn digit_values(&self) -> impl Iterator<Item = u32> + '_ {
        self.digits.iter().map(|&b| self.config.digit(b))
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// The same digits followed by `tail`.
    pub fn with_tail(&self, tail: Tail) -> Self {
        CantorPoint { tail, ..self.clone() }
    }

    /// `Σ d_i B^{-i}` over the stored digits.
    pub fn prefix_value(&self) -> BigRational {
        let base = BigInt::from(self.config.base);
        let mut numer = BigInt::zero();
        for d in self.digit_values() {
            numer = numer * &base + BigInt::from(d);
        }
        BigRational::new(numer, base.pow(self.digits.len() as u32))
    }

    /// Exact lower and upper end of the denoted interval.
    pub fn interval(&self) -> (BigRational, BigRational) {
        let p = self.prefix_value();
        let k = self.digits.len();
        let lo_tail = self.config.run_value(self.config.lo, k);
        let hi_tail = self.config.run_value(self.config.hi, k);
        match self.tail {
            Tail::AllLo => (&p + &lo_tail, p + lo_tail),
            Tail::AllHi => (&p + &hi_tail, p + hi_tail),
            Tail::Unknown => (&p + lo_tail, p + hi_tail),
        }
    }

    /// Exact value when the tail is known.
    pub fn exact_value(&self) -> Option<BigRational> {
        (self.tail != Tail::Unknown).then(|| self.interval().0)
    }

    pub fn midpoint(&self) -> BigRational {
        let (a, b) = self.interval();
        (a + b) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn to_real(&self) -> EmbeddedValue {
        let (a, b) = self.interval();
        EmbeddedValue::enclosing(&a, &b)
    }

    /// Lexicographic order of the digit strings, tails compared as digits.
    pub fn lex_cmp(&self, other: &CantorPoint) -> Ordering {
        let n = self.digits.len().max(other.digits.len());
        for i in 0..n {
            let a = self.digits.get(i).copied().unwrap_or(self.tail == Tail::AllHi);
            let b = other.digits.get(i).copied().unwrap_or(other.tail == Tail::AllHi);
            match a.cmp(&b) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    }
}

fn subscript(n: u32) -> String {
    const SUB: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    alloc::format!("{n}")
        .chars()
        .map(|c| SUB[c.to_digit(10).unwrap_or(0) as usize])
        .collect()
}

impl fmt::Display for CantorPoint {
    /// `0.2020₃`; an all-`hi` tail is written `(2)` and an unknown tail `…`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("0.")?;
        for d in self.digit_values() {
            write!(f, "{d}")?;
        }
        match self.tail {
            Tail::AllLo => {}
            Tail::AllHi => write!(f, "({})", self.config.hi)?,
            Tail::Unknown => f.write_str("…")?,
        }
        f.write_str(&subscript(self.config.base))
    }
}

/// A float enclosure `midpoint ± radius` of an exact interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedValue {
    pub midpoint: f64,
    pub radius: f64,
}

impl EmbeddedValue {
    /// Smallest convenient float ball containing `[a, b]`.
    pub fn enclosing(a: &BigRational, b: &BigRational) -> Self {
        let two = BigRational::from_integer(BigInt::from(2));
        let mid_exact = (a + b) / &two;
        let midpoint = mid_exact.to_f64().unwrap_or(f64::NAN);
        let mid_q = BigRational::from_float(midpoint).unwrap_or_else(BigRational::zero);
        let reach = core::cmp::max((b - &mid_q).abs(), (&mid_q - a).abs());
        let radius = if reach.is_zero() {
            0.0
        } else {
            round_up(&reach)
        };
        EmbeddedValue { midpoint, radius }
    }

    pub fn lower(&self) -> f64 {
        self.midpoint - self.radius
    }

    pub fn upper(&self) -> f64 {
        self.midpoint + self.radius
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.midpoint).abs() <= self.radius
    }
}

/// A float no smaller than the nonnegative rational `q`.
fn round_up(q: &BigRational) -> f64 {
    let f = q.to_f64().unwrap_or(f64::INFINITY);
    match BigRational::from_float(f) {
        Some(back) if &back >= q => f,
        _ => f.next_up(),
    }
}

/// `ι(I)`: digits for levels `1..=k`, with the tail inferred from `i`.
pub fn embed(
    i: &Interpretation,
    levels: &LevelMapping,
    k: usize,
    config: BaseConfig,
) -> Result<CantorPoint> {
    levels.require(k)?;
    let truth = |l: usize| i.truth_at_level(l, levels).unwrap_or(false);
    let digits: Vec<bool> = (1..=k).map(truth).collect();
    let tail = if levels.is_complete() {
        // Levels past the base are padding and always `lo`.
        if (k + 1..=levels.len()).any(truth) {
            Tail::Unknown
        } else {
            Tail::AllLo
        }
    } else {
        match i {
            Interpretation::TrueSet(set) => {
                if set.iter().all(|a| levels.lookup(a).is_some_and(|l| l <= k)) {
                    Tail::AllLo
                } else {
                    Tail::Unknown
                }
            }
            Interpretation::Prefix { digits: d, tail } => {
                let fill = *tail == TailPolicy::AllTrue;
                if d.iter().skip(k).all(|&b| b == fill) {
                    if fill {
                        Tail::AllHi
                    } else {
                        Tail::AllLo
                    }
                } else {
                    Tail::Unknown
                }
            }
        }
    };
    Ok(CantorPoint { config, digits, tail })
}

/// `ι⁻¹`: the interpretation whose level `i` is true iff digit `i` is `hi`.
pub fn unembed(c: &CantorPoint) -> Result<Interpretation> {
    let tail = match c.tail {
        Tail::AllLo => TailPolicy::AllFalse,
        Tail::AllHi => TailPolicy::AllTrue,
        Tail::Unknown => return Err(Error::UnknownTail),
    };
    Ok(Interpretation::Prefix { digits: c.digits.clone(), tail })
}

/// The embedded operator `x ↦ ι(T_P(ι⁻¹(x)))`, truncated at `m` output
/// digits. The output tail is `AllLo` when the evaluator can certify that
/// no atom past level `m` becomes true, and `Unknown` otherwise.
#[derive(Debug, Clone)]
pub struct EmbeddedOperator<'a> {
    evaluator: TpEvaluator<'a>,
    config: BaseConfig,
}

impl<'a> EmbeddedOperator<'a> {
    pub fn new(
        program: &'a Program,
        levels: &'a LevelMapping,
        m: usize,
        depth: usize,
        config: BaseConfig,
    ) -> Result<Self> {
        Ok(EmbeddedOperator { evaluator: TpEvaluator::new(program, levels, m, depth)?, config })
    }

    pub fn truncation(&self) -> usize {
        self.evaluator.truncation()
    }

    pub fn config(&self) -> BaseConfig {
        self.config
    }

    pub fn levels(&self) -> &LevelMapping {
        self.evaluator.levels()
    }

    pub fn apply(&self, x: &CantorPoint) -> Result<CantorPoint> {
        let interp = unembed(x)?;
        let out = self.evaluator.apply(&interp);
        let tail = if self.evaluator.certify_false_tail(&interp) {
            Tail::AllLo
        } else {
            Tail::Unknown
        };
        let Interpretation::Prefix { digits, .. } = out else {
            unreachable!("apply_tp yields digit prefixes")
        };
        Ok(CantorPoint { config: self.config, digits, tail })
    }

    /// Applies the operator to the point with digits `x` and an all-`lo` tail.
    pub fn apply_digits(&self, x: &[bool]) -> Result<CantorPoint> {
        self.apply(&CantorPoint::new(self.config, x.to_vec(), Tail::AllLo))
    }
}

/// One-shot form of [`EmbeddedOperator::apply`].
pub fn embedded_tp(
    program: &Program,
    levels: &LevelMapping,
    x: &CantorPoint,
    m: usize,
    depth: usize,
) -> Result<CantorPoint> {
    EmbeddedOperator::new(program, levels, m, depth, x.config())?.apply(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::DEFAULT_GROUNDING_CAP;
    use crate::herbrand::enumerate_base;
    use crate::parser::{parse_atom_list, parse_program};
    use alloc::string::ToString;
    use alloc::vec;

    const EVEN: &str = "even(0). even(s(s(X))) :- even(X).";

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn even_levels(n: usize) -> (Program, LevelMapping) {
        let p = parse_program(EVEN).unwrap();
        let l = enumerate_base(&p, n, DEFAULT_GROUNDING_CAP).unwrap();
        (p, l)
    }

    #[test]
    fn base_config_validation() {
        assert!(BaseConfig::new(2, 0, 1).is_err());
        assert!(BaseConfig::new(3, 2, 2).is_err());
        assert!(BaseConfig::new(3, 0, 3).is_err());
        assert!(BaseConfig::new(5, 0, 1).is_ok());
    }

    #[test]
    fn empty_interpretation_embeds_to_zero() {
        let (_, l) = even_levels(12);
        for k in [0, 1, 7, 12] {
            let c = embed(&Interpretation::empty(), &l, k, BaseConfig::default()).unwrap();
            assert!(c.digits().iter().all(|&d| !d));
            assert_eq!(c.tail(), Tail::AllLo);
            assert_eq!(c.exact_value(), Some(BigRational::zero()));
        }
    }

    #[test]
    fn single_fact_embeds_to_two_thirds() {
        let (_, l) = even_levels(3);
        let i = Interpretation::from_atoms(parse_atom_list("even(0)").unwrap()).unwrap();
        let c = embed(&i, &l, 1, BaseConfig::default()).unwrap();
        assert_eq!(c.digit_values().collect::<Vec<_>>(), [2]);
        assert_eq!(c.exact_value(), Some(q(2, 3)));
        assert_eq!(c.to_string(), "0.2₃");
    }

    #[test]
    fn least_model_prefix_value() {
        let (_, l) = even_levels(10);
        let digits: Vec<bool> = (0..10).map(|i| i % 2 == 0).collect();
        let i = Interpretation::prefix(digits, TailPolicy::AllFalse);
        let c = embed(&i, &l, 10, BaseConfig::default()).unwrap();
        assert_eq!(c.digit_values().collect::<Vec<_>>(), [2, 0, 2, 0, 2, 0, 2, 0, 2, 0]);
        // (3/4)(1 - 9^-5)
        let expected = q(3, 4) * (BigRational::one() - q(1, 59049));
        assert_eq!(c.exact_value(), Some(expected));
    }

    #[test]
    fn unembed_digits() {
        let (_, l) = even_levels(5);
        let c = CantorPoint::from_digit_values(BaseConfig::default(), &[2, 0, 2], Tail::AllLo).unwrap();
        let i = unembed(&c).unwrap();
        let atoms: Vec<String> = i.true_atoms_through(&l, 5).iter().map(|a| a.to_string()).collect();
        assert_eq!(atoms, ["even(0)", "even(s(s(0)))"]);
        let e = unembed(&CantorPoint::new(BaseConfig::default(), vec![], Tail::AllLo)).unwrap();
        assert!(e.true_atoms_through(&l, 5).is_empty());
        assert_eq!(
            CantorPoint::from_digit_values(BaseConfig::default(), &[1], Tail::AllLo),
            Err(Error::DigitOutOfAlphabet { position: 1, digit: 1 })
        );
        let unknown = CantorPoint::new(BaseConfig::default(), vec![true], Tail::Unknown);
        assert_eq!(unembed(&unknown), Err(Error::UnknownTail));
    }

    #[test]
    fn real_conversion() {
        let c = CantorPoint::new(BaseConfig::default(), vec![true], Tail::AllLo);
        let v = c.to_real();
        assert!((v.midpoint - 2.0 / 3.0).abs() <= f64::EPSILON);
        assert!(v.radius <= f64::EPSILON);
        assert!(v.contains(2.0 / 3.0));

        let all_hi = CantorPoint::new(BaseConfig::default(), vec![], Tail::AllHi);
        assert_eq!(all_hi.exact_value(), Some(BigRational::one()));
        assert_eq!(all_hi.to_real(), EmbeddedValue { midpoint: 1.0, radius: 0.0 });

        let digits: Vec<bool> = (0..10).map(|i| i % 2 == 0).collect();
        let c = CantorPoint::new(BaseConfig::default(), digits, Tail::Unknown);
        let (a, b) = c.interval();
        assert!(a <= q(3, 4) && q(3, 4) <= b);
        assert_eq!(&b - &a, BaseConfig::default().weight(10));
        assert!(c.to_real().contains(0.75));
        assert!(c.to_real().radius <= 0.5 * 3f64.powi(-10) * (1.0 + 1e-9));
    }

    #[test]
    fn embedded_operator_on_even() {
        let (p, l) = even_levels(14);
        let zero = CantorPoint::new(BaseConfig::default(), vec![], Tail::AllLo);
        let y = embedded_tp(&p, &l, &zero, 5, 5).unwrap();
        assert_eq!(y.digit_values().collect::<Vec<_>>(), [2, 0, 0, 0, 0]);
        assert_eq!(y.exact_value(), Some(q(2, 3)));

        let two_thirds = CantorPoint::new(BaseConfig::default(), vec![true], Tail::AllLo);
        let y = embedded_tp(&p, &l, &two_thirds, 5, 5).unwrap();
        assert_eq!(y.exact_value(), Some(q(20, 27)));

        let pattern: Vec<bool> = (0..12).map(|i| i % 2 == 0).collect();
        let x = CantorPoint::new(BaseConfig::default(), pattern.clone(), Tail::AllLo);
        let y = embedded_tp(&p, &l, &x, 12, 12).unwrap();
        assert_eq!(y.digits(), &pattern[..]);
        assert_eq!(y.tail(), Tail::Unknown);
    }

    #[test]
    fn alternative_alphabet() {
        let cfg = BaseConfig::new(4, 0, 1).unwrap();
        let c = CantorPoint::new(cfg, vec![true, true], Tail::AllLo);
        assert_eq!(c.exact_value(), Some(q(5, 16)));
        let hi = CantorPoint::new(cfg, vec![], Tail::AllHi);
        assert_eq!(hi.exact_value(), Some(q(1, 3)));
        assert_eq!(hi.to_string(), "0.(1)₄");
    }
}
