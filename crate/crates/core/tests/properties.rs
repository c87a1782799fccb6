use std::collections::BTreeSet;

use nsi_core::cantor::{embed, unembed};
use nsi_core::consequence::required_depth;
use nsi_core::fractal::{
    chaos_orbit, chaos_selectors, encode_ifs_as_recurrent_net, fif_from_nodes,
};
use nsi_core::network::{build_core_network, gradient_check, train_ffn, FeedforwardNet};
use nsi_core::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;

const EVEN: &str = "even(0). even(s(s(X))) :- even(X).";
const NAT: &str = "nat(0). nat(s(X)) :- nat(X). p(X, f(X)) :- nat(X), not q(X). q(s(s(0))).";

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn three_pow(k: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(3).pow(k as u32))
}

/// Propositional program over atoms `p0..p{n-1}`.
fn prop_program() -> impl Strategy<Value = (usize, String)> {
    (1usize..=6).prop_flat_map(|n| {
        let lit = (0..n, any::<bool>());
        let clause = (0..n, prop::collection::vec(lit, 0..4));
        (Just(n), prop::collection::vec(clause, 0..8)).prop_map(|(n, clauses)| {
            // Mention every atom so the signature has all n predicates.
            let mut text: String = (0..n).map(|k| format!("p{k} :- p{k}, not p{k}.\n")).collect();
            for (head, body) in clauses {
                text.push_str(&format!("p{head}"));
                for (i, (a, pos)) in body.iter().enumerate() {
                    text.push_str(if i == 0 { " :- " } else { ", " });
                    if !pos {
                        text.push_str("not ");
                    }
                    text.push_str(&format!("p{a}"));
                }
                text.push_str(".\n");
            }
            (n, text)
        })
    })
}

/// Brute force: heads of clauses whose bodies hold in `state`.
fn brute_tp(p: &Program, names: &[String], state: &[bool]) -> Vec<bool> {
    let idx = |a: &Atom| names.iter().position(|n| *n == a.predicate).unwrap();
    let mut out = vec![false; names.len()];
    for c in p.clauses() {
        if c.body.iter().all(|l| state[idx(&l.atom)] == l.positive) {
            out[idx(&c.head)] = true;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_programs_parse_back((_, text) in prop_program()) {
        let p = parse_program(&text).unwrap();
        let again = parse_program(&p.to_string()).unwrap();
        prop_assert_eq!(p, again);
    }

    #[test]
    fn threshold_net_matches_brute_force((n, text) in prop_program(), bits in 0u32..64) {
        let p = parse_program(&text).unwrap();
        let net = build_core_network(&p).unwrap();
        let state: Vec<bool> = (0..n).map(|k| bits >> k & 1 == 1).collect();
        prop_assert_eq!(net.forward(&state), brute_tp(&p, &net.atoms, &state));
    }

    #[test]
    fn apply_tp_matches_threshold_net((n, text) in prop_program(), bits in 0u32..64) {
        let p = parse_program(&text).unwrap();
        let net = build_core_network(&p).unwrap();
        let l = enumerate_base(&p, n, DEFAULT_GROUNDING_CAP).unwrap();
        let state: Vec<bool> = (0..n).map(|k| bits >> k & 1 == 1).collect();
        let out = apply_tp(&p, &l, &Interpretation::prefix(state.clone(), TailPolicy::AllFalse), n, 1).unwrap();
        prop_assert_eq!(net.encode(&out), net.forward(&state));
    }

    #[test]
    fn grounding_grows_with_depth(d in 1usize..6) {
        let p = parse_program(NAT).unwrap();
        let small = ground_program(&p, d, DEFAULT_GROUNDING_CAP).unwrap();
        let large = ground_program(&p, d + 1, DEFAULT_GROUNDING_CAP).unwrap();
        prop_assert!(small.clauses().all(|c| large.contains(c)));
        prop_assert!(small.len() <= large.len());
    }

    #[test]
    fn base_prefixes_are_stable(n in 1usize..30, extra in 0usize..30) {
        let p = parse_program(NAT).unwrap();
        let a = enumerate_base(&p, n, DEFAULT_GROUNDING_CAP).unwrap();
        let b = enumerate_base(&p, n + extra, DEFAULT_GROUNDING_CAP).unwrap();
        prop_assert_eq!(a.atoms(), &b.atoms()[..n]);
    }

    #[test]
    fn embedding_round_trips(digits in prop::collection::vec(any::<bool>(), 0..12)) {
        let p = parse_program(EVEN).unwrap();
        let l = enumerate_base(&p, 12, DEFAULT_GROUNDING_CAP).unwrap();
        let k = digits.len();
        let i = Interpretation::prefix(digits.clone(), TailPolicy::AllFalse);
        let c = embed(&i, &l, k, BaseConfig::default()).unwrap();
        prop_assert_eq!(c.digits(), &digits[..]);
        prop_assert_eq!(unembed(&c).unwrap(), i);
    }

    #[test]
    fn embedded_distance_is_ultrametric(
        a in prop::collection::vec(any::<bool>(), 10),
        b in prop::collection::vec(any::<bool>(), 10),
        c in prop::collection::vec(any::<bool>(), 10),
    ) {
        let p = parse_program(EVEN).unwrap();
        let l = enumerate_base(&p, 10, DEFAULT_GROUNDING_CAP).unwrap();
        let interp = |d: &Vec<bool>| Interpretation::prefix(d.clone(), TailPolicy::AllFalse);
        // Query-topology distance 2^-n at the first disagreement n.
        let dist = |x: &Vec<bool>, y: &Vec<bool>| {
            first_disagreement(&interp(x), &interp(y), &l).map_or(0.0, |n| 0.5f64.powi(n as i32))
        };
        prop_assert!(dist(&a, &c) <= dist(&a, &b).max(dist(&b, &c)));
        if let Some(n) = first_disagreement(&interp(&a), &interp(&b), &l) {
            let va = embed(&interp(&a), &l, 10, BaseConfig::default()).unwrap().exact_value().unwrap();
            let vb = embed(&interp(&b), &l, 10, BaseConfig::default()).unwrap().exact_value().unwrap();
            let gap = (va - vb).abs() * three_pow(n);
            prop_assert!(gap >= q(1, 1) && gap <= q(3, 1));
        }
    }

    #[test]
    fn output_intervals_refine(digits in prop::collection::vec(any::<bool>(), 4), m in 4usize..10) {
        let p = parse_program(EVEN).unwrap();
        let l = enumerate_base(&p, 14, DEFAULT_GROUNDING_CAP).unwrap();
        let at = |m: usize| {
            let d = required_depth(&p, &l, m).0.unwrap();
            EmbeddedOperator::new(&p, &l, m, d, BaseConfig::default())
                .unwrap()
                .apply_digits(&digits)
                .unwrap()
                .with_tail(Tail::Unknown)
                .interval()
        };
        let (lo, hi) = at(m);
        let (lo2, hi2) = at(m + 1);
        prop_assert!(lo <= lo2 && hi2 <= hi);
    }

    #[test]
    fn lipschitz_estimate_grows_with_pairs(pairs in 0usize..200, more in 0usize..200, seed in any::<u64>()) {
        let p = parse_program(EVEN).unwrap();
        let l = enumerate_base(&p, 10, DEFAULT_GROUNDING_CAP).unwrap();
        let d = required_depth(&p, &l, 8).0.unwrap();
        let a = estimate_lipschitz(&p, &l, pairs, seed, 8, d, BaseConfig::default()).unwrap();
        let b = estimate_lipschitz(&p, &l, pairs + more, seed, 8, d, BaseConfig::default()).unwrap();
        prop_assert!(a.ratio <= b.ratio);
    }

    #[test]
    fn zero_scaling_attractor_is_piecewise_linear(
        ys in prop::collection::vec(-50i64..50, 3..9),
        probes in prop::collection::vec(0.0f64..=1.0, 20),
    ) {
        let n = ys.len() - 1;
        let nodes: Vec<_> = ys.iter().enumerate().map(|(i, &y)| (q(i as i64, n as i64), q(y, 10))).collect();
        let fif = fif_from_nodes(nodes, BigRational::zero()).unwrap();
        prop_assert!(fif.verify_endpoint_conditions());
        let ifs = fif.to_ifs().unwrap();
        for x in probes {
            let (v, bound) = eval_fif(&ifs, x, 64).unwrap();
            let exact = fif.linear_interpolant(&BigRational::from_float(x).unwrap()).unwrap();
            prop_assert!(bound == 0.0);
            prop_assert!((v - exact.to_f64().unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn endpoint_conditions_hold_exactly(
        ys in prop::collection::vec(-9i64..9, 3..8),
        dn in -9i64..=9,
    ) {
        let n = ys.len() - 1;
        let nodes: Vec<_> = ys.iter().enumerate().map(|(i, &y)| (q(i as i64 * i as i64, 7), q(y, 3))).collect();
        let fif = fif_from_nodes(nodes, q(dn, 10)).unwrap();
        prop_assert_eq!(fif.maps.len(), n);
        prop_assert!(fif.verify_endpoint_conditions());
    }

    #[test]
    fn recurrent_net_replays_chaos_orbit(seed in any::<u64>(), dn in -9i64..=9) {
        let nodes = vec![(q(0, 1), q(1, 5)), (q(1, 4), q(3, 5)), (q(3, 4), q(-1, 5)), (q(1, 1), q(2, 5))];
        let ifs = fif_from_nodes(nodes, q(dn, 10)).unwrap().to_ifs().unwrap();
        let sel = chaos_selectors(seed, ifs.maps.len(), 1_000);
        let net = encode_ifs_as_recurrent_net(&ifs);
        prop_assert_eq!(net.run_indices(&sel).unwrap(), chaos_orbit(&ifs, &sel));
    }

    #[test]
    fn analytic_gradient_matches_differences(
        hidden in 1usize..6,
        seed in any::<u64>(),
        samples in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..10),
    ) {
        let net = FeedforwardNet::random(hidden, seed);
        prop_assert!(gradient_check(&net, &samples) <= 1e-5);
    }
}

#[test]
fn training_is_deterministic() {
    let samples: Vec<_> = (0..20).map(|i| (i as f64 / 19.0, (i as f64 / 7.0).sin())).collect();
    let cfg = TrainConfig { hidden: 3, epochs: 500, learning_rate: 0.3, seed: 42 };
    let (a, ra) = train_ffn(&samples, &cfg).unwrap();
    let (b, rb) = train_ffn(&samples, &cfg).unwrap();
    let bits = |n: &FeedforwardNet| n.params().iter().map(|p| p.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(ra, rb);
}

#[test]
fn exhaustive_small_propositional_soundness() {
    let text = "a :- b, not c. b :- not a. c :- a, b. c :- d. d.";
    let p = parse_program(text).unwrap();
    let net = build_core_network(&p).unwrap();
    let n = net.atoms.len();
    let mut images = BTreeSet::new();
    for bits in 0u32..1 << n {
        let s: Vec<bool> = (0..n).map(|k| bits >> k & 1 == 1).collect();
        let out = net.forward(&s);
        assert_eq!(out, brute_tp(&p, &net.atoms, &s));
        images.insert(out);
    }
    assert!(images.len() > 1);
}
