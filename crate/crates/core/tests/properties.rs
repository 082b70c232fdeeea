//! Randomized invariant checks: the effect-constraint join is a semantic
//! upper bound and behaves like a lattice join, sentence formatting round
//! trips through the parser, concrete chronicle probabilities sum to one,
//! projection intervals stay inside [0, 1], and search outcomes are
//! internally consistent.

use std::collections::BTreeSet;

use proptest::prelude::*;

use refineplan::abstraction::join_constraints;
use refineplan::actions::{AbstractStyle, ValueConstraint};
use refineplan::chronicle::{enumerate_chronicles, resolve_constraint};
use refineplan::domain::{format_sentence, parse_query};
use refineplan::netgen::random_network;
use refineplan::oracle::{build_abstraction, random_case};
use refineplan::planner::search;
use refineplan::projection::project;
use refineplan::worldmodel::{Fluent, FluentDomain, Rel, Sentence, Value, Vocabulary};
use refineplan::EPS;

// --- constraint join -------------------------------------------------------

/// A vocabulary wide enough that no generated constraint can overflow it:
/// generated absolute values sit in 0..=4, relative offsets in -3..=3, and
/// pre-states below are drawn from 0..=4, so results stay within -3..=7.
fn wide_vocab() -> Vocabulary {
    Vocabulary::new(vec![Fluent {
        name: "f".into(),
        domain: FluentDomain::IntRange(-20, 20),
    }])
    .unwrap()
}

fn arb_value() -> impl Strategy<Value = Value> {
    (0i64..=4).prop_map(Value::Int)
}

fn arb_core_constraint() -> impl Strategy<Value = ValueConstraint> {
    prop_oneof![
        arb_value().prop_map(ValueConstraint::Exact),
        proptest::collection::btree_set(0i64..=4, 1..=3).prop_map(|s| {
            ValueConstraint::AmongSet(s.into_iter().map(Value::Int).collect())
        }),
        (-3i64..=3).prop_map(ValueConstraint::RelativeExact),
        (-3i64..=3, 0i64..=3).prop_map(|(lo, w)| ValueConstraint::RelativeRange(lo, lo + w)),
        Just(ValueConstraint::Any),
    ]
}

fn arb_constraint() -> impl Strategy<Value = ValueConstraint> {
    arb_core_constraint().prop_flat_map(|c| {
        prop_oneof![
            Just(c.clone()),
            Just(ValueConstraint::MaybeUnchanged(Box::new(c))),
        ]
    })
}

/// The set of post-values a constraint admits from one pre-state.
fn admitted(c: &ValueConstraint, pre: i64) -> BTreeSet<Value> {
    resolve_constraint(&wide_vocab(), "f", &Value::Int(pre), c)
        .expect("wide domain cannot overflow")
        .into_iter()
        .collect()
}

/// Semantic fingerprint: admitted post-values for every sampled pre-state.
fn semantics(c: &ValueConstraint) -> Vec<BTreeSet<Value>> {
    (0i64..=4).map(|pre| admitted(c, pre)).collect()
}

proptest! {
    #[test]
    fn join_is_an_upper_bound(a in arb_constraint(), b in arb_constraint()) {
        let j = join_constraints(&a, &b);
        for pre in 0i64..=4 {
            let joined = admitted(&j, pre);
            prop_assert!(admitted(&a, pre).is_subset(&joined));
            prop_assert!(admitted(&b, pre).is_subset(&joined));
        }
    }

    #[test]
    fn join_is_idempotent(a in arb_constraint()) {
        prop_assert_eq!(semantics(&join_constraints(&a, &a)), semantics(&a));
    }

    #[test]
    fn join_is_commutative(a in arb_constraint(), b in arb_constraint()) {
        prop_assert_eq!(
            semantics(&join_constraints(&a, &b)),
            semantics(&join_constraints(&b, &a))
        );
    }

    #[test]
    fn join_is_associative_up_to_widening(
        a in arb_constraint(),
        b in arb_constraint(),
        c in arb_constraint(),
    ) {
        // Both associations admit all three inputs; they may widen
        // differently, but each must contain every input everywhere.
        let l = join_constraints(&join_constraints(&a, &b), &c);
        let r = join_constraints(&a, &join_constraints(&b, &c));
        for pre in 0i64..=4 {
            for x in [&a, &b, &c] {
                prop_assert!(admitted(x, pre).is_subset(&admitted(&l, pre)));
                prop_assert!(admitted(x, pre).is_subset(&admitted(&r, pre)));
            }
        }
    }
}

// --- sentence formatting ---------------------------------------------------

fn arb_sentence() -> impl Strategy<Value = Sentence> {
    let rel = prop_oneof![
        Just(Rel::Eq), Just(Rel::Ne), Just(Rel::Lt),
        Just(Rel::Le), Just(Rel::Gt), Just(Rel::Ge),
    ];
    let leaf = prop_oneof![
        Just(Sentence::True),
        Just(Sentence::False),
        ("f[0-2]", rel, prop_oneof![
            (0i64..=9).prop_map(Value::Int),
            "[TF]".prop_map(|s| Value::Sym(s)),
        ])
            .prop_map(|(f, r, v)| Sentence::atom(&f, r, v)),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|s| Sentence::Not(Box::new(s))),
            proptest::collection::vec(inner.clone(), 2..=3).prop_map(Sentence::And),
            proptest::collection::vec(inner, 2..=3).prop_map(Sentence::Or),
        ]
    })
}

proptest! {
    #[test]
    fn sentence_formatting_reaches_a_fixed_point(s in arb_sentence()) {
        // The parser normalizes degenerate connectives (e.g. a one-element
        // conjunction), so one parse canonicalizes; after that, formatting
        // and parsing are exact inverses.
        let canon = parse_query(&format_sentence(&s)).expect("formatted sentence parses");
        let text = format_sentence(&canon);
        let reparsed = parse_query(&text).expect("canonical text parses");
        prop_assert_eq!(&reparsed, &canon, "text was: {}", text);
        prop_assert_eq!(format_sentence(&reparsed), text);
    }
}

// --- chronicles and projection ---------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn concrete_chronicle_probabilities_sum_to_one(seed in any::<u64>()) {
        let case = random_case(AbstractStyle::IntraI, seed, 0);
        let inst = &case.instances[0];
        let set = enumerate_chronicles(&case.vocab, &[inst], &case.init).unwrap();
        let (lo, hi) = set.probability_sums();
        prop_assert!((lo - 1.0).abs() < 1e-9, "lower sum {}", lo);
        prop_assert!((hi - 1.0).abs() < 1e-9, "upper sum {}", hi);
    }

    #[test]
    fn projection_intervals_stay_probabilities(seed in any::<u64>(), m in 0usize..4) {
        let method = [
            AbstractStyle::IntraI, AbstractStyle::IntraII,
            AbstractStyle::InterI, AbstractStyle::InterII,
        ][m];
        let case = random_case(method, seed, 1);
        let abs = build_abstraction(&case).unwrap();
        let f = case.vocab.fluent(0);
        let phi = Sentence::atom(&f.name, Rel::Eq, f.domain.values()[0].clone());
        let r = project(&case.vocab, &abs, &case.init, &phi).unwrap();
        prop_assert!(-EPS <= r.interval.lo);
        prop_assert!(r.interval.lo <= r.interval.hi + EPS);
        prop_assert!(r.interval.hi <= 1.0 + EPS);
    }

    #[test]
    fn search_outcomes_are_internally_consistent(seed in any::<u64>()) {
        let net = random_network(seed).unwrap();
        let out = search(&net).unwrap();
        prop_assert!(out.eu.0 <= out.eu.1 + EPS);
        prop_assert!(net.is_concrete_plan(&out.plan));
        prop_assert!(out.optimal.contains(&out.plan));
        let mut sorted = out.optimal.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(&sorted, &out.optimal, "optimal set is sorted and unique");
        prop_assert!(out.stats.concrete_examined as u128 <= out.stats.total_concrete);
    }
}
