//! Brute-force verification harnesses.
//!
//! The abstraction checker enumerates every semantically distinct sentence
//! over a small vocabulary and asserts that each concrete instance's exact
//! projected probability lies inside the abstract action's projected
//! interval. The planner checker compares search output against exhaustive
//! concrete-plan enumeration. Both run over seeded random cases.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abstraction::{
    inter_abstract_i, inter_abstract_ii, intra_abstract_i, intra_abstract_ii, pad_to_common_count,
    GroupingPlan,
};
use crate::actions::{
    merge_duplicate_effects, AbstractStyle, ActionDescription, Branch, ConditionSpec, EffectSpec,
    ProbSpec, ValueConstraint,
};
use crate::chronicle::apply_effect;
use crate::exec::map_collect;
use crate::planner::{search, Network};
use crate::projection::{project, project_concrete};
use crate::worldmodel::{
    Fluent, FluentDomain, Rel, Sentence, State, StateDistribution, Vocabulary,
};
use crate::{Error, Result, EPS};

/// Maximum state count for exhaustive sentence enumeration (2^16 sentences).
pub const MAX_ORACLE_STATES: usize = 16;

/// One canonical sentence per subset of the vocabulary's states, realized as
/// a disjunction of state-describing conjunctions (FALSE for the empty
/// subset).
pub fn all_sentences(v: &Vocabulary) -> Result<Vec<Sentence>> {
    let states = v.states();
    if states.len() > MAX_ORACLE_STATES {
        return Err(Error::Bound(format!(
            "{} states exceed the exhaustive sentence bound of {MAX_ORACLE_STATES}",
            states.len()
        )));
    }
    let conjs: Vec<Sentence> = states.iter().map(|s| state_conjunction(v, s)).collect();
    let mut out = Vec::with_capacity(1 << states.len());
    for mask in 0u32..(1u32 << states.len()) {
        let parts: Vec<Sentence> = conjs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, c)| c.clone())
            .collect();
        out.push(Sentence::disj(parts));
    }
    Ok(out)
}

fn state_conjunction(v: &Vocabulary, s: &State) -> Sentence {
    Sentence::conj(
        (0..v.len())
            .map(|i| Sentence::atom(&v.fluent(i).name, Rel::Eq, s.get(i).clone()))
            .collect(),
    )
}

#[derive(Debug, Clone)]
pub struct VerificationCase {
    pub id: u64,
    pub vocab: Vocabulary,
    pub instances: Vec<ActionDescription>,
    pub grouping: GroupingPlan,
    pub method: AbstractStyle,
    pub init: StateDistribution,
}

#[derive(Debug, Clone)]
pub struct Failure {
    pub case: u64,
    /// Index of the sentence in all_sentences order, where applicable.
    pub phi: Option<usize>,
    pub detail: String,
}

#[derive(Debug)]
pub struct VerificationReport {
    pub cases: usize,
    pub failures: Vec<Failure>,
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn is_sound(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Build the case's abstract action with the abstraction module. Inter
/// methods pad the instances to a common branch count first.
pub fn build_abstraction(case: &VerificationCase) -> Result<ActionDescription> {
    match (&case.grouping, case.method) {
        (GroupingPlan::Intra(sets), AbstractStyle::IntraI) => {
            intra_abstract_i("abs", &case.instances[0], sets)
        }
        (GroupingPlan::Intra(sets), AbstractStyle::IntraII) => {
            intra_abstract_ii("abs", &case.instances[0], sets)
        }
        (GroupingPlan::Inter(sets), method) => {
            let refs: Vec<&ActionDescription> = case.instances.iter().collect();
            let padded = pad_to_common_count(&refs)?;
            let prefs: Vec<&ActionDescription> = padded.iter().collect();
            match method {
                AbstractStyle::InterI => inter_abstract_i("abs", &prefs, sets),
                AbstractStyle::InterII => inter_abstract_ii("abs", &prefs, sets),
                _ => Err(Error::Validation("intra method with inter grouping".into())),
            }
        }
        _ => Err(Error::Validation("inter method with intra grouping".into())),
    }
}

/// For every sentence and every instance, check that the exact concrete
/// projection lies inside the abstract projection interval. Violations are
/// returned as data.
pub fn check_abstraction(case: &VerificationCase) -> Result<Vec<Failure>> {
    let abs = build_abstraction(case)?;
    check_against(case, &abs)
}

/// The containment check against an explicitly supplied abstract action
/// (used by the mutation-sensitivity tests).
pub fn check_against(case: &VerificationCase, abs: &ActionDescription) -> Result<Vec<Failure>> {
    let mut failures = Vec::new();
    let sentences = all_sentences(&case.vocab)?;
    for (i, phi) in sentences.iter().enumerate() {
        let abstract_interval = project(&case.vocab, abs, &case.init, phi)?.interval;
        for inst in &case.instances {
            let exact = project_concrete(&case.vocab, inst, &case.init, phi)?.interval;
            if !(abstract_interval.contains(exact.lo) && abstract_interval.contains(exact.hi)) {
                failures.push(Failure {
                    case: case.id,
                    phi: Some(i),
                    detail: format!(
                        "instance `{}`: value [{:.9}, {:.9}] outside abstract [{:.9}, {:.9}]",
                        inst.name,
                        exact.lo,
                        exact.hi,
                        abstract_interval.lo,
                        abstract_interval.hi
                    ),
                });
            }
        }
    }
    Ok(failures)
}

/// For every sentence, check that the method II interval contains the
/// method I interval built from the same grouping.
pub fn check_method_ordering(case: &VerificationCase) -> Result<Vec<Failure>> {
    let (m1, m2) = match case.method {
        AbstractStyle::IntraI | AbstractStyle::IntraII => {
            (AbstractStyle::IntraI, AbstractStyle::IntraII)
        }
        AbstractStyle::InterI | AbstractStyle::InterII => {
            (AbstractStyle::InterI, AbstractStyle::InterII)
        }
    };
    let c1 = VerificationCase { method: m1, ..case.clone() };
    let c2 = VerificationCase { method: m2, ..case.clone() };
    let a1 = build_abstraction(&c1)?;
    let a2 = build_abstraction(&c2)?;
    let mut failures = Vec::new();
    for (i, phi) in all_sentences(&case.vocab)?.iter().enumerate() {
        let i1 = project(&case.vocab, &a1, &case.init, phi)?.interval;
        let i2 = project(&case.vocab, &a2, &case.init, phi)?.interval;
        if !i2.contains_interval(&i1) {
            failures.push(Failure {
                case: case.id,
                phi: Some(i),
                detail: format!(
                    "method I [{:.9}, {:.9}] not within method II [{:.9}, {:.9}]",
                    i1.lo, i1.hi, i2.lo, i2.hi
                ),
            });
        }
    }
    Ok(failures)
}

/// Compare search output against exhaustive enumeration of every concrete
/// plan; the argmax sets must match exactly (tolerance 1e-9).
pub fn check_planner(net: &Network) -> Result<Vec<Failure>> {
    let plans = net.enumerate_concrete_plans(10_000)?;
    let mut best = f64::NEG_INFINITY;
    let mut eus = Vec::with_capacity(plans.len());
    for p in &plans {
        let (lo, hi) = net.expected_utility(p)?;
        if hi - lo > 1e-6 {
            return Err(Error::Validation(format!(
                "concrete plan {p:?} has a non-degenerate utility interval"
            )));
        }
        best = best.max(lo);
        eus.push(lo);
    }
    let mut argmax: Vec<Vec<String>> = plans
        .iter()
        .zip(&eus)
        .filter(|(_, &eu)| eu >= best - EPS)
        .map(|(p, _)| p.clone())
        .collect();
    argmax.sort();

    let out = search(net)?;
    let mut failures = Vec::new();
    if out.optimal != argmax {
        failures.push(Failure {
            case: 0,
            phi: None,
            detail: format!(
                "search argmax {:?} differs from exhaustive argmax {:?}",
                out.optimal, argmax
            ),
        });
    }
    if (out.eu.0 - best).abs() > 1e-6 {
        failures.push(Failure {
            case: 0,
            phi: None,
            detail: format!("search EU {} differs from exhaustive maximum {best}", out.eu.0),
        });
    }
    Ok(failures)
}

/// Walk every refinement step reachable from the root plan and check that
/// each child's expected-utility interval is contained in its parent's.
pub fn check_narrowing(net: &Network, limit: usize) -> Result<Vec<Failure>> {
    let mut failures = Vec::new();
    let mut open = vec![net.root_plan()?];
    let mut visited = 0usize;
    while let Some(plan) = open.pop() {
        if net.is_concrete_plan(&plan) {
            continue;
        }
        visited += 1;
        if visited > limit {
            return Err(Error::Bound(format!("more than {limit} abstract plans visited")));
        }
        let parent = net.expected_utility(&plan)?;
        for child in net.refine(&plan)? {
            let c = net.expected_utility(&child)?;
            if c.0 < parent.0 - EPS || c.1 > parent.1 + EPS {
                failures.push(Failure {
                    case: 0,
                    phi: None,
                    detail: format!(
                        "child {child:?} EU [{}, {}] escapes parent {plan:?} EU [{}, {}]",
                        c.0, c.1, parent.0, parent.1
                    ),
                });
            }
            open.push(child);
        }
    }
    Ok(failures)
}

fn case_rng(seed: u64, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ id.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_vocab(rng: &mut ChaCha8Rng) -> Vocabulary {
    // Weighted shapes keep most cases at ≤ 6 states so the exhaustive
    // sentence sweep stays fast; the bound of 4 fluents × 4 values is an
    // upper limit, not a target.
    let shapes: &[&[usize]] = &[
        &[2, 2], &[2, 2], &[2, 2], &[4], &[2, 3], &[2, 3], &[3], &[2, 2, 2], &[2, 4],
    ];
    let shape = shapes[rng.gen_range(0..shapes.len())];
    let fluents = shape
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            let domain = if size == 2 && rng.gen_bool(0.5) {
                FluentDomain::boolean()
            } else {
                FluentDomain::IntRange(0, size as i64 - 1)
            };
            Fluent { name: format!("f{i}"), domain }
        })
        .collect();
    Vocabulary::new(fluents).expect("generated vocabulary is valid")
}

fn random_init(rng: &mut ChaCha8Rng, v: &Vocabulary) -> StateDistribution {
    let states = v.states();
    let count = rng.gen_range(1..=states.len());
    let mut chosen = states;
    chosen.shuffle(rng);
    chosen.truncate(count);
    let weights: Vec<u32> = (0..count).map(|_| rng.gen_range(1..=5)).collect();
    let total: u32 = weights.iter().sum();
    let entries = chosen
        .into_iter()
        .zip(weights)
        .map(|(s, w)| (s, f64::from(w) / f64::from(total)))
        .collect();
    StateDistribution::new(v, entries).expect("generated distribution is valid")
}

/// Integer percentages summing to 100, so probability sums are exact within
/// floating-point tolerance.
fn random_probs(rng: &mut ChaCha8Rng, max_parts: usize) -> Vec<f64> {
    let parts = rng.gen_range(1..=max_parts);
    let mut cuts: Vec<u32> = (0..parts - 1).map(|_| rng.gen_range(1..100)).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut prev = 0;
    for c in &cuts {
        out.push(f64::from(c - prev) / 100.0);
        prev = *c;
    }
    out.push(f64::from(100 - prev) / 100.0);
    out
}

fn random_effect(
    rng: &mut ChaCha8Rng,
    v: &Vocabulary,
    cond_states: &[State],
) -> EffectSpec {
    'outer: loop {
        let mut e = EffectSpec::new();
        for i in 0..v.len() {
            if rng.gen_bool(0.5) {
                continue;
            }
            let f = v.fluent(i);
            let c = if f.domain.is_numeric() && rng.gen_bool(0.3) {
                ValueConstraint::RelativeExact(rng.gen_range(-2..=2))
            } else {
                let vals = f.domain.values();
                ValueConstraint::Exact(vals[rng.gen_range(0..vals.len())].clone())
            };
            e.set(&f.name, c);
        }
        // Relative effects must stay in-domain from every state the branch
        // can fire in; resample on overflow.
        for s in cond_states {
            if apply_effect(v, s, &e).is_err() {
                continue 'outer;
            }
        }
        return e;
    }
}

fn random_concrete_action(
    rng: &mut ChaCha8Rng,
    v: &Vocabulary,
    name: &str,
    duration: u64,
) -> ActionDescription {
    let states = v.states();
    let group_count = rng.gen_range(1..=3.min(states.len()));
    let mut assignment: Vec<usize> = states.iter().map(|_| rng.gen_range(0..group_count)).collect();
    // Ensure every group is non-empty by reassigning round-robin.
    for g in 0..group_count {
        if !assignment.contains(&g) {
            let idx = rng.gen_range(0..assignment.len());
            assignment[idx] = g;
        }
    }
    let mut branches = Vec::new();
    for g in 0..group_count {
        let group_states: Vec<State> = states
            .iter()
            .zip(&assignment)
            .filter(|(_, &a)| a == g)
            .map(|(s, _)| s.clone())
            .collect();
        if group_states.is_empty() {
            continue;
        }
        let cond = Sentence::disj(
            group_states.iter().map(|s| state_conjunction(v, s)).collect(),
        );
        for (i, p) in random_probs(rng, 3).into_iter().enumerate() {
            branches.push(Branch {
                label: format!("g{g}b{i}"),
                condition: ConditionSpec::Single(cond.clone()),
                prob: ProbSpec::Point(p),
                effect: random_effect(rng, v, &group_states),
            });
        }
    }
    let a = ActionDescription::concrete(name, duration, branches);
    // Identical effects under one condition are merged, keeping validation
    // clean without rejecting the sample.
    merge_duplicate_effects(&a).expect("generated action is concrete")
}

fn random_intra_grouping(rng: &mut ChaCha8Rng, a: &ActionDescription) -> Vec<Vec<String>> {
    let mut labels: Vec<String> = a.branches.iter().map(|b| b.label.clone()).collect();
    labels.shuffle(rng);
    let set_count = rng.gen_range(1..=labels.len());
    let mut sets: Vec<Vec<String>> = vec![Vec::new(); set_count];
    for (i, l) in labels.into_iter().enumerate() {
        sets[i % set_count].push(l);
    }
    sets
}

fn random_inter_grouping(
    rng: &mut ChaCha8Rng,
    padded: &[ActionDescription],
) -> Vec<Vec<(String, String)>> {
    let width = padded[0].branches.len();
    let mut sets: Vec<Vec<(String, String)>> = vec![Vec::new(); width];
    for a in padded {
        let mut slots: Vec<usize> = (0..width).collect();
        slots.shuffle(rng);
        for (b, &slot) in a.branches.iter().zip(&slots) {
            sets[slot].push((a.name.clone(), b.label.clone()));
        }
    }
    sets
}

/// Deterministic random case for one abstraction method.
pub fn random_case(method: AbstractStyle, seed: u64, id: u64) -> VerificationCase {
    let mut rng = case_rng(seed, id);
    let vocab = random_vocab(&mut rng);
    let init = random_init(&mut rng, &vocab);
    let duration = rng.gen_range(1..=3);
    let (instances, grouping) = match method {
        AbstractStyle::IntraI | AbstractStyle::IntraII => {
            let a = random_concrete_action(&mut rng, &vocab, "inst0", duration);
            let grouping = GroupingPlan::Intra(random_intra_grouping(&mut rng, &a));
            (vec![a], grouping)
        }
        AbstractStyle::InterI | AbstractStyle::InterII => {
            let count = rng.gen_range(2..=3);
            let instances: Vec<ActionDescription> = (0..count)
                .map(|i| random_concrete_action(&mut rng, &vocab, &format!("inst{i}"), duration))
                .collect();
            let refs: Vec<&ActionDescription> = instances.iter().collect();
            let padded = pad_to_common_count(&refs).expect("instances have branches");
            let grouping = GroupingPlan::Inter(random_inter_grouping(&mut rng, &padded));
            (instances, grouping)
        }
    };
    VerificationCase { id, vocab, instances, grouping, method, init }
}

fn merge_failures(results: Vec<Result<Vec<Failure>>>) -> Result<Vec<Failure>> {
    let mut all = Vec::new();
    for r in results {
        all.extend(r?);
    }
    all.sort_by_key(|f| (f.case, f.phi));
    Ok(all)
}

/// Run the Definition-1 soundness suite for one method over seeded cases.
pub fn run_abstraction_suite(
    method: AbstractStyle,
    cases: u64,
    seed: u64,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let ids: Vec<u64> = (0..cases).collect();
    let results = map_collect(&ids, |&id| check_abstraction(&random_case(method, seed, id)));
    Ok(VerificationReport {
        cases: ids.len(),
        failures: merge_failures(results)?,
        elapsed: start.elapsed(),
    })
}

/// Run the method-ordering suite (method II intervals contain method I) over
/// seeded cases, alternating intra and inter groupings.
pub fn run_ordering_suite(cases: u64, seed: u64) -> Result<VerificationReport> {
    let start = Instant::now();
    let ids: Vec<u64> = (0..cases).collect();
    let results = map_collect(&ids, |&id| {
        let method = if id % 2 == 0 { AbstractStyle::IntraI } else { AbstractStyle::InterI };
        check_method_ordering(&random_case(method, seed, id))
    });
    Ok(VerificationReport {
        cases: ids.len(),
        failures: merge_failures(results)?,
        elapsed: start.elapsed(),
    })
}

/// Run the planner admissibility suite over seeded random networks.
pub fn run_planner_suite(networks: u64, seed: u64) -> Result<VerificationReport> {
    let start = Instant::now();
    let ids: Vec<u64> = (0..networks).collect();
    let results = map_collect(&ids, |&id| {
        let net = crate::netgen::random_network(seed ^ id)?;
        let mut failures = check_planner(&net)?;
        for f in &mut failures {
            f.case = id;
        }
        Ok(failures)
    });
    Ok(VerificationReport {
        cases: ids.len(),
        failures: merge_failures(results)?,
        elapsed: start.elapsed(),
    })
}

/// Ways to deliberately break an abstract action; the checker must flag
/// each of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Shrink a probability range to its midpoint.
    NarrowProbability,
    /// Replace a weakened effect constraint with a strictly stronger one.
    StrengthenEffect,
    /// Drop the last disjunct from a disjunction condition.
    DropDisjunct,
}

/// Apply a mutation to an abstract action, if a site for it exists.
pub fn corrupt(abs: &ActionDescription, m: Mutation) -> Option<ActionDescription> {
    let mut out = abs.clone();
    match m {
        Mutation::NarrowProbability => {
            for b in &mut out.branches {
                if let ProbSpec::Range { lo, hi } = b.prob {
                    if hi - lo > EPS {
                        let mid = (lo + hi) / 2.0;
                        b.prob = ProbSpec::Range { lo: mid, hi: mid };
                        return Some(out);
                    }
                }
            }
            None
        }
        Mutation::StrengthenEffect => {
            for b in &mut out.branches {
                let fluents: Vec<String> = b.effect.iter().map(|(f, _)| f.clone()).collect();
                for f in fluents {
                    let stronger = match b.effect.get(&f).expect("fluent present") {
                        ValueConstraint::AmongSet(vs) if vs.len() > 1 => {
                            Some(ValueConstraint::Exact(vs[0].clone()))
                        }
                        ValueConstraint::RelativeRange(lo, hi) if lo < hi => {
                            Some(ValueConstraint::RelativeExact(*lo))
                        }
                        ValueConstraint::MaybeUnchanged(inner) => Some((**inner).clone()),
                        _ => None,
                    };
                    if let Some(s) = stronger {
                        b.effect.set(&f, s);
                        return Some(out);
                    }
                }
            }
            None
        }
        Mutation::DropDisjunct => {
            for b in &mut out.branches {
                let dropped = match &b.condition {
                    ConditionSpec::Single(Sentence::Or(parts)) if parts.len() > 1 => {
                        Some(ConditionSpec::Single(Sentence::disj(
                            parts[..parts.len() - 1].to_vec(),
                        )))
                    }
                    ConditionSpec::ConjDisj { conj, disj: Sentence::Or(parts) }
                        if parts.len() > 1 =>
                    {
                        Some(ConditionSpec::ConjDisj {
                            conj: conj.clone(),
                            disj: Sentence::disj(parts[..parts.len() - 1].to_vec()),
                        })
                    }
                    _ => None,
                };
                if let Some(c) = dropped {
                    b.condition = c;
                    return Some(out);
                }
            }
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldmodel::models;

    #[test]
    fn sentence_counts() {
        let v1 = Vocabulary::new(vec![Fluent { name: "a".into(), domain: FluentDomain::boolean() }])
            .unwrap();
        let s1 = all_sentences(&v1).unwrap();
        assert_eq!(s1.len(), 4);
        assert_eq!(s1[0], Sentence::False);
        let v2 = Vocabulary::new(vec![
            Fluent { name: "a".into(), domain: FluentDomain::boolean() },
            Fluent { name: "b".into(), domain: FluentDomain::boolean() },
        ])
        .unwrap();
        assert_eq!(all_sentences(&v2).unwrap().len(), 16);
        // Sentences are semantically distinct.
        let mut model_sets: Vec<Vec<State>> = all_sentences(&v1)
            .unwrap()
            .iter()
            .map(|s| models(s, &v1).unwrap())
            .collect();
        model_sets.sort();
        model_sets.dedup();
        assert_eq!(model_sets.len(), 4);
    }

    #[test]
    fn random_cases_are_sound_smoke() {
        for method in [
            AbstractStyle::IntraI,
            AbstractStyle::IntraII,
            AbstractStyle::InterI,
            AbstractStyle::InterII,
        ] {
            for id in 0..5 {
                let case = random_case(method, 7, id);
                let failures = check_abstraction(&case).unwrap();
                assert!(failures.is_empty(), "{method:?} case {id}: {failures:?}");
            }
        }
    }

    #[test]
    fn identity_grouping_is_sound_and_degenerate() {
        let case = random_case(AbstractStyle::IntraI, 11, 0);
        let a = &case.instances[0];
        let sets: Vec<Vec<String>> = a.branches.iter().map(|b| vec![b.label.clone()]).collect();
        let case = VerificationCase { grouping: GroupingPlan::Intra(sets), ..case.clone() };
        assert!(check_abstraction(&case).unwrap().is_empty());
    }

    fn intra_ii_case_with_ranges() -> (VerificationCase, ActionDescription) {
        // Search the seeded cases for one whose method II abstraction has a
        // proper probability range, a weakened effect and a disjunction.
        for id in 0..200 {
            let case = random_case(AbstractStyle::IntraII, 23, id);
            let abs = build_abstraction(&case).unwrap();
            let has_range = corrupt(&abs, Mutation::NarrowProbability).is_some();
            let has_weak = corrupt(&abs, Mutation::StrengthenEffect).is_some();
            let has_disj = corrupt(&abs, Mutation::DropDisjunct).is_some();
            if has_range && has_weak && has_disj {
                return (case, abs);
            }
        }
        panic!("no suitable case found");
    }

    #[test]
    fn mutations_are_detected() {
        // Find a case where each corruption actually changes some projected
        // interval; the checker must then flag it.
        let mut remaining =
            vec![Mutation::NarrowProbability, Mutation::StrengthenEffect, Mutation::DropDisjunct];
        for id in 0..500 {
            if remaining.is_empty() {
                break;
            }
            let case = random_case(AbstractStyle::IntraII, 23, id);
            let abs = build_abstraction(&case).unwrap();
            remaining.retain(|&m| {
                let Some(bad) = corrupt(&abs, m) else { return true };
                let failures = check_against(&case, &bad).unwrap();
                failures.is_empty()
            });
        }
        assert!(
            remaining.is_empty(),
            "no detected counterexample for mutations {remaining:?}"
        );
    }

    #[test]
    fn mutation_sites_exist() {
        let (_, abs) = intra_ii_case_with_ranges();
        assert!(corrupt(&abs, Mutation::NarrowProbability).is_some());
        assert!(corrupt(&abs, Mutation::StrengthenEffect).is_some());
        assert!(corrupt(&abs, Mutation::DropDisjunct).is_some());
    }

    #[test]
    fn planner_checks_random_networks_smoke() {
        for seed in 0..5 {
            let net = crate::netgen::random_network(seed).unwrap();
            assert!(check_planner(&net).unwrap().is_empty(), "seed {seed}");
            assert!(check_narrowing(&net, 10_000).unwrap().is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn ordering_suite_smoke() {
        let report = run_ordering_suite(10, 99).unwrap();
        assert!(report.is_sound(), "{:?}", report.failures);
    }
}
