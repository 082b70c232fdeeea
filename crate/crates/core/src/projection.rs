//! Projection: the probability of a sentence given that an action is
//! performed. Exact for concrete actions, interval-valued for the four
//! abstract annotation variants.
//!
//! Query sentences may relate post-action to pre-action values through
//! `@start` atoms, so the 0/1 bounds are taken per pre-state over the set of
//! post-states the (possibly weakened) effect admits from that pre-state.

use crate::actions::{AbstractStyle, ActionDescription, ConditionSpec, EffectSpec, ProbSpec};
use crate::chronicle::apply_effect;
use crate::worldmodel::{ProbInterval, Sentence, State, StateDistribution, Vocabulary};
use crate::{Error, Result};

/// Per-branch contribution bounds, recorded for explainability.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BranchContribution {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub query: Sentence,
    pub interval: ProbInterval,
    pub branches: Vec<BranchContribution>,
}

impl ProjectionResult {
    fn from_contributions(query: Sentence, branches: Vec<BranchContribution>) -> ProjectionResult {
        let lo: f64 = branches.iter().map(|b| b.lo).sum();
        let hi: f64 = branches.iter().map(|b| b.hi).sum();
        ProjectionResult { query, interval: ProbInterval::clamped(lo, hi), branches }
    }
}

/// 0/1 truth bounds of `phi` over the post-states reachable from `pre`
/// under `effect`.
fn post_bounds(v: &Vocabulary, pre: &State, effect: &EffectSpec, phi: &Sentence) -> Result<(f64, f64)> {
    let posts = apply_effect(v, pre, effect)?;
    if posts.is_empty() {
        return Err(Error::DegenerateEffect);
    }
    let mut all = true;
    let mut any = false;
    for post in &posts {
        if phi.eval_pair(v, pre, post)? {
            any = true;
        } else {
            all = false;
        }
        if any && !all {
            break;
        }
    }
    Ok((f64::from(u8::from(all)), f64::from(u8::from(any))))
}

/// Exact contribution of a single-condition point-probability branch.
fn single_point_contribution(
    v: &Vocabulary,
    d0: &StateDistribution,
    cond: &Sentence,
    p: f64,
    effect: &EffectSpec,
    phi: &Sentence,
) -> Result<(f64, f64)> {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (s, w) in d0.entries() {
        if *w <= 0.0 || !cond.eval(v, s)? {
            continue;
        }
        let (l, u) = post_bounds(v, s, effect, phi)?;
        lo += w * p * l;
        hi += w * p * u;
    }
    Ok((lo, hi))
}

fn check_query(v: &Vocabulary, phi: &Sentence) -> Result<()> {
    phi.validate(v, true)
}

/// Exact projection of a concrete action: the summed branch contributions
/// over the initial distribution. The interval is degenerate.
pub fn project_concrete(
    v: &Vocabulary,
    a: &ActionDescription,
    d0: &StateDistribution,
    phi: &Sentence,
) -> Result<ProjectionResult> {
    let report = crate::actions::validate_concrete(a, v)?;
    if !report.is_empty() {
        return Err(Error::Validation(report.join("; ")));
    }
    check_query(v, phi)?;
    let mut branches = Vec::with_capacity(a.branches.len());
    for b in &a.branches {
        let (cond, p) = match (&b.condition, &b.prob) {
            (ConditionSpec::Single(c), ProbSpec::Point(p)) => (c, *p),
            _ => unreachable!("validated concrete branches are single/point"),
        };
        let (lo, hi) = single_point_contribution(v, d0, cond, p, &b.effect, phi)?;
        branches.push(BranchContribution { label: b.label.clone(), lo, hi });
    }
    Ok(ProjectionResult::from_contributions(phi.clone(), branches))
}

/// Intra-action method I projection: ungrouped branches contribute exactly;
/// list-annotated branches contribute the dot product of condition
/// probabilities and branch probabilities, scaled by the effect's 0/1
/// bounds per pre-state.
pub fn project_abstract_intra_i(
    v: &Vocabulary,
    a: &ActionDescription,
    d0: &StateDistribution,
    phi: &Sentence,
) -> Result<ProjectionResult> {
    check_query(v, phi)?;
    let mut branches = Vec::with_capacity(a.branches.len());
    for b in &a.branches {
        b.validate(v)?;
        let (lo, hi) = match (&b.condition, &b.prob) {
            (ConditionSpec::Single(c), ProbSpec::Point(p)) => {
                single_point_contribution(v, d0, c, *p, &b.effect, phi)?
            }
            (ConditionSpec::CondList(cs), ProbSpec::ProbList(ps)) => {
                // Conditions of one action are mutually exclusive, so for
                // each pre-state at most one list entry applies.
                let mut lo = 0.0;
                let mut hi = 0.0;
                for (s, w) in d0.entries() {
                    if *w <= 0.0 {
                        continue;
                    }
                    let mut p_here = 0.0;
                    for (c, p) in cs.iter().zip(ps) {
                        if c.eval(v, s)? {
                            p_here += p;
                        }
                    }
                    if p_here <= 0.0 {
                        continue;
                    }
                    let (l, u) = post_bounds(v, s, &b.effect, phi)?;
                    lo += w * p_here * l;
                    hi += w * p_here * u;
                }
                (lo, hi)
            }
            _ => {
                return Err(Error::Validation(format!(
                    "branch `{}` is not an intra method I annotation",
                    b.label
                )))
            }
        };
        branches.push(BranchContribution { label: b.label.clone(), lo, hi });
    }
    Ok(ProjectionResult::from_contributions(phi.clone(), branches))
}

/// Intra-action method II projection: disjunction condition with a
/// probability range per branch.
pub fn project_abstract_intra_ii(
    v: &Vocabulary,
    a: &ActionDescription,
    d0: &StateDistribution,
    phi: &Sentence,
) -> Result<ProjectionResult> {
    check_query(v, phi)?;
    let mut branches = Vec::with_capacity(a.branches.len());
    for b in &a.branches {
        b.validate(v)?;
        let (lo, hi) = match (&b.condition, &b.prob) {
            (ConditionSpec::Single(c), ProbSpec::Point(p)) => {
                single_point_contribution(v, d0, c, *p, &b.effect, phi)?
            }
            (ConditionSpec::Single(c), ProbSpec::Range { lo: plo, hi: phi_p }) => {
                let mut lo = 0.0;
                let mut hi = 0.0;
                for (s, w) in d0.entries() {
                    if *w <= 0.0 || !c.eval(v, s)? {
                        continue;
                    }
                    let (l, u) = post_bounds(v, s, &b.effect, phi)?;
                    lo += w * plo * l;
                    hi += w * phi_p * u;
                }
                (lo, hi)
            }
            _ => {
                return Err(Error::Validation(format!(
                    "branch `{}` is not an intra method II annotation",
                    b.label
                )))
            }
        };
        branches.push(BranchContribution { label: b.label.clone(), lo, hi });
    }
    Ok(ProjectionResult::from_contributions(phi.clone(), branches))
}

/// Inter-action method I projection: per branch, one (condition,
/// probability) pair per instance; the realized instance is unknown, so the
/// branch contributes the minimum and maximum over instances.
pub fn project_abstract_inter_i(
    v: &Vocabulary,
    a: &ActionDescription,
    d0: &StateDistribution,
    phi: &Sentence,
) -> Result<ProjectionResult> {
    check_query(v, phi)?;
    let mut list_len: Option<usize> = None;
    let mut branches = Vec::with_capacity(a.branches.len());
    for b in &a.branches {
        b.validate(v)?;
        let (lo, hi) = match (&b.condition, &b.prob) {
            (ConditionSpec::Single(c), ProbSpec::Point(p)) => {
                single_point_contribution(v, d0, c, *p, &b.effect, phi)?
            }
            (ConditionSpec::CondList(cs), ProbSpec::ProbList(ps)) => {
                if let Some(n) = list_len {
                    if n != cs.len() {
                        return Err(Error::Validation(format!(
                            "branch `{}` instance list length {} differs from {n}",
                            b.label,
                            cs.len()
                        )));
                    }
                } else {
                    list_len = Some(cs.len());
                }
                let mut lo = f64::INFINITY;
                let mut hi = 0.0f64;
                for (c, p) in cs.iter().zip(ps) {
                    let mut term_lo = 0.0;
                    let mut term_hi = 0.0;
                    for (s, w) in d0.entries() {
                        if *w <= 0.0 || !c.eval(v, s)? {
                            continue;
                        }
                        let (l, u) = post_bounds(v, s, &b.effect, phi)?;
                        term_lo += w * p * l;
                        term_hi += w * p * u;
                    }
                    lo = lo.min(term_lo);
                    hi = hi.max(term_hi);
                }
                (if lo.is_finite() { lo } else { 0.0 }, hi)
            }
            _ => {
                return Err(Error::Validation(format!(
                    "branch `{}` is not an inter method I annotation",
                    b.label
                )))
            }
        };
        branches.push(BranchContribution { label: b.label.clone(), lo, hi });
    }
    Ok(ProjectionResult::from_contributions(phi.clone(), branches))
}

/// Inter-action method II projection: conjunction/disjunction condition pair
/// with a probability range; the upper sum is capped at 1 because the
/// disjunction probabilities of different branches may overlap.
pub fn project_abstract_inter_ii(
    v: &Vocabulary,
    a: &ActionDescription,
    d0: &StateDistribution,
    phi: &Sentence,
) -> Result<ProjectionResult> {
    check_query(v, phi)?;
    let mut branches = Vec::with_capacity(a.branches.len());
    for b in &a.branches {
        b.validate(v)?;
        let (conj, disj, plo, phi_p) = match (&b.condition, &b.prob) {
            (ConditionSpec::Single(c), ProbSpec::Point(p)) => {
                let (lo, hi) = single_point_contribution(v, d0, c, *p, &b.effect, phi)?;
                branches.push(BranchContribution { label: b.label.clone(), lo, hi });
                continue;
            }
            (ConditionSpec::Single(c), ProbSpec::Range { lo, hi }) => (c, c, *lo, *hi),
            (ConditionSpec::ConjDisj { conj, disj }, ProbSpec::Range { lo, hi }) => {
                (conj, disj, *lo, *hi)
            }
            _ => {
                return Err(Error::Validation(format!(
                    "branch `{}` is not an inter method II annotation",
                    b.label
                )))
            }
        };
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (s, w) in d0.entries() {
            if *w <= 0.0 {
                continue;
            }
            let in_conj = conj.eval(v, s)?;
            let in_disj = disj.eval(v, s)?;
            if !in_conj && !in_disj {
                continue;
            }
            let (l, u) = post_bounds(v, s, &b.effect, phi)?;
            if in_conj {
                lo += w * plo * l;
            }
            if in_disj {
                hi += w * phi_p * u;
            }
        }
        branches.push(BranchContribution { label: b.label.clone(), lo, hi });
    }
    Ok(ProjectionResult::from_contributions(phi.clone(), branches))
}

/// Dispatch on the action's declared abstraction style; concrete actions
/// project exactly.
pub fn project(
    v: &Vocabulary,
    a: &ActionDescription,
    d0: &StateDistribution,
    phi: &Sentence,
) -> Result<ProjectionResult> {
    match a.style {
        None => project_concrete(v, a, d0, phi),
        Some(AbstractStyle::IntraI) => project_abstract_intra_i(v, a, d0, phi),
        Some(AbstractStyle::IntraII) => project_abstract_intra_ii(v, a, d0, phi),
        Some(AbstractStyle::InterI) => project_abstract_inter_i(v, a, d0, phi),
        Some(AbstractStyle::InterII) => project_abstract_inter_ii(v, a, d0, phi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{Branch, ValueConstraint};
    use crate::worldmodel::{Atom, Fluent, FluentDomain, Rel, Rhs, Value};
    use crate::EPS;

    fn fuel_vocab() -> Vocabulary {
        Vocabulary::new(vec![Fluent {
            name: "fuel".into(),
            domain: FluentDomain::IntRange(0, 12),
        }])
        .unwrap()
    }

    fn branch(label: &str, cond: Sentence, p: f64, effect: EffectSpec) -> Branch {
        Branch {
            label: label.into(),
            condition: ConditionSpec::Single(cond),
            prob: ProbSpec::Point(p),
            effect,
        }
    }

    fn fuel_delta(d: i64) -> EffectSpec {
        let mut e = EffectSpec::new();
        e.set("fuel", ValueConstraint::RelativeExact(d));
        e
    }

    #[test]
    fn drive_home_fuel_query_is_point_seven() {
        let v = fuel_vocab();
        let a = ActionDescription::concrete(
            "drive-home",
            1,
            vec![
                branch("a", Sentence::True, 0.7, fuel_delta(-8)),
                branch("b", Sentence::True, 0.3, fuel_delta(-5)),
            ],
        );
        let d0 = StateDistribution::point(
            &v,
            State::from_pairs(&v, &[("fuel".into(), Value::Int(12))]).unwrap(),
        )
        .unwrap();
        let q = Sentence::Atom(Atom {
            fluent: "fuel".into(),
            rel: Rel::Eq,
            rhs: Rhs::StartOffset { fluent: "fuel".into(), offset: -8 },
        });
        let r = project_concrete(&v, &a, &d0, &q).unwrap();
        assert!(r.interval.is_point());
        assert!((r.interval.lo - 0.7).abs() < EPS);
    }

    fn muddy_vocab() -> Vocabulary {
        Vocabulary::new(vec![Fluent { name: "muddy".into(), domain: FluentDomain::boolean() }])
            .unwrap()
    }

    #[test]
    fn absolute_effect_is_certain() {
        let v = muddy_vocab();
        let mut e = EffectSpec::new();
        e.set("muddy", ValueConstraint::Exact(Value::sym("T")));
        let a = ActionDescription::concrete("m", 1, vec![branch("a", Sentence::True, 1.0, e)]);
        let d0 = StateDistribution::point(
            &v,
            State::from_pairs(&v, &[("muddy".into(), Value::sym("F"))]).unwrap(),
        )
        .unwrap();
        let q = Sentence::atom("muddy", Rel::Eq, Value::sym("T"));
        let r = project_concrete(&v, &a, &d0, &q).unwrap();
        assert!((r.interval.lo - 1.0).abs() < EPS && r.interval.is_point());
    }

    #[test]
    fn conditional_branch_projection() {
        // Two conditions each prob 0.5 in d0; branch 0.1 sets muddy under c1,
        // no-op prob 1 under c2; P(muddy = T) = 0.05.
        let v = muddy_vocab();
        let c1 = Sentence::atom("muddy", Rel::Eq, Value::sym("F"));
        let c2 = Sentence::atom("muddy", Rel::Eq, Value::sym("T"));
        let mut set_muddy = EffectSpec::new();
        set_muddy.set("muddy", ValueConstraint::Exact(Value::sym("T")));
        let mut clear_muddy = EffectSpec::new();
        clear_muddy.set("muddy", ValueConstraint::Exact(Value::sym("F")));
        let a = ActionDescription::concrete(
            "c",
            1,
            vec![
                branch("a", c1.clone(), 0.1, set_muddy),
                branch("b", c1.clone(), 0.9, EffectSpec::new()),
                branch("c", c2.clone(), 1.0, clear_muddy),
            ],
        );
        let states = v.states();
        let d0 = StateDistribution::new(&v, states.iter().map(|s| (s.clone(), 0.5)).collect())
            .unwrap();
        let q = Sentence::atom("muddy", Rel::Eq, Value::sym("T"));
        let r = project_concrete(&v, &a, &d0, &q).unwrap();
        assert!((r.interval.lo - 0.05).abs() < EPS, "{:?}", r.interval);
    }

    #[test]
    fn query_true_and_false_bounds() {
        let v = muddy_vocab();
        let mut weak = EffectSpec::new();
        weak.set(
            "muddy",
            ValueConstraint::MaybeUnchanged(Box::new(ValueConstraint::Exact(Value::sym("T")))),
        );
        let a = ActionDescription {
            name: "w".into(),
            duration: 1,
            kind: crate::actions::ActionKind::Abstract,
            style: Some(AbstractStyle::IntraII),
            branches: vec![Branch {
                label: "a".into(),
                condition: ConditionSpec::Single(Sentence::True),
                prob: ProbSpec::Range { lo: 1.0, hi: 1.0 },
                effect: weak,
            }],
        };
        let d0 = StateDistribution::point(
            &v,
            State::from_pairs(&v, &[("muddy".into(), Value::sym("F"))]).unwrap(),
        )
        .unwrap();
        let rt = project_abstract_intra_ii(&v, &a, &d0, &Sentence::True).unwrap();
        assert!((rt.interval.lo - 1.0).abs() < EPS && (rt.interval.hi - 1.0).abs() < EPS);
        let rf = project_abstract_intra_ii(&v, &a, &d0, &Sentence::False).unwrap();
        assert!(rf.interval.lo.abs() < EPS && rf.interval.hi.abs() < EPS);
        // The weakened effect leaves muddy genuinely uncertain.
        let rq = project_abstract_intra_ii(
            &v,
            &a,
            &d0,
            &Sentence::atom("muddy", Rel::Eq, Value::sym("T")),
        )
        .unwrap();
        assert!(rq.interval.lo.abs() < EPS && (rq.interval.hi - 1.0).abs() < EPS);
    }
}
