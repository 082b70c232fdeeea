//! Construction of abstract action descriptions: effect weakening on the
//! per-fluent constraint lattice, the two intra-action methods and the two
//! inter-action methods, plus condition-pair weakening for the
//! conjunction/disjunction form.

use crate::actions::{
    pad_branches, AbstractStyle, ActionDescription, ActionKind, Branch, ConditionSpec, EffectSpec,
    ProbSpec, ValueConstraint,
};
use crate::chronicle::resolve_constraint;
use crate::worldmodel::{entails, Sentence, Value, Vocabulary};
use crate::{Error, Result};

/// Caller-supplied branch grouping. For intra methods the sets partition one
/// action's branch labels; for inter methods they partition the branches of
/// all instances, at most one branch per instance per set.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupingPlan {
    Intra(Vec<Vec<String>>),
    Inter(Vec<Vec<(String, String)>>),
}

/// Constraint stripped of its maybe-unchanged wrapper, plus the wrapper flag.
fn normalize(c: &ValueConstraint) -> (ValueConstraint, bool) {
    match c {
        ValueConstraint::MaybeUnchanged(inner) => ((**inner).clone(), true),
        other => (other.clone(), false),
    }
}

fn absolute_values(c: &ValueConstraint) -> Option<Vec<Value>> {
    match c {
        ValueConstraint::Exact(v) => Some(vec![v.clone()]),
        ValueConstraint::AmongSet(vs) => Some(vs.clone()),
        _ => None,
    }
}

fn relative_bounds(c: &ValueConstraint) -> Option<(i64, i64)> {
    match c {
        ValueConstraint::RelativeExact(d) => Some((*d, *d)),
        ValueConstraint::RelativeRange(lo, hi) => Some((*lo, *hi)),
        _ => None,
    }
}

/// Least upper bound of two maybe-stripped constraints.
fn join_core(a: &ValueConstraint, b: &ValueConstraint) -> ValueConstraint {
    if let (Some(mut va), Some(vb)) = (absolute_values(a), absolute_values(b)) {
        va.extend(vb);
        va.sort();
        va.dedup();
        return if va.len() == 1 {
            ValueConstraint::Exact(va.pop().unwrap())
        } else {
            ValueConstraint::AmongSet(va)
        };
    }
    if let (Some((alo, ahi)), Some((blo, bhi))) = (relative_bounds(a), relative_bounds(b)) {
        let (lo, hi) = (alo.min(blo), ahi.max(bhi));
        return if lo == hi {
            ValueConstraint::RelativeExact(lo)
        } else {
            ValueConstraint::RelativeRange(lo, hi)
        };
    }
    // Mixed absolute/relative (or either side already Any): only the
    // unconstrained top is above both.
    ValueConstraint::Any
}

/// Join of two per-fluent constraints in the weakening lattice.
pub fn join_constraints(a: &ValueConstraint, b: &ValueConstraint) -> ValueConstraint {
    let (ca, ma) = normalize(a);
    let (cb, mb) = normalize(b);
    let core = join_core(&ca, &cb);
    if (ma || mb) && core != ValueConstraint::Any {
        ValueConstraint::MaybeUnchanged(Box::new(core))
    } else {
        core
    }
}

/// Least weakening entailed by every input effect: per fluent, the lattice
/// join of the inputs' constraints, where an input that leaves the fluent
/// unchanged contributes the maybe-unchanged wrapper.
pub fn weaken_effects(effects: &[&EffectSpec]) -> Result<EffectSpec> {
    if effects.is_empty() {
        return Err(Error::Validation("cannot weaken an empty effect list".into()));
    }
    let mut fluents: Vec<String> = effects
        .iter()
        .flat_map(|e| e.iter().map(|(f, _)| f.clone()))
        .collect();
    fluents.sort();
    fluents.dedup();

    let mut out = EffectSpec::new();
    for f in &fluents {
        let mut acc: Option<ValueConstraint> = None;
        let mut some_unchanged = false;
        for e in effects {
            match e.get(f) {
                Some(c) => {
                    acc = Some(match acc {
                        None => c.clone(),
                        Some(prev) => join_constraints(&prev, c),
                    });
                }
                None => some_unchanged = true,
            }
        }
        let mut joined = acc.expect("fluent mentioned by at least one effect");
        if some_unchanged {
            let (core, _) = normalize(&joined);
            joined = if core == ValueConstraint::Any {
                ValueConstraint::Any
            } else {
                ValueConstraint::MaybeUnchanged(Box::new(core))
            };
        }
        out.set(f, joined);
    }
    Ok(out)
}

/// Whether constraint `a` entails `b` on `fluent`: for every pre-state value
/// the set of values `a` admits is a subset of those `b` admits. Pre-values
/// on which `a` itself overflows the domain are vacuous.
pub fn constraint_entails(
    v: &Vocabulary,
    fluent: &str,
    a: &ValueConstraint,
    b: &ValueConstraint,
) -> Result<bool> {
    let i = v.require(fluent)?;
    for pre in v.fluent(i).domain.values() {
        let va = match resolve_constraint(v, fluent, &pre, a) {
            Ok(vals) => vals,
            Err(Error::DomainOverflow { .. }) => continue,
            Err(e) => return Err(e),
        };
        let vb = match resolve_constraint(v, fluent, &pre, b) {
            Ok(vals) => vals,
            Err(Error::DomainOverflow { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        if !va.iter().all(|x| vb.contains(x)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether effect `a` entails effect `b` fluent-wise (unmentioned fluents
/// behave as the identity constraint).
pub fn effect_entails(v: &Vocabulary, a: &EffectSpec, b: &EffectSpec) -> Result<bool> {
    let mut fluents: Vec<&String> =
        a.iter().map(|(f, _)| f).chain(b.iter().map(|(f, _)| f)).collect();
    fluents.sort();
    fluents.dedup();
    for f in fluents {
        let idx = v.require(f)?;
        match (a.get(f), b.get(f)) {
            (Some(ca), Some(cb)) => {
                if !constraint_entails(v, f, ca, cb)? {
                    return Ok(false);
                }
            }
            (None, Some(cb)) => {
                // Unchanged must be admitted by cb for every pre-value.
                for pre in v.fluent(idx).domain.values() {
                    match resolve_constraint(v, f, &pre, cb) {
                        Ok(vals) => {
                            if !vals.contains(&pre) {
                                return Ok(false);
                            }
                        }
                        Err(Error::DomainOverflow { .. }) => return Ok(false),
                        Err(e) => return Err(e),
                    }
                }
            }
            (Some(ca), None) => {
                // ca must pin the fluent to its pre-value for every pre-value
                // on which it does not overflow.
                for pre in v.fluent(idx).domain.values() {
                    match resolve_constraint(v, f, &pre, ca) {
                        Ok(vals) => {
                            if vals.iter().any(|x| x != &pre) {
                                return Ok(false);
                            }
                        }
                        Err(Error::DomainOverflow { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
            (None, None) => {}
        }
    }
    Ok(true)
}

fn single_cond(b: &Branch) -> Result<&Sentence> {
    match &b.condition {
        ConditionSpec::Single(c) => Ok(c),
        _ => Err(Error::Unsupported(format!(
            "branch `{}` already carries list annotations; nested method I abstraction is rejected",
            b.label
        ))),
    }
}

fn point_prob(b: &Branch) -> Result<f64> {
    match b.prob {
        ProbSpec::Point(p) => Ok(p),
        _ => Err(Error::Unsupported(format!(
            "branch `{}` does not carry a point probability",
            b.label
        ))),
    }
}

fn range_prob(b: &Branch) -> Result<(f64, f64)> {
    match b.prob {
        ProbSpec::Point(p) => Ok((p, p)),
        ProbSpec::Range { lo, hi } => Ok((lo, hi)),
        ProbSpec::ProbList(_) => Err(Error::Unsupported(format!(
            "branch `{}` carries a probability list; method II input expects points or ranges",
            b.label
        ))),
    }
}

/// Check a label partition of one action's branches and return the grouped
/// branches per set, in original branch order.
fn resolve_intra_sets<'a>(
    a: &'a ActionDescription,
    sets: &[Vec<String>],
) -> Result<Vec<Vec<&'a Branch>>> {
    let mut seen: Vec<&str> = Vec::new();
    let mut out = Vec::with_capacity(sets.len());
    for set in sets {
        if set.is_empty() {
            return Err(Error::Validation("empty grouping set".into()));
        }
        let mut members = Vec::with_capacity(set.len());
        for label in set {
            if seen.contains(&label.as_str()) {
                return Err(Error::Validation(format!(
                    "branch `{label}` appears in more than one grouping set"
                )));
            }
            seen.push(label);
            let b = a
                .branches
                .iter()
                .find(|b| &b.label == label)
                .ok_or_else(|| {
                    Error::Validation(format!("action `{}` has no branch `{label}`", a.name))
                })?;
            members.push(b);
        }
        members.sort_by_key(|b| a.branches.iter().position(|x| x.label == b.label));
        out.push(members);
    }
    if seen.len() != a.branches.len() {
        return Err(Error::Validation(format!(
            "grouping covers {} of {} branches of `{}`",
            seen.len(),
            a.branches.len(),
            a.name
        )));
    }
    Ok(out)
}

fn joined_label(members: &[&Branch]) -> String {
    members.iter().map(|b| b.label.as_str()).collect::<Vec<_>>().join("|")
}

fn dedupe_labels(branches: &mut [Branch]) {
    for i in 0..branches.len() {
        let mut label = branches[i].label.clone();
        let mut suffix = 1;
        while branches[..i].iter().any(|b| b.label == label) {
            suffix += 1;
            label = format!("{}#{suffix}", branches[i].label);
        }
        branches[i].label = label;
    }
}

/// Intra-action abstraction method I: each grouping set becomes one branch
/// carrying the list of grouped conditions and probabilities; sets whose
/// branches share a single condition collapse to that condition with the
/// summed probability.
pub fn intra_abstract_i(
    name: &str,
    a: &ActionDescription,
    sets: &[Vec<String>],
) -> Result<ActionDescription> {
    let groups = resolve_intra_sets(a, sets)?;
    let mut branches = Vec::with_capacity(groups.len());
    for members in &groups {
        if members.len() == 1 {
            let b = members[0];
            single_cond(b)?;
            point_prob(b)?;
            branches.push(b.clone());
            continue;
        }
        let conds: Vec<&Sentence> = members
            .iter()
            .map(|b| single_cond(b))
            .collect::<Result<_>>()?;
        let probs: Vec<f64> = members.iter().map(|b| point_prob(b)).collect::<Result<_>>()?;
        let effects: Vec<&EffectSpec> = members.iter().map(|b| &b.effect).collect();
        let effect = weaken_effects(&effects)?;
        let label = joined_label(members);
        if conds.windows(2).all(|w| w[0] == w[1]) {
            branches.push(Branch {
                label,
                condition: ConditionSpec::Single(conds[0].clone()),
                prob: ProbSpec::Point(probs.iter().sum()),
                effect,
            });
        } else {
            branches.push(Branch {
                label,
                condition: ConditionSpec::CondList(conds.into_iter().cloned().collect()),
                prob: ProbSpec::ProbList(probs),
                effect,
            });
        }
    }
    dedupe_labels(&mut branches);
    Ok(ActionDescription {
        name: name.to_string(),
        duration: a.duration,
        kind: ActionKind::Abstract,
        style: Some(AbstractStyle::IntraI),
        branches,
    })
}

/// Intra-action abstraction method II: each grouping set becomes one branch
/// with the disjunction of the grouped conditions and the min/max
/// probability range.
pub fn intra_abstract_ii(
    name: &str,
    a: &ActionDescription,
    sets: &[Vec<String>],
) -> Result<ActionDescription> {
    let groups = resolve_intra_sets(a, sets)?;
    let mut branches = Vec::with_capacity(groups.len());
    for members in &groups {
        // Branches sharing a condition are alternatives that fire together
        // under it, so their probabilities add before the range is taken;
        // otherwise merging (c, 0.3) and (c, 0.7) would wrongly bound the
        // firing probability under c by 0.7 instead of 1.
        let mut per_cond: Vec<(&Sentence, f64, f64)> = Vec::new();
        for b in members {
            let c = single_cond(b)?;
            let (blo, bhi) = range_prob(b)?;
            if let Some(entry) = per_cond.iter_mut().find(|(cc, _, _)| *cc == c) {
                entry.1 += blo;
                entry.2 += bhi;
            } else {
                per_cond.push((c, blo, bhi));
            }
        }
        let conds: Vec<&Sentence> = per_cond.iter().map(|(c, _, _)| *c).collect();
        let effects: Vec<&EffectSpec> = members.iter().map(|b| &b.effect).collect();
        let lo = per_cond.iter().map(|e| e.1).fold(f64::INFINITY, f64::min).min(1.0);
        let hi = per_cond.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max).min(1.0);
        branches.push(Branch {
            label: joined_label(members),
            condition: ConditionSpec::Single(Sentence::disj(
                conds.into_iter().cloned().collect(),
            )),
            prob: ProbSpec::Range { lo, hi },
            effect: weaken_effects(&effects)?,
        });
    }
    dedupe_labels(&mut branches);
    Ok(ActionDescription {
        name: name.to_string(),
        duration: a.duration,
        kind: ActionKind::Abstract,
        style: Some(AbstractStyle::IntraII),
        branches,
    })
}

/// Check an inter grouping against the instances; returns, per set, the
/// member branch (or `None` for a padded position) per instance index.
fn resolve_inter_sets<'a>(
    instances: &'a [&ActionDescription],
    sets: &[Vec<(String, String)>],
) -> Result<Vec<Vec<Option<&'a Branch>>>> {
    if instances.is_empty() {
        return Err(Error::Validation("inter-action abstraction needs at least one instance".into()));
    }
    let mut names: Vec<&str> = instances.iter().map(|a| a.name.as_str()).collect();
    names.sort();
    names.dedup();
    if names.len() != instances.len() {
        return Err(Error::Validation("instance action names must be distinct".into()));
    }
    if instances.iter().any(|a| a.duration != instances[0].duration) {
        return Err(Error::Unsupported(
            "inter-action abstraction requires equal instance durations".into(),
        ));
    }
    let mut used: Vec<Vec<bool>> = instances.iter().map(|a| vec![false; a.branches.len()]).collect();
    let mut out = Vec::with_capacity(sets.len());
    for set in sets {
        if set.is_empty() {
            return Err(Error::Validation("empty grouping set".into()));
        }
        let mut row: Vec<Option<&Branch>> = vec![None; instances.len()];
        for (inst_name, label) in set {
            let k = instances
                .iter()
                .position(|a| &a.name == inst_name)
                .ok_or_else(|| Error::Validation(format!("unknown instance `{inst_name}`")))?;
            if row[k].is_some() {
                return Err(Error::Validation(format!(
                    "grouping set takes more than one branch from `{inst_name}`"
                )));
            }
            let (i, b) = instances[k]
                .branches
                .iter()
                .enumerate()
                .find(|(_, b)| &b.label == label)
                .ok_or_else(|| {
                    Error::Validation(format!("action `{inst_name}` has no branch `{label}`"))
                })?;
            if used[k][i] {
                return Err(Error::Validation(format!(
                    "branch `{label}` of `{inst_name}` appears in more than one set"
                )));
            }
            used[k][i] = true;
            row[k] = Some(b);
        }
        out.push(row);
    }
    for (k, flags) in used.iter().enumerate() {
        if let Some(i) = flags.iter().position(|u| !u) {
            return Err(Error::Validation(format!(
                "branch `{}` of `{}` is not covered by the grouping",
                instances[k].branches[i].label, instances[k].name
            )));
        }
    }
    Ok(out)
}

fn inter_label(row: &[Option<&Branch>]) -> String {
    row.iter()
        .flatten()
        .map(|b| b.label.as_str())
        .collect::<Vec<_>>()
        .join("|")
}

/// Inter-action abstraction method I: each set carries one (condition,
/// probability) pair per instance, padded with (FALSE, 0) where an instance
/// contributes no branch; the branch count equals the number of sets.
pub fn inter_abstract_i(
    name: &str,
    instances: &[&ActionDescription],
    sets: &[Vec<(String, String)>],
) -> Result<ActionDescription> {
    for a in instances {
        for b in &a.branches {
            single_cond(b)?;
            point_prob(b)?;
        }
    }
    let rows = resolve_inter_sets(instances, sets)?;
    let mut branches = Vec::with_capacity(rows.len());
    for row in &rows {
        let mut conds = Vec::with_capacity(row.len());
        let mut probs = Vec::with_capacity(row.len());
        let mut effects: Vec<&EffectSpec> = Vec::new();
        for slot in row {
            match slot {
                Some(b) => {
                    conds.push(single_cond(b)?.clone());
                    probs.push(point_prob(b)?);
                    effects.push(&b.effect);
                }
                None => {
                    conds.push(Sentence::False);
                    probs.push(0.0);
                }
            }
        }
        branches.push(Branch {
            label: inter_label(row),
            condition: ConditionSpec::CondList(conds),
            prob: ProbSpec::ProbList(probs),
            effect: weaken_effects(&effects)?,
        });
    }
    dedupe_labels(&mut branches);
    Ok(ActionDescription {
        name: name.to_string(),
        duration: instances[0].duration,
        kind: ActionKind::Abstract,
        style: Some(AbstractStyle::InterI),
        branches,
    })
}

/// Inter-action abstraction method II: each set carries the conjunction and
/// disjunction of the grouped conditions and the min/max probability range.
/// Instances may themselves be method II abstractions (deep hierarchies).
pub fn inter_abstract_ii(
    name: &str,
    instances: &[&ActionDescription],
    sets: &[Vec<(String, String)>],
) -> Result<ActionDescription> {
    let rows = resolve_inter_sets(instances, sets)?;
    let n = instances.len();
    let mut branches = Vec::with_capacity(rows.len());
    for row in &rows {
        let mut conjs = Vec::new();
        let mut disjs = Vec::new();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut effects: Vec<&EffectSpec> = Vec::new();
        let members = row.iter().flatten().count();
        for b in row.iter().flatten() {
            let (c, d) = match &b.condition {
                ConditionSpec::Single(c) => (c.clone(), c.clone()),
                ConditionSpec::ConjDisj { conj, disj } => (conj.clone(), disj.clone()),
                ConditionSpec::CondList(_) => {
                    return Err(Error::Unsupported(format!(
                        "branch `{}` carries list annotations; method II input expects \
                         single or conjunction/disjunction conditions",
                        b.label
                    )))
                }
            };
            if !conjs.contains(&c) {
                conjs.push(c);
            }
            if !disjs.contains(&d) {
                disjs.push(d);
            }
            let (blo, bhi) = range_prob(b)?;
            lo = lo.min(blo);
            hi = hi.max(bhi);
            effects.push(&b.effect);
        }
        if members < n {
            // Padded against (FALSE, 0) branches of the missing instances.
            conjs.push(Sentence::False);
            lo = 0.0;
        }
        branches.push(Branch {
            label: inter_label(row),
            condition: ConditionSpec::ConjDisj {
                conj: Sentence::conj(conjs),
                disj: Sentence::disj(disjs),
            },
            prob: ProbSpec::Range { lo, hi },
            effect: weaken_effects(&effects)?,
        });
    }
    dedupe_labels(&mut branches);
    Ok(ActionDescription {
        name: name.to_string(),
        duration: instances[0].duration,
        kind: ActionKind::Abstract,
        style: Some(AbstractStyle::InterII),
        branches,
    })
}

/// Further weaken a conjunction/disjunction condition pair: the new
/// conjunction must entail the old one and the new disjunction must be
/// entailed by the old one.
pub fn weaken_condition_pair(
    v: &Vocabulary,
    conj: &Sentence,
    disj: &Sentence,
    new_conj: &Sentence,
    new_disj: &Sentence,
) -> Result<ConditionSpec> {
    if !entails(new_conj, conj, v)? {
        return Err(Error::Validation(
            "replacement conjunction does not entail the original conjunction".into(),
        ));
    }
    if !entails(disj, new_disj, v)? {
        return Err(Error::Validation(
            "original disjunction does not entail the replacement disjunction".into(),
        ));
    }
    if !entails(new_conj, new_disj, v)? {
        return Err(Error::Validation(
            "replacement conjunction does not entail the replacement disjunction".into(),
        ));
    }
    Ok(ConditionSpec::ConjDisj { conj: new_conj.clone(), disj: new_disj.clone() })
}

/// Equalize instance branch counts by (FALSE, 0) padding before grouping.
pub fn pad_to_common_count(instances: &[&ActionDescription]) -> Result<Vec<ActionDescription>> {
    let max = instances.iter().map(|a| a.branches.len()).max().unwrap_or(0);
    instances.iter().map(|a| pad_branches(a, max)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldmodel::{Fluent, FluentDomain, Rel};

    fn vocab() -> Vocabulary {
        Vocabulary::new(vec![
            Fluent { name: "fuel".into(), domain: FluentDomain::IntRange(0, 12) },
            Fluent { name: "muddy".into(), domain: FluentDomain::boolean() },
        ])
        .unwrap()
    }

    fn fuel_delta(d: i64) -> EffectSpec {
        let mut e = EffectSpec::new();
        e.set("fuel", ValueConstraint::RelativeExact(d));
        e
    }

    #[test]
    fn weaken_relative_effects_to_range() {
        let a = fuel_delta(-8);
        let b = fuel_delta(-5);
        let w = weaken_effects(&[&a, &b]).unwrap();
        assert_eq!(w.get("fuel"), Some(&ValueConstraint::RelativeRange(-8, -5)));
    }

    #[test]
    fn weaken_singleton_is_identity() {
        let a = fuel_delta(-8);
        assert_eq!(weaken_effects(&[&a]).unwrap(), a);
    }

    #[test]
    fn weaken_changed_vs_unchanged_is_maybe() {
        let mut a = EffectSpec::new();
        a.set("muddy", ValueConstraint::Exact(Value::sym("T")));
        let b = EffectSpec::new();
        let w = weaken_effects(&[&a, &b]).unwrap();
        assert_eq!(
            w.get("muddy"),
            Some(&ValueConstraint::MaybeUnchanged(Box::new(ValueConstraint::Exact(
                Value::sym("T")
            ))))
        );
    }

    #[test]
    fn join_is_idempotent_and_commutative() {
        let cases = [
            ValueConstraint::Exact(Value::Int(3)),
            ValueConstraint::AmongSet(vec![Value::Int(1), Value::Int(2)]),
            ValueConstraint::RelativeExact(-2),
            ValueConstraint::RelativeRange(-3, 1),
            ValueConstraint::MaybeUnchanged(Box::new(ValueConstraint::Exact(Value::Int(5)))),
            ValueConstraint::Any,
        ];
        for a in &cases {
            assert_eq!(join_constraints(a, a), {
                let (core, m) = normalize(a);
                if m && core != ValueConstraint::Any {
                    ValueConstraint::MaybeUnchanged(Box::new(core))
                } else {
                    core
                }
            });
            for b in &cases {
                assert_eq!(join_constraints(a, b), join_constraints(b, a));
                for c in &cases {
                    assert_eq!(
                        join_constraints(&join_constraints(a, b), c),
                        join_constraints(a, &join_constraints(b, c))
                    );
                }
            }
        }
    }

    #[test]
    fn every_input_entails_the_join() {
        let v = vocab();
        let a = ValueConstraint::RelativeExact(-2);
        let b = ValueConstraint::Exact(Value::Int(4));
        let j = join_constraints(&a, &b);
        assert!(constraint_entails(&v, "fuel", &a, &j).unwrap());
        assert!(constraint_entails(&v, "fuel", &b, &j).unwrap());
        assert!(!constraint_entails(&v, "fuel", &j, &a).unwrap());
    }

    fn snowing_action() -> ActionDescription {
        let snowing = |val: &str| Sentence::atom("muddy", Rel::Eq, Value::sym(val));
        ActionDescription::concrete(
            "mountain",
            1,
            vec![
                Branch {
                    label: "a".into(),
                    condition: ConditionSpec::Single(snowing("T")),
                    prob: ProbSpec::Point(0.9),
                    effect: fuel_delta(-9),
                },
                Branch {
                    label: "b".into(),
                    condition: ConditionSpec::Single(snowing("T")),
                    prob: ProbSpec::Point(0.1),
                    effect: fuel_delta(-8),
                },
                Branch {
                    label: "c".into(),
                    condition: ConditionSpec::Single(snowing("F")),
                    prob: ProbSpec::Point(0.8),
                    effect: fuel_delta(-6),
                },
                Branch {
                    label: "d".into(),
                    condition: ConditionSpec::Single(snowing("F")),
                    prob: ProbSpec::Point(0.2),
                    effect: fuel_delta(-7),
                },
            ],
        )
    }

    #[test]
    fn intra_i_singleton_grouping_is_identity_up_to_annotation() {
        let a = snowing_action();
        let sets: Vec<Vec<String>> =
            a.branches.iter().map(|b| vec![b.label.clone()]).collect();
        let out = intra_abstract_i("m'", &a, &sets).unwrap();
        assert_eq!(out.branches, a.branches);
        assert_eq!(out.style, Some(AbstractStyle::IntraI));
    }

    #[test]
    fn intra_i_same_condition_collapses_to_sum() {
        let a = snowing_action();
        let sets = vec![vec!["a".to_string(), "b".to_string()], vec!["c".into(), "d".into()]];
        let out = intra_abstract_i("m'", &a, &sets).unwrap();
        assert_eq!(out.branches.len(), 2);
        assert!(matches!(&out.branches[0].condition, ConditionSpec::Single(_)));
        assert!(matches!(out.branches[0].prob, ProbSpec::Point(p) if (p - 1.0).abs() < 1e-12));
        assert_eq!(
            out.branches[0].effect.get("fuel"),
            Some(&ValueConstraint::RelativeRange(-9, -8))
        );
    }

    #[test]
    fn intra_i_cross_condition_grouping_keeps_lists() {
        let a = snowing_action();
        let sets = vec![vec!["a".to_string(), "c".to_string()], vec!["b".into(), "d".into()]];
        let out = intra_abstract_i("m'", &a, &sets).unwrap();
        assert_eq!(out.branches.len(), 2);
        match (&out.branches[0].condition, &out.branches[0].prob) {
            (ConditionSpec::CondList(cs), ProbSpec::ProbList(ps)) => {
                assert_eq!(cs.len(), 2);
                assert_eq!(ps, &vec![0.9, 0.8]);
            }
            other => panic!("expected lists, got {other:?}"),
        }
    }

    #[test]
    fn intra_ii_grouping_gives_disjunction_and_range() {
        let a = snowing_action();
        let sets = vec![vec!["a".to_string(), "c".to_string()], vec!["b".into(), "d".into()]];
        let out = intra_abstract_ii("m'", &a, &sets).unwrap();
        assert_eq!(out.branches.len(), 2);
        match (&out.branches[0].condition, &out.branches[0].prob) {
            (ConditionSpec::Single(Sentence::Or(_)), ProbSpec::Range { lo, hi }) => {
                assert_eq!((*lo, *hi), (0.8, 0.9));
            }
            other => panic!("expected disjunction/range, got {other:?}"),
        }
        // Singleton sets get a degenerate range.
        let singles: Vec<Vec<String>> =
            a.branches.iter().map(|b| vec![b.label.clone()]).collect();
        let out = intra_abstract_ii("m''", &a, &singles).unwrap();
        assert!(matches!(out.branches[0].prob, ProbSpec::Range { lo, hi } if lo == hi));
    }

    fn valley_action() -> ActionDescription {
        ActionDescription::concrete(
            "valley",
            1,
            vec![
                Branch {
                    label: "i".into(),
                    condition: ConditionSpec::Single(Sentence::True),
                    prob: ProbSpec::Point(0.8),
                    effect: fuel_delta(-5),
                },
                Branch {
                    label: "j".into(),
                    condition: ConditionSpec::Single(Sentence::True),
                    prob: ProbSpec::Point(0.2),
                    effect: fuel_delta(-6),
                },
            ],
        )
    }

    fn inter_sets() -> Vec<Vec<(String, String)>> {
        vec![
            vec![("mountain".into(), "a".into()), ("valley".into(), "i".into())],
            vec![("mountain".into(), "b".into())],
            vec![("mountain".into(), "c".into()), ("valley".into(), "j".into())],
            vec![("mountain".into(), "d".into())],
        ]
    }

    #[test]
    fn inter_i_pads_missing_instances() {
        let m = snowing_action();
        let vl = valley_action();
        let out = inter_abstract_i("drive", &[&m, &vl], &inter_sets()).unwrap();
        assert_eq!(out.branches.len(), 4);
        match (&out.branches[1].condition, &out.branches[1].prob) {
            (ConditionSpec::CondList(cs), ProbSpec::ProbList(ps)) => {
                assert_eq!(cs[1], Sentence::False);
                assert_eq!(ps[1], 0.0);
            }
            other => panic!("expected padded lists, got {other:?}"),
        }
    }

    #[test]
    fn inter_ii_pad_forces_false_conjunction() {
        let m = snowing_action();
        let vl = valley_action();
        let out = inter_abstract_ii("drive", &[&m, &vl], &inter_sets()).unwrap();
        match (&out.branches[1].condition, &out.branches[1].prob) {
            (ConditionSpec::ConjDisj { conj, .. }, ProbSpec::Range { lo, .. }) => {
                assert_eq!(conj, &Sentence::False);
                assert_eq!(*lo, 0.0);
            }
            other => panic!("expected conj/disj with zero lower bound, got {other:?}"),
        }
    }

    #[test]
    fn inter_ii_identical_instances_degenerate() {
        let m = snowing_action();
        let mut m2 = m.clone();
        m2.name = "mountain2".into();
        let sets: Vec<Vec<(String, String)>> = m
            .branches
            .iter()
            .map(|b| {
                vec![("mountain".to_string(), b.label.clone()), ("mountain2".to_string(), b.label.clone())]
            })
            .collect();
        let out = inter_abstract_ii("drive", &[&m, &m2], &sets).unwrap();
        for (b, orig) in out.branches.iter().zip(&m.branches) {
            match (&b.condition, &b.prob) {
                (ConditionSpec::ConjDisj { conj, disj }, ProbSpec::Range { lo, hi }) => {
                    assert_eq!(conj, disj);
                    assert_eq!(lo, hi);
                    assert!(matches!(orig.prob, ProbSpec::Point(p) if p == *lo));
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn condition_pair_weakening_rules() {
        let v = vocab();
        let c = Sentence::atom("fuel", Rel::Ge, Value::Int(6));
        let d = Sentence::atom("fuel", Rel::Ge, Value::Int(3));
        // Maximal weakening always valid.
        assert!(weaken_condition_pair(&v, &c, &d, &Sentence::False, &Sentence::True).is_ok());
        // Identity pair unchanged.
        let id = weaken_condition_pair(&v, &c, &d, &c, &d).unwrap();
        assert_eq!(id, ConditionSpec::ConjDisj { conj: c.clone(), disj: d.clone() });
        // Strengthened disjunction rejected.
        let stronger = Sentence::atom("fuel", Rel::Ge, Value::Int(8));
        assert!(weaken_condition_pair(&v, &c, &d, &c, &stronger).is_err());
    }
}
