//! Concrete and abstract conditional probabilistic action descriptions.
//!
//! An action is a list of branches, each pairing a condition, a probability
//! annotation and an effect. Concrete actions carry a single condition and a
//! point probability per branch; the four abstraction methods produce the
//! list, range and conjunction/disjunction annotation variants.

use std::collections::BTreeMap;

use crate::worldmodel::{Sentence, Value, Vocabulary};
use crate::{Error, Result, EPS};

/// Condition annotation of one branch.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionSpec {
    Single(Sentence),
    /// One condition per grouped branch (intra method I) or per instance
    /// (inter method I).
    CondList(Vec<Sentence>),
    /// Sufficient (conjunction) and necessary (disjunction) conditions
    /// (inter method II).
    ConjDisj { conj: Sentence, disj: Sentence },
}

/// Probability annotation of one branch, paired with the condition variant.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbSpec {
    Point(f64),
    ProbList(Vec<f64>),
    Range { lo: f64, hi: f64 },
}

impl ProbSpec {
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            ProbSpec::Point(p) => (*p, *p),
            ProbSpec::Range { lo, hi } => (*lo, *hi),
            ProbSpec::ProbList(ps) => {
                let lo = ps.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = ps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }
}

/// Per-fluent value constraint of an effect. Fluents absent from an effect
/// are unchanged (STRIPS persistence); `Any` is the fully unconstrained top
/// of the weakening lattice and is distinct from absence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueConstraint {
    Exact(Value),
    AmongSet(Vec<Value>),
    RelativeExact(i64),
    RelativeRange(i64, i64),
    MaybeUnchanged(Box<ValueConstraint>),
    Any,
}

impl ValueConstraint {
    /// A constraint is deterministic when it resolves to exactly one value
    /// for every pre-state.
    pub fn is_deterministic(&self) -> bool {
        matches!(self, ValueConstraint::Exact(_) | ValueConstraint::RelativeExact(_))
    }

    pub fn validate(&self, v: &Vocabulary, fluent: &str) -> Result<()> {
        let i = v.require(fluent)?;
        let dom = &v.fluent(i).domain;
        match self {
            ValueConstraint::Exact(val) => {
                if !dom.contains(val) {
                    return Err(Error::Validation(format!(
                        "effect value {val} outside the domain of `{fluent}`"
                    )));
                }
                Ok(())
            }
            ValueConstraint::AmongSet(vals) => {
                if vals.is_empty() {
                    return Err(Error::Validation(format!("empty value set for `{fluent}`")));
                }
                for val in vals {
                    if !dom.contains(val) {
                        return Err(Error::Validation(format!(
                            "effect value {val} outside the domain of `{fluent}`"
                        )));
                    }
                }
                Ok(())
            }
            ValueConstraint::RelativeExact(_) => {
                if !dom.is_numeric() {
                    return Err(Error::Validation(format!(
                        "relative effect on non-numeric fluent `{fluent}`"
                    )));
                }
                Ok(())
            }
            ValueConstraint::RelativeRange(lo, hi) => {
                if lo > hi {
                    return Err(Error::Validation(format!(
                        "empty relative range [{lo}, {hi}] for `{fluent}`"
                    )));
                }
                if !dom.is_numeric() {
                    return Err(Error::Validation(format!(
                        "relative effect on non-numeric fluent `{fluent}`"
                    )));
                }
                Ok(())
            }
            ValueConstraint::MaybeUnchanged(inner) => {
                if matches!(**inner, ValueConstraint::MaybeUnchanged(_)) {
                    return Err(Error::Validation(format!(
                        "nested maybe-unchanged constraint on `{fluent}`"
                    )));
                }
                inner.validate(v, fluent)
            }
            ValueConstraint::Any => Ok(()),
        }
    }
}

/// Per-fluent value constraints; unmentioned fluents persist.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EffectSpec {
    constraints: BTreeMap<String, ValueConstraint>,
}

impl EffectSpec {
    pub fn new() -> EffectSpec {
        EffectSpec::default()
    }

    pub fn from_pairs(pairs: Vec<(String, ValueConstraint)>) -> Result<EffectSpec> {
        let mut constraints = BTreeMap::new();
        for (f, c) in pairs {
            if constraints.insert(f.clone(), c).is_some() {
                return Err(Error::Validation(format!("fluent `{f}` constrained twice")));
            }
        }
        Ok(EffectSpec { constraints })
    }

    pub fn set(&mut self, fluent: &str, c: ValueConstraint) {
        self.constraints.insert(fluent.to_string(), c);
    }

    pub fn get(&self, fluent: &str) -> Option<&ValueConstraint> {
        self.constraints.get(fluent)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ValueConstraint)> {
        self.constraints.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn validate(&self, v: &Vocabulary) -> Result<()> {
        for (f, c) in &self.constraints {
            c.validate(v, f)?;
        }
        Ok(())
    }

    pub fn is_deterministic(&self) -> bool {
        self.constraints.values().all(|c| c.is_deterministic())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub label: String,
    pub condition: ConditionSpec,
    pub prob: ProbSpec,
    pub effect: EffectSpec,
}

impl Branch {
    /// Check the variant pairings the four abstraction methods produce.
    pub fn validate_variant(&self) -> Result<()> {
        let ok = matches!(
            (&self.condition, &self.prob),
            (ConditionSpec::Single(_), ProbSpec::Point(_))
                | (ConditionSpec::Single(_), ProbSpec::Range { .. })
                | (ConditionSpec::ConjDisj { .. }, ProbSpec::Range { .. })
                | (ConditionSpec::CondList(_), ProbSpec::ProbList(_))
        );
        if !ok {
            return Err(Error::Validation(format!(
                "branch `{}` pairs incompatible condition and probability variants",
                self.label
            )));
        }
        if let (ConditionSpec::CondList(cs), ProbSpec::ProbList(ps)) = (&self.condition, &self.prob)
        {
            if cs.is_empty() {
                return Err(Error::Validation(format!(
                    "branch `{}` has an empty condition list",
                    self.label
                )));
            }
            if cs.len() != ps.len() {
                return Err(Error::Validation(format!(
                    "branch `{}` condition list length {} != probability list length {}",
                    self.label,
                    cs.len(),
                    ps.len()
                )));
            }
        }
        let (lo, hi) = self.prob.bounds();
        if !(0.0..=1.0 + EPS).contains(&lo) || !(0.0..=1.0 + EPS).contains(&hi) || lo > hi + EPS {
            return Err(Error::Validation(format!(
                "branch `{}` has probability bounds outside [0, 1]",
                self.label
            )));
        }
        Ok(())
    }

    pub fn validate(&self, v: &Vocabulary) -> Result<()> {
        self.validate_variant()?;
        match &self.condition {
            ConditionSpec::Single(s) => s.validate(v, false)?,
            ConditionSpec::CondList(cs) => {
                for c in cs {
                    c.validate(v, false)?;
                }
            }
            ConditionSpec::ConjDisj { conj, disj } => {
                conj.validate(v, false)?;
                disj.validate(v, false)?;
                if !crate::worldmodel::entails(conj, disj, v)? {
                    return Err(Error::Validation(format!(
                        "branch `{}`: conjunction condition does not entail the disjunction",
                        self.label
                    )));
                }
            }
        }
        self.effect.validate(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    Concrete,
    Abstract,
}

/// Which construction produced an abstract action. Needed because the list
/// annotations of intra method I (mutually exclusive conditions of one
/// action) and inter method I (one condition per instance) project
/// differently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbstractStyle {
    IntraI,
    IntraII,
    InterI,
    InterII,
}

impl AbstractStyle {
    pub fn id(self) -> &'static str {
        match self {
            AbstractStyle::IntraI => "intra1",
            AbstractStyle::IntraII => "intra2",
            AbstractStyle::InterI => "inter1",
            AbstractStyle::InterII => "inter2",
        }
    }

    pub fn parse(s: &str) -> Option<AbstractStyle> {
        match s {
            "intra1" => Some(AbstractStyle::IntraI),
            "intra2" => Some(AbstractStyle::IntraII),
            "inter1" => Some(AbstractStyle::InterI),
            "inter2" => Some(AbstractStyle::InterII),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionDescription {
    pub name: String,
    /// Duration in integer ticks.
    pub duration: u64,
    pub kind: ActionKind,
    /// Present exactly when `kind` is `Abstract`.
    pub style: Option<AbstractStyle>,
    pub branches: Vec<Branch>,
}

impl ActionDescription {
    pub fn concrete(name: &str, duration: u64, branches: Vec<Branch>) -> ActionDescription {
        ActionDescription {
            name: name.to_string(),
            duration,
            kind: ActionKind::Concrete,
            style: None,
            branches,
        }
    }

    pub fn is_concrete(&self) -> bool {
        self.kind == ActionKind::Concrete
    }
}

/// Distinct single conditions of a concrete action, in branch order.
fn distinct_conditions(a: &ActionDescription) -> Vec<&Sentence> {
    let mut out: Vec<&Sentence> = Vec::new();
    for b in &a.branches {
        if let ConditionSpec::Single(c) = &b.condition {
            if !out.iter().any(|d| *d == c) {
                out.push(c);
            }
        }
    }
    out
}

/// Validate a concrete action. Violations are collected into the report
/// rather than returned as errors; an empty report means well-formed.
pub fn validate_concrete(a: &ActionDescription, v: &Vocabulary) -> Result<Vec<String>> {
    if !a.is_concrete() {
        return Err(Error::Validation(format!("action `{}` is not concrete", a.name)));
    }
    let mut report = Vec::new();
    if a.branches.is_empty() {
        report.push(format!("action `{}` has no branches", a.name));
        return Ok(report);
    }
    for b in &a.branches {
        if !matches!((&b.condition, &b.prob), (ConditionSpec::Single(_), ProbSpec::Point(_))) {
            report.push(format!(
                "branch `{}` of concrete action `{}` is not a single-condition point-probability branch",
                b.label, a.name
            ));
            continue;
        }
        if let Err(e) = b.validate(v) {
            report.push(e.to_string());
        }
        if !b.effect.is_deterministic() {
            report.push(format!(
                "branch `{}` of concrete action `{}` has a non-deterministic effect",
                b.label, a.name
            ));
        }
    }
    if !report.is_empty() {
        return Ok(report);
    }

    let conds = distinct_conditions(a);
    // Per-condition probability sums and effect uniqueness.
    for c in &conds {
        let group: Vec<&Branch> = a
            .branches
            .iter()
            .filter(|b| matches!(&b.condition, ConditionSpec::Single(s) if s == *c))
            .collect();
        let sum: f64 = group
            .iter()
            .map(|b| match b.prob {
                ProbSpec::Point(p) => p,
                _ => 0.0,
            })
            .sum();
        if (sum - 1.0).abs() > EPS {
            report.push(format!(
                "action `{}`: probabilities under one condition sum to {sum} != 1",
                a.name
            ));
        }
        for (i, x) in group.iter().enumerate() {
            for y in group.iter().skip(i + 1) {
                if x.effect == y.effect {
                    report.push(format!(
                        "action `{}`: branches `{}` and `{}` share a condition and an effect",
                        a.name, x.label, y.label
                    ));
                }
            }
        }
    }

    // Mutual exclusivity and exhaustiveness by model enumeration. A lone
    // TRUE condition needs no enumeration.
    if !(conds.len() == 1 && *conds[0] == Sentence::True) {
        let mut ok = true;
        'states: for st in v.states() {
            let mut matched = 0;
            for c in &conds {
                match c.eval(v, &st) {
                    Ok(true) => matched += 1,
                    Ok(false) => {}
                    Err(e) => {
                        report.push(e.to_string());
                        ok = false;
                        break 'states;
                    }
                }
            }
            if matched != 1 {
                report.push(format!(
                    "action `{}`: conditions are not mutually exclusive and exhaustive (a state matches {matched} conditions)",
                    a.name
                ));
                ok = false;
                break;
            }
        }
        let _ = ok;
    }
    Ok(report)
}

/// Combine branches sharing a condition and an effect, summing probabilities.
pub fn merge_duplicate_effects(a: &ActionDescription) -> Result<ActionDescription> {
    if !a.is_concrete() {
        return Err(Error::Validation(format!("action `{}` is not concrete", a.name)));
    }
    let mut branches: Vec<Branch> = Vec::new();
    for b in &a.branches {
        if let Some(existing) = branches
            .iter_mut()
            .find(|x| x.condition == b.condition && x.effect == b.effect)
        {
            if let (ProbSpec::Point(p), ProbSpec::Point(q)) = (&mut existing.prob, &b.prob) {
                *p += q;
            }
        } else {
            branches.push(b.clone());
        }
    }
    Ok(ActionDescription { branches, ..a.clone() })
}

/// Pad with (condition FALSE, probability 0) branches up to `target_count`.
/// Padding copies the effect of an existing branch, so projection semantics
/// are unchanged.
pub fn pad_branches(a: &ActionDescription, target_count: usize) -> Result<ActionDescription> {
    if target_count < a.branches.len() {
        return Err(Error::Validation(format!(
            "cannot pad `{}` down from {} to {target_count} branches",
            a.name,
            a.branches.len()
        )));
    }
    let template = a
        .branches
        .first()
        .ok_or_else(|| Error::Validation(format!("action `{}` has no branches to pad", a.name)))?
        .effect
        .clone();
    let mut branches = a.branches.clone();
    for i in a.branches.len()..target_count {
        branches.push(Branch {
            label: format!("pad{i}"),
            condition: ConditionSpec::Single(Sentence::False),
            prob: ProbSpec::Point(0.0),
            effect: template.clone(),
        });
    }
    Ok(ActionDescription { branches, ..a.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldmodel::{Fluent, FluentDomain, Rel, Sentence, Value, Vocabulary};

    fn vocab() -> Vocabulary {
        Vocabulary::new(vec![
            Fluent { name: "snowing".into(), domain: FluentDomain::boolean() },
            Fluent { name: "muddy".into(), domain: FluentDomain::boolean() },
        ])
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

    fn muddy_effect(val: &str) -> EffectSpec {
        let mut e = EffectSpec::new();
        e.set("muddy", ValueConstraint::Exact(Value::sym(val)));
        e
    }

    fn snowing(val: &str) -> Sentence {
        Sentence::atom("snowing", Rel::Eq, Value::sym(val))
    }

    #[test]
    fn validate_passes_on_exhaustive_action() {
        let v = vocab();
        let a = ActionDescription::concrete(
            "drive",
            1,
            vec![
                branch("a", snowing("T"), 0.9, muddy_effect("T")),
                branch("b", snowing("T"), 0.1, muddy_effect("F")),
                branch("c", snowing("F"), 1.0, muddy_effect("F")),
            ],
        );
        assert!(validate_concrete(&a, &v).unwrap().is_empty());
    }

    #[test]
    fn validate_single_true_branch() {
        let v = vocab();
        let a = ActionDescription::concrete(
            "noop",
            1,
            vec![branch("a", Sentence::True, 1.0, EffectSpec::new())],
        );
        assert!(validate_concrete(&a, &v).unwrap().is_empty());
    }

    #[test]
    fn validate_flags_bad_probability_sum() {
        let v = vocab();
        let a = ActionDescription::concrete(
            "bad",
            1,
            vec![
                branch("a", Sentence::True, 0.6, muddy_effect("T")),
                branch("b", Sentence::True, 0.6, muddy_effect("F")),
            ],
        );
        let report = validate_concrete(&a, &v).unwrap();
        assert!(report.iter().any(|r| r.contains("sum to 1.2")), "{report:?}");
    }

    #[test]
    fn validate_flags_missing_catch_all() {
        let v = vocab();
        let a = ActionDescription::concrete(
            "partial",
            1,
            vec![branch("a", snowing("T"), 1.0, muddy_effect("T"))],
        );
        let report = validate_concrete(&a, &v).unwrap();
        assert!(report.iter().any(|r| r.contains("exhaustive")), "{report:?}");
    }

    #[test]
    fn merge_combines_shared_condition_and_effect() {
        let v = vocab();
        let a = ActionDescription::concrete(
            "m",
            1,
            vec![
                branch("a", Sentence::True, 0.3, muddy_effect("T")),
                branch("b", Sentence::True, 0.2, muddy_effect("T")),
                branch("c", Sentence::True, 0.5, muddy_effect("F")),
            ],
        );
        let merged = merge_duplicate_effects(&a).unwrap();
        assert_eq!(merged.branches.len(), 2);
        assert!(matches!(merged.branches[0].prob, ProbSpec::Point(p) if (p - 0.5).abs() < EPS));
        assert!(validate_concrete(&merged, &v).unwrap().is_empty());
    }

    #[test]
    fn merge_identity_when_unique() {
        let a = ActionDescription::concrete(
            "m",
            1,
            vec![
                branch("a", snowing("T"), 1.0, muddy_effect("T")),
                branch("b", snowing("F"), 1.0, muddy_effect("T")),
            ],
        );
        assert_eq!(merge_duplicate_effects(&a).unwrap(), a);
    }

    #[test]
    fn pad_adds_false_zero_branches() {
        let a = ActionDescription::concrete(
            "p",
            1,
            vec![branch("a", Sentence::True, 1.0, muddy_effect("T"))],
        );
        let padded = pad_branches(&a, 3).unwrap();
        assert_eq!(padded.branches.len(), 3);
        for b in &padded.branches[1..] {
            assert_eq!(b.condition, ConditionSpec::Single(Sentence::False));
            assert!(matches!(b.prob, ProbSpec::Point(p) if p == 0.0));
        }
        assert_eq!(pad_branches(&a, 1).unwrap(), a);
        assert!(pad_branches(&padded, 2).is_err());
    }
}
