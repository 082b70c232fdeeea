//! Discrete-time semantics: applying absolute/relative effects under STRIPS
//! persistence, per-fluent state envelopes for abstract effects, and
//! enumeration of plan chronicles with (interval) probabilities.

use crate::actions::{
    AbstractStyle, ActionDescription, Branch, ConditionSpec, EffectSpec, ProbSpec, ValueConstraint,
};
use crate::worldmodel::{ProbInterval, Sentence, State, StateDistribution, Value, Vocabulary};
use crate::{Error, Result};

/// All values a constraint admits for a fluent given its pre-action value.
/// Exact constraints error when they leave the domain; set/range constraints
/// are intersected with the domain and error only when nothing remains.
pub fn resolve_constraint(
    v: &Vocabulary,
    fluent: &str,
    pre: &Value,
    c: &ValueConstraint,
) -> Result<Vec<Value>> {
    let i = v.require(fluent)?;
    let dom = &v.fluent(i).domain;
    let overflow = |val: &Value| Error::DomainOverflow {
        fluent: fluent.to_string(),
        value: val.to_string(),
    };
    let out = match c {
        ValueConstraint::Exact(val) => {
            if !dom.contains(val) {
                return Err(overflow(val));
            }
            vec![val.clone()]
        }
        ValueConstraint::RelativeExact(d) => {
            let base = pre
                .as_int()
                .ok_or_else(|| Error::Validation(format!("relative effect on symbolic `{fluent}`")))?;
            let val = Value::Int(base + d);
            if !dom.contains(&val) {
                return Err(overflow(&val));
            }
            vec![val]
        }
        ValueConstraint::AmongSet(vals) => {
            let kept: Vec<Value> = vals.iter().filter(|x| dom.contains(x)).cloned().collect();
            if kept.is_empty() {
                return Err(overflow(&vals[0]));
            }
            kept
        }
        ValueConstraint::RelativeRange(lo, hi) => {
            let base = pre
                .as_int()
                .ok_or_else(|| Error::Validation(format!("relative effect on symbolic `{fluent}`")))?;
            let kept: Vec<Value> = (base + lo..=base + hi)
                .map(Value::Int)
                .filter(|x| dom.contains(x))
                .collect();
            if kept.is_empty() {
                return Err(overflow(&Value::Int(base + lo)));
            }
            kept
        }
        ValueConstraint::MaybeUnchanged(inner) => {
            // The pre-value is always admissible here, so inner resolutions
            // that leave the domain are dropped rather than raised: they can
            // only come from prestates where the "changed" instances never
            // fire.
            let mut vals = match resolve_constraint(v, fluent, pre, inner) {
                Ok(vals) => vals,
                Err(Error::DomainOverflow { .. }) => Vec::new(),
                Err(e) => return Err(e),
            };
            vals.retain(|x| dom.contains(x));
            if !vals.contains(pre) {
                vals.push(pre.clone());
            }
            vals
        }
        ValueConstraint::Any => dom.values(),
    };
    let mut out = out;
    out.sort();
    out.dedup();
    Ok(out)
}

/// All states consistent with applying `e` to `s`; unmentioned fluents keep
/// their value.
pub fn apply_effect(v: &Vocabulary, s: &State, e: &EffectSpec) -> Result<Vec<State>> {
    let mut out = vec![s.clone()];
    for (fluent, c) in e.iter() {
        let i = v.require(fluent)?;
        let vals = resolve_constraint(v, fluent, s.get(i), c)?;
        let mut next = Vec::with_capacity(out.len() * vals.len());
        for st in &out {
            for val in &vals {
                next.push(st.with_value(i, val.clone()));
            }
        }
        out = next;
    }
    Ok(out)
}

/// A per-fluent envelope of possible values: the product of the per-fluent
/// sets over-approximates the reachable state family without enumerating it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    values: Vec<Vec<Value>>,
}

impl Envelope {
    pub fn from_state(s: &State) -> Envelope {
        Envelope { values: s.values().iter().map(|v| vec![v.clone()]).collect() }
    }

    pub fn fluent_values(&self, i: usize) -> &[Value] {
        &self.values[i]
    }

    pub fn is_singleton(&self) -> bool {
        self.values.iter().all(|vs| vs.len() == 1)
    }

    pub fn as_state(&self) -> Option<State> {
        if !self.is_singleton() {
            return None;
        }
        let values: Vec<Value> = self.values.iter().map(|vs| vs[0].clone()).collect();
        Some(State::raw(values))
    }

    /// Number of states in the product (saturating).
    pub fn size(&self) -> usize {
        self.values.iter().fold(1usize, |acc, vs| acc.saturating_mul(vs.len()))
    }

    /// Enumerate the product states in a deterministic order.
    pub fn states(&self) -> Vec<State> {
        let mut out = vec![Vec::new()];
        for vs in &self.values {
            let mut next = Vec::with_capacity(out.len() * vs.len());
            for prefix in &out {
                for val in vs {
                    let mut p = prefix.clone();
                    p.push(val.clone());
                    next.push(p);
                }
            }
            out = next;
        }
        out.into_iter().map(State::raw).collect()
    }

    /// True iff `other`'s per-fluent sets are subsets of this envelope's.
    pub fn contains(&self, other: &Envelope) -> bool {
        self.values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| b.iter().all(|x| a.contains(x)))
    }
}

/// Apply an effect to an envelope: per fluent, the union of constraint
/// resolutions over the envelope's pre-values.
pub fn apply_effect_envelope(v: &Vocabulary, env: &Envelope, e: &EffectSpec) -> Result<Envelope> {
    let mut values = env.values.clone();
    for (fluent, c) in e.iter() {
        let i = v.require(fluent)?;
        let mut out: Vec<Value> = Vec::new();
        for pre in &env.values[i] {
            out.extend(resolve_constraint(v, fluent, pre, c)?);
        }
        out.sort();
        out.dedup();
        values[i] = out;
    }
    Ok(Envelope { values })
}

/// 0/1 lower and upper truth bounds of a plain sentence over an envelope:
/// (1, 1) iff every product state satisfies it, (0, 0) iff none does.
pub fn sentence_bounds(v: &Vocabulary, phi: &Sentence, env: &Envelope) -> Result<(u8, u8)> {
    match phi {
        Sentence::True => return Ok((1, 1)),
        Sentence::False => return Ok((0, 0)),
        _ => {}
    }
    let mut all = true;
    let mut any = false;
    for st in env.states() {
        if phi.eval(v, &st)? {
            any = true;
        } else {
            all = false;
        }
        if any && !all {
            break;
        }
    }
    Ok((u8::from(all), u8::from(any)))
}

/// Contribution interval of one branch given the current envelope: bounds on
/// the probability that this branch is the one realized.
fn branch_contribution(
    v: &Vocabulary,
    action: &ActionDescription,
    branch: &Branch,
    env: &Envelope,
) -> Result<(f64, f64)> {
    match (&branch.condition, &branch.prob) {
        (ConditionSpec::Single(c), ProbSpec::Point(p)) => {
            let (l, u) = sentence_bounds(v, c, env)?;
            Ok((f64::from(l) * p, f64::from(u) * p))
        }
        (ConditionSpec::Single(c), ProbSpec::Range { lo, hi }) => {
            let (l, u) = sentence_bounds(v, c, env)?;
            Ok((f64::from(l) * lo, f64::from(u) * hi))
        }
        (ConditionSpec::ConjDisj { conj, disj }, ProbSpec::Range { lo, hi }) => {
            let (l, _) = sentence_bounds(v, conj, env)?;
            let (_, u) = sentence_bounds(v, disj, env)?;
            Ok((f64::from(l) * lo, f64::from(u) * hi))
        }
        (ConditionSpec::CondList(cs), ProbSpec::ProbList(ps)) => {
            let mut terms = Vec::with_capacity(cs.len());
            for (c, p) in cs.iter().zip(ps) {
                let (l, u) = sentence_bounds(v, c, env)?;
                terms.push((f64::from(l) * p, f64::from(u) * p));
            }
            match action.style {
                // Conditions of one action are mutually exclusive: the
                // realized condition's probability is bounded by the maxima.
                Some(AbstractStyle::IntraI) => Ok((
                    terms.iter().map(|t| t.0).fold(0.0, f64::max),
                    terms.iter().map(|t| t.1).fold(0.0, f64::max),
                )),
                // One condition per instance; the instance is unknown.
                Some(AbstractStyle::InterI) => Ok((
                    terms.iter().map(|t| t.0).fold(f64::INFINITY, f64::min),
                    terms.iter().map(|t| t.1).fold(0.0, f64::max),
                )),
                _ => Err(Error::Validation(format!(
                    "action `{}` carries list annotations without an intra1/inter1 style",
                    action.name
                ))),
            }
        }
        _ => Err(Error::Validation(format!(
            "branch `{}` of `{}` pairs incompatible annotation variants",
            branch.label, action.name
        ))),
    }
}

/// One timed trajectory: the envelope after each action boundary, the
/// probability (a point interval for fully concrete plans) and the
/// (action, branch label) trace.
#[derive(Debug, Clone)]
pub struct Chronicle {
    /// (time, envelope) at the start and after each action.
    pub steps: Vec<(u64, Envelope)>,
    pub probability: ProbInterval,
    pub trace: Vec<(String, String)>,
}

impl Chronicle {
    pub fn final_env(&self) -> &Envelope {
        &self.steps.last().expect("chronicle has at least the initial step").1
    }

    pub fn final_time(&self) -> u64 {
        self.steps.last().expect("non-empty").0
    }
}

#[derive(Debug, Clone)]
pub struct ChronicleSet {
    pub chronicles: Vec<Chronicle>,
}

impl ChronicleSet {
    /// Sum of probability bounds, for the concrete sum-to-one invariant.
    pub fn probability_sums(&self) -> (f64, f64) {
        self.chronicles
            .iter()
            .fold((0.0, 0.0), |(lo, hi), c| (lo + c.probability.lo, hi + c.probability.hi))
    }
}

/// Enumerate every chronicle of a plan under an initial distribution.
///
/// Each chronicle fixes an initial state and one branch per action; its
/// probability is the initial weight times the product of the per-step
/// branch contribution intervals. Branches whose upper contribution is zero
/// are unreachable and emit no chronicle.
pub fn enumerate_chronicles(
    v: &Vocabulary,
    plan: &[&ActionDescription],
    d0: &StateDistribution,
) -> Result<ChronicleSet> {
    if plan.is_empty() {
        return Err(Error::Validation("cannot enumerate chronicles of an empty plan".into()));
    }
    let mut chronicles = Vec::new();
    for (s0, w) in d0.entries() {
        if *w <= 0.0 {
            continue;
        }
        let env0 = Envelope::from_state(s0);
        let mut stack = vec![(
            0usize,
            vec![(0u64, env0)],
            (*w, *w),
            Vec::<(String, String)>::new(),
        )];
        while let Some((step, steps, (plo, phi), trace)) = stack.pop() {
            if step == plan.len() {
                chronicles.push(Chronicle {
                    steps,
                    probability: ProbInterval::clamped(plo, phi),
                    trace,
                });
                continue;
            }
            let action = plan[step];
            let (time, env) = steps.last().cloned().expect("non-empty steps");
            let mut reachable = 0usize;
            for branch in &action.branches {
                let (blo, bhi) = branch_contribution(v, action, branch, &env)?;
                if bhi <= 0.0 {
                    continue;
                }
                reachable += 1;
                let post = apply_effect_envelope(v, &env, &branch.effect)?;
                let mut next_steps = steps.clone();
                next_steps.push((time + action.duration, post));
                let mut next_trace = trace.clone();
                next_trace.push((action.name.clone(), branch.label.clone()));
                stack.push((step + 1, next_steps, (plo * blo, phi * bhi), next_trace));
            }
            if reachable == 0 {
                if action.is_concrete() {
                    return Err(Error::Incomplete { action: action.name.clone(), step });
                }
                // Abstract action unreachable from here: the whole prefix has
                // probability zero and emits no chronicle.
            }
        }
    }
    chronicles.sort_by(|a, b| {
        let ka: Vec<&str> = a.trace.iter().map(|(_, l)| l.as_str()).collect();
        let kb: Vec<&str> = b.trace.iter().map(|(_, l)| l.as_str()).collect();
        ka.cmp(&kb).then_with(|| a.steps[0].1.states().cmp(&b.steps[0].1.states()))
    });
    Ok(ChronicleSet { chronicles })
}

impl State {
    /// Construct from raw values without a vocabulary check; only used where
    /// the values are already known to come from the vocabulary's domains.
    pub(crate) fn raw(values: Vec<Value>) -> State {
        // State's field is private to worldmodel; delegate through a helper.
        crate::worldmodel::state_from_raw(values)
    }
}
