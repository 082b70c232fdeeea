//! Decision-theoretic refinement planning over action hierarchies.
//!
//! A network maps names to concrete actions, abstract actions (an explicit
//! description plus the instance names it abstracts) and tasks (fixed
//! sequences). Plans are item sequences; refining a plan replaces its
//! leftmost abstract item by each instance in turn. Search keeps a frontier
//! of candidate plans with expected-utility intervals and prunes plans whose
//! upper bound falls below another plan's lower bound.

use std::collections::BTreeMap;

use crate::actions::{
    AbstractStyle, ActionDescription, ActionKind, Branch, ConditionSpec, EffectSpec, ProbSpec,
    ValueConstraint,
};
use crate::abstraction::join_constraints;
use crate::chronicle::{enumerate_chronicles, Chronicle, Envelope};
use crate::worldmodel::{Sentence, State, StateDistribution, Value, Vocabulary};
use crate::{Error, Result, EPS};

/// Pseudo-fluent name a utility component may use to score total plan time.
pub const ELAPSED: &str = "elapsed";

/// Compose two per-fluent constraints applied in sequence: the set of final
/// values reachable by applying `c1` and then `c2`.
pub fn compose_constraint(c1: &ValueConstraint, c2: &ValueConstraint) -> Result<ValueConstraint> {
    if let ValueConstraint::MaybeUnchanged(inner2) = c2 {
        // Second step may leave the value where the first step put it.
        let changed = compose_constraint(c1, inner2)?;
        return Ok(join_constraints(&changed, c1));
    }
    if let ValueConstraint::MaybeUnchanged(inner1) = c1 {
        // First step may not fire; either way the second step applies.
        let both = compose_constraint(inner1, c2)?;
        return Ok(join_constraints(&both, c2));
    }
    let out = match c2 {
        ValueConstraint::Exact(_) | ValueConstraint::AmongSet(_) | ValueConstraint::Any => {
            c2.clone()
        }
        ValueConstraint::RelativeExact(d) => shift_constraint(c1, *d, *d)?,
        ValueConstraint::RelativeRange(lo, hi) => shift_constraint(c1, *lo, *hi)?,
        ValueConstraint::MaybeUnchanged(_) => unreachable!("handled above"),
    };
    Ok(out)
}

/// Apply an integer offset range to the outcomes of `c1`.
fn shift_constraint(c1: &ValueConstraint, lo: i64, hi: i64) -> Result<ValueConstraint> {
    let shift_vals = |vals: &[Value]| -> Result<ValueConstraint> {
        let mut out = Vec::new();
        for v in vals {
            let base = v.as_int().ok_or_else(|| {
                Error::Validation("relative effect composed after a symbolic value".into())
            })?;
            out.extend((base + lo..=base + hi).map(Value::Int));
        }
        out.sort();
        out.dedup();
        Ok(if out.len() == 1 {
            ValueConstraint::Exact(out.pop().unwrap())
        } else {
            ValueConstraint::AmongSet(out)
        })
    };
    match c1 {
        ValueConstraint::Exact(v) => shift_vals(std::slice::from_ref(v)),
        ValueConstraint::AmongSet(vs) => shift_vals(vs),
        ValueConstraint::RelativeExact(d) => Ok(if lo == hi {
            ValueConstraint::RelativeExact(d + lo)
        } else {
            ValueConstraint::RelativeRange(d + lo, d + hi)
        }),
        ValueConstraint::RelativeRange(l1, h1) => Ok(if l1 + lo == h1 + hi {
            ValueConstraint::RelativeExact(l1 + lo)
        } else {
            ValueConstraint::RelativeRange(l1 + lo, h1 + hi)
        }),
        ValueConstraint::Any => Ok(ValueConstraint::Any),
        ValueConstraint::MaybeUnchanged(_) => unreachable!("handled by compose_constraint"),
    }
}

/// Compose two effects applied in sequence.
pub fn compose_effects(e1: &EffectSpec, e2: &EffectSpec) -> Result<EffectSpec> {
    let mut out = e1.clone();
    for (f, c2) in e2.iter() {
        let composed = match e1.get(f) {
            Some(c1) => compose_constraint(c1, c2)?,
            None => c2.clone(),
        };
        out.set(f, composed);
    }
    Ok(out)
}

fn trivially_true(c: &ConditionSpec) -> bool {
    match c {
        ConditionSpec::Single(s) => *s == Sentence::True,
        ConditionSpec::ConjDisj { conj, disj } => {
            *conj == Sentence::True && *disj == Sentence::True
        }
        ConditionSpec::CondList(_) => false,
    }
}

fn mul_prob(a: &ProbSpec, b: &ProbSpec) -> Result<ProbSpec> {
    match (a, b) {
        (ProbSpec::Point(p), ProbSpec::Point(q)) => Ok(ProbSpec::Point(p * q)),
        (ProbSpec::Point(p), ProbSpec::Range { lo, hi })
        | (ProbSpec::Range { lo, hi }, ProbSpec::Point(p)) => {
            Ok(ProbSpec::Range { lo: p * lo, hi: p * hi })
        }
        (ProbSpec::Range { lo: a, hi: b }, ProbSpec::Range { lo: c, hi: d }) => {
            Ok(ProbSpec::Range { lo: a * c, hi: b * d })
        }
        (ProbSpec::ProbList(ps), ProbSpec::Point(q)) => {
            Ok(ProbSpec::ProbList(ps.iter().map(|p| p * q).collect()))
        }
        _ => Err(Error::Unsupported(
            "cannot combine a probability list with a probability range in sequence".into(),
        )),
    }
}

/// Sequential composition of action descriptions into one description with
/// one branch per combination of step branches. Steps after the first must
/// have trivially true conditions, since a later condition would have to be
/// evaluated mid-sequence.
pub fn compose_sequential(name: &str, steps: &[&ActionDescription]) -> Result<ActionDescription> {
    if steps.is_empty() {
        return Err(Error::Validation("cannot compose an empty sequence".into()));
    }
    for s in &steps[1..] {
        for b in &s.branches {
            if !trivially_true(&b.condition) {
                return Err(Error::Unsupported(format!(
                    "branch `{}` of `{}`: non-first sequence steps must have unconditional \
                     branches",
                    b.label, s.name
                )));
            }
        }
    }
    let mut branches: Vec<Branch> = steps[0].branches.clone();
    for s in &steps[1..] {
        let mut next = Vec::with_capacity(branches.len() * s.branches.len());
        for b1 in &branches {
            for b2 in &s.branches {
                next.push(Branch {
                    label: format!("{}*{}", b1.label, b2.label),
                    condition: b1.condition.clone(),
                    prob: mul_prob(&b1.prob, &b2.prob)?,
                    effect: compose_effects(&b1.effect, &b2.effect)?,
                });
            }
        }
        branches = next;
    }
    let any_abstract = steps.iter().any(|s| !s.is_concrete());
    let style = if any_abstract {
        Some(steps[0].style.unwrap_or(AbstractStyle::IntraII))
    } else {
        None
    };
    Ok(ActionDescription {
        name: name.to_string(),
        duration: steps.iter().map(|s| s.duration).sum(),
        kind: if any_abstract { ActionKind::Abstract } else { ActionKind::Concrete },
        style,
        branches,
    })
}

/// Utility of one fluent (or of elapsed time) as a lookup table or a
/// piecewise linear function through sorted sample points.
#[derive(Debug, Clone, PartialEq)]
pub enum UtilityComponent {
    Table(Vec<(Value, f64)>),
    Linear(Vec<(f64, f64)>),
}

impl UtilityComponent {
    fn eval(&self, x: &Value) -> Result<f64> {
        match self {
            UtilityComponent::Table(entries) => entries
                .iter()
                .find(|(v, _)| v == x)
                .map(|(_, u)| *u)
                .ok_or_else(|| Error::Validation(format!("no utility entry for value {x}"))),
            UtilityComponent::Linear(points) => {
                let x = x.as_int().ok_or_else(|| {
                    Error::Validation("piecewise linear utility on a symbolic value".into())
                })? as f64;
                Ok(linear_eval(points, x))
            }
        }
    }
}

fn linear_eval(points: &[(f64, f64)], x: f64) -> f64 {
    match points {
        [] => 0.0,
        [(_, u)] => *u,
        _ => {
            // Find the segment bracketing x; extrapolate past the ends.
            let mut i = 0;
            while i + 2 < points.len() && x > points[i + 1].0 {
                i += 1;
            }
            let (x0, u0) = points[i];
            let (x1, u1) = points[i + 1];
            if (x1 - x0).abs() < EPS {
                return (u0 + u1) / 2.0;
            }
            u0 + (x - x0) * (u1 - u0) / (x1 - x0)
        }
    }
}

/// Additively separable utility over final fluent values plus elapsed time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UtilityFunction {
    pub components: Vec<(String, UtilityComponent)>,
}

impl UtilityFunction {
    pub fn validate(&self, v: &Vocabulary) -> Result<()> {
        for (f, c) in &self.components {
            if f == ELAPSED {
                if matches!(c, UtilityComponent::Table(_)) {
                    continue;
                }
                continue;
            }
            let i = v.require(f)?;
            if matches!(c, UtilityComponent::Linear(_)) && !v.fluent(i).domain.is_numeric() {
                return Err(Error::Validation(format!(
                    "piecewise linear utility on symbolic fluent `{f}`"
                )));
            }
            if let UtilityComponent::Linear(points) = c {
                if points.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::Validation(format!(
                        "utility sample points for `{f}` are not strictly increasing in x"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn of_state(&self, v: &Vocabulary, s: &State, elapsed: u64) -> Result<f64> {
        let mut total = 0.0;
        for (f, c) in &self.components {
            let val = if f == ELAPSED {
                Value::Int(elapsed as i64)
            } else {
                s.get(v.require(f)?).clone()
            };
            total += c.eval(&val)?;
        }
        Ok(total)
    }

    /// Utility bounds over an envelope: the function is a sum of per-fluent
    /// terms, so per-fluent minima and maxima add up exactly.
    pub fn bounds(&self, v: &Vocabulary, env: &Envelope, elapsed: u64) -> Result<(f64, f64)> {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (f, c) in &self.components {
            if f == ELAPSED {
                let u = c.eval(&Value::Int(elapsed as i64))?;
                lo += u;
                hi += u;
                continue;
            }
            let i = v.require(f)?;
            let mut fmin = f64::INFINITY;
            let mut fmax = f64::NEG_INFINITY;
            for val in env.fluent_values(i) {
                let u = c.eval(val)?;
                fmin = fmin.min(u);
                fmax = fmax.max(u);
            }
            if !fmin.is_finite() {
                return Err(Error::Validation(format!("empty envelope for fluent `{f}`")));
            }
            lo += fmin;
            hi += fmax;
        }
        Ok((lo, hi))
    }
}

/// One node of a refinement hierarchy.
#[derive(Debug, Clone)]
pub enum NetworkNode {
    Concrete(ActionDescription),
    /// Abstract action: the description summarizing its instances plus the
    /// instance node names refinement substitutes for it.
    Abstract { description: ActionDescription, instances: Vec<String> },
    /// Fixed sequence of node names, expanded in place during normalization.
    Task { steps: Vec<String> },
}

#[derive(Debug, Clone)]
pub struct Network {
    pub vocab: Vocabulary,
    pub nodes: BTreeMap<String, NetworkNode>,
    pub root: String,
    pub init: StateDistribution,
    pub utility: UtilityFunction,
    descriptions: BTreeMap<String, ActionDescription>,
}

impl Network {
    pub fn new(
        vocab: Vocabulary,
        nodes: BTreeMap<String, NetworkNode>,
        root: String,
        init: StateDistribution,
        utility: UtilityFunction,
    ) -> Result<Network> {
        utility.validate(&vocab)?;
        if !nodes.contains_key(&root) {
            return Err(Error::Validation(format!("unknown root node `{root}`")));
        }
        let mut n = Network { vocab, nodes, root, init, utility, descriptions: BTreeMap::new() };
        let names: Vec<String> = n.nodes.keys().cloned().collect();
        let mut visiting = Vec::new();
        for name in names {
            n.build_description(&name, &mut visiting)?;
        }
        Ok(n)
    }

    fn build_description(&mut self, name: &str, visiting: &mut Vec<String>) -> Result<()> {
        if self.descriptions.contains_key(name) {
            return Ok(());
        }
        if visiting.iter().any(|v| v == name) {
            return Err(Error::Validation(format!(
                "cycle through node `{name}` in the refinement hierarchy"
            )));
        }
        visiting.push(name.to_string());
        let node = self
            .nodes
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Validation(format!("unknown node `{name}`")))?;
        let desc = match node {
            NetworkNode::Concrete(d) => {
                if !d.is_concrete() {
                    return Err(Error::Validation(format!(
                        "node `{name}` is declared concrete but carries an abstract description"
                    )));
                }
                let report = crate::actions::validate_concrete(&d, &self.vocab)?;
                if !report.is_empty() {
                    return Err(Error::Validation(report.join("; ")));
                }
                d
            }
            NetworkNode::Abstract { description, instances } => {
                if instances.is_empty() {
                    return Err(Error::Validation(format!(
                        "abstract node `{name}` has no instances"
                    )));
                }
                for inst in &instances {
                    self.build_description(inst, visiting)?;
                }
                if description.is_concrete() {
                    return Err(Error::Validation(format!(
                        "abstract node `{name}` carries a concrete description"
                    )));
                }
                description
            }
            NetworkNode::Task { steps } => {
                if steps.is_empty() {
                    return Err(Error::Validation(format!("task `{name}` has no steps")));
                }
                for s in &steps {
                    self.build_description(s, visiting)?;
                }
                let descs: Vec<&ActionDescription> =
                    steps.iter().map(|s| &self.descriptions[s]).collect();
                compose_sequential(name, &descs)?
            }
        };
        visiting.pop();
        self.descriptions.insert(name.to_string(), desc);
        Ok(())
    }

    pub fn description(&self, name: &str) -> Result<&ActionDescription> {
        self.descriptions
            .get(name)
            .ok_or_else(|| Error::Validation(format!("unknown node `{name}`")))
    }

    /// Expand task items in place until only concrete and abstract items
    /// remain.
    pub fn normalize(&self, items: &[String]) -> Result<Vec<String>> {
        let mut out = Vec::new();
        let mut stack: Vec<String> = items.iter().rev().cloned().collect();
        while let Some(name) = stack.pop() {
            match self.nodes.get(&name) {
                Some(NetworkNode::Task { steps }) => {
                    for s in steps.iter().rev() {
                        stack.push(s.clone());
                    }
                }
                Some(_) => out.push(name),
                None => return Err(Error::Validation(format!("unknown node `{name}`"))),
            }
        }
        Ok(out)
    }

    pub fn root_plan(&self) -> Result<Vec<String>> {
        self.normalize(std::slice::from_ref(&self.root))
    }

    pub fn is_concrete_plan(&self, plan: &[String]) -> bool {
        plan.iter()
            .all(|n| matches!(self.nodes.get(n), Some(NetworkNode::Concrete(_))))
    }

    /// All refinements of a plan: the leftmost abstract item replaced by each
    /// of its instances, normalized.
    pub fn refine(&self, plan: &[String]) -> Result<Vec<Vec<String>>> {
        let idx = plan
            .iter()
            .position(|n| matches!(self.nodes.get(n), Some(NetworkNode::Abstract { .. })))
            .ok_or(Error::NothingToRefine)?;
        let instances = match &self.nodes[&plan[idx]] {
            NetworkNode::Abstract { instances, .. } => instances.clone(),
            _ => unreachable!(),
        };
        let mut out = Vec::with_capacity(instances.len());
        for inst in instances {
            let mut items = plan.to_vec();
            items.splice(idx..=idx, [inst]);
            out.push(self.normalize(&items)?);
        }
        Ok(out)
    }

    /// Expected-utility bounds of a plan: chronicle probabilities combined
    /// with per-chronicle utility bounds, then tightened by the convex-hull
    /// bound (any realization is a mixture of chronicle utilities).
    pub fn expected_utility(&self, plan: &[String]) -> Result<(f64, f64)> {
        let descs: Vec<&ActionDescription> =
            plan.iter().map(|n| self.description(n)).collect::<Result<_>>()?;
        let set = enumerate_chronicles(&self.vocab, &descs, &self.init)?;
        if set.chronicles.is_empty() {
            return Err(Error::Validation("plan has no reachable chronicle".into()));
        }
        let mut lo_sum = 0.0;
        let mut hi_sum = 0.0;
        let mut min_u = f64::INFINITY;
        let mut max_u = f64::NEG_INFINITY;
        for c in &set.chronicles {
            let (ulo, uhi) = self.chronicle_utility_bounds(c)?;
            lo_sum += if ulo >= 0.0 { c.probability.lo * ulo } else { c.probability.hi * ulo };
            hi_sum += if uhi >= 0.0 { c.probability.hi * uhi } else { c.probability.lo * uhi };
            min_u = min_u.min(ulo);
            max_u = max_u.max(uhi);
        }
        Ok((lo_sum.max(min_u), hi_sum.min(max_u)))
    }

    pub fn chronicle_utility_bounds(&self, c: &Chronicle) -> Result<(f64, f64)> {
        self.utility.bounds(&self.vocab, c.final_env(), c.final_time())
    }

    /// Number of concrete plans reachable from `name` by full refinement.
    fn concrete_count(&self, name: &str, memo: &mut BTreeMap<String, u128>) -> Result<u128> {
        if let Some(&c) = memo.get(name) {
            return Ok(c);
        }
        let count = match self
            .nodes
            .get(name)
            .ok_or_else(|| Error::Validation(format!("unknown node `{name}`")))?
        {
            NetworkNode::Concrete(_) => 1u128,
            NetworkNode::Abstract { instances, .. } => {
                let mut total = 0u128;
                for i in instances.clone() {
                    total = total.saturating_add(self.concrete_count(&i, memo)?);
                }
                total
            }
            NetworkNode::Task { steps } => {
                let mut total = 1u128;
                for s in steps.clone() {
                    total = total.saturating_mul(self.concrete_count(&s, memo)?);
                }
                total
            }
        };
        memo.insert(name.to_string(), count);
        Ok(count)
    }

    pub fn total_concrete_plans(&self) -> Result<u128> {
        let mut memo = BTreeMap::new();
        self.concrete_count(&self.root, &mut memo)
    }

    /// All concrete completions of the root plan, for exhaustive checking.
    pub fn enumerate_concrete_plans(&self, limit: usize) -> Result<Vec<Vec<String>>> {
        let mut done = Vec::new();
        let mut open = vec![self.root_plan()?];
        while let Some(plan) = open.pop() {
            if self.is_concrete_plan(&plan) {
                done.push(plan);
            } else {
                open.extend(self.refine(&plan)?);
            }
            if done.len() + open.len() > limit {
                return Err(Error::Bound(format!(
                    "more than {limit} concrete plans in the hierarchy"
                )));
            }
        }
        done.sort();
        Ok(done)
    }
}

/// True iff plan `a`'s lower bound strictly exceeds plan `b`'s upper bound.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    b.1 < a.0 - EPS
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct SearchStats {
    /// Plans whose expected-utility interval was evaluated.
    pub plans_examined: usize,
    /// Of those, how many were fully concrete.
    pub concrete_examined: usize,
    /// Concrete plans in the full hierarchy.
    pub total_concrete: u128,
    /// Plans discarded by dominance pruning.
    pub pruned: usize,
    /// Of those, how many still contained an abstract item.
    pub pruned_abstract: usize,
    /// Pruned-plan counts keyed by refinement depth.
    pub pruned_per_depth: BTreeMap<usize, usize>,
    /// Refinement steps performed.
    pub refinements: usize,
    /// (n, p, k) when the network is a uniform synthetic one.
    pub params: Option<(u64, u64, u64)>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// The best plan (greatest lower bound; lexicographically least on ties).
    pub plan: Vec<String>,
    pub eu: (f64, f64),
    /// Every concrete plan attaining the maximum within tolerance.
    pub optimal: Vec<Vec<String>>,
    pub stats: SearchStats,
}

#[derive(Debug, Clone)]
struct Candidate {
    items: Vec<String>,
    eu: Option<(f64, f64)>,
    depth: usize,
}

/// Best-first refinement search. The frontier starts as the root plan;
/// while it holds a single refinable plan no evaluation is needed, so the
/// plan is refined directly. Children are evaluated on creation, dominated
/// plans are dropped, and the refinable plan with the greatest upper bound
/// is expanded next.
pub fn search(net: &Network) -> Result<SearchOutcome> {
    let mut stats = SearchStats { total_concrete: net.total_concrete_plans()?, ..Default::default() };
    let mut frontier =
        vec![Candidate { items: net.root_plan()?, eu: None, depth: 0 }];

    loop {
        if frontier.iter().all(|c| net.is_concrete_plan(&c.items)) {
            // Only concrete plans remain: the surviving maximum-EU set.
            for c in &mut frontier {
                if c.eu.is_none() {
                    stats.plans_examined += 1;
                    stats.concrete_examined += 1;
                    c.eu = Some(net.expected_utility(&c.items)?);
                }
            }
            let best_lo = frontier
                .iter()
                .map(|c| c.eu.expect("evaluated").0)
                .fold(f64::NEG_INFINITY, f64::max);
            let mut optimal: Vec<Vec<String>> = frontier
                .iter()
                .filter(|c| c.eu.expect("evaluated").0 >= best_lo - EPS)
                .map(|c| c.items.clone())
                .collect();
            optimal.sort();
            optimal.dedup();
            let plan = optimal[0].clone();
            let eu = frontier
                .iter()
                .find(|c| c.items == plan)
                .and_then(|c| c.eu)
                .expect("best plan evaluated");
            return Ok(SearchOutcome { plan, eu, optimal, stats });
        }

        let pick = if frontier.len() == 1 {
            // A lone refinable plan cannot be pruned, so skip its evaluation.
            0
        } else {
            let best_lo = frontier
                .iter()
                .map(|c| c.eu.expect("multi-plan frontier is evaluated").0)
                .fold(f64::NEG_INFINITY, f64::max);
            let before = frontier.len();
            let mut kept = Vec::with_capacity(before);
            for c in frontier.drain(..) {
                let eu = c.eu.expect("evaluated");
                if eu.1 < best_lo - EPS {
                    stats.pruned += 1;
                    *stats.pruned_per_depth.entry(c.depth).or_insert(0) += 1;
                    if !net.is_concrete_plan(&c.items) {
                        stats.pruned_abstract += 1;
                    }
                } else {
                    kept.push(c);
                }
            }
            frontier = kept;
            if frontier.len() == 1 || frontier.iter().all(|c| net.is_concrete_plan(&c.items)) {
                continue;
            }
            // Expand the refinable plan with the greatest upper bound.
            let mut pick: Option<usize> = None;
            for (i, c) in frontier.iter().enumerate() {
                if net.is_concrete_plan(&c.items) {
                    continue;
                }
                let better = match pick {
                    None => true,
                    Some(j) => {
                        let a = c.eu.expect("evaluated");
                        let b = frontier[j].eu.expect("evaluated");
                        a.1 > b.1 + EPS
                            || ((a.1 - b.1).abs() <= EPS
                                && (c.depth < frontier[j].depth
                                    || (c.depth == frontier[j].depth
                                        && c.items < frontier[j].items)))
                    }
                };
                if better {
                    pick = Some(i);
                }
            }
            pick.expect("a refinable plan exists when the frontier is not all-concrete")
        };

        let parent = frontier.swap_remove(pick);
        stats.refinements += 1;
        for items in net.refine(&parent.items)? {
            let eu = net.expected_utility(&items)?;
            stats.plans_examined += 1;
            if net.is_concrete_plan(&items) {
                stats.concrete_examined += 1;
            }
            frontier.push(Candidate { items, eu: Some(eu), depth: parent.depth + 1 });
        }
        if frontier.is_empty() {
            return Err(Error::Validation("refinement produced no candidate plans".into()));
        }
    }
}
