//! Synthetic refinement networks: the engineered uniform family whose search
//! cost under maximal pruning follows a closed form, and seeded random
//! networks for the verification suites.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abstraction::inter_abstract_ii;
use crate::actions::{
    ActionDescription, Branch, ConditionSpec, EffectSpec, ProbSpec, ValueConstraint,
};
use crate::planner::{compose_sequential, Network, NetworkNode, UtilityComponent, UtilityFunction};
use crate::worldmodel::{
    Fluent, FluentDomain, Sentence, State, StateDistribution, Value, Vocabulary,
};
use crate::{Error, Result};

/// Plans examined under maximal pruning of the uniform (n, p, k) family:
/// n·(p + p² + … + p^k).
pub fn maximal_pruning_bound(n: u64, p: u64, k: u64) -> u64 {
    let mut sum = 0u64;
    let mut term = 1u64;
    for _ in 0..k {
        term *= p;
        sum += term;
    }
    n * sum
}

/// Exhaustive concrete-plan count of the uniform family: n^(p + p² + … + p^k).
pub fn exhaustive_bound(n: u64, p: u64, k: u64) -> u128 {
    let slots = maximal_pruning_bound(1, p, k) as u32;
    (n as u128).saturating_pow(slots)
}

struct Slot {
    children: Vec<usize>,
}

/// Allocate the slot tree in depth-first pre-order, which is exactly the
/// order in which leftmost-first refinement reaches the slots.
fn alloc_slots(p: u64, k: u64) -> Vec<Slot> {
    fn go(slots: &mut Vec<Slot>, depth: u64, p: u64, k: u64) -> usize {
        let idx = slots.len();
        slots.push(Slot { children: Vec::new() });
        if depth < k {
            for _ in 0..p {
                let c = go(slots, depth + 1, p, k);
                slots[idx].children.push(c);
            }
        }
        idx
    }
    let mut slots = Vec::new();
    let mut top = Vec::new();
    for _ in 0..p {
        top.push(go(&mut slots, 1, p, k));
    }
    // The virtual root's children are the top-level slots; encode them as a
    // sentinel depth-0 slot appended last so indices 0..m stay pre-order.
    slots.push(Slot { children: top });
    slots
}

/// Build the uniform (n, p, k) network: a root task of p abstract actions;
/// each abstract action has n instances; an instance at depth < k is a task
/// of one value-setting concrete action followed by p shared child abstract
/// actions; at depth k the instances are the concrete actions themselves.
///
/// Slot t owns fluent `x{t}`; instance j of slot t sets it to j. Utility
/// weights (n+1)^(m−1−t) in refinement order make every refinement's child
/// intervals pairwise disjoint, so pruning always keeps exactly one child
/// and the search examines maximal_pruning_bound(n, p, k) plans.
pub fn uniform_network(n: u64, p: u64, k: u64) -> Result<Network> {
    if n < 1 || p < 1 || k < 1 {
        return Err(Error::Validation("uniform network needs n, p, k ≥ 1".into()));
    }
    let slots = alloc_slots(p, k);
    let m = slots.len() - 1; // last entry is the virtual root
    if m > 64 {
        return Err(Error::Bound(format!("uniform network with {m} slots is too large")));
    }

    let vocab = Vocabulary::new(
        (0..m)
            .map(|t| Fluent {
                name: format!("x{t}"),
                domain: FluentDomain::IntRange(0, n as i64 - 1),
            })
            .collect(),
    )?;

    let mut nodes: BTreeMap<String, NetworkNode> = BTreeMap::new();
    let mut abs_desc: BTreeMap<usize, ActionDescription> = BTreeMap::new();

    // Deepest slots have the largest pre-order indices, so a reverse sweep
    // sees every child before its parent.
    for t in (0..m).rev() {
        let slot = &slots[t];
        let mut inst_names = Vec::with_capacity(n as usize);
        let mut inst_descs: Vec<ActionDescription> = Vec::with_capacity(n as usize);
        for j in 0..n {
            let set_name = format!("a{t}v{j}");
            let mut eff = EffectSpec::new();
            eff.set(&format!("x{t}"), ValueConstraint::Exact(Value::Int(j as i64)));
            let set_action = ActionDescription::concrete(
                &set_name,
                1,
                vec![Branch {
                    label: "e".into(),
                    condition: ConditionSpec::Single(Sentence::True),
                    prob: ProbSpec::Point(1.0),
                    effect: eff,
                }],
            );
            nodes.insert(set_name.clone(), NetworkNode::Concrete(set_action.clone()));
            if slot.children.is_empty() {
                inst_names.push(set_name);
                inst_descs.push(set_action);
            } else {
                let task_name = format!("a{t}i{j}");
                let mut steps = vec![set_name.clone()];
                let mut step_descs = vec![&set_action];
                for &c in &slot.children {
                    steps.push(format!("a{c}"));
                    step_descs.push(&abs_desc[&c]);
                }
                let desc = compose_sequential(&task_name, &step_descs)?;
                nodes.insert(task_name.clone(), NetworkNode::Task { steps });
                inst_names.push(task_name);
                inst_descs.push(desc);
            }
        }
        let refs: Vec<&ActionDescription> = inst_descs.iter().collect();
        let sets = vec![refs
            .iter()
            .map(|d| (d.name.clone(), d.branches[0].label.clone()))
            .collect::<Vec<_>>()];
        let abs = inter_abstract_ii(&format!("a{t}"), &refs, &sets)?;
        nodes.insert(
            format!("a{t}"),
            NetworkNode::Abstract { description: abs.clone(), instances: inst_names },
        );
        abs_desc.insert(t, abs);
    }

    let root_steps: Vec<String> =
        slots[m].children.iter().map(|&c| format!("a{c}")).collect();
    nodes.insert("root".into(), NetworkNode::Task { steps: root_steps });

    let init = StateDistribution::point(
        &vocab,
        State::new(&vocab, vec![Value::Int(0); m])?,
    )?;

    let mut components = Vec::with_capacity(m);
    for t in 0..m {
        let w = ((n + 1) as f64).powi((m - 1 - t) as i32);
        let points = if n >= 2 {
            vec![(0.0, 0.0), ((n - 1) as f64, w * (n - 1) as f64)]
        } else {
            vec![(0.0, 0.0)]
        };
        components.push((format!("x{t}"), UtilityComponent::Linear(points)));
    }

    Network::new(vocab, nodes, "root".into(), init, UtilityFunction { components })
}

/// A seeded random refinement network for the admissibility and
/// examined-fraction suites. All branch conditions are TRUE and all effects
/// are absolute assignments, so every plan is executable from every state.
pub fn random_network(seed: u64) -> Result<Network> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let goal_hi = 15i64;
    let vocab = Vocabulary::new(vec![
        Fluent { name: "g".into(), domain: FluentDomain::IntRange(0, goal_hi) },
        Fluent { name: "flag".into(), domain: FluentDomain::boolean() },
    ])?;

    let mut nodes: BTreeMap<String, NetworkNode> = BTreeMap::new();
    let mut counter = 0usize;

    fn random_concrete(
        rng: &mut ChaCha8Rng,
        name: &str,
        goal_hi: i64,
        branch_count: usize,
    ) -> ActionDescription {
        // Integer percentages summing to 100 keep probability sums exact;
        // distinct cuts keep the branch count exact.
        let mut cuts: Vec<u32> = rand::seq::index::sample(rng, 99, branch_count - 1)
            .iter()
            .map(|i| i as u32 + 1)
            .collect();
        cuts.sort_unstable();
        let mut probs = Vec::with_capacity(cuts.len() + 1);
        let mut prev = 0;
        for c in &cuts {
            probs.push((*c - prev) as f64 / 100.0);
            prev = *c;
        }
        probs.push((100 - prev) as f64 / 100.0);
        // Distinct assigned values keep per-condition effects unique.
        let mut values: Vec<i64> = (0..=goal_hi).collect();
        let branches = probs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let vi = rng.gen_range(0..values.len());
                let val = values.swap_remove(vi);
                let mut eff = EffectSpec::new();
                eff.set("g", ValueConstraint::Exact(Value::Int(val)));
                if rng.gen_bool(0.3) {
                    let flag = if rng.gen_bool(0.5) { "T" } else { "F" };
                    eff.set("flag", ValueConstraint::Exact(Value::sym(flag)));
                }
                Branch {
                    label: format!("b{i}"),
                    condition: ConditionSpec::Single(Sentence::True),
                    prob: ProbSpec::Point(*p),
                    effect: eff,
                }
            })
            .collect();
        ActionDescription::concrete(name, rng.gen_range(1..=3), branches)
    }

    // Abstract node over freshly generated instances, grouped by branch
    // position. An instance is either a concrete action or, below the depth
    // limit, a task of a fresh concrete action followed by a child abstract
    // action shared by all siblings — giving the network a refinement
    // hierarchy more than one level deep.
    fn make_abstract(
        rng: &mut ChaCha8Rng,
        nodes: &mut BTreeMap<String, NetworkNode>,
        counter: &mut usize,
        goal_hi: i64,
        depth: u32,
    ) -> Result<(String, ActionDescription)> {
        let fresh = |prefix: &str, counter: &mut usize| {
            let name = format!("{prefix}{}", *counter);
            *counter += 1;
            name
        };
        let inst_count = rng.gen_range(2..=3usize);
        let dur = rng.gen_range(1..=3u64);
        // Equal branch counts keep the positional grouping free of
        // (FALSE, 0) pads, so the abstract branches stay unconditional
        // and compose into multi-step tasks.
        let branch_count = rng.gen_range(1..=3usize);
        let nested = depth < 2 && rng.gen_bool(0.4);
        let child = if nested {
            Some(make_abstract(rng, nodes, counter, goal_hi, depth + 1)?)
        } else {
            None
        };
        let mut inst_names = Vec::with_capacity(inst_count);
        let mut insts = Vec::with_capacity(inst_count);
        for _ in 0..inst_count {
            let name = fresh("c", counter);
            let mut a = random_concrete(rng, &name, goal_hi, branch_count);
            a.duration = dur; // inter abstraction requires equal durations
            nodes.insert(name.clone(), NetworkNode::Concrete(a.clone()));
            match &child {
                Some((child_name, child_desc)) => {
                    let task_name = fresh("t", counter);
                    let desc = compose_sequential(&task_name, &[&a, child_desc])?;
                    nodes.insert(
                        task_name.clone(),
                        NetworkNode::Task { steps: vec![name, child_name.clone()] },
                    );
                    inst_names.push(task_name);
                    insts.push(desc);
                }
                None => {
                    inst_names.push(name);
                    insts.push(a);
                }
            }
        }
        let refs: Vec<&ActionDescription> = insts.iter().collect();
        // All instances share the concrete branch count and (when nested) the
        // same child abstract, so branch positions align across instances.
        let sets: Vec<Vec<(String, String)>> = (0..insts[0].branches.len())
            .map(|i| {
                insts
                    .iter()
                    .map(|a| (a.name.clone(), a.branches[i].label.clone()))
                    .collect()
            })
            .collect();
        let abs_name = fresh("A", counter);
        let desc = inter_abstract_ii(&abs_name, &refs, &sets)?;
        nodes.insert(
            abs_name.clone(),
            NetworkNode::Abstract { description: desc.clone(), instances: inst_names },
        );
        Ok((abs_name, desc))
    }

    let item_count = rng.gen_range(1..=2usize);
    let mut root_steps = Vec::with_capacity(item_count);
    for _ in 0..item_count {
        root_steps.push(make_abstract(&mut rng, &mut nodes, &mut counter, goal_hi, 1)?.0);
    }
    nodes.insert("root".into(), NetworkNode::Task { steps: root_steps });

    let init_g = rng.gen_range(0..=goal_hi);
    let init = StateDistribution::point(
        &vocab,
        State::from_pairs(
            &vocab,
            &[("g".into(), Value::Int(init_g)), ("flag".into(), Value::sym("F"))],
        )?,
    )?;

    let slope = loop {
        let s = rng.gen_range(-30..=30i64);
        if s != 0 {
            break s as f64;
        }
    };
    let mut components = vec![(
        "g".to_string(),
        UtilityComponent::Linear(vec![(0.0, 0.0), (goal_hi as f64, slope)]),
    )];
    if rng.gen_bool(0.5) {
        components.push((
            "flag".to_string(),
            UtilityComponent::Table(vec![
                (Value::sym("T"), rng.gen_range(-10..=10) as f64),
                (Value::sym("F"), 0.0),
            ]),
        ));
    }
    if rng.gen_bool(0.5) {
        components.push((
            crate::planner::ELAPSED.to_string(),
            UtilityComponent::Linear(vec![(0.0, 0.0), (10.0, rng.gen_range(-20..=0) as f64)]),
        ));
    }

    Network::new(vocab, nodes, "root".into(), init, UtilityFunction { components })
}
