//! Finite fluent world representation: vocabularies, states, sentences,
//! model enumeration, distributions over states, and the 0/1 lower/upper
//! probability operators over state sets.

use std::collections::HashMap;
use std::fmt;

use crate::{Error, Result, EPS};

/// A fluent value: a bounded integer or a symbolic constant (booleans are the
/// symbols `T` and `F`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Sym(String),
}

impl Value {
    pub fn sym(s: &str) -> Value {
        Value::Sym(s.to_string())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            Value::Sym(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => write!(f, "{s}"),
        }
    }
}

/// The value domain of a fluent: an explicit finite set or a bounded integer
/// range (inclusive on both ends).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FluentDomain {
    Values(Vec<Value>),
    IntRange(i64, i64),
}

impl FluentDomain {
    pub fn boolean() -> FluentDomain {
        FluentDomain::Values(vec![Value::sym("T"), Value::sym("F")])
    }

    pub fn contains(&self, v: &Value) -> bool {
        match self {
            FluentDomain::Values(vs) => vs.contains(v),
            FluentDomain::IntRange(lo, hi) => matches!(v, Value::Int(i) if lo <= i && i <= hi),
        }
    }

    pub fn values(&self) -> Vec<Value> {
        match self {
            FluentDomain::Values(vs) => vs.clone(),
            FluentDomain::IntRange(lo, hi) => (*lo..=*hi).map(Value::Int).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FluentDomain::Values(vs) => vs.len(),
            FluentDomain::IntRange(lo, hi) => {
                if lo > hi {
                    0
                } else {
                    (hi - lo + 1) as usize
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether all values are integers (relative effects and order relations
    /// are only meaningful on such domains).
    pub fn is_numeric(&self) -> bool {
        match self {
            FluentDomain::Values(vs) => vs.iter().all(|v| matches!(v, Value::Int(_))),
            FluentDomain::IntRange(..) => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fluent {
    pub name: String,
    pub domain: FluentDomain,
}

/// An ordered list of fluents with unique names and non-empty finite domains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    fluents: Vec<Fluent>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(fluents: Vec<Fluent>) -> Result<Vocabulary> {
        let mut index = HashMap::new();
        for (i, f) in fluents.iter().enumerate() {
            if index.insert(f.name.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate fluent name `{}`", f.name)));
            }
            if f.domain.is_empty() {
                return Err(Error::Validation(format!("fluent `{}` has an empty domain", f.name)));
            }
            if let FluentDomain::Values(vs) = &f.domain {
                let mut seen = vs.clone();
                seen.sort();
                seen.dedup();
                if seen.len() != vs.len() {
                    return Err(Error::Validation(format!(
                        "fluent `{}` has duplicate domain values",
                        f.name
                    )));
                }
            }
        }
        Ok(Vocabulary { fluents, index })
    }

    pub fn fluents(&self) -> &[Fluent] {
        &self.fluents
    }

    pub fn len(&self) -> usize {
        self.fluents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fluents.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::Validation(format!("unknown fluent `{name}`")))
    }

    pub fn fluent(&self, i: usize) -> &Fluent {
        &self.fluents[i]
    }

    /// Number of distinct states (saturating).
    pub fn state_count(&self) -> usize {
        self.fluents
            .iter()
            .fold(1usize, |acc, f| acc.saturating_mul(f.domain.len()))
    }

    /// Enumerate every state of the vocabulary in a deterministic order.
    pub fn states(&self) -> Vec<State> {
        let mut out = vec![State { values: Vec::new() }];
        for f in &self.fluents {
            let vals = f.domain.values();
            let mut next = Vec::with_capacity(out.len() * vals.len());
            for s in &out {
                for v in &vals {
                    let mut values = s.values.clone();
                    values.push(v.clone());
                    next.push(State { values });
                }
            }
            out = next;
        }
        out
    }
}

/// One value assignment per vocabulary fluent, stored in vocabulary order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    values: Vec<Value>,
}

impl State {
    pub fn new(v: &Vocabulary, values: Vec<Value>) -> Result<State> {
        if values.len() != v.len() {
            return Err(Error::Validation(format!(
                "state has {} values, vocabulary has {} fluents",
                values.len(),
                v.len()
            )));
        }
        for (i, val) in values.iter().enumerate() {
            if !v.fluent(i).domain.contains(val) {
                return Err(Error::Validation(format!(
                    "value {val} outside the domain of fluent `{}`",
                    v.fluent(i).name
                )));
            }
        }
        Ok(State { values })
    }

    pub fn from_pairs(v: &Vocabulary, pairs: &[(String, Value)]) -> Result<State> {
        let mut values: Vec<Option<Value>> = vec![None; v.len()];
        for (name, val) in pairs {
            let i = v.require(name)?;
            if values[i].is_some() {
                return Err(Error::Validation(format!("fluent `{name}` assigned twice")));
            }
            values[i] = Some(val.clone());
        }
        let mut out = Vec::with_capacity(v.len());
        for (i, val) in values.into_iter().enumerate() {
            match val {
                Some(val) => out.push(val),
                None => {
                    return Err(Error::Validation(format!(
                        "state missing a value for fluent `{}`",
                        v.fluent(i).name
                    )))
                }
            }
        }
        State::new(v, out)
    }

    pub fn get(&self, i: usize) -> &Value {
        &self.values[i]
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn with_value(&self, i: usize, val: Value) -> State {
        let mut values = self.values.clone();
        values[i] = val;
        State { values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    fn holds_int(self, a: i64, b: i64) -> bool {
        match self {
            Rel::Eq => a == b,
            Rel::Ne => a != b,
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Gt => a > b,
            Rel::Ge => a >= b,
        }
    }

    fn holds_value(self, a: &Value, b: &Value) -> Result<bool> {
        match (a, b) {
            (Value::Int(a), Value::Int(b)) => Ok(self.holds_int(*a, *b)),
            _ => match self {
                Rel::Eq => Ok(a == b),
                Rel::Ne => Ok(a != b),
                _ => Err(Error::Validation(
                    "order relation applied to non-numeric values".into(),
                )),
            },
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }
}

/// Right-hand side of an atom: a constant, or the fluent's own pre-action
/// value offset by an integer (`f@start + d`, only meaningful in queries).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rhs {
    Const(Value),
    StartOffset { fluent: String, offset: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub fluent: String,
    pub rel: Rel,
    pub rhs: Rhs,
}

/// A propositional sentence over fluent relation atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Sentence {
    True,
    False,
    Atom(Atom),
    Not(Box<Sentence>),
    And(Vec<Sentence>),
    Or(Vec<Sentence>),
}

impl Sentence {
    pub fn atom(fluent: &str, rel: Rel, value: Value) -> Sentence {
        Sentence::Atom(Atom {
            fluent: fluent.to_string(),
            rel,
            rhs: Rhs::Const(value),
        })
    }

    pub fn not(s: Sentence) -> Sentence {
        Sentence::Not(Box::new(s))
    }

    /// Conjunction with trivial simplifications (flattening is not attempted).
    pub fn conj(parts: Vec<Sentence>) -> Sentence {
        let parts: Vec<Sentence> = parts.into_iter().filter(|p| *p != Sentence::True).collect();
        if parts.iter().any(|p| *p == Sentence::False) {
            return Sentence::False;
        }
        match parts.len() {
            0 => Sentence::True,
            1 => parts.into_iter().next().unwrap(),
            _ => Sentence::And(parts),
        }
    }

    pub fn disj(parts: Vec<Sentence>) -> Sentence {
        let parts: Vec<Sentence> = parts.into_iter().filter(|p| *p != Sentence::False).collect();
        if parts.iter().any(|p| *p == Sentence::True) {
            return Sentence::True;
        }
        match parts.len() {
            0 => Sentence::False,
            1 => parts.into_iter().next().unwrap(),
            _ => Sentence::Or(parts),
        }
    }

    /// Check that every atom references a vocabulary fluent with a
    /// type-matching relation. `allow_start` admits `@start` offsets.
    pub fn validate(&self, v: &Vocabulary, allow_start: bool) -> Result<()> {
        match self {
            Sentence::True | Sentence::False => Ok(()),
            Sentence::Not(s) => s.validate(v, allow_start),
            Sentence::And(ps) | Sentence::Or(ps) => {
                for p in ps {
                    p.validate(v, allow_start)?;
                }
                Ok(())
            }
            Sentence::Atom(a) => {
                let i = v.require(&a.fluent)?;
                let numeric = v.fluent(i).domain.is_numeric();
                match &a.rhs {
                    Rhs::Const(val) => {
                        let val_numeric = matches!(val, Value::Int(_));
                        if numeric != val_numeric {
                            return Err(Error::Validation(format!(
                                "atom on `{}` mixes numeric and symbolic operands",
                                a.fluent
                            )));
                        }
                        if !numeric && !matches!(a.rel, Rel::Eq | Rel::Ne) {
                            return Err(Error::Validation(format!(
                                "order relation on symbolic fluent `{}`",
                                a.fluent
                            )));
                        }
                        Ok(())
                    }
                    Rhs::StartOffset { fluent, offset } => {
                        if !allow_start {
                            return Err(Error::Validation(format!(
                                "`@start` reference on `{fluent}` not allowed here"
                            )));
                        }
                        let j = v.require(fluent)?;
                        if !numeric || !v.fluent(j).domain.is_numeric() {
                            if *offset != 0 || !matches!(a.rel, Rel::Eq | Rel::Ne) {
                                return Err(Error::Validation(format!(
                                    "`@start` offset on non-numeric fluent `{fluent}`"
                                )));
                            }
                        }
                        Ok(())
                    }
                }
            }
        }
    }

    /// Evaluate over a single state. Errors on `@start` atoms.
    pub fn eval(&self, v: &Vocabulary, s: &State) -> Result<bool> {
        self.eval_pair(v, s, s)
    }

    /// Evaluate over a (pre-state, post-state) pair: plain atoms read the
    /// post-state, `@start` references read the pre-state.
    pub fn eval_pair(&self, v: &Vocabulary, pre: &State, post: &State) -> Result<bool> {
        match self {
            Sentence::True => Ok(true),
            Sentence::False => Ok(false),
            Sentence::Not(s) => Ok(!s.eval_pair(v, pre, post)?),
            Sentence::And(ps) => {
                for p in ps {
                    if !p.eval_pair(v, pre, post)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Sentence::Or(ps) => {
                for p in ps {
                    if p.eval_pair(v, pre, post)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Sentence::Atom(a) => {
                let i = v.require(&a.fluent)?;
                let lhs = post.get(i);
                match &a.rhs {
                    Rhs::Const(val) => a.rel.holds_value(lhs, val),
                    Rhs::StartOffset { fluent, offset } => {
                        let j = v.require(fluent)?;
                        let base = pre.get(j);
                        match (lhs, base) {
                            (Value::Int(l), Value::Int(b)) => Ok(a.rel.holds_int(*l, b + offset)),
                            _ if *offset == 0 => a.rel.holds_value(lhs, base),
                            _ => Err(Error::Validation(format!(
                                "`@start` offset on non-numeric fluent `{fluent}`"
                            ))),
                        }
                    }
                }
            }
        }
    }

    /// Whether this sentence mentions any `@start` atom.
    pub fn references_start(&self) -> bool {
        match self {
            Sentence::True | Sentence::False => false,
            Sentence::Not(s) => s.references_start(),
            Sentence::And(ps) | Sentence::Or(ps) => ps.iter().any(|p| p.references_start()),
            Sentence::Atom(a) => matches!(a.rhs, Rhs::StartOffset { .. }),
        }
    }
}

/// Build a state from values already known to be domain-valid.
pub(crate) fn state_from_raw(values: Vec<Value>) -> State {
    State { values }
}

/// Exactly the states of `v` satisfying `s`.
pub fn models(s: &Sentence, v: &Vocabulary) -> Result<Vec<State>> {
    s.validate(v, false)?;
    let mut out = Vec::new();
    for st in v.states() {
        if s.eval(v, &st)? {
            out.push(st);
        }
    }
    Ok(out)
}

/// True iff every model of `a` is a model of `b`.
pub fn entails(a: &Sentence, b: &Sentence, v: &Vocabulary) -> Result<bool> {
    a.validate(v, false)?;
    b.validate(v, false)?;
    for st in v.states() {
        if a.eval(v, &st)? && !b.eval(v, &st)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lower probability of `phi` conditioned on a state set: 1 iff every state
/// satisfies `phi`, 0 otherwise.
pub fn lower_prob(phi: &Sentence, s_set: &[State], v: &Vocabulary) -> Result<u8> {
    if s_set.is_empty() {
        return Err(Error::DegenerateEffect);
    }
    for s in s_set {
        if !phi.eval(v, s)? {
            return Ok(0);
        }
    }
    Ok(1)
}

/// Upper probability of `phi` conditioned on a state set: 0 iff no state
/// satisfies `phi`, 1 otherwise.
pub fn upper_prob(phi: &Sentence, s_set: &[State], v: &Vocabulary) -> Result<u8> {
    if s_set.is_empty() {
        return Err(Error::DegenerateEffect);
    }
    for s in s_set {
        if phi.eval(v, s)? {
            return Ok(1);
        }
    }
    Ok(0)
}

/// A closed subinterval of [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ProbInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ProbInterval {
    pub fn new(lo: f64, hi: f64) -> Result<ProbInterval> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi + EPS {
            return Err(Error::Validation(format!(
                "invalid probability interval [{lo}, {hi}]"
            )));
        }
        Ok(ProbInterval { lo: lo.min(hi), hi })
    }

    pub fn point(p: f64) -> Result<ProbInterval> {
        ProbInterval::new(p, p)
    }

    /// Clamp into [0, 1] and order the endpoints.
    pub fn clamped(lo: f64, hi: f64) -> ProbInterval {
        let lo = lo.clamp(0.0, 1.0);
        let hi = hi.clamp(0.0, 1.0);
        ProbInterval { lo: lo.min(hi), hi: lo.max(hi) }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo - EPS <= p && p <= self.hi + EPS
    }

    pub fn contains_interval(&self, other: &ProbInterval) -> bool {
        self.lo - EPS <= other.lo && other.hi <= self.hi + EPS
    }

    pub fn is_point(&self) -> bool {
        (self.hi - self.lo).abs() <= EPS
    }
}

/// A finite probability distribution over distinct states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistribution {
    entries: Vec<(State, f64)>,
}

impl StateDistribution {
    pub fn new(v: &Vocabulary, entries: Vec<(State, f64)>) -> Result<StateDistribution> {
        let mut total = 0.0;
        for (s, p) in &entries {
            State::new(v, s.values().to_vec())?;
            if !(0.0..=1.0 + EPS).contains(p) {
                return Err(Error::Validation(format!("probability {p} outside [0, 1]")));
            }
            total += p;
        }
        if (total - 1.0).abs() > EPS {
            return Err(Error::Validation(format!(
                "distribution probabilities sum to {total}, expected 1"
            )));
        }
        let mut seen = entries.iter().map(|(s, _)| s.clone()).collect::<Vec<_>>();
        seen.sort();
        seen.dedup();
        if seen.len() != entries.len() {
            return Err(Error::Validation("distribution states are not distinct".into()));
        }
        Ok(StateDistribution { entries })
    }

    /// Point mass on a single state.
    pub fn point(v: &Vocabulary, s: State) -> Result<StateDistribution> {
        StateDistribution::new(v, vec![(s, 1.0)])
    }

    pub fn entries(&self) -> &[(State, f64)] {
        &self.entries
    }

    /// Sum of the weights of states satisfying `s`.
    pub fn prob_of(&self, s: &Sentence, v: &Vocabulary) -> Result<f64> {
        s.validate(v, false)?;
        let mut total = 0.0;
        for (st, p) in &self.entries {
            if s.eval(v, st)? {
                total += p;
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab_muddy() -> Vocabulary {
        Vocabulary::new(vec![Fluent {
            name: "muddy".into(),
            domain: FluentDomain::boolean(),
        }])
        .unwrap()
    }

    fn vocab_fuel() -> Vocabulary {
        Vocabulary::new(vec![Fluent {
            name: "fuel".into(),
            domain: FluentDomain::IntRange(0, 10),
        }])
        .unwrap()
    }

    #[test]
    fn models_tautology_and_contradiction() {
        let v = vocab_muddy();
        assert_eq!(models(&Sentence::True, &v).unwrap().len(), 2);
        let contradiction = Sentence::conj(vec![
            Sentence::atom("muddy", Rel::Eq, Value::sym("T")),
            Sentence::atom("muddy", Rel::Eq, Value::sym("F")),
        ]);
        assert!(models(&contradiction, &v).unwrap().is_empty());
    }

    #[test]
    fn models_int_filter() {
        let v = vocab_fuel();
        let s = Sentence::atom("fuel", Rel::Ge, Value::Int(9));
        // Oracle: enumerate all 11 states and filter.
        let expected: Vec<State> = v
            .states()
            .into_iter()
            .filter(|st| st.get(0).as_int().unwrap() >= 9)
            .collect();
        assert_eq!(models(&s, &v).unwrap(), expected);
        assert_eq!(expected.len(), 2);
    }

    #[test]
    fn models_rejects_unknown_fluent() {
        let v = vocab_muddy();
        let s = Sentence::atom("snowing", Rel::Eq, Value::sym("T"));
        assert!(models(&s, &v).is_err());
    }

    #[test]
    fn entails_examples() {
        let v = vocab_fuel();
        let a = Sentence::atom("fuel", Rel::Eq, Value::Int(3));
        let b = Sentence::atom("fuel", Rel::Ge, Value::Int(2));
        assert!(entails(&a, &b, &v).unwrap());
        assert!(!entails(&Sentence::True, &Sentence::False, &v).unwrap());

        let vm = vocab_muddy();
        let taut = Sentence::disj(vec![
            Sentence::atom("muddy", Rel::Eq, Value::sym("T")),
            Sentence::atom("muddy", Rel::Eq, Value::sym("F")),
        ]);
        assert!(entails(&taut, &Sentence::True, &vm).unwrap());
    }

    #[test]
    fn lower_upper_prob_cases() {
        let v = vocab_muddy();
        let all = v.states();
        let phi = Sentence::atom("muddy", Rel::Eq, Value::sym("T"));
        let phi_states = models(&phi, &v).unwrap();
        assert_eq!(lower_prob(&phi, &phi_states, &v).unwrap(), 1);
        assert_eq!(lower_prob(&phi, &all, &v).unwrap(), 0);
        assert_eq!(upper_prob(&phi, &all, &v).unwrap(), 1);
        let not_phi = models(&Sentence::not(phi.clone()), &v).unwrap();
        assert_eq!(upper_prob(&phi, &not_phi, &v).unwrap(), 0);
        assert_eq!(lower_prob(&Sentence::True, &all, &v).unwrap(), 1);
        assert_eq!(upper_prob(&Sentence::False, &all, &v).unwrap(), 0);
        assert!(lower_prob(&phi, &[], &v).is_err());
    }

    #[test]
    fn prob_of_cases() {
        let v = vocab_muddy();
        let states = v.states();
        let d = StateDistribution::new(
            &v,
            states.iter().map(|s| (s.clone(), 0.5)).collect(),
        )
        .unwrap();
        assert!((d.prob_of(&Sentence::True, &v).unwrap() - 1.0).abs() < EPS);
        assert!(d.prob_of(&Sentence::False, &v).unwrap().abs() < EPS);
        let phi = Sentence::atom("muddy", Rel::Eq, Value::sym("T"));
        assert!((d.prob_of(&phi, &v).unwrap() - 0.5).abs() < EPS);
    }

    #[test]
    fn distribution_must_sum_to_one() {
        let v = vocab_muddy();
        let states = v.states();
        assert!(StateDistribution::new(
            &v,
            states.iter().map(|s| (s.clone(), 0.6)).collect()
        )
        .is_err());
    }

    #[test]
    fn entails_iff_lower_prob_one() {
        let v = vocab_fuel();
        let a = Sentence::atom("fuel", Rel::Le, Value::Int(4));
        let b = Sentence::atom("fuel", Rel::Le, Value::Int(7));
        let ma = models(&a, &v).unwrap();
        assert_eq!(
            entails(&a, &b, &v).unwrap(),
            lower_prob(&b, &ma, &v).unwrap() == 1
        );
    }

    #[test]
    fn eval_pair_start_offset() {
        let v = vocab_fuel();
        let pre = State::new(&v, vec![Value::Int(10)]).unwrap();
        let post = State::new(&v, vec![Value::Int(2)]).unwrap();
        let q = Sentence::Atom(Atom {
            fluent: "fuel".into(),
            rel: Rel::Eq,
            rhs: Rhs::StartOffset { fluent: "fuel".into(), offset: -8 },
        });
        assert!(q.eval_pair(&v, &pre, &post).unwrap());
        assert!(!q.eval_pair(&v, &pre, &pre).unwrap());
    }
}
