//! The domain file language: a line-oriented keyword syntax for
//! vocabularies, concrete actions, abstraction declarations, task
//! decompositions, initial distributions, and utility functions, plus a
//! canonical serializer that round-trips through the parser.
//!
//! ```text
//! fluent snowing { T F }
//! fluent fuel int 0..12
//!
//! action mountain-road dur 1 {
//!   branch a if snowing = T prob 0.9 { time += 5; fuel -= 9; muddy := T }
//! }
//!
//! abstract drive inter1 of mountain-road valley-road grouping (mountain-road.a valley-road.i) ...
//! task deliver = drive
//! root deliver
//! init { 0.3 (snowing = T, fuel = 12) ... }
//! utility { fuel linear (0, 0) (12, 12)  muddy table { T: -5, F: 0 } }
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::abstraction::{
    inter_abstract_i, inter_abstract_ii, intra_abstract_i, intra_abstract_ii, GroupingPlan,
};
use crate::actions::{
    validate_concrete, AbstractStyle, ActionDescription, Branch, ConditionSpec, EffectSpec,
    ProbSpec, ValueConstraint,
};
use crate::planner::{
    compose_sequential, Network, NetworkNode, UtilityComponent, UtilityFunction,
};
use crate::worldmodel::{
    Atom, Fluent, FluentDomain, Rel, Rhs, Sentence, State, StateDistribution, Value, Vocabulary,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Ident(String),
    Num(f64),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let n = chars.len();
    let two_char: &[&'static str] = &[":=", "!=", "<=", ">=", "+=", "-="];
    let one_char = "()[]{},;:|.@=<>+-";
    while i < n {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c == '#' {
            while i < n && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tline, tcol) = (line, col);
        if is_ident_start(c) {
            let mut s = String::new();
            while i < n {
                let c = chars[i];
                if is_ident_continue(c)
                    // '-' stays inside an identifier only when a letter
                    // follows, so `fuel -= 9` and `fuel@start - 8` lex apart
                    // from `mountain-road`.
                    || (c == '-' && i + 1 < n && chars[i + 1].is_ascii_alphabetic())
                {
                    s.push(c);
                    i += 1;
                    col += 1;
                } else {
                    break;
                }
            }
            toks.push(Tok { kind: TokKind::Ident(s), line: tline, col: tcol });
            continue;
        }
        let starts_number = c.is_ascii_digit()
            || ((c == '-' || c == '+') && i + 1 < n && chars[i + 1].is_ascii_digit());
        if starts_number {
            let mut s = String::new();
            if c == '-' || c == '+' {
                s.push(c);
                i += 1;
                col += 1;
            }
            let mut seen_dot = false;
            while i < n {
                let c = chars[i];
                if c.is_ascii_digit() {
                    s.push(c);
                } else if c == '.'
                    && !seen_dot
                    && i + 1 < n
                    && chars[i + 1].is_ascii_digit()
                {
                    seen_dot = true;
                    s.push(c);
                } else {
                    break;
                }
                i += 1;
                col += 1;
            }
            let v: f64 = s.parse().map_err(|_| Error::Parse {
                line: tline,
                col: tcol,
                msg: format!("malformed number `{s}`"),
            })?;
            toks.push(Tok { kind: TokKind::Num(v), line: tline, col: tcol });
            continue;
        }
        if i + 1 < n {
            let pair: String = [c, chars[i + 1]].iter().collect();
            if let Some(p) = two_char.iter().find(|t| **t == pair) {
                toks.push(Tok { kind: TokKind::Punct(p), line: tline, col: tcol });
                i += 2;
                col += 2;
                continue;
            }
        }
        if let Some(pos) = one_char.find(c) {
            let p = &one_char[pos..pos + c.len_utf8()];
            // Map back to a 'static str by matching, to keep TokKind simple.
            let p: &'static str = match p {
                "(" => "(",
                ")" => ")",
                "[" => "[",
                "]" => "]",
                "{" => "{",
                "}" => "}",
                "," => ",",
                ";" => ";",
                ":" => ":",
                "|" => "|",
                "." => ".",
                "@" => "@",
                "=" => "=",
                "<" => "<",
                ">" => ">",
                "+" => "+",
                "-" => "-",
                _ => unreachable!(),
            };
            toks.push(Tok { kind: TokKind::Punct(p), line: tline, col: tcol });
            i += 1;
            col += 1;
            continue;
        }
        return Err(Error::Parse {
            line: tline,
            col: tcol,
            msg: format!("unexpected character `{c}`"),
        });
    }
    toks.push(Tok { kind: TokKind::Eof, line, col });
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<Tok>,
    i: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Parser> {
        Ok(Parser { toks: lex(text)?, i: 0 })
    }

    fn peek(&self) -> &TokKind {
        &self.toks[self.i].kind
    }

fn bump(&mut self) -> TokKind {
        let k = self.toks[self.i].kind.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        k
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let t = &self.toks[self.i];
        Error::Parse { line: t.line, col: t.col, msg: msg.into() }
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), TokKind::Eof)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if matches!(self.peek(), TokKind::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{p}`")))
        }
    }

    fn peek_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), TokKind::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.peek_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err(format!("expected keyword `{kw}`")))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            TokKind::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn expect_num(&mut self) -> Result<f64> {
        match *self.peek() {
            TokKind::Num(v) => {
                self.bump();
                Ok(v)
            }
            _ => Err(self.err("expected a number")),
        }
    }

    fn expect_int(&mut self) -> Result<i64> {
        let v = self.expect_num()?;
        if v.fract() != 0.0 {
            return Err(self.err(format!("expected an integer, found {v}")));
        }
        Ok(v as i64)
    }

    fn expect_value(&mut self) -> Result<Value> {
        match self.peek().clone() {
            TokKind::Num(_) => Ok(Value::Int(self.expect_int()?)),
            TokKind::Ident(s) => {
                self.bump();
                Ok(Value::sym(&s))
            }
            _ => Err(self.err("expected a value")),
        }
    }

    // -- sentences ----------------------------------------------------------

    fn parse_sentence(&mut self) -> Result<Sentence> {
        let mut parts = vec![self.parse_conjunct()?];
        while self.eat_kw("or") {
            parts.push(self.parse_conjunct()?);
        }
        Ok(Sentence::disj(parts))
    }

    fn parse_conjunct(&mut self) -> Result<Sentence> {
        let mut parts = vec![self.parse_literal()?];
        while self.eat_kw("and") {
            parts.push(self.parse_literal()?);
        }
        Ok(Sentence::conj(parts))
    }

    fn parse_literal(&mut self) -> Result<Sentence> {
        if self.eat_kw("not") {
            return Ok(Sentence::not(self.parse_literal()?));
        }
        if self.eat_punct("(") {
            let s = self.parse_sentence()?;
            self.expect_punct(")")?;
            return Ok(s);
        }
        if self.eat_kw("true") {
            return Ok(Sentence::True);
        }
        if self.eat_kw("false") {
            return Ok(Sentence::False);
        }
        self.parse_atom()
    }

    fn parse_atom(&mut self) -> Result<Sentence> {
        let fluent = self.expect_ident("a fluent name")?;
        if self.eat_punct("@") {
            let tag = self.expect_ident("`end`")?;
            if tag != "end" {
                return Err(self.err("only `@end` may appear on the left of a relation"));
            }
        }
        let rel = self.parse_rel()?;
        let rhs = self.parse_rhs()?;
        Ok(Sentence::Atom(Atom { fluent, rel, rhs }))
    }

    fn parse_rel(&mut self) -> Result<Rel> {
        let rel = match self.peek() {
            TokKind::Punct("=") => Rel::Eq,
            TokKind::Punct("!=") => Rel::Ne,
            TokKind::Punct("<") => Rel::Lt,
            TokKind::Punct("<=") => Rel::Le,
            TokKind::Punct(">") => Rel::Gt,
            TokKind::Punct(">=") => Rel::Ge,
            _ => return Err(self.err("expected a relation (=, !=, <, <=, >, >=)")),
        };
        self.bump();
        Ok(rel)
    }

    fn parse_rhs(&mut self) -> Result<Rhs> {
        match self.peek().clone() {
            TokKind::Num(_) => Ok(Rhs::Const(Value::Int(self.expect_int()?))),
            TokKind::Ident(name) => {
                self.bump();
                if self.eat_punct("@") {
                    let tag = self.expect_ident("`start`")?;
                    if tag != "start" {
                        return Err(self.err("only `@start` may appear on the right"));
                    }
                    let offset = if self.eat_punct("+") {
                        self.expect_int()?
                    } else if self.eat_punct("-") {
                        -self.expect_int()?
                    } else if matches!(self.peek(), TokKind::Num(v) if *v < 0.0) {
                        self.expect_int()?
                    } else {
                        0
                    };
                    Ok(Rhs::StartOffset { fluent: name, offset })
                } else {
                    Ok(Rhs::Const(Value::sym(&name)))
                }
            }
            _ => Err(self.err("expected a value or `fluent@start` reference")),
        }
    }

    // -- branches -----------------------------------------------------------

    fn parse_condition(&mut self) -> Result<ConditionSpec> {
        if self.eat_kw("list") {
            let mut conds = vec![self.parse_sentence()?];
            while self.eat_punct("|") {
                conds.push(self.parse_sentence()?);
            }
            return Ok(ConditionSpec::CondList(conds));
        }
        if self.eat_kw("conj") {
            let conj = self.parse_sentence()?;
            self.expect_kw("disj")?;
            let disj = self.parse_sentence()?;
            return Ok(ConditionSpec::ConjDisj { conj, disj });
        }
        Ok(ConditionSpec::Single(self.parse_sentence()?))
    }

    fn parse_prob_value(&mut self) -> Result<f64> {
        let p = self.expect_num()?;
        if !(0.0..=1.0).contains(&p) {
            return Err(self.err(format!("probability {p} outside [0, 1]")));
        }
        Ok(p)
    }

    fn parse_prob(&mut self) -> Result<ProbSpec> {
        if self.eat_kw("list") {
            let mut ps = vec![self.parse_prob_value()?];
            while self.eat_punct("|") {
                ps.push(self.parse_prob_value()?);
            }
            return Ok(ProbSpec::ProbList(ps));
        }
        if self.eat_punct("[") {
            let lo = self.parse_prob_value()?;
            self.expect_punct(",")?;
            let hi = self.parse_prob_value()?;
            self.expect_punct("]")?;
            return Ok(ProbSpec::Range { lo, hi });
        }
        Ok(ProbSpec::Point(self.parse_prob_value()?))
    }

    fn parse_effect_item(&mut self) -> Result<(String, ValueConstraint)> {
        if self.eat_kw("maybe") {
            let (f, c) = self.parse_effect_item()?;
            return Ok((f, ValueConstraint::MaybeUnchanged(Box::new(c))));
        }
        let fluent = self.expect_ident("a fluent name")?;
        if self.eat_punct(":=") {
            if self.eat_kw("any") {
                return Ok((fluent, ValueConstraint::Any));
            }
            if self.eat_punct("{") {
                let mut vals = vec![self.expect_value()?];
                while self.eat_punct(",") {
                    vals.push(self.expect_value()?);
                }
                self.expect_punct("}")?;
                return Ok((fluent, ValueConstraint::AmongSet(vals)));
            }
            return Ok((fluent, ValueConstraint::Exact(self.expect_value()?)));
        }
        let negate = if self.eat_punct("+=") {
            false
        } else if self.eat_punct("-=") {
            true
        } else {
            return Err(self.err("expected `:=`, `+=` or `-=`"));
        };
        if self.eat_punct("[") {
            let lo = self.expect_int()?;
            self.expect_punct(",")?;
            let hi = self.expect_int()?;
            self.expect_punct("]")?;
            let (lo, hi) = if negate { (-hi, -lo) } else { (lo, hi) };
            return Ok((fluent, ValueConstraint::RelativeRange(lo, hi)));
        }
        let d = self.expect_int()?;
        Ok((fluent, ValueConstraint::RelativeExact(if negate { -d } else { d })))
    }

    fn parse_effects(&mut self) -> Result<EffectSpec> {
        self.expect_punct("{")?;
        let mut pairs = Vec::new();
        while !self.eat_punct("}") {
            pairs.push(self.parse_effect_item()?);
            if !self.eat_punct(";") && !matches!(self.peek(), TokKind::Punct("}")) {
                return Err(self.err("expected `;` or `}` after an effect"));
            }
        }
        EffectSpec::from_pairs(pairs)
    }

    fn parse_branch(&mut self) -> Result<Branch> {
        self.expect_kw("branch")?;
        let label = self.expect_ident("a branch label")?;
        self.expect_kw("if")?;
        let condition = self.parse_condition()?;
        self.expect_kw("prob")?;
        let prob = self.parse_prob()?;
        let effect = self.parse_effects()?;
        Ok(Branch { label, condition, prob, effect })
    }

    // -- statements ---------------------------------------------------------

    fn parse_fluent(&mut self) -> Result<Fluent> {
        let name = self.expect_ident("a fluent name")?;
        if self.eat_kw("int") {
            let lo = self.expect_int()?;
            self.expect_punct(".")?;
            self.expect_punct(".")?;
            let hi = self.expect_int()?;
            if lo > hi {
                return Err(self.err(format!("empty integer range {lo}..{hi}")));
            }
            return Ok(Fluent { name, domain: FluentDomain::IntRange(lo, hi) });
        }
        self.expect_punct("{")?;
        let mut vals = Vec::new();
        while !self.eat_punct("}") {
            vals.push(self.expect_value()?);
        }
        Ok(Fluent { name, domain: FluentDomain::Values(vals) })
    }

    fn parse_action(&mut self) -> Result<ActionDescription> {
        let name = self.expect_ident("an action name")?;
        self.expect_kw("dur")?;
        let dur = self.expect_int()?;
        if dur < 0 {
            return Err(self.err("duration must be non-negative"));
        }
        self.expect_punct("{")?;
        let mut branches = Vec::new();
        while !self.eat_punct("}") {
            branches.push(self.parse_branch()?);
        }
        Ok(ActionDescription::concrete(&name, dur as u64, branches))
    }

    fn parse_grouping_sets(&mut self) -> Result<Vec<Vec<(String, Option<String>)>>> {
        let mut sets = Vec::new();
        while self.eat_punct("(") {
            let mut set = Vec::new();
            while !self.eat_punct(")") {
                let first = self.expect_ident("a branch reference")?;
                if self.eat_punct(".") {
                    let label = self.expect_ident("a branch label")?;
                    set.push((first, Some(label)));
                } else {
                    set.push((first, None));
                }
            }
            sets.push(set);
        }
        if sets.is_empty() {
            return Err(self.err("expected at least one grouping set `(...)`"));
        }
        Ok(sets)
    }

    fn parse_init(&mut self, vocab: &Vocabulary) -> Result<StateDistribution> {
        self.expect_punct("{")?;
        let mut entries = Vec::new();
        while !self.eat_punct("}") {
            let p = self.expect_num()?;
            self.expect_punct("(")?;
            let mut pairs = Vec::new();
            loop {
                let f = self.expect_ident("a fluent name")?;
                self.expect_punct("=")?;
                pairs.push((f, self.expect_value()?));
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(")")?;
            entries.push((State::from_pairs(vocab, &pairs)?, p));
        }
        StateDistribution::new(vocab, entries)
    }

    fn parse_utility(&mut self) -> Result<UtilityFunction> {
        self.expect_punct("{")?;
        let mut components = Vec::new();
        while !self.eat_punct("}") {
            let fluent = self.expect_ident("a fluent name or `elapsed`")?;
            if self.eat_kw("linear") {
                let mut points = Vec::new();
                while self.eat_punct("(") {
                    let x = self.expect_num()?;
                    self.expect_punct(",")?;
                    let y = self.expect_num()?;
                    self.expect_punct(")")?;
                    points.push((x, y));
                }
                if points.is_empty() {
                    return Err(self.err("expected at least one `(x, y)` sample point"));
                }
                components.push((fluent, UtilityComponent::Linear(points)));
            } else if self.eat_kw("table") {
                self.expect_punct("{")?;
                let mut entries = Vec::new();
                loop {
                    let v = self.expect_value()?;
                    self.expect_punct(":")?;
                    entries.push((v, self.expect_num()?));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct("}")?;
                components.push((fluent, UtilityComponent::Table(entries)));
            } else {
                return Err(self.err("expected `linear` or `table`"));
            }
        }
        Ok(UtilityFunction { components })
    }
}

// ---------------------------------------------------------------------------
// Domain file

/// One named action-level declaration, in file order.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionDecl {
    Concrete(ActionDescription),
    Abstract {
        method: AbstractStyle,
        instances: Vec<String>,
        grouping: GroupingPlan,
        /// Built by the abstraction module from the instance descriptions,
        /// so declarations always reproduce its construction exactly.
        description: ActionDescription,
    },
    Task {
        steps: Vec<String>,
        description: ActionDescription,
    },
}

impl ActionDecl {
    pub fn description(&self) -> &ActionDescription {
        match self {
            ActionDecl::Concrete(d) => d,
            ActionDecl::Abstract { description, .. } => description,
            ActionDecl::Task { description, .. } => description,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainFile {
    pub vocab: Vocabulary,
    pub decls: Vec<(String, ActionDecl)>,
    pub root: Option<String>,
    pub init: Option<StateDistribution>,
    pub utility: Option<UtilityFunction>,
}

impl DomainFile {
    pub fn description(&self, name: &str) -> Result<&ActionDescription> {
        self.decls
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, d)| d.description())
            .ok_or_else(|| Error::Validation(format!("unknown action `{name}`")))
    }

    pub fn init(&self) -> Result<&StateDistribution> {
        self.init
            .as_ref()
            .ok_or_else(|| Error::Validation("domain has no `init` distribution".into()))
    }

    /// Assemble the refinement network. Requires `root`, `init` and
    /// `utility` declarations.
    pub fn network(&self) -> Result<Network> {
        let root = self
            .root
            .clone()
            .ok_or_else(|| Error::Validation("domain has no `root` declaration".into()))?;
        let init = self.init()?.clone();
        let utility = self
            .utility
            .clone()
            .ok_or_else(|| Error::Validation("domain has no `utility` declaration".into()))?;
        let mut nodes = BTreeMap::new();
        for (name, decl) in &self.decls {
            let node = match decl {
                ActionDecl::Concrete(d) => NetworkNode::Concrete(d.clone()),
                ActionDecl::Abstract { instances, description, .. } => NetworkNode::Abstract {
                    description: description.clone(),
                    instances: instances.clone(),
                },
                ActionDecl::Task { steps, .. } => NetworkNode::Task { steps: steps.clone() },
            };
            nodes.insert(name.clone(), node);
        }
        Network::new(self.vocab.clone(), nodes, root, init, utility)
    }
}

fn build_abstract_decl(
    name: &str,
    method: AbstractStyle,
    instances: &[&ActionDescription],
    grouping: &GroupingPlan,
) -> Result<ActionDescription> {
    match (method, grouping) {
        (AbstractStyle::IntraI, GroupingPlan::Intra(sets)) => {
            intra_abstract_i(name, instances[0], sets)
        }
        (AbstractStyle::IntraII, GroupingPlan::Intra(sets)) => {
            intra_abstract_ii(name, instances[0], sets)
        }
        (AbstractStyle::InterI, GroupingPlan::Inter(sets)) => {
            inter_abstract_i(name, instances, sets)
        }
        (AbstractStyle::InterII, GroupingPlan::Inter(sets)) => {
            inter_abstract_ii(name, instances, sets)
        }
        _ => Err(Error::Validation(
            "grouping references do not match the abstraction method".into(),
        )),
    }
}

/// Parse and validate a full domain file.
pub fn parse_domain(text: &str) -> Result<DomainFile> {
    let mut p = Parser::new(text)?;
    let mut fluents = Vec::new();
    // Fluent declarations must come first so later statements can validate.
    while p.eat_kw("fluent") {
        fluents.push(p.parse_fluent()?);
    }
    if fluents.is_empty() {
        return Err(Error::Validation("missing vocabulary: no `fluent` declarations".into()));
    }
    let vocab = Vocabulary::new(fluents)?;

    let mut decls: Vec<(String, ActionDecl)> = Vec::new();
    let mut root = None;
    let mut init = None;
    let mut utility = None;

    let lookup = |decls: &[(String, ActionDecl)], name: &str| -> Result<ActionDescription> {
        decls
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, d)| d.description().clone())
            .ok_or_else(|| Error::Validation(format!("action `{name}` is not declared (yet)")))
    };
    let declare = |decls: &mut Vec<(String, ActionDecl)>, name: String, d: ActionDecl| {
        if decls.iter().any(|(n, _)| *n == name) {
            Err(Error::Validation(format!("action `{name}` declared twice")))
        } else {
            decls.push((name, d));
            Ok(())
        }
    };

    while !p.at_eof() {
        if p.eat_kw("action") {
            let a = p.parse_action()?;
            let report = validate_concrete(&a, &vocab)?;
            if !report.is_empty() {
                return Err(Error::Validation(report.join("; ")));
            }
            declare(&mut decls, a.name.clone(), ActionDecl::Concrete(a))?;
        } else if p.eat_kw("abstract") {
            let name = p.expect_ident("an action name")?;
            let method_id = p.expect_ident("an abstraction method")?;
            let method = AbstractStyle::parse(&method_id).ok_or_else(|| {
                Error::Validation(format!(
                    "unknown abstraction method `{method_id}` (expected intra1, intra2, inter1 or inter2)"
                ))
            })?;
            p.expect_kw("of")?;
            let mut instances = Vec::new();
            while !p.peek_kw("grouping") {
                instances.push(p.expect_ident("an instance action name")?);
            }
            p.expect_kw("grouping")?;
            let raw_sets = p.parse_grouping_sets()?;
            let grouping = resolve_grouping(method, &instances, raw_sets)?;
            let descs: Vec<ActionDescription> = instances
                .iter()
                .map(|i| lookup(&decls, i))
                .collect::<Result<_>>()?;
            let refs: Vec<&ActionDescription> = descs.iter().collect();
            let description = build_abstract_decl(&name, method, &refs, &grouping)?;
            declare(
                &mut decls,
                name,
                ActionDecl::Abstract { method, instances, grouping, description },
            )?;
        } else if p.eat_kw("task") {
            let name = p.expect_ident("a task name")?;
            p.expect_punct("=")?;
            let mut steps = vec![p.expect_ident("a step action name")?];
            while p.eat_punct(",") {
                steps.push(p.expect_ident("a step action name")?);
            }
            let descs: Vec<ActionDescription> =
                steps.iter().map(|s| lookup(&decls, s)).collect::<Result<_>>()?;
            let refs: Vec<&ActionDescription> = descs.iter().collect();
            let description = compose_sequential(&name, &refs)?;
            declare(&mut decls, name, ActionDecl::Task { steps, description })?;
        } else if p.eat_kw("root") {
            root = Some(p.expect_ident("a root action name")?);
        } else if p.eat_kw("init") {
            init = Some(p.parse_init(&vocab)?);
        } else if p.eat_kw("utility") {
            let u = p.parse_utility()?;
            u.validate(&vocab)?;
            utility = Some(u);
        } else {
            return Err(p.err("expected `action`, `abstract`, `task`, `root`, `init` or `utility`"));
        }
    }
    if let Some(r) = &root {
        if !decls.iter().any(|(n, _)| n == r) {
            return Err(Error::Validation(format!("root references unknown action `{r}`")));
        }
    }
    // Branch conditions must only mention vocabulary fluents.
    for (_, decl) in &decls {
        for b in &decl.description().branches {
            b.validate(&vocab)?;
        }
    }
    Ok(DomainFile { vocab, decls, root, init, utility })
}

fn resolve_grouping(
    method: AbstractStyle,
    instances: &[String],
    raw: Vec<Vec<(String, Option<String>)>>,
) -> Result<GroupingPlan> {
    match method {
        AbstractStyle::IntraI | AbstractStyle::IntraII => {
            if instances.len() != 1 {
                return Err(Error::Validation(
                    "intra-action abstraction takes exactly one instance".into(),
                ));
            }
            let sets = raw
                .into_iter()
                .map(|set| {
                    set.into_iter()
                        .map(|(label, dotted)| match dotted {
                            None => Ok(label),
                            Some(_) => Err(Error::Validation(
                                "intra grouping references are plain branch labels".into(),
                            )),
                        })
                        .collect::<Result<Vec<String>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(GroupingPlan::Intra(sets))
        }
        AbstractStyle::InterI | AbstractStyle::InterII => {
            let sets = raw
                .into_iter()
                .map(|set| {
                    set.into_iter()
                        .map(|(inst, dotted)| match dotted {
                            Some(label) => Ok((inst, label)),
                            None => Err(Error::Validation(
                                "inter grouping references are written `instance.label`".into(),
                            )),
                        })
                        .collect::<Result<Vec<(String, String)>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(GroupingPlan::Inter(sets))
        }
    }
}

/// Parse a standalone query sentence (`@start` references allowed).
pub fn parse_query(text: &str) -> Result<Sentence> {
    let mut p = Parser::new(text)?;
    let s = p.parse_sentence()?;
    if !p.at_eof() {
        return Err(p.err("trailing input after the sentence"));
    }
    Ok(s)
}

/// Parse a grouping flag like `(a c)(b d)` or
/// `(mountain-road.a valley-road.i)(mountain-road.b)`.
pub fn parse_grouping(method: AbstractStyle, instances: &[String], text: &str) -> Result<GroupingPlan> {
    let mut p = Parser::new(text)?;
    let raw = p.parse_grouping_sets()?;
    if !p.at_eof() {
        return Err(p.err("trailing input after the grouping"));
    }
    resolve_grouping(method, instances, raw)
}

/// Build an abstract action from already-parsed parts (CLI `abstract`
/// command).
pub fn build_abstraction(
    name: &str,
    method: AbstractStyle,
    instances: &[&ActionDescription],
    grouping: &GroupingPlan,
) -> Result<ActionDescription> {
    build_abstract_decl(name, method, instances, grouping)
}

// ---------------------------------------------------------------------------
// Serializer

fn fmt_value(v: &Value) -> String {
    v.to_string()
}

fn fmt_rhs(r: &Rhs) -> String {
    match r {
        Rhs::Const(v) => fmt_value(v),
        Rhs::StartOffset { fluent, offset } => match offset.cmp(&0) {
            std::cmp::Ordering::Equal => format!("{fluent}@start"),
            std::cmp::Ordering::Greater => format!("{fluent}@start + {offset}"),
            std::cmp::Ordering::Less => format!("{fluent}@start - {}", -offset),
        },
    }
}

fn fmt_sentence_prec(s: &Sentence, parent_is_tight: bool) -> String {
    match s {
        Sentence::True => "true".into(),
        Sentence::False => "false".into(),
        Sentence::Atom(a) => format!("{} {} {}", a.fluent, a.rel.symbol(), fmt_rhs(&a.rhs)),
        Sentence::Not(inner) => {
            let body = match **inner {
                Sentence::True | Sentence::False | Sentence::Atom(_) | Sentence::Not(_) => {
                    fmt_sentence_prec(inner, true)
                }
                _ => format!("({})", fmt_sentence_prec(inner, false)),
            };
            format!("not {body}")
        }
        Sentence::And(parts) => {
            let body = parts
                .iter()
                .map(|p| match p {
                    Sentence::And(_) | Sentence::Or(_) => {
                        format!("({})", fmt_sentence_prec(p, false))
                    }
                    _ => fmt_sentence_prec(p, true),
                })
                .collect::<Vec<_>>()
                .join(" and ");
            if parent_is_tight {
                format!("({body})")
            } else {
                body
            }
        }
        Sentence::Or(parts) => {
            let body = parts
                .iter()
                .map(|p| match p {
                    Sentence::Or(_) => format!("({})", fmt_sentence_prec(p, false)),
                    _ => fmt_sentence_prec(p, true),
                })
                .collect::<Vec<_>>()
                .join(" or ");
            if parent_is_tight {
                format!("({body})")
            } else {
                body
            }
        }
    }
}

pub fn format_sentence(s: &Sentence) -> String {
    fmt_sentence_prec(s, false)
}

fn fmt_condition(c: &ConditionSpec) -> String {
    match c {
        ConditionSpec::Single(s) => format_sentence(s),
        ConditionSpec::CondList(cs) => format!(
            "list {}",
            cs.iter().map(format_sentence).collect::<Vec<_>>().join(" | ")
        ),
        ConditionSpec::ConjDisj { conj, disj } => {
            format!("conj {} disj {}", format_sentence(conj), format_sentence(disj))
        }
    }
}

fn fmt_prob(p: &ProbSpec) -> String {
    match p {
        ProbSpec::Point(x) => format!("{x}"),
        ProbSpec::Range { lo, hi } => format!("[{lo}, {hi}]"),
        ProbSpec::ProbList(ps) => format!(
            "list {}",
            ps.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" | ")
        ),
    }
}

fn fmt_constraint(fluent: &str, c: &ValueConstraint) -> String {
    match c {
        ValueConstraint::Exact(v) => format!("{fluent} := {}", fmt_value(v)),
        ValueConstraint::AmongSet(vs) => format!(
            "{fluent} := {{ {} }}",
            vs.iter().map(fmt_value).collect::<Vec<_>>().join(", ")
        ),
        ValueConstraint::RelativeExact(d) if *d < 0 => format!("{fluent} -= {}", -d),
        ValueConstraint::RelativeExact(d) => format!("{fluent} += {d}"),
        ValueConstraint::RelativeRange(lo, hi) => format!("{fluent} += [{lo}, {hi}]"),
        ValueConstraint::MaybeUnchanged(inner) => format!("maybe {}", fmt_constraint(fluent, inner)),
        ValueConstraint::Any => format!("{fluent} := any"),
    }
}

fn fmt_effects(e: &EffectSpec) -> String {
    if e.is_empty() {
        return "{ }".into();
    }
    let items = e
        .iter()
        .map(|(f, c)| fmt_constraint(f, c))
        .collect::<Vec<_>>()
        .join("; ");
    format!("{{ {items} }}")
}

fn fmt_branch(b: &Branch) -> String {
    format!(
        "branch {} if {} prob {} {}",
        b.label,
        fmt_condition(&b.condition),
        fmt_prob(&b.prob),
        fmt_effects(&b.effect)
    )
}

/// Full branch-level rendering of any action, concrete or abstract.
pub fn format_action(a: &ActionDescription) -> String {
    let mut out = String::new();
    let style = a.style.map(|s| format!("  # {}", s.id())).unwrap_or_default();
    let _ = writeln!(out, "action {} dur {} {{{style}", a.name, a.duration);
    for b in &a.branches {
        let _ = writeln!(out, "  {}", fmt_branch(b));
    }
    out.push('}');
    out
}

fn fmt_grouping(g: &GroupingPlan) -> String {
    match g {
        GroupingPlan::Intra(sets) => sets
            .iter()
            .map(|s| format!("({})", s.join(" ")))
            .collect::<Vec<_>>()
            .join(" "),
        GroupingPlan::Inter(sets) => sets
            .iter()
            .map(|s| {
                format!(
                    "({})",
                    s.iter()
                        .map(|(i, l)| format!("{i}.{l}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                )
            })
            .collect::<Vec<_>>()
            .join(" "),
    }
}

fn fmt_fluent(f: &Fluent) -> String {
    match &f.domain {
        FluentDomain::IntRange(lo, hi) => format!("fluent {} int {lo}..{hi}", f.name),
        FluentDomain::Values(vs) => format!(
            "fluent {} {{ {} }}",
            f.name,
            vs.iter().map(fmt_value).collect::<Vec<_>>().join(" ")
        ),
    }
}

fn fmt_utility(u: &UtilityFunction) -> String {
    let mut out = String::from("utility {\n");
    for (f, c) in &u.components {
        match c {
            UtilityComponent::Linear(points) => {
                let pts = points
                    .iter()
                    .map(|(x, y)| format!("({x}, {y})"))
                    .collect::<Vec<_>>()
                    .join(" ");
                let _ = writeln!(out, "  {f} linear {pts}");
            }
            UtilityComponent::Table(entries) => {
                let es = entries
                    .iter()
                    .map(|(v, y)| format!("{}: {y}", fmt_value(v)))
                    .collect::<Vec<_>>()
                    .join(", ");
                let _ = writeln!(out, "  {f} table {{ {es} }}");
            }
        }
    }
    out.push('}');
    out
}

/// Canonical rendering; `parse_domain(serialize_domain(d))` equals `d`.
pub fn serialize_domain(d: &DomainFile) -> String {
    let mut out = String::new();
    for i in 0..d.vocab.len() {
        let _ = writeln!(out, "{}", fmt_fluent(d.vocab.fluent(i)));
    }
    for (name, decl) in &d.decls {
        out.push('\n');
        match decl {
            ActionDecl::Concrete(a) => {
                let _ = writeln!(out, "action {} dur {} {{", a.name, a.duration);
                for b in &a.branches {
                    let _ = writeln!(out, "  {}", fmt_branch(b));
                }
                let _ = writeln!(out, "}}");
            }
            ActionDecl::Abstract { method, instances, grouping, .. } => {
                let _ = writeln!(
                    out,
                    "abstract {name} {} of {} grouping {}",
                    method.id(),
                    instances.join(" "),
                    fmt_grouping(grouping)
                );
            }
            ActionDecl::Task { steps, .. } => {
                let _ = writeln!(out, "task {name} = {}", steps.join(", "));
            }
        }
    }
    if let Some(r) = &d.root {
        let _ = writeln!(out, "\nroot {r}");
    }
    if let Some(init) = &d.init {
        let _ = writeln!(out, "\ninit {{");
        for (s, p) in init.entries() {
            let pairs = (0..d.vocab.len())
                .map(|i| format!("{} = {}", d.vocab.fluent(i).name, fmt_value(s.get(i))))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(out, "  {p} ({pairs})");
        }
        let _ = writeln!(out, "}}");
    }
    if let Some(u) = &d.utility {
        let _ = writeln!(out, "\n{}", fmt_utility(u));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::ELAPSED;

    const MINI: &str = "
fluent muddy { T F }
fluent fuel int 0..12

action go dur 1 {
  branch a if true prob 0.7 { fuel -= 8; muddy := T }
  branch b if true prob 0.3 { fuel -= 5 }
}

abstract go-abs intra2 of go grouping (a b)

task run = go
root run

init {
  1 (muddy = F, fuel = 12)
}

utility {
  fuel linear (0, 0) (12, 12)
  muddy table { T: -5, F: 0 }
}
";

    #[test]
    fn parses_and_round_trips() {
        let d = parse_domain(MINI).unwrap();
        assert_eq!(d.decls.len(), 3);
        assert_eq!(d.root.as_deref(), Some("run"));
        let text = serialize_domain(&d);
        let d2 = parse_domain(&text).unwrap();
        assert_eq!(d, d2);
        // Serialization is canonical: a second round trip is byte-identical.
        assert_eq!(text, serialize_domain(&d2));
    }

    #[test]
    fn abstract_declaration_matches_the_constructor() {
        let d = parse_domain(MINI).unwrap();
        let go = d.description("go").unwrap().clone();
        let built = intra_abstract_ii("go-abs", &go, &[vec!["a".into(), "b".into()]]).unwrap();
        assert_eq!(d.description("go-abs").unwrap(), &built);
    }

    #[test]
    fn query_parsing_supports_start_offsets() {
        let q = parse_query("fuel@end = fuel@start - 8").unwrap();
        match &q {
            Sentence::Atom(a) => {
                assert_eq!(a.fluent, "fuel");
                assert_eq!(a.rel, Rel::Eq);
                assert_eq!(a.rhs, Rhs::StartOffset { fluent: "fuel".into(), offset: -8 });
            }
            other => panic!("unexpected query shape: {other:?}"),
        }
        let q2 = parse_query("muddy = T or fuel >= 4 and not muddy = F").unwrap();
        assert!(matches!(q2, Sentence::Or(_)));
    }

    #[test]
    fn network_builds_and_projects() {
        let d = parse_domain(MINI).unwrap();
        let net = d.network().unwrap();
        assert_eq!(net.root, "run");
        let q = parse_query("fuel@end = fuel@start - 8").unwrap();
        let r = crate::projection::project_concrete(
            &d.vocab,
            d.description("go").unwrap(),
            d.init().unwrap(),
            &q,
        )
        .unwrap();
        assert!((r.interval.lo - 0.7).abs() < crate::EPS);
        assert!((r.interval.hi - 0.7).abs() < crate::EPS);
    }

    #[test]
    fn diagnostics() {
        assert!(matches!(parse_domain(""), Err(Error::Validation(_))));
        let bad_prob = MINI.replace("prob 0.7", "prob 1.3");
        assert!(matches!(parse_domain(&bad_prob), Err(Error::Parse { .. })));
        let bad_syntax = "fluent a { T F }\naction x dur 1 {";
        match parse_domain(bad_syntax) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
        let unknown = MINI.replace("task run = go", "task run = gone");
        assert!(matches!(parse_domain(&unknown), Err(Error::Validation(_))));
    }

    #[test]
    fn sentence_formatting_round_trips() {
        let texts = [
            "true",
            "muddy = T",
            "muddy = T or muddy = F and fuel < 3",
            "(muddy = T or fuel >= 2) and not (muddy = F or fuel != 1)",
            "fuel@end = fuel@start + 2",
        ];
        for t in texts {
            let s = parse_query(t).unwrap();
            let printed = format_sentence(&s);
            assert_eq!(parse_query(&printed).unwrap(), s, "through `{printed}`");
        }
    }

    #[test]
    fn elapsed_utility_is_accepted() {
        let text = MINI.replace("  muddy table { T: -5, F: 0 }", "  elapsed linear (0, 0) (1, -2)");
        let d = parse_domain(&text).unwrap();
        let u = d.utility.unwrap();
        assert!(u.components.iter().any(|(f, _)| f == ELAPSED));
    }
}
