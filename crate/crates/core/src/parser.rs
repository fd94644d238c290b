//! Concrete ASCII syntax: parsing and canonical rendering.
//!
//! Formulas: atoms `[a-z][a-z0-9_]*`, `T`, `F`, `1[alpha]`, the binary
//! connectives `& | -> <- *> <*` and the modalities `<x>`, `[x]` with an
//! optional postfix `^` for the adjoint.  `~A` is accepted as sugar for
//! `A -> F`.  Structures: `I`, `;`, `>`, `<`, `{x}`, `{x}^`, `Phi[alpha]`,
//! quoted formula leaves `'A'` and bare connective-free leaves.  A sequent
//! is `X |- Y`.  Non-designated action variants are written `alpha@l`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::proofs::ProofTree;
use crate::semantics::KripkeModel;
use crate::syntax::{
    ActionLabel, ActionStructure, Agent, BinOp, Formula, FormulaView, Modality, SBin, Sequent, Structure, StructureView,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    pub(crate) fn locate(src: &str, start: usize, end: usize) -> Self {
        let before = &src[..start.min(src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
        SourceSpan { start, end, line, column }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax-error at {span}: {msg}")]
    Syntax { span: SourceSpan, msg: String },
    #[error("unknown-agent `{name}` at {span}")]
    UnknownAgent { name: String, span: SourceSpan },
    #[error("unknown-action `{name}` at {span}")]
    UnknownAction { name: String, span: SourceSpan },
    #[error("invalid declarations: {0}")]
    Declarations(String),
}

/// Agents, action structures and schematic-letter bindings in scope for
/// parsing and rendering.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Declarations {
    pub agents: BTreeSet<Agent>,
    pub actions: BTreeMap<String, ActionStructure>,
    /// Upper-case letters standing for fixed formulas (e.g. `A` for `p`).
    pub schematic: BTreeMap<String, Formula>,
}

impl Declarations {
    /// Parses a declarations preamble (`agent ...;` and `action ... { ... }`
    /// items).  Any other content is a syntax error.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut decls = Declarations::default();
        let mut p = Parser::new(text, 0, text.len(), &decls)?;
        let raw = p.declarations()?;
        drop(p);
        decls.install(text, raw)?;
        Ok(decls)
    }

    fn install(&mut self, src: &str, raw: RawDecls) -> Result<(), ParseError> {
        for (name, span) in &raw.agents {
            let a = Agent::new(name.clone());
            if !self.agents.insert(a) {
                return Err(ParseError::Syntax { span: *span, msg: format!("agent {name} declared twice") });
            }
        }
        // Bases first, so preconditions may mention any declared action.
        for act in &raw.actions {
            if self.actions.contains_key(&act.name) || self.agents.contains(&Agent::new(act.name.clone())) {
                return Err(ParseError::Syntax { span: act.span, msg: format!("name {} declared twice", act.name) });
            }
            let mut states = act.states.clone();
            states.sort();
            states.dedup();
            let mut rels: BTreeMap<Agent, BTreeSet<(String, String)>> = BTreeMap::new();
            for (agent, span, pairs) in &act.rels {
                let ag = Agent::new(agent.clone());
                if !self.agents.contains(&ag) {
                    return Err(ParseError::UnknownAgent { name: agent.clone(), span: *span });
                }
                rels.entry(ag).or_default().extend(pairs.iter().cloned());
            }
            self.actions.insert(
                act.name.clone(),
                ActionStructure {
                    base: act.name.clone(),
                    states,
                    designated: act.designated.clone(),
                    rels,
                    pre: BTreeMap::new(),
                },
            );
        }
        for act in &raw.actions {
            let mut pre = BTreeMap::new();
            for (state, (start, end)) in &act.pre {
                let f = parse_formula_in(src, *start, *end, self)?;
                pre.insert(state.clone(), f);
            }
            let entry = self.actions.get_mut(&act.name).expect("inserted above");
            entry.pre = pre;
            entry.validate().map_err(ParseError::Declarations)?;
        }
        Ok(())
    }

    pub fn with_schematic(mut self, letter: impl Into<String>, f: Formula) -> Self {
        self.schematic.insert(letter.into(), f);
        self
    }

    pub fn action(&self, base: &str) -> Option<&ActionStructure> {
        self.actions.get(base)
    }

    pub fn action_of(&self, label: &ActionLabel) -> Option<&ActionStructure> {
        self.actions.get(&label.base).filter(|a| a.states.contains(&label.state))
    }

    /// Every declared action variant, ordered by base then state.
    pub fn all_labels(&self) -> Vec<ActionLabel> {
        self.actions.values().flat_map(|a| a.labels()).collect()
    }

    /// `Pre(α)` for a declared variant.
    pub fn pre(&self, label: &ActionLabel) -> Option<&Formula> {
        self.action_of(label)?.pre_of(&label.state)
    }

    /// `{β : α a β}` in canonical order.
    pub fn betas(&self, label: &ActionLabel, agent: &Agent) -> Vec<ActionLabel> {
        self.action_of(label).map(|a| a.successors(agent, &label.state)).unwrap_or_default()
    }

    pub fn is_designated(&self, label: &ActionLabel) -> bool {
        self.actions.get(&label.base).is_some_and(|a| a.designated == label.state)
    }

    /// Renders the preamble in the canonical declaration format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if !self.agents.is_empty() {
            let names: Vec<&str> = self.agents.iter().map(|a| a.0.as_str()).collect();
            out.push_str(&format!("agent {};\n", names.join(" ")));
        }
        for act in self.actions.values() {
            out.push_str(&format!(
                "action {} {{\n  states: {};\n  designated: {};\n  pre:",
                act.base,
                act.states.join(" "),
                act.designated
            ));
            for (s, f) in &act.pre {
                out.push_str(&format!(" {} = \"{}\"", s, f.render(self)));
            }
            out.push_str(";\n");
            for (ag, rel) in &act.rels {
                let pairs: Vec<String> = rel.iter().map(|(i, j)| format!("{i} -> {j}")).collect();
                out.push_str(&format!("  rel {}: {};\n", ag.0, pairs.join(", ")));
            }
            out.push_str("}\n");
        }
        out
    }
}

struct RawAction {
    name: String,
    span: SourceSpan,
    states: Vec<String>,
    designated: String,
    pre: Vec<(String, (usize, usize))>,
    rels: Vec<RawRel>,
}

/// An agent's arrows as written: agent name, its span, state pairs.
type RawRel = (String, SourceSpan, Vec<(String, String)>);

#[derive(Default)]
struct RawDecls {
    agents: Vec<(String, SourceSpan)>,
    actions: Vec<RawAction>,
}

pub fn parse_formula(text: &str, decls: &Declarations) -> Result<Formula, ParseError> {
    parse_formula_in(text, 0, text.len(), decls)
}

pub fn parse_structure(text: &str, decls: &Declarations) -> Result<Structure, ParseError> {
    let mut p = Parser::new(text, 0, text.len(), decls)?;
    let s = p.structure()?;
    p.expect_eof()?;
    Ok(s)
}

pub fn parse_sequent(text: &str, decls: &Declarations) -> Result<Sequent, ParseError> {
    parse_sequent_in(text, 0, text.len(), decls)
}

fn parse_formula_in(src: &str, start: usize, end: usize, decls: &Declarations) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src, start, end, decls)?;
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}

fn parse_sequent_in(src: &str, start: usize, end: usize, decls: &Declarations) -> Result<Sequent, ParseError> {
    let mut p = Parser::new(src, start, end, decls)?;
    let ante = p.structure()?;
    p.expect(&Tok::Turnstile, "`|-`")?;
    let succ = p.structure()?;
    p.expect_eof()?;
    Ok(Sequent::new(ante, succ))
}

/// Parses a file holding exactly one proof s-expression.
pub fn parse_proof_file(text: &str, decls: &Declarations) -> Result<ProofTree, ParseError> {
    let mut proofs = parse_proofs(text, decls)?;
    if proofs.len() != 1 {
        return Err(ParseError::Syntax {
            span: SourceSpan::locate(text, 0, text.len()),
            msg: format!("expected exactly one proof, found {}", proofs.len()),
        });
    }
    Ok(proofs.remove(0))
}

/// Parses every top-level proof s-expression in `text`, in order.
pub fn parse_proofs(text: &str, decls: &Declarations) -> Result<Vec<ProofTree>, ParseError> {
    let mut r = SexpReader { src: text, pos: 0, decls };
    let mut out = Vec::new();
    loop {
        r.skip_trivia();
        if r.pos >= text.len() {
            return Ok(out);
        }
        out.push(r.node()?);
    }
}

/// Parses a Kripke model block:
/// `model { worlds: u v; val p: u; rel a: u->u, u->v; }`.
pub fn parse_model(text: &str, decls: &Declarations) -> Result<KripkeModel, ParseError> {
    let mut p = Parser::new(text, 0, text.len(), decls)?;
    let m = p.model()?;
    p.expect_eof()?;
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    One,
    /// Byte range of the quoted contents.
    Quote(usize, usize),
    Str(usize, usize),
    Amp,
    Bar,
    Arrow,
    LArrow,
    CoArrow,
    LCoArrow,
    Lt,
    Gt,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Caret,
    Turnstile,
    Colon,
    Eq,
    Comma,
    At,
    Tilde,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::One => "`1`",
            Tok::Quote(..) => "quoted formula",
            Tok::Str(..) => "string",
            Tok::Amp => "`&`",
            Tok::Bar => "`|`",
            Tok::Arrow => "`->`",
            Tok::LArrow => "`<-`",
            Tok::CoArrow => "`*>`",
            Tok::LCoArrow => "`<*`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Semi => "`;`",
            Tok::Caret => "`^`",
            Tok::Turnstile => "`|-`",
            Tok::Colon => "`:`",
            Tok::Eq => "`=`",
            Tok::Comma => "`,`",
            Tok::At => "`@`",
            Tok::Tilde => "`~`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

pub(crate) fn lex(src: &str, start: usize, end: usize) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut i = start;
    let mut out = Vec::new();
    let err = |at: usize, msg: String| ParseError::Syntax { span: SourceSpan::locate(src, at, at + 1), msg };
    while i < end {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < end && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let next = if i + 1 < end { bytes[i + 1] } else { 0 };
        let (tok, len) = match c {
            b'&' => (Tok::Amp, 1),
            b'|' if next == b'-' => (Tok::Turnstile, 2),
            b'|' => (Tok::Bar, 1),
            b'-' if next == b'>' => (Tok::Arrow, 2),
            b'<' if next == b'-' => (Tok::LArrow, 2),
            b'<' if next == b'*' => (Tok::LCoArrow, 2),
            b'<' => (Tok::Lt, 1),
            b'*' if next == b'>' => (Tok::CoArrow, 2),
            b'>' => (Tok::Gt, 1),
            b'[' => (Tok::LBrack, 1),
            b']' => (Tok::RBrack, 1),
            b'{' => (Tok::LBrace, 1),
            b'}' => (Tok::RBrace, 1),
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b';' => (Tok::Semi, 1),
            b'^' => (Tok::Caret, 1),
            b':' => (Tok::Colon, 1),
            b'=' => (Tok::Eq, 1),
            b',' => (Tok::Comma, 1),
            b'@' => (Tok::At, 1),
            b'~' => (Tok::Tilde, 1),
            b'1' if !next.is_ascii_alphanumeric() && next != b'_' => (Tok::One, 1),
            b'\'' | b'"' => {
                let close = src[i + 1..end].find(c as char).ok_or_else(|| err(i, "unterminated quote".into()))?;
                let (s, e) = (i + 1, i + 1 + close);
                let tok = if c == b'\'' { Tok::Quote(s, e) } else { Tok::Str(s, e) };
                (tok, close + 2)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < end && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                (Tok::Ident(src[i..j].to_string()), j - i)
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(err(i, format!("unexpected character `{ch}`")));
            }
        };
        out.push((tok, i, i + len));
        i += len;
    }
    out.push((Tok::Eof, end, end));
    Ok(out)
}

fn is_atom_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_lowercase())
        && cs.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// A resolved modality or proxy index.
enum Index {
    Agent(Agent),
    Action(ActionLabel),
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    decls: &'a Declarations,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, start: usize, end: usize, decls: &'a Declarations) -> Result<Self, ParseError> {
        Ok(Parser { src, toks: lex(src, start, end)?, pos: 0, decls })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> SourceSpan {
        let (_, s, e) = self.toks[self.pos];
        SourceSpan::locate(self.src, s, e)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { span: self.span(), msg: msg.into() })
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", self.peek()))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error(format!("unexpected {}", self.peek()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.error(format!("expected {what}, found {t}")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            t => self.error(format!("expected `{kw}`, found {t}")),
        }
    }

    /// `name` or `name@state`, resolved against the declarations.
    fn index(&mut self) -> Result<Index, ParseError> {
        let span = self.span();
        let name = self.ident("agent or action name")?;
        if *self.peek() == Tok::At {
            self.bump();
            let state = self.ident("action state")?;
            return self.resolve_action(name, Some(state), span).map(Index::Action);
        }
        let agent = Agent::new(name.clone());
        if self.decls.agents.contains(&agent) {
            Ok(Index::Agent(agent))
        } else if self.decls.actions.contains_key(&name) {
            self.resolve_action(name, None, span).map(Index::Action)
        } else {
            Err(ParseError::UnknownAgent { name, span })
        }
    }

    fn action_label(&mut self) -> Result<ActionLabel, ParseError> {
        let span = self.span();
        let name = self.ident("action name")?;
        let state = if *self.peek() == Tok::At {
            self.bump();
            Some(self.ident("action state")?)
        } else {
            None
        };
        self.resolve_action(name, state, span)
    }

    fn resolve_action(&self, name: String, state: Option<String>, span: SourceSpan) -> Result<ActionLabel, ParseError> {
        let Some(act) = self.decls.actions.get(&name) else {
            return Err(ParseError::UnknownAction { name, span });
        };
        match state {
            None => Ok(act.designated_label()),
            Some(s) if act.states.contains(&s) => Ok(act.label(&s)),
            Some(s) => Err(ParseError::UnknownAction { name: format!("{name}@{s}"), span }),
        }
    }

    fn adjoint(&mut self) -> bool {
        if *self.peek() == Tok::Caret {
            self.bump();
            true
        } else {
            false
        }
    }

    // ---- formulas ----

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        let op = match self.peek() {
            Tok::Arrow => BinOp::Imp,
            Tok::LArrow => BinOp::LImp,
            Tok::CoArrow => BinOp::CoImp,
            Tok::LCoArrow => BinOp::LCoImp,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.formula()?;
        Ok(Formula::bin(op, lhs, rhs))
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let g = self.conjunction()?;
            f = Formula::bin(BinOp::Or, f, g);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let g = self.unary()?;
            f = Formula::bin(BinOp::And, f, g);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Lt | Tok::LBrack => {
                let dia = *self.peek() == Tok::Lt;
                self.bump();
                let idx = self.index()?;
                self.expect(if dia { &Tok::Gt } else { &Tok::RBrack }, if dia { "`>`" } else { "`]`" })?;
                let adj = self.adjoint();
                let body = self.unary()?;
                let m = match (dia, adj) {
                    (true, false) => Modality::Dia,
                    (false, false) => Modality::Box,
                    (true, true) => Modality::AdjDia,
                    (false, true) => Modality::AdjBox,
                };
                Ok(match idx {
                    Index::Agent(a) => Formula::agent_modal(m, a, body),
                    Index::Action(l) => Formula::action_modal(m, l, body),
                })
            }
            Tok::Tilde => {
                self.bump();
                Ok(self.unary()?.negated())
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => match self.leaf_formula()? {
                Some(f) => Ok(f),
                None => self.error(format!("expected a formula, found {}", self.peek())),
            },
        }
    }

    /// Atoms, constants and schematic letters; `None` when the next token
    /// starts none of them.
    fn leaf_formula(&mut self) -> Result<Option<Formula>, ParseError> {
        match self.peek().clone() {
            Tok::One => {
                self.bump();
                self.expect(&Tok::LBrack, "`[` after `1`")?;
                let l = self.action_label()?;
                self.expect(&Tok::RBrack, "`]`")?;
                Ok(Some(Formula::One(l)))
            }
            Tok::Ident(s) if s == "T" => {
                self.bump();
                Ok(Some(Formula::Top))
            }
            Tok::Ident(s) if s == "F" => {
                self.bump();
                Ok(Some(Formula::Bot))
            }
            Tok::Ident(s) if self.decls.schematic.contains_key(&s) => {
                self.bump();
                Ok(Some(self.decls.schematic[&s].clone()))
            }
            Tok::Ident(s) if is_atom_name(&s) => {
                self.bump();
                Ok(Some(Formula::Atom(s)))
            }
            _ => Ok(None),
        }
    }

    // ---- structures ----

    fn structure(&mut self) -> Result<Structure, ParseError> {
        let lhs = self.semi()?;
        let op = match self.peek() {
            Tok::Gt => SBin::Gt,
            Tok::Lt => SBin::Lt,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.semi()?;
        if matches!(self.peek(), Tok::Gt | Tok::Lt) {
            return self.error("`>` and `<` are non-associative; add parentheses");
        }
        Ok(Structure::bin(op, lhs, rhs))
    }

    fn semi(&mut self) -> Result<Structure, ParseError> {
        let mut s = self.sunary()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            let t = self.sunary()?;
            s = Structure::bin(SBin::Semi, s, t);
        }
        Ok(s)
    }

    fn sunary(&mut self) -> Result<Structure, ParseError> {
        match self.peek().clone() {
            Tok::LBrace => {
                self.bump();
                let idx = self.index()?;
                self.expect(&Tok::RBrace, "`}`")?;
                let adj = self.adjoint();
                let body = self.sunary()?;
                Ok(match idx {
                    Index::Agent(a) => Structure::agent_prox(adj, a, body),
                    Index::Action(l) => Structure::action_prox(adj, l, body),
                })
            }
            Tok::LParen => {
                self.bump();
                let s = self.structure()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(s)
            }
            Tok::Ident(s) if s == "I" => {
                self.bump();
                Ok(Structure::I)
            }
            Tok::Ident(s) if s == "Phi" && *self.peek_at(1) == Tok::LBrack => {
                self.bump();
                self.bump();
                let l = self.action_label()?;
                self.expect(&Tok::RBrack, "`]`")?;
                Ok(Structure::Phi(l))
            }
            Tok::Quote(s, e) => {
                self.bump();
                let f = parse_formula_in(self.src, s, e, self.decls)?;
                Ok(Structure::Fm(f))
            }
            _ => match self.leaf_formula()? {
                Some(f) => Ok(Structure::Fm(f)),
                None => self.error(format!("expected a structure, found {}", self.peek())),
            },
        }
    }

    // ---- declarations ----

    fn declarations(&mut self) -> Result<RawDecls, ParseError> {
        let mut raw = RawDecls::default();
        loop {
            match self.peek().clone() {
                Tok::Eof => return Ok(raw),
                Tok::Ident(kw) if kw == "agent" => {
                    self.bump();
                    loop {
                        let span = self.span();
                        let name = self.ident("agent name")?;
                        raw.agents.push((name, span));
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        }
                        if *self.peek() == Tok::Semi {
                            self.bump();
                            break;
                        }
                    }
                }
                Tok::Ident(kw) if kw == "action" => {
                    self.bump();
                    raw.actions.push(self.action_block()?);
                }
                t => return self.error(format!("expected `agent` or `action`, found {t}")),
            }
        }
    }

    fn state_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.ident("state")?];
        loop {
            if *self.peek() == Tok::Comma {
                self.bump();
            }
            match self.peek() {
                Tok::Ident(_) => out.push(self.ident("state")?),
                _ => return Ok(out),
            }
        }
    }

    /// `(<id> -> <id>)+` separated by optional commas.
    fn arrow_pairs(&mut self) -> Result<Vec<(String, String)>, ParseError> {
        let mut out = Vec::new();
        loop {
            let i = self.ident("state")?;
            self.expect(&Tok::Arrow, "`->`")?;
            let j = self.ident("state")?;
            out.push((i, j));
            if *self.peek() == Tok::Comma {
                self.bump();
            }
            if !matches!(self.peek(), Tok::Ident(_)) {
                return Ok(out);
            }
        }
    }

    fn action_block(&mut self) -> Result<RawAction, ParseError> {
        let span = self.span();
        let name = self.ident("action name")?;
        self.expect(&Tok::LBrace, "`{`")?;
        self.keyword("states")?;
        self.expect(&Tok::Colon, "`:`")?;
        let states = self.state_list()?;
        self.expect(&Tok::Semi, "`;`")?;
        self.keyword("designated")?;
        self.expect(&Tok::Colon, "`:`")?;
        let designated = self.ident("state")?;
        self.expect(&Tok::Semi, "`;`")?;
        self.keyword("pre")?;
        self.expect(&Tok::Colon, "`:`")?;
        let mut pre = Vec::new();
        loop {
            let st = self.ident("state")?;
            self.expect(&Tok::Eq, "`=`")?;
            let Tok::Str(s, e) = self.peek().clone() else {
                return self.error("expected a quoted precondition");
            };
            self.bump();
            pre.push((st, (s, e)));
            if *self.peek() == Tok::Comma {
                self.bump();
            }
            if !matches!(self.peek(), Tok::Ident(_)) {
                break;
            }
        }
        self.expect(&Tok::Semi, "`;`")?;
        let mut rels = Vec::new();
        while matches!(self.peek(), Tok::Ident(k) if k == "rel") {
            self.bump();
            let aspan = self.span();
            let agent = self.ident("agent")?;
            self.expect(&Tok::Colon, "`:`")?;
            let pairs = if *self.peek() == Tok::Semi { Vec::new() } else { self.arrow_pairs()? };
            self.expect(&Tok::Semi, "`;`")?;
            rels.push((agent, aspan, pairs));
        }
        self.expect(&Tok::RBrace, "`}`")?;
        Ok(RawAction { name, span, states, designated, pre, rels })
    }

    fn model(&mut self) -> Result<KripkeModel, ParseError> {
        self.keyword("model")?;
        self.expect(&Tok::LBrace, "`{`")?;
        self.keyword("worlds")?;
        self.expect(&Tok::Colon, "`:`")?;
        let worlds = self.state_list()?;
        self.expect(&Tok::Semi, "`;`")?;
        let lookup = |p: &Self, w: &str| -> Result<usize, ParseError> {
            match worlds.iter().position(|x| x == w) {
                Some(i) => Ok(i),
                None => p.error(format!("unknown world {w}")),
            }
        };
        let mut val: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        let mut rels: BTreeMap<Agent, BTreeSet<(usize, usize)>> = BTreeMap::new();
        loop {
            match self.peek().clone() {
                Tok::Ident(k) if k == "val" => {
                    self.bump();
                    let atom = self.ident("atom")?;
                    self.expect(&Tok::Colon, "`:`")?;
                    let set = val.entry(atom).or_default();
                    while let Tok::Ident(w) = self.peek().clone() {
                        set.insert(lookup(self, &w)?);
                        self.bump();
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        }
                    }
                    self.expect(&Tok::Semi, "`;`")?;
                }
                Tok::Ident(k) if k == "rel" => {
                    self.bump();
                    let span = self.span();
                    let agent = Agent::new(self.ident("agent")?);
                    if !self.decls.agents.is_empty() && !self.decls.agents.contains(&agent) {
                        return Err(ParseError::UnknownAgent { name: agent.0, span });
                    }
                    self.expect(&Tok::Colon, "`:`")?;
                    let pairs = if *self.peek() == Tok::Semi { Vec::new() } else { self.arrow_pairs()? };
                    let set = rels.entry(agent).or_default();
                    for (i, j) in pairs {
                        set.insert((lookup(self, &i)?, lookup(self, &j)?));
                    }
                    self.expect(&Tok::Semi, "`;`")?;
                }
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                t => return self.error(format!("expected `val`, `rel` or `}}`, found {t}")),
            }
        }
        for a in &self.decls.agents {
            rels.entry(a.clone()).or_default();
        }
        Ok(KripkeModel::new(worlds, rels, val))
    }
}

struct SexpReader<'a> {
    src: &'a str,
    pos: usize,
    decls: &'a Declarations,
}

impl SexpReader<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { span: SourceSpan::locate(self.src, self.pos, self.pos + 1), msg: msg.into() })
    }

    fn skip_trivia(&mut self) {
        let b = self.src.as_bytes();
        while self.pos < b.len() {
            if b[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            } else if b[self.pos] == b'#' {
                while self.pos < b.len() && b[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn node(&mut self) -> Result<ProofTree, ParseError> {
        self.skip_trivia();
        if self.peek() != Some(b'(') {
            return self.err("expected `(`");
        }
        self.pos += 1;
        self.skip_trivia();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() || matches!(c, b'(' | b')' | b'"') {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a rule name");
        }
        let rule = self.src[start..self.pos].to_string();
        self.skip_trivia();
        if self.peek() != Some(b'"') {
            return self.err("expected a quoted sequent");
        }
        let s = self.pos + 1;
        let Some(len) = self.src[s..].find('"') else {
            return self.err("unterminated sequent string");
        };
        let conclusion = parse_sequent_in(self.src, s, s + len, self.decls)?;
        self.pos = s + len + 1;
        let mut children = Vec::new();
        loop {
            self.skip_trivia();
            match self.peek() {
                Some(b')') => {
                    self.pos += 1;
                    return Ok(ProofTree::new(rule, conclusion, children));
                }
                Some(b'(') => children.push(self.node()?),
                Some(_) => return self.err("expected `(` or `)`"),
                None => return self.err("unterminated proof node"),
            }
        }
    }
}

// ---- rendering ----

/// Canonical text for syntax values, parameterised by the declarations so
/// that designated action variants print without their state.
pub trait Render {
    fn render(&self, decls: &Declarations) -> String;
}

pub fn render<T: Render + ?Sized>(x: &T, decls: &Declarations) -> String {
    x.render(decls)
}

fn label_text(l: &ActionLabel, decls: Option<&Declarations>) -> String {
    match decls {
        Some(d) if d.is_designated(l) => l.base.clone(),
        _ => format!("{}@{}", l.base, l.state),
    }
}

fn write_formula(f: &Formula, level: u8, d: Option<&Declarations>, out: &mut String) {
    let (mine, l_min, r_min, sym) = match f.view() {
        FormulaView::Bin(op, _, _) => match op {
            BinOp::And => (3, 3, 4, " & "),
            BinOp::Or => (2, 2, 3, " | "),
            BinOp::Imp => (1, 2, 1, " -> "),
            BinOp::LImp => (1, 2, 1, " <- "),
            BinOp::CoImp => (1, 2, 1, " *> "),
            BinOp::LCoImp => (1, 2, 1, " <* "),
        },
        _ => (4, 0, 0, ""),
    };
    let paren = mine < level;
    if paren {
        out.push('(');
    }
    match f.view() {
        FormulaView::Atom(p) => out.push_str(p),
        FormulaView::Top => out.push('T'),
        FormulaView::Bot => out.push('F'),
        FormulaView::One(l) => out.push_str(&format!("1[{}]", label_text(l, d))),
        FormulaView::Bin(_, a, b) => {
            write_formula(a, l_min, d, out);
            out.push_str(sym);
            write_formula(b, r_min, d, out);
        }
        FormulaView::Agent(m, g, body) => {
            out.push_str(&modal_prefix(m, &g.0));
            write_formula(body, 4, d, out);
        }
        FormulaView::Action(m, l, body) => {
            out.push_str(&modal_prefix(m, &label_text(l, d)));
            write_formula(body, 4, d, out);
        }
    }
    if paren {
        out.push(')');
    }
}

fn modal_prefix(m: Modality, name: &str) -> String {
    match m {
        Modality::Dia => format!("<{name}>"),
        Modality::Box => format!("[{name}]"),
        Modality::AdjDia => format!("<{name}>^"),
        Modality::AdjBox => format!("[{name}]^"),
    }
}

fn write_structure(s: &Structure, level: u8, d: Option<&Declarations>, out: &mut String) {
    match s.view() {
        StructureView::Fm(f) => {
            out.push('\'');
            write_formula(f, 0, d, out);
            out.push('\'');
        }
        StructureView::I => out.push('I'),
        StructureView::Phi(l) => out.push_str(&format!("Phi[{}]", label_text(l, d))),
        StructureView::Bin(op, a, b) => {
            let (mine, l_min, r_min, sym) = match op {
                SBin::Semi => (2, 2, 3, " ; "),
                SBin::Gt => (1, 2, 2, " > "),
                SBin::Lt => (1, 2, 2, " < "),
            };
            let paren = mine < level;
            if paren {
                out.push('(');
            }
            write_structure(a, l_min, d, out);
            out.push_str(sym);
            write_structure(b, r_min, d, out);
            if paren {
                out.push(')');
            }
        }
        StructureView::Agent(adj, g, body) => {
            out.push_str(&format!("{{{}}}{}", g.0, if adj { "^" } else { "" }));
            write_structure(body, 3, d, out);
        }
        StructureView::Action(adj, l, body) => {
            out.push_str(&format!("{{{}}}{}", label_text(l, d), if adj { "^" } else { "" }));
            write_structure(body, 3, d, out);
        }
    }
}

fn formula_text(f: &Formula, d: Option<&Declarations>) -> String {
    let mut s = String::new();
    write_formula(f, 0, d, &mut s);
    s
}

fn structure_text(x: &Structure, d: Option<&Declarations>) -> String {
    let mut s = String::new();
    write_structure(x, 0, d, &mut s);
    s
}

fn sequent_text(q: &Sequent, d: Option<&Declarations>) -> String {
    format!("{} |- {}", structure_text(&q.ante, d), structure_text(&q.succ, d))
}

impl Render for Formula {
    fn render(&self, decls: &Declarations) -> String {
        formula_text(self, Some(decls))
    }
}

impl Render for Structure {
    fn render(&self, decls: &Declarations) -> String {
        structure_text(self, Some(decls))
    }
}

impl Render for Sequent {
    fn render(&self, decls: &Declarations) -> String {
        sequent_text(self, Some(decls))
    }
}

impl Render for ProofTree {
    fn render(&self, decls: &Declarations) -> String {
        let mut out = String::new();
        write_proof(self, 0, decls, &mut out);
        out.push('\n');
        out
    }
}

fn write_proof(p: &ProofTree, depth: usize, d: &Declarations, out: &mut String) {
    out.push_str(&"  ".repeat(depth));
    out.push_str(&format!("({} \"{}\"", p.rule, p.conclusion.render(d)));
    for c in &p.children {
        out.push('\n');
        write_proof(c, depth + 1, d, out);
    }
    out.push(')');
}

// Declaration-free forms spell out every action state; they also parse back.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&formula_text(self, None))
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&structure_text(self, None))
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&sequent_text(self, None))
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.base, self.state)
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DECLS: &str = r#"
        agent a;
        action alpha {
          states: k l;
          designated: k;
          pre: k = "q" l = "T";
          rel a: k -> k, k -> l;
        }
    "#;

    fn decls() -> Declarations {
        Declarations::parse(DECLS).unwrap()
    }

    fn atom(s: &str) -> Formula {
        Formula::atom(s)
    }

    #[test]
    fn declarations_load() {
        let d = decls();
        let act = d.action("alpha").unwrap();
        assert_eq!(act.states, vec!["k".to_string(), "l".to_string()]);
        assert_eq!(act.pre_of("k"), Some(&atom("q")));
        assert_eq!(d.betas(&act.designated_label(), &Agent::new("a")).len(), 2);
    }

    #[test]
    fn declarations_reject_unknown_agent() {
        let bad = r#"action beta { states: k; designated: k; pre: k = "T"; rel b: k -> k; }"#;
        assert!(matches!(Declarations::parse(bad), Err(ParseError::UnknownAgent { .. })));
    }

    #[test]
    fn formula_precedence() {
        let d = decls();
        let f = parse_formula("p & q | r", &d).unwrap();
        assert_eq!(f, Formula::bin(BinOp::Or, Formula::bin(BinOp::And, atom("p"), atom("q")), atom("r")));
        let g = parse_formula("p -> q -> r", &d).unwrap();
        assert_eq!(g, Formula::bin(BinOp::Imp, atom("p"), Formula::bin(BinOp::Imp, atom("q"), atom("r"))));
    }

    #[test]
    fn formula_modalities() {
        let d = decls();
        let f = parse_formula("<alpha>[a]p", &d).unwrap();
        let k = ActionLabel::new("alpha", "k");
        assert_eq!(
            f,
            Formula::action_modal(Modality::Dia, k, Formula::agent_modal(Modality::Box, Agent::new("a"), atom("p")))
        );
        let g = parse_formula("[alpha@l]^1[alpha]", &d).unwrap();
        assert_eq!(
            g,
            Formula::action_modal(
                Modality::AdjBox,
                ActionLabel::new("alpha", "l"),
                Formula::One(ActionLabel::new("alpha", "k"))
            )
        );
    }

    #[test]
    fn formula_errors() {
        let d = decls();
        assert!(matches!(parse_formula("<b>p", &d), Err(ParseError::UnknownAgent { .. })));
        assert!(matches!(parse_formula("1[gamma]", &d), Err(ParseError::UnknownAction { .. })));
        assert!(matches!(parse_formula("<alpha@z>p", &d), Err(ParseError::UnknownAction { .. })));
        let err = parse_formula("p &", &d).unwrap_err();
        match err {
            ParseError::Syntax { span, .. } => assert_eq!(span.column, 4),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn structure_examples() {
        let d = decls();
        let s = parse_structure("I ; {a} 'p'", &d).unwrap();
        assert_eq!(
            s,
            Structure::bin(
                SBin::Semi,
                Structure::I,
                Structure::agent_prox(false, Agent::new("a"), Structure::Fm(atom("p")))
            )
        );
        let t = parse_structure("Phi[alpha] > 'p'", &d).unwrap();
        assert_eq!(
            t,
            Structure::bin(SBin::Gt, Structure::Phi(ActionLabel::new("alpha", "k")), Structure::Fm(atom("p")))
        );
        let u = parse_structure("x ; y ; z", &d).unwrap();
        let leaf = |n: &str| Structure::Fm(atom(n));
        assert_eq!(u, Structure::bin(SBin::Semi, Structure::bin(SBin::Semi, leaf("x"), leaf("y")), leaf("z")));
        assert!(parse_structure("x > y > z", &d).is_err());
    }

    #[test]
    fn sequent_examples() {
        let d = decls();
        let s = parse_sequent("'p' |- 'p'", &d).unwrap();
        assert_eq!(s, Sequent::new(Structure::Fm(atom("p")), Structure::Fm(atom("p"))));
        assert_eq!(parse_sequent("I |- I", &d).unwrap(), Sequent::new(Structure::I, Structure::I));
        let a = parse_sequent("{alpha}'p' |- 'p'", &d).unwrap();
        assert!(matches!(a.ante, Structure::DProx(..)));
    }

    #[test]
    fn render_canonical() {
        let d = decls();
        assert_eq!(parse_formula("p&q", &d).unwrap().render(&d), "p & q");
        assert_eq!(Structure::Phi(ActionLabel::new("alpha", "k")).render(&d), "Phi[alpha]");
        let f = parse_formula("(p -> q) -> r & (s | t)", &d).unwrap();
        assert_eq!(f.render(&d), "(p -> q) -> r & (s | t)");
        let s = parse_sequent("(x ; (y ; z)) > {alpha@l}^(I < w) |- I", &d).unwrap();
        assert_eq!(s.render(&d), "'x' ; ('y' ; 'z') > {alpha@l}^(I < 'w') |- I");
        assert_eq!(parse_sequent(&s.render(&d), &d).unwrap(), s);
        assert_eq!(parse_sequent(&s.to_string(), &d).unwrap(), s);
    }

    #[test]
    fn schematic_letters() {
        let d = decls().with_schematic("A", atom("p"));
        assert_eq!(parse_sequent("A |- 'A & q'", &d).unwrap().render(&d), "'p' |- 'p & q'");
    }

    #[test]
    fn proof_files() {
        let d = decls();
        let p = parse_proof_file("# comment\n(Id \"'p' |- 'p'\")", &d).unwrap();
        assert_eq!(p.rule, "Id");
        assert!(p.children.is_empty());
        let q = parse_proof_file("(WL \"'p' ; 'q' |- 'p'\" (Id \"'p' |- 'p'\"))", &d).unwrap();
        assert_eq!(q.children.len(), 1);
        assert_eq!(parse_proof_file(&q.render(&d), &d).unwrap(), q);
        let two = parse_proofs("(Id \"p |- p\") (Id \"q |- q\")", &d).unwrap();
        assert_eq!(two.len(), 2);
        assert!(parse_proof_file("(Id \"p |- p\"", &d).is_err());
        assert!(parse_proof_file("(Id \"p |- \")", &d).is_err());
    }

    #[test]
    fn model_block() {
        let d = decls();
        let m = parse_model("model { worlds: u v; val p: u; val r: u; val q: v; rel a: u->u, u->v, v->u, v->v; }", &d)
            .unwrap();
        assert_eq!(m.worlds.len(), 2);
        assert_eq!(m.rels[&Agent::new("a")].len(), 4);
        assert!(parse_model("model { worlds: u; val p: z; }", &d).is_err());
    }
}
