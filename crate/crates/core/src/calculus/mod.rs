//! Rule schemas, the two bundled rule sets, and rule application.
//!
//! Rules are written in the pattern notation of [`pattern`] and compiled
//! once per calculus.  Congruence between parameters is not written by
//! hand: it is read off the variables of each instance (see [`links`]).

pub mod matching;
pub mod pattern;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

pub use matching::{Assignment, Binding, CalcError, Instance, OccKey, Occurrence};
pub use pattern::{FPat, SPat, SeqPat};

use crate::parser::Declarations;
use crate::syntax::{Path, Sequent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Axiom,
    Structural,
    DisplayPostulate,
    OperationalLeft,
    OperationalRight,
}

impl Family {
    pub fn is_operational(self) -> bool {
        matches!(self, Family::OperationalLeft | Family::OperationalRight)
    }

    /// Whether formula variables standing alone are parameters of the rule.
    fn formula_vars_parametric(self) -> bool {
        matches!(self, Family::Structural | Family::DisplayPostulate)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Axiom => "axiom",
            Family::Structural => "structural",
            Family::DisplayPostulate => "display-postulate",
            Family::OperationalLeft => "operational-left",
            Family::OperationalRight => "operational-right",
        })
    }
}

/// `beta` ranges over `{β : α a β}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Successor {
    pub alpha: String,
    pub agent: String,
    pub beta: String,
}

impl Successor {
    fn holds(&self, asg: &Assignment, d: &Declarations) -> Option<bool> {
        let alpha = asg.action(&self.alpha).ok()?;
        let agent = asg.agent(&self.agent).ok()?;
        let beta = asg.action(&self.beta).ok()?;
        Some(d.betas(alpha, agent).contains(beta))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSchema {
    pub name: String,
    pub family: Family,
    pub premises: Vec<SeqPat>,
    pub conclusion: SeqPat,
    /// Double-line rule: usable top-down and bottom-up.
    pub invertible: bool,
    /// One premise copy per `β` with `α a β` (the single premise pattern
    /// mentions `beta`).
    pub per_beta: Option<Successor>,
    pub side_condition: Option<Successor>,
    /// Head symbol introduced by an operational or axiom rule, such as `&`
    /// or `<a>`; used to pair left and right rules.
    pub connective: Option<String>,
}

impl RuleSchema {
    pub fn is_axiom(&self) -> bool {
        self.premises.is_empty()
    }

    /// The rule with premise and conclusion exchanged (unary invertible rules).
    fn flipped(&self) -> Option<RuleSchema> {
        if !self.invertible || self.premises.len() != 1 {
            return None;
        }
        let mut r = self.clone();
        r.premises = vec![self.conclusion.clone()];
        r.conclusion = self.premises[0].clone();
        Some(r)
    }

    /// Arity as shown by `lint --list`.
    pub fn arity_text(&self) -> String {
        match &self.per_beta {
            Some(s) => format!("per-beta({} {})", s.alpha, s.agent),
            None => self.premises.len().to_string(),
        }
    }
}

/// The D'.EAK rule set or its predecessor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    DeakPrime,
    Legacy,
}

#[derive(Clone, Debug)]
pub struct Calculus {
    pub name: String,
    pub variant: Variant,
    pub classical: bool,
    pub decls: Declarations,
    rules: Vec<RuleSchema>,
    index: HashMap<String, usize>,
}

/// A concrete rule application: premises and conclusion with variable
/// positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inference {
    pub premises: Vec<Instance>,
    pub conclusion: Instance,
}

impl Inference {
    pub fn premise_sequents(&self) -> Vec<&Sequent> {
        self.premises.iter().map(|p| &p.sequent).collect()
    }
}

/// Why an inference step does not check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepFailure {
    ArityMismatch { expected: usize, found: usize },
    NoMatchingAssignment,
    PremiseMismatch,
}

/// The result of matching one proof step against a rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepMatch {
    pub assignment: Assignment,
    /// The step used an invertible rule bottom-up.
    pub backward: bool,
    /// More than one assignment justified the step.
    pub ambiguous: bool,
}

impl Calculus {
    pub fn rules(&self) -> &[RuleSchema] {
        &self.rules
    }

    pub fn rule(&self, name: &str) -> Option<&RuleSchema> {
        self.index.get(name).map(|&i| &self.rules[i])
    }

    pub fn display_postulates(&self) -> impl Iterator<Item = &RuleSchema> {
        self.rules.iter().filter(|r| r.family == Family::DisplayPostulate)
    }

    pub fn axioms(&self) -> impl Iterator<Item = &RuleSchema> {
        self.rules.iter().filter(|r| r.is_axiom())
    }

    /// Stable text table: name, family, arity, invertibility and the
    /// congruence pairs of a generic instance.
    pub fn list_table(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let pairs = crate::cutelim::lint::generic_pairs(self, r)
                .map(|ps| {
                    if ps.is_empty() {
                        "-".to_string()
                    } else {
                        ps.iter().map(|(i, p, c)| format!("{i}:{p}~{c}")).collect::<Vec<_>>().join(" ")
                    }
                })
                .unwrap_or_else(|e| format!("<{e}>"));
            out.push_str(&format!(
                "{:<14} {:<18} {:<16} {:<4} {}\n",
                r.name,
                r.family.to_string(),
                r.arity_text(),
                if r.invertible { "inv" } else { "-" },
                pairs
            ));
        }
        out
    }

    fn push(&mut self, r: RuleSchema) {
        assert!(!self.index.contains_key(&r.name), "duplicate rule {}", r.name);
        self.index.insert(r.name.clone(), self.rules.len());
        self.rules.push(r);
    }
}

/// All assignments under which `rule`'s conclusion pattern yields `concl`.
pub fn match_rule(rule: &RuleSchema, concl: &Sequent, d: &Declarations) -> Vec<Assignment> {
    let mut out = matching::match_seq(&rule.conclusion, concl, Assignment::new(), d);
    if let Some(sc) = &rule.side_condition {
        out.retain(|a| sc.holds(a, d) != Some(false));
    }
    out
}

/// Instantiates every premise (expanding per-β rules) and the conclusion.
pub fn instantiate(rule: &RuleSchema, asg: &Assignment, d: &Declarations) -> Result<Inference, CalcError> {
    let conclusion = matching::inst_seq(&rule.conclusion, asg, d)?;
    let mut premises = Vec::new();
    for (p, extra) in expand_premises(rule, asg, d)? {
        let local = match extra {
            Some((v, l)) => asg.clone().with(v, Binding::Action(l)),
            None => asg.clone(),
        };
        premises.push(matching::inst_seq(p, &local, d)?);
    }
    Ok(Inference { premises, conclusion })
}

type Expanded<'r> = Vec<(&'r SeqPat, Option<(String, crate::syntax::ActionLabel)>)>;

fn expand_premises<'r>(rule: &'r RuleSchema, asg: &Assignment, d: &Declarations) -> Result<Expanded<'r>, CalcError> {
    match &rule.per_beta {
        None => Ok(rule.premises.iter().map(|p| (p, None)).collect()),
        Some(s) => {
            let alpha = asg.action(&s.alpha)?;
            let agent = asg.agent(&s.agent)?;
            if d.action_of(alpha).is_none() {
                return Err(CalcError::UndeclaredAction(alpha.to_string()));
            }
            Ok(d.betas(alpha, agent).into_iter().map(|b| (&rule.premises[0], Some((s.beta.clone(), b)))).collect())
        }
    }
}

fn match_forward(
    rule: &RuleSchema,
    concl: &Sequent,
    prems: &[&Sequent],
    d: &Declarations,
) -> Result<(Assignment, bool), StepFailure> {
    if rule.per_beta.is_none() && rule.premises.len() != prems.len() {
        return Err(StepFailure::ArityMismatch { expected: rule.premises.len(), found: prems.len() });
    }
    let candidates = match_rule(rule, concl, d);
    if candidates.is_empty() {
        return Err(StepFailure::NoMatchingAssignment);
    }
    let mut arity_err = None;
    let mut found: Vec<Assignment> = Vec::new();
    for sigma in candidates {
        let expanded = match expand_premises(rule, &sigma, d) {
            Ok(e) => e,
            Err(_) => continue,
        };
        if expanded.len() != prems.len() {
            arity_err = Some(StepFailure::ArityMismatch { expected: expanded.len(), found: prems.len() });
            continue;
        }
        let mut partial = vec![sigma];
        for ((pat, extra), prem) in expanded.iter().zip(prems) {
            let mut next = Vec::new();
            for a in partial {
                let local = match extra {
                    Some((v, l)) => a.with(v.clone(), Binding::Action(l.clone())),
                    None => a,
                };
                for mut m in matching::match_seq(pat, prem, local, d) {
                    if let Some((v, _)) = extra {
                        m.0.remove(v);
                    }
                    next.push(m);
                }
            }
            partial = next;
        }
        for a in partial {
            if let Some(sc) = &rule.side_condition {
                if sc.holds(&a, d) != Some(true) {
                    continue;
                }
            }
            let Ok(inf) = instantiate(rule, &a, d) else { continue };
            if inf.conclusion.sequent == *concl && inf.premise_sequents() == prems && !found.contains(&a) {
                found.push(a);
            }
        }
        if !found.is_empty() {
            break;
        }
    }
    match found.len() {
        0 => Err(arity_err.unwrap_or(StepFailure::PremiseMismatch)),
        n => Ok((found.swap_remove(0), n > 1)),
    }
}

/// Finds the first assignment under which `concl` follows from `prems` by
/// `rule`; invertible rules are also tried bottom-up.
pub fn match_step(
    rule: &RuleSchema,
    concl: &Sequent,
    prems: &[&Sequent],
    d: &Declarations,
) -> Result<StepMatch, StepFailure> {
    let fwd = match_forward(rule, concl, prems, d);
    match fwd {
        Ok((assignment, ambiguous)) => Ok(StepMatch { assignment, backward: false, ambiguous }),
        Err(e) => match rule.flipped() {
            Some(flip) if prems.len() == 1 => match match_forward(&flip, concl, prems, d) {
                Ok((assignment, ambiguous)) => Ok(StepMatch { assignment, backward: true, ambiguous }),
                Err(_) => Err(e),
            },
            _ => Err(e),
        },
    }
}

/// Congruence and principal data for one rule application.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Links {
    /// (premise index, premise path, conclusion path) for congruent
    /// parameter occurrences.
    pub pairs: Vec<(usize, Path, Path)>,
    /// Parameter occurrences in the conclusion with no premise counterpart
    /// (introduced by weakening-like rules).
    pub introduced: Vec<Path>,
    /// Principal formula occurrences of the conclusion.
    pub principal: Vec<Path>,
    pub inference: Option<Inference>,
}

fn parametric(key: &OccKey, family: Family) -> bool {
    match key {
        OccKey::SMeta(_) | OccKey::Pre(_) => true,
        OccKey::FMeta(_) => family.formula_vars_parametric(),
        OccKey::Leaf => false,
    }
}

/// Computes the links of an application of `rule` under `asg`.  For a
/// bottom-up use of an invertible rule (`backward`) the roles of premise
/// and conclusion are exchanged.
pub fn links(rule: &RuleSchema, asg: &Assignment, backward: bool, d: &Declarations) -> Result<Links, CalcError> {
    let r = if backward { rule.flipped().expect("only invertible unary rules run backward") } else { rule.clone() };
    let inf = instantiate(&r, asg, d)?;
    let mut out = Links::default();
    let mut keys: BTreeMap<&OccKey, Vec<&Occurrence>> = BTreeMap::new();
    for o in &inf.conclusion.occs {
        if parametric(&o.key, r.family) {
            keys.entry(&o.key).or_default().push(o);
        } else {
            out.principal.push(o.path.clone());
        }
    }
    for (key, concl) in &keys {
        let prem: Vec<(usize, &Occurrence)> = inf
            .premises
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.occs.iter().filter(|o| &o.key == *key).map(move |o| (i, o)))
            .collect();
        if prem.is_empty() {
            out.introduced.extend(concl.iter().map(|o| o.path.clone()));
            continue;
        }
        let per_copy = concl.iter().all(|c| c.copy.is_some()) && r.per_beta.is_some();
        for (i, po) in &prem {
            for co in concl {
                if concl.len() == 1 || !per_copy || co.copy == Some(*i) {
                    out.pairs.push((*i, po.path.clone(), co.path.clone()));
                }
            }
        }
    }
    out.inference = Some(inf);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Rule tables
// ---------------------------------------------------------------------------

struct Row {
    name: &'static str,
    family: Family,
    inv: bool,
    prems: &'static [&'static str],
    concl: &'static str,
    conn: Option<&'static str>,
}

const fn row(
    name: &'static str,
    family: Family,
    inv: bool,
    prems: &'static [&'static str],
    concl: &'static str,
) -> Row {
    Row { name, family, inv, prems, concl, conn: None }
}

const fn op(
    name: &'static str,
    family: Family,
    conn: &'static str,
    prems: &'static [&'static str],
    concl: &'static str,
) -> Row {
    Row { name, family, inv: false, prems, concl, conn: Some(conn) }
}

use Family::{Axiom as AX, DisplayPostulate as DP, OperationalLeft as OL, OperationalRight as OR, Structural as ST};

const BASE: &[Row] = &[
    op("Id", AX, "atom", &[], "p |- p"),
    row("Cut", ST, false, &["X |- A", "A |- Y"], "X |- Y"),
    row("I1_L", ST, true, &["X |- Y"], "I |- Y < X"),
    row("I1_R", ST, true, &["X |- Y"], "X < Y |- I"),
    row("I2_L", ST, true, &["X |- Y"], "I |- X > Y"),
    row("I2_R", ST, true, &["X |- Y"], "Y > X |- I"),
    row("IW_L", ST, false, &["I |- X"], "Y |- X"),
    row("IW_R", ST, false, &["X |- I"], "X |- Y"),
    row("W1_L", ST, false, &["X |- Z"], "Y |- Z < X"),
    row("W1_R", ST, false, &["X |- Z"], "X < Z |- Y"),
    row("W2_L", ST, false, &["X |- Z"], "Y |- X > Z"),
    row("W2_R", ST, false, &["X |- Z"], "Z > X |- Y"),
    row("C_L", ST, false, &["X ; X |- Y"], "X |- Y"),
    row("C_R", ST, false, &["Y |- X ; X"], "Y |- X"),
    row("E_L", ST, false, &["Y ; X |- Z"], "X ; Y |- Z"),
    row("E_R", ST, false, &["Z |- X ; Y"], "Z |- Y ; X"),
    row("A_L", ST, false, &["X ; (Y ; Z) |- W"], "(X ; Y) ; Z |- W"),
    row("A_R", ST, false, &["W |- (Z ; Y) ; X"], "W |- Z ; (Y ; X)"),
    row("SemiLt", DP, true, &["X ; Y |- Z"], "X |- Z < Y"),
    row("LtSemi", DP, true, &["Z |- X ; Y"], "Z < Y |- X"),
    row("SemiGt", DP, true, &["X ; Y |- Z"], "Y |- X > Z"),
    row("GtSemi", DP, true, &["Z |- X ; Y"], "X > Z |- Y"),
];

const GRISHIN: &[Row] = &[
    row("Gri_L", ST, true, &["X > (Y ; Z) |- W"], "(X > Y) ; Z |- W"),
    row("Gri_R", ST, true, &["W |- X > (Y ; Z)"], "W |- (X > Y) ; Z"),
];

const PROPOSITIONAL: &[Row] = &[
    op("Bot_L", AX, "F", &[], "F |- I"),
    op("Bot_R", OR, "F", &["X |- I"], "X |- F"),
    op("Top_L", OL, "T", &["I |- X"], "T |- X"),
    op("Top_R", AX, "T", &[], "I |- T"),
    op("And_L", OL, "&", &["A ; B |- Z"], "'A & B' |- Z"),
    op("And_R", OR, "&", &["X |- A", "Y |- B"], "X ; Y |- 'A & B'"),
    op("Or_L", OL, "|", &["A |- X", "B |- Y"], "'A | B' |- X ; Y"),
    op("Or_R", OR, "|", &["Z |- A ; B"], "Z |- 'A | B'"),
    op("LImp_L", OL, "<-", &["B |- Y", "X |- A"], "'B <- A' |- Y < X"),
    op("LImp_R", OR, "<-", &["Z |- B < A"], "Z |- 'B <- A'"),
    op("LCoImp_L", OL, "<*", &["B < A |- Z"], "'B <* A' |- Z"),
    op("LCoImp_R", OR, "<*", &["Y |- B", "A |- X"], "Y < X |- 'B <* A'"),
    op("Imp_L", OL, "->", &["X |- A", "B |- Y"], "'A -> B' |- X > Y"),
    op("Imp_R", OR, "->", &["Z |- A > B"], "Z |- 'A -> B'"),
    op("CoImp_L", OL, "*>", &["A > B |- Z"], "'A *> B' |- Z"),
    op("CoImp_R", OR, "*>", &["A |- X", "Y |- B"], "X > Y |- 'A *> B'"),
];

const EPISTEMIC: &[Row] = &[
    row("nec_L", ST, false, &["I |- X"], "{a}I |- X"),
    row("nec_R", ST, false, &["X |- I"], "X |- {a}I"),
    row("nec^_L", ST, false, &["I |- X"], "{a}^I |- X"),
    row("nec^_R", ST, false, &["X |- I"], "X |- {a}^I"),
    row("FS_L", ST, false, &["{a}Y > {a}Z |- X"], "{a}(Y > Z) |- X"),
    row("FS_R", ST, false, &["Y |- {a}X > {a}Z"], "Y |- {a}(X > Z)"),
    row("FS^_L", ST, false, &["{a}^Y > {a}^X |- Z"], "{a}^(Y > X) |- Z"),
    row("FS^_R", ST, false, &["Y |- {a}^X > {a}^Z"], "Y |- {a}^(X > Z)"),
    row("mon_L", ST, false, &["{a}X ; {a}Y |- Z"], "{a}(X ; Y) |- Z"),
    row("mon_R", ST, false, &["Z |- {a}Y ; {a}X"], "Z |- {a}(Y ; X)"),
    row("mon^_L", ST, false, &["{a}^X ; {a}^Y |- Z"], "{a}^(X ; Y) |- Z"),
    row("mon^_R", ST, false, &["Z |- {a}^Y ; {a}^X"], "Z |- {a}^(Y ; X)"),
    row("conj_L", ST, false, &["{a}(X ; {a}^Y) |- Z"], "{a}X ; Y |- Z"),
    row("conj_R", ST, false, &["X |- {a}(Y ; {a}^Z)"], "X |- {a}Y ; Z"),
    row("conj^_L", ST, false, &["{a}^(X ; {a}Y) |- Z"], "{a}^X ; Y |- Z"),
    row("conj^_R", ST, false, &["X |- {a}^(Y ; {a}Z)"], "X |- {a}^Y ; Z"),
    row("ProxAdj", DP, true, &["{a}X |- Y"], "X |- {a}^Y"),
    row("AdjProx", DP, true, &["X |- {a}Y"], "{a}^X |- Y"),
    op("Dia_L", OL, "<a>", &["{a}A |- X"], "'<a>A' |- X"),
    op("Dia_R", OR, "<a>", &["X |- A"], "{a}X |- '<a>A'"),
    op("Box_L", OL, "[a]", &["A |- X"], "'[a]A' |- {a}X"),
    op("Box_R", OR, "[a]", &["X |- {a}A"], "X |- '[a]A'"),
    op("Dia^_L", OL, "<a>^", &["{a}^A |- X"], "'<a>^A' |- X"),
    op("Dia^_R", OR, "<a>^", &["X |- A"], "{a}^X |- '<a>^A'"),
    op("Box^_L", OL, "[a]^", &["A |- X"], "'[a]^A' |- {a}^X"),
    op("Box^_R", OR, "[a]^", &["X |- {a}^A"], "X |- '[a]^A'"),
];

const DYNAMIC: &[Row] = &[
    op("atom", AX, "atom", &[], "Gamma p |- Delta p"),
    row("Dnec_L", ST, false, &["I |- X"], "{alpha}I |- X"),
    row("Dnec_R", ST, false, &["X |- I"], "X |- {alpha}I"),
    row("Dnec^_L", ST, false, &["I |- X"], "{alpha}^I |- X"),
    row("Dnec^_R", ST, false, &["X |- I"], "X |- {alpha}^I"),
    row("DFS_L", ST, false, &["{alpha}Y > {alpha}Z |- X"], "{alpha}(Y > Z) |- X"),
    row("DFS_R", ST, false, &["Y |- {alpha}X > {alpha}Z"], "Y |- {alpha}(X > Z)"),
    row("DFS^_L", ST, false, &["{alpha}^Y > {alpha}^X |- Z"], "{alpha}^(Y > X) |- Z"),
    row("DFS^_R", ST, false, &["Y |- {alpha}^X > {alpha}^Z"], "Y |- {alpha}^(X > Z)"),
    row("Dmon_L", ST, false, &["{alpha}X ; {alpha}Y |- Z"], "{alpha}(X ; Y) |- Z"),
    row("Dmon_R", ST, false, &["Z |- {alpha}Y ; {alpha}X"], "Z |- {alpha}(Y ; X)"),
    row("Dmon^_L", ST, false, &["{alpha}^X ; {alpha}^Y |- Z"], "{alpha}^(X ; Y) |- Z"),
    row("Dmon^_R", ST, false, &["Z |- {alpha}^Y ; {alpha}^X"], "Z |- {alpha}^(Y ; X)"),
    row("DProxAdj", DP, true, &["{alpha}X |- Y"], "X |- {alpha}^Y"),
    row("DAdjProx", DP, true, &["X |- {alpha}Y"], "{alpha}^X |- Y"),
    row("balance", ST, false, &["X |- Y"], "{alpha}X |- {alpha}Y"),
    op("DDia_L", OL, "<alpha>", &["{alpha}A |- X"], "'<alpha>A' |- X"),
    op("DDia_R", OR, "<alpha>", &["X |- A"], "{alpha}X |- '<alpha>A'"),
    op("DBox_L", OL, "[alpha]", &["A |- X"], "'[alpha]A' |- {alpha}X"),
    op("DBox_R", OR, "[alpha]", &["X |- {alpha}A"], "X |- '[alpha]A'"),
    op("DDia^_L", OL, "<alpha>^", &["{alpha}^A |- X"], "'<alpha>^A' |- X"),
    op("DDia^_R", OR, "<alpha>^", &["X |- A"], "{alpha}^X |- '<alpha>^A'"),
    op("DBox^_L", OL, "[alpha]^", &["A |- X"], "'[alpha]^A' |- {alpha}^X"),
    op("DBox^_R", OR, "[alpha]^", &["X |- {alpha}^A"], "X |- '[alpha]^A'"),
];

const PRIME: &[Row] = &[
    row("comp_L", ST, false, &["{alpha}{alpha}^X |- Y"], "Phi[alpha] ; X |- Y"),
    row("comp_R", ST, false, &["X |- {alpha}{alpha}^Y"], "X |- Phi[alpha] > Y"),
    row("reduce'_L", ST, false, &["Phi[alpha] ; {alpha}X |- Y"], "{alpha}X |- Y"),
    row("reduce'_R", ST, false, &["Y |- Phi[alpha] > {alpha}X"], "Y |- {alpha}X"),
    row("swap-in'_L", ST, false, &["{alpha}{a}X |- Y"], "Phi[alpha] ; {a}{beta}X |- Y"),
    row("swap-in'_R", ST, false, &["Y |- {alpha}{a}X"], "Y |- Phi[alpha] > {a}{beta}X"),
    row("swap-out'_L", ST, false, &["{a}{beta}X |- Y"], "{alpha}{a}X |- ;(Y|alpha a)"),
    row("swap-out'_R", ST, false, &["Y |- {a}{beta}X"], ";(Y|alpha a) |- {alpha}{a}X"),
    op("One_L", OL, "1", &["Phi[alpha] |- X"], "'1[alpha]' |- X"),
    op("One_R", AX, "1", &[], "Phi[alpha] |- '1[alpha]'"),
];

const LEGACY: &[Row] = &[
    row("reduce_L", ST, false, &["Pre[alpha] ; {alpha}A |- X"], "{alpha}A |- X"),
    row("reduce_R", ST, false, &["X |- Pre[alpha] > {alpha}A"], "X |- {alpha}A"),
    row("swap-in_L", ST, false, &["Pre[alpha] ; {alpha}{a}X |- Y"], "Pre[alpha] ; {a}{beta}X |- Y"),
    row("swap-in_R", ST, false, &["Y |- Pre[alpha] > {alpha}{a}X"], "Y |- Pre[alpha] > {a}{beta}X"),
    row("swap-out_L", ST, false, &["Pre[alpha] ; {a}{beta}X |- Y"], "Pre[alpha] ; {alpha}{a}X |- ;(Y|alpha a)"),
    row("swap-out_R", ST, false, &["Y |- Pre[alpha] > {a}{beta}X"], ";(Y|alpha a) |- Pre[alpha] > {alpha}{a}X"),
    op("reverse_L", OL, "[alpha]", &["Pre[alpha] ; {alpha}A |- X"], "Pre[alpha] ; '[alpha]A' |- X"),
    op("reverse_R", OR, "<alpha>", &["X |- Pre[alpha] > {alpha}A"], "X |- Pre[alpha] > '<alpha>A'"),
];

fn compile(row: &Row) -> RuleSchema {
    let parse = |s: &str| pattern::parse_seq_pat(s).unwrap_or_else(|e| panic!("bad pattern for {}: {e}", row.name));
    let premises: Vec<SeqPat> = row.prems.iter().map(|p| parse(p)).collect();
    let conclusion = parse(row.concl);
    let succ = || Successor { alpha: "alpha".into(), agent: "a".into(), beta: "beta".into() };
    let per_beta = row.name.starts_with("swap-out").then(succ);
    let side_condition = row.name.starts_with("swap-in").then(succ);
    RuleSchema {
        name: row.name.to_string(),
        family: row.family,
        premises,
        conclusion,
        invertible: row.inv,
        per_beta,
        side_condition,
        connective: row.conn.map(str::to_string),
    }
}

fn assemble(name: &str, variant: Variant, classical: bool, decls: &Declarations, tables: &[&[Row]]) -> Calculus {
    let mut c = Calculus {
        name: name.to_string(),
        variant,
        classical,
        decls: decls.clone(),
        rules: Vec::new(),
        index: HashMap::new(),
    };
    for t in tables {
        for r in *t {
            c.push(compile(r));
        }
    }
    c
}

/// The full D'.EAK rule set; `classical` adds the Grishin rules.
pub fn builtin_deak_prime(decls: &Declarations, classical: bool) -> Calculus {
    let mut tables: Vec<&[Row]> = vec![BASE];
    if classical {
        tables.push(GRISHIN);
    }
    tables.extend([PROPOSITIONAL, EPISTEMIC, DYNAMIC, PRIME]);
    assemble("deak-prime", Variant::DeakPrime, classical, decls, &tables)
}

/// The predecessor calculus D.EAK, whose dynamic structural rules carry the
/// precondition formula as a restricted parameter.
pub fn builtin_deak_legacy(decls: &Declarations, classical: bool) -> Calculus {
    let mut tables: Vec<&[Row]> = vec![BASE];
    if classical {
        tables.push(GRISHIN);
    }
    tables.extend([PROPOSITIONAL, EPISTEMIC, DYNAMIC, LEGACY]);
    assemble("deak-legacy", Variant::Legacy, classical, decls, &tables)
}

/// Applies a unary rule top-down to `prem`, returning the conclusion under
/// the first matching assignment.
pub fn apply_down(rule: &RuleSchema, prem: &Sequent, d: &Declarations) -> Option<Sequent> {
    apply_all_down(rule, prem, d).into_iter().next()
}

/// Every conclusion obtainable from `prem` by a unary rule, deduplicated,
/// in match order.
pub fn apply_all_down(rule: &RuleSchema, prem: &Sequent, d: &Declarations) -> Vec<Sequent> {
    if rule.premises.len() != 1 || rule.per_beta.is_some() {
        return Vec::new();
    }
    let mut out: Vec<Sequent> = Vec::new();
    for a in matching::match_seq(&rule.premises[0], prem, Assignment::new(), d) {
        if let Ok(inst) = matching::inst_seq(&rule.conclusion, &a, d) {
            if !out.contains(&inst.sequent) {
                out.push(inst.sequent);
            }
        }
    }
    out
}

/// Applies an invertible unary rule bottom-up: from an instance of its
/// conclusion to the matching premise.
pub fn apply_up(rule: &RuleSchema, concl: &Sequent, d: &Declarations) -> Option<Sequent> {
    apply_all_up(rule, concl, d).into_iter().next()
}

/// Every premise from which an invertible unary rule yields `concl`.
pub fn apply_all_up(rule: &RuleSchema, concl: &Sequent, d: &Declarations) -> Vec<Sequent> {
    rule.flipped().map(|f| apply_all_down(&f, concl, d)).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_sequent;

    pub(crate) fn decls() -> Declarations {
        Declarations::parse(
            r#"agent a;
               action alpha { states: k l; designated: k; pre: k = "q" l = "T"; rel a: k -> k, k -> l; }"#,
        )
        .unwrap()
    }

    fn seq(s: &str) -> Sequent {
        parse_sequent(s, &decls()).unwrap()
    }

    #[test]
    fn instantiate_examples() {
        let d = decls();
        let c = builtin_deak_prime(&d, true);
        let leaf = |s: &str| Binding::Structure(crate::parser::parse_structure(s, &d).unwrap());
        let asg = Assignment::new().with("X", leaf("'p'")).with("Y", leaf("'q'")).with("Z", leaf("'p'"));
        let inf = instantiate(c.rule("W1_L").unwrap(), &asg, &d).unwrap();
        assert_eq!(inf.premises[0].sequent, seq("'p' |- 'p'"));
        assert_eq!(inf.conclusion.sequent, seq("'q' |- 'p' < 'p'"));

        let asg = Assignment::new().with("X", leaf("'p'")).with("Y", leaf("'p'"));
        let inf = instantiate(c.rule("C_L").unwrap(), &asg, &d).unwrap();
        assert_eq!(inf.premises[0].sequent, seq("'p' ; 'p' |- 'p'"));
        assert_eq!(inf.conclusion.sequent, seq("'p' |- 'p'"));

        let alpha = d.action("alpha").unwrap().designated_label();
        let asg = Assignment::new().with("X", leaf("'p'")).with("Y", leaf("'p'")).with("alpha", Binding::Action(alpha));
        let inf = instantiate(c.rule("balance").unwrap(), &asg, &d).unwrap();
        assert_eq!(inf.conclusion.sequent, seq("{alpha}'p' |- {alpha}'p'"));
    }

    #[test]
    fn match_rule_examples() {
        let d = decls();
        let c = builtin_deak_prime(&d, true);
        assert_eq!(match_rule(c.rule("Id").unwrap(), &seq("'p' |- 'p'"), &d).len(), 1);
        let el = match_rule(c.rule("E_L").unwrap(), &seq("'p' ; 'q' |- 'r'"), &d);
        assert_eq!(el.len(), 1);
        assert_eq!(
            el[0].get("X"),
            Some(&Binding::Structure(crate::syntax::Structure::Fm(crate::syntax::Formula::atom("p"))))
        );
        assert!(match_rule(c.rule("And_R").unwrap(), &seq("'p' |- 'p'"), &d).is_empty());
    }

    #[test]
    fn per_beta_expansion() {
        let d = decls();
        let c = builtin_deak_prime(&d, true);
        let r = c.rule("swap-out'_L").unwrap();
        let concl = seq("{alpha}{a}'p' |- 'r' ; 'r'");
        let m = match_rule(r, &concl, &d);
        assert_eq!(m.len(), 1);
        let inf = instantiate(r, &m[0], &d).unwrap();
        let prems: Vec<String> = inf.premises.iter().map(|p| p.sequent.to_string()).collect();
        assert_eq!(prems, vec!["{a}{alpha@k}'p' |- 'r'", "{a}{alpha@l}'p' |- 'r'"]);
        let again = instantiate(r, &m[0], &d).unwrap();
        assert_eq!(inf, again);
    }

    #[test]
    fn axioms_accept_instances() {
        let d = decls();
        let c = builtin_deak_prime(&d, true);
        let atom = c.rule("atom").unwrap();
        assert!(match_step(atom, &seq("{alpha}'p' |- {alpha}'p'"), &[], &d).is_ok());
        let one = c.rule("One_R").unwrap();
        assert!(match_step(one, &seq("Phi[alpha] |- '1[alpha]'"), &[], &d).is_ok());
    }

    #[test]
    fn step_failures() {
        let d = decls();
        let c = builtin_deak_prime(&d, true);
        let id = c.rule("Id").unwrap();
        assert_eq!(match_step(id, &seq("'p' |- 'q'"), &[], &d), Err(StepFailure::NoMatchingAssignment));
        let cut = c.rule("Cut").unwrap();
        let only = seq("'p' |- 'p'");
        assert!(matches!(match_step(cut, &only, &[&only], &d), Err(StepFailure::ArityMismatch { .. })));
        let el = c.rule("E_L").unwrap();
        let bad = seq("'p' ; 'q' |- 'r'");
        assert_eq!(match_step(el, &bad, &[&bad], &d), Err(StepFailure::PremiseMismatch));
    }

    #[test]
    fn invertible_rules_run_backward() {
        let d = decls();
        let c = builtin_deak_prime(&d, true);
        let r = c.rule("SemiGt").unwrap();
        let m = match_step(r, &seq("'p' ; 'q' |- 'r'"), &[&seq("'q' |- 'p' > 'r'")], &d).unwrap();
        assert!(m.backward);
        assert_eq!(apply_up(r, &seq("'q' |- 'p' > 'r'"), &d), Some(seq("'p' ; 'q' |- 'r'")));
    }

    #[test]
    fn swap_in_side_condition() {
        let d = decls();
        let c = builtin_deak_prime(&d, true);
        let r = c.rule("swap-in'_L").unwrap();
        let good = seq("Phi[alpha] ; {a}{alpha@l}'p' |- 'r'");
        let prem = seq("{alpha}{a}'p' |- 'r'");
        assert!(match_step(r, &good, &[&prem], &d).is_ok());
        // alpha@l has no a-successors, so the conclusion relative to it fails.
        let bad = seq("Phi[alpha@l] ; {a}{alpha}'p' |- 'r'");
        let bad_prem = seq("{alpha@l}{a}'p' |- 'r'");
        assert!(match_step(r, &bad, &[&bad_prem], &d).is_err());
    }

    #[test]
    fn contraction_links_bifurcate() {
        let d = decls();
        let c = builtin_deak_prime(&d, true);
        let r = c.rule("C_L").unwrap();
        let m = match_rule(r, &seq("'p' |- 'q'"), &d);
        let l = links(r, &m[0], false, &d).unwrap();
        let from_x: Vec<_> = l.pairs.iter().filter(|(_, _, cpath)| cpath.to_string() == "ante").collect();
        assert_eq!(from_x.len(), 2);
    }
}
