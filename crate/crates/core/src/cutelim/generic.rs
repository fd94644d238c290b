//! Generic instances of rule schemas: every metavariable is bound to a
//! fresh atom or a fixed action/agent, so that the instance exhibits the
//! shape of the schema and nothing else.

use std::collections::BTreeMap;

use crate::calculus::{self, Assignment, Binding, FPat, Inference, RuleSchema, SPat, SeqPat};
use crate::parser::Declarations;
use crate::proofs::{ProofTree, HYP};
use crate::syntax::{ActionLabel, Agent, Formula, Structure};

/// The declarations used for linting: one agent and a two-state action
/// whose preconditions are distinct atoms.
pub const LINT_DECLS: &str =
    r#"agent a; action alpha { states: k l; designated: k; pre: k = "pre_k" l = "pre_l"; rel a: k -> k, k -> l; }"#;

pub fn lint_decls() -> Declarations {
    Declarations::parse(LINT_DECLS).expect("lint declarations parse")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sort {
    Structure,
    Formula,
    Atom,
    Agent,
    Action,
    ProxSeq,
}

/// Metavariables of a schema with their sorts.
pub fn metavariables(rule: &RuleSchema) -> BTreeMap<String, Sort> {
    let mut out = BTreeMap::new();
    for p in rule.premises.iter().chain(std::iter::once(&rule.conclusion)) {
        seq_vars(p, &mut out);
    }
    out
}

fn seq_vars(p: &SeqPat, out: &mut BTreeMap<String, Sort>) {
    for s in p.sides() {
        s_vars(s, out);
    }
}

fn s_vars(p: &SPat, out: &mut BTreeMap<String, Sort>) {
    let mut put = |v: &str, s: Sort| {
        out.entry(v.to_string()).or_insert(s);
    };
    match p {
        SPat::Meta(x) => put(x, Sort::Structure),
        SPat::Fm(f) => f_vars(f, out),
        SPat::I => {}
        SPat::Bin(_, a, b) => {
            s_vars(a, out);
            s_vars(b, out);
        }
        SPat::Agent(_, v, b) => {
            put(v, Sort::Agent);
            s_vars(b, out);
        }
        SPat::Action(_, v, b) => {
            put(v, Sort::Action);
            s_vars(b, out);
        }
        SPat::Phi(v) => put(v, Sort::Action),
        SPat::ProxSeq(n, b) => {
            put(n, Sort::ProxSeq);
            s_vars(b, out);
        }
        SPat::SemiN(y, al, ag) => {
            put(y, Sort::Structure);
            put(al, Sort::Action);
            put(ag, Sort::Agent);
        }
    }
}

fn f_vars(p: &FPat, out: &mut BTreeMap<String, Sort>) {
    match p {
        FPat::Meta(a) => {
            out.entry(a.clone()).or_insert(Sort::Formula);
        }
        FPat::AtomMeta(a) => {
            out.entry(a.clone()).or_insert(Sort::Atom);
        }
        FPat::Top | FPat::Bot => {}
        FPat::One(v) | FPat::Pre(v) => {
            out.entry(v.clone()).or_insert(Sort::Action);
        }
        FPat::Bin(_, a, b) => {
            f_vars(a, out);
            f_vars(b, out);
        }
        FPat::Agent(_, v, f) => {
            out.entry(v.clone()).or_insert(Sort::Agent);
            f_vars(f, out);
        }
        FPat::Action(_, v, f) => {
            out.entry(v.clone()).or_insert(Sort::Action);
            f_vars(f, out);
        }
    }
}

/// How to bind the sorts that have more than one sensible generic value.
#[derive(Clone, Debug)]
pub struct GenericOpts {
    /// Prefix for the atoms standing in for structure variables.
    pub tag: String,
    pub gamma: Vec<(bool, ActionLabel)>,
    pub delta: Vec<(bool, ActionLabel)>,
}

impl GenericOpts {
    pub fn new(tag: &str) -> Self {
        GenericOpts { tag: tag.to_string(), gamma: Vec::new(), delta: Vec::new() }
    }

    pub fn proxies(mut self, gamma: Vec<(bool, ActionLabel)>, delta: Vec<(bool, ActionLabel)>) -> Self {
        self.gamma = gamma;
        self.delta = delta;
        self
    }
}

/// The designated and the non-designated state of the lint action.
pub fn lint_labels(d: &Declarations) -> (ActionLabel, ActionLabel) {
    let a = d.action("alpha").expect("lint action declared");
    (a.designated_label(), a.label("l"))
}

/// Binds every metavariable of `rule`: structures to `'<tag><x>'`,
/// formulas to `'f_<a>'`, atoms to themselves, `alpha` to the designated
/// state and `beta` to a successor of it.
pub fn generic_assignment(rule: &RuleSchema, d: &Declarations, o: &GenericOpts) -> Assignment {
    let (k, l) = lint_labels(d);
    let beta = rule.per_beta.as_ref().or(rule.side_condition.as_ref()).map(|s| s.beta.clone());
    let mut asg = Assignment::new();
    for (v, sort) in metavariables(rule) {
        let b = match sort {
            Sort::Structure => {
                Binding::Structure(Structure::fm(Formula::atom(format!("{}{}", o.tag, v.to_lowercase()))))
            }
            Sort::Formula => Binding::Formula(Formula::atom(format!("f_{}", v.to_lowercase()))),
            Sort::Atom => Binding::Formula(Formula::atom(v.clone())),
            Sort::Agent => Binding::Agent(Agent::new(v.clone())),
            Sort::Action => {
                if rule.per_beta.is_some() && beta.as_deref() == Some(v.as_str()) {
                    continue;
                }
                Binding::Action(if beta.as_deref() == Some(v.as_str()) { l.clone() } else { k.clone() })
            }
            Sort::ProxSeq => Binding::ProxSeq(if v == "Gamma" { o.gamma.clone() } else { o.delta.clone() }),
        };
        asg = asg.with(v, b);
    }
    asg
}

pub fn generic_inference(
    rule: &RuleSchema,
    d: &Declarations,
    o: &GenericOpts,
) -> Result<(Assignment, Inference), String> {
    let asg = generic_assignment(rule, d, o);
    let inf = calculus::instantiate(rule, &asg, d).map_err(|e| e.to_string())?;
    Ok((asg, inf))
}

/// One application of `rule` to open hypotheses.
pub fn generic_step(rule: &RuleSchema, d: &Declarations, o: &GenericOpts) -> Result<ProofTree, String> {
    let (_, inf) = generic_inference(rule, d, o)?;
    let kids = inf.premises.iter().map(|p| ProofTree::leaf(HYP, p.sequent.clone())).collect();
    Ok(ProofTree::new(rule.name.clone(), inf.conclusion.sequent, kids))
}
