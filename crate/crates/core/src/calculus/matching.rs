//! Matching concrete sequents against rule patterns and instantiating
//! patterns under an assignment.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::pattern::{FPat, SPat, SeqPat};
use crate::parser::Declarations;
use crate::syntax::{ActionLabel, Agent, Formula, FormulaView, Path, Sequent, Step, Structure, StructureView};

/// The value bound to one metavariable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Binding {
    Structure(Structure),
    Formula(Formula),
    Agent(Agent),
    Action(ActionLabel),
    /// A string of action proxies, outermost first; `true` marks `{α}^`.
    ProxSeq(Vec<(bool, ActionLabel)>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(pub BTreeMap<String, Binding>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Binding> {
        self.0.get(var)
    }

    pub fn with(mut self, var: impl Into<String>, b: Binding) -> Self {
        self.0.insert(var.into(), b);
        self
    }

    /// Binds `var`, or confirms an existing equal binding.
    fn bind(mut self, var: &str, b: Binding) -> Option<Self> {
        match self.0.get(var) {
            Some(old) if *old == b => Some(self),
            Some(_) => None,
            None => {
                self.0.insert(var.to_string(), b);
                Some(self)
            }
        }
    }

    pub fn agent(&self, var: &str) -> Result<&Agent, CalcError> {
        match self.0.get(var) {
            Some(Binding::Agent(a)) => Ok(a),
            Some(_) => Err(CalcError::SortMismatch(var.to_string())),
            None => Err(CalcError::UnboundMetavariable(var.to_string())),
        }
    }

    pub fn action(&self, var: &str) -> Result<&ActionLabel, CalcError> {
        match self.0.get(var) {
            Some(Binding::Action(a)) => Ok(a),
            Some(_) => Err(CalcError::SortMismatch(var.to_string())),
            None => Err(CalcError::UnboundMetavariable(var.to_string())),
        }
    }

    fn structure(&self, var: &str) -> Result<&Structure, CalcError> {
        match self.0.get(var) {
            Some(Binding::Structure(s)) => Ok(s),
            Some(_) => Err(CalcError::SortMismatch(var.to_string())),
            None => Err(CalcError::UnboundMetavariable(var.to_string())),
        }
    }

    fn formula(&self, var: &str) -> Result<&Formula, CalcError> {
        match self.0.get(var) {
            Some(Binding::Formula(f)) => Ok(f),
            Some(_) => Err(CalcError::SortMismatch(var.to_string())),
            None => Err(CalcError::UnboundMetavariable(var.to_string())),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| {
                let val = match v {
                    Binding::Structure(s) => s.to_string(),
                    Binding::Formula(x) => x.to_string(),
                    Binding::Agent(a) => a.to_string(),
                    Binding::Action(l) => l.to_string(),
                    Binding::ProxSeq(seq) => {
                        seq.iter().map(|(adj, l)| format!("{{{l}}}{}", if *adj { "^" } else { "" })).collect::<String>()
                    }
                };
                format!("{k}:={val}")
            })
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CalcError {
    #[error("unbound-metavariable {0}")]
    UnboundMetavariable(String),
    #[error("sort-mismatch {0}")]
    SortMismatch(String),
    #[error("undeclared action {0}")]
    UndeclaredAction(String),
}

/// What a recorded occurrence in an instantiated sequent stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OccKey {
    /// The image of a structure variable.
    SMeta(String),
    /// A formula or atom variable forming a whole structure leaf.
    FMeta(String),
    /// `Pre[alpha]` as a whole structure leaf.
    Pre(String),
    /// Any other formula leaf (a compound or constant pattern).
    Leaf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occurrence {
    pub key: OccKey,
    pub path: Path,
    /// Index of the copy inside a `;(Y|..)` expansion.
    pub copy: Option<usize>,
}

/// A sequent built from a pattern together with the positions of the
/// pattern's variables in it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub sequent: Sequent,
    pub occs: Vec<Occurrence>,
}

pub(crate) fn semi_n_count(asg: &Assignment, alpha: &str, agent: &str, d: &Declarations) -> Option<usize> {
    let l = asg.action(alpha).ok()?;
    let a = asg.agent(agent).ok()?;
    d.action_of(l)?;
    Some(d.betas(l, a).len())
}

pub fn match_seq(p: &SeqPat, s: &Sequent, asg: Assignment, d: &Declarations) -> Vec<Assignment> {
    // A side holding `;(Y|alpha a)` needs alpha and a bound by the other side.
    if p.ante.contains_semi_n() {
        match_spat(&p.succ, &s.succ, asg, d).into_iter().flat_map(|a| match_spat(&p.ante, &s.ante, a, d)).collect()
    } else {
        match_spat(&p.ante, &s.ante, asg, d).into_iter().flat_map(|a| match_spat(&p.succ, &s.succ, a, d)).collect()
    }
}

pub fn match_spat(p: &SPat, s: &Structure, asg: Assignment, d: &Declarations) -> Vec<Assignment> {
    match (p, s.view()) {
        (SPat::Meta(x), _) => asg.bind(x, Binding::Structure(s.clone())).into_iter().collect(),
        (SPat::Fm(fp), StructureView::Fm(f)) => match_fpat(fp, f, asg, d),
        (SPat::I, StructureView::I) => vec![asg],
        (SPat::Bin(op, pa, pb), StructureView::Bin(op2, a, b)) if *op == op2 => {
            match_spat(pa, a, asg, d).into_iter().flat_map(|x| match_spat(pb, b, x, d)).collect()
        }
        (SPat::Agent(adj, v, pb), StructureView::Agent(adj2, g, body)) if *adj == adj2 => {
            match asg.bind(v, Binding::Agent(g.clone())) {
                Some(x) => match_spat(pb, body, x, d),
                None => Vec::new(),
            }
        }
        (SPat::Action(adj, v, pb), StructureView::Action(adj2, l, body)) if *adj == adj2 => {
            match asg.bind(v, Binding::Action(l.clone())) {
                Some(x) => match_spat(pb, body, x, d),
                None => Vec::new(),
            }
        }
        (SPat::Phi(v), StructureView::Phi(l)) => asg.bind(v, Binding::Action(l.clone())).into_iter().collect(),
        (SPat::ProxSeq(name, pb), _) => {
            let mut out = Vec::new();
            let mut prefix = Vec::new();
            let mut cur = s;
            loop {
                if let Some(x) = asg.clone().bind(name, Binding::ProxSeq(prefix.clone())) {
                    out.extend(match_spat(pb, cur, x, d));
                }
                match cur.view() {
                    StructureView::Action(adj, l, body) => {
                        prefix.push((adj, l.clone()));
                        cur = body;
                    }
                    _ => break,
                }
            }
            out
        }
        (SPat::SemiN(y, alpha, agent), _) => {
            let Some(n) = semi_n_count(&asg, alpha, agent, d) else {
                return Vec::new();
            };
            if n == 0 {
                return if *s == Structure::I { vec![asg] } else { Vec::new() };
            }
            let mut copies = Vec::with_capacity(n);
            let mut cur = s;
            for _ in 1..n {
                match cur {
                    Structure::Semi(l, r) => {
                        copies.push(&**r);
                        cur = l;
                    }
                    _ => return Vec::new(),
                }
            }
            copies.push(cur);
            if copies.iter().any(|c| *c != copies[0]) {
                return Vec::new();
            }
            asg.bind(y, Binding::Structure(copies[0].clone())).into_iter().collect()
        }
        _ => Vec::new(),
    }
}

pub fn match_fpat(p: &FPat, f: &Formula, asg: Assignment, d: &Declarations) -> Vec<Assignment> {
    match (p, f.view()) {
        (FPat::Meta(a), _) => asg.bind(a, Binding::Formula(f.clone())).into_iter().collect(),
        (FPat::AtomMeta(a), FormulaView::Atom(_)) => asg.bind(a, Binding::Formula(f.clone())).into_iter().collect(),
        (FPat::Top, FormulaView::Top) | (FPat::Bot, FormulaView::Bot) => vec![asg],
        (FPat::One(v), FormulaView::One(l)) => asg.bind(v, Binding::Action(l.clone())).into_iter().collect(),
        (FPat::Pre(v), _) => match asg.action(v) {
            Ok(l) => {
                if d.pre(l) == Some(f) {
                    vec![asg]
                } else {
                    Vec::new()
                }
            }
            Err(_) => d
                .all_labels()
                .into_iter()
                .filter(|l| d.pre(l) == Some(f))
                .filter_map(|l| asg.clone().bind(v, Binding::Action(l)))
                .collect(),
        },
        (FPat::Bin(op, pa, pb), FormulaView::Bin(op2, a, b)) if *op == op2 => {
            match_fpat(pa, a, asg, d).into_iter().flat_map(|x| match_fpat(pb, b, x, d)).collect()
        }
        (FPat::Agent(m, v, pb), FormulaView::Agent(m2, g, body)) if *m == m2 => {
            match asg.bind(v, Binding::Agent(g.clone())) {
                Some(x) => match_fpat(pb, body, x, d),
                None => Vec::new(),
            }
        }
        (FPat::Action(m, v, pb), FormulaView::Action(m2, l, body)) if *m == m2 => {
            match asg.bind(v, Binding::Action(l.clone())) {
                Some(x) => match_fpat(pb, body, x, d),
                None => Vec::new(),
            }
        }
        _ => Vec::new(),
    }
}

pub fn inst_seq(p: &SeqPat, asg: &Assignment, d: &Declarations) -> Result<Instance, CalcError> {
    let mut occs = Vec::new();
    let mut path = vec![Step::Ante];
    let ante = inst_spat(&p.ante, asg, d, &mut path, &mut occs)?;
    let mut path = vec![Step::Succ];
    let succ = inst_spat(&p.succ, asg, d, &mut path, &mut occs)?;
    Ok(Instance { sequent: Sequent::new(ante, succ), occs })
}

fn inst_spat(
    p: &SPat,
    asg: &Assignment,
    d: &Declarations,
    path: &mut Vec<Step>,
    occs: &mut Vec<Occurrence>,
) -> Result<Structure, CalcError> {
    let here = |key: OccKey, path: &Vec<Step>| Occurrence { key, path: Path(path.clone()), copy: None };
    Ok(match p {
        SPat::Meta(x) => {
            occs.push(here(OccKey::SMeta(x.clone()), path));
            asg.structure(x)?.clone()
        }
        SPat::Fm(fp) => {
            let key = match fp {
                FPat::Meta(a) | FPat::AtomMeta(a) => OccKey::FMeta(a.clone()),
                FPat::Pre(v) => OccKey::Pre(v.clone()),
                _ => OccKey::Leaf,
            };
            occs.push(here(key, path));
            Structure::Fm(inst_fpat(fp, asg, d)?)
        }
        SPat::I => Structure::I,
        SPat::Bin(op, a, b) => {
            path.push(Step::Left);
            let x = inst_spat(a, asg, d, path, occs)?;
            path.pop();
            path.push(Step::Right);
            let y = inst_spat(b, asg, d, path, occs)?;
            path.pop();
            Structure::bin(*op, x, y)
        }
        SPat::Agent(adj, v, b) => {
            let g = asg.agent(v)?.clone();
            path.push(Step::Only);
            let body = inst_spat(b, asg, d, path, occs)?;
            path.pop();
            Structure::agent_prox(*adj, g, body)
        }
        SPat::Action(adj, v, b) => {
            let l = asg.action(v)?.clone();
            path.push(Step::Only);
            let body = inst_spat(b, asg, d, path, occs)?;
            path.pop();
            Structure::action_prox(*adj, l, body)
        }
        SPat::Phi(v) => Structure::Phi(asg.action(v)?.clone()),
        SPat::ProxSeq(name, b) => {
            let seq = match asg.get(name) {
                Some(Binding::ProxSeq(s)) => s.clone(),
                Some(_) => return Err(CalcError::SortMismatch(name.clone())),
                None => return Err(CalcError::UnboundMetavariable(name.clone())),
            };
            for _ in &seq {
                path.push(Step::Only);
            }
            let mut out = inst_spat(b, asg, d, path, occs)?;
            for (adj, l) in seq.iter().rev() {
                path.pop();
                out = Structure::action_prox(*adj, l.clone(), out);
            }
            out
        }
        SPat::SemiN(y, alpha, agent) => {
            let l = asg.action(alpha)?;
            let g = asg.agent(agent)?;
            if d.action_of(l).is_none() {
                return Err(CalcError::UndeclaredAction(l.to_string()));
            }
            let n = d.betas(l, g).len();
            if n == 0 {
                return Ok(Structure::I);
            }
            let body = asg.structure(y)?.clone();
            // Copy i (0-based) sits under n-1-i left steps, then one right
            // step unless it is the leftmost copy.
            for i in 0..n {
                let mut p = path.clone();
                let lefts = if i == 0 { n - 1 } else { n - 1 - i };
                p.extend(std::iter::repeat_n(Step::Left, lefts));
                if i > 0 {
                    p.push(Step::Right);
                }
                occs.push(Occurrence { key: OccKey::SMeta(y.clone()), path: Path(p), copy: Some(i) });
            }
            let mut out = body.clone();
            for _ in 1..n {
                out = Structure::bin(crate::syntax::SBin::Semi, out, body.clone());
            }
            out
        }
    })
}

pub fn inst_fpat(p: &FPat, asg: &Assignment, d: &Declarations) -> Result<Formula, CalcError> {
    Ok(match p {
        FPat::Meta(a) | FPat::AtomMeta(a) => asg.formula(a)?.clone(),
        FPat::Top => Formula::Top,
        FPat::Bot => Formula::Bot,
        FPat::One(v) => Formula::One(asg.action(v)?.clone()),
        FPat::Pre(v) => {
            let l = asg.action(v)?;
            d.pre(l).cloned().ok_or_else(|| CalcError::UndeclaredAction(l.to_string()))?
        }
        FPat::Bin(op, a, b) => Formula::bin(*op, inst_fpat(a, asg, d)?, inst_fpat(b, asg, d)?),
        FPat::Agent(m, v, b) => Formula::agent_modal(*m, asg.agent(v)?.clone(), inst_fpat(b, asg, d)?),
        FPat::Action(m, v, b) => Formula::action_modal(*m, asg.action(v)?.clone(), inst_fpat(b, asg, d)?),
    })
}

#[cfg(test)]
mod tests {
    use super::super::pattern::parse_seq_pat;
    use super::*;
    use crate::parser::{parse_sequent, Declarations};

    fn decls() -> Declarations {
        Declarations::parse(
            r#"agent a; action alpha { states: k l m; designated: k; pre: k = "q" l = "T" m = "p"; rel a: k -> l, k -> m; }"#,
        )
        .unwrap()
    }

    #[test]
    fn semi_n_copies_and_paths() {
        let d = decls();
        let p = parse_seq_pat("{alpha}{a}X |- ;(Y|alpha a)").unwrap();
        let s = parse_sequent("{alpha}{a}'r' |- 'p' ; 'p'", &d).unwrap();
        let m = match_seq(&p, &s, Assignment::new(), &d);
        assert_eq!(m.len(), 1);
        let inst = inst_seq(&p, &m[0], &d).unwrap();
        assert_eq!(inst.sequent, s);
        let ys: Vec<_> = inst.occs.iter().filter(|o| o.copy.is_some()).map(|o| o.path.to_string()).collect();
        assert_eq!(ys, vec!["succ/left", "succ/right"]);
    }

    #[test]
    fn semi_n_matched_from_the_other_side() {
        let d = decls();
        let p = parse_seq_pat(";(Y|alpha a) |- {alpha}{a}X").unwrap();
        let s = parse_sequent("'p' ; 'p' |- {alpha}{a}'r'", &d).unwrap();
        assert_eq!(match_seq(&p, &s, Assignment::new(), &d).len(), 1);
        let bad = parse_sequent("'p' ; 'q' |- {alpha}{a}'r'", &d).unwrap();
        assert!(match_seq(&p, &bad, Assignment::new(), &d).is_empty());
    }

    #[test]
    fn prox_seq_splits() {
        let d = decls();
        let p = parse_seq_pat("Gamma p |- Delta p").unwrap();
        let s = parse_sequent("{alpha}{alpha@l}^'p' |- 'p'", &d).unwrap();
        let m = match_seq(&p, &s, Assignment::new(), &d);
        assert_eq!(m.len(), 1);
        assert_eq!(inst_seq(&p, &m[0], &d).unwrap().sequent, s);
        let wrong = parse_sequent("{alpha}'p' |- 'q'", &d).unwrap();
        assert!(match_seq(&p, &wrong, Assignment::new(), &d).is_empty());
    }

    #[test]
    fn pre_enumerates_actions() {
        let d = decls();
        let p = parse_seq_pat("Pre[alpha] |- X").unwrap();
        let s = parse_sequent("'p' |- I", &d).unwrap();
        let m = match_seq(&p, &s, Assignment::new(), &d);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].action("alpha").unwrap().state, "m");
    }

    #[test]
    fn instantiate_reports_unbound() {
        let d = decls();
        let p = parse_seq_pat("X |- Y").unwrap();
        let asg = Assignment::new().with("X", Binding::Structure(Structure::I));
        assert_eq!(inst_seq(&p, &asg, &d).unwrap_err(), CalcError::UnboundMetavariable("Y".into()));
        let bad = asg.with("Y", Binding::Formula(Formula::Top));
        assert_eq!(inst_seq(&p, &bad, &d).unwrap_err(), CalcError::SortMismatch("Y".into()));
    }
}
