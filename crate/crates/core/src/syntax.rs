//! Term algebra for D'.EAK.
//!
//! Formulas form the operational language; structures are built from
//! formulas by structural proxies and are read contextually depending on
//! whether they sit in precedent or succedent position.  Occurrences inside
//! a sequent are addressed by explicit [`Path`]s so that bookkeeping survives
//! rewriting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// An epistemic agent, compared by name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Agent(pub String);

impl Agent {
    pub fn new(name: impl Into<String>) -> Self {
        Agent(name.into())
    }
}

/// One variant `α_i` of an action structure: the structure's base name
/// together with the state that plays the designated role.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionLabel {
    pub base: String,
    pub state: String,
}

impl ActionLabel {
    pub fn new(base: impl Into<String>, state: impl Into<String>) -> Self {
        ActionLabel { base: base.into(), state: state.into() }
    }
}

/// A finite pointed action model with per-agent relations and preconditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionStructure {
    pub base: String,
    /// Sorted, duplicate-free.
    pub states: Vec<String>,
    pub designated: String,
    pub rels: BTreeMap<Agent, BTreeSet<(String, String)>>,
    pub pre: BTreeMap<String, Formula>,
}

impl ActionStructure {
    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn validate(&self) -> Result<(), String> {
        if self.states.is_empty() {
            return Err(format!("action {} has no states", self.base));
        }
        if !self.states.contains(&self.designated) {
            return Err(format!("designated state {} is not a state of {}", self.designated, self.base));
        }
        for (agent, rel) in &self.rels {
            for (i, j) in rel {
                if !self.states.contains(i) || !self.states.contains(j) {
                    return Err(format!("relation for {} mentions an unknown state ({} -> {})", agent.0, i, j));
                }
            }
        }
        for s in &self.states {
            if !self.pre.contains_key(s) {
                return Err(format!("state {} of {} has no precondition", s, self.base));
            }
        }
        Ok(())
    }

    pub fn label(&self, state: &str) -> ActionLabel {
        ActionLabel::new(self.base.clone(), state)
    }

    pub fn designated_label(&self) -> ActionLabel {
        self.label(&self.designated)
    }

    /// The labels `β` with `α a β`, where `α` is the variant whose designated
    /// state is `from`; sorted by state identifier.
    pub fn successors(&self, agent: &Agent, from: &str) -> Vec<ActionLabel> {
        let mut out: Vec<ActionLabel> = self
            .rels
            .get(agent)
            .map(|rel| rel.iter().filter(|(i, _)| i == from).map(|(_, j)| self.label(j)).collect())
            .unwrap_or_default();
        out.sort();
        out.dedup();
        out
    }

    /// `Pre(α_i)`: the precondition attached to `state`.
    pub fn pre_of(&self, state: &str) -> Option<&Formula> {
        self.pre.get(state)
    }

    /// All variants of this structure, in state order.
    pub fn labels(&self) -> Vec<ActionLabel> {
        self.states.iter().map(|s| self.label(s)).collect()
    }
}

/// Binary operational connectives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    And,
    Or,
    /// `A -> B`
    Imp,
    /// `A <- B`
    LImp,
    /// `A *> B`
    CoImp,
    /// `A <* B`
    LCoImp,
}

/// The four unary modal shapes shared by agent and action modalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    Dia,
    Box,
    AdjDia,
    AdjBox,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Top,
    Bot,
    One(ActionLabel),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    LImp(Box<Formula>, Box<Formula>),
    CoImp(Box<Formula>, Box<Formula>),
    LCoImp(Box<Formula>, Box<Formula>),
    Dia(Agent, Box<Formula>),
    Box(Agent, Box<Formula>),
    AdjDia(Agent, Box<Formula>),
    AdjBox(Agent, Box<Formula>),
    DDia(ActionLabel, Box<Formula>),
    DBox(ActionLabel, Box<Formula>),
    AdjDDia(ActionLabel, Box<Formula>),
    AdjDBox(ActionLabel, Box<Formula>),
}

/// A uniform read-only view of a formula's head symbol.
#[derive(Clone, Copy, Debug)]
pub enum FormulaView<'a> {
    Atom(&'a str),
    Top,
    Bot,
    One(&'a ActionLabel),
    Bin(BinOp, &'a Formula, &'a Formula),
    Agent(Modality, &'a Agent, &'a Formula),
    Action(Modality, &'a ActionLabel, &'a Formula),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn bin(op: BinOp, a: Formula, b: Formula) -> Self {
        let (a, b) = (Box::new(a), Box::new(b));
        match op {
            BinOp::And => Formula::And(a, b),
            BinOp::Or => Formula::Or(a, b),
            BinOp::Imp => Formula::Imp(a, b),
            BinOp::LImp => Formula::LImp(a, b),
            BinOp::CoImp => Formula::CoImp(a, b),
            BinOp::LCoImp => Formula::LCoImp(a, b),
        }
    }

    pub fn agent_modal(m: Modality, agent: Agent, f: Formula) -> Self {
        let f = Box::new(f);
        match m {
            Modality::Dia => Formula::Dia(agent, f),
            Modality::Box => Formula::Box(agent, f),
            Modality::AdjDia => Formula::AdjDia(agent, f),
            Modality::AdjBox => Formula::AdjBox(agent, f),
        }
    }

    pub fn action_modal(m: Modality, label: ActionLabel, f: Formula) -> Self {
        let f = Box::new(f);
        match m {
            Modality::Dia => Formula::DDia(label, f),
            Modality::Box => Formula::DBox(label, f),
            Modality::AdjDia => Formula::AdjDDia(label, f),
            Modality::AdjBox => Formula::AdjDBox(label, f),
        }
    }

    pub fn view(&self) -> FormulaView<'_> {
        use FormulaView as V;
        match self {
            Formula::Atom(p) => V::Atom(p),
            Formula::Top => V::Top,
            Formula::Bot => V::Bot,
            Formula::One(l) => V::One(l),
            Formula::And(a, b) => V::Bin(BinOp::And, a, b),
            Formula::Or(a, b) => V::Bin(BinOp::Or, a, b),
            Formula::Imp(a, b) => V::Bin(BinOp::Imp, a, b),
            Formula::LImp(a, b) => V::Bin(BinOp::LImp, a, b),
            Formula::CoImp(a, b) => V::Bin(BinOp::CoImp, a, b),
            Formula::LCoImp(a, b) => V::Bin(BinOp::LCoImp, a, b),
            Formula::Dia(g, f) => V::Agent(Modality::Dia, g, f),
            Formula::Box(g, f) => V::Agent(Modality::Box, g, f),
            Formula::AdjDia(g, f) => V::Agent(Modality::AdjDia, g, f),
            Formula::AdjBox(g, f) => V::Agent(Modality::AdjBox, g, f),
            Formula::DDia(l, f) => V::Action(Modality::Dia, l, f),
            Formula::DBox(l, f) => V::Action(Modality::Box, l, f),
            Formula::AdjDDia(l, f) => V::Action(Modality::AdjDia, l, f),
            Formula::AdjDBox(l, f) => V::Action(Modality::AdjBox, l, f),
        }
    }

    /// Immediate syntactic subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self.view() {
            FormulaView::Bin(_, a, b) => vec![a, b],
            FormulaView::Agent(_, _, f) | FormulaView::Action(_, _, f) => vec![f],
            _ => Vec::new(),
        }
    }

    /// Number of connectives; atoms and constants have complexity 0.
    pub fn complexity(&self) -> usize {
        match self.view() {
            FormulaView::Bin(_, a, b) => 1 + a.complexity() + b.complexity(),
            FormulaView::Agent(_, _, f) | FormulaView::Action(_, _, f) => 1 + f.complexity(),
            _ => 0,
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Reflexive-transitive closure of the immediate-subformula relation.
    /// `One(α)` is atomic here: its precondition is not a syntactic child.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        if out.insert(self.clone()) {
            for c in self.children() {
                c.collect_subformulas(out);
            }
        }
    }

    /// True when the formula avoids the adjoint (backward-looking) modalities,
    /// the residuals `<-`, `*>`, `<*`, i.e. lies in the language interpreted
    /// pointwise on Kripke models.
    pub fn is_eak(&self) -> bool {
        match self.view() {
            FormulaView::Bin(op, a, b) => matches!(op, BinOp::And | BinOp::Or | BinOp::Imp) && a.is_eak() && b.is_eak(),
            FormulaView::Agent(m, _, f) | FormulaView::Action(m, _, f) => {
                matches!(m, Modality::Dia | Modality::Box) && f.is_eak()
            }
            _ => true,
        }
    }

    /// Action labels occurring anywhere in the formula.
    pub fn action_labels(&self, out: &mut BTreeSet<ActionLabel>) {
        match self.view() {
            FormulaView::One(l) => {
                out.insert(l.clone());
            }
            FormulaView::Action(_, l, f) => {
                out.insert(l.clone());
                f.action_labels(out);
            }
            _ => {
                for c in self.children() {
                    c.action_labels(out);
                }
            }
        }
    }

    /// `A -> F`.
    pub fn negated(self) -> Formula {
        Formula::Imp(Box::new(self), Box::new(Formula::Bot))
    }
}

/// Structural binary connectives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SBin {
    Semi,
    Gt,
    Lt,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Structure {
    Fm(Formula),
    I,
    Semi(Box<Structure>, Box<Structure>),
    Gt(Box<Structure>, Box<Structure>),
    Lt(Box<Structure>, Box<Structure>),
    Prox(Agent, Box<Structure>),
    AdjProx(Agent, Box<Structure>),
    DProx(ActionLabel, Box<Structure>),
    AdjDProx(ActionLabel, Box<Structure>),
    Phi(ActionLabel),
}

#[derive(Clone, Copy, Debug)]
pub enum StructureView<'a> {
    Fm(&'a Formula),
    I,
    Bin(SBin, &'a Structure, &'a Structure),
    /// `adjoint` distinguishes `{a}^` from `{a}`.
    Agent(bool, &'a Agent, &'a Structure),
    Action(bool, &'a ActionLabel, &'a Structure),
    Phi(&'a ActionLabel),
}

impl Structure {
    pub fn fm(f: Formula) -> Self {
        Structure::Fm(f)
    }

    pub fn bin(op: SBin, a: Structure, b: Structure) -> Self {
        let (a, b) = (Box::new(a), Box::new(b));
        match op {
            SBin::Semi => Structure::Semi(a, b),
            SBin::Gt => Structure::Gt(a, b),
            SBin::Lt => Structure::Lt(a, b),
        }
    }

    pub fn agent_prox(adjoint: bool, agent: Agent, s: Structure) -> Self {
        if adjoint {
            Structure::AdjProx(agent, Box::new(s))
        } else {
            Structure::Prox(agent, Box::new(s))
        }
    }

    pub fn action_prox(adjoint: bool, label: ActionLabel, s: Structure) -> Self {
        if adjoint {
            Structure::AdjDProx(label, Box::new(s))
        } else {
            Structure::DProx(label, Box::new(s))
        }
    }

    pub fn view(&self) -> StructureView<'_> {
        use StructureView as V;
        match self {
            Structure::Fm(f) => V::Fm(f),
            Structure::I => V::I,
            Structure::Semi(a, b) => V::Bin(SBin::Semi, a, b),
            Structure::Gt(a, b) => V::Bin(SBin::Gt, a, b),
            Structure::Lt(a, b) => V::Bin(SBin::Lt, a, b),
            Structure::Prox(g, s) => V::Agent(false, g, s),
            Structure::AdjProx(g, s) => V::Agent(true, g, s),
            Structure::DProx(l, s) => V::Action(false, l, s),
            Structure::AdjDProx(l, s) => V::Action(true, l, s),
            Structure::Phi(l) => V::Phi(l),
        }
    }

    pub fn as_formula(&self) -> Option<&Formula> {
        match self {
            Structure::Fm(f) => Some(f),
            _ => None,
        }
    }

    /// Number of structure nodes plus the sizes of embedded formulas.
    pub fn size(&self) -> usize {
        match self.view() {
            StructureView::Fm(f) => f.size(),
            StructureView::I | StructureView::Phi(_) => 1,
            StructureView::Bin(_, a, b) => 1 + a.size() + b.size(),
            StructureView::Agent(_, _, s) | StructureView::Action(_, _, s) => 1 + s.size(),
        }
    }

    /// The substructure at `path` (structure-relative: no side step).
    pub fn get(&self, path: &[Step]) -> Option<&Structure> {
        let Some((first, rest)) = path.split_first() else {
            return Some(self);
        };
        let child = match (self.view(), first) {
            (StructureView::Bin(_, a, _), Step::Left) => a,
            (StructureView::Bin(_, _, b), Step::Right) => b,
            (StructureView::Agent(_, _, s), Step::Only) | (StructureView::Action(_, _, s), Step::Only) => s,
            _ => return None,
        };
        child.get(rest)
    }

    /// Replaces the substructure at `path` by the result of `f`.
    pub fn replace_at(&self, path: &[Step], f: &mut dyn FnMut(&Structure) -> Structure) -> Option<Structure> {
        let Some((first, rest)) = path.split_first() else {
            return Some(f(self));
        };
        Some(match (self, first) {
            (Structure::Semi(a, b), Step::Left) => Structure::Semi(Box::new(a.replace_at(rest, f)?), b.clone()),
            (Structure::Semi(a, b), Step::Right) => Structure::Semi(a.clone(), Box::new(b.replace_at(rest, f)?)),
            (Structure::Gt(a, b), Step::Left) => Structure::Gt(Box::new(a.replace_at(rest, f)?), b.clone()),
            (Structure::Gt(a, b), Step::Right) => Structure::Gt(a.clone(), Box::new(b.replace_at(rest, f)?)),
            (Structure::Lt(a, b), Step::Left) => Structure::Lt(Box::new(a.replace_at(rest, f)?), b.clone()),
            (Structure::Lt(a, b), Step::Right) => Structure::Lt(a.clone(), Box::new(b.replace_at(rest, f)?)),
            (Structure::Prox(g, s), Step::Only) => Structure::Prox(g.clone(), Box::new(s.replace_at(rest, f)?)),
            (Structure::AdjProx(g, s), Step::Only) => Structure::AdjProx(g.clone(), Box::new(s.replace_at(rest, f)?)),
            (Structure::DProx(l, s), Step::Only) => Structure::DProx(l.clone(), Box::new(s.replace_at(rest, f)?)),
            (Structure::AdjDProx(l, s), Step::Only) => Structure::AdjDProx(l.clone(), Box::new(s.replace_at(rest, f)?)),
            _ => return None,
        })
    }

    /// Every substructure path in pre-order (the root first).
    pub fn paths(&self) -> Vec<Vec<Step>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.collect_paths(&mut cur, &mut out);
        out
    }

    fn collect_paths(&self, cur: &mut Vec<Step>, out: &mut Vec<Vec<Step>>) {
        out.push(cur.clone());
        match self.view() {
            StructureView::Bin(_, a, b) => {
                cur.push(Step::Left);
                a.collect_paths(cur, out);
                cur.pop();
                cur.push(Step::Right);
                b.collect_paths(cur, out);
                cur.pop();
            }
            StructureView::Agent(_, _, s) | StructureView::Action(_, _, s) => {
                cur.push(Step::Only);
                s.collect_paths(cur, out);
                cur.pop();
            }
            _ => {}
        }
    }

    /// Formula leaves with their structure-relative paths, left to right.
    pub fn formula_leaves(&self) -> Vec<(Vec<Step>, &Formula)> {
        self.paths().into_iter().filter_map(|p| self.get(&p).and_then(|s| s.as_formula()).map(|f| (p, f))).collect()
    }

    /// Simultaneously replaces the formula leaves at `occs` by `repl`.
    ///
    /// Every addressed node must be a formula leaf and all of them must hold
    /// the same formula.
    pub fn substitute(&self, occs: &BTreeSet<Vec<Step>>, repl: &Structure) -> Result<Structure, SyntaxError> {
        let mut target: Option<&Formula> = None;
        for p in occs {
            let node = self.get(p).ok_or_else(|| SyntaxError::InvalidPath(Path(p.clone())))?;
            let f = node.as_formula().ok_or_else(|| SyntaxError::NonFormulaTarget(Path(p.clone())))?;
            match target {
                None => target = Some(f),
                Some(t) if t == f => {}
                Some(_) => return Err(SyntaxError::NonFormulaTarget(Path(p.clone()))),
            }
        }
        let mut out = self.clone();
        for p in occs {
            out = out.replace_at(p, &mut |_| repl.clone()).ok_or_else(|| SyntaxError::InvalidPath(Path(p.clone())))?;
        }
        Ok(out)
    }

    /// Contextual reading of the structure as a formula (Table of proxies).
    pub fn translate(&self, pol: Polarity) -> Result<Formula, SyntaxError> {
        use Polarity::{Precedent as P, Succedent as S};
        Ok(match (self.view(), pol) {
            (StructureView::Fm(f), _) => f.clone(),
            (StructureView::I, P) => Formula::Top,
            (StructureView::I, S) => Formula::Bot,
            (StructureView::Bin(SBin::Semi, a, b), P) => Formula::bin(BinOp::And, a.translate(P)?, b.translate(P)?),
            (StructureView::Bin(SBin::Semi, a, b), S) => Formula::bin(BinOp::Or, a.translate(S)?, b.translate(S)?),
            (StructureView::Bin(SBin::Gt, a, b), P) => Formula::bin(BinOp::CoImp, a.translate(S)?, b.translate(P)?),
            (StructureView::Bin(SBin::Gt, a, b), S) => Formula::bin(BinOp::Imp, a.translate(P)?, b.translate(S)?),
            (StructureView::Bin(SBin::Lt, a, b), P) => Formula::bin(BinOp::LCoImp, a.translate(P)?, b.translate(S)?),
            (StructureView::Bin(SBin::Lt, a, b), S) => Formula::bin(BinOp::LImp, a.translate(S)?, b.translate(P)?),
            (StructureView::Agent(adj, g, s), pol) => {
                Formula::agent_modal(modality_for(adj, pol), g.clone(), s.translate(pol)?)
            }
            (StructureView::Action(adj, l, s), pol) => {
                Formula::action_modal(modality_for(adj, pol), l.clone(), s.translate(pol)?)
            }
            (StructureView::Phi(l), P) => Formula::One(l.clone()),
            (StructureView::Phi(_), S) => return Err(SyntaxError::PhiInSuccedent),
        })
    }

    /// Action labels occurring in proxies, `Phi` or embedded formulas.
    pub fn action_labels(&self, out: &mut BTreeSet<ActionLabel>) {
        match self.view() {
            StructureView::Fm(f) => f.action_labels(out),
            StructureView::I => {}
            StructureView::Bin(_, a, b) => {
                a.action_labels(out);
                b.action_labels(out);
            }
            StructureView::Agent(_, _, s) => s.action_labels(out),
            StructureView::Action(_, l, s) => {
                out.insert(l.clone());
                s.action_labels(out);
            }
            StructureView::Phi(l) => {
                out.insert(l.clone());
            }
        }
    }
}

fn modality_for(adjoint: bool, pol: Polarity) -> Modality {
    match (adjoint, pol) {
        (false, Polarity::Precedent) => Modality::Dia,
        (false, Polarity::Succedent) => Modality::Box,
        (true, Polarity::Precedent) => Modality::AdjDia,
        (true, Polarity::Succedent) => Modality::AdjBox,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    pub ante: Structure,
    pub succ: Structure,
}

impl Sequent {
    pub fn new(ante: Structure, succ: Structure) -> Self {
        Sequent { ante, succ }
    }

    pub fn side(&self, step: Step) -> Option<&Structure> {
        match step {
            Step::Ante => Some(&self.ante),
            Step::Succ => Some(&self.succ),
            _ => None,
        }
    }

    pub fn get(&self, path: &Path) -> Option<&Structure> {
        let (first, rest) = path.0.split_first()?;
        self.side(*first)?.get(rest)
    }

    pub fn replace_at(&self, path: &Path, f: &mut dyn FnMut(&Structure) -> Structure) -> Option<Sequent> {
        let (first, rest) = path.0.split_first()?;
        match first {
            Step::Ante => Some(Sequent::new(self.ante.replace_at(rest, f)?, self.succ.clone())),
            Step::Succ => Some(Sequent::new(self.ante.clone(), self.succ.replace_at(rest, f)?)),
            _ => None,
        }
    }

    /// Polarity of the occurrence at `path`.
    ///
    /// The antecedent root is precedent and the succedent root succedent.
    /// Descending into `;`, the right child of `>`, the left child of `<` or
    /// any unary proxy keeps the polarity; the left child of `>` and the
    /// right child of `<` flip it.
    pub fn polarity_of(&self, path: &Path) -> Result<Polarity, SyntaxError> {
        let invalid = || SyntaxError::InvalidPath(path.clone());
        let (first, rest) = path.0.split_first().ok_or_else(invalid)?;
        let mut pol = match first {
            Step::Ante => Polarity::Precedent,
            Step::Succ => Polarity::Succedent,
            _ => return Err(invalid()),
        };
        let mut node = self.side(*first).ok_or_else(invalid)?;
        for step in rest {
            node = match (node.view(), step) {
                (StructureView::Bin(SBin::Semi, a, _), Step::Left) => a,
                (StructureView::Bin(SBin::Semi, _, b), Step::Right) => b,
                (StructureView::Bin(SBin::Gt, a, _), Step::Left) => {
                    pol = pol.flip();
                    a
                }
                (StructureView::Bin(SBin::Gt, _, b), Step::Right) => b,
                (StructureView::Bin(SBin::Lt, a, _), Step::Left) => a,
                (StructureView::Bin(SBin::Lt, _, b), Step::Right) => {
                    pol = pol.flip();
                    b
                }
                (StructureView::Agent(_, _, s), Step::Only) | (StructureView::Action(_, _, s), Step::Only) => s,
                _ => return Err(invalid()),
            };
        }
        Ok(pol)
    }

    /// Every substructure path of the sequent, antecedent first.
    pub fn paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        for (side, s) in [(Step::Ante, &self.ante), (Step::Succ, &self.succ)] {
            for p in s.paths() {
                let mut full = vec![side];
                full.extend(p);
                out.push(Path(full));
            }
        }
        out
    }

    /// Formula leaves with their paths, antecedent first.
    pub fn formula_leaves(&self) -> Vec<(Path, &Formula)> {
        let mut out = Vec::new();
        for (side, s) in [(Step::Ante, &self.ante), (Step::Succ, &self.succ)] {
            for (p, f) in s.formula_leaves() {
                let mut full = vec![side];
                full.extend(p);
                out.push((Path(full), f));
            }
        }
        out
    }

    /// Simultaneous substitution of `repl` for formula leaves at `occs`.
    pub fn substitute(&self, occs: &BTreeSet<Path>, repl: &Structure) -> Result<Sequent, SyntaxError> {
        let mut ante = BTreeSet::new();
        let mut succ = BTreeSet::new();
        let mut target: Option<&Formula> = None;
        for p in occs {
            let f = self
                .get(p)
                .ok_or_else(|| SyntaxError::InvalidPath(p.clone()))?
                .as_formula()
                .ok_or_else(|| SyntaxError::NonFormulaTarget(p.clone()))?;
            if target.is_some_and(|t| t != f) {
                return Err(SyntaxError::NonFormulaTarget(p.clone()));
            }
            target = Some(f);
            match p.0[0] {
                Step::Ante => ante.insert(p.0[1..].to_vec()),
                _ => succ.insert(p.0[1..].to_vec()),
            };
        }
        Ok(Sequent::new(self.ante.substitute(&ante, repl)?, self.succ.substitute(&succ, repl)?))
    }

    pub fn size(&self) -> usize {
        self.ante.size() + self.succ.size()
    }

    /// Every formula occurring as a leaf.
    pub fn formulas(&self) -> Vec<&Formula> {
        self.formula_leaves().into_iter().map(|(_, f)| f).collect()
    }
}

/// One child selector in an occurrence path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    Ante,
    Succ,
    Left,
    Right,
    /// The argument of a unary proxy.
    Only,
}

/// An occurrence address inside a sequent: a side step followed by child
/// selectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Path(pub Vec<Step>);

impl Path {
    pub fn ante() -> Self {
        Path(vec![Step::Ante])
    }

    pub fn succ() -> Self {
        Path(vec![Step::Succ])
    }

    pub fn child(&self, step: Step) -> Path {
        let mut v = self.0.clone();
        v.push(step);
        Path(v)
    }

    pub fn join(&self, rest: &[Step]) -> Path {
        let mut v = self.0.clone();
        v.extend_from_slice(rest);
        Path(v)
    }

    pub fn starts_with(&self, prefix: &Path) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// True for the two whole-side paths.
    pub fn is_displayed(&self) -> bool {
        self.0.len() == 1
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .0
            .iter()
            .map(|s| match s {
                Step::Ante => "ante",
                Step::Succ => "succ",
                Step::Left => "left",
                Step::Right => "right",
                Step::Only => "only",
            })
            .collect();
        write!(f, "{}", parts.join("/"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Precedent,
    Succedent,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Precedent => Polarity::Succedent,
            Polarity::Succedent => Polarity::Precedent,
        }
    }

    /// The whole-side step on which an occurrence of this polarity is
    /// displayed.
    pub fn side(self) -> Step {
        match self {
            Polarity::Precedent => Step::Ante,
            Polarity::Succedent => Step::Succ,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Precedent => "precedent",
            Polarity::Succedent => "succedent",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("invalid-path: {0}")]
    InvalidPath(Path),
    #[error("non-formula-target: {0}")]
    NonFormulaTarget(Path),
    #[error("phi-in-succedent")]
    PhiInSuccedent,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: &str) -> Structure {
        Structure::Fm(Formula::atom(n))
    }

    #[test]
    fn polarity_flips_under_left_of_gt() {
        // X |- Y > Z with the path to Y.
        let s = Sequent::new(p("x"), Structure::bin(SBin::Gt, p("y"), p("z")));
        assert_eq!(s.polarity_of(&Path(vec![Step::Succ, Step::Left])).unwrap(), Polarity::Precedent);
        assert_eq!(s.polarity_of(&Path(vec![Step::Succ, Step::Right])).unwrap(), Polarity::Succedent);
        assert_eq!(s.polarity_of(&Path::ante()).unwrap(), Polarity::Precedent);
    }

    #[test]
    fn polarity_inside_action_proxy() {
        // {α}(A > B) |- I, path to A: precedent, flipped once by `>`.
        let l = ActionLabel::new("alpha", "k");
        let s = Sequent::new(Structure::action_prox(false, l, Structure::bin(SBin::Gt, p("a"), p("b"))), Structure::I);
        let path = Path(vec![Step::Ante, Step::Only, Step::Left]);
        assert_eq!(s.polarity_of(&path).unwrap(), Polarity::Succedent);
    }

    #[test]
    fn polarity_rejects_bad_paths() {
        let s = Sequent::new(p("x"), p("y"));
        assert!(matches!(s.polarity_of(&Path(vec![Step::Ante, Step::Left])), Err(SyntaxError::InvalidPath(_))));
        assert!(s.polarity_of(&Path(vec![])).is_err());
    }

    #[test]
    fn translate_examples() {
        let semi = Structure::bin(SBin::Semi, p("a"), p("b"));
        assert_eq!(
            semi.translate(Polarity::Precedent).unwrap(),
            Formula::bin(BinOp::And, Formula::atom("a"), Formula::atom("b"))
        );
        assert_eq!(Structure::I.translate(Polarity::Succedent).unwrap(), Formula::Bot);
        let l = ActionLabel::new("alpha", "k");
        let adj = Structure::action_prox(true, l.clone(), p("a"));
        assert_eq!(
            adj.translate(Polarity::Succedent).unwrap(),
            Formula::AdjDBox(l.clone(), Box::new(Formula::atom("a")))
        );
        assert_eq!(Structure::Phi(l.clone()).translate(Polarity::Precedent).unwrap(), Formula::One(l.clone()));
        assert_eq!(Structure::Phi(l).translate(Polarity::Succedent), Err(SyntaxError::PhiInSuccedent));
    }

    #[test]
    fn substitute_examples() {
        let s = Structure::bin(SBin::Semi, p("a"), p("a"));
        let occs: BTreeSet<Vec<Step>> = [vec![Step::Left]].into_iter().collect();
        assert_eq!(s.substitute(&occs, &Structure::I).unwrap(), Structure::bin(SBin::Semi, Structure::I, p("a")));

        let xy = Structure::bin(SBin::Semi, p("x"), p("y"));
        let root: BTreeSet<Vec<Step>> = [vec![]].into_iter().collect();
        assert_eq!(p("a").substitute(&root, &xy).unwrap(), xy);

        let l = ActionLabel::new("alpha", "k");
        let t = Structure::action_prox(false, l, Structure::bin(SBin::Semi, p("a"), p("b")));
        let both: BTreeSet<Vec<Step>> =
            [vec![Step::Only, Step::Left], vec![Step::Only, Step::Right]].into_iter().collect();
        assert!(matches!(t.substitute(&both, &Structure::I), Err(SyntaxError::NonFormulaTarget(_))));
        let to_inner: BTreeSet<Vec<Step>> = [vec![Step::Only]].into_iter().collect();
        assert!(matches!(t.substitute(&to_inner, &Structure::I), Err(SyntaxError::NonFormulaTarget(_))));
        assert_eq!(t.substitute(&BTreeSet::new(), &Structure::I).unwrap(), t);
    }

    #[test]
    fn subformulas_examples() {
        let pq = Formula::bin(BinOp::And, Formula::atom("p"), Formula::atom("q"));
        assert_eq!(pq.subformulas().len(), 3);
        let l = ActionLabel::new("alpha", "k");
        let f = Formula::action_modal(
            Modality::Dia,
            l.clone(),
            Formula::bin(BinOp::Imp, Formula::atom("p"), Formula::atom("q")),
        );
        let subs = f.subformulas();
        assert_eq!(subs.len(), 4);
        assert!(subs.contains(&f));
        assert_eq!(Formula::One(l).subformulas().len(), 1);
    }

    #[test]
    fn successors_are_sorted() {
        let a = Agent::new("a");
        let mut rels = BTreeMap::new();
        rels.insert(a.clone(), [("k".to_string(), "m".to_string()), ("k".to_string(), "l".to_string())].into());
        let act = ActionStructure {
            base: "alpha".into(),
            states: vec!["k".into(), "l".into(), "m".into()],
            designated: "k".into(),
            rels,
            pre: ["k", "l", "m"].iter().map(|s| (s.to_string(), Formula::Top)).collect(),
        };
        act.validate().unwrap();
        let succ = act.successors(&a, "k");
        assert_eq!(succ, vec![act.label("l"), act.label("m")]);
        assert!(act.successors(&a, "l").is_empty());
    }
}
