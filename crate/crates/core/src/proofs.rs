//! Proof trees, the checker, occurrence tracking and the display engine.
//!
//! Proof files may use three macros besides the calculus rules:
//!
//! * `Disp` closes the gap between its premise and conclusion with a
//!   shortest chain of display postulates;
//! * `WL` derives `X ; Y |- Z` from `X |- Z`, and `WR` derives
//!   `Z |- X ; Y` from `Z |- X`, each through an isolated weakening and
//!   one display postulate.
//!
//! `Hyp` marks an open leaf.  The checker expands macros, so the tree in a
//! [`CheckReport`] uses primitive rules only.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::calculus::{self, links, match_step, Assignment, Calculus, Links, RuleSchema, StepFailure};
use crate::syntax::{Formula, Path, Polarity, SBin, Sequent, Structure, StructureView};

/// Rule name of an open assumption.
pub const HYP: &str = "Hyp";
/// Maximal length of a display chain.
pub const DISPLAY_DEPTH: usize = 64;
const MACROS: [&str; 3] = ["Disp", "WL", "WR"];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProofTree {
    pub rule: String,
    pub conclusion: Sequent,
    pub children: Vec<ProofTree>,
}

impl ProofTree {
    pub fn new(rule: impl Into<String>, conclusion: Sequent, children: Vec<ProofTree>) -> Self {
        ProofTree { rule: rule.into(), conclusion, children }
    }

    pub fn leaf(rule: impl Into<String>, conclusion: Sequent) -> Self {
        Self::new(rule, conclusion, Vec::new())
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProofTree::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.children.iter().map(ProofTree::height).max().unwrap_or(0)
    }

    pub fn at(&self, path: &[usize]) -> Option<&ProofTree> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children.get(*i)?.at(rest),
        }
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut ProofTree> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children.get_mut(*i)?.at_mut(rest),
        }
    }

    /// Node paths in pre-order.
    pub fn node_paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        fn go(t: &ProofTree, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(cur.clone());
            for (i, c) in t.children.iter().enumerate() {
                cur.push(i);
                go(c, cur, out);
                cur.pop();
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn count_rule(&self, name: &str) -> usize {
        usize::from(self.rule == name) + self.children.iter().map(|c| c.count_rule(name)).sum::<usize>()
    }

    /// Distinct rule names used anywhere in the tree.
    pub fn rule_names(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.insert(n.rule.clone());
            stack.extend(&n.children);
        }
        out
    }

    /// Every sequent in the tree, pre-order.
    pub fn sequents(&self) -> Vec<&Sequent> {
        let mut out = vec![&self.conclusion];
        for c in &self.children {
            out.extend(c.sequents());
        }
        out
    }
}

/// Prints a node path as `root`, `root.0`, `root.0.1`, ...
pub fn node_path_text(p: &[usize]) -> String {
    let mut s = String::from("root");
    for i in p {
        s.push('.');
        s.push_str(&i.to_string());
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CheckFailure {
    #[error("unknown-rule {0}")]
    UnknownRule(String),
    #[error("arity-mismatch expected {expected} found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("no-matching-assignment")]
    NoMatchingAssignment,
    #[error("premise-mismatch")]
    PremiseMismatch,
    #[error("phi-in-succedent {0}")]
    PhiInSuccedent(Path),
    #[error("macro {rule}: {msg}")]
    Macro { rule: String, msg: String },
}

impl From<StepFailure> for CheckFailure {
    fn from(f: StepFailure) -> Self {
        match f {
            StepFailure::ArityMismatch { expected, found } => CheckFailure::ArityMismatch { expected, found },
            StepFailure::NoMatchingAssignment => CheckFailure::NoMatchingAssignment,
            StepFailure::PremiseMismatch => CheckFailure::PremiseMismatch,
        }
    }
}

/// What the checker learned about one primitive node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepInfo {
    pub rule: String,
    pub assignment: Assignment,
    pub backward: bool,
    pub ambiguous: bool,
    pub links: Links,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    /// The macro-free tree; absent when checking failed.
    pub proof: Option<ProofTree>,
    pub nodes: usize,
    /// Node path (in the input tree) and reason of the first failure.
    pub failure: Option<(Vec<usize>, CheckFailure)>,
    /// Per-node data keyed by node path in the expanded tree.
    pub steps: BTreeMap<Vec<usize>, StepInfo>,
    pub hypotheses: Vec<Sequent>,
    pub ambiguous: Vec<Vec<usize>>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }

    /// A complete derivation: checked with no open hypotheses.
    pub fn is_closed(&self) -> bool {
        self.is_ok() && self.hypotheses.is_empty()
    }

    pub fn step(&self, node: &[usize]) -> Option<&StepInfo> {
        self.steps.get(node)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            Some((p, why)) => writeln!(f, "FAIL {} {}", node_path_text(p), why),
            None => {
                writeln!(f, "OK {}", self.nodes)?;
                for h in &self.hypotheses {
                    writeln!(f, "HYP {h}")?;
                }
                for p in &self.ambiguous {
                    writeln!(f, "AMBIGUOUS {}", node_path_text(p))?;
                }
                Ok(())
            }
        }
    }
}

/// Checks `proof` against `calc`.  Deterministic; checking the returned
/// expanded tree again yields the same assignments.
pub fn check(proof: &ProofTree, calc: &Calculus) -> CheckReport {
    let mut st = Checker { calc, steps: BTreeMap::new(), hyps: Vec::new(), ambiguous: Vec::new() };
    let res = st.node(proof, &mut Vec::new(), &mut Vec::new());
    match res {
        Ok(t) => CheckReport {
            nodes: t.size(),
            proof: Some(t),
            failure: None,
            steps: st.steps,
            hypotheses: st.hyps,
            ambiguous: st.ambiguous,
        },
        Err((p, why)) => CheckReport {
            proof: None,
            nodes: 0,
            failure: Some((p, why)),
            steps: BTreeMap::new(),
            hypotheses: Vec::new(),
            ambiguous: Vec::new(),
        },
    }
}

struct Checker<'c> {
    calc: &'c Calculus,
    steps: BTreeMap<Vec<usize>, StepInfo>,
    hyps: Vec<Sequent>,
    ambiguous: Vec<Vec<usize>>,
}

type Failed = (Vec<usize>, CheckFailure);

impl Checker<'_> {
    fn node(&mut self, t: &ProofTree, orig: &mut Vec<usize>, exp: &mut Vec<usize>) -> Result<ProofTree, Failed> {
        let fail = |o: &Vec<usize>, why| Err((o.clone(), why));
        if let Err(p) = phi_check(&t.conclusion) {
            return fail(orig, CheckFailure::PhiInSuccedent(p));
        }
        if MACROS.contains(&t.rule.as_str()) {
            if t.children.len() != 1 {
                return fail(orig, CheckFailure::ArityMismatch { expected: 1, found: t.children.len() });
            }
            let child = &t.children[0];
            let chain = expand_macro(&t.rule, &t.conclusion, &child.conclusion, self.calc)
                .map_err(|msg| (orig.clone(), CheckFailure::Macro { rule: t.rule.clone(), msg }))?;
            // chain: the (rule, conclusion) pairs from the bottom up; the
            // last one has `child` as its premise.
            let depth = chain.len();
            orig.push(0);
            exp.extend(std::iter::repeat_n(0, depth));
            let sub = self.node(child, orig, exp);
            exp.truncate(exp.len() - depth);
            orig.pop();
            let mut built = sub?;
            for (k, (rule, concl)) in chain.into_iter().enumerate().rev() {
                let here: Vec<usize> = exp.iter().copied().chain(std::iter::repeat_n(0, k)).collect();
                self.step(&rule, &concl, &[&built.conclusion], &here).map_err(|why| (orig.clone(), why))?;
                built = ProofTree::new(rule, concl, vec![built]);
            }
            return Ok(built);
        }
        let mut kids = Vec::with_capacity(t.children.len());
        for (i, c) in t.children.iter().enumerate() {
            orig.push(i);
            exp.push(i);
            let r = self.node(c, orig, exp);
            orig.pop();
            exp.pop();
            kids.push(r?);
        }
        if t.rule == HYP {
            if !kids.is_empty() {
                return fail(orig, CheckFailure::ArityMismatch { expected: 0, found: kids.len() });
            }
            self.hyps.push(t.conclusion.clone());
            return Ok(t.clone());
        }
        let prems: Vec<&Sequent> = kids.iter().map(|k| &k.conclusion).collect();
        self.step(&t.rule, &t.conclusion, &prems, exp).map_err(|why| (orig.clone(), why))?;
        Ok(ProofTree::new(t.rule.clone(), t.conclusion.clone(), kids))
    }

    fn step(&mut self, rule: &str, concl: &Sequent, prems: &[&Sequent], at: &[usize]) -> Result<(), CheckFailure> {
        let d = &self.calc.decls;
        let r = self.calc.rule(rule).ok_or_else(|| CheckFailure::UnknownRule(rule.to_string()))?;
        let m = match_step(r, concl, prems, d)?;
        let l = links(r, &m.assignment, m.backward, d).map_err(|_| CheckFailure::NoMatchingAssignment)?;
        if m.ambiguous {
            self.ambiguous.push(at.to_vec());
        }
        self.steps.insert(
            at.to_vec(),
            StepInfo {
                rule: rule.to_string(),
                assignment: m.assignment,
                backward: m.backward,
                ambiguous: m.ambiguous,
                links: l,
            },
        );
        Ok(())
    }
}

/// Fails with the path of a `Phi` occurrence in succedent position.
pub fn phi_check(s: &Sequent) -> Result<(), Path> {
    for p in s.paths() {
        if matches!(s.get(&p), Some(Structure::Phi(_))) && s.polarity_of(&p) == Ok(Polarity::Succedent) {
            return Err(p);
        }
    }
    Ok(())
}

/// Bottom-up list of (rule, conclusion) pairs realising a macro step.
fn expand_macro(
    rule: &str,
    concl: &Sequent,
    prem: &Sequent,
    calc: &Calculus,
) -> Result<Vec<(String, Sequent)>, String> {
    match rule {
        "Disp" => {
            let chain = display_chain(concl, prem, calc)
                .ok_or_else(|| format!("no display chain within depth {DISPLAY_DEPTH}"))?;
            Ok(chain)
        }
        "WL" => {
            let StructureView::Bin(SBin::Semi, x, y) = concl.ante.view() else {
                return Err("conclusion must have the form `X ; Y |- Z`".into());
            };
            let mid = Sequent::new(y.clone(), Structure::bin(SBin::Gt, x.clone(), concl.succ.clone()));
            Ok(vec![("SemiGt".into(), concl.clone()), ("W2_L".into(), mid)])
        }
        "WR" => {
            let StructureView::Bin(SBin::Semi, x, y) = concl.succ.view() else {
                return Err("conclusion must have the form `Z |- X ; Y`".into());
            };
            let mid = Sequent::new(Structure::bin(SBin::Gt, x.clone(), concl.ante.clone()), y.clone());
            Ok(vec![("GtSemi".into(), concl.clone()), ("W2_R".into(), mid)])
        }
        _ => unreachable!("not a macro"),
    }
}

/// One display-postulate move from `s`, in deterministic order: rules by
/// name, forward results before backward ones.
fn display_moves<'c>(s: &Sequent, calc: &'c Calculus) -> Vec<(&'c RuleSchema, Sequent)> {
    let mut dps: Vec<&RuleSchema> = calc.display_postulates().collect();
    dps.sort_by(|a, b| a.name.cmp(&b.name));
    let d = &calc.decls;
    let mut out = Vec::new();
    for r in dps {
        // Reading `s` as the conclusion gives its premise, and vice versa.
        for n in calculus::apply_all_up(r, s, d) {
            out.push((r, n));
        }
        for n in calculus::apply_all_down(r, s, d) {
            out.push((r, n));
        }
    }
    out
}

/// Shortest display-postulate chain from `from` (bottom) to `to` (top).
fn display_chain(from: &Sequent, to: &Sequent, calc: &Calculus) -> Option<Vec<(String, Sequent)>> {
    let found = bfs(from, calc, |s| s == to)?;
    Some(found.into_iter().map(|(r, s, _)| (r, s)).collect())
}

/// Breadth-first search over display moves; returns the chain of
/// (rule, sequent it concludes, the next sequent) from `start` to the first
/// sequent accepted by `goal`.
fn bfs(start: &Sequent, calc: &Calculus, goal: impl Fn(&Sequent) -> bool) -> Option<Vec<(String, Sequent, Sequent)>> {
    if goal(start) {
        return Some(Vec::new());
    }
    let mut parent: HashMap<Sequent, Option<(Sequent, String)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([(start.clone(), 0usize)]);
    while let Some((s, depth)) = queue.pop_front() {
        if depth >= DISPLAY_DEPTH {
            continue;
        }
        for (r, n) in display_moves(&s, calc) {
            if parent.contains_key(&n) {
                continue;
            }
            parent.insert(n.clone(), Some((s.clone(), r.name.clone())));
            if goal(&n) {
                let mut chain = Vec::new();
                let mut cur = n;
                while let Some(Some((prev, rule))) = parent.get(&cur) {
                    chain.push((rule.clone(), prev.clone(), cur.clone()));
                    cur = prev.clone();
                }
                chain.reverse();
                return Some(chain);
            }
            queue.push_back((n, depth + 1));
        }
    }
    None
}

/// A display derivation for one substructure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Displayed {
    /// Display postulates only, rooted at the input sequent; its single
    /// open leaf is a `Hyp` on `sequent`.
    pub proof: ProofTree,
    /// The sequent with the target alone on `side`.
    pub sequent: Sequent,
    pub side: Polarity,
    /// Bottom-up steps: (sequent, path of the target in it, rule to the
    /// next sequent).
    pub chain: Vec<(Sequent, Path, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DisplayError {
    #[error("invalid-path {0}")]
    InvalidPath(Path),
    #[error("not-displayable {0}")]
    NotDisplayable(Path),
}

const MARK: &str = "__display_target__";

fn mark_leaf() -> Structure {
    Structure::fm(Formula::atom(MARK))
}

fn find_mark(s: &Sequent) -> Option<Path> {
    s.formula_leaves().into_iter().find(|(_, f)| **f == Formula::atom(MARK)).map(|(p, _)| p)
}

/// Displays the substructure at `p`: the shortest chain of display
/// postulates from `seq` to a sequent with that substructure alone on one
/// side.  The target is replaced by a marker during search, which is sound
/// because display postulates only rearrange structure variables.
pub fn display_at(seq: &Sequent, p: &Path, calc: &Calculus) -> Result<Displayed, DisplayError> {
    let target = seq.get(p).ok_or_else(|| DisplayError::InvalidPath(p.clone()))?.clone();
    let marked = seq.replace_at(p, &mut |_| mark_leaf()).ok_or_else(|| DisplayError::InvalidPath(p.clone()))?;
    let alone = |s: &Sequent| s.ante == mark_leaf() || s.succ == mark_leaf();
    let chain = bfs(&marked, calc, alone).ok_or_else(|| DisplayError::NotDisplayable(p.clone()))?;
    let unmark = |s: &Sequent| -> (Sequent, Path) {
        let at = find_mark(s).expect("marker survives display moves");
        (s.replace_at(&at, &mut |_| target.clone()).expect("marker path is valid"), at)
    };
    let (top, _) = unmark(chain.last().map(|c| &c.2).unwrap_or(&marked));
    let side = if chain.last().map(|c| &c.2).unwrap_or(&marked).ante == mark_leaf() {
        Polarity::Precedent
    } else {
        Polarity::Succedent
    };
    let mut steps = Vec::new();
    for (rule, from, _) in &chain {
        let (s, at) = unmark(from);
        steps.push((s, at, rule.clone()));
    }
    let mut proof = ProofTree::leaf(HYP, top.clone());
    for (s, _, rule) in steps.iter().rev() {
        proof = ProofTree::new(rule.clone(), s.clone(), vec![proof]);
    }
    Ok(Displayed { proof, sequent: top, side, chain: steps })
}

/// Every sequent reachable from `seq` by display postulates, bounded by
/// `cap` sequents.  `None` when the bound is hit.
pub fn display_closure(seq: &Sequent, calc: &Calculus, cap: usize) -> Option<Vec<Sequent>> {
    let mut seen: HashMap<Sequent, ()> = HashMap::new();
    let mut order = vec![seq.clone()];
    seen.insert(seq.clone(), ());
    let mut i = 0;
    while i < order.len() {
        for (_, n) in display_moves(&order[i].clone(), calc) {
            if seen.insert(n.clone(), ()).is_none() {
                if order.len() >= cap {
                    return None;
                }
                order.push(n);
            }
        }
        i += 1;
    }
    Some(order)
}

/// Reports the sides on which the substructure at `p` occurs alone among
/// all display-equivalent sequents (exhaustive, bounded by `cap`).
pub fn display_sides(seq: &Sequent, p: &Path, calc: &Calculus, cap: usize) -> Option<Vec<Polarity>> {
    let marked = seq.replace_at(p, &mut |_| mark_leaf())?;
    let all = display_closure(&marked, calc, cap)?;
    let mut sides = Vec::new();
    if all.iter().any(|s| s.ante == mark_leaf()) {
        sides.push(Polarity::Precedent);
    }
    if all.iter().any(|s| s.succ == mark_leaf()) {
        sides.push(Polarity::Succedent);
    }
    Some(sides)
}

pub fn is_cut_free(proof: &ProofTree) -> bool {
    proof.count_rule("Cut") == 0
}

/// Every formula leaf of every sequent is a subformula of a formula in the
/// end sequent.
pub fn subformula_property(proof: &ProofTree) -> bool {
    let mut pool = std::collections::BTreeSet::new();
    for f in proof.conclusion.formulas() {
        pool.extend(f.subformulas());
    }
    proof.sequents().iter().all(|s| s.formulas().iter().all(|f| pool.contains(*f)))
}

// ---------------------------------------------------------------------------
// History trees
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LeafKind {
    /// Created as a parameter (weakening and the like).
    IntroducedParametric,
    PrincipalDisplayed,
    /// Principal but not alone on a side; only axioms may do this.
    PrincipalUndisplayed,
    /// Reaches an open `Hyp` leaf.
    Hypothesis,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryNode {
    /// Proof node (expanded tree) whose conclusion holds the occurrence.
    pub node: Vec<usize>,
    pub occ: Path,
    pub children: Vec<usize>,
    pub kind: Option<LeafKind>,
}

/// The congruence class of one formula occurrence traced upward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryTree {
    pub formula: Formula,
    pub polarity: Polarity,
    /// Index 0 is the root.
    pub nodes: Vec<HistoryNode>,
}

impl HistoryTree {
    pub fn leaves(&self) -> impl Iterator<Item = &HistoryNode> {
        self.nodes.iter().filter(|n| n.kind.is_some())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HistoryError {
    #[error("occurrence-not-formula {0}")]
    OccurrenceNotFormula(Path),
    #[error("proof not checked")]
    Unchecked,
    #[error("internal: occurrence {occ} at node {node} is not tracked")]
    Untracked { node: String, occ: Path },
}

/// History of the formula at `occ` in the root conclusion.
pub fn history_tree(report: &CheckReport, occ: &Path) -> Result<HistoryTree, HistoryError> {
    history_from(report, &[], occ)
}

/// History of the formula at `occ` in the conclusion of node `start`.
pub fn history_from(report: &CheckReport, start: &[usize], occ: &Path) -> Result<HistoryTree, HistoryError> {
    let proof = report.proof.as_ref().ok_or(HistoryError::Unchecked)?;
    let root = proof.at(start).ok_or(HistoryError::Unchecked)?;
    let formula = match root.conclusion.get(occ) {
        Some(Structure::Fm(f)) => f.clone(),
        _ => return Err(HistoryError::OccurrenceNotFormula(occ.clone())),
    };
    let polarity = root.conclusion.polarity_of(occ).map_err(|_| HistoryError::OccurrenceNotFormula(occ.clone()))?;
    let mut tree = HistoryTree {
        formula,
        polarity,
        nodes: vec![HistoryNode { node: start.to_vec(), occ: occ.clone(), children: Vec::new(), kind: None }],
    };
    let mut todo = vec![0usize];
    while let Some(ix) = todo.pop() {
        let (node, occ) = (tree.nodes[ix].node.clone(), tree.nodes[ix].occ.clone());
        let here = proof.at(&node).expect("history stays inside the proof");
        if here.rule == HYP {
            tree.nodes[ix].kind = Some(LeafKind::Hypothesis);
            continue;
        }
        let info = report.step(&node).ok_or(HistoryError::Unchecked)?;
        let l = &info.links;
        let mut ups = Vec::new();
        for (i, pp, cp) in &l.pairs {
            if occ.starts_with(cp) {
                ups.push((*i, pp.join(&occ.0[cp.0.len()..])));
            }
        }
        if !ups.is_empty() {
            for (i, p) in ups {
                let mut n = node.clone();
                n.push(i);
                tree.nodes.push(HistoryNode { node: n, occ: p, children: Vec::new(), kind: None });
                let c = tree.nodes.len() - 1;
                tree.nodes[ix].children.push(c);
                todo.push(c);
            }
        } else if l.principal.contains(&occ) {
            tree.nodes[ix].kind =
                Some(if occ.is_displayed() { LeafKind::PrincipalDisplayed } else { LeafKind::PrincipalUndisplayed });
        } else if l.introduced.iter().any(|p| occ.starts_with(p)) {
            tree.nodes[ix].kind = Some(LeafKind::IntroducedParametric);
        } else {
            return Err(HistoryError::Untracked { node: node_path_text(&node), occ });
        }
    }
    // Children in creation order per parent; keep leaves deterministic.
    for n in &mut tree.nodes {
        n.children.sort_unstable();
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::builtin_deak_prime;
    use crate::parser::{parse_proof_file, parse_sequent, Declarations};
    use crate::syntax::Step;

    fn decls() -> Declarations {
        Declarations::parse(
            r#"agent a;
               action alpha { states: k l; designated: k; pre: k = "q" l = "T"; rel a: k -> k, k -> l; }"#,
        )
        .unwrap()
    }

    fn calc() -> Calculus {
        builtin_deak_prime(&decls(), true)
    }

    fn seq(s: &str) -> Sequent {
        parse_sequent(s, &decls()).unwrap()
    }

    fn proof(s: &str) -> ProofTree {
        parse_proof_file(s, &decls()).unwrap()
    }

    #[test]
    fn display_example_checks() {
        let p = proof(
            r#"(SemiGt "'p' |- 'q' > 'r'"
                 (E_L "'q' ; 'p' |- 'r'"
                   (SemiGt "'p' ; 'q' |- 'r'" (Hyp "'q' |- 'p' > 'r'"))))"#,
        );
        let r = check(&p, &calc());
        assert!(r.is_ok(), "{r}");
        assert_eq!(r.nodes, 4);
        assert_eq!(r.hypotheses, vec![seq("'q' |- 'p' > 'r'")]);
    }

    #[test]
    fn wrong_identity_fails() {
        let r = check(&proof(r#"(Id "'p' |- 'q'")"#), &calc());
        assert_eq!(r.to_string(), "FAIL root no-matching-assignment\n");
        let r = check(&proof(r#"(Nope "'p' |- 'p'")"#), &calc());
        assert_eq!(r.failure.unwrap().1, CheckFailure::UnknownRule("Nope".into()));
    }

    #[test]
    fn cut_arity_error() {
        let r = check(&proof(r#"(Cut "'p' |- 'p'" (Id "'p' |- 'p'"))"#), &calc());
        assert!(matches!(r.failure, Some((_, CheckFailure::ArityMismatch { .. }))));
    }

    #[test]
    fn weakening_macro_expands() {
        let r = check(&proof(r#"(WL "'p' ; 'q' |- 'p'" (Id "'p' |- 'p'"))"#), &calc());
        assert!(r.is_closed(), "{r}");
        let t = r.proof.unwrap();
        assert_eq!(t.rule, "SemiGt");
        assert_eq!(t.children[0].rule, "W2_L");
        assert_eq!(t.size(), 3);
        let r = check(&proof(r#"(WR "'p' |- 'p' ; 'q'" (Id "'p' |- 'p'"))"#), &calc());
        assert!(r.is_closed(), "{r}");
    }

    #[test]
    fn disp_macro_finds_chain() {
        let r = check(&proof(r#"(Disp "'p' |- 'q' > 'r'" (Hyp "'q' ; 'p' |- 'r'"))"#), &calc());
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn phi_in_succedent_rejected() {
        let r = check(&proof(r#"(Hyp "'p' |- Phi[alpha]")"#), &calc());
        assert!(matches!(r.failure, Some((_, CheckFailure::PhiInSuccedent(_)))));
    }

    #[test]
    fn display_at_examples() {
        let c = calc();
        let s = seq("'p' |- 'q' > 'r'");
        let d = display_at(&s, &Path(vec![Step::Succ, Step::Left]), &c).unwrap();
        assert_eq!(d.side, Polarity::Precedent);
        assert_eq!(d.sequent.ante, crate::parser::parse_structure("'q'", &decls()).unwrap());

        let s = seq("'p' |- 'q'");
        let d = display_at(&s, &Path::ante(), &c).unwrap();
        assert!(d.chain.is_empty());
        assert_eq!(d.sequent, s);

        let s = seq("{alpha}'p' |- 'q'");
        let d = display_at(&s, &Path(vec![Step::Ante, Step::Only]), &c).unwrap();
        assert_eq!(d.sequent, seq("'p' |- {alpha}^'q'"));
        assert!(check(&d.proof, &c).is_ok());
    }

    #[test]
    fn contraction_bifurcates_history() {
        let r = check(&proof(r#"(C_L "'p' |- 'p'" (Hyp "'p' ; 'p' |- 'p'"))"#), &calc());
        let h = history_tree(&r, &Path::ante()).unwrap();
        assert_eq!(h.nodes[0].children.len(), 2);
        assert_eq!(h.leaves().count(), 2);
    }

    #[test]
    fn history_leaf_kinds() {
        let r = check(&proof(r#"(Id "'p' |- 'p'")"#), &calc());
        let h = history_tree(&r, &Path::ante()).unwrap();
        assert_eq!(h.nodes[0].kind, Some(LeafKind::PrincipalDisplayed));

        let r = check(&proof(r#"(W1_L "'q' |- 'p' < 'p'" (Id "'p' |- 'p'"))"#), &calc());
        let h = history_tree(&r, &Path::ante()).unwrap();
        assert_eq!(h.nodes[0].kind, Some(LeafKind::IntroducedParametric));

        let r = check(&proof(r#"(atom "{alpha}'p' |- {alpha}'p'")"#), &calc());
        let h = history_tree(&r, &Path(vec![Step::Ante, Step::Only])).unwrap();
        assert_eq!(h.nodes[0].kind, Some(LeafKind::PrincipalUndisplayed));
    }

    #[test]
    fn cut_free_and_subformula() {
        let p = proof(r#"(Cut "'p' |- 'p'" (Id "'p' |- 'p'") (Id "'p' |- 'p'"))"#);
        assert!(!is_cut_free(&p));
        assert!(check(&p, &calc()).is_closed());
        assert!(is_cut_free(&proof(r#"(Id "'p' |- 'p'")"#)));
        let r = check(&proof(r#"(WL "'p' ; 'q' |- 'p'" (Id "'p' |- 'p'"))"#), &calc());
        assert!(subformula_property(r.proof.as_ref().unwrap()));
    }

    #[test]
    fn recheck_is_idempotent() {
        let c = calc();
        let r = check(&proof(r#"(WL "'p' ; 'q' |- 'p'" (Id "'p' |- 'p'"))"#), &c);
        let again = check(r.proof.as_ref().unwrap(), &c);
        assert_eq!(r.steps, again.steps);
    }
}
