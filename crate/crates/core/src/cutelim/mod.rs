//! Cut elimination for D'.EAK and the condition linter.
//!
//! The engine follows the two stages of Belnap's argument.  A cut whose
//! cut formula is parametric on one side is pushed up along the history
//! tree of that occurrence (`parametric_step`); a cut whose formula is
//! principal on both sides is replaced by cuts on immediate subformulas
//! (`reduce_principal`).  `eliminate` drives both on the leftmost-topmost
//! cut until none is left.
//!
//! Reductions are not stored as proof fragments.  Each entry of the table
//! names the two introduction rules and their auxiliary variables; the
//! fragment is built by cutting the premises of both rules pairwise on the
//! auxiliary formulas, with display moves in between, and closing with a
//! display chain to the original end sequent.

pub mod generic;
pub mod lint;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::calculus::{match_step, Binding, Calculus, OccKey};
use crate::proofs::{check, display_at, history_from, CheckReport, LeafKind, ProofTree, HYP};
use crate::syntax::{Formula, Path, Polarity, Sequent, Structure};

/// Default node budget for [`eliminate`].
pub const DEFAULT_FUEL: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TemplateKind {
    /// Cut both rules' premises on the auxiliary formulas.
    Operational,
    /// Both premises are axioms; the conclusion is again an axiom.
    AxiomClosure,
}

/// One principal reduction: `left` is the rule ending the left premise of
/// the cut (it introduces the cut formula on the right of the turnstile),
/// `right` the rule ending the right premise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTemplate {
    pub connective: String,
    pub left: String,
    pub right: String,
    /// Auxiliary formula variables, in the order their cuts are made.
    pub aux: Vec<String>,
    pub kind: TemplateKind,
}

const OPERATIONAL: &[(&str, &str, &str, &[&str])] = &[
    ("T", "Top_R", "Top_L", &[]),
    ("F", "Bot_R", "Bot_L", &[]),
    ("&", "And_R", "And_L", &["A", "B"]),
    ("|", "Or_R", "Or_L", &["A", "B"]),
    ("->", "Imp_R", "Imp_L", &["A", "B"]),
    ("<-", "LImp_R", "LImp_L", &["A", "B"]),
    ("*>", "CoImp_R", "CoImp_L", &["A", "B"]),
    ("<*", "LCoImp_R", "LCoImp_L", &["A", "B"]),
    ("<a>", "Dia_R", "Dia_L", &["A"]),
    ("[a]", "Box_R", "Box_L", &["A"]),
    ("<a>^", "Dia^_R", "Dia^_L", &["A"]),
    ("[a]^", "Box^_R", "Box^_L", &["A"]),
    ("<alpha>", "DDia_R", "DDia_L", &["A"]),
    ("[alpha]", "DBox_R", "DBox_L", &["A"]),
    ("<alpha>^", "DDia^_R", "DDia^_L", &["A"]),
    ("[alpha]^", "DBox^_R", "DBox^_L", &["A"]),
    ("1", "One_R", "One_L", &[]),
];

const AXIOM_PAIRS: &[(&str, &str)] = &[("Id", "Id"), ("Id", "atom"), ("atom", "Id"), ("atom", "atom")];

pub fn builtin_reductions() -> Vec<ReductionTemplate> {
    let mut out: Vec<ReductionTemplate> = OPERATIONAL
        .iter()
        .map(|(c, l, r, aux)| ReductionTemplate {
            connective: c.to_string(),
            left: l.to_string(),
            right: r.to_string(),
            aux: aux.iter().map(|s| s.to_string()).collect(),
            kind: TemplateKind::Operational,
        })
        .collect();
    out.extend(AXIOM_PAIRS.iter().map(|(l, r)| ReductionTemplate {
        connective: "atom".into(),
        left: l.to_string(),
        right: r.to_string(),
        aux: Vec::new(),
        kind: TemplateKind::AxiomClosure,
    }));
    out
}

pub fn find_template<'t>(table: &'t [ReductionTemplate], left: &str, right: &str) -> Option<&'t ReductionTemplate> {
    table.iter().find(|t| t.left == left && t.right == right)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ElimError {
    #[error("input does not check: {0}")]
    NotChecked(String),
    #[error("not a cut node")]
    NotACut,
    #[error("open hypothesis {0} blocks the cut")]
    OpenHypothesis(Box<Sequent>),
    #[error("no-template {left}/{right}")]
    NoTemplate { left: String, right: String },
    #[error("cut formula is not principal on both sides")]
    NotPrincipal,
    #[error("fuel-exhausted after {} generated nodes", .stats.generated_nodes)]
    FuelExhausted { partial: Box<ProofTree>, stats: ElimStats },
    #[error("internal-invariant-violation: {0}")]
    Internal(String),
}

/// Counters reported by [`eliminate`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ElimStats {
    pub cuts_in: usize,
    pub shortcuts: usize,
    pub axiom_closures: usize,
    pub principal_reductions: usize,
    pub parametric_steps: usize,
    pub max_cut_complexity: usize,
    pub generated_nodes: usize,
    pub output_size: usize,
}

impl fmt::Display for ElimStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cuts-in={} shortcuts={} axiom-closures={} principal={} parametric={} max-complexity={} generated={} size={}",
            self.cuts_in,
            self.shortcuts,
            self.axiom_closures,
            self.principal_reductions,
            self.parametric_steps,
            self.max_cut_complexity,
            self.generated_nodes,
            self.output_size
        )
    }
}

fn cut_parts(cut: &ProofTree) -> Result<(&ProofTree, &ProofTree), ElimError> {
    match (cut.rule.as_str(), cut.children.as_slice()) {
        ("Cut", [l, r]) => Ok((l, r)),
        _ => Err(ElimError::NotACut),
    }
}

fn checked(t: &ProofTree, calc: &Calculus) -> Result<CheckReport, ElimError> {
    let r = check(t, calc);
    if r.is_ok() {
        Ok(r)
    } else {
        Err(ElimError::NotChecked(r.to_string().trim_end().to_string()))
    }
}

/// Re-checks a generated tree, expanding any macro nodes in it.
fn expand(t: &ProofTree, calc: &Calculus) -> Result<ProofTree, ElimError> {
    let r = check(t, calc);
    match r.proof {
        Some(p) if r.failure.is_none() => Ok(p),
        _ => Err(ElimError::Internal(format!("generated proof does not check: {}", r.to_string().trim_end()))),
    }
}

fn is_principal(report: &CheckReport, node: &[usize], occ: &Path) -> bool {
    report.step(node).is_some_and(|s| s.links.principal.contains(occ))
}

fn axiom_leaf(s: &Sequent, calc: &Calculus) -> Option<ProofTree> {
    calc.axioms()
        .find(|r| match_step(r, s, &[], &calc.decls).is_ok())
        .map(|r| ProofTree::leaf(r.name.clone(), s.clone()))
}

/// The cut formula, read off the left premise's succedent.
pub fn cut_formula(cut: &ProofTree) -> Option<&Formula> {
    let (l, _) = cut_parts(cut).ok()?;
    l.conclusion.succ.as_formula()
}

// ---------------------------------------------------------------------------
// Principal stage
// ---------------------------------------------------------------------------

fn marker(key: &str) -> Formula {
    Formula::atom(format!("#aux-{key}"))
}

/// A derivation whose conclusion carries markers in place of the auxiliary
/// formulas not yet cut away.
struct Piece {
    proof: ProofTree,
    marked: Sequent,
}

struct Unmark<'a>(&'a [(Formula, Formula)]);

impl Unmark<'_> {
    fn seq(&self, s: &Sequent) -> Sequent {
        let mut out = s.clone();
        for (path, f) in s.formula_leaves() {
            if let Some((_, real)) = self.0.iter().find(|(m, _)| m == f) {
                out = out.replace_at(&path, &mut |_| Structure::fm(real.clone())).expect("leaf path is valid");
            }
        }
        out
    }
}

fn find_leaf(s: &Sequent, f: &Formula, pol: Polarity) -> Option<Path> {
    s.formula_leaves().into_iter().find(|(p, g)| *g == f && s.polarity_of(p) == Ok(pol)).map(|(p, _)| p)
}

/// Derives the sequent in which the marked occurrence at `path` stands
/// alone, from the piece's own conclusion.
fn display_piece(piece: Piece, path: &Path, calc: &Calculus, um: &Unmark) -> Result<Piece, ElimError> {
    let shown = display_at(&piece.marked, path, calc).map_err(|e| ElimError::Internal(e.to_string()))?;
    let mut seqs: Vec<&Sequent> = shown.chain.iter().map(|(s, _, _)| s).collect();
    seqs.push(&shown.sequent);
    let mut t = piece.proof;
    for (k, (_, _, rule)) in shown.chain.iter().enumerate() {
        t = ProofTree::new(rule.clone(), um.seq(seqs[k + 1]), vec![t]);
    }
    Ok(Piece { proof: t, marked: shown.sequent })
}

fn premise_pieces(
    node: &ProofTree,
    report: &CheckReport,
    at: &[usize],
    aux: &[String],
) -> Result<Vec<Piece>, ElimError> {
    let info = report.step(at).ok_or_else(|| ElimError::Internal("unchecked premise".into()))?;
    let inf = info.links.inference.as_ref().ok_or_else(|| ElimError::Internal("missing inference".into()))?;
    let mut out = Vec::new();
    for (i, inst) in inf.premises.iter().enumerate() {
        let mut marked = inst.sequent.clone();
        for o in &inst.occs {
            if let OccKey::FMeta(k) = &o.key {
                if aux.contains(k) {
                    marked = marked
                        .replace_at(&o.path, &mut |_| Structure::fm(marker(k)))
                        .ok_or_else(|| ElimError::Internal("bad occurrence path".into()))?;
                }
            }
        }
        out.push(Piece { proof: node.children[i].clone(), marked });
    }
    Ok(out)
}

/// Replaces a cut whose formula is principal on both sides.  Tries, in
/// order: a premise equal to the conclusion, closure of two axioms, and the
/// reduction template for the two introduction rules.  The result is an
/// expanded, checked proof of the same sequent.
pub fn reduce_principal(cut: &ProofTree, calc: &Calculus) -> Result<ProofTree, ElimError> {
    reduce_principal_with(cut, calc, &builtin_reductions())
}

pub fn reduce_principal_with(
    cut: &ProofTree,
    calc: &Calculus,
    table: &[ReductionTemplate],
) -> Result<ProofTree, ElimError> {
    let (l, r) = cut_parts(cut)?;
    if let Some(t) = shortcut(cut) {
        return Ok(t.clone());
    }
    let report = checked(cut, calc)?;
    if !is_principal(&report, &[0], &Path::succ()) || !is_principal(&report, &[1], &Path::ante()) {
        return Err(ElimError::NotPrincipal);
    }
    let left_axiom = l.children.is_empty();
    let right_axiom = r.children.is_empty();
    if left_axiom && right_axiom {
        if let Some(leaf) = axiom_leaf(&cut.conclusion, calc) {
            return Ok(leaf);
        }
    }
    let tpl = find_template(table, &l.rule, &r.rule)
        .ok_or_else(|| ElimError::NoTemplate { left: l.rule.clone(), right: r.rule.clone() })?;
    if tpl.kind == TemplateKind::AxiomClosure {
        return Err(ElimError::Internal(format!("{}/{} conclusion is not an axiom", l.rule, r.rule)));
    }
    let bound = |at: &[usize], k: &str| -> Result<Formula, ElimError> {
        match report.step(at).and_then(|s| s.assignment.get(k)) {
            Some(Binding::Formula(f)) => Ok(f.clone()),
            _ => Err(ElimError::Internal(format!("auxiliary variable {k} unbound"))),
        }
    };
    let mut names = Vec::new();
    for k in &tpl.aux {
        let f = bound(&[0], k)?;
        if f != bound(&[1], k)? {
            return Err(ElimError::Internal(format!("auxiliary variable {k} differs between the premises")));
        }
        names.push((marker(k), f));
    }
    let um = Unmark(&names);
    let mut pieces = premise_pieces(l, &report, &[0], &tpl.aux)?;
    pieces.extend(premise_pieces(r, &report, &[1], &tpl.aux)?);
    for (m, _) in &names {
        let locate = |pieces: &[Piece], pol| {
            pieces.iter().enumerate().find_map(|(i, p)| find_leaf(&p.marked, m, pol).map(|path| (i, path)))
        };
        let (il, pl) = locate(&pieces, Polarity::Succedent)
            .ok_or_else(|| ElimError::Internal("left auxiliary occurrence lost".into()))?;
        let (ir, pr) = locate(&pieces, Polarity::Precedent)
            .ok_or_else(|| ElimError::Internal("right auxiliary occurrence lost".into()))?;
        if il == ir {
            return Err(ElimError::Internal("auxiliary occurrences in one derivation".into()));
        }
        let (a, b) = if il < ir {
            let b = pieces.remove(ir);
            (pieces.remove(il), b)
        } else {
            let a = pieces.remove(il);
            (a, pieces.remove(ir))
        };
        let a = display_piece(a, &pl, calc, &um)?;
        let b = display_piece(b, &pr, calc, &um)?;
        let marked = Sequent::new(a.marked.ante.clone(), b.marked.succ.clone());
        let proof = ProofTree::new("Cut", um.seq(&marked), vec![a.proof, b.proof]);
        pieces.push(Piece { proof, marked });
    }
    if pieces.len() != 1 {
        return Err(ElimError::Internal("reduction left several derivations".into()));
    }
    let last = pieces.pop().expect("one piece");
    let t = if last.proof.conclusion == cut.conclusion {
        last.proof
    } else {
        ProofTree::new("Disp", cut.conclusion.clone(), vec![last.proof])
    };
    expand(&t, calc)
}

fn shortcut(cut: &ProofTree) -> Option<&ProofTree> {
    let (l, r) = cut_parts(cut).ok()?;
    [l, r].into_iter().find(|p| p.conclusion == cut.conclusion)
}

// ---------------------------------------------------------------------------
// Parametric stage
// ---------------------------------------------------------------------------

/// Which premise's cut-formula occurrence is followed upward.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Pushes a cut up along the history of the cut formula in one premise.
/// With `Side::Right` the formula `A` in `A |- Y` is traced and the left
/// premise's antecedent `X` substituted for it; `Side::Left` is the mirror.
pub fn parametric_step(cut: &ProofTree, side: Side, calc: &Calculus) -> Result<ProofTree, ElimError> {
    let (l, r) = cut_parts(cut)?;
    let report = checked(cut, calc)?;
    let (node, occ, repl, other) = match side {
        Side::Right => (vec![1usize], Path::ante(), l.conclusion.ante.clone(), l),
        Side::Left => (vec![0usize], Path::succ(), r.conclusion.succ.clone(), r),
    };
    let hist = history_from(&report, &node, &occ).map_err(|e| ElimError::Internal(e.to_string()))?;
    let mut at: BTreeMap<Vec<usize>, (BTreeSet<Path>, Option<LeafKind>)> = BTreeMap::new();
    for h in &hist.nodes {
        let e = at.entry(h.node.clone()).or_default();
        e.0.insert(h.occ.clone());
        if let Some(k) = h.kind {
            if k != LeafKind::IntroducedParametric {
                if e.1.is_some() {
                    return Err(ElimError::Internal("two principal history leaves at one node".into()));
                }
                e.1 = Some(k);
            }
        }
    }
    let ctx = Rebuild { at: &at, repl: &repl, other, side, calc };
    let start = report.proof.as_ref().and_then(|p| p.at(&node)).expect("checked cut has premises");
    let rebuilt = ctx.node(start, &node)?;
    let t = if rebuilt.conclusion == cut.conclusion {
        rebuilt
    } else {
        return Err(ElimError::Internal("parametric step changed the end sequent".into()));
    };
    expand(&t, calc)
}

struct Rebuild<'a> {
    at: &'a BTreeMap<Vec<usize>, (BTreeSet<Path>, Option<LeafKind>)>,
    repl: &'a Structure,
    other: &'a ProofTree,
    side: Side,
    calc: &'a Calculus,
}

impl Rebuild<'_> {
    fn subst(&self, s: &Sequent, occs: &BTreeSet<Path>) -> Result<Sequent, ElimError> {
        s.substitute(occs, self.repl).map_err(|e| ElimError::Internal(e.to_string()))
    }

    fn cut_with(&self, t: ProofTree, concl: Sequent) -> ProofTree {
        match self.side {
            Side::Right => ProofTree::new("Cut", concl, vec![self.other.clone(), t]),
            Side::Left => ProofTree::new("Cut", concl, vec![t, self.other.clone()]),
        }
    }

    fn node(&self, t: &ProofTree, here: &[usize]) -> Result<ProofTree, ElimError> {
        let Some((occs, kind)) = self.at.get(here) else {
            return Ok(t.clone());
        };
        let concl = self.subst(&t.conclusion, occs)?;
        match kind {
            None => {
                let mut kids = Vec::with_capacity(t.children.len());
                for (i, c) in t.children.iter().enumerate() {
                    let mut p = here.to_vec();
                    p.push(i);
                    kids.push(self.node(c, &p)?);
                }
                Ok(ProofTree::new(t.rule.clone(), concl, kids))
            }
            Some(LeafKind::Hypothesis) => Err(ElimError::OpenHypothesis(Box::new(t.conclusion.clone()))),
            Some(_) if occs.len() > 1 => {
                Err(ElimError::Internal("principal history leaf shares its node with other occurrences".into()))
            }
            Some(LeafKind::PrincipalDisplayed) => Ok(self.cut_with(t.clone(), concl)),
            Some(LeafKind::PrincipalUndisplayed) => {
                // An axiom with the formula inside a context: use a
                // display-equivalent axiom with the formula alone, cut with
                // it, and display back.
                let q = occs.iter().next().expect("one occurrence");
                let shown = display_at(&t.conclusion, q, self.calc).map_err(|e| ElimError::Internal(e.to_string()))?;
                let ax = axiom_leaf(&shown.sequent, self.calc)
                    .ok_or_else(|| ElimError::Internal(format!("{} is not an axiom", shown.sequent)))?;
                let top_occ = match self.side {
                    Side::Right => Path::ante(),
                    Side::Left => Path::succ(),
                };
                let top = self.subst(&shown.sequent, &BTreeSet::from([top_occ]))?;
                let mut out = self.cut_with(ax, top);
                for (s, p, rule) in shown.chain.iter().rev() {
                    out = ProofTree::new(rule.clone(), self.subst(s, &BTreeSet::from([p.clone()]))?, vec![out]);
                }
                Ok(out)
            }
            Some(LeafKind::IntroducedParametric) => unreachable!("not recorded as a leaf kind"),
        }
    }
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

/// Pre-order path of the leftmost cut whose premises are cut-free.
pub fn topmost_cut(t: &ProofTree) -> Option<Vec<usize>> {
    fn go(t: &ProofTree, here: &mut Vec<usize>) -> Option<Vec<usize>> {
        for (i, c) in t.children.iter().enumerate() {
            here.push(i);
            let r = go(c, here);
            here.pop();
            if r.is_some() {
                return r;
            }
        }
        (t.rule == "Cut").then(|| here.clone())
    }
    go(t, &mut Vec::new())
}

/// One elimination move on a cut whose premises are cut-free.
pub fn step(cut: &ProofTree, calc: &Calculus, stats: &mut ElimStats) -> Result<ProofTree, ElimError> {
    if let Some(f) = cut_formula(cut) {
        stats.max_cut_complexity = stats.max_cut_complexity.max(f.complexity());
    }
    if let Some(t) = shortcut(cut) {
        stats.shortcuts += 1;
        return Ok(t.clone());
    }
    let (l, r) = cut_parts(cut)?;
    for p in [l, r] {
        if p.rule == HYP {
            return Err(ElimError::OpenHypothesis(Box::new(p.conclusion.clone())));
        }
    }
    let report = checked(cut, calc)?;
    if !is_principal(&report, &[1], &Path::ante()) {
        stats.parametric_steps += 1;
        return parametric_step(cut, Side::Right, calc);
    }
    if !is_principal(&report, &[0], &Path::succ()) {
        stats.parametric_steps += 1;
        return parametric_step(cut, Side::Left, calc);
    }
    if l.children.is_empty() && r.children.is_empty() {
        stats.axiom_closures += 1;
    } else {
        stats.principal_reductions += 1;
    }
    reduce_principal(cut, calc)
}

/// Removes every cut from a checked proof.  `fuel` bounds the number of
/// proof nodes generated along the way.
pub fn eliminate(proof: &ProofTree, calc: &Calculus, fuel: usize) -> Result<(ProofTree, ElimStats), ElimError> {
    let report = checked(proof, calc)?;
    let mut tree = report.proof.expect("checked");
    let mut stats = ElimStats { cuts_in: tree.count_rule("Cut"), ..ElimStats::default() };
    while let Some(path) = topmost_cut(&tree) {
        let cut = tree.at(&path).expect("path from topmost_cut").clone();
        let new = step(&cut, calc, &mut stats)?;
        stats.generated_nodes += new.size();
        *tree.at_mut(&path).expect("path from topmost_cut") = new;
        if stats.generated_nodes > fuel {
            stats.output_size = tree.size();
            return Err(ElimError::FuelExhausted { partial: Box::new(tree), stats });
        }
    }
    stats.output_size = tree.size();
    Ok((tree, stats))
}
