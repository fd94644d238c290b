//! Mechanical checks of the conditions for Belnap-style cut elimination
//! and of Wansing's criteria for operational rules.
//!
//! Conditions on congruence (C2–C4) and on principal occurrences (C5′,
//! segregation) are decided on generic instances of each schema, built
//! with the fixed declarations of [`super::generic::LINT_DECLS`].  The
//! subformula and separation checks work on the patterns themselves.

use std::fmt;

use super::generic::{generic_assignment, generic_inference, generic_step, lint_decls, lint_labels, GenericOpts};
use super::{builtin_reductions, cut_formula, find_template, reduce_principal_with, ReductionTemplate, TemplateKind};
use crate::calculus::{self, match_step, Calculus, FPat, OccKey, RuleSchema};
use crate::parser::Declarations;
use crate::proofs::{check, display_closure, ProofTree};
use crate::syntax::{BinOp, Modality, Path, Polarity, Sequent};

/// Congruence pairs `(premise, premise path, conclusion path)` of a
/// generic instance, as shown by `lint --list`.
pub fn generic_pairs(_c: &Calculus, r: &RuleSchema) -> Result<Vec<(usize, Path, Path)>, String> {
    let d = lint_decls();
    let asg = generic_assignment(r, &d, &GenericOpts::new("s_"));
    calculus::links(r, &asg, false, &d).map(|l| l.pairs).map_err(|e| e.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail {
        rule: String,
        witness: String,
        also: Vec<String>,
    },
    /// Passed because every case is covered by a validated reduction.
    Certified {
        templates: usize,
    },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        !matches!(self, Verdict::Fail { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LintLine {
    pub cond: &'static str,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LintReport {
    pub calculus: String,
    pub lines: Vec<LintLine>,
}

/// The conditions that make a calculus quasi proper, in report order.
pub const CONDITIONS: [&str; 10] = ["C1", "C2", "C3", "C4", "C5'", "C5''", "C6", "C7", "C8", "C8'"];
pub const WANSING: [&str; 6] =
    ["separation", "weak-symmetry", "symmetry", "weak-explicitness", "explicitness", "segregation"];

impl LintReport {
    pub fn get(&self, cond: &str) -> Option<&Verdict> {
        self.lines.iter().find(|l| l.cond == cond).map(|l| &l.verdict)
    }

    /// All of C1–C8′ pass.
    pub fn quasi_proper(&self) -> bool {
        CONDITIONS.iter().all(|c| self.get(c).is_some_and(Verdict::passed))
    }

    /// Rules named by a failing verdict (first witness and the others).
    pub fn failing_rules(&self, cond: &str) -> Vec<&str> {
        match self.get(cond) {
            Some(Verdict::Fail { rule, also, .. }) => {
                std::iter::once(rule.as_str()).chain(also.iter().map(String::as_str)).collect()
            }
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for LintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            match &l.verdict {
                Verdict::Pass => writeln!(f, "{} PASS - -", l.cond)?,
                Verdict::Certified { templates } => writeln!(f, "{} PASS - certified-by-table({templates})", l.cond)?,
                Verdict::Fail { rule, witness, also } => {
                    write!(f, "{} FAIL {rule} {witness}", l.cond)?;
                    if !also.is_empty() {
                        write!(f, " also={}", also.join(","))?;
                    }
                    writeln!(f)?;
                }
            }
        }
        Ok(())
    }
}

/// Collects per-rule failures into one verdict.
#[derive(Default)]
struct Failures(Vec<(String, String)>);

impl Failures {
    fn add(&mut self, rule: &str, witness: impl Into<String>) {
        if !self.0.iter().any(|(r, _)| r == rule) {
            self.0.push((rule.to_string(), witness.into()));
        }
    }

    fn verdict(self) -> Verdict {
        let mut it = self.0.into_iter();
        match it.next() {
            None => Verdict::Pass,
            Some((rule, witness)) => Verdict::Fail { rule, witness, also: it.map(|(r, _)| r).collect() },
        }
    }
}

/// Head symbol of a formula pattern, spelled as in the rule table's
/// `connective` field.
pub fn head(p: &FPat) -> Option<String> {
    let modal = |m: &Modality, v: &str| match m {
        Modality::Dia => format!("<{v}>"),
        Modality::Box => format!("[{v}]"),
        Modality::AdjDia => format!("<{v}>^"),
        Modality::AdjBox => format!("[{v}]^"),
    };
    Some(match p {
        FPat::Meta(_) | FPat::AtomMeta(_) | FPat::Pre(_) => return None,
        FPat::Top => "T".into(),
        FPat::Bot => "F".into(),
        FPat::One(_) => "1".into(),
        FPat::Bin(op, _, _) => match op {
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Imp => "->",
            BinOp::LImp => "<-",
            BinOp::CoImp => "*>",
            BinOp::LCoImp => "<*",
        }
        .into(),
        FPat::Agent(m, v, _) | FPat::Action(m, v, _) => modal(m, v),
    })
}

fn heads_in(p: &FPat, out: &mut Vec<String>) {
    out.extend(head(p));
    match p {
        FPat::Bin(_, a, b) => {
            heads_in(a, out);
            heads_in(b, out);
        }
        FPat::Agent(_, _, f) | FPat::Action(_, _, f) => heads_in(f, out),
        _ => {}
    }
}

/// Rules that introduce a connective, with the sides on which their
/// principal formulas sit in a generic instance.
struct Intro<'c> {
    rule: &'c RuleSchema,
    conn: &'c str,
    principal: Vec<(Path, Polarity)>,
}

fn intros<'c>(calc: &'c Calculus, d: &Declarations) -> Vec<Intro<'c>> {
    let (k, _) = lint_labels(d);
    let o = GenericOpts::new("s_").proxies(vec![(false, k)], Vec::new());
    calc.rules()
        .iter()
        .filter_map(|r| {
            let conn = r.connective.as_deref()?;
            let asg = generic_assignment(r, d, &o);
            let l = calculus::links(r, &asg, false, d).ok()?;
            let concl = &l.inference.as_ref()?.conclusion.sequent;
            let principal =
                l.principal.iter().map(|p| (p.clone(), concl.polarity_of(p).expect("valid path"))).collect();
            Some(Intro { rule: r, conn, principal })
        })
        .collect()
}

/// Runs every check.  Deterministic: a pure function of the rule set.
pub fn lint(calc: &Calculus) -> LintReport {
    let d = lint_decls();
    let mut c = calc.clone();
    c.decls = d.clone();
    let table = builtin_reductions();
    let intros = intros(&c, &d);
    let (c8, c8p) = check_c8(&c, &d, &intros, &table);
    let lines = vec![
        LintLine { cond: "C1", verdict: check_c1(&c) },
        LintLine { cond: "C2", verdict: check_congruence(&c, &d, Congruence::SameStructure) },
        LintLine { cond: "C3", verdict: check_congruence(&c, &d, Congruence::NonProliferation) },
        LintLine { cond: "C4", verdict: check_congruence(&c, &d, Congruence::Polarity) },
        LintLine { cond: "C5'", verdict: check_c5_display(&intros) },
        LintLine { cond: "C5''", verdict: check_c5_axioms(&c, &d) },
        LintLine { cond: "C6", verdict: check_restricted(&c, &d, Polarity::Succedent) },
        LintLine { cond: "C7", verdict: check_restricted(&c, &d, Polarity::Precedent) },
        LintLine { cond: "C8", verdict: c8 },
        LintLine { cond: "C8'", verdict: c8p },
        LintLine { cond: "separation", verdict: check_separation(&c) },
        LintLine { cond: "weak-symmetry", verdict: check_weak_symmetry(&intros) },
        LintLine { cond: "symmetry", verdict: check_symmetry(&intros) },
        LintLine { cond: "weak-explicitness", verdict: check_explicitness(&c, false) },
        LintLine { cond: "explicitness", verdict: check_explicitness(&c, true) },
        LintLine { cond: "segregation", verdict: check_segregation(&intros) },
    ];
    LintReport { calculus: calc.name.clone(), lines }
}

fn check_c1(c: &Calculus) -> Verdict {
    let mut f = Failures::default();
    for r in c.rules().iter().filter(|r| r.name != "Cut") {
        let concl: Vec<&FPat> = r.conclusion.sides().iter().flat_map(|s| s.formula_leaves()).collect();
        for p in &r.premises {
            for leaf in p.sides().iter().flat_map(|s| s.formula_leaves()) {
                if !concl.iter().any(|g| g.contains(leaf)) {
                    f.add(&r.name, leaf.to_string());
                }
            }
        }
    }
    f.verdict()
}

#[derive(Clone, Copy)]
enum Congruence {
    SameStructure,
    NonProliferation,
    Polarity,
}

fn check_congruence(c: &Calculus, d: &Declarations, which: Congruence) -> Verdict {
    let mut f = Failures::default();
    let o = GenericOpts::new("s_");
    for r in c.rules() {
        let asg = generic_assignment(r, d, &o);
        let l = match calculus::links(r, &asg, false, d) {
            Ok(l) => l,
            Err(e) => {
                f.add(&r.name, format!("no-generic-instance({e})"));
                continue;
            }
        };
        let inf = l.inference.as_ref().expect("links carry the inference");
        let concl = &inf.conclusion.sequent;
        for (i, pp, cp) in &l.pairs {
            let prem = &inf.premises[*i].sequent;
            match which {
                Congruence::SameStructure => {
                    if prem.get(pp) != concl.get(cp) {
                        f.add(&r.name, format!("{i}:{pp}~{cp}"));
                    }
                }
                Congruence::NonProliferation => {
                    let n = l.pairs.iter().filter(|(j, q, _)| j == i && q == pp).count();
                    if n > 1 {
                        f.add(&r.name, format!("{i}:{pp}x{n}"));
                    }
                }
                Congruence::Polarity => {
                    if prem.polarity_of(pp).ok() != concl.polarity_of(cp).ok() {
                        f.add(&r.name, format!("{i}:{pp}~{cp}"));
                    }
                }
            }
        }
    }
    f.verdict()
}

/// Principal formulas of non-axiom rules stand alone on their side.
fn check_c5_display(intros: &[Intro]) -> Verdict {
    let mut f = Failures::default();
    for i in intros.iter().filter(|i| !i.rule.is_axiom()) {
        for (p, _) in &i.principal {
            if !p.is_displayed() {
                f.add(&i.rule.name, p.to_string());
            }
        }
    }
    f.verdict()
}

/// Proxy strings tried for `Gamma` and `Delta` in axiom instances.
type ProxString = Vec<(bool, crate::syntax::ActionLabel)>;

fn proxy_choices(d: &Declarations) -> Vec<(ProxString, ProxString)> {
    let (k, l) = lint_labels(d);
    vec![
        (vec![], vec![]),
        (vec![(false, k.clone())], vec![]),
        (vec![], vec![(false, k.clone())]),
        (vec![(true, k.clone())], vec![(false, l.clone())]),
        (vec![(false, k.clone()), (true, l.clone())], vec![(true, k)]),
    ]
}

/// Display postulates map axiom instances to axiom instances.
fn check_c5_axioms(c: &Calculus, d: &Declarations) -> Verdict {
    let mut f = Failures::default();
    let axioms: Vec<&RuleSchema> = c.axioms().collect();
    for r in &axioms {
        for (g, dl) in proxy_choices(d) {
            let o = GenericOpts::new("s_").proxies(g, dl);
            let Ok((_, inf)) = generic_inference(r, d, &o) else { continue };
            let Some(all) = display_closure(&inf.conclusion.sequent, c, 4096) else {
                f.add(&r.name, "display-closure-unbounded");
                continue;
            };
            for s in all {
                if !axioms.iter().any(|a| match_step(a, &s, &[], d).is_ok()) {
                    f.add(&r.name, s.to_string());
                }
            }
        }
    }
    f.verdict()
}

/// A parameter that occurs in premise and conclusion but cannot take an
/// arbitrary structure: the precondition formula `Pre[alpha]`.
fn check_restricted(c: &Calculus, d: &Declarations, side: Polarity) -> Verdict {
    let mut f = Failures::default();
    let o = GenericOpts::new("s_");
    for r in c.rules() {
        let Ok((_, inf)) = generic_inference(r, d, &o) else { continue };
        let concl = &inf.conclusion;
        for occ in &concl.occs {
            let OccKey::Pre(v) = &occ.key else { continue };
            let in_premise = inf.premises.iter().any(|p| p.occs.iter().any(|q| q.key == occ.key));
            if in_premise && concl.sequent.polarity_of(&occ.path) == Ok(side) {
                f.add(&r.name, format!("Pre[{v}]"));
            }
        }
    }
    f.verdict()
}

/// Every (right-introduction, left-introduction) pair of a connective has
/// a reduction, and the reduction of a generic cut checks with residual
/// cuts on proper subformulas only.  Pairs of axioms are reported under C8′.
fn check_c8(c: &Calculus, d: &Declarations, intros: &[Intro], table: &[ReductionTemplate]) -> (Verdict, Verdict) {
    let (k, _) = lint_labels(d);
    let mut ops = Failures::default();
    let mut axs = Failures::default();
    let (mut n_ops, mut n_axs) = (0, 0);
    let sides = |i: &Intro, pol| i.principal.iter().any(|(p, q)| *q == pol && p.is_displayed());
    for r in intros.iter().filter(|i| sides(i, Polarity::Succedent)) {
        for l in intros.iter().filter(|i| i.conn == r.conn && sides(i, Polarity::Precedent)) {
            let both_axioms = r.rule.is_axiom() && l.rule.is_axiom();
            let (fails, count) = if both_axioms { (&mut axs, &mut n_axs) } else { (&mut ops, &mut n_ops) };
            let Some(t) = find_template(table, &r.rule.name, &l.rule.name) else {
                fails.add(&l.rule.name, format!("no-template({}/{})", r.rule.name, l.rule.name));
                continue;
            };
            if both_axioms != (t.kind == TemplateKind::AxiomClosure) {
                fails.add(&l.rule.name, format!("template-kind({}/{})", r.rule.name, l.rule.name));
                continue;
            }
            let left = GenericOpts::new("l_").proxies(vec![(false, k.clone())], vec![]);
            let right = GenericOpts::new("r_").proxies(vec![], vec![(true, k.clone())]);
            match validate_template(c, d, r.rule, l.rule, &left, &right, table) {
                Ok(()) => *count += 1,
                Err(w) => fails.add(&l.rule.name, format!("{}/{}:{w}", r.rule.name, l.rule.name)),
            }
        }
    }
    let wrap = |f: Failures, n: usize| match f.verdict() {
        Verdict::Pass => Verdict::Certified { templates: n },
        v => v,
    };
    (wrap(ops, n_ops), wrap(axs, n_axs))
}

fn validate_template(
    c: &Calculus,
    d: &Declarations,
    right_intro: &RuleSchema,
    left_intro: &RuleSchema,
    lo: &GenericOpts,
    ro: &GenericOpts,
    table: &[ReductionTemplate],
) -> Result<(), String> {
    let a = generic_step(right_intro, d, lo)?;
    let b = generic_step(left_intro, d, ro)?;
    let Some(f) = a.conclusion.succ.as_formula() else { return Err("principal-not-displayed".into()) };
    if a.conclusion.succ != b.conclusion.ante {
        return Err("interface-mismatch".into());
    }
    let f = f.clone();
    let cut = ProofTree::new("Cut", Sequent::new(a.conclusion.ante.clone(), b.conclusion.succ.clone()), vec![a, b]);
    let out = reduce_principal_with(&cut, c, table).map_err(|e| e.to_string())?;
    let rep = check(&out, c);
    if !rep.is_ok() || out.conclusion != cut.conclusion {
        return Err("reduct-does-not-check".into());
    }
    for p in out.node_paths() {
        let n = out.at(&p).expect("own path");
        if n.rule == "Cut" {
            let g = cut_formula(n).ok_or("residual-cut-on-structure")?;
            if g == &f || !f.subformulas().contains(g) {
                return Err(format!("residual-cut-on-{g}"));
            }
        }
    }
    Ok(())
}

fn check_separation(c: &Calculus) -> Verdict {
    let mut f = Failures::default();
    for r in c.rules() {
        let Some(conn) = r.connective.as_deref() else { continue };
        for p in r.premises.iter().chain(std::iter::once(&r.conclusion)) {
            for leaf in p.sides().iter().flat_map(|s| s.formula_leaves()) {
                let ok = leaf.is_var() || (head(leaf).as_deref() == Some(conn) && leaf.is_single_connective());
                if !ok {
                    f.add(&r.name, leaf.to_string());
                }
            }
        }
    }
    f.verdict()
}

/// Identity axioms introduce an atom on both sides by design and are left
/// out of the symmetry checks.
fn is_identity(i: &Intro) -> bool {
    i.conn == "atom"
}

fn check_weak_symmetry(intros: &[Intro]) -> Verdict {
    let mut f = Failures::default();
    for i in intros.iter().filter(|i| !is_identity(i)) {
        let pre = i.principal.iter().any(|(_, p)| *p == Polarity::Precedent);
        let suc = i.principal.iter().any(|(_, p)| *p == Polarity::Succedent);
        if pre == suc {
            f.add(&i.rule.name, if pre { "both-sides" } else { "no-principal" });
        }
    }
    f.verdict()
}

fn check_symmetry(intros: &[Intro]) -> Verdict {
    let mut f = Failures::default();
    let mut conns: Vec<&str> = intros.iter().filter(|i| !is_identity(i)).map(|i| i.conn).collect();
    conns.dedup();
    for conn in conns {
        let on = |pol| intros.iter().any(|i| i.conn == conn && i.principal.iter().any(|(_, p)| *p == pol));
        if !on(Polarity::Precedent) {
            f.add(conn, "no-left-introduction");
        } else if !on(Polarity::Succedent) {
            f.add(conn, "no-right-introduction");
        }
    }
    f.verdict()
}

fn check_explicitness(c: &Calculus, strict: bool) -> Verdict {
    let mut f = Failures::default();
    for r in c.rules().iter().filter(|r| r.connective.as_deref().is_some_and(|k| k != "atom")) {
        let conn = r.connective.as_deref().expect("filtered");
        let count = |pats: &mut dyn Iterator<Item = &FPat>| {
            let mut hs = Vec::new();
            for p in pats {
                heads_in(p, &mut hs);
            }
            hs.iter().filter(|h| h.as_str() == conn).count()
        };
        let in_prem = count(&mut r.premises.iter().flat_map(|p| p.sides()).flat_map(|s| s.formula_leaves()));
        if in_prem > 0 {
            f.add(&r.name, "in-premise");
            continue;
        }
        if strict {
            let in_concl = count(&mut r.conclusion.sides().into_iter().flat_map(|s| s.formula_leaves()));
            if in_concl != 1 {
                f.add(&r.name, format!("{in_concl}-in-conclusion"));
            }
        }
    }
    f.verdict()
}

/// Principal formulas of every introduction rule, axioms included, stand
/// alone on their side.
fn check_segregation(intros: &[Intro]) -> Verdict {
    let mut f = Failures::default();
    for i in intros {
        for (p, _) in &i.principal {
            if !p.is_displayed() {
                f.add(&i.rule.name, p.to_string());
            }
        }
    }
    f.verdict()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{builtin_deak_legacy, builtin_deak_prime};

    #[test]
    fn deak_prime_is_quasi_proper() {
        let d = lint_decls();
        let r = lint(&builtin_deak_prime(&d, true));
        assert!(r.quasi_proper(), "{r}");
        assert_eq!(r.failing_rules("segregation"), vec!["atom"], "{r}");
        for w in ["separation", "weak-symmetry", "symmetry", "weak-explicitness", "explicitness"] {
            assert!(r.get(w).unwrap().passed(), "{w}: {r}");
        }
    }

    #[test]
    fn intuitionistic_fragment_is_quasi_proper_too() {
        let r = lint(&builtin_deak_prime(&lint_decls(), false));
        assert!(r.quasi_proper(), "{r}");
    }

    #[test]
    fn legacy_diagnosis() {
        let r = lint(&builtin_deak_legacy(&lint_decls(), true));
        assert!(!r.quasi_proper());
        assert_eq!(r.failing_rules("C1"), vec!["reduce_L", "reduce_R"], "{r}");
        assert!(r.failing_rules("C7").contains(&"swap-in_L"), "{r}");
        assert!(r.failing_rules("separation").iter().all(|n| n.starts_with("reverse")), "{r}");
    }

    #[test]
    fn report_format_is_one_line_per_condition() {
        let r = lint(&builtin_deak_prime(&lint_decls(), true));
        let text = r.to_string();
        assert_eq!(text.lines().count(), CONDITIONS.len() + WANSING.len());
        assert!(text.lines().any(|l| l.starts_with("segregation FAIL atom ")), "{text}");
        assert_eq!(text, lint(&builtin_deak_prime(&lint_decls(), true)).to_string());
    }
}
