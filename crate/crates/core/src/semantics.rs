//! Finite Kripke models, product update and a brute-force validity oracle.
//!
//! Truth is computed as whole extensions (one bit per world), so a dynamic
//! modality costs one product update per evaluation.  Residual connectives
//! get their classical Boolean reading; adjoint modalities are refused.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::parser::Declarations;
use crate::syntax::{ActionLabel, ActionStructure, Agent, BinOp, Formula, FormulaView, Modality};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    pub worlds: Vec<String>,
    pub rels: BTreeMap<Agent, BTreeSet<(usize, usize)>>,
    pub val: BTreeMap<String, BTreeSet<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unsupported-connective {0}")]
    UnsupportedConnective(String),
    #[error("undeclared action {0}")]
    UndeclaredAction(String),
    #[error("model too large: {0} worlds")]
    TooManyWorlds(usize),
    #[error("no world named {0}")]
    UnknownWorld(String),
}

impl KripkeModel {
    pub fn new(
        worlds: Vec<String>,
        rels: BTreeMap<Agent, BTreeSet<(usize, usize)>>,
        val: BTreeMap<String, BTreeSet<usize>>,
    ) -> Self {
        KripkeModel { worlds, rels, val }
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn world(&self, name: &str) -> Result<usize, SemanticsError> {
        self.worlds.iter().position(|w| w == name).ok_or_else(|| SemanticsError::UnknownWorld(name.into()))
    }

    /// Text in the model block format accepted by `parse_model`.
    pub fn render(&self) -> String {
        let mut out = format!("model {{ worlds: {};", self.worlds.join(" "));
        for (p, ws) in &self.val {
            if !ws.is_empty() {
                let names: Vec<&str> = ws.iter().map(|&w| self.worlds[w].as_str()).collect();
                out.push_str(&format!(" val {p}: {};", names.join(" ")));
            }
        }
        for (a, r) in &self.rels {
            if !r.is_empty() {
                let pairs: Vec<String> =
                    r.iter().map(|&(x, y)| format!("{}->{}", self.worlds[x], self.worlds[y])).collect();
                out.push_str(&format!(" rel {}: {};", a.0, pairs.join(", ")));
            }
        }
        out.push_str(" }");
        out
    }
}

/// `M^α` with, for each new world, the old world and action state it pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Updated {
    pub model: KripkeModel,
    pub origin: Vec<(usize, String)>,
}

impl Updated {
    pub fn index_of(&self, w: usize, state: &str) -> Option<usize> {
        self.origin.iter().position(|(x, s)| *x == w && s == state)
    }
}

/// Product update: worlds `(w, j)` with `w ⊨ Pre(j)`, ordered by `w` then
/// by action state.
pub fn update(m: &KripkeModel, alpha: &ActionStructure, d: &Declarations) -> Result<Updated, SemanticsError> {
    let mut pre_ext = BTreeMap::new();
    for s in &alpha.states {
        let f = alpha.pre_of(s).ok_or_else(|| SemanticsError::UndeclaredAction(alpha.label(s).to_string()))?;
        pre_ext.insert(s.clone(), extension(m, f, d)?);
    }
    let pre_ext = &pre_ext;
    let origin: Vec<(usize, String)> = (0..m.len())
        .flat_map(|w| alpha.states.iter().filter(move |s| pre_ext[*s][w]).map(move |s| (w, s.clone())))
        .collect();
    let worlds = origin.iter().map(|(w, s)| format!("({},{})", m.worlds[*w], s)).collect();
    let mut rels: BTreeMap<Agent, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for (agent, r) in &m.rels {
        let act = alpha.rels.get(agent);
        let mut nr = BTreeSet::new();
        for (x, (w, i)) in origin.iter().enumerate() {
            for (y, (u, j)) in origin.iter().enumerate() {
                if r.contains(&(*w, *u)) && act.is_some_and(|a| a.contains(&(i.clone(), j.clone()))) {
                    nr.insert((x, y));
                }
            }
        }
        rels.insert(agent.clone(), nr);
    }
    let val = m
        .val
        .iter()
        .map(|(p, ws)| {
            let nw = origin.iter().enumerate().filter(|(_, (w, _))| ws.contains(w)).map(|(x, _)| x).collect();
            (p.clone(), nw)
        })
        .collect();
    Ok(Updated { model: KripkeModel::new(worlds, rels, val), origin })
}

/// The set of worlds satisfying `f`, one flag per world.
pub fn extension(m: &KripkeModel, f: &Formula, d: &Declarations) -> Result<Vec<bool>, SemanticsError> {
    let frame = Frame::of(m)?;
    let ext = eval(&frame, f, d)?;
    Ok((0..m.len()).map(|w| ext >> w & 1 == 1).collect())
}

/// Largest model, before or after an update, that evaluation accepts.
pub const MAX_WORLDS: usize = 64;

/// An index-only copy of a model.  Sets of worlds are bit masks: each
/// agent has one successor mask per world and each atom one mask.
struct Frame<'m> {
    n: usize,
    succ: Vec<(&'m Agent, Vec<u64>)>,
    val: Vec<(&'m str, u64)>,
}

fn full(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl<'m> Frame<'m> {
    fn of(m: &'m KripkeModel) -> Result<Self, SemanticsError> {
        let n = m.len();
        if n > MAX_WORLDS {
            return Err(SemanticsError::TooManyWorlds(n));
        }
        let succ = m
            .rels
            .iter()
            .map(|(a, r)| {
                let mut lists = vec![0u64; n];
                for &(x, y) in r {
                    lists[x] |= 1 << y;
                }
                (a, lists)
            })
            .collect();
        let val = m.val.iter().map(|(p, ws)| (p.as_str(), ws.iter().fold(0u64, |acc, w| acc | 1 << w))).collect();
        Ok(Frame { n, succ, val })
    }

    fn succ(&self, agent: &Agent) -> Option<&[u64]> {
        self.succ.iter().find(|(a, _)| *a == agent).map(|(_, s)| s.as_slice())
    }

    /// `M^α`, with each new world's (old world, state index).
    fn update(
        &self,
        alpha: &ActionStructure,
        d: &Declarations,
    ) -> Result<(Frame<'m>, Vec<(usize, usize)>), SemanticsError> {
        let mut pre_ext = Vec::with_capacity(alpha.states.len());
        for s in &alpha.states {
            let f = alpha.pre_of(s).ok_or_else(|| SemanticsError::UndeclaredAction(alpha.label(s).to_string()))?;
            pre_ext.push(eval(self, f, d)?);
        }
        let mut origin = Vec::new();
        for w in 0..self.n {
            for (i, ext) in pre_ext.iter().enumerate() {
                if ext >> w & 1 == 1 {
                    origin.push((w, i));
                }
            }
        }
        if origin.len() > MAX_WORLDS {
            return Err(SemanticsError::TooManyWorlds(origin.len()));
        }
        let k = alpha.states.len();
        let succ = self
            .succ
            .iter()
            .map(|(agent, r)| {
                let mut act = vec![false; k * k];
                if let Some(pairs) = alpha.rels.get(*agent) {
                    let ix = |s: &String| alpha.states.iter().position(|t| t == s);
                    for (i, j) in pairs {
                        if let (Some(i), Some(j)) = (ix(i), ix(j)) {
                            act[i * k + j] = true;
                        }
                    }
                }
                let lists = origin
                    .iter()
                    .map(|&(w, i)| {
                        origin
                            .iter()
                            .enumerate()
                            .filter(|(_, &(u, j))| act[i * k + j] && r[w] >> u & 1 == 1)
                            .fold(0u64, |acc, (y, _)| acc | 1 << y)
                    })
                    .collect();
                (*agent, lists)
            })
            .collect();
        let val = self
            .val
            .iter()
            .map(|(p, ws)| {
                let m = origin
                    .iter()
                    .enumerate()
                    .filter(|(_, &(w, _))| ws >> w & 1 == 1)
                    .fold(0u64, |acc, (x, _)| acc | 1 << x);
                (*p, m)
            })
            .collect();
        Ok((Frame { n: origin.len(), succ, val }, origin))
    }
}

/// Updates of one frame by whole action structures, keyed by name.
type UpdateCache<'m> = Vec<(String, Frame<'m>, Vec<(usize, usize)>)>;

fn eval(m: &Frame<'_>, f: &Formula, d: &Declarations) -> Result<u64, SemanticsError> {
    eval_with(m, f, d, None)
}

fn eval_with<'m>(
    m: &Frame<'m>,
    f: &Formula,
    d: &Declarations,
    mut cache: Option<&mut UpdateCache<'m>>,
) -> Result<u64, SemanticsError> {
    let all = full(m.n);
    Ok(match f.view() {
        FormulaView::Atom(p) => m.val.iter().find(|(q, _)| *q == p).map_or(0, |(_, ws)| *ws),
        FormulaView::Top => all,
        FormulaView::Bot => 0,
        FormulaView::One(l) => eval_with(m, pre_formula(l, d)?, d, cache)?,
        FormulaView::Bin(op, a, b) => {
            let x = eval_with(m, a, d, cache.as_deref_mut())?;
            let y = eval_with(m, b, d, cache)?;
            all & match op {
                BinOp::And => x & y,
                BinOp::Or => x | y,
                BinOp::Imp => !x | y,
                // `a <- b` is `b -> a`.
                BinOp::LImp => x | !y,
                // `a *> b` holds where `b` does and `a` fails.
                BinOp::CoImp => !x & y,
                BinOp::LCoImp => x & !y,
            }
        }
        FormulaView::Agent(md, agent, a) => {
            if !matches!(md, Modality::Dia | Modality::Box) {
                return Err(SemanticsError::UnsupportedConnective(f.to_string()));
            }
            let inner = eval_with(m, a, d, cache)?;
            let Some(succ) = m.succ(agent) else { return Ok(if md == Modality::Box { all } else { 0 }) };
            let hit = |ys: u64| match md {
                Modality::Dia => ys & inner != 0,
                _ => ys & !inner == 0,
            };
            succ.iter().enumerate().filter(|(_, &ys)| hit(ys)).fold(0, |acc, (w, _)| acc | 1 << w)
        }
        FormulaView::Action(md, l, a) => {
            if !matches!(md, Modality::Dia | Modality::Box) {
                return Err(SemanticsError::UnsupportedConnective(f.to_string()));
            }
            let act = d.action_of(l).ok_or_else(|| SemanticsError::UndeclaredAction(l.to_string()))?;
            let state = act.states.iter().position(|s| *s == l.state);
            let fresh;
            let (up, origin) = match cache {
                Some(c) => {
                    let hit = match c.iter().position(|(name, _, _)| *name == act.base) {
                        Some(i) => i,
                        None => {
                            let (up, origin) = m.update(act, d)?;
                            c.push((act.base.clone(), up, origin));
                            c.len() - 1
                        }
                    };
                    let (_, up, origin) = &c[hit];
                    (up, origin)
                }
                None => {
                    fresh = m.update(act, d)?;
                    (&fresh.0, &fresh.1)
                }
            };
            let inner = eval(up, a, d)?;
            // Worlds where the precondition fails have no successor.
            let mut out = if md == Modality::Box { all } else { 0 };
            for (x, &(w, i)) in origin.iter().enumerate() {
                if Some(i) == state {
                    out = (out & !(1 << w)) | (inner >> x & 1) << w;
                }
            }
            out
        }
    })
}

fn pre_formula<'d>(l: &ActionLabel, d: &'d Declarations) -> Result<&'d Formula, SemanticsError> {
    d.pre(l).ok_or_else(|| SemanticsError::UndeclaredAction(l.to_string()))
}

pub fn satisfies(m: &KripkeModel, w: usize, f: &Formula, d: &Declarations) -> Result<bool, SemanticsError> {
    Ok(extension(m, f, d)?[w])
}

/// `⟦f⟧` as a set of world indices.
pub fn truth_set(m: &KripkeModel, f: &Formula, d: &Declarations) -> Result<BTreeSet<usize>, SemanticsError> {
    Ok(extension(m, f, d)?.into_iter().enumerate().filter(|(_, b)| *b).map(|(w, _)| w).collect())
}

/// First world where `ante` holds and `cons` fails.
pub fn counterexample_in(
    m: &KripkeModel,
    ante: &Formula,
    cons: &Formula,
    d: &Declarations,
) -> Result<Option<usize>, SemanticsError> {
    let (a, c) = (extension(m, ante, d)?, extension(m, cons, d)?);
    Ok((0..m.len()).find(|&w| a[w] && !c[w]))
}

/// Size limits for model enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_worlds: usize,
    pub atoms: Vec<String>,
    pub agents: Vec<Agent>,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_worlds: 3, atoms: vec!["p".into(), "q".into()], agents: vec![Agent::new("a")] }
    }
}

impl Bounds {
    fn bits(&self, n: usize) -> (u32, u32) {
        ((self.agents.len() * n * n) as u32, (self.atoms.len() * n) as u32)
    }

    /// Number of models with exactly `n` worlds.
    pub fn count(&self, n: usize) -> u64 {
        let (r, v) = self.bits(n);
        1u64 << (r + v)
    }

    /// The model with `n` worlds and index `ix`.  Relation bits are the
    /// high-order part of the index, so models are ordered by relation mask
    /// first and valuation mask second; bit `x*n+y` of agent `k`'s mask is
    /// the edge `x -> y`.
    fn frame(&self, n: usize, ix: u64) -> Frame<'_> {
        let (_, vbits) = self.bits(n);
        let rel_mask = ix >> vbits;
        let row = full(n);
        let succ = self
            .agents
            .iter()
            .enumerate()
            .map(|(k, a)| (a, (0..n).map(|x| rel_mask >> (k * n * n + x * n) & row).collect()))
            .collect();
        let val = self.atoms.iter().enumerate().map(|(k, p)| (p.as_str(), ix >> (k * n) & row)).collect();
        Frame { n, succ, val }
    }

    pub fn model(&self, n: usize, ix: u64) -> KripkeModel {
        let (_, vbits) = self.bits(n);
        let rel_mask = ix >> vbits;
        let val_mask = ix & ((1u64 << vbits) - 1);
        let worlds = (0..n).map(|i| i.to_string()).collect();
        let mut rels = BTreeMap::new();
        for (k, a) in self.agents.iter().enumerate() {
            let mut r = BTreeSet::new();
            for x in 0..n {
                for y in 0..n {
                    if rel_mask >> (k * n * n + x * n + y) & 1 == 1 {
                        r.insert((x, y));
                    }
                }
            }
            rels.insert(a.clone(), r);
        }
        let mut val = BTreeMap::new();
        for (k, p) in self.atoms.iter().enumerate() {
            let ws = (0..n).filter(|w| val_mask >> (k * n + w) & 1 == 1).collect();
            val.insert(p.clone(), ws);
        }
        KripkeModel::new(worlds, rels, val)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    ValidUpToBound { models: u64 },
    Counterexample { model: KripkeModel, world: usize },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::ValidUpToBound { .. })
    }
}

/// Checks `ante ⊨ cons` on every model within `bounds`, smallest models
/// first.  The reported counterexample is the first in enumeration order
/// regardless of how the parallel search is scheduled.
pub fn valid_bounded(
    ante: &Formula,
    cons: &Formula,
    bounds: &Bounds,
    d: &Declarations,
) -> Result<Verdict, SemanticsError> {
    // Surface unsupported connectives once, before fanning out.
    let probe = bounds.model(1, 0);
    extension(&probe, ante, d)?;
    extension(&probe, cons, d)?;
    let mut models = 0;
    for n in 1..=bounds.max_worlds {
        let total = bounds.count(n);
        let hit = (0..total).into_par_iter().find_first(|&ix| {
            let m = bounds.frame(n, ix);
            matches!((eval(&m, ante, d), eval(&m, cons, d)), (Ok(a), Ok(c)) if a & !c != 0)
        });
        if let Some(ix) = hit {
            let model = bounds.model(n, ix);
            let world = counterexample_in(&model, ante, cons, d)?.expect("found above");
            return Ok(Verdict::Counterexample { model, world });
        }
        models += total;
    }
    Ok(Verdict::ValidUpToBound { models })
}

/// A public announcement of `pre`: one state related to itself for every
/// agent.
pub fn announcement(name: &str, pre: Formula, agents: &[Agent]) -> ActionStructure {
    ActionStructure {
        base: name.into(),
        states: vec!["k".into()],
        designated: "k".into(),
        rels: agents.iter().map(|a| (a.clone(), BTreeSet::from([("k".to_string(), "k".to_string())]))).collect(),
        pre: BTreeMap::from([("k".to_string(), pre)]),
    }
}

/// Declarations holding the default announcement pool: announcements of
/// each atom (`ann_p`, ...) and of `T` (`ann_top`).
pub fn announcement_pool(atoms: &[String], agents: &[Agent]) -> Declarations {
    let mut d = Declarations { agents: agents.iter().cloned().collect(), ..Declarations::default() };
    for p in atoms {
        let a = announcement(&format!("ann_{p}"), Formula::atom(p.clone()), agents);
        d.actions.insert(a.base.clone(), a);
    }
    let t = announcement("ann_top", Formula::Top, agents);
    d.actions.insert(t.base.clone(), t);
    d
}

/// Instances of the interaction axioms for one action variant, each as a
/// pair of formulas meant to be equivalent: facts, negation, disjunction and
/// the agent interaction, with `A`/`B` ranging over `fills`.
pub fn axiom_instances(
    label: &ActionLabel,
    atoms: &[String],
    fills: &[Formula],
    agents: &[Agent],
    d: &Declarations,
) -> Vec<(String, Formula, Formula)> {
    let pre = d.pre(label).cloned().unwrap_or(Formula::Top);
    let dia = |f: Formula| Formula::action_modal(Modality::Dia, label.clone(), f);
    let and = |a, b| Formula::bin(BinOp::And, a, b);
    let or = |a, b| Formula::bin(BinOp::Or, a, b);
    let mut out = Vec::new();
    for p in atoms {
        let p = Formula::atom(p.clone());
        out.push((format!("facts {label} {p}"), dia(p.clone()), and(pre.clone(), p)));
    }
    for a in fills {
        out.push((format!("neg {label} {a}"), dia(a.clone().negated()), and(pre.clone(), dia(a.clone()).negated())));
        for b in fills {
            out.push((
                format!("or {label} {a} {b}"),
                dia(or(a.clone(), b.clone())),
                or(dia(a.clone()), dia(b.clone())),
            ));
        }
        for ag in agents {
            let disj = d
                .betas(label, ag)
                .into_iter()
                .map(|beta| {
                    Formula::agent_modal(
                        Modality::Dia,
                        ag.clone(),
                        Formula::action_modal(Modality::Dia, beta, a.clone()),
                    )
                })
                .reduce(&or)
                .unwrap_or(Formula::Bot);
            out.push((
                format!("interaction {label} {ag} {a}"),
                dia(Formula::agent_modal(Modality::Dia, ag.clone(), a.clone())),
                and(pre.clone(), disj),
            ));
        }
    }
    out
}

/// Outcome of one interaction-axiom schema over every instance tried.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaOutcome {
    pub schema: String,
    pub instances: usize,
    /// Models enumerated per instance.
    pub models: u64,
    /// The first failing instance, direction included, with its verdict.
    pub failure: Option<(String, Verdict)>,
}

impl SchemaOutcome {
    pub fn is_valid(&self) -> bool {
        self.failure.is_none()
    }
}

/// Default fillers for the schematic letters: the atoms, the negation of
/// the first atom and the first agent's diamond of it.
pub fn default_fills(atoms: &[String], agents: &[Agent]) -> Vec<Formula> {
    let mut out: Vec<Formula> = atoms.iter().map(|p| Formula::atom(p.clone())).collect();
    if let Some(p) = atoms.first() {
        out.push(Formula::atom(p.clone()).negated());
        if let Some(a) = agents.first() {
            out.push(Formula::agent_modal(Modality::Dia, a.clone(), Formula::atom(p.clone())));
        }
    }
    out
}

/// Checks both directions of every axiom instance for every action label of
/// the announcement pool and of `extra`, grouped by schema name.  Each model
/// is enumerated once and all instances are evaluated on it.
pub fn check_axioms(bounds: &Bounds, extra: &Declarations) -> Result<Vec<SchemaOutcome>, SemanticsError> {
    let mut d = announcement_pool(&bounds.atoms, &bounds.agents);
    d.agents.extend(extra.agents.iter().cloned());
    d.actions.extend(extra.actions.iter().map(|(k, v)| (k.clone(), v.clone())));
    let fills = default_fills(&bounds.atoms, &bounds.agents);
    let instances: Vec<_> =
        d.all_labels().iter().flat_map(|l| axiom_instances(l, &bounds.atoms, &fills, &bounds.agents, &d)).collect();
    let probe = bounds.frame(1, 0);
    for (_, f1, f2) in &instances {
        eval(&probe, f1, &d)?;
        eval(&probe, f2, &d)?;
    }
    // First failing (model, direction) per instance, in enumeration order.
    let mut first: Vec<Option<(usize, u64, &str)>> = vec![None; instances.len()];
    let mut models = 0;
    for n in 1..=bounds.max_worlds {
        let hits: Vec<(u64, Vec<(usize, &str)>)> = (0..bounds.count(n))
            .into_par_iter()
            .map(|ix| {
                let m = bounds.frame(n, ix);
                let mut cache = UpdateCache::new();
                let mut bad = Vec::new();
                for (i, (_, f1, f2)) in instances.iter().enumerate() {
                    let x = eval_with(&m, f1, &d, Some(&mut cache))?;
                    let y = eval_with(&m, f2, &d, Some(&mut cache))?;
                    if x & !y != 0 {
                        bad.push((i, "->"));
                    } else if y & !x != 0 {
                        bad.push((i, "<-"));
                    }
                }
                Ok((ix, bad))
            })
            .filter(|r| !matches!(r, Ok((_, bad)) if bad.is_empty()))
            .collect::<Result<_, SemanticsError>>()?;
        for (ix, bad) in hits {
            for (i, dir) in bad {
                first[i].get_or_insert((n, ix, dir));
            }
        }
        models += bounds.count(n);
    }
    let mut by_schema: BTreeMap<String, SchemaOutcome> = BTreeMap::new();
    for ((name, f1, f2), fail) in instances.iter().zip(first) {
        let schema = name.split_whitespace().next().unwrap_or_default().to_string();
        let entry =
            by_schema.entry(schema.clone()).or_insert(SchemaOutcome { schema, instances: 0, models, failure: None });
        entry.instances += 1;
        if let (None, Some((n, ix, dir))) = (&entry.failure, fail) {
            let model = bounds.model(n, ix);
            let (a, c) = if dir == "->" { (f1, f2) } else { (f2, f1) };
            let world = counterexample_in(&model, a, c, &d)?.expect("failure found during enumeration");
            entry.failure = Some((format!("{name} {dir}"), Verdict::Counterexample { model, world }));
        }
    }
    Ok(by_schema.into_values().collect())
}

/// The model of the Kripke-unsoundness example for adjoint dynamic
/// modalities, with its announcement action `alpha` (announce `r`).
pub const ADJOINT_EXAMPLE_DECLS: &str = r#"agent a;
action alpha { states: k; designated: k; pre: k = "r"; rel a: k -> k; }"#;
pub const ADJOINT_EXAMPLE_MODEL: &str = "model { worlds: u v; val p: u; val r: u; val q: v; rel a: u->u, u->v, v->u, v->v; }";

pub fn adjoint_example() -> (Declarations, KripkeModel) {
    let d = Declarations::parse(ADJOINT_EXAMPLE_DECLS).expect("fixed declarations parse");
    let m = crate::parser::parse_model(ADJOINT_EXAMPLE_MODEL, &d).expect("fixed model parses");
    (d, m)
}

// ---------------------------------------------------------------------------
// Relation-level operators
// ---------------------------------------------------------------------------

/// A relation `R ⊆ X × Y` on small carriers; subsets are bit masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub nx: usize,
    pub ny: usize,
    pub pairs: BTreeSet<(usize, usize)>,
}

impl Relation {
    pub fn new(nx: usize, ny: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        assert!(nx <= 64 && ny <= 64, "carriers above 64 elements are not supported");
        Relation { nx, ny, pairs: pairs.into_iter().collect() }
    }

    /// The relation whose pair `(x, y)` is bit `x*ny + y` of `mask`.
    pub fn from_mask(nx: usize, ny: usize, mask: u64) -> Self {
        let pairs = (0..nx).flat_map(|x| (0..ny).map(move |y| (x, y))).filter(|&(x, y)| mask >> (x * ny + y) & 1 == 1);
        Self::new(nx, ny, pairs)
    }

    fn full(n: usize) -> u64 {
        if n == 64 {
            u64::MAX
        } else {
            (1u64 << n) - 1
        }
    }

    /// `{x | ∃y. xRy ∧ y ∈ u}`
    pub fn fdia(&self, u: u64) -> u64 {
        self.pairs.iter().filter(|(_, y)| u >> y & 1 == 1).fold(0, |acc, (x, _)| acc | 1 << x)
    }

    /// `{x | ∀y. xRy ⇒ y ∈ u}`
    pub fn fbox(&self, u: u64) -> u64 {
        let bad = self.pairs.iter().filter(|(_, y)| u >> y & 1 == 0).fold(0u64, |acc, (x, _)| acc | 1 << x);
        Self::full(self.nx) & !bad
    }

    /// `{y | ∃x. xRy ∧ x ∈ v}`
    pub fn pdia(&self, v: u64) -> u64 {
        self.pairs.iter().filter(|(x, _)| v >> x & 1 == 1).fold(0, |acc, (_, y)| acc | 1 << y)
    }

    /// `{y | ∀x. xRy ⇒ x ∈ v}`
    pub fn pbox(&self, v: u64) -> u64 {
        let bad = self.pairs.iter().filter(|(x, _)| v >> x & 1 == 0).fold(0u64, |acc, (_, y)| acc | 1 << y);
        Self::full(self.ny) & !bad
    }

    pub fn converse(&self) -> Relation {
        Relation::new(self.ny, self.nx, self.pairs.iter().map(|&(x, y)| (y, x)))
    }

    /// Relational composition `self ; other` (first `self`, then `other`).
    pub fn compose(&self, other: &Relation) -> Relation {
        let mut out = BTreeSet::new();
        for &(x, y) in &self.pairs {
            for &(y2, z) in &other.pairs {
                if y == y2 {
                    out.insert((x, z));
                }
            }
        }
        Relation::new(self.nx, other.ny, out)
    }

    pub fn domain(&self) -> BTreeSet<usize> {
        self.pairs.iter().map(|&(x, _)| x).collect()
    }
}

fn subset(a: u64, b: u64) -> bool {
    a & !b == 0
}

/// The two adjunction biconditionals for `u ⊆ Y`, `v ⊆ X`:
/// `⟨R⟩u ⊆ v ⇔ u ⊆ [R⁻¹]v` and `⟨R⁻¹⟩v ⊆ u ⇔ v ⊆ [R]u`.
pub fn adjunctions_hold(r: &Relation, u: u64, v: u64) -> (bool, bool) {
    let first = subset(r.fdia(u), v) == subset(u, r.pbox(v));
    let second = subset(r.pdia(v), u) == subset(v, r.fbox(u));
    (first, second)
}

/// `[Dom(R) × Dom(R)] ∩ Δ_X ⊆ R ; R⁻¹` for a relation on one carrier.
pub fn comp_fact(r: &Relation) -> bool {
    let rr = r.compose(&r.converse());
    r.domain().into_iter().all(|x| rr.pairs.contains(&(x, x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    #[test]
    fn adjoint_example_truth_sets() {
        let (d, m) = adjoint_example();
        let f = |s: &str| parse_formula(s, &d).unwrap();
        assert!(truth_set(&m, &f("[a]p"), &d).unwrap().is_empty());
        let u = m.world("u").unwrap();
        assert_eq!(truth_set(&m, &f("<alpha>[a]p"), &d).unwrap(), BTreeSet::from([u]));
        assert_eq!(counterexample_in(&m, &f("<alpha>[a]p"), &f("q"), &d).unwrap(), Some(u));
    }

    #[test]
    fn axiom_suite_on_two_worlds() {
        let b = Bounds { max_worlds: 2, ..Bounds::default() };
        let out = check_axioms(&b, &Declarations::default()).unwrap();
        let names: Vec<_> = out.iter().map(|o| o.schema.as_str()).collect();
        assert_eq!(names, ["facts", "interaction", "neg", "or"]);
        assert!(out.iter().all(SchemaOutcome::is_valid), "{out:?}");
    }

    #[test]
    fn announcement_diamond_needs_its_precondition() {
        // `q |- <ann_p>q` fails at any world where q holds and p does not.
        let d = announcement_pool(&["p".into()], &[Agent::new("a")]);
        let ann = d.action("ann_p").unwrap().designated_label();
        let dia = Formula::action_modal(Modality::Dia, ann, Formula::atom("q"));
        let v = valid_bounded(&Formula::atom("q"), &dia, &Bounds::default(), &d).unwrap();
        assert!(!v.is_valid());
    }

    #[test]
    fn adjoint_example_update_shape() {
        let (d, m) = adjoint_example();
        let up = update(&m, d.action("alpha").unwrap(), &d).unwrap();
        assert_eq!(up.model.len(), 1);
        assert_eq!(up.origin, vec![(0, "k".to_string())]);
        assert_eq!(up.model.rels[&Agent::new("a")], BTreeSet::from([(0, 0)]));
    }

    #[test]
    fn trivial_announcements() {
        let (d, m) = adjoint_example();
        let agents = [Agent::new("a")];
        let top = announcement("t", Formula::Top, &agents);
        let up = update(&m, &top, &d).unwrap();
        assert_eq!(up.model.len(), m.len());
        assert_eq!(up.model.rels, m.rels);
        assert_eq!(up.model.val, m.val);
        let bot = announcement("b", Formula::Bot, &agents);
        assert!(update(&m, &bot, &d).unwrap().model.is_empty());
    }

    #[test]
    fn constants_everywhere() {
        let (d, m) = adjoint_example();
        for w in 0..m.len() {
            assert!(satisfies(&m, w, &Formula::Top, &d).unwrap());
            assert!(!satisfies(&m, w, &Formula::Bot, &d).unwrap());
        }
    }

    #[test]
    fn adjoints_refused() {
        let (d, m) = adjoint_example();
        let f = parse_formula("<alpha>^p", &d).unwrap();
        assert!(matches!(extension(&m, &f, &d), Err(SemanticsError::UnsupportedConnective(_))));
    }

    #[test]
    fn relation_examples() {
        let empty = Relation::new(3, 3, []);
        assert_eq!(empty.fdia(0b111), 0);
        assert_eq!(empty.fbox(0), 0b111);
        let id = Relation::new(3, 3, (0..3).map(|x| (x, x)));
        for s in 0..8u64 {
            assert_eq!((id.fdia(s), id.fbox(s), id.pdia(s), id.pbox(s)), (s, s, s, s));
        }
        assert!(comp_fact(&Relation::new(2, 2, [(0, 1)])));
        assert!(comp_fact(&empty));
    }

    #[test]
    fn enumeration_order_is_canonical() {
        let b = Bounds::default();
        assert_eq!(b.count(1), 1 << 3);
        let m = b.model(2, 1);
        assert_eq!(m.val["p"], BTreeSet::from([0]));
        assert!(m.rels[&Agent::new("a")].is_empty());
    }

    /// Pointwise reference semantics over the public model and update.
    fn naive(m: &KripkeModel, w: usize, f: &Formula, d: &Declarations) -> bool {
        match f.view() {
            FormulaView::Atom(p) => m.val.get(p).is_some_and(|ws| ws.contains(&w)),
            FormulaView::Top => true,
            FormulaView::Bot => false,
            FormulaView::One(l) => naive(m, w, d.pre(l).unwrap(), d),
            FormulaView::Bin(op, a, b) => {
                let (x, y) = (naive(m, w, a, d), naive(m, w, b, d));
                match op {
                    BinOp::And => x && y,
                    BinOp::Or => x || y,
                    BinOp::Imp => !x || y,
                    _ => unreachable!("not used below"),
                }
            }
            FormulaView::Agent(md, ag, a) => {
                let mut ys = m.rels.get(ag).into_iter().flatten().filter(|(x, _)| *x == w).map(|&(_, y)| y);
                match md {
                    Modality::Dia => ys.any(|y| naive(m, y, a, d)),
                    _ => ys.all(|y| naive(m, y, a, d)),
                }
            }
            FormulaView::Action(md, l, a) => {
                let up = update(m, d.action_of(l).unwrap(), d).unwrap();
                match up.index_of(w, &l.state) {
                    Some(x) => naive(&up.model, x, a, d),
                    None => md == Modality::Box,
                }
            }
        }
    }

    #[test]
    fn mask_evaluation_matches_pointwise_reference() {
        let b = Bounds::default();
        let mut d = announcement_pool(&b.atoms, &b.agents);
        let two = Declarations::parse(r#"agent a; action beta { states: k l; designated: k; pre: k = "p" l = "T"; rel a: k -> k, k -> l, l -> l; }"#).unwrap();
        d.actions.extend(two.actions);
        let fs = ["<a>(p -> [ann_q]<a>q) | [a]~p", "[beta]<a>q & <beta@l>[a]p", "<ann_p>[a]1[beta] -> q"];
        for text in fs {
            let f = parse_formula(text, &d).unwrap();
            for n in 1..=2 {
                for ix in 0..b.count(n) {
                    let m = b.model(n, ix);
                    let ext = extension(&m, &f, &d).unwrap();
                    for (w, &fast) in ext.iter().enumerate() {
                        assert_eq!(fast, naive(&m, w, &f, &d), "{text} model {n}/{ix} world {w}");
                    }
                }
            }
        }
    }

    #[test]
    fn direct_frames_agree_with_built_models() {
        let b = Bounds::default();
        let d = announcement_pool(&b.atoms, &b.agents);
        let f = parse_formula("<a>(p -> [ann_q]<a>q) | [a]~p", &d).unwrap();
        for ix in 0..b.count(2) {
            let m = b.model(2, ix);
            let fast = eval(&b.frame(2, ix), &f, &d).unwrap();
            let slow = eval(&Frame::of(&m).unwrap(), &f, &d).unwrap();
            assert_eq!(fast, slow, "model {ix}");
        }
    }

    #[test]
    fn fact_axiom_valid_small() {
        let d = announcement_pool(&["p".into()], &[Agent::new("a")]);
        let f = |s: &str| parse_formula(s, &d).unwrap();
        let b = Bounds { max_worlds: 2, atoms: vec!["p".into()], agents: vec![Agent::new("a")] };
        assert!(valid_bounded(&f("<ann_p>p"), &f("p & p"), &b, &d).unwrap().is_valid());
        let v = valid_bounded(&f("p"), &f("<ann_p>T"), &b, &d).unwrap();
        assert!(v.is_valid());
        let v = valid_bounded(&f("T"), &f("<ann_p>T"), &b, &d).unwrap();
        assert!(!v.is_valid());
    }
}
