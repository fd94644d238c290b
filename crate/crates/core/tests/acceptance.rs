//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.  Limits are pinned below; oracles for the relation and
//! update criteria are computed here on plain sets, independently of the
//! bit-mask code under test.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use deak_core::corpus::{self, Tag};
use deak_core::cutelim::eliminate;
use deak_core::cutelim::lint::lint;
use deak_core::proofs::{display_at, display_closure, is_cut_free, subformula_property};
use deak_core::semantics::{
    self, adjunctions_hold, announcement_pool, comp_fact, counterexample_in, adjoint_example, truth_set, update, Bounds,
    Relation,
};
use deak_core::{builtin_deak_legacy, builtin_deak_prime, check, parse_formula, Formula, Polarity, Sequent, Structure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_LIMIT: Duration = Duration::from_secs(5);
const LINT_LIMIT: Duration = Duration::from_secs(1);
const ELIM_LIMIT: Duration = Duration::from_secs(30);
const ELIM_FUEL: usize = 100_000;
const AXIOM_LIMIT: Duration = Duration::from_secs(60);
const DISPLAY_LIMIT: Duration = Duration::from_secs(5);
const DISPLAY_DEPTH: usize = 64;
/// Cap on the display closure explored when checking that the other side
/// is unreachable.
const CLOSURE_CAP: usize = 200_000;
const ADJ_EXHAUSTIVE_MAX: usize = 3;
const ADJ_RANDOM: usize = 1000;
const ADJ_RANDOM_MAX: usize = 6;
const COMP_MAX: usize = 4;
const UPDATE_RANDOM: usize = 1000;
const SEED: u64 = 20_261_018;

struct Line {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Line);

fn line(pass: bool, detail: impl Into<String>) -> Line {
    Line { pass, detail: detail.into() }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn ms(d: Duration) -> String {
    format!("{}ms", d.as_millis())
}

fn c1_corpus() -> Line {
    let calc = builtin_deak_prime(&corpus::base_decls(), true);
    let (rep, t) = timed(|| corpus::verify_all(&calc));
    let derived = corpus::list().iter().filter(|e| e.has_tag(Tag::DerivedRule)).count();
    let completeness = corpus::list().iter().filter(|e| e.has_tag(Tag::Completeness)).count();
    let pass = rep.all_passed() && t < CORPUS_LIMIT;
    line(
        pass,
        format!(
            "corpus entries={} derived-rule={derived} completeness={completeness} failures={} time={} limit={}",
            rep.entries.len(),
            rep.failures(),
            ms(t),
            ms(CORPUS_LIMIT)
        ),
    )
}

fn c2_lint_prime() -> Line {
    let calc = builtin_deak_prime(&corpus::base_decls(), true);
    let (rep, t) = timed(|| lint(&calc));
    let conds_pass = lint_conditions().iter().all(|c| rep.get(c).is_some_and(|v| v.passed()));
    let seg = rep.failing_rules("segregation");
    let pass = conds_pass && rep.quasi_proper() && seg == ["atom"] && t < LINT_LIMIT;
    line(
        pass,
        format!("C1..C8' all-pass={conds_pass} segregation-fails={seg:?} time={} limit={}", ms(t), ms(LINT_LIMIT)),
    )
}

fn lint_conditions() -> Vec<&'static str> {
    deak_core::cutelim::lint::CONDITIONS.to_vec()
}

fn c3_lint_legacy() -> Line {
    let calc = builtin_deak_legacy(&corpus::base_decls(), true);
    let (rep, t) = timed(|| lint(&calc));
    let c1 = rep.failing_rules("C1");
    let restricted: Vec<_> = ["C6", "C7"].iter().flat_map(|c| rep.failing_rules(c)).collect();
    let pass = c1.iter().any(|r| r.starts_with("reduce"))
        && c1.iter().all(|r| r.starts_with("reduce"))
        && restricted.iter().any(|r| r.starts_with("swap-in"))
        && !rep.quasi_proper()
        && t < LINT_LIMIT;
    line(pass, format!("C1-fails={c1:?} restricted-fails={restricted:?} time={} limit={}", ms(t), ms(LINT_LIMIT)))
}

fn c4_elimination() -> Line {
    let ((ok, total, max_gen, problems), t) = timed(|| {
        let mut ok = 0;
        let mut total = 0;
        let mut max_gen = 0;
        let mut problems = Vec::new();
        for e in corpus::list().into_iter().filter(|e| e.has_tag(Tag::Completeness)) {
            total += 1;
            let calc = builtin_deak_prime(&e.decls().unwrap(), true);
            let Ok(Some(cut)) = e.composed_cut() else {
                problems.push(format!("{}:no-composition", e.id));
                continue;
            };
            match eliminate(&cut, &calc, ELIM_FUEL) {
                Ok((out, stats)) => {
                    max_gen = max_gen.max(stats.generated_nodes);
                    let good = check(&out, &calc).is_closed()
                        && is_cut_free(&out)
                        && subformula_property(&out)
                        && out.conclusion == cut.conclusion;
                    if good {
                        ok += 1;
                    } else {
                        problems.push(e.id.to_string());
                    }
                }
                Err(err) => problems.push(format!("{}:{err}", e.id)),
            }
        }
        (ok, total, max_gen, problems)
    });
    let pass = ok == total && total > 0 && t < ELIM_LIMIT;
    line(
        pass,
        format!(
            "pairs={total} eliminated={ok} max-generated={max_gen} fuel={ELIM_FUEL} problems={problems:?} time={} limit={}",
            ms(t),
            ms(ELIM_LIMIT)
        ),
    )
}

fn c5_axioms() -> Line {
    let bounds = Bounds::default();
    let (res, t) = timed(|| semantics::check_axioms(&bounds, &Default::default()));
    match res {
        Err(e) => line(false, format!("error {e}")),
        Ok(out) => {
            let names: Vec<_> = out.iter().map(|o| o.schema.as_str()).collect();
            let bad: Vec<_> = out.iter().filter_map(|o| o.failure.as_ref().map(|(i, _)| i.clone())).collect();
            let instances: usize = out.iter().map(|o| o.instances).sum();
            let pass = names == ["facts", "interaction", "neg", "or"] && bad.is_empty() && t < AXIOM_LIMIT;
            line(
                pass,
                format!(
                    "schemas={names:?} instances={instances} worlds<={} models={} counterexamples={} time={} limit={}",
                    bounds.max_worlds,
                    out.first().map_or(0, |o| o.models),
                    bad.len(),
                    ms(t),
                    ms(AXIOM_LIMIT)
                ),
            )
        }
    }
}

fn c6_adjoint_example() -> Line {
    let (d, m) = adjoint_example();
    let f = |s: &str| parse_formula(s, &d).unwrap();
    let u = m.world("u").unwrap();
    let box_p = truth_set(&m, &f("[a]p"), &d).unwrap();
    let dyn_p = truth_set(&m, &f("<alpha>[a]p"), &d).unwrap();
    let cex = counterexample_in(&m, &f("<alpha>[a]p"), &f("q"), &d).unwrap();
    let pass = box_p.is_empty() && dyn_p == BTreeSet::from([u]) && cex == Some(u);
    let names = |s: &BTreeSet<usize>| s.iter().map(|&w| m.worlds[w].clone()).collect::<Vec<_>>();
    line(
        pass,
        format!(
            "[a]p={:?} <alpha>[a]p={:?} counterexample={:?}",
            names(&box_p),
            names(&dyn_p),
            cex.map(|w| m.worlds[w].clone())
        ),
    )
}

fn marker() -> Structure {
    Structure::fm(Formula::atom("zz_display_marker"))
}

fn c7_display() -> Line {
    let ((cases, problems), t) = timed(|| {
        let mut cases = 0;
        let mut problems = Vec::new();
        for e in corpus::list() {
            let calc = builtin_deak_prime(&e.decls().unwrap(), true);
            for s in e.expected().unwrap() {
                for p in s.paths() {
                    cases += 1;
                    let pol = s.polarity_of(&p).unwrap();
                    let shown = match display_at(&s, &p, &calc) {
                        Ok(x) => x,
                        Err(err) => {
                            problems.push(format!("{} {p}: {err}", e.id));
                            continue;
                        }
                    };
                    if shown.side != pol || shown.chain.len() > DISPLAY_DEPTH {
                        problems.push(format!("{} {p}: side={} depth={}", e.id, shown.side, shown.chain.len()));
                    }
                    // The other side must be unreachable.
                    let marked = s.replace_at(&p, &mut |_| marker()).unwrap();
                    let wrong = |q: &Sequent| match pol {
                        Polarity::Precedent => q.succ == marker(),
                        Polarity::Succedent => q.ante == marker(),
                    };
                    match display_closure(&marked, &calc, CLOSURE_CAP) {
                        Some(all) if all.iter().any(wrong) => problems.push(format!("{} {p}: both sides", e.id)),
                        Some(_) => {}
                        None => problems.push(format!("{} {p}: closure over cap", e.id)),
                    }
                }
            }
        }
        (cases, problems)
    });
    let pass = problems.is_empty() && cases > 0 && t < DISPLAY_LIMIT;
    line(
        pass,
        format!(
            "paths={cases} depth<={DISPLAY_DEPTH} problems={problems:?} time={} limit={}",
            ms(t),
            ms(DISPLAY_LIMIT)
        ),
    )
}

/// Set-based reference for the four relational operators.
struct SetRel {
    nx: usize,
    ny: usize,
    pairs: BTreeSet<(usize, usize)>,
}

type Set = BTreeSet<usize>;

impl SetRel {
    fn fdia(&self, u: &Set) -> Set {
        (0..self.nx).filter(|x| self.pairs.iter().any(|&(a, b)| a == *x && u.contains(&b))).collect()
    }
    fn fbox(&self, u: &Set) -> Set {
        (0..self.nx).filter(|x| self.pairs.iter().all(|&(a, b)| a != *x || u.contains(&b))).collect()
    }
    fn pdia(&self, v: &Set) -> Set {
        (0..self.ny).filter(|y| self.pairs.iter().any(|&(a, b)| b == *y && v.contains(&a))).collect()
    }
    fn pbox(&self, v: &Set) -> Set {
        (0..self.ny).filter(|y| self.pairs.iter().all(|&(a, b)| b != *y || v.contains(&a))).collect()
    }
}

fn to_set(mask: u64, n: usize) -> Set {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

/// Checks one instance against the reference: the mask operators agree
/// with the set ones, and both adjunctions hold on the reference sets.
fn adjunction_instance(nx: usize, ny: usize, rmask: u64, u: u64, v: u64) -> bool {
    let r = Relation::from_mask(nx, ny, rmask);
    let sr = SetRel { nx, ny, pairs: r.pairs.clone() };
    let (su, sv) = (to_set(u, ny), to_set(v, nx));
    let agree = to_set(r.fdia(u), nx) == sr.fdia(&su)
        && to_set(r.fbox(u), nx) == sr.fbox(&su)
        && to_set(r.pdia(v), ny) == sr.pdia(&sv)
        && to_set(r.pbox(v), ny) == sr.pbox(&sv);
    let first = sr.fdia(&su).is_subset(&sv) == su.is_subset(&sr.pbox(&sv));
    let second = sr.pdia(&sv).is_subset(&su) == sv.is_subset(&sr.fbox(&su));
    agree && first && second && adjunctions_hold(&r, u, v) == (true, true)
}

fn c8_adjunctions() -> Line {
    let mut exhaustive = 0u64;
    let mut bad = 0u64;
    for nx in 1..=ADJ_EXHAUSTIVE_MAX {
        for ny in 1..=ADJ_EXHAUSTIVE_MAX {
            for rmask in 0..1u64 << (nx * ny) {
                for u in 0..1u64 << ny {
                    for v in 0..1u64 << nx {
                        exhaustive += 1;
                        bad += u64::from(!adjunction_instance(nx, ny, rmask, u, v));
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..ADJ_RANDOM {
        let nx = rng.gen_range(1..=ADJ_RANDOM_MAX);
        let ny = rng.gen_range(1..=ADJ_RANDOM_MAX);
        let rmask = rng.gen::<u64>() & ((1u64 << (nx * ny)) - 1);
        let u = rng.gen::<u64>() & ((1 << ny) - 1);
        let v = rng.gen::<u64>() & ((1 << nx) - 1);
        bad += u64::from(!adjunction_instance(nx, ny, rmask, u, v));
    }
    line(bad == 0, format!("exhaustive={exhaustive} random={ADJ_RANDOM} failures={bad}"))
}

fn c9_comp_fact() -> Line {
    let mut checked = 0u64;
    let mut bad = 0u64;
    for n in 1..=COMP_MAX {
        for mask in 0..1u64 << (n * n) {
            let r = Relation::from_mask(n, n, mask);
            let dom: Set = r.pairs.iter().map(|&(x, _)| x).collect();
            let rr: BTreeSet<(usize, usize)> = r
                .pairs
                .iter()
                .flat_map(|&(x, y)| r.pairs.iter().filter(move |&&(_, y2)| y2 == y).map(move |&(z, _)| (x, z)))
                .collect();
            let reference = dom.iter().all(|&x| rr.contains(&(x, x)));
            checked += 1;
            bad += u64::from(!(reference && comp_fact(&r)));
        }
    }
    line(bad == 0, format!("relations={checked} max-carrier={COMP_MAX} failures={bad}"))
}

fn c10_update_atoms() -> Line {
    let bounds = Bounds::default();
    let d = announcement_pool(&bounds.atoms, &bounds.agents);
    let actions: Vec<_> = d.actions.values().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let mut bad = 0;
    let mut worlds = 0;
    for _ in 0..UPDATE_RANDOM {
        let n = rng.gen_range(1..=bounds.max_worlds);
        let m = bounds.model(n, rng.gen_range(0..bounds.count(n)));
        let act = &actions[rng.gen_range(0..actions.len())];
        let up = update(&m, act, &d).unwrap();
        for (x, (w, _)) in up.origin.iter().enumerate() {
            worlds += 1;
            for p in &bounds.atoms {
                let before = m.val.get(p).is_some_and(|s| s.contains(w));
                let after = up.model.val.get(p).is_some_and(|s| s.contains(&x));
                bad += usize::from(before != after);
            }
        }
    }
    line(bad == 0, format!("pairs={UPDATE_RANDOM} updated-worlds={worlds} mismatches={bad}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("corpus-verification", c1_corpus),
        ("lint-deak-prime", c2_lint_prime),
        ("lint-legacy", c3_lint_legacy),
        ("cut-elimination", c4_elimination),
        ("axioms-valid-up-to-bound", c5_axioms),
        ("adjoint-example", c6_adjoint_example),
        ("display-property", c7_display),
        ("adjunctions", c8_adjunctions),
        ("comp-fact", c9_comp_fact),
        ("update-atom-preservation", c10_update_atoms),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let l = run();
        failed += usize::from(!l.pass);
        println!("criterion {:>2} {} {name}: {}", i + 1, if l.pass { "PASS" } else { "FAIL" }, l.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
