//! `deak`: check, cut-eliminate, lint and model-check D'.EAK derivations.
//!
//! Exit codes: 0 success, 1 a check, lint or validity failure, 2 a usage or
//! parse error, 3 cut elimination ran out of fuel.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use deak_core::corpus::{self, CorpusError};
use deak_core::cutelim::{self, lint::lint, ElimError};
use deak_core::proofs::is_cut_free;
use deak_core::semantics::{self, Bounds, Verdict};
use deak_core::{
    builtin_deak_legacy, builtin_deak_prime, check, parse_formula, parse_model, parse_proof_file, parse_proofs,
    parse_sequent, render, Agent, Calculus, Declarations, Formula,
};

const FUEL_ENV: &str = "DEAK_FUEL";

#[derive(Parser)]
#[command(name = "deak", version, about = "Proof kernel for the display calculus D'.EAK")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every proof in a file against a calculus.
    Check {
        decls: PathBuf,
        proof: PathBuf,
        #[command(flatten)]
        calc: CalcOpts,
    },
    /// Remove every cut from a proof.
    Eliminate {
        decls: PathBuf,
        proof: PathBuf,
        /// Node budget for generated proof material.
        #[arg(long, env = FUEL_ENV, default_value_t = cutelim::DEFAULT_FUEL)]
        fuel: usize,
        /// Where to write the cut-free proof (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        calc: CalcOpts,
    },
    /// Test a calculus against the cut-elimination conditions.
    Lint {
        #[command(flatten)]
        calc: CalcOpts,
        /// Print the rule catalogue instead.
        #[arg(long)]
        list: bool,
    },
    /// Bounded model checking of sequents between formulas.
    Mc(McArgs),
    /// Work with the bundled derivations.
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct CalcOpts {
    #[arg(long, value_enum, default_value_t = CalcName::DeakPrime)]
    calculus: CalcName,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    classical: Switch,
}

#[derive(Clone, Copy, ValueEnum)]
enum CalcName {
    DeakPrime,
    DeakLegacy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl CalcOpts {
    fn build(&self, d: &Declarations) -> Calculus {
        let classical = self.classical == Switch::On;
        match self.calculus {
            CalcName::DeakPrime => builtin_deak_prime(d, classical),
            CalcName::DeakLegacy => builtin_deak_legacy(d, classical),
        }
    }
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("what").required(true).args(["seq", "axioms"])))]
struct McArgs {
    /// Declarations for the actions and agents mentioned.
    decls: Option<PathBuf>,
    /// A sequent `A |- B` between formulas.
    #[arg(long)]
    seq: Option<String>,
    /// Check the interaction axioms over the announcement pool.
    #[arg(long)]
    axioms: bool,
    /// Evaluate on this one model instead of enumerating.
    #[arg(long, conflicts_with = "axioms")]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    worlds: usize,
    #[arg(long, value_delimiter = ',', default_values_t = ["p".to_string(), "q".to_string()])]
    atoms: Vec<String>,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["verify", "list", "show"])))]
struct CorpusArgs {
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    list: bool,
    #[arg(long, value_name = "ID")]
    show: Option<String>,
    #[command(flatten)]
    calc: CalcOpts,
}

/// A command's failure, mapped to its exit code.
enum Fail {
    Usage(String),
    Check,
    Fuel(String),
}

type Outcome = Result<(), Fail>;

fn usage(e: impl std::fmt::Display) -> Fail {
    Fail::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Check { decls, proof, calc } => cmd_check(&decls, &proof, &calc),
        Cmd::Eliminate { decls, proof, fuel, out, calc } => cmd_eliminate(&decls, &proof, fuel, out.as_deref(), &calc),
        Cmd::Lint { calc, list } => cmd_lint(&calc, list),
        Cmd::Mc(a) => cmd_mc(&a),
        Cmd::Corpus(a) => cmd_corpus(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Check) => ExitCode::from(1),
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Fail::Fuel(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Reads a declarations file and binds the schematic letters named in
/// `# schematic: A=p B=q` header lines of `proof_text`.
fn load_decls(path: &Path, proof_text: &str) -> Result<Declarations, Fail> {
    let mut d = Declarations::parse(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    for line in proof_text.lines() {
        let Some(rest) = line.trim().strip_prefix('#') else { continue };
        let Some(("schematic", value)) = rest.split_once(':').map(|(k, v)| (k.trim(), v)) else { continue };
        for b in value.split_whitespace() {
            let (letter, text) = b.split_once('=').ok_or_else(|| usage(format!("bad schematic binding {b}")))?;
            let f = parse_formula(text, &d).map_err(usage)?;
            d = d.with_schematic(letter, f);
        }
    }
    Ok(d)
}

fn cmd_check(decls: &Path, proof: &Path, opts: &CalcOpts) -> Outcome {
    let text = read(proof)?;
    let d = load_decls(decls, &text)?;
    let proofs = parse_proofs(&text, &d).map_err(|e| usage(format!("{}: {e}", proof.display())))?;
    if proofs.is_empty() {
        return Err(usage(format!("{}: no proofs", proof.display())));
    }
    let calc = opts.build(&d);
    let mut ok = true;
    for (i, p) in proofs.iter().enumerate() {
        let rep = check(p, &calc);
        ok &= rep.is_ok();
        println!("proof #{} {}", i + 1, render(&p.conclusion, &d));
        print!("{rep}");
    }
    if ok {
        Ok(())
    } else {
        Err(Fail::Check)
    }
}

fn cmd_eliminate(decls: &Path, proof: &Path, fuel: usize, out: Option<&Path>, opts: &CalcOpts) -> Outcome {
    let text = read(proof)?;
    let d = load_decls(decls, &text)?;
    let tree = parse_proof_file(&text, &d).map_err(|e| usage(format!("{}: {e}", proof.display())))?;
    let calc = opts.build(&d);
    let rep = check(&tree, &calc);
    if !rep.is_ok() {
        print!("{rep}");
        return Err(Fail::Check);
    }
    let (body, stats) = if is_cut_free(&tree) {
        (text, None)
    } else {
        match cutelim::eliminate(&tree, &calc, fuel) {
            Ok((t, s)) => (render(&t, &d) + "\n", Some(s)),
            Err(e @ ElimError::FuelExhausted { .. }) => return Err(Fail::Fuel(e.to_string())),
            Err(e) => {
                println!("FAIL {e}");
                return Err(Fail::Check);
            }
        }
    };
    let stats = stats.map_or_else(|| "cut-free input, unchanged".to_string(), |s| s.to_string());
    match out {
        Some(path) => {
            fs::write(path, body).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            println!("{stats}");
        }
        None => {
            print!("{body}");
            eprintln!("{stats}");
        }
    }
    Ok(())
}

fn cmd_lint(opts: &CalcOpts, list: bool) -> Outcome {
    let calc = opts.build(&corpus::base_decls());
    if list {
        print!("{}", calc.list_table());
        return Ok(());
    }
    let rep = lint(&calc);
    print!("{rep}");
    if rep.quasi_proper() {
        Ok(())
    } else {
        Err(Fail::Check)
    }
}

fn atoms_of(f: &Formula, d: &Declarations, out: &mut BTreeSet<String>) {
    let mut labels = BTreeSet::new();
    f.action_labels(&mut labels);
    let pres = labels.iter().filter_map(|l| d.pre(l));
    for g in std::iter::once(f).chain(pres) {
        for s in g.subformulas() {
            if let Formula::Atom(p) = s {
                out.insert(p);
            }
        }
    }
}

fn cmd_mc(a: &McArgs) -> Outcome {
    let d = match &a.decls {
        Some(p) => Declarations::parse(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => Declarations::default(),
    };
    let mut agents: Vec<Agent> = d.agents.iter().cloned().collect();
    if agents.is_empty() {
        agents.push(Agent::new("a"));
    }
    let mut bounds = Bounds { max_worlds: a.worlds, atoms: a.atoms.clone(), agents };
    if a.axioms {
        let out = semantics::check_axioms(&bounds, &d).map_err(usage)?;
        let mut ok = true;
        for o in &out {
            match &o.failure {
                None => println!("{} VALID-UP-TO-BOUND instances={} models={}", o.schema, o.instances, o.models),
                Some((inst, v)) => {
                    ok = false;
                    println!("{} COUNTEREXAMPLE {inst}", o.schema);
                    if let Verdict::Counterexample { model, world } = v {
                        println!("  {} at {}", model.render(), model.worlds[*world]);
                    }
                }
            }
        }
        return if ok { Ok(()) } else { Err(Fail::Check) };
    }
    let text = a.seq.as_deref().expect("clap requires --seq or --axioms");
    let seq = parse_sequent(text, &d).map_err(usage)?;
    let (Some(ante), Some(cons)) = (seq.ante.as_formula(), seq.succ.as_formula()) else {
        return Err(usage("mc needs a formula on each side of the sequent"));
    };
    if let Some(path) = &a.model {
        let m = parse_model(&read(path)?, &d).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        return match semantics::counterexample_in(&m, ante, cons, &d).map_err(usage)? {
            None => {
                println!("VALID-IN-MODEL worlds={}", m.len());
                Ok(())
            }
            Some(w) => {
                println!("COUNTEREXAMPLE {} at {}", m.render(), m.worlds[w]);
                Err(Fail::Check)
            }
        };
    }
    let mut atoms: BTreeSet<String> = bounds.atoms.iter().cloned().collect();
    atoms_of(ante, &d, &mut atoms);
    atoms_of(cons, &d, &mut atoms);
    bounds.atoms = atoms.into_iter().collect();
    match semantics::valid_bounded(ante, cons, &bounds, &d).map_err(usage)? {
        Verdict::ValidUpToBound { models } => {
            println!(
                "VALID-UP-TO-BOUND worlds<={} atoms={} models={models}",
                bounds.max_worlds,
                bounds.atoms.join(",")
            );
            Ok(())
        }
        Verdict::Counterexample { model, world } => {
            println!("COUNTEREXAMPLE {} at {}", model.render(), model.worlds[world]);
            Err(Fail::Check)
        }
    }
}

fn cmd_corpus(a: &CorpusArgs) -> Outcome {
    if a.list {
        for e in corpus::list() {
            let tags: Vec<_> = e.tags.iter().map(|t| t.name()).collect();
            println!("{} [{}] {}", e.id, tags.join(","), e.source);
        }
        return Ok(());
    }
    if let Some(id) = &a.show {
        let e = corpus::get(id).map_err(usage)?;
        let d = e.decls().map_err(usage)?;
        println!("# {}", e.source);
        for p in e.proofs().map_err(usage)? {
            println!("{}", render(&p, &d));
        }
        return Ok(());
    }
    let rep = corpus::verify_all(&a.calc.build(&corpus::base_decls()));
    print!("{rep}");
    let parse_errors = rep.entries.iter().any(|e| matches!(e.result, Err(CorpusError::Parse { .. })));
    if parse_errors || !rep.all_passed() {
        Err(Fail::Check)
    } else {
        Ok(())
    }
}
