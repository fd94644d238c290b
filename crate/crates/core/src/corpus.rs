//! Embedded worked derivations.
//!
//! Each entry is a text file under `data/corpus` holding a short header of
//! `# key: value` lines followed by one or more proofs in the parser's
//! s-expression format.  Recognised keys are `source`, `tags`, `expect`
//! (one line per proof, in order) and `schematic` (bindings such as
//! `A=p B=q` that turn schematic letters into fixed atoms).  All entries share
//! the declarations in `data/corpus/decls.deak`.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::calculus::Calculus;
use crate::parser::{parse_formula, parse_proofs, parse_sequent, Declarations, ParseError};
use crate::proofs::{check, is_cut_free, subformula_property, CheckReport, ProofTree};
use crate::syntax::Sequent;

/// Declarations shared by every corpus entry.
pub const DECLS: &str = include_str!("../data/corpus/decls.deak");

macro_rules! corpus_files {
    ($($id:literal),* $(,)?) => {
        &[$(($id, include_str!(concat!("../data/corpus/", $id, ".proof")))),*]
    };
}

const FILES: &[(&str, &str)] = corpus_files![
    "A.reduce-L",
    "A.reduce-R",
    "A.reverse-L",
    "A.reverse-R",
    "A.swap-in-L",
    "A.swap-in-R",
    "A.swap-out-L",
    "A.swap-out-R",
    "C.box-and",
    "C.box-atom",
    "C.box-bot",
    "C.box-box",
    "C.box-dia",
    "C.box-imp",
    "C.box-or",
    "C.box-top",
    "C.dia-and",
    "C.dia-atom",
    "C.dia-bot",
    "C.dia-box",
    "C.dia-dia",
    "C.dia-imp",
    "C.dia-or",
    "C.dia-top",
    "S2.display",
    "S6.bot-R",
    "S6.weakening",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    DerivedRule,
    Completeness,
    DisplayExample,
    CutReductionDemo,
}

impl Tag {
    pub fn name(self) -> &'static str {
        match self {
            Tag::DerivedRule => "derived-rule",
            Tag::Completeness => "completeness",
            Tag::DisplayExample => "display-example",
            Tag::CutReductionDemo => "cut-reduction-demo",
        }
    }

    fn parse(s: &str) -> Option<Tag> {
        [Tag::DerivedRule, Tag::Completeness, Tag::DisplayExample, Tag::CutReductionDemo]
            .into_iter()
            .find(|t| t.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("unknown-id {0}")]
    UnknownId(String),
    #[error("corpus entry {id}: bad header: {msg}")]
    Header { id: String, msg: String },
    #[error("corpus entry {id}: {err}")]
    Parse { id: String, err: ParseError },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: &'static str,
    pub source: String,
    pub tags: BTreeSet<Tag>,
    /// The whole file, header included.
    pub text: &'static str,
    /// Schematic letter bindings as written (`("A", "p")`).
    pub schematic: Vec<(String, String)>,
    /// Expected end sequents in source text, one per proof.
    pub expect: Vec<String>,
}

impl CorpusEntry {
    fn from_file(id: &'static str, text: &'static str) -> Result<Self, CorpusError> {
        let bad = |msg: String| CorpusError::Header { id: id.to_string(), msg };
        let mut source = None;
        let mut tags = BTreeSet::new();
        let mut schematic = Vec::new();
        let mut expect = Vec::new();
        for line in text.lines() {
            let Some(rest) = line.trim().strip_prefix('#') else { continue };
            let Some((key, value)) = rest.split_once(':') else { continue };
            let value = value.trim();
            match key.trim() {
                "source" => source = Some(value.to_string()),
                "tags" => {
                    for t in value.split_whitespace() {
                        tags.insert(Tag::parse(t).ok_or_else(|| bad(format!("unknown tag {t}")))?);
                    }
                }
                "schematic" => {
                    for b in value.split_whitespace() {
                        let (l, f) = b.split_once('=').ok_or_else(|| bad(format!("bad binding {b}")))?;
                        schematic.push((l.to_string(), f.to_string()));
                    }
                }
                "expect" => expect.push(value.to_string()),
                _ => {}
            }
        }
        let source = source.ok_or_else(|| bad("missing source".into()))?;
        if tags.is_empty() {
            return Err(bad("missing tags".into()));
        }
        Ok(CorpusEntry { id, source, tags, text, schematic, expect })
    }

    pub fn has_tag(&self, t: Tag) -> bool {
        self.tags.contains(&t)
    }

    /// The shared declarations with this entry's schematic letters bound.
    pub fn decls(&self) -> Result<Declarations, CorpusError> {
        let mut d = base_decls();
        for (letter, f) in &self.schematic {
            let f = parse_formula(f, &d).map_err(|err| CorpusError::Parse { id: self.id.into(), err })?;
            d = d.with_schematic(letter.clone(), f);
        }
        Ok(d)
    }

    pub fn proofs(&self) -> Result<Vec<ProofTree>, CorpusError> {
        let d = self.decls()?;
        parse_proofs(self.text, &d).map_err(|err| CorpusError::Parse { id: self.id.into(), err })
    }

    pub fn expected(&self) -> Result<Vec<Sequent>, CorpusError> {
        let d = self.decls()?;
        self.expect
            .iter()
            .map(|s| parse_sequent(s, &d).map_err(|err| CorpusError::Parse { id: self.id.into(), err }))
            .collect()
    }
}

impl CorpusEntry {
    /// For a two-way equivalence `L -||- R`: the cut of the proof of
    /// `L |- R` against the proof of `R |- L`, concluding `L |- L`.
    pub fn composed_cut(&self) -> Result<Option<ProofTree>, CorpusError> {
        let ps = self.proofs()?;
        let [a, b] = ps.as_slice() else { return Ok(None) };
        let (Some(_), true) = (a.conclusion.succ.as_formula(), a.conclusion.succ == b.conclusion.ante) else {
            return Ok(None);
        };
        let concl = Sequent::new(a.conclusion.ante.clone(), b.conclusion.succ.clone());
        Ok(Some(ProofTree::new("Cut", concl, vec![a.clone(), b.clone()])))
    }
}

/// The shared corpus declarations, without schematic bindings.
pub fn base_decls() -> Declarations {
    Declarations::parse(DECLS).expect("corpus declarations parse")
}

/// Every entry, sorted by id.
pub fn list() -> Vec<CorpusEntry> {
    FILES.iter().map(|(id, text)| CorpusEntry::from_file(id, text).expect("corpus headers are well formed")).collect()
}

pub fn get(id: &str) -> Result<CorpusEntry, CorpusError> {
    FILES
        .iter()
        .find(|(i, _)| *i == id)
        .ok_or_else(|| CorpusError::UnknownId(id.to_string()))
        .and_then(|(i, t)| CorpusEntry::from_file(i, t))
}

/// Result of checking one proof of an entry.
#[derive(Clone, Debug)]
pub struct ProofOutcome {
    pub report: CheckReport,
    pub expected: Sequent,
    pub conclusion: Sequent,
    pub cut_free: bool,
    pub subformula: bool,
    /// Names of Grishin rules used; nonempty means classical-only.
    pub classical_rules: BTreeSet<String>,
}

impl ProofOutcome {
    pub fn passed(&self) -> bool {
        self.report.is_ok() && self.conclusion == self.expected
    }
}

#[derive(Clone, Debug)]
pub struct EntryOutcome {
    pub id: &'static str,
    pub result: Result<Vec<ProofOutcome>, CorpusError>,
}

impl EntryOutcome {
    pub fn passed(&self) -> bool {
        matches!(&self.result, Ok(ps) if ps.iter().all(ProofOutcome::passed))
    }

    pub fn classical_only(&self) -> bool {
        matches!(&self.result, Ok(ps) if ps.iter().any(|p| !p.classical_rules.is_empty()))
    }
}

#[derive(Clone, Debug)]
pub struct CorpusReport {
    pub entries: Vec<EntryOutcome>,
}

impl CorpusReport {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| !e.passed()).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failures() == 0
    }
}

impl fmt::Display for CorpusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            match &e.result {
                Err(err) => writeln!(f, "FAIL {} {err}", e.id)?,
                Ok(ps) => {
                    for (i, p) in ps.iter().enumerate() {
                        let status = if p.passed() { "OK" } else { "FAIL" };
                        write!(f, "{status} {}#{} ", e.id, i + 1)?;
                        if let Some((path, why)) = &p.report.failure {
                            write!(f, "{} {why}", crate::proofs::node_path_text(path))?;
                        } else if p.conclusion != p.expected {
                            write!(f, "end-sequent {} expected {}", p.conclusion, p.expected)?;
                        } else {
                            write!(f, "nodes={}", p.report.nodes)?;
                            if !p.report.hypotheses.is_empty() {
                                write!(f, " hyps={}", p.report.hypotheses.len())?;
                            }
                            if !p.cut_free {
                                write!(f, " cuts")?;
                            }
                            if !p.classical_rules.is_empty() {
                                let names: Vec<_> = p.classical_rules.iter().cloned().collect();
                                write!(f, " classical={}", names.join(","))?;
                            }
                        }
                        writeln!(f)?;
                    }
                }
            }
        }
        writeln!(f, "{} entries, {} failures", self.entries.len(), self.failures())
    }
}

/// Checks one entry.  The calculus' own declarations are replaced by the
/// entry's (same actions and agents, plus schematic bindings) so that
/// schematic letters resolve.
pub fn verify(entry: &CorpusEntry, calc: &Calculus) -> Result<Vec<ProofOutcome>, CorpusError> {
    let mut calc = calc.clone();
    calc.decls = entry.decls()?;
    let proofs = entry.proofs()?;
    let expected = entry.expected()?;
    if proofs.len() != expected.len() {
        return Err(CorpusError::Header {
            id: entry.id.into(),
            msg: format!("{} proofs but {} expect lines", proofs.len(), expected.len()),
        });
    }
    Ok(proofs
        .iter()
        .zip(expected)
        .map(|(p, expected)| {
            let report = check(p, &calc);
            let expanded = report.proof.as_ref().unwrap_or(p);
            let classical_rules = expanded.rule_names().into_iter().filter(|r| r.starts_with("Gri_")).collect();
            ProofOutcome {
                cut_free: is_cut_free(expanded),
                subformula: subformula_property(expanded),
                conclusion: p.conclusion.clone(),
                expected,
                classical_rules,
                report,
            }
        })
        .collect())
}

/// Checks every entry, in parallel; the report is in id order.
pub fn verify_all(calc: &Calculus) -> CorpusReport {
    let entries = list().into_par_iter().map(|e| EntryOutcome { id: e.id, result: verify(&e, calc) }).collect();
    CorpusReport { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{builtin_deak_legacy, builtin_deak_prime};

    #[test]
    fn ids_are_unique_and_sorted() {
        let ids: Vec<_> = list().iter().map(|e| e.id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn unknown_id() {
        assert_eq!(get("bogus"), Err(CorpusError::UnknownId("bogus".into())));
    }

    #[test]
    fn minimum_content_present() {
        for id in [
            "A.reverse-L",
            "A.reverse-R",
            "A.reduce-L",
            "A.reduce-R",
            "A.swap-in-L",
            "A.swap-in-R",
            "A.swap-out-L",
            "A.swap-out-R",
            "S2.display",
            "S6.weakening",
            "S6.bot-R",
        ] {
            get(id).unwrap();
        }
        let completeness = list().into_iter().filter(|e| e.has_tag(Tag::Completeness)).count();
        assert_eq!(completeness, 16);
    }

    #[test]
    fn every_entry_checks_under_prime() {
        let calc = builtin_deak_prime(&base_decls(), true);
        let report = verify_all(&calc);
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn completeness_entries_are_closed_and_cut_free() {
        let calc = builtin_deak_prime(&base_decls(), true);
        for e in list().into_iter().filter(|e| e.has_tag(Tag::Completeness)) {
            for p in verify(&e, &calc).unwrap() {
                assert!(p.report.is_closed(), "{}", e.id);
                assert!(p.cut_free, "{}", e.id);
                assert!(p.subformula, "{}", e.id);
            }
        }
    }

    #[test]
    fn nothing_needs_grishin() {
        let calc = builtin_deak_prime(&base_decls(), false);
        let report = verify_all(&calc);
        assert!(report.all_passed(), "{report}");
        assert!(report.entries.iter().all(|e| !e.classical_only()));
    }

    #[test]
    fn legacy_calculus_lacks_the_new_rules() {
        let calc = builtin_deak_legacy(&base_decls(), true);
        let e = get("C.dia-atom").unwrap();
        let outcomes = verify(&e, &calc).unwrap();
        assert!(outcomes
            .iter()
            .all(|p| matches!(&p.report.failure, Some((_, crate::proofs::CheckFailure::UnknownRule(_))))));
    }
}
