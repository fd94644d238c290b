//! Schematic formulas and structures, and the small text notation used to
//! write the bundled rule tables.
//!
//! Sorts are fixed by spelling: `X Y Z W` are structure variables, `A B`
//! formula variables, `p q` atom variables, `a b` agent variables and
//! `alpha beta` action variables.  Two constructs exist only in patterns:
//! `Gamma S` / `Delta S` stand for a finite string of action proxies
//! (`{α_j}` or `{α_j}^`) in front of `S`, and `;(Y|alpha a)` stands for the
//! left-nested `Y ; ... ; Y` with one copy per `β` such that `α a β`.
//! `Pre[alpha]` is the precondition formula of the action bound to `alpha`.

use std::fmt;

use crate::parser::{lex, ParseError, SourceSpan, Tok};
use crate::syntax::{BinOp, Modality, SBin};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FPat {
    Meta(String),
    AtomMeta(String),
    Top,
    Bot,
    One(String),
    Pre(String),
    Bin(BinOp, Box<FPat>, Box<FPat>),
    Agent(Modality, String, Box<FPat>),
    Action(Modality, String, Box<FPat>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SPat {
    Meta(String),
    Fm(FPat),
    I,
    Bin(SBin, Box<SPat>, Box<SPat>),
    Agent(bool, String, Box<SPat>),
    Action(bool, String, Box<SPat>),
    Phi(String),
    ProxSeq(String, Box<SPat>),
    /// `;(Y|alpha a)`: structure variable, action variable, agent variable.
    SemiN(String, String, String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeqPat {
    pub ante: SPat,
    pub succ: SPat,
}

impl FPat {
    /// Pattern-level subterm test, used for the subformula condition.
    pub fn contains(&self, other: &FPat) -> bool {
        if self == other {
            return true;
        }
        match self {
            FPat::Bin(_, a, b) => a.contains(other) || b.contains(other),
            FPat::Agent(_, _, f) | FPat::Action(_, _, f) => f.contains(other),
            _ => false,
        }
    }

    /// True when every immediate argument is a variable, i.e. the pattern
    /// introduces exactly one connective.
    pub fn is_single_connective(&self) -> bool {
        let var = |f: &FPat| matches!(f, FPat::Meta(_) | FPat::AtomMeta(_));
        match self {
            FPat::Bin(_, a, b) => var(a) && var(b),
            FPat::Agent(_, _, f) | FPat::Action(_, _, f) => var(f),
            FPat::Top | FPat::Bot | FPat::One(_) => true,
            _ => false,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, FPat::Meta(_) | FPat::AtomMeta(_))
    }
}

impl SPat {
    /// Every formula pattern occurring as a structure leaf, left to right.
    pub fn formula_leaves(&self) -> Vec<&FPat> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a FPat>) {
        match self {
            SPat::Fm(f) => out.push(f),
            SPat::Bin(_, a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            SPat::Agent(_, _, s) | SPat::Action(_, _, s) | SPat::ProxSeq(_, s) => s.collect_leaves(out),
            _ => {}
        }
    }

    pub fn contains_semi_n(&self) -> bool {
        match self {
            SPat::SemiN(..) => true,
            SPat::Bin(_, a, b) => a.contains_semi_n() || b.contains_semi_n(),
            SPat::Agent(_, _, s) | SPat::Action(_, _, s) | SPat::ProxSeq(_, s) => s.contains_semi_n(),
            _ => false,
        }
    }

    /// True when no structure variable (including `;(Y|..)`) occurs.
    pub fn is_closed(&self) -> bool {
        match self {
            SPat::Meta(_) | SPat::SemiN(..) => false,
            SPat::Bin(_, a, b) => a.is_closed() && b.is_closed(),
            SPat::Agent(_, _, s) | SPat::Action(_, _, s) | SPat::ProxSeq(_, s) => s.is_closed(),
            _ => true,
        }
    }
}

impl SeqPat {
    pub fn sides(&self) -> [&SPat; 2] {
        [&self.ante, &self.succ]
    }
}

/// Parses one sequent pattern in the rule notation.
pub fn parse_seq_pat(text: &str) -> Result<SeqPat, ParseError> {
    let mut p = PatParser::new(text, 0, text.len())?;
    let ante = p.structure()?;
    p.expect(&Tok::Turnstile)?;
    let succ = p.structure()?;
    p.eof()?;
    Ok(SeqPat { ante, succ })
}

pub fn parse_fpat(text: &str) -> Result<FPat, ParseError> {
    let mut p = PatParser::new(text, 0, text.len())?;
    let f = p.formula()?;
    p.eof()?;
    Ok(f)
}

enum Var {
    Agent(String),
    Action(String),
}

fn classify(name: &str) -> Option<Var> {
    match name {
        "a" | "b" => Some(Var::Agent(name.into())),
        "alpha" | "beta" => Some(Var::Action(name.into())),
        _ => None,
    }
}

struct PatParser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl<'a> PatParser<'a> {
    fn new(src: &'a str, start: usize, end: usize) -> Result<Self, ParseError> {
        Ok(PatParser { src, toks: lex(src, start, end)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: &str) -> Result<T, ParseError> {
        let (_, s, e) = self.toks[self.pos];
        Err(ParseError::Syntax {
            span: SourceSpan::locate(self.src, s, e),
            msg: format!("{msg} (found {})", self.peek()),
        })
    }

    fn expect(&mut self, t: &Tok) -> Result<(), ParseError> {
        if self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(&format!("expected {t}"))
        }
    }

    fn eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.fail("trailing input")
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            _ => {
                self.pos -= 1;
                self.fail("expected an identifier")
            }
        }
    }

    fn var(&mut self) -> Result<Var, ParseError> {
        let name = self.ident()?;
        match classify(&name) {
            Some(v) => Ok(v),
            None => {
                self.pos -= 1;
                self.fail("expected an agent or action variable")
            }
        }
    }

    fn action_var(&mut self) -> Result<String, ParseError> {
        match self.var()? {
            Var::Action(s) => Ok(s),
            Var::Agent(_) => self.fail("expected an action variable"),
        }
    }

    fn caret(&mut self) -> bool {
        if *self.peek() == Tok::Caret {
            self.bump();
            true
        } else {
            false
        }
    }

    fn formula(&mut self) -> Result<FPat, ParseError> {
        let lhs = self.disj()?;
        let op = match self.peek() {
            Tok::Arrow => BinOp::Imp,
            Tok::LArrow => BinOp::LImp,
            Tok::CoArrow => BinOp::CoImp,
            Tok::LCoArrow => BinOp::LCoImp,
            _ => return Ok(lhs),
        };
        self.bump();
        Ok(FPat::Bin(op, Box::new(lhs), Box::new(self.formula()?)))
    }

    fn disj(&mut self) -> Result<FPat, ParseError> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            f = FPat::Bin(BinOp::Or, Box::new(f), Box::new(self.conj()?));
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<FPat, ParseError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            f = FPat::Bin(BinOp::And, Box::new(f), Box::new(self.unary()?));
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<FPat, ParseError> {
        match self.peek().clone() {
            Tok::Lt | Tok::LBrack => {
                let dia = *self.peek() == Tok::Lt;
                self.bump();
                let v = self.var()?;
                self.expect(if dia { &Tok::Gt } else { &Tok::RBrack })?;
                let m = match (dia, self.caret()) {
                    (true, false) => Modality::Dia,
                    (false, false) => Modality::Box,
                    (true, true) => Modality::AdjDia,
                    (false, true) => Modality::AdjBox,
                };
                let body = Box::new(self.unary()?);
                Ok(match v {
                    Var::Agent(a) => FPat::Agent(m, a, body),
                    Var::Action(a) => FPat::Action(m, a, body),
                })
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            _ => match self.leaf()? {
                Some(f) => Ok(f),
                None => self.fail("expected a formula pattern"),
            },
        }
    }

    fn leaf(&mut self) -> Result<Option<FPat>, ParseError> {
        let t = self.peek().clone();
        let f = match t {
            Tok::One => {
                self.bump();
                self.expect(&Tok::LBrack)?;
                let v = self.action_var()?;
                self.expect(&Tok::RBrack)?;
                FPat::One(v)
            }
            Tok::Ident(s) => match s.as_str() {
                "T" => {
                    self.bump();
                    FPat::Top
                }
                "F" => {
                    self.bump();
                    FPat::Bot
                }
                "A" | "B" => {
                    self.bump();
                    FPat::Meta(s)
                }
                "p" | "q" => {
                    self.bump();
                    FPat::AtomMeta(s)
                }
                "Pre" => {
                    self.bump();
                    self.expect(&Tok::LBrack)?;
                    let v = self.action_var()?;
                    self.expect(&Tok::RBrack)?;
                    FPat::Pre(v)
                }
                _ => return Ok(None),
            },
            _ => return Ok(None),
        };
        Ok(Some(f))
    }

    fn structure(&mut self) -> Result<SPat, ParseError> {
        let lhs = self.semi()?;
        let op = match self.peek() {
            Tok::Gt => SBin::Gt,
            Tok::Lt => SBin::Lt,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.semi()?;
        Ok(SPat::Bin(op, Box::new(lhs), Box::new(rhs)))
    }

    fn semi(&mut self) -> Result<SPat, ParseError> {
        let mut s = self.sunary()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            s = SPat::Bin(SBin::Semi, Box::new(s), Box::new(self.sunary()?));
        }
        Ok(s)
    }

    fn sunary(&mut self) -> Result<SPat, ParseError> {
        match self.peek().clone() {
            Tok::LBrace => {
                self.bump();
                let v = self.var()?;
                self.expect(&Tok::RBrace)?;
                let adj = self.caret();
                let body = Box::new(self.sunary()?);
                Ok(match v {
                    Var::Agent(a) => SPat::Agent(adj, a, body),
                    Var::Action(a) => SPat::Action(adj, a, body),
                })
            }
            Tok::LParen => {
                self.bump();
                let s = self.structure()?;
                self.expect(&Tok::RParen)?;
                Ok(s)
            }
            Tok::Semi => {
                self.bump();
                self.expect(&Tok::LParen)?;
                let y = self.ident()?;
                self.expect(&Tok::Bar)?;
                let alpha = self.action_var()?;
                let agent = match self.var()? {
                    Var::Agent(a) => a,
                    Var::Action(_) => return self.fail("expected an agent variable"),
                };
                self.expect(&Tok::RParen)?;
                Ok(SPat::SemiN(y, alpha, agent))
            }
            Tok::Quote(s, e) => {
                self.bump();
                let mut inner = PatParser::new(self.src, s, e)?;
                let f = inner.formula()?;
                inner.eof()?;
                Ok(SPat::Fm(f))
            }
            Tok::Ident(s) => match s.as_str() {
                "X" | "Y" | "Z" | "W" => {
                    self.bump();
                    Ok(SPat::Meta(s))
                }
                "I" => {
                    self.bump();
                    Ok(SPat::I)
                }
                "Phi" => {
                    self.bump();
                    self.expect(&Tok::LBrack)?;
                    let v = self.action_var()?;
                    self.expect(&Tok::RBrack)?;
                    Ok(SPat::Phi(v))
                }
                "Gamma" | "Delta" => {
                    self.bump();
                    Ok(SPat::ProxSeq(s, Box::new(self.sunary()?)))
                }
                _ => match self.leaf()? {
                    Some(f) => Ok(SPat::Fm(f)),
                    None => self.fail("expected a structure pattern"),
                },
            },
            _ => match self.leaf()? {
                Some(f) => Ok(SPat::Fm(f)),
                None => self.fail("expected a structure pattern"),
            },
        }
    }
}

fn write_fpat(f: &FPat, level: u8, out: &mut String) {
    let (mine, lmin, rmin, sym) = match f {
        FPat::Bin(op, _, _) => match op {
            BinOp::And => (3, 3, 4, " & "),
            BinOp::Or => (2, 2, 3, " | "),
            BinOp::Imp => (1, 2, 1, " -> "),
            BinOp::LImp => (1, 2, 1, " <- "),
            BinOp::CoImp => (1, 2, 1, " *> "),
            BinOp::LCoImp => (1, 2, 1, " <* "),
        },
        _ => (4, 0, 0, ""),
    };
    if mine < level {
        out.push('(');
    }
    match f {
        FPat::Meta(s) | FPat::AtomMeta(s) => out.push_str(s),
        FPat::Top => out.push('T'),
        FPat::Bot => out.push('F'),
        FPat::One(v) => out.push_str(&format!("1[{v}]")),
        FPat::Pre(v) => out.push_str(&format!("Pre[{v}]")),
        FPat::Bin(_, a, b) => {
            write_fpat(a, lmin, out);
            out.push_str(sym);
            write_fpat(b, rmin, out);
        }
        FPat::Agent(m, v, b) | FPat::Action(m, v, b) => {
            out.push_str(&match m {
                Modality::Dia => format!("<{v}>"),
                Modality::Box => format!("[{v}]"),
                Modality::AdjDia => format!("<{v}>^"),
                Modality::AdjBox => format!("[{v}]^"),
            });
            write_fpat(b, 4, out);
        }
    }
    if mine < level {
        out.push(')');
    }
}

fn write_spat(s: &SPat, level: u8, out: &mut String) {
    match s {
        SPat::Meta(m) => out.push_str(m),
        SPat::Fm(f) if f.is_var() || matches!(f, FPat::Top | FPat::Bot | FPat::One(_) | FPat::Pre(_)) => {
            write_fpat(f, 0, out)
        }
        SPat::Fm(f) => {
            out.push('\'');
            write_fpat(f, 0, out);
            out.push('\'');
        }
        SPat::I => out.push('I'),
        SPat::Phi(v) => out.push_str(&format!("Phi[{v}]")),
        SPat::Bin(op, a, b) => {
            let (mine, lmin, rmin, sym) = match op {
                SBin::Semi => (2, 2, 3, " ; "),
                SBin::Gt => (1, 2, 2, " > "),
                SBin::Lt => (1, 2, 2, " < "),
            };
            if mine < level {
                out.push('(');
            }
            write_spat(a, lmin, out);
            out.push_str(sym);
            write_spat(b, rmin, out);
            if mine < level {
                out.push(')');
            }
        }
        SPat::Agent(adj, v, b) | SPat::Action(adj, v, b) => {
            out.push_str(&format!("{{{v}}}{}", if *adj { "^" } else { "" }));
            write_spat(b, 3, out);
        }
        SPat::ProxSeq(n, b) => {
            out.push_str(n);
            out.push(' ');
            write_spat(b, 3, out);
        }
        SPat::SemiN(y, alpha, a) => out.push_str(&format!(";({y}|{alpha} {a})")),
    }
}

impl fmt::Display for FPat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_fpat(self, 0, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for SPat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_spat(self, 0, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for SeqPat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {}", self.ante, self.succ)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rule_notation() {
        let p = parse_seq_pat("Phi[alpha] ; {a}{beta}X |- Y").unwrap();
        assert_eq!(p.to_string(), "Phi[alpha] ; {a}{beta}X |- Y");
        let q = parse_seq_pat("{alpha}{a}X |- ;(Y|alpha a)").unwrap();
        assert!(q.succ.contains_semi_n());
        let r = parse_seq_pat("Gamma p |- Delta p").unwrap();
        assert!(matches!(r.ante, SPat::ProxSeq(..)));
        let s = parse_seq_pat("X ; Y |- 'A & B'").unwrap();
        assert_eq!(s.succ, SPat::Fm(parse_fpat("A & B").unwrap()));
        let t = parse_seq_pat("Pre[alpha] ; {alpha}A |- X").unwrap();
        assert_eq!(t.ante.formula_leaves().len(), 2);
    }

    #[test]
    fn rejects_unknown_variables() {
        assert!(parse_seq_pat("{c}X |- Y").is_err());
        assert!(parse_seq_pat("V |- Y").is_err());
    }

    #[test]
    fn subterm_and_shape() {
        let f = parse_fpat("<alpha>(A -> B)").unwrap();
        assert!(f.contains(&FPat::Meta("B".into())));
        assert!(!f.contains(&FPat::Pre("alpha".into())));
        assert!(!f.is_single_connective());
        assert!(parse_fpat("[a]^A").unwrap().is_single_connective());
    }
}
