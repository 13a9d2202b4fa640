//! Static and epistemic formulas.
//!
//! Concrete syntax, loosest binding first:
//!
//! ```text
//! phi  := phi1 ["->" phi]
//! phi1 := phi2 {"|" phi2}
//! phi2 := phi3 {"&" phi3}
//! phi3 := "!" phi3
//!       | "K[" AGENT ["," NUM] "]" phi3      knowledge
//!       | "L[" AGENT ["," NUM] "]" phi3      possibility, !K[a]!phi
//!       | "Pr" iset satom                    probability quantifier
//!       | "(" psi ")" "|>" phi3              conditioning
//!       | "(" phi ")"
//! iset := term {"u" term}
//! term := "{" NUM "}" | "{" "}" | ("[" | "(") NUM "," NUM ("]" | ")")
//! satom := ATOM | "(" psi ")"
//! ATOM := IDENT ["(" [IDENT {"," IDENT}] ")"]
//! ```
//!
//! Static formulas `psi` use the same `->`, `|`, `&`, `!` and parentheses,
//! and are desugared to `!`/`&` while parsing. `Pr` is reserved.

mod interval;
mod parse;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use interval::{Interval, IntervalError, IntervalSet};
pub use parse::{parse, parse_epistemic, parse_static, ParseError};

pub(crate) const RESERVED_WORDS: [&str; 1] = ["Pr"];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A propositional formula over atoms `γ(x1, …, xn)`, evaluated at a state.
#[derive(Clone, Debug, PartialEq)]
pub enum StaticFormula {
    Atom { predicate: String, args: Vec<String> },
    Not(Box<StaticFormula>),
    And(Box<StaticFormula>, Box<StaticFormula>),
}

impl StaticFormula {
    pub fn atom(predicate: &str, args: &[&str]) -> Self {
        StaticFormula::Atom { predicate: predicate.into(), args: args.iter().map(|a| String::from(*a)).collect() }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        StaticFormula::Not(Box::new(self))
    }

    pub fn and(self, other: Self) -> Self {
        StaticFormula::And(Box::new(self), Box::new(other))
    }

    /// `!(!a & !b)`
    pub fn or(self, other: Self) -> Self {
        self.not().and(other.not()).not()
    }

    /// `!(a & !b)`
    pub fn implies(self, other: Self) -> Self {
        self.and(other.not()).not()
    }
}

/// A formula evaluated at a world. `Or`, `Imp` and `Possible` are sugar,
/// kept so the printed form matches what was written.
#[derive(Clone, Debug, PartialEq)]
pub enum EpistemicFormula {
    Prob(IntervalSet, StaticFormula),
    Not(Box<EpistemicFormula>),
    And(Box<EpistemicFormula>, Box<EpistemicFormula>),
    Or(Box<EpistemicFormula>, Box<EpistemicFormula>),
    Imp(Box<EpistemicFormula>, Box<EpistemicFormula>),
    Given(StaticFormula, Box<EpistemicFormula>),
    Know { agent: String, eps: Option<f64>, body: Box<EpistemicFormula> },
    Possible { agent: String, eps: Option<f64>, body: Box<EpistemicFormula> },
}

impl EpistemicFormula {
    pub fn prob(iset: IntervalSet, psi: StaticFormula) -> Self {
        EpistemicFormula::Prob(iset, psi)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        EpistemicFormula::Not(Box::new(self))
    }

    pub fn and(self, other: Self) -> Self {
        EpistemicFormula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Self) -> Self {
        EpistemicFormula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Self) -> Self {
        EpistemicFormula::Imp(Box::new(self), Box::new(other))
    }

    pub fn given(psi: StaticFormula, body: Self) -> Self {
        EpistemicFormula::Given(psi, Box::new(body))
    }

    pub fn know(agent: &str, eps: Option<f64>, body: Self) -> Self {
        EpistemicFormula::Know { agent: agent.into(), eps, body: Box::new(body) }
    }

    pub fn possible(agent: &str, eps: Option<f64>, body: Self) -> Self {
        EpistemicFormula::Possible { agent: agent.into(), eps, body: Box::new(body) }
    }

    /// `(a -> b) & (b -> a)`
    pub fn iff(self, other: Self) -> Self {
        self.clone().implies(other.clone()).and(other.implies(self))
    }

    /// A formula true at every world: `Pr[0,1] psi`.
    pub fn top(psi: StaticFormula) -> Self {
        EpistemicFormula::Prob(IntervalSet::full(), psi)
    }

    /// Eliminates `Or`, `Imp` and `Possible`:
    /// `a | b = !(!a & !b)`, `a -> b = !a | b`, `L[a] p = !K[a] !p`.
    pub fn desugar(&self) -> EpistemicFormula {
        use EpistemicFormula::*;
        match self {
            Prob(i, p) => Prob(i.clone(), p.clone()),
            Not(a) => a.desugar().not(),
            And(a, b) => a.desugar().and(b.desugar()),
            Or(a, b) => a.desugar().not().and(b.desugar().not()).not(),
            Imp(a, b) => a.desugar().not().not().and(b.desugar().not()).not(),
            Given(p, a) => EpistemicFormula::given(p.clone(), a.desugar()),
            Know { agent, eps, body } => Know { agent: agent.clone(), eps: *eps, body: Box::new(body.desugar()) },
            Possible { agent, eps, body } => {
                EpistemicFormula::know(agent, *eps, body.desugar().not()).not()
            }
        }
    }

    /// Number of AST nodes, counting each static operand as one node.
    pub fn size(&self) -> usize {
        use EpistemicFormula::*;
        match self {
            Prob(..) => 1,
            Not(a) => 1 + a.size(),
            And(a, b) | Or(a, b) | Imp(a, b) => 1 + a.size() + b.size(),
            Given(_, a) => 1 + a.size(),
            Know { body, .. } | Possible { body, .. } => 1 + body.size(),
        }
    }
}

/// Either level of the language.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Static(StaticFormula),
    Epistemic(EpistemicFormula),
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Static(p) => p.fmt(f),
            Formula::Epistemic(p) => p.fmt(f),
        }
    }
}

const PREC_IMP: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_PREFIX: u8 = 4;

fn static_prec(p: &StaticFormula) -> u8 {
    match p {
        StaticFormula::And(..) => PREC_AND,
        _ => PREC_PREFIX,
    }
}

fn write_static(f: &mut fmt::Formatter<'_>, p: &StaticFormula, min: u8) -> fmt::Result {
    if static_prec(p) < min {
        f.write_str("(")?;
        write_static(f, p, 0)?;
        return f.write_str(")");
    }
    match p {
        StaticFormula::Atom { predicate, args } => {
            f.write_str(predicate)?;
            if !args.is_empty() {
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(a)?;
                }
                f.write_str(")")?;
            }
            Ok(())
        }
        StaticFormula::Not(a) => {
            f.write_str("!")?;
            write_static(f, a, PREC_PREFIX)
        }
        StaticFormula::And(a, b) => {
            write_static(f, a, PREC_AND)?;
            f.write_str(" & ")?;
            write_static(f, b, PREC_PREFIX)
        }
    }
}

impl fmt::Display for StaticFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_static(f, self, 0)
    }
}

fn epistemic_prec(p: &EpistemicFormula) -> u8 {
    match p {
        EpistemicFormula::Imp(..) => PREC_IMP,
        EpistemicFormula::Or(..) => PREC_OR,
        EpistemicFormula::And(..) => PREC_AND,
        _ => PREC_PREFIX,
    }
}

fn write_modal(f: &mut fmt::Formatter<'_>, op: char, agent: &str, eps: Option<f64>) -> fmt::Result {
    match eps {
        Some(e) => write!(f, "{op}[{agent},{e}] "),
        None => write!(f, "{op}[{agent}] "),
    }
}

fn write_epistemic(f: &mut fmt::Formatter<'_>, p: &EpistemicFormula, min: u8) -> fmt::Result {
    use EpistemicFormula::*;
    if epistemic_prec(p) < min {
        f.write_str("(")?;
        write_epistemic(f, p, 0)?;
        return f.write_str(")");
    }
    match p {
        Prob(iset, psi) => {
            write!(f, "Pr{iset} ")?;
            match psi {
                StaticFormula::Atom { .. } => write_static(f, psi, 0),
                _ => write!(f, "({psi})"),
            }
        }
        Not(a) => {
            f.write_str("!")?;
            write_epistemic(f, a, PREC_PREFIX)
        }
        And(a, b) => {
            write_epistemic(f, a, PREC_AND)?;
            f.write_str(" & ")?;
            write_epistemic(f, b, PREC_PREFIX)
        }
        Or(a, b) => {
            write_epistemic(f, a, PREC_OR)?;
            f.write_str(" | ")?;
            write_epistemic(f, b, PREC_AND)
        }
        Imp(a, b) => {
            write_epistemic(f, a, PREC_OR)?;
            f.write_str(" -> ")?;
            write_epistemic(f, b, PREC_IMP)
        }
        Given(psi, body) => {
            write!(f, "({psi}) |> ")?;
            write_epistemic(f, body, PREC_PREFIX)
        }
        Know { agent, eps, body } => {
            write_modal(f, 'K', agent, *eps)?;
            write_epistemic(f, body, PREC_PREFIX)
        }
        Possible { agent, eps, body } => {
            write_modal(f, 'L', agent, *eps)?;
            write_epistemic(f, body, PREC_PREFIX)
        }
    }
}

impl fmt::Display for EpistemicFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_epistemic(f, self, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    #[test]
    fn pretty_canonical_forms() {
        let f = EpistemicFormula::prob(IntervalSet::point(0.4), StaticFormula::atom("heads", &["x"]));
        assert_eq!(format!("{f}"), "Pr{0.4} heads(x)");
        let g = EpistemicFormula::know(
            "a",
            Some(0.05),
            EpistemicFormula::prob(IntervalSet::point(0.0), StaticFormula::atom("p", &[])).not(),
        );
        assert_eq!(format!("{g}"), "K[a,0.05] !Pr{0} p");
    }

    #[test]
    fn pretty_parenthesizes_by_precedence() {
        let p = || EpistemicFormula::top(StaticFormula::atom("p", &[]));
        let f = p().or(p()).and(p());
        assert_eq!(format!("{f}"), "(Pr[0,1] p | Pr[0,1] p) & Pr[0,1] p");
        let g = p().implies(p()).implies(p());
        assert_eq!(format!("{g}"), "(Pr[0,1] p -> Pr[0,1] p) -> Pr[0,1] p");
        let h = p().implies(p().implies(p()));
        assert_eq!(format!("{h}"), "Pr[0,1] p -> Pr[0,1] p -> Pr[0,1] p");
        let k = EpistemicFormula::know("a", None, p().and(p()));
        assert_eq!(format!("{k}"), "K[a] (Pr[0,1] p & Pr[0,1] p)");
    }

    #[test]
    fn desugaring_shapes() {
        let p = EpistemicFormula::top(StaticFormula::atom("p", &[]));
        let l = EpistemicFormula::possible("a", None, p.clone()).desugar();
        assert_eq!(l, EpistemicFormula::know("a", None, p.clone().not()).not());
        let o = p.clone().or(p.clone()).desugar();
        assert_eq!(o, p.clone().not().and(p.clone().not()).not());
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("heads"));
        assert!(is_identifier("_x1"));
        assert!(!is_identifier("1x"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("a-b"));
    }
}
