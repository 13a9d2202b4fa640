use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{EpistemicFormula, Formula, Interval, IntervalSet, StaticFormula, RESERVED_WORDS};

/// A syntax error at a 1-based line and column.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub found: String,
    pub expected: Vec<String>,
    pub message: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        if let Some(m) = &self.message {
            return write!(f, "{m} (found {})", self.found);
        }
        write!(f, "expected ")?;
        match self.expected.as_slice() {
            [one] => write!(f, "{one}")?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: [&str; 12] = ["->", "|>", "!", "&", "|", "(", ")", "[", "]", "{", "}", ","];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start_col = col;
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(text[start..i].to_owned()), line, column: start_col });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let frac = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == frac {
                    return Err(ParseError {
                        line,
                        column: start_col,
                        found: format!("`{}`", &text[start..i]),
                        expected: Vec::new(),
                        message: Some("malformed number".into()),
                    });
                }
            }
            col += i - start;
            let n: f64 = text[start..i].parse().expect("digits form a valid float");
            out.push(Token { tok: Tok::Num(n), line, column: start_col });
            continue;
        }
        match SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token { tok: Tok::Sym(s), line, column: start_col });
            }
            None => {
                let ch = text[i..].chars().next().expect("non-empty remainder");
                return Err(ParseError {
                    line,
                    column: start_col,
                    found: format!("`{ch}`"),
                    expected: Vec::new(),
                    message: Some("unexpected character".into()),
                });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            line: t.line,
            column: t.column,
            found: t.tok.to_string(),
            expected: expected.iter().map(|s| (*s).to_string()).collect(),
            message: None,
        }
    }

    fn error_msg(&self, msg: String) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, column: t.column, found: t.tok.to_string(), expected: Vec::new(), message: Some(msg) }
    }

    fn expect_sym(&mut self, s: &'static str) -> PResult<()> {
        if self.at_sym(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[s]))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        match *self.peek() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.error(&["number"])),
        }
    }

    // ---- epistemic level ----

    fn phi(&mut self) -> PResult<EpistemicFormula> {
        let left = self.phi1()?;
        if self.at_sym("->") {
            self.bump();
            let right = self.phi()?;
            return Ok(left.implies(right));
        }
        Ok(left)
    }

    fn phi1(&mut self) -> PResult<EpistemicFormula> {
        let mut left = self.phi2()?;
        while self.at_sym("|") {
            self.bump();
            left = left.or(self.phi2()?);
        }
        Ok(left)
    }

    fn phi2(&mut self) -> PResult<EpistemicFormula> {
        let mut left = self.phi3()?;
        while self.at_sym("&") {
            self.bump();
            left = left.and(self.phi3()?);
        }
        Ok(left)
    }

    fn phi3(&mut self) -> PResult<EpistemicFormula> {
        match self.peek().clone() {
            Tok::Sym("!") => {
                self.bump();
                Ok(self.phi3()?.not())
            }
            Tok::Ident(k) if (k == "K" || k == "L") && self.peek_at(1) == &Tok::Sym("[") => {
                self.bump();
                self.bump();
                let agent = self.ident("agent name")?;
                let eps = if self.at_sym(",") {
                    self.bump();
                    Some(self.number()?)
                } else {
                    None
                };
                self.expect_sym("]")?;
                let body = Box::new(self.phi3()?);
                Ok(if k == "K" {
                    EpistemicFormula::Know { agent, eps, body }
                } else {
                    EpistemicFormula::Possible { agent, eps, body }
                })
            }
            Tok::Ident(k) if k == "Pr" => {
                self.bump();
                let iset = self.iset()?;
                let psi = self.satom()?;
                Ok(EpistemicFormula::Prob(iset, psi))
            }
            Tok::Sym("(") => {
                let save = self.pos;
                self.bump();
                if let Ok(psi) = self.psi() {
                    if self.at_sym(")") && self.peek_at(1) == &Tok::Sym("|>") {
                        self.bump();
                        self.bump();
                        let body = self.phi3()?;
                        return Ok(EpistemicFormula::given(psi, body));
                    }
                }
                self.pos = save;
                self.bump();
                let inner = self.phi()?;
                self.expect_sym(")")?;
                Ok(inner)
            }
            _ => Err(self.error(&["`!`", "`K[`", "`L[`", "`Pr`", "`(`"])),
        }
    }

    fn iset(&mut self) -> PResult<IntervalSet> {
        let mut terms = Vec::new();
        self.term(&mut terms)?;
        while self.is_union() {
            self.bump();
            self.term(&mut terms)?;
        }
        IntervalSet::new(terms).map_err(|e| self.error_msg(e.to_string()))
    }

    /// `u` separates terms only when a term follows; otherwise it is an atom.
    fn is_union(&self) -> bool {
        if self.peek() != &Tok::Ident("u".into()) {
            return false;
        }
        match self.peek_at(1) {
            Tok::Sym("{") | Tok::Sym("[") => true,
            Tok::Sym("(") => matches!(self.peek_at(2), Tok::Num(_)),
            _ => false,
        }
    }

    fn term(&mut self, out: &mut Vec<Interval>) -> PResult<()> {
        match self.peek() {
            Tok::Sym("{") => {
                self.bump();
                if self.at_sym("}") {
                    self.bump();
                    return Ok(());
                }
                let p = self.number()?;
                self.expect_sym("}")?;
                out.push(Interval::point(p));
                Ok(())
            }
            Tok::Sym(open @ ("[" | "(")) => {
                let lo_open = *open == "(";
                self.bump();
                let lo = self.number()?;
                self.expect_sym(",")?;
                let hi = self.number()?;
                let hi_open = match self.peek() {
                    Tok::Sym("]") => false,
                    Tok::Sym(")") => true,
                    _ => return Err(self.error(&["`]`", "`)`"])),
                };
                self.bump();
                out.push(Interval { lo, lo_open, hi, hi_open });
                Ok(())
            }
            _ => Err(self.error(&["`{`", "`[`", "`(`"])),
        }
    }

    fn satom(&mut self) -> PResult<StaticFormula> {
        if self.at_sym("(") {
            self.bump();
            let p = self.psi()?;
            self.expect_sym(")")?;
            Ok(p)
        } else {
            self.atom()
        }
    }

    // ---- static level ----

    fn psi(&mut self) -> PResult<StaticFormula> {
        let left = self.psi1()?;
        if self.at_sym("->") {
            self.bump();
            let right = self.psi()?;
            return Ok(left.implies(right));
        }
        Ok(left)
    }

    fn psi1(&mut self) -> PResult<StaticFormula> {
        let mut left = self.psi2()?;
        while self.at_sym("|") {
            self.bump();
            left = left.or(self.psi2()?);
        }
        Ok(left)
    }

    fn psi2(&mut self) -> PResult<StaticFormula> {
        let mut left = self.psi3()?;
        while self.at_sym("&") {
            self.bump();
            left = left.and(self.psi3()?);
        }
        Ok(left)
    }

    fn psi3(&mut self) -> PResult<StaticFormula> {
        if self.at_sym("!") {
            self.bump();
            return Ok(self.psi3()?.not());
        }
        self.satom()
    }

    fn atom(&mut self) -> PResult<StaticFormula> {
        let predicate = match self.peek().clone() {
            Tok::Ident(s) if RESERVED_WORDS.contains(&s.as_str()) => {
                return Err(self.error_msg(format!("`{s}` is reserved and cannot name a predicate")));
            }
            Tok::Ident(s) => {
                self.bump();
                s
            }
            _ => return Err(self.error(&["predicate", "`!`", "`(`"])),
        };
        let mut args = Vec::new();
        if self.at_sym("(") {
            self.bump();
            if !self.at_sym(")") {
                args.push(self.ident("variable")?);
                while self.at_sym(",") {
                    self.bump();
                    args.push(self.ident("variable")?);
                }
            }
            self.expect_sym(")")?;
        }
        Ok(StaticFormula::Atom { predicate, args })
    }
}

fn parser(text: &str) -> PResult<Parser> {
    Ok(Parser { toks: lex(text)?, pos: 0 })
}

pub fn parse_epistemic(text: &str) -> Result<EpistemicFormula, ParseError> {
    let mut p = parser(text)?;
    let f = p.phi()?;
    p.expect_eof()?;
    Ok(f)
}

pub fn parse_static(text: &str) -> Result<StaticFormula, ParseError> {
    let mut p = parser(text)?;
    let f = p.psi()?;
    p.expect_eof()?;
    Ok(f)
}

/// Parses either level. Epistemic syntax is tried first; text that only
/// parses as a static formula comes back as [`Formula::Static`].
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    match parse_epistemic(text) {
        Ok(f) => Ok(Formula::Epistemic(f)),
        Err(e) => match parse_static(text) {
            Ok(s) => Ok(Formula::Static(s)),
            Err(_) => Err(e),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(p: &str, args: &[&str]) -> StaticFormula {
        StaticFormula::atom(p, args)
    }

    #[test]
    fn point_quantifier() {
        let f = parse_epistemic("Pr{0.5} heads(x)").unwrap();
        assert_eq!(f, EpistemicFormula::Prob(IntervalSet::closed(0.5, 0.5), atom("heads", &["x"])));
    }

    #[test]
    fn knowledge_with_half_open_interval() {
        let f = parse_epistemic("K[alice] (Pr(0.5,1] win(x))").unwrap();
        let iset = IntervalSet::new([Interval { lo: 0.5, lo_open: true, hi: 1.0, hi_open: false }]).unwrap();
        assert_eq!(f, EpistemicFormula::know("alice", None, EpistemicFormula::Prob(iset, atom("win", &["x"]))));
    }

    #[test]
    fn conditioning() {
        let f = parse_epistemic("(rain(x)) |> Pr[0.9,1] wet(y)").unwrap();
        assert_eq!(
            f,
            EpistemicFormula::given(
                atom("rain", &["x"]),
                EpistemicFormula::Prob(IntervalSet::closed(0.9, 1.0), atom("wet", &["y"]))
            )
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let p = || EpistemicFormula::top(atom("p", &[]));
        let f = parse_epistemic("Pr[0,1] p | Pr[0,1] p & Pr[0,1] p -> Pr[0,1] p -> Pr[0,1] p").unwrap();
        assert_eq!(f, p().or(p().and(p())).implies(p().implies(p())));
        let g = parse_epistemic("!K[a,0.05] L[b] Pr{0} p").unwrap();
        assert_eq!(
            g,
            EpistemicFormula::know("a", Some(0.05), EpistemicFormula::possible("b", None, EpistemicFormula::prob(IntervalSet::point(0.0), atom("p", &[]))))
                .not()
        );
    }

    #[test]
    fn union_versus_atom_named_u() {
        let f = parse_epistemic("Pr[0,0.25] u (0.75,1] u(x)").unwrap();
        let EpistemicFormula::Prob(iset, psi) = f else { panic!() };
        assert_eq!(iset.intervals().len(), 2);
        assert_eq!(psi, atom("u", &["x"]));
        let g = parse_epistemic("Pr{1} u").unwrap();
        assert_eq!(g, EpistemicFormula::prob(IntervalSet::point(1.0), atom("u", &[])));
    }

    #[test]
    fn static_sugar_desugars() {
        assert_eq!(parse_static("a | b").unwrap(), atom("a", &[]).not().and(atom("b", &[]).not()).not());
        assert_eq!(parse_static("a -> b").unwrap(), atom("a", &[]).and(atom("b", &[]).not()).not());
        assert!(matches!(parse("heads(x) & !heads(x)").unwrap(), Formula::Static(_)));
    }

    #[test]
    fn parenthesized_epistemic_after_static_attempt() {
        let f = parse_epistemic("(Pr{1} p) & ((q) |> Pr{0} p)").unwrap();
        assert!(matches!(f, EpistemicFormula::And(..)));
        let g = parse_epistemic("((p & q)) |> Pr{1} p").unwrap();
        assert!(matches!(g, EpistemicFormula::Given(..)));
    }

    #[test]
    fn errors_carry_position_and_expectations() {
        let e = parse_epistemic("Pr{0.5}\n  heads(x) &").unwrap_err();
        assert_eq!((e.line, e.column), (2, 13));
        assert!(e.expected.iter().any(|s| s == "`K[`"));
        let e = parse_epistemic("Pr[0.7,0.3] p").unwrap_err();
        assert!(e.message.is_some());
        let e = parse_epistemic("Pr{1} Pr").unwrap_err();
        assert!(e.message.unwrap().contains("reserved"));
        let e = parse_epistemic("K[a] Pr{1} p $").unwrap_err();
        assert_eq!(e.column, 14);
        assert!(parse_epistemic("Pr{1.} p").is_err());
        assert!(parse_epistemic("Pr{0.5} (K[a] Pr{1} p)").is_err());
    }

    #[test]
    fn empty_interval_term() {
        let f = parse_epistemic("Pr{} p").unwrap();
        assert_eq!(f, EpistemicFormula::prob(IntervalSet::empty(), atom("p", &[])));
    }
}
