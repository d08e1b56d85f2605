//! Standard deontic logic formulae and normative-system files.
//!
//! The concrete syntax is plain ASCII:
//!
//! ```text
//! atom      := [a-zA-Z_][a-zA-Z0-9_]*
//! unary     := '~' | 'box' | 'dia'
//! constants := 'top' | 'bot'
//! binary    := '&'  (tightest) > '|' > '->' (right associative, loosest)
//! ```
//!
//! A normative-system file holds one formula per line. Lines starting with
//! `#` and blank lines are skipped; a leading `global:` marks a formula that
//! must hold in every reachable world.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Name of the individual the knowledge base is built around. Atoms may not use it.
pub const RESERVED_INDIVIDUAL: &str = "a0";
/// Prefix of auxiliary concept names produced during clausification.
pub const AUX_PREFIX: &str = "_q";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Bot,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// Obligation.
    Box(Box<Formula>),
    /// Permission.
    Dia(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(f: Formula, g: Formula) -> Self {
        Formula::And(Box::new(f), Box::new(g))
    }

    pub fn or(f: Formula, g: Formula) -> Self {
        Formula::Or(Box::new(f), Box::new(g))
    }

    pub fn implies(f: Formula, g: Formula) -> Self {
        Formula::Implies(Box::new(f), Box::new(g))
    }

    pub fn boxed(f: Formula) -> Self {
        Formula::Box(Box::new(f))
    }

    pub fn dia(f: Formula) -> Self {
        Formula::Dia(Box::new(f))
    }

    /// Left-nested conjunction of `fs`; `top` when empty.
    pub fn conjunction(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().reduce(Formula::and).unwrap_or(Formula::Top)
    }

    /// Maximal nesting of `box`/`dia`.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Top | Formula::Bot | Formula::Atom(_) => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::And(f, g) | Formula::Or(f, g) | Formula::Implies(f, g) => {
                f.modal_depth().max(g.modal_depth())
            }
            Formula::Box(f) | Formula::Dia(f) => 1 + f.modal_depth(),
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top | Formula::Bot | Formula::Atom(_) => 1,
            Formula::Not(f) | Formula::Box(f) | Formula::Dia(f) => 1 + f.size(),
            Formula::And(f, g) | Formula::Or(f, g) | Formula::Implies(f, g) => {
                1 + f.size() + g.size()
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Top | Formula::Bot => {}
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f) | Formula::Box(f) | Formula::Dia(f) => f.collect_atoms(out),
            Formula::And(f, g) | Formula::Or(f, g) | Formula::Implies(f, g) => {
                f.collect_atoms(out);
                g.collect_atoms(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(_) | Formula::Box(_) | Formula::Dia(_) => 4,
            Formula::Top | Formula::Bot | Formula::Atom(_) => 5,
        }
    }
}

/// Wraps `f` in a negation without simplifying.
pub fn negate(f: &Formula) -> Formula {
    Formula::not(f.clone())
}

fn write_operand(f: &mut fmt::Formatter<'_>, sub: &Formula, min_prec: u8) -> fmt::Result {
    if sub.precedence() < min_prec {
        write!(f, "({sub})")
    } else {
        write!(f, "{sub}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("top"),
            Formula::Bot => f.write_str("bot"),
            Formula::Atom(a) => f.write_str(a),
            Formula::Not(g) => {
                f.write_str("~")?;
                write_operand(f, g, 4)
            }
            Formula::Box(g) => {
                f.write_str("box ")?;
                write_operand(f, g, 4)
            }
            Formula::Dia(g) => {
                f.write_str("dia ")?;
                write_operand(f, g, 4)
            }
            // & and | associate to the left
            Formula::And(a, b) => {
                write_operand(f, a, 3)?;
                f.write_str(" & ")?;
                write_operand(f, b, 4)
            }
            Formula::Or(a, b) => {
                write_operand(f, a, 2)?;
                f.write_str(" | ")?;
                write_operand(f, b, 3)
            }
            Formula::Implies(a, b) => {
                write_operand(f, a, 2)?;
                f.write_str(" -> ")?;
                write_operand(f, b, 1)
            }
        }
    }
}

pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormativeSystem {
    pub name: String,
    pub formulae: Vec<Formula>,
    /// Parallel to `formulae`: `true` when the formula holds in all reachable worlds.
    pub global: Vec<bool>,
}

impl NormativeSystem {
    pub fn new(name: impl Into<String>) -> Self {
        NormativeSystem {
            name: name.into(),
            formulae: Vec::new(),
            global: Vec::new(),
        }
    }

    pub fn from_formulae(name: impl Into<String>, formulae: Vec<Formula>) -> Self {
        let global = vec![false; formulae.len()];
        NormativeSystem {
            name: name.into(),
            formulae,
            global,
        }
    }

    pub fn push(&mut self, f: Formula, global: bool) {
        self.formulae.push(f);
        self.global.push(global);
    }

    pub fn len(&self) -> usize {
        self.formulae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulae.is_empty()
    }

    pub fn local_formulae(&self) -> impl Iterator<Item = &Formula> {
        self.iter().filter(|(_, g)| !g).map(|(f, _)| f)
    }

    pub fn global_formulae(&self) -> impl Iterator<Item = &Formula> {
        self.iter().filter(|(_, g)| *g).map(|(f, _)| f)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Formula, bool)> {
        self.formulae.iter().zip(self.global.iter().copied())
    }

    /// The system without its `index`-th formula (1-based). `None` when out of range.
    pub fn without(&self, index: usize) -> Option<NormativeSystem> {
        if index == 0 || index > self.len() {
            return None;
        }
        let mut out = self.clone();
        out.formulae.remove(index - 1);
        out.global.remove(index - 1);
        Some(out)
    }
}

impl fmt::Display for NormativeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (formula, global) in self.iter() {
            if global {
                f.write_str("global: ")?;
            }
            writeln!(f, "{formula}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}; expected {}", .expected.join(", "))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Tilde,
    Amp,
    Bar,
    Arrow,
    LParen,
    RParen,
    Box,
    Dia,
    Top,
    Bot,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("atom `{s}`"),
            Tok::Tilde => "`~`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Box => "`box`".into(),
            Tok::Dia => "`dia`".into(),
            Tok::Top => "`top`".into(),
            Tok::Bot => "`bot`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

const FORMULA_START: &[&str] = &["atom", "`~`", "`box`", "`dia`", "`top`", "`bot`", "`(`"];

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
}

fn lex(text: &str, line: usize, col_offset: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = text.char_indices().peekable();
    // columns are 1-based and counted in characters
    let col_of = |byte: usize| text[..byte].chars().count() + 1 + col_offset;
    while let Some(&(i, c)) = chars.peek() {
        let col = col_of(i);
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '~' => {
                chars.next();
                toks.push((Tok::Tilde, col));
            }
            '&' => {
                chars.next();
                toks.push((Tok::Amp, col));
            }
            '|' => {
                chars.next();
                toks.push((Tok::Bar, col));
            }
            '(' => {
                chars.next();
                toks.push((Tok::LParen, col));
            }
            ')' => {
                chars.next();
                toks.push((Tok::RParen, col));
            }
            '-' => {
                chars.next();
                match chars.peek() {
                    Some(&(_, '>')) => {
                        chars.next();
                        toks.push((Tok::Arrow, col));
                    }
                    _ => {
                        return Err(ParseError {
                            line,
                            column: col,
                            message: "dangling `-`".into(),
                            expected: vec!["`->`".into()],
                        })
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        end = j + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                let word = &text[start..end];
                let tok = match word {
                    "box" => Tok::Box,
                    "dia" => Tok::Dia,
                    "top" => Tok::Top,
                    "bot" => Tok::Bot,
                    _ => {
                        if word == RESERVED_INDIVIDUAL || word.starts_with(AUX_PREFIX) {
                            return Err(ParseError {
                                line,
                                column: col,
                                message: format!("atom name `{word}` is reserved"),
                                expected: vec!["atom".into()],
                            });
                        }
                        Tok::Ident(word.to_string())
                    }
                };
                toks.push((tok, col));
            }
            other => {
                return Err(ParseError {
                    line,
                    column: col,
                    message: format!("unexpected character {other:?}"),
                    expected: FORMULA_START.iter().map(|s| s.to_string()).collect(),
                })
            }
        }
    }
    toks.push((Tok::End, text.chars().count() + 1 + col_offset));
    Ok(toks)
}

impl Parser {
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

    fn error(&self, expected: &[&str]) -> ParseError {
        let (tok, col) = &self.toks[self.pos];
        ParseError {
            line: self.line,
            column: *col,
            message: format!("unexpected {}", tok.describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Box => {
                self.bump();
                Ok(Formula::boxed(self.unary()?))
            }
            Tok::Dia => {
                self.bump();
                Ok(Formula::dia(self.unary()?))
            }
            Tok::Top => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Bot => {
                self.bump();
                Ok(Formula::Bot)
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.implication()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(&["`)`", "`&`", "`|`", "`->`"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error(FORMULA_START)),
        }
    }
}

fn parse_at(text: &str, line: usize, col_offset: usize) -> Result<Formula, ParseError> {
    let toks = lex(text, line, col_offset)?;
    let mut p = Parser { toks, pos: 0, line };
    let f = p.implication()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["`&`", "`|`", "`->`", "end of input"]));
    }
    Ok(f)
}

/// Parses a single formula. Errors carry line 1 and a 1-based column.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_at(text, 1, 0)
}

/// Parses a normative-system file. An empty file is a valid, empty system.
pub fn parse_system(name: &str, text: &str) -> Result<NormativeSystem, ParseError> {
    let mut sys = NormativeSystem::new(name);
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let lead = raw.len() - trimmed.len();
        let (body, global, offset) = match trimmed.strip_prefix("global:") {
            Some(rest) => (rest, true, lead + "global:".len()),
            None => (trimmed, false, lead),
        };
        let col_offset = raw[..offset].chars().count();
        let f = parse_at(body, line, col_offset)?;
        sys.push(f, global);
    }
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(s: &str) -> Formula {
        Formula::atom(s)
    }

    #[test]
    fn parses_table_one_shapes() {
        assert_eq!(
            parse_formula("box ~s").unwrap(),
            Formula::boxed(Formula::not(atom("s")))
        );
        assert_eq!(
            parse_formula("s -> box p").unwrap(),
            Formula::implies(atom("s"), Formula::boxed(atom("p")))
        );
        assert_eq!(parse_formula("top").unwrap(), Formula::Top);
        assert_eq!(parse_formula("bot").unwrap(), Formula::Bot);
    }

    #[test]
    fn precedence_and_associativity() {
        // & binds tighter than |, which binds tighter than ->
        assert_eq!(
            parse_formula("a | b & c -> d").unwrap(),
            Formula::implies(
                Formula::or(atom("a"), Formula::and(atom("b"), atom("c"))),
                atom("d")
            )
        );
        assert_eq!(
            parse_formula("a -> b -> c").unwrap(),
            Formula::implies(atom("a"), Formula::implies(atom("b"), atom("c")))
        );
        assert_eq!(
            parse_formula("a & b & c").unwrap(),
            Formula::and(Formula::and(atom("a"), atom("b")), atom("c"))
        );
        assert_eq!(
            parse_formula("~box p & q").unwrap(),
            Formula::and(Formula::not(Formula::boxed(atom("p"))), atom("q"))
        );
        assert_eq!(
            parse_formula("box (s -> p)").unwrap(),
            Formula::boxed(Formula::implies(atom("s"), atom("p")))
        );
    }

    #[test]
    fn printer_matches_expected_text() {
        assert_eq!(
            print_formula(&Formula::boxed(Formula::not(atom("s")))),
            "box ~s"
        );
        assert_eq!(
            print_formula(&Formula::implies(atom("s"), Formula::boxed(atom("p")))),
            "s -> box p"
        );
        assert_eq!(
            print_formula(&Formula::dia(Formula::not(atom("q")))),
            "dia ~q"
        );
        assert_eq!(
            print_formula(&Formula::implies(
                Formula::implies(atom("a"), atom("b")),
                atom("c")
            )),
            "(a -> b) -> c"
        );
        assert_eq!(
            print_formula(&Formula::and(atom("a"), Formula::and(atom("b"), atom("c")))),
            "a & (b & c)"
        );
    }

    #[test]
    fn errors_are_located() {
        let e = parse_formula("s -> ").unwrap_err();
        assert_eq!((e.line, e.column), (1, 6));
        assert!(e.expected.iter().any(|x| x == "atom"));

        let e = parse_formula("(s & p").unwrap_err();
        assert_eq!(e.column, 7);
        assert!(e.expected.iter().any(|x| x == "`)`"));

        let e = parse_formula("s $ p").unwrap_err();
        assert_eq!(e.column, 3);

        let e = parse_formula("s - p").unwrap_err();
        assert_eq!(e.expected, vec!["`->`".to_string()]);

        let e = parse_formula("s p").unwrap_err();
        assert_eq!(e.column, 3);
    }

    #[test]
    fn reserved_names_rejected() {
        assert!(parse_formula("a0").is_err());
        assert!(parse_formula("_q3 & p").is_err());
        assert!(parse_formula("a01").is_ok());
    }

    #[test]
    fn system_files() {
        let text = "# N1\nbox ~s\ns\n\ns -> box p\nbox (~s -> ~p)\n";
        let sys = parse_system("n1", text).unwrap();
        assert_eq!(sys.len(), 4);
        assert!(sys.global.iter().all(|g| !g));
        assert_eq!(sys.formulae[1], atom("s"));

        let empty = parse_system("empty", "").unwrap();
        assert!(empty.is_empty());

        let g = parse_system("g", "global: box (~s -> ~p)").unwrap();
        assert_eq!(g.global, vec![true]);
        assert_eq!(g.formulae[0], parse_formula("box (~s -> ~p)").unwrap());
    }

    #[test]
    fn system_errors_carry_file_line() {
        let e = parse_system("bad", "s\n# c\nglobal: box (s\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.column, 15);
    }

    #[test]
    fn negate_does_not_simplify() {
        let f = parse_formula("box (s -> p)").unwrap();
        assert_eq!(negate(&f), Formula::not(f.clone()));
        assert_eq!(negate(&Formula::Top), Formula::not(Formula::Top));
        assert_eq!(negate(&atom("s")), Formula::not(atom("s")));
    }

    #[test]
    fn modal_depth_counts_nesting() {
        assert_eq!(parse_formula("p").unwrap().modal_depth(), 0);
        assert_eq!(parse_formula("box p & dia box q").unwrap().modal_depth(), 2);
    }

    #[test]
    fn without_removes_by_one_based_index() {
        let sys = parse_system("n", "a\nb\nc").unwrap();
        let rest = sys.without(2).unwrap();
        assert_eq!(rest.formulae, vec![atom("a"), atom("c")]);
        assert!(sys.without(0).is_none());
        assert!(sys.without(4).is_none());
    }
}
