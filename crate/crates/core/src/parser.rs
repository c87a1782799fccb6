//! Parser for the clause syntax used by `.lp` files.
//!
//! ```text
//! program := { clause }
//! clause  := atom [ ":-" literal { "," literal } ] "."
//! literal := [ "not" ] atom
//! atom    := lident [ "(" term { "," term } ")" ]
//! term    := uident | lident [ "(" term { "," term } ")" ]
//! ```
//!
//! `%` starts a comment running to the end of the line. Numerals such as `0`
//! are accepted wherever a lowercase identifier may name a function symbol.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::syntax::{Atom, Clause, Literal, Program, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    /// Lowercase-initial identifier.
    Lower(String),
    /// Digit-initial identifier.
    Numeral(String),
    /// Uppercase-initial identifier.
    Upper(String),
    LParen,
    RParen,
    Comma,
    Period,
    Neck,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Lower(s) | Tok::Numeral(s) | Tok::Upper(s) => format!("`{s}`"),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Period => "`.`".to_string(),
            Tok::Neck => "`:-`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, column);
        let mut bump = |chars: &mut core::iter::Peekable<core::str::Chars<'_>>| {
            let ch = chars.next();
            if ch == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            ch
        };
        match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            '(' | ')' | ',' | '.' => {
                bump(&mut chars);
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    _ => Tok::Period,
                };
                out.push(Spanned { tok, line: tl, column: tc });
            }
            ':' => {
                bump(&mut chars);
                if chars.peek() == Some(&'-') {
                    bump(&mut chars);
                    out.push(Spanned { tok: Tok::Neck, line: tl, column: tc });
                } else {
                    return Err(Error::Syntax {
                        line: tl,
                        column: tc,
                        message: "expected `:-`".to_string(),
                    });
                }
            }
            c if c.is_ascii_alphanumeric() => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                let tok = if c.is_ascii_lowercase() {
                    Tok::Lower(ident)
                } else if c.is_ascii_uppercase() {
                    Tok::Upper(ident)
                } else {
                    Tok::Numeral(ident)
                };
                out.push(Spanned { tok, line: tl, column: tc });
            }
            other => {
                return Err(Error::Syntax {
                    line: tl,
                    column: tc,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn advance(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> Error {
        let t = self.peek();
        Error::Syntax {
            line: t.line,
            column: t.column,
            message: format!("expected {expected}, found {}", t.tok.describe()),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<()> {
        if self.peek().tok == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn program(&mut self) -> Result<Vec<Clause>> {
        let mut clauses = Vec::new();
        while self.peek().tok != Tok::Eof {
            clauses.push(self.clause()?);
        }
        Ok(clauses)
    }

    fn clause(&mut self) -> Result<Clause> {
        let head = self.atom()?;
        let mut body = Vec::new();
        if self.peek().tok == Tok::Neck {
            self.advance();
            body.push(self.literal()?);
            while self.peek().tok == Tok::Comma {
                self.advance();
                body.push(self.literal()?);
            }
        }
        self.expect(Tok::Period, "`,` or `.`")?;
        Ok(Clause::new(head, body))
    }

    fn literal(&mut self) -> Result<Literal> {
        let negated = matches!(&self.peek().tok, Tok::Lower(s) if s == "not")
            && matches!(self.peek_at(1), Tok::Lower(_));
        if negated {
            self.advance();
            Ok(Literal::neg(self.atom()?))
        } else {
            Ok(Literal::pos(self.atom()?))
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let name = match &self.peek().tok {
            Tok::Lower(s) => s.clone(),
            _ => return Err(self.error("an atom")),
        };
        self.advance();
        Ok(Atom::new(name, self.args()?))
    }

    fn args(&mut self) -> Result<Vec<Term>> {
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.advance();
            args.push(self.term()?);
            while self.peek().tok == Tok::Comma {
                self.advance();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "`,` or `)`")?;
        }
        Ok(args)
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek().tok.clone() {
            Tok::Upper(v) => {
                self.advance();
                Ok(Term::Var(v))
            }
            Tok::Lower(f) | Tok::Numeral(f) => {
                self.advance();
                Ok(Term::App(f, self.args()?))
            }
            _ => Err(self.error("a term")),
        }
    }
}

/// Parses program text into a [`Program`].
pub fn parse_program(text: &str) -> Result<Program> {
    let mut parser = Parser { toks: tokenize(text)?, pos: 0 };
    Program::new(parser.program()?)
}

/// Parses a comma-separated list of atoms such as `p(a,b), q`.
/// An empty or all-whitespace string yields an empty list.
pub fn parse_atom_list(text: &str) -> Result<Vec<Atom>> {
    let mut parser = Parser { toks: tokenize(text)?, pos: 0 };
    let mut atoms = Vec::new();
    if parser.peek().tok == Tok::Eof {
        return Ok(atoms);
    }
    atoms.push(parser.atom()?);
    while parser.peek().tok == Tok::Comma {
        parser.advance();
        atoms.push(parser.atom()?);
    }
    parser.expect(Tok::Eof, "`,` or end of input")?;
    Ok(atoms)
}
