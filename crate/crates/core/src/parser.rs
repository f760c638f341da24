//! Lexer and parser for the surface syntax, plus the renaming pass that
//! makes every binder name globally fresh so the judgments never see
//! shadowing.
//!
//! Grammar sketch:
//!   term  ::= \(x:TYPE) term | λ(x:TYPE) term
//!           | let x = term in term
//!           | fix f(x:TYPE):TYPE = term
//!           | atom atom*                      (application, left assoc)
//!   atom  ::= ident | (term) | (term, term) | pi1 atom | pi2 atom
//!   TYPE  ::= factor (* factor)*
//!   factor::= ident | (TYPE) | [x:TYPE^d,...](x:TYPE^d) -> TYPE
//! A missing ^d annotation reads as 0.

use std::collections::HashSet;
use std::fmt;

use crate::syntax::{AnnotatedContext, Dep, Name, Term, Type};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub message: String,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Lambda,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Star,
    Arrow,
    Eq,
    Dep(Dep),
    Let,
    In,
    Fix,
    Pi1,
    Pi2,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = src.chars().peekable();
    let err = |message: &str, line: usize, col: usize| SyntaxError {
        message: message.to_string(),
        line,
        col,
    };
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let bump = |chars: &mut std::iter::Peekable<std::str::Chars>,
                    line: &mut usize,
                    col: &mut usize| {
            let c = chars.next().unwrap();
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                bump(&mut chars, &mut line, &mut col);
            }
            '\\' | '\u{03bb}' => {
                bump(&mut chars, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Lambda, line: tline, col: tcol });
            }
            '(' => {
                bump(&mut chars, &mut line, &mut col);
                out.push(Spanned { tok: Tok::LParen, line: tline, col: tcol });
            }
            ')' => {
                bump(&mut chars, &mut line, &mut col);
                out.push(Spanned { tok: Tok::RParen, line: tline, col: tcol });
            }
            '[' => {
                bump(&mut chars, &mut line, &mut col);
                out.push(Spanned { tok: Tok::LBracket, line: tline, col: tcol });
            }
            ']' => {
                bump(&mut chars, &mut line, &mut col);
                out.push(Spanned { tok: Tok::RBracket, line: tline, col: tcol });
            }
            ',' => {
                bump(&mut chars, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Comma, line: tline, col: tcol });
            }
            ':' => {
                bump(&mut chars, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Colon, line: tline, col: tcol });
            }
            '*' => {
                bump(&mut chars, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Star, line: tline, col: tcol });
            }
            '=' => {
                bump(&mut chars, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Eq, line: tline, col: tcol });
            }
            '-' => {
                bump(&mut chars, &mut line, &mut col);
                match chars.peek() {
                    Some('>') => {
                        bump(&mut chars, &mut line, &mut col);
                        out.push(Spanned { tok: Tok::Arrow, line: tline, col: tcol });
                    }
                    _ => return Err(err("expected `->`", tline, tcol)),
                }
            }
            '\u{2192}' => {
                bump(&mut chars, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Arrow, line: tline, col: tcol });
            }
            '^' => {
                bump(&mut chars, &mut line, &mut col);
                match chars.peek() {
                    Some('0') => {
                        bump(&mut chars, &mut line, &mut col);
                        out.push(Spanned { tok: Tok::Dep(Dep::ZERO), line: tline, col: tcol });
                    }
                    Some('1') => {
                        bump(&mut chars, &mut line, &mut col);
                        out.push(Spanned { tok: Tok::Dep(Dep::ONE), line: tline, col: tcol });
                    }
                    _ => return Err(err("expected `0` or `1` after `^`", tline, tcol)),
                }
            }
            '\u{2070}' => {
                bump(&mut chars, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Dep(Dep::ZERO), line: tline, col: tcol });
            }
            '\u{00b9}' => {
                bump(&mut chars, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Dep(Dep::ONE), line: tline, col: tcol });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    // Superscript digits are annotation tokens, not
                    // identifier characters, despite being alphanumeric.
                    let is_sup = c == '\u{2070}' || c == '\u{00b9}';
                    if (c.is_alphanumeric() || c == '_' || c == '\'') && !is_sup {
                        ident.push(bump(&mut chars, &mut line, &mut col));
                    } else {
                        break;
                    }
                }
                let tok = match ident.as_str() {
                    "let" => Tok::Let,
                    "in" => Tok::In,
                    "fix" => Tok::Fix,
                    "pi1" => Tok::Pi1,
                    "pi2" => Tok::Pi2,
                    _ => Tok::Ident(ident),
                };
                out.push(Spanned { tok, line: tline, col: tcol });
            }
            other => {
                return Err(err(&format!("unexpected character `{other}`"), tline, tcol))
            }
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        (self.tokens[self.pos].line, self.tokens[self.pos].col)
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        let (line, col) = self.here();
        SyntaxError {
            message: message.into(),
            line,
            col,
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == &tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<Name, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            other => Err(self.error(format!("expected {what}, found {other:?}"))),
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Tok::Lambda => {
                self.advance();
                self.expect(Tok::LParen, "`(`")?;
                let param = self.expect_ident("a parameter name")?;
                self.expect(Tok::Colon, "`:`")?;
                let param_ty = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                let body = self.term()?;
                Ok(Term::Lam {
                    param,
                    param_ty,
                    body: Box::new(body),
                })
            }
            Tok::Let => {
                self.advance();
                let name = self.expect_ident("a binding name")?;
                self.expect(Tok::Eq, "`=`")?;
                let def = self.term()?;
                self.expect(Tok::In, "`in`")?;
                let body = self.term()?;
                Ok(Term::Let {
                    name,
                    def: Box::new(def),
                    body: Box::new(body),
                })
            }
            Tok::Fix => {
                self.advance();
                let fname = self.expect_ident("a function name")?;
                self.expect(Tok::LParen, "`(`")?;
                let param = self.expect_ident("a parameter name")?;
                self.expect(Tok::Colon, "`:`")?;
                let param_ty = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Colon, "`:`")?;
                let result_ty = self.ty()?;
                self.expect(Tok::Eq, "`=`")?;
                let body = self.term()?;
                Ok(Term::Fix {
                    fname,
                    param,
                    param_ty,
                    result_ty,
                    body: Box::new(body),
                })
            }
            _ => {
                let mut acc = self.atom_term()?;
                while self.starts_atom() {
                    let arg = self.atom_term()?;
                    acc = Term::app(acc, arg);
                }
                Ok(acc)
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::LParen | Tok::Pi1 | Tok::Pi2
        )
    }

    fn atom_term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(Term::Var(name))
            }
            Tok::Pi1 => {
                self.advance();
                Ok(Term::proj1(self.atom_term()?))
            }
            Tok::Pi2 => {
                self.advance();
                Ok(Term::proj2(self.atom_term()?))
            }
            Tok::LParen => {
                self.advance();
                let first = self.term()?;
                match self.peek() {
                    Tok::Comma => {
                        self.advance();
                        let second = self.term()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Term::pair(first, second))
                    }
                    _ => {
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(first)
                    }
                }
            }
            other => Err(self.error(format!("expected a term, found {other:?}"))),
        }
    }

    fn ty(&mut self) -> Result<Type, SyntaxError> {
        let mut acc = self.ty_factor()?;
        while self.peek() == &Tok::Star {
            self.advance();
            let rhs = self.ty_factor()?;
            acc = Type::product(acc, rhs);
        }
        Ok(acc)
    }

    fn ty_factor(&mut self) -> Result<Type, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(Type::Atom(name))
            }
            Tok::LParen => {
                self.advance();
                let ty = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(ty)
            }
            Tok::LBracket => {
                self.advance();
                let mut captured = AnnotatedContext::empty();
                if self.peek() != &Tok::RBracket {
                    loop {
                        let name = self.expect_ident("a captured variable")?;
                        self.expect(Tok::Colon, "`:`")?;
                        let ty = self.ty()?;
                        let dep = self.opt_dep();
                        if captured.ctx.position(&name).is_some() {
                            return Err(
                                self.error(format!("duplicate captured variable `{name}`"))
                            );
                        }
                        captured.push(name, ty, dep);
                        match self.peek() {
                            Tok::Comma => {
                                self.advance();
                            }
                            _ => break,
                        }
                    }
                }
                self.expect(Tok::RBracket, "`]`")?;
                self.expect(Tok::LParen, "`(`")?;
                let param = self.expect_ident("a parameter name")?;
                self.expect(Tok::Colon, "`:`")?;
                let param_ty = self.ty()?;
                let param_dep = self.opt_dep();
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Arrow, "`->`")?;
                let result_ty = self.ty()?;
                Ok(Type::closure(captured, &param, param_dep, param_ty, result_ty))
            }
            other => Err(self.error(format!("expected a type, found {other:?}"))),
        }
    }

    fn opt_dep(&mut self) -> Dep {
        match self.peek() {
            Tok::Dep(d) => {
                let d = *d;
                self.advance();
                d
            }
            _ => Dep::ZERO,
        }
    }
}

/// Parses a term; the result still carries source binder names.
pub fn parse_term(src: &str) -> Result<Term, SyntaxError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let term = p.term()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error(format!("unexpected trailing input {:?}", p.peek())));
    }
    Ok(term)
}

/// Parses a standalone type.
pub fn parse_type(src: &str) -> Result<Type, SyntaxError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let ty = p.ty()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error(format!("unexpected trailing input {:?}", p.peek())));
    }
    Ok(ty)
}

/// Renames binders so all names in the term (free or bound) are pairwise
/// distinct; unshadowed programs come back unchanged. Occurrences inside
/// type annotations (captured contexts) follow their binder.
pub fn rename_binders(term: &Term) -> Term {
    let mut used: HashSet<Name> = term.free_vars().into_iter().collect();
    let mut map: Vec<(Name, Name)> = Vec::new();
    rename_term(term, &mut used, &mut map)
}

fn freshen(name: &Name, used: &mut HashSet<Name>) -> Name {
    if !used.contains(name) {
        used.insert(name.clone());
        return name.clone();
    }
    let mut i = 2;
    loop {
        let candidate = format!("{name}_{i}");
        if !used.contains(&candidate) {
            used.insert(candidate.clone());
            return candidate;
        }
        i += 1;
    }
}

fn rename_term(term: &Term, used: &mut HashSet<Name>, map: &mut Vec<(Name, Name)>) -> Term {
    match term {
        Term::Var(x) => {
            let name = map
                .iter()
                .rev()
                .find(|(from, _)| from == x)
                .map(|(_, to)| to.clone())
                .unwrap_or_else(|| x.clone());
            Term::Var(name)
        }
        Term::Pair(a, b) => Term::pair(rename_term(a, used, map), rename_term(b, used, map)),
        Term::Proj(ix, e) => Term::Proj(*ix, Box::new(rename_term(e, used, map))),
        Term::Lam {
            param,
            param_ty,
            body,
        } => {
            let param_ty = rename_type(param_ty, map);
            let fresh = freshen(param, used);
            map.push((param.clone(), fresh.clone()));
            let body = rename_term(body, used, map);
            map.pop();
            Term::Lam {
                param: fresh,
                param_ty,
                body: Box::new(body),
            }
        }
        Term::Fix {
            fname,
            param,
            param_ty,
            result_ty,
            body,
        } => {
            let param_ty = rename_type(param_ty, map);
            let fresh_f = freshen(fname, used);
            let fresh_x = freshen(param, used);
            map.push((fname.clone(), fresh_f.clone()));
            map.push((param.clone(), fresh_x.clone()));
            let result_ty = rename_type(result_ty, map);
            let body = rename_term(body, used, map);
            map.pop();
            map.pop();
            Term::Fix {
                fname: fresh_f,
                param: fresh_x,
                param_ty,
                result_ty,
                body: Box::new(body),
            }
        }
        Term::App(f, a) => Term::app(rename_term(f, used, map), rename_term(a, used, map)),
        Term::Let { name, def, body } => {
            let def = rename_term(def, used, map);
            let fresh = freshen(name, used);
            map.push((name.clone(), fresh.clone()));
            let body = rename_term(body, used, map);
            map.pop();
            Term::Let {
                name: fresh,
                def: Box::new(def),
                body: Box::new(body),
            }
        }
    }
}

fn rename_type(ty: &Type, map: &Vec<(Name, Name)>) -> Type {
    match ty {
        Type::Atom(_) => ty.clone(),
        Type::Product(a, b) => Type::product(rename_type(a, map), rename_type(b, map)),
        Type::Closure(ct) => {
            let mut captured = AnnotatedContext::empty();
            for (e, (_, d)) in ct.captured.ctx.entries.iter().zip(&ct.captured.deps.entries) {
                let name = map
                    .iter()
                    .rev()
                    .find(|(from, _)| from == &e.name)
                    .map(|(_, to)| to.clone())
                    .unwrap_or_else(|| e.name.clone());
                captured.push(name, rename_type(&e.ty, map), *d);
            }
            // The closure's own parameter shadows; occurrences under it stay.
            let mut inner = map.clone();
            inner.push((ct.param.clone(), ct.param.clone()));
            Type::closure(
                captured,
                &ct.param,
                ct.param_dep,
                rename_type(&ct.param_ty, map),
                rename_type(&ct.result_ty, &inner),
            )
        }
    }
}
