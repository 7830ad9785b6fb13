//! Recursive-descent parser for the ASCII formula grammar. Parsing is
//! vocabulary-directed: identifiers that are not declared symbols are read
//! as variables, and arities are checked while atoms are built.

use super::{Formula, Term};
use crate::structure::Vocabulary;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u32),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Semi,
    Bang,
    Amp,
    Bar,
    Arrow,
    Geq,
    Eq,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, co) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        let err = |msg: String| Error::Syntax {
            line: l,
            col: co,
            msg,
        };
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                bump(&mut chars);
            }
            '(' | ')' | '[' | ']' | ',' | '.' | ';' | '!' | '&' | '|' => {
                bump(&mut chars);
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    ';' => Tok::Semi,
                    '!' => Tok::Bang,
                    '&' => Tok::Amp,
                    _ => Tok::Bar,
                };
                out.push(Spanned { tok, line: l, col: co });
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    out.push(Spanned {
                        tok: Tok::Arrow,
                        line: l,
                        col: co,
                    });
                } else {
                    return Err(err("expected `->`".to_string()));
                }
            }
            '>' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    out.push(Spanned {
                        tok: Tok::Geq,
                        line: l,
                        col: co,
                    });
                } else {
                    return Err(err("expected `>=`".to_string()));
                }
            }
            '=' => {
                bump(&mut chars);
                out.push(Spanned {
                    tok: Tok::Eq,
                    line: l,
                    col: co,
                });
            }
            '0'..='9' => {
                let mut n: u32 = 0;
                while matches!(chars.peek(), Some('0'..='9')) {
                    let d = bump(&mut chars);
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(d as u32 - '0' as u32))
                        .ok_or_else(|| err("number too large".to_string()))?;
                }
                out.push(Spanned {
                    tok: Tok::Num(n),
                    line: l,
                    col: co,
                });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while matches!(chars.peek(), Some(&c) if c.is_alphanumeric() || c == '_' || c == '\'') {
                    s.push(bump(&mut chars));
                }
                out.push(Spanned {
                    tok: Tok::Ident(s),
                    line: l,
                    col: co,
                });
            }
            c => return Err(err(format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    vocab: &'a Vocabulary,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn variable(&mut self, what: &str) -> Result<String> {
        let name = self.ident(what)?;
        if self.vocab.relations().contains_key(&name)
            || self.vocab.functions().contains_key(&name)
            || self.vocab.constants().contains(&name)
        {
            self.pos -= 1;
            return Err(self.err(format!("`{name}` is a vocabulary symbol, not a variable")));
        }
        Ok(name)
    }

    fn num(&mut self, what: &str) -> Result<u32> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn equality_err(&self) -> Error {
        let (line, col) = self.here();
        Error::EqualityForbidden { line, col }
    }

    /// Quantifiers bind weakest, so a binder's body extends to the end of
    /// the current scope. `noor` is set inside a Qquot bracket slot, where
    /// a `|` at the current level is the slot separator.
    fn formula(&mut self, noor: bool) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Ident(kw)) if kw == "forall" => {
                self.pos += 1;
                let x = self.variable("variable after `forall`")?;
                self.expect(Tok::Dot, "`.` after binder")?;
                Ok(Formula::forall(&x, self.formula(noor)?))
            }
            Some(Tok::Ident(kw)) if kw == "exists" => {
                self.pos += 1;
                let count = if self.peek() == Some(&Tok::Geq) {
                    self.pos += 1;
                    let n = self.num("count after `exists>=`")?;
                    if n == 0 {
                        return Err(self.err("`exists>=` count must be at least 1"));
                    }
                    Some(n)
                } else {
                    None
                };
                let x = self.variable("variable after `exists`")?;
                self.expect(Tok::Dot, "`.` after binder")?;
                let body = self.formula(noor)?;
                Ok(match count {
                    Some(n) => Formula::CountAtLeast(n, x, Box::new(body)),
                    None => Formula::exists(&x, body),
                })
            }
            Some(Tok::Ident(kw)) if kw == "QH" => {
                self.pos += 1;
                let x = self.variable("variable after `QH`")?;
                let y = self.variable("variable after `QH`")?;
                let z = self.variable("variable after `QH`")?;
                let w = self.variable("variable after `QH`")?;
                self.expect(Tok::Dot, "`.` after binder")?;
                let body = self.formula(noor)?;
                Ok(Formula::Henkin(x, y, z, w, Box::new(body)))
            }
            Some(Tok::Ident(kw)) if kw == "Qquot" => {
                self.pos += 1;
                self.expect(Tok::Geq, "`>=` after `Qquot`")?;
                let k = self.num("threshold after `Qquot>=`")?;
                if k == 0 {
                    return Err(self.err("`Qquot>=` threshold must be at least 1"));
                }
                let x = self.variable("variable after `Qquot>=K`")?;
                self.expect(Tok::Semi, "`;` between Qquot variables")?;
                let y = self.variable("variable after `;`")?;
                let z = self.variable("variable after `;`")?;
                self.expect(Tok::LBracket, "`[` before Qquot arguments")?;
                let phi = self.formula(true)?;
                self.expect(Tok::Bar, "`|` between Qquot arguments")?;
                let theta = self.formula(true)?;
                self.expect(Tok::RBracket, "`]` after Qquot arguments")?;
                Ok(Formula::QuotAtLeast(
                    k,
                    x,
                    (y, z),
                    Box::new(phi),
                    Box::new(theta),
                ))
            }
            _ => self.implies(noor),
        }
    }

    fn implies(&mut self, noor: bool) -> Result<Formula> {
        let left = self.or(noor)?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let right = self.formula(noor)?;
            Ok(Formula::implies(left, right))
        } else {
            Ok(left)
        }
    }

    fn or(&mut self, noor: bool) -> Result<Formula> {
        let mut parts = vec![self.and(noor)?];
        while !noor && self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            parts.push(self.and(noor)?);
        }
        Ok(Formula::or(parts))
    }

    fn and(&mut self, noor: bool) -> Result<Formula> {
        let mut parts = vec![self.unary(noor)?];
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            parts.push(self.unary(noor)?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self, noor: bool) -> Result<Formula> {
        // a binder after a connective opens a new scope extending to the
        // end of the enclosing one: `A & exists x. B & C` reads as
        // `A & (exists x. (B & C))`
        if let Some(Tok::Ident(kw)) = self.peek() {
            if matches!(kw.as_str(), "forall" | "exists" | "QH" | "Qquot") {
                return self.formula(noor);
            }
        }
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(Formula::not(self.unary(noor)?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula(false)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(_)) => self.atom(),
            _ => Err(self.err("expected a formula")),
        }
    }

    fn atom(&mut self, ) -> Result<Formula> {
        let name = self.ident("atom")?;
        if let Some(&arity) = self.vocab.relations().get(&name) {
            self.expect(Tok::LParen, "`(` after relation symbol")?;
            let mut args = vec![self.term()?];
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "`)`")?;
            if args.len() != arity {
                return Err(Error::ArityMismatch {
                    symbol: name,
                    expected: arity,
                    got: args.len(),
                });
            }
            Ok(Formula::Atom(name, args))
        } else if self.peek() == Some(&Tok::Eq) {
            // `x = y`: back up to the `=` for the reported position
            Err(self.equality_err())
        } else if self.vocab.functions().contains_key(&name)
            || self.vocab.constants().contains(&name)
        {
            self.pos -= 1;
            Err(self.err(format!("`{name}` is not a relation symbol")))
        } else {
            self.pos -= 1;
            Err(self.err(format!("unknown relation symbol `{name}`")))
        }
    }

    fn term(&mut self) -> Result<Term> {
        if self.peek() == Some(&Tok::Eq) {
            return Err(self.equality_err());
        }
        let name = self.ident("term")?;
        let t = if let Some(&arity) = self.vocab.functions().get(&name) {
            self.expect(Tok::LParen, "`(` after function symbol")?;
            let mut args = vec![self.term()?];
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "`)`")?;
            if args.len() != arity {
                return Err(Error::ArityMismatch {
                    symbol: name,
                    expected: arity,
                    got: args.len(),
                });
            }
            Term::App(name, args)
        } else if self.vocab.constants().contains(&name) {
            Term::Const(name)
        } else if self.vocab.relations().contains_key(&name) {
            self.pos -= 1;
            return Err(self.err(format!("relation symbol `{name}` used as a term")));
        } else {
            Term::Var(name)
        };
        if self.peek() == Some(&Tok::Eq) {
            return Err(self.equality_err());
        }
        Ok(t)
    }
}

/// Parses formula text against a vocabulary.
pub fn parse(text: &str, vocab: &Vocabulary) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        vocab,
    };
    let f = p.formula(false)?;
    match p.next() {
        None => Ok(f),
        Some(Tok::Eq) => {
            p.pos -= 1;
            Err(p.equality_err())
        }
        Some(_) => {
            p.pos -= 1;
            Err(p.err("trailing input after formula"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::print;

    fn vocab() -> Vocabulary {
        Vocabulary::new()
            .with_relation("P", 1)
            .with_relation("R", 2)
            .with_relation("E", 2)
            .with_function("f", 1)
            .with_constant("c")
    }

    fn roundtrip(text: &str) {
        let v = vocab();
        let f = parse(text, &v).unwrap();
        let printed = print(&f);
        assert_eq!(parse(&printed, &v).unwrap(), f, "printed as {printed}");
    }

    #[test]
    fn basic_parses() {
        let v = vocab();
        let f = parse("exists x. P(x)", &v).unwrap();
        assert_eq!(f, Formula::exists("x", Formula::atom("P", vec![Term::var("x")])));
        let f = parse("exists>=2 x. P(x)", &v).unwrap();
        assert_eq!(
            f,
            Formula::CountAtLeast(
                2,
                "x".into(),
                Box::new(Formula::atom("P", vec![Term::var("x")]))
            )
        );
    }

    #[test]
    fn equality_is_rejected() {
        let v = vocab();
        assert!(matches!(
            parse("x = y", &v),
            Err(Error::EqualityForbidden { .. })
        ));
        assert!(matches!(
            parse("exists x. P(x) & x = c", &v),
            Err(Error::EqualityForbidden { .. })
        ));
    }

    #[test]
    fn precedence() {
        let v = vocab();
        assert_eq!(
            parse("!P(x) & P(y) | P(z) -> P(x)", &v).unwrap(),
            Formula::implies(
                Formula::Or(vec![
                    Formula::And(vec![
                        Formula::not(Formula::atom("P", vec![Term::var("x")])),
                        Formula::atom("P", vec![Term::var("y")]),
                    ]),
                    Formula::atom("P", vec![Term::var("z")]),
                ]),
                Formula::atom("P", vec![Term::var("x")]),
            )
        );
        // implication is right associative
        let f = parse("P(x) -> P(y) -> P(z)", &v).unwrap();
        assert!(matches!(&f, Formula::Implies(_, b) if matches!(**b, Formula::Implies(_, _))));
    }

    #[test]
    fn quantifier_scope_extends_right() {
        let v = vocab();
        let f = parse("forall x. P(x) -> P(x)", &v).unwrap();
        assert!(matches!(f, Formula::Forall(_, _)));
    }

    #[test]
    fn qquot_and_henkin() {
        let v = vocab();
        let f = parse("Qquot>=2 x ; y z [ P(x) | E(y,z) ]", &v).unwrap();
        assert!(matches!(f, Formula::QuotAtLeast(2, _, _, _, _)));
        let f = parse("QH x y z w. R(x,y) & R(z,w)", &v).unwrap();
        assert!(matches!(f, Formula::Henkin(..)));
        // a disjunction in a slot needs parentheses, and prints with them
        let f = parse("Qquot>=1 x ; y z [ (P(x) | P(x)) | E(y,z) ]", &v).unwrap();
        roundtrip(&print(&f));
    }

    #[test]
    fn arity_and_symbol_errors() {
        let v = vocab();
        assert!(matches!(
            parse("R(x)", &v),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(parse("f(x)", &v), Err(Error::Syntax { .. })));
        assert!(parse("S(x)", &v).is_err());
    }

    #[test]
    fn terms() {
        let v = vocab();
        let f = parse("P(f(c))", &v).unwrap();
        assert_eq!(
            f,
            Formula::atom("P", vec![Term::App("f".into(), vec![Term::Const("c".into())])])
        );
    }

    #[test]
    fn roundtrips() {
        for text in [
            "exists x. P(x)",
            "exists>=2 x. P(x)",
            "forall x. exists y. R(x,y)",
            "!(P(x) | P(y)) & P(z)",
            "P(x) -> P(y) -> P(z)",
            "(P(x) -> P(y)) -> P(z)",
            "QH x y z w. R(x,y) & R(z,w)",
            "Qquot>=3 x ; y z [ P(x) & E(x,x) | E(y,z) ]",
            "forall x. P(f(x)) | P(c)",
        ] {
            roundtrip(text);
        }
    }
}
