use super::{Comparator, CountAtom, CountTerm, Formula};
use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    True,
    False,
    Mod,
    Yesterday,
    Previously,
    Historically,
    Since,
    Not,
    And,
    Or,
    Implies,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Hash,
    Plus,
    Minus,
    Star,
    Cmp(Comparator),
    Eof,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: String| ParseError::Syntax { pos, msg };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = if i + 1 < bytes.len() { &src[i..i + 2] } else { "" };
        let tok = match (c, two) {
            (_, "->") => {
                i += 2;
                Tok::Implies
            }
            (_, "<=") => {
                i += 2;
                Tok::Cmp(Comparator::Le)
            }
            (_, ">=") => {
                i += 2;
                Tok::Cmp(Comparator::Ge)
            }
            (b'<', _) => {
                i += 1;
                Tok::Cmp(Comparator::Lt)
            }
            (b'>', _) => {
                i += 1;
                Tok::Cmp(Comparator::Gt)
            }
            (b'=', _) => {
                i += 1;
                Tok::Cmp(Comparator::Eq)
            }
            (b'!', _) => {
                i += 1;
                Tok::Not
            }
            (b'&', _) => {
                i += 1;
                Tok::And
            }
            (b'|', _) => {
                i += 1;
                Tok::Or
            }
            (b'(', _) => {
                i += 1;
                Tok::LParen
            }
            (b')', _) => {
                i += 1;
                Tok::RParen
            }
            (b'[', _) => {
                i += 1;
                Tok::LBrack
            }
            (b']', _) => {
                i += 1;
                Tok::RBrack
            }
            (b',', _) => {
                i += 1;
                Tok::Comma
            }
            (b'#', _) => {
                i += 1;
                Tok::Hash
            }
            (b'+', _) => {
                i += 1;
                Tok::Plus
            }
            (b'-', _) => {
                i += 1;
                Tok::Minus
            }
            (b'*', _) => {
                i += 1;
                Tok::Star
            }
            (b'0'..=b'9', _) => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = src[start..i]
                    .parse::<u64>()
                    .map_err(|_| err(start, format!("integer `{}` too large", &src[start..i])))?;
                Tok::Int(n)
            }
            (b'a'..=b'z' | b'A'..=b'Z', _) => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &src[start..i];
                match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "MOD" => Tok::Mod,
                    "Y" => Tok::Yesterday,
                    "P" => Tok::Previously,
                    "H" => Tok::Historically,
                    "S" => Tok::Since,
                    w if c.is_ascii_lowercase() => Tok::Ident(w.to_string()),
                    w => return Err(err(start, format!("unknown keyword `{w}`"))),
                }
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(err(start, format!("unexpected character `{ch}`")));
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {what}, found {:?}", self.peek()))
        }
    }

    fn int(&mut self, what: &str) -> Result<u64, ParseError> {
        match self.peek() {
            Tok::Int(n) => {
                let n = *n;
                self.bump();
                Ok(n)
            }
            t => self.fail(format!("expected {what}, found {t:?}")),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.binary_level(0)
    }

    // Levels from loosest to tightest: S, ->, |, &.
    fn binary_level(&mut self, level: usize) -> Result<Formula, ParseError> {
        const OPS: [Tok; 4] = [Tok::Since, Tok::Implies, Tok::Or, Tok::And];
        if level == OPS.len() {
            return self.unary();
        }
        let mut lhs = self.binary_level(level + 1)?;
        while *self.peek() == OPS[level] {
            self.bump();
            let rhs = self.binary_level(level + 1)?;
            lhs = match level {
                0 => Formula::since(lhs, rhs),
                1 => Formula::implies(lhs, rhs),
                2 => Formula::or(lhs, rhs),
                _ => Formula::and(lhs, rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Yesterday => {
                self.bump();
                Ok(Formula::yesterday(self.unary()?))
            }
            Tok::Previously => {
                self.bump();
                Ok(Formula::previously(self.unary()?))
            }
            Tok::Historically => {
                self.bump();
                Ok(Formula::historically(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Mod => {
                self.bump();
                self.expect(Tok::LBrack, "`[` after MOD")?;
                let remainder = self.int("remainder")?;
                self.expect(Tok::Comma, "`,`")?;
                let modulus = self.int("modulus")?;
                self.expect(Tok::RBrack, "`]`")?;
                if modulus < 2 || remainder >= modulus {
                    return Err(ParseError::ModBounds { remainder, modulus });
                }
                Ok(Formula::Mod { remainder, modulus })
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Hash | Tok::Int(_) | Tok::Minus => self.count(),
            t => self.fail(format!("expected a formula, found {t:?}")),
        }
    }

    fn count(&mut self) -> Result<Formula, ParseError> {
        let mut terms = Vec::new();
        let mut negative = false;
        if *self.peek() == Tok::Minus {
            self.bump();
            negative = true;
        }
        loop {
            let term_pos = self.pos();
            let magnitude = match self.peek() {
                Tok::Int(n) => {
                    let n = *n;
                    self.bump();
                    self.expect(Tok::Star, "`*` after coefficient")?;
                    n
                }
                _ => 1,
            };
            if magnitude == 0 {
                return Err(ParseError::ZeroCoefficient { pos: term_pos });
            }
            let magnitude = i64::try_from(magnitude).map_err(|_| ParseError::Syntax {
                pos: term_pos,
                msg: "coefficient too large".into(),
            })?;
            self.expect(Tok::Hash, "`#`")?;
            self.expect(Tok::LBrack, "`[` after `#`")?;
            let formula = self.formula()?;
            self.expect(Tok::RBrack, "`]`")?;
            terms.push(CountTerm {
                coeff: if negative { -magnitude } else { magnitude },
                formula,
            });
            match self.peek() {
                Tok::Plus => negative = false,
                Tok::Minus => negative = true,
                _ => break,
            }
            self.bump();
        }
        let cmp = match self.bump() {
            Tok::Cmp(c) => c,
            t => {
                self.at -= 1;
                return self.fail(format!("expected comparator, found {t:?}"));
            }
        };
        let threshold = self.int("nonnegative threshold")?;
        Ok(Formula::Count(CountAtom { terms, cmp, threshold }))
    }
}

/// Parses the concrete syntax and desugars `|`, `->`, `H`.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return p.fail(format!("trailing input {:?}", p.peek()));
    }
    Ok(f)
}
