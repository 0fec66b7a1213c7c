//! Recursive-descent parser for the utility grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! exponent:= '-'? NUMBER | '(' '-'? NUMBER ')'
//! atom    := NUMBER | 'MSE' | 'PA' | ('log' | 'sqrt') '(' expr ')' | '(' expr ')'
//! ```
//!
//! A minus sign directly in front of a literal that is not raised to a power
//! yields a negative constant.

use alloc::format;
use alloc::string::{String, ToString};

use super::utility::{BinaryOp, UnaryOp, UtilityExpr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<alloc::vec::Vec<(Token, usize)>> {
        let mut lexer = Lexer { src, pos: 0 };
        let mut out = alloc::vec::Vec::new();
        loop {
            let (tok, at) = lexer.next()?;
            let end = tok == Token::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn next(&mut self) -> Result<(Token, usize)> {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        let start = self.pos;
        let Some(c) = self.peek_char() else {
            return Ok((Token::End, start));
        };
        let single = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '^' => Some(Token::Caret),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = self.src[start..]
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(self.src.len() - start);
            self.pos = start + len;
            return Ok((Token::Ident(self.src[start..self.pos].to_string()), start));
        }
        Err(Error::Syntax {
            position: start,
            message: format!("unexpected character `{}`", c),
        })
    }

    fn number(&mut self, start: usize) -> Result<(Token, usize)> {
        let bytes = self.src.as_bytes();
        let mut i = start;
        let digits = |i: &mut usize| {
            let from = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - from
        };
        let mut mantissa = digits(&mut i);
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            mantissa += digits(&mut i);
        }
        if mantissa == 0 {
            return Err(Error::Syntax {
                position: start,
                message: "malformed number".to_string(),
            });
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if digits(&mut j) == 0 {
                return Err(Error::Syntax {
                    position: i,
                    message: "malformed exponent".to_string(),
                });
            }
            i = j;
        }
        self.pos = i;
        let text = &self.src[start..i];
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            position: start,
            message: format!("malformed number `{}`", text),
        })?;
        Ok((Token::Number(value), start))
    }
}

struct Parser {
    tokens: alloc::vec::Vec<(Token, usize)>,
    idx: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.idx].0
    }

    fn peek_at(&self, offset: usize) -> &Token {
        let i = (self.idx + offset).min(self.tokens.len() - 1);
        &self.tokens[i].0
    }

    fn position(&self) -> usize {
        self.tokens[self.idx].1
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.idx].0.clone();
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        tok
    }

    fn unexpected(&self, expected: &str) -> Error {
        let found = match self.peek() {
            Token::End => "end of input".to_string(),
            Token::Number(v) => format!("number {}", v),
            Token::Ident(name) => format!("`{}`", name),
            other => format!("{:?}", other),
        };
        Error::Syntax {
            position: self.position(),
            message: format!("expected {}, found {}", expected, found),
        }
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn expr(&mut self) -> Result<UtilityExpr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinaryOp::Add,
                Token::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = UtilityExpr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<UtilityExpr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinaryOp::Mul,
                Token::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = UtilityExpr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<UtilityExpr> {
        if *self.peek() != Token::Minus {
            return self.power();
        }
        if let Token::Number(v) = *self.peek_at(1) {
            if *self.peek_at(2) != Token::Caret {
                self.bump();
                self.bump();
                return Ok(UtilityExpr::Const(-v));
            }
        }
        self.bump();
        Ok(UtilityExpr::unary(UnaryOp::Neg, self.unary()?))
    }

    fn power(&mut self) -> Result<UtilityExpr> {
        let base = self.atom()?;
        if *self.peek() != Token::Caret {
            return Ok(base);
        }
        self.bump();
        let exponent = self.exponent()?;
        Ok(UtilityExpr::pow(base, exponent))
    }

    fn exponent(&mut self) -> Result<f64> {
        let parenthesized = *self.peek() == Token::LParen;
        if parenthesized {
            self.bump();
        }
        let negative = *self.peek() == Token::Minus;
        if negative {
            self.bump();
        }
        let value = match self.peek() {
            Token::Number(v) => *v,
            _ => return Err(self.unexpected("a constant exponent")),
        };
        self.bump();
        if parenthesized {
            self.expect(Token::RParen, "`)`")?;
        }
        Ok(if negative { -value } else { value })
    }

    fn atom(&mut self) -> Result<UtilityExpr> {
        let position = self.position();
        match self.peek().clone() {
            Token::Number(v) => {
                self.bump();
                Ok(UtilityExpr::Const(v))
            }
            Token::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Token::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "MSE" => Ok(UtilityExpr::mse()),
                    "PA" => Ok(UtilityExpr::pa()),
                    "log" | "sqrt" => {
                        let op = if name == "log" { UnaryOp::Log } else { UnaryOp::Sqrt };
                        self.expect(Token::LParen, "`(` after function name")?;
                        let arg = self.expr()?;
                        self.expect(Token::RParen, "`)`")?;
                        Ok(UtilityExpr::unary(op, arg))
                    }
                    _ => Err(Error::UnknownIdentifier { name, position }),
                }
            }
            _ => Err(self.unexpected("an operand")),
        }
    }
}

/// Parses a utility expression such as `"log(MSE) + 0.75*log(PA)"`.
pub fn parse_utility(text: &str) -> Result<UtilityExpr> {
    let tokens = Lexer::tokenize(text)?;
    let mut parser = Parser { tokens, idx: 0 };
    let expr = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(parser.unexpected("an operator or end of input"));
    }
    Ok(expr)
}
