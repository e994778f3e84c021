use super::{BinOp, Expr, ExprError, Func, Var};

/// Parses an expression, treating every identifier that is not `x`, `y`,
/// `yp` or a function call as a parameter.
pub fn parse(source: &str) -> Result<Expr, ExprError> {
    Parser::new(source, None).parse_all()
}

/// Parses an expression whose parameters must all appear in `declared`.
pub fn parse_declared<S: AsRef<str>>(source: &str, declared: &[S]) -> Result<Expr, ExprError> {
    let names: Vec<&str> = declared.iter().map(|s| s.as_ref()).collect();
    Parser::new(source, Some(names)).parse_all()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Num(f64),
    Ident(&'a str),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    declared: Option<Vec<&'a str>>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, declared: Option<Vec<&'a str>>) -> Self {
        Parser {
            src,
            pos: 0,
            declared,
        }
    }

    fn syntax(&self, offset: usize, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Returns the next token and its start offset without consuming it.
    fn peek(&mut self) -> Result<(Tok<'a>, usize, usize), ExprError> {
        self.skip_ws();
        let bytes = self.src.as_bytes();
        let start = self.pos;
        if start >= bytes.len() {
            return Ok((Tok::End, start, start));
        }
        let c = bytes[start];
        match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Ok((Tok::Op(c as char), start, start + 1)),
            b'(' => Ok((Tok::LParen, start, start + 1)),
            b')' => Ok((Tok::RParen, start, start + 1)),
            b'0'..=b'9' | b'.' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                    end += 1;
                }
                if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                    let mut k = end + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        end = k;
                    }
                }
                let text = &self.src[start..end];
                let value: f64 = text
                    .parse()
                    .map_err(|_| self.syntax(start, format!("malformed number `{text}`")))?;
                Ok((Tok::Num(value), start, end))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = start;
                while end < bytes.len()
                    && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                Ok((Tok::Ident(&self.src[start..end]), start, end))
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                Err(self.syntax(start, format!("unexpected character `{ch}`")))
            }
        }
    }

    fn parse_all(mut self) -> Result<Expr, ExprError> {
        let e = self.expr()?;
        match self.peek()? {
            (Tok::End, _, _) => Ok(e),
            (_, off, _) => Err(self.syntax(off, "unexpected trailing input")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek()? {
                (Tok::Op(c @ ('+' | '-')), _, end) => {
                    self.pos = end;
                    let rhs = self.term()?;
                    let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
                    lhs = Expr::bin(op, lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek()? {
                (Tok::Op(c @ ('*' | '/')), _, end) => {
                    self.pos = end;
                    let rhs = self.factor()?;
                    let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
                    lhs = Expr::bin(op, lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        if let (Tok::Op('-'), _, end) = self.peek()? {
            self.pos = end;
            return Ok(Expr::neg(self.factor()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if let (Tok::Op('^'), _, end) = self.peek()? {
            self.pos = end;
            let exponent = self.factor()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let (tok, start, end) = self.peek()?;
        match tok {
            Tok::Num(v) => {
                self.pos = end;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.pos = end;
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos = end;
                if let Some(v) = Var::from_name(name) {
                    return Ok(Expr::Var(v));
                }
                if self.is_declared(name) {
                    return Ok(Expr::Param(name.to_string()));
                }
                let call = matches!(self.peek()?, (Tok::LParen, _, _));
                if call {
                    let f = Func::from_name(name).ok_or_else(|| ExprError::UnknownFunction {
                        name: name.to_string(),
                        offset: start,
                    })?;
                    let (_, _, lend) = self.peek()?;
                    self.pos = lend;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::call(f, arg));
                }
                if Func::from_name(name).is_some() {
                    return Err(self.syntax(self.pos, format!("expected `(` after `{name}`")));
                }
                match &self.declared {
                    None => Ok(Expr::Param(name.to_string())),
                    Some(_) => Err(ExprError::UnknownVariable {
                        name: name.to_string(),
                        offset: start,
                    }),
                }
            }
            Tok::End => Err(self.syntax(start, "unexpected end of input")),
            Tok::RParen => Err(self.syntax(start, "unexpected `)`")),
            Tok::Op(c) => Err(self.syntax(start, format!("unexpected operator `{c}`"))),
        }
    }

    fn is_declared(&self, name: &str) -> bool {
        self.declared.as_ref().is_some_and(|d| d.contains(&name))
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        match self.peek()? {
            (Tok::RParen, _, end) => {
                self.pos = end;
                Ok(())
            }
            (_, off, _) => Err(self.syntax(off, "expected `)`")),
        }
    }
}
