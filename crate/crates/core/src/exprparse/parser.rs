use super::{BinOp, Expr, Expression, Func, ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize), (ParseErrorKind, usize)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let tok = match b {
            b'0'..=b'9' | b'.' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                    end += 1;
                }
                if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                    let mut exp = end + 1;
                    if exp < bytes.len() && (bytes[exp] == b'+' || bytes[exp] == b'-') {
                        exp += 1;
                    }
                    if exp < bytes.len() && bytes[exp].is_ascii_digit() {
                        while exp < bytes.len() && bytes[exp].is_ascii_digit() {
                            exp += 1;
                        }
                        end = exp;
                    }
                }
                let text = &self.src[start..end];
                self.pos = end;
                match text.parse::<f64>() {
                    Ok(x) if x.is_finite() => Tok::Num(x),
                    _ => return Err((ParseErrorKind::InvalidNumber(text.into()), start)),
                }
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
                self.pos = end;
                Tok::Ident(self.src[start..end].to_string())
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(b as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            _ => {
                let c = self.src[start..].chars().next().unwrap_or('?');
                return Err((ParseErrorKind::UnexpectedChar(c), start));
            }
        };
        Ok((tok, start))
    }
}

struct Parser<'a> {
    src: &'a str,
    lexer: Lexer<'a>,
    tok: Tok,
    tok_pos: usize,
    vars: &'a [&'a str],
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn error(&self, kind: ParseErrorKind, offset: usize) -> ParseError {
        let before = &self.src[..offset.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let column = self.src[line_start..offset.min(self.src.len())].chars().count() + 1;
        ParseError {
            kind,
            offset,
            line,
            column,
        }
    }

    fn advance(&mut self) -> PResult<()> {
        match self.lexer.next() {
            Ok((tok, pos)) => {
                self.tok = tok;
                self.tok_pos = pos;
                Ok(())
            }
            Err((kind, pos)) => Err(self.error(kind, pos)),
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let kind = if self.tok == Tok::End {
            ParseErrorKind::UnexpectedEnd {
                expected: expected.into(),
            }
        } else {
            ParseErrorKind::UnexpectedToken {
                found: self.tok.describe(),
                expected: expected.into(),
            }
        };
        self.error(kind, self.tok_pos)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if self.tok == tok {
            self.advance()
        } else {
            Err(self.unexpected(what))
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.tok == Tok::Op('-') {
            self.advance()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.primary()?;
        if self.tok == Tok::Op('^') {
            self.advance()?;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.tok_pos;
        match self.tok.clone() {
            Tok::Num(x) => {
                self.advance()?;
                Ok(Expr::Num(x))
            }
            Tok::LParen => {
                self.advance()?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.advance()?;
                if self.tok == Tok::LParen {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| self.error(ParseErrorKind::UnknownFunction(name.clone()), pos))?;
                    self.advance()?;
                    let mut args = vec![self.expr()?];
                    while self.tok == Tok::Comma {
                        self.advance()?;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "')' or ','")?;
                    if args.len() != func.arity() {
                        return Err(self.error(
                            ParseErrorKind::Arity {
                                func: name,
                                expected: func.arity(),
                                found: args.len(),
                            },
                            pos,
                        ));
                    }
                    Ok(Expr::Call(func, args))
                } else {
                    match self.vars.iter().position(|v| *v == name) {
                        Some(i) => Ok(Expr::Var(i)),
                        None if Func::from_name(&name).is_some() => Err(self.unexpected("'('")),
                        None => Err(self.error(ParseErrorKind::UnknownVariable(name), pos)),
                    }
                }
            }
            _ => Err(self.unexpected("a number, variable, function or '('")),
        }
    }
}

/// Parses `src` with the given variable names in scope.
///
/// Identifiers outside `vars` and the builtin function table are rejected
/// with their position.
pub fn parse(src: &str, vars: &[&str]) -> Result<Expression, ParseError> {
    let mut p = Parser {
        src,
        lexer: Lexer { src, pos: 0 },
        tok: Tok::End,
        tok_pos: 0,
        vars,
    };
    p.advance()?;
    let root = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.unexpected("operator or end of input"));
    }
    Ok(Expression::new(root, vars.iter().map(|s| s.to_string()).collect()))
}
