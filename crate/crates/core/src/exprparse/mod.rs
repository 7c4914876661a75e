//! A small arithmetic expression language for user-supplied energy profiles.
//!
//! Grammar (see `docs/grammar.md`):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | ident | ident "(" expr { "," expr } ")" | "(" expr ")" ;
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so
//! `-2^2 = -4` and `2^3^2 = 512`.

mod diff;
mod parser;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use parser::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Abs,
    Exp,
    Log,
    Min,
    Max,
    Sign,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "min" => Func::Min,
            "max" => Func::Max,
            "sign" => Func::Sign,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Min => "min",
            Func::Max => "max",
            Func::Sign => "sign",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

/// Expression tree. Variables are indices into the owning
/// [`Expression`]'s variable table.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

// Binding strength used by the printer.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
            Expr::Neg(_) => PREC_NEG,
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
            Expr::Bin(BinOp::Pow, ..) => PREC_POW,
        }
    }

    fn write(&self, vars: &[String], out: &mut String) {
        fn child(e: &Expr, vars: &[String], out: &mut String, paren: bool) {
            if paren {
                out.push('(');
                e.write(vars, out);
                out.push(')');
            } else {
                e.write(vars, out);
            }
        }
        match self {
            Expr::Num(x) => out.push_str(&format_number(*x)),
            Expr::Var(i) => out.push_str(&vars[*i]),
            Expr::Neg(e) => {
                out.push('-');
                child(e, vars, out, e.prec() < PREC_NEG);
            }
            Expr::Bin(BinOp::Pow, base, exp) => {
                child(base, vars, out, base.prec() < PREC_ATOM);
                out.push('^');
                child(exp, vars, out, exp.prec() < PREC_NEG);
            }
            Expr::Bin(op, l, r) => {
                let p = self.prec();
                child(l, vars, out, l.prec() < p);
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                child(r, vars, out, r.prec() <= p);
            }
            Expr::Call(func, args) => {
                out.push_str(func.name());
                out.push('(');
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    a.write(vars, out);
                }
                out.push(')');
            }
        }
    }

    fn eval(&self, values: &[f64], vars: &[String]) -> Result<f64, EvalError> {
        let domain = |what: &str| EvalError::Domain {
            what: what.to_string(),
            subexpr: self.render(vars),
        };
        let v = match self {
            Expr::Num(x) => *x,
            Expr::Var(i) => match values.get(*i) {
                Some(v) => *v,
                None => return Err(EvalError::Unbound(vars[*i].clone())),
            },
            Expr::Neg(e) => -e.eval(values, vars)?,
            Expr::Bin(op, l, r) => {
                let a = l.eval(values, vars)?;
                let b = r.eval(values, vars)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(domain("division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(domain("negative base with non-integer exponent"));
                        }
                        if a == 0.0 && b < 0.0 {
                            return Err(domain("zero raised to a negative power"));
                        }
                        a.powf(b)
                    }
                }
            }
            Expr::Call(func, args) => {
                let x = args[0].eval(values, vars)?;
                match func {
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(domain("sqrt of a negative number"));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(domain("log of a non-positive number"));
                        }
                        x.ln()
                    }
                    Func::Min => x.min(args[1].eval(values, vars)?),
                    Func::Max => x.max(args[1].eval(values, vars)?),
                    Func::Sign => {
                        if x > 0.0 {
                            1.0
                        } else if x < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(domain("non-finite result"))
        }
    }

    fn render(&self, vars: &[String]) -> String {
        let mut s = String::new();
        self.write(vars, &mut s);
        s
    }
}

/// Shortest round-tripping decimal; exponent notation outside `[1e-5, 1e16)`.
fn format_number(x: f64) -> String {
    if x == 0.0 || (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A parsed expression together with its variable table.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Expr,
    vars: Vec<String>,
}

impl Expression {
    pub fn new(root: Expr, vars: Vec<String>) -> Self {
        Expression { root, vars }
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Evaluates with positional values matching [`Expression::vars`].
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        self.root.eval(values, &self.vars)
    }

    /// Symbolic partial derivative with respect to variable `var`, lightly
    /// simplified. `abs`, `min` and `max` differentiate through `sign`, which
    /// is `0` at a tie.
    pub fn derivative(&self, var: usize) -> Expression {
        Expression {
            root: diff::derivative(&self.root, var),
            vars: self.vars.clone(),
        }
    }

    /// Evaluates with named bindings.
    pub fn eval_with(&self, bindings: &HashMap<&str, f64>) -> Result<f64, EvalError> {
        let values = self
            .vars
            .iter()
            .map(|name| {
                bindings
                    .get(name.as_str())
                    .copied()
                    .ok_or_else(|| EvalError::Unbound(name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.eval(&values)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.root.render(&self.vars))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken {
        found: String,
        expected: String,
    },
    UnexpectedEnd {
        expected: String,
    },
    InvalidNumber(String),
    UnknownVariable(String),
    UnknownFunction(String),
    Arity {
        func: String,
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "expected {expected}, found {found}")
            }
            ParseErrorKind::UnexpectedEnd { expected } => {
                write!(f, "unexpected end of input, expected {expected}")
            }
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number '{s}'"),
            ParseErrorKind::UnknownVariable(s) => write!(f, "unknown variable '{s}'"),
            ParseErrorKind::UnknownFunction(s) => write!(f, "unknown function '{s}'"),
            ParseErrorKind::Arity { func, expected, found } => {
                write!(f, "{func} takes {expected} argument(s), got {found}")
            }
        }
    }
}

/// Parse failure with byte offset and 1-based line/column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable '{0}'")]
    Unbound(String),
    #[error("domain error in '{subexpr}': {what}")]
    Domain { what: String, subexpr: String },
}
