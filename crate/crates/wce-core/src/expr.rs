//! Closed-form expressions for weights, labels, and functions.
//!
//! The grammar is deliberately tiny: real literals, the variables `n`,
//! `j`, `x`, arithmetic `+ - * / ^` (with `^` right-associative), unary
//! minus, the one-argument functions `abs`, `sqrt`, `sign`, the
//! two-argument `min`, `max`, and the helper `k(n) = 1 + n*(n-1)/2`,
//! which is the block-start index of the staircase partition example.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := unary ("^" factor)?
//! unary  := "-" unary | atom
//! atom   := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! Error positions are 0-based byte offsets into the source.

use std::fmt;

use crate::scalar::{c, small_int_exponent, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    N,
    J,
    X,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::N => "n",
            Var::J => "j",
            Var::X => "x",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sqrt,
    Sign,
    Min,
    Max,
    K,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        match name {
            "abs" => Some((Func::Abs, 1)),
            "sqrt" => Some((Func::Sqrt, 1)),
            "sign" => Some((Func::Sign, 1)),
            "min" => Some((Func::Min, 2)),
            "max" => Some((Func::Max, 2)),
            "k" => Some((Func::K, 1)),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Sign => "sign",
            Func::Min => "min",
            Func::Max => "max",
            Func::K => "k",
        }
    }
}

/// Abstract syntax tree of a parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr<T> {
    Num(T),
    Var(Var),
    Neg(Box<Expr<T>>),
    Bin(BinOp, Box<Expr<T>>, Box<Expr<T>>),
    Call(Func, Vec<Expr<T>>),
}

/// Variable bindings for evaluation. Unset slots are unbound.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings<T> {
    pub n: Option<T>,
    pub j: Option<T>,
    pub x: Option<T>,
}

impl<T: Scalar> Bindings<T> {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn of_n(n: T) -> Self {
        Self { n: Some(n), ..Self::default() }
    }

    pub fn of_nj(n: T, j: T) -> Self {
        Self { n: Some(n), j: Some(j), ..Self::default() }
    }

    pub fn of_x(x: T) -> Self {
        Self { x: Some(x), ..Self::default() }
    }

    #[inline]
    fn get(&self, v: Var) -> Result<T, EvalError> {
        match v {
            Var::N => self.n,
            Var::J => self.j,
            Var::X => self.x,
        }
        .ok_or(EvalError::Unbound(v.name()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdent { name: String, pos: usize },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative base {base} with non-integer exponent {exponent}")]
    NegativeBase { base: f64, exponent: f64 },
    #[error("square root of negative value {0}")]
    NegativeSqrt(f64),
    #[error("unbound variable `{0}`")]
    Unbound(&'static str),
}

/// Parse a source string into an expression tree.
pub fn parse<T: Scalar>(source: &str) -> Result<Expr<T>, ParseError> {
    let mut p = Parser { src: source.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn accept(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, ch: u8) -> Result<(), ParseError> {
        if self.accept(ch) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", ch as char)))
        }
    }

    fn expr<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.accept(b'+') {
                let rhs = self.term()?;
                lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
            } else if self.accept(b'-') {
                let rhs = self.term()?;
                lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.accept(b'*') {
                let rhs = self.factor()?;
                lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
            } else if self.accept(b'/') {
                let rhs = self.factor()?;
                lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        let base = self.unary()?;
        if self.accept(b'^') {
            let exp = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        if self.accept(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => self.number(),
            Some(ch) if ch.is_ascii_alphabetic() || ch == b'_' => self.ident(),
            _ => Err(self.err("expected a value")),
        }
    }

    fn number<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Num(c(v))),
            Err(_) => Err(ParseError::Syntax { pos: start, message: format!("invalid number `{text}`") }),
        }
    }

    fn ident<T: Scalar>(&mut self) -> Result<Expr<T>, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        if self.peek() == Some(b'(') {
            let (func, arity) = Func::lookup(&name)
                .ok_or(ParseError::UnknownIdent { name: name.clone(), pos: start })?;
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while self.accept(b',') {
                args.push(self.expr()?);
            }
            self.expect(b')')?;
            if args.len() != arity {
                return Err(ParseError::Syntax {
                    pos: start,
                    message: format!("`{name}` takes {arity} argument(s), got {}", args.len()),
                });
            }
            Ok(Expr::Call(func, args))
        } else {
            match name.as_str() {
                "n" => Ok(Expr::Var(Var::N)),
                "j" => Ok(Expr::Var(Var::J)),
                "x" => Ok(Expr::Var(Var::X)),
                _ => Err(ParseError::UnknownIdent { name, pos: start }),
            }
        }
    }
}

impl<T: Scalar> Expr<T> {
    /// Evaluate under the given bindings.
    pub fn eval(&self, b: &Bindings<T>) -> Result<T, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(v) => b.get(*v),
            Expr::Neg(e) => Ok(-e.eval(b)?),
            Expr::Bin(op, lhs, rhs) => {
                let l = lhs.eval(b)?;
                let r = rhs.eval(b)?;
                match op {
                    BinOp::Add => Ok(l + r),
                    BinOp::Sub => Ok(l - r),
                    BinOp::Mul => Ok(l * r),
                    BinOp::Div => {
                        if r == T::zero() {
                            Err(EvalError::DivisionByZero)
                        } else {
                            Ok(l / r)
                        }
                    }
                    BinOp::Pow => pow(l, r),
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(b)?;
                match f {
                    Func::Abs => Ok(a.abs()),
                    Func::Sqrt => {
                        if a < T::zero() {
                            Err(EvalError::NegativeSqrt(a.to_f64().unwrap_or(f64::NAN)))
                        } else {
                            Ok(a.sqrt())
                        }
                    }
                    Func::Sign => Ok(if a > T::zero() {
                        T::one()
                    } else if a < T::zero() {
                        -T::one()
                    } else {
                        T::zero()
                    }),
                    Func::Min => Ok(a.min(args[1].eval(b)?)),
                    Func::Max => Ok(a.max(args[1].eval(b)?)),
                    Func::K => Ok(T::one() + a * (a - T::one()) / c(2.0)),
                }
            }
        }
    }

    /// The literal value, if the whole tree is a single literal.
    pub fn as_const(&self) -> Option<T> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }
}

fn pow<T: Scalar>(base: T, exp: T) -> Result<T, EvalError> {
    if let Some(k) = small_int_exponent(exp) {
        return Ok(base.powi(k));
    }
    if exp.fract() == T::zero() {
        // Integer exponent too large for powi: route through |base| and parity.
        let even = (exp / c(2.0)).fract() == T::zero();
        let mag = base.abs().powf(exp);
        return Ok(if base < T::zero() && !even { -mag } else { mag });
    }
    if base < T::zero() {
        return Err(EvalError::NegativeBase {
            base: base.to_f64().unwrap_or(f64::NAN),
            exponent: exp.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(base.powf(exp))
}

impl<T: Scalar> fmt::Display for Expr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({l}) {sym} ({r})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str) -> Expr<f64> {
        parse(src).unwrap()
    }

    #[test]
    fn precedence_divide_power() {
        // 1/n^3 groups as divide(1, power(n, 3))
        let e = p("1/n^3");
        assert_eq!(
            e,
            Expr::Bin(
                BinOp::Div,
                Box::new(Expr::Num(1.0)),
                Box::new(Expr::Bin(
                    BinOp::Pow,
                    Box::new(Expr::Var(Var::N)),
                    Box::new(Expr::Num(3.0))
                ))
            )
        );
    }

    #[test]
    fn power_right_associative() {
        let e = p("2^3^2");
        assert_eq!(e.eval(&Bindings::none()).unwrap(), 512.0);
    }

    #[test]
    fn helper_k_in_block_labels() {
        let e = p("2*(k(n)+j)");
        let v = e.eval(&Bindings::of_nj(3.0, 2.0)).unwrap();
        assert_eq!(v, 12.0); // 2*(4+2)
    }

    #[test]
    fn malformed_input_position() {
        match parse::<f64>("n +") {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier() {
        assert!(matches!(
            parse::<f64>("y + 1"),
            Err(ParseError::UnknownIdent { ref name, pos: 0 }) if name == "y"
        ));
        assert!(matches!(
            parse::<f64>("foo(2)"),
            Err(ParseError::UnknownIdent { ref name, .. }) if name == "foo"
        ));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("1/n^3").eval(&Bindings::of_n(2.0)).unwrap(), 0.125);
        assert_eq!(p("k(n)").eval(&Bindings::of_n(3.0)).unwrap(), 4.0);
        assert_eq!(p("x^2").eval(&Bindings::of_x(-2.0)).unwrap(), 4.0);
    }

    #[test]
    fn k_exact_for_integers() {
        for (n, want) in [(1.0, 1.0), (2.0, 2.0), (3.0, 4.0), (4.0, 7.0), (100.0, 4951.0)] {
            assert_eq!(p("k(n)").eval(&Bindings::of_n(n)).unwrap(), want);
        }
    }

    #[test]
    fn eval_errors() {
        assert_eq!(
            p("1/(n-n)").eval(&Bindings::of_n(5.0)),
            Err(EvalError::DivisionByZero)
        );
        assert!(matches!(
            p("x^1.5").eval(&Bindings::of_x(-2.0)),
            Err(EvalError::NegativeBase { .. })
        ));
        assert_eq!(p("n").eval(&Bindings::of_x(1.0)), Err(EvalError::Unbound("n")));
    }

    #[test]
    fn negative_base_integer_exponent_ok() {
        assert_eq!(p("x^3").eval(&Bindings::of_x(-2.0)).unwrap(), -8.0);
        assert_eq!(p("(0-2)^2").eval(&Bindings::none()).unwrap(), 4.0);
    }

    #[test]
    fn arity_checked() {
        assert!(parse::<f64>("min(1)").is_err());
        assert!(parse::<f64>("abs(1,2)").is_err());
    }

    #[test]
    fn scientific_notation() {
        assert_eq!(p("2.5e-3").eval(&Bindings::none()).unwrap(), 2.5e-3);
        assert_eq!(p("1e2").eval(&Bindings::none()).unwrap(), 100.0);
    }
}
