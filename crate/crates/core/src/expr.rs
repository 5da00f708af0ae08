//! Arithmetic expressions over named real variables.
//!
//! Grammar (`^` binds tightest and is right-associative; unary minus binds
//! looser than `^`, so `-t^2 = -(t^2)` and `t^-1` is accepted):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "·" | "/") unary)*
//! unary   := ("-" | "+") unary | power
//! power   := primary ("^" unary)?
//! primary := number | name | name "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! Names are the declared variables, the constants `e` and `pi`, or one of the
//! functions `ln`, `log` (natural), `exp`, `abs`, `sqrt`, `sin`, `cos`, `min`,
//! `max`, `pow`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func1 {
    Ln,
    Exp,
    Abs,
    Sqrt,
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func2 {
    Min,
    Max,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call1(Func1, Box<Node>),
    Call2(Func2, Box<Node>, Box<Node>),
}

/// A parsed expression bound to an ordered list of variable names.
#[derive(Clone, PartialEq)]
pub struct Expr {
    src: String,
    vars: Vec<String>,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.src)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

impl Expr {
    /// Parses `src`; only the names in `vars` are accepted as variables.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0, vars, end: src.len() };
        let root = p.expr()?;
        if p.pos < p.tokens.len() {
            return Err(p.error(&["operator", "end of input"]));
        }
        Ok(Expr {
            src: src.to_string(),
            vars: vars.iter().map(|v| v.to_string()).collect(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    /// Evaluates with `values[i]` bound to the i-th declared variable.
    pub fn eval(&self, values: &[f64]) -> f64 {
        eval(&self.root, values)
    }

    /// Single-variable shorthand.
    pub fn eval1(&self, x: f64) -> f64 {
        eval(&self.root, std::slice::from_ref(&x))
    }

    /// True when the expression does not mention any variable.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Num(_) => true,
                Node::Var(_) => false,
                Node::Neg(a) | Node::Call1(_, a) => walk(a),
                Node::Bin(_, a, b) | Node::Call2(_, a, b) => walk(a) && walk(b),
            }
        }
        walk(&self.root)
    }
}

fn eval(n: &Node, v: &[f64]) -> f64 {
    match n {
        Node::Num(x) => *x,
        Node::Var(i) => v[*i],
        Node::Neg(a) => -eval(a, v),
        Node::Bin(op, a, b) => {
            let (x, y) = (eval(a, v), eval(b, v));
            match op {
                Op::Add => x + y,
                Op::Sub => x - y,
                Op::Mul => x * y,
                Op::Div => x / y,
                Op::Pow => x.powf(y),
            }
        }
        Node::Call1(f, a) => {
            let x = eval(a, v);
            match f {
                Func1::Ln => x.ln(),
                Func1::Exp => x.exp(),
                Func1::Abs => x.abs(),
                Func1::Sqrt => x.sqrt(),
                Func1::Sin => x.sin(),
                Func1::Cos => x.cos(),
            }
        }
        Node::Call2(f, a, b) => {
            let (x, y) = (eval(a, v), eval(b, v));
            match f {
                Func2::Min => x.min(y),
                Func2::Max => x.max(y),
                Func2::Pow => x.powf(y),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' | '−' => Tok::Minus,
            '*' | '·' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            c if c.is_ascii_digit() || c == '.' => {
                let mut end = i;
                let mut prev = ' ';
                while let Some(&(j, d)) = it.peek() {
                    let exp_sign = (d == '+' || d == '-') && (prev == 'e' || prev == 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        end = j + d.len_utf8();
                        prev = d;
                        it.next();
                    } else {
                        break;
                    }
                }
                let text = &src[i..end];
                let x: f64 = text.parse().map_err(|_| Error::Parse {
                    offset: i,
                    expected: vec!["number".into()],
                })?;
                out.push((i, Tok::Num(x)));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut end = i;
                while let Some(&(j, d)) = it.peek() {
                    if d.is_alphanumeric() || d == '_' {
                        end = j + d.len_utf8();
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push((i, Tok::Name(src[i..end].to_string())));
                continue;
            }
            _ => {
                return Err(Error::Parse {
                    offset: i,
                    expected: vec!["number".into(), "name".into(), "operator".into(), "(".into()],
                })
            }
        };
        out.push((i, tok));
        it.next();
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    vars: &'a [&'a str],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn error(&self, expected: &[&str]) -> Error {
        Error::Parse {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => Op::Add,
                Some(Tok::Minus) => Op::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => Op::Mul,
                Some(Tok::Slash) => Op::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        const START: &[&str] = &["number", "variable", "function", "("];
        match self.peek().cloned() {
            Some(Tok::Num(x)) => {
                self.pos += 1;
                Ok(Node::Num(x))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(inner)
            }
            Some(Tok::Name(name)) => {
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    self.pos += 1;
                    return Ok(Node::Var(i));
                }
                match name.as_str() {
                    "e" => {
                        self.pos += 1;
                        return Ok(Node::Num(std::f64::consts::E));
                    }
                    "pi" => {
                        self.pos += 1;
                        return Ok(Node::Num(std::f64::consts::PI));
                    }
                    _ => {}
                }
                let f1 = match name.as_str() {
                    "ln" | "log" => Some(Func1::Ln),
                    "exp" => Some(Func1::Exp),
                    "abs" => Some(Func1::Abs),
                    "sqrt" => Some(Func1::Sqrt),
                    "sin" => Some(Func1::Sin),
                    "cos" => Some(Func1::Cos),
                    _ => None,
                };
                let f2 = match name.as_str() {
                    "min" => Some(Func2::Min),
                    "max" => Some(Func2::Max),
                    "pow" => Some(Func2::Pow),
                    _ => None,
                };
                if f1.is_none() && f2.is_none() {
                    let mut expected: Vec<&str> = self.vars.to_vec();
                    expected.extend(["e", "pi", "function name"]);
                    return Err(self.error(&expected));
                }
                self.pos += 1;
                self.expect(Tok::LParen, "(")?;
                let a = self.expr()?;
                if let Some(f) = f1 {
                    self.expect(Tok::RParen, ")")?;
                    return Ok(Node::Call1(f, Box::new(a)));
                }
                self.expect(Tok::Comma, ",")?;
                let b = self.expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(Node::Call2(f2.unwrap(), Box::new(a), Box::new(b)))
            }
            _ => Err(self.error(START)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(src: &str) -> Expr {
        Expr::parse(src, &["t"]).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(t("t^(-0.25)").eval1(0.0625), 2.0);
        assert!((t("abs(ln(t))").eval1((-1.0f64).exp()) - 1.0).abs() < 1e-15);
        match Expr::parse("t +", &["t"]) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(t("2^3^2").eval1(0.0), 512.0);
        assert_eq!(t("-2^2").eval1(0.0), -4.0);
        assert_eq!(t("1 - 2 - 3").eval1(0.0), -4.0);
        assert_eq!(t("8 / 4 / 2").eval1(0.0), 1.0);
        assert_eq!(t("2 + 3 * 4").eval1(0.0), 14.0);
        assert_eq!(t("t^-1").eval1(4.0), 0.25);
        assert_eq!(t("2·t").eval1(4.0), 8.0);
    }

    #[test]
    fn functions_and_constants() {
        assert_eq!(t("min(t, 2)").eval1(5.0), 2.0);
        assert_eq!(t("max(t, 2)").eval1(5.0), 5.0);
        assert_eq!(t("pow(t, 2)").eval1(3.0), 9.0);
        assert_eq!(t("ln(e)").eval1(0.0), 1.0);
        assert!((t("sin(pi/2)").eval1(0.0) - 1.0).abs() < 1e-15);
        assert_eq!(t("1.5e2").eval1(0.0), 150.0);
        assert_eq!(t("2e-1 + t").eval1(0.0), 0.2);
    }

    #[test]
    fn several_variables() {
        let e = Expr::parse("p * gamma + 1", &["p", "gamma"]).unwrap();
        assert_eq!(e.eval(&[2.0, 3.0]), 7.0);
        assert!(!e.is_constant());
        assert!(Expr::parse("3 + 4", &["t"]).unwrap().is_constant());
    }

    #[test]
    fn errors_carry_offsets() {
        for (src, off) in [("", 0), ("(t", 2), ("foo(t)", 0), ("t $ 2", 2), ("min(t)", 5), ("t t", 2)] {
            match Expr::parse(src, &["t"]) {
                Err(Error::Parse { offset, expected }) => {
                    assert_eq!(offset, off, "{src}");
                    assert!(!expected.is_empty());
                }
                other => panic!("{src}: {other:?}"),
            }
        }
    }
}
