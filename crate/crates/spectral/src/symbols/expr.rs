//! Closed-form expressions over the frequency variables, for custom symbols.
//!
//! Custom multipliers are given as one expression string per component in the
//! variables `xi1`, `xi2`. Grammar (EBNF):
//!
//! ```text
//! expr   = term , { ( "+" | "-" ) , term } ;
//! term   = unary , { ( "*" | "/" ) , unary } ;
//! unary  = "-" , unary | power ;
//! power  = atom , [ "^" , unary ] ;
//! atom   = number | "xi1" | "xi2" | "i"
//!        | ( "abs" | "sqrt" | "cos" | "sin" | "exp" ) , "(" , expr , ")"
//!        | "(" , expr , ")" ;
//! number = decimal floating literal ;
//! ```
//!
//! `^` associates to the right and binds tighter than unary minus, so
//! `-xi1^2` is −(ξ₁²). Evaluation is over ℂ: `i` is the imaginary unit,
//! `abs` the complex modulus, `sqrt` the principal branch. Odd symbols such
//! as `i*(-xi2)/sqrt(xi1^2+xi2^2)` are therefore expressible directly.
//!
//! The same grammar doubles for functions of position (initial data in
//! configs): `x1`/`x2` are accepted as aliases of the two variables.

use num_complex::Complex64;

use crate::error::{Result, SpectralError};

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    I,
    Xi(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Abs(Box<Node>),
    Sqrt(Box<Node>),
    Cos(Box<Node>),
    Sin(Box<Node>),
    Exp(Box<Node>),
}

/// A parsed, immutable expression. Keeps its source text for reporting.
#[derive(Debug, Clone)]
pub struct Expr {
    src: String,
    root: Node,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0, src };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(p.err(&format!("unexpected `{}`", p.tokens[p.pos].text)));
        }
        Ok(Expr {
            src: src.to_string(),
            root,
        })
    }

    pub fn src(&self) -> &str {
        &self.src
    }

    pub fn eval(&self, xi: [f64; 2]) -> Complex64 {
        eval_node(&self.root, xi)
    }
}

fn eval_node(node: &Node, xi: [f64; 2]) -> Complex64 {
    match node {
        Node::Num(v) => Complex64::new(*v, 0.0),
        Node::I => Complex64::new(0.0, 1.0),
        Node::Xi(a) => Complex64::new(xi[*a], 0.0),
        Node::Neg(e) => -eval_node(e, xi),
        Node::Add(l, r) => eval_node(l, xi) + eval_node(r, xi),
        Node::Sub(l, r) => eval_node(l, xi) - eval_node(r, xi),
        Node::Mul(l, r) => eval_node(l, xi) * eval_node(r, xi),
        Node::Div(l, r) => eval_node(l, xi) / eval_node(r, xi),
        Node::Pow(l, r) => cpow(eval_node(l, xi), eval_node(r, xi)),
        Node::Abs(e) => Complex64::new(eval_node(e, xi).norm(), 0.0),
        Node::Sqrt(e) => eval_node(e, xi).sqrt(),
        Node::Cos(e) => eval_node(e, xi).cos(),
        Node::Sin(e) => eval_node(e, xi).sin(),
        Node::Exp(e) => eval_node(e, xi).exp(),
    }
}

/// Integer powers go through `powi` so that e.g. xi1^2 is exact; everything
/// else takes the principal branch via `powc`.
fn cpow(z: Complex64, w: Complex64) -> Complex64 {
    if w.im == 0.0 && w.re.fract() == 0.0 && w.re.abs() <= 512.0 {
        z.powi(w.re as i32)
    } else {
        z.powc(w)
    }
}

#[derive(Debug, Clone)]
struct Token {
    text: String,
    at: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/^()".contains(c) {
            out.push(Token {
                text: c.to_string(),
                at: i,
            });
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_digit()
                    || bytes[i] == '.'
                    || bytes[i] == 'e'
                    || bytes[i] == 'E'
                    // exponent sign, only directly after e/E
                    || ((bytes[i] == '+' || bytes[i] == '-')
                        && i > start
                        && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
            {
                i += 1;
            }
            out.push(Token {
                text: bytes[start..i].iter().collect(),
                at: start,
            });
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push(Token {
                text: bytes[start..i].iter().collect(),
                at: start,
            });
        } else {
            return Err(SpectralError::Expr(format!(
                "unexpected character `{c}` at byte {i} in \"{src}\""
            )));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> SpectralError {
        let near = self.tokens.get(self.pos).or_else(|| self.tokens.last());
        match near {
            Some(t) => SpectralError::Expr(format!("{msg} at byte {} in \"{}\"", t.at, self.src)),
            None => SpectralError::Expr(format!("{msg} in \"{}\"", self.src)),
        }
    }

    fn peek(&self) -> Option<&str> {
        self.tokens.get(self.pos).map(|t| t.text.as_str())
    }

    fn bump(&mut self) -> Option<String> {
        let t = self.tokens.get(self.pos).map(|t| t.text.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, what: &str) -> Result<()> {
        match self.bump() {
            Some(t) if t == what => Ok(()),
            Some(t) => Err(self.err(&format!("expected `{what}`, found `{t}`"))),
            None => Err(self.err(&format!("expected `{what}`, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut acc = self.term()?;
        while let Some(op) = self.peek() {
            match op {
                "+" => {
                    self.bump();
                    acc = Node::Add(Box::new(acc), Box::new(self.term()?));
                }
                "-" => {
                    self.bump();
                    acc = Node::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Node> {
        let mut acc = self.unary()?;
        while let Some(op) = self.peek() {
            match op {
                "*" => {
                    self.bump();
                    acc = Node::Mul(Box::new(acc), Box::new(self.unary()?));
                }
                "/" => {
                    self.bump();
                    acc = Node::Div(Box::new(acc), Box::new(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek() == Some("-") {
            self.bump();
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek() == Some("^") {
            self.bump();
            // right-associative, and `2^-1` style exponents go through unary
            Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self
            .bump()
            .ok_or_else(|| self.err("expected a value, found end of input"))?;
        match tok.as_str() {
            "(" => {
                let inner = self.expr()?;
                self.expect(")")?;
                Ok(inner)
            }
            "xi1" | "x1" => Ok(Node::Xi(0)),
            "xi2" | "x2" => Ok(Node::Xi(1)),
            "i" => Ok(Node::I),
            "abs" | "sqrt" | "cos" | "sin" | "exp" => {
                self.expect("(")?;
                let inner = self.expr()?;
                self.expect(")")?;
                Ok(match tok.as_str() {
                    "abs" => Node::Abs(Box::new(inner)),
                    "sqrt" => Node::Sqrt(Box::new(inner)),
                    "cos" => Node::Cos(Box::new(inner)),
                    "sin" => Node::Sin(Box::new(inner)),
                    _ => Node::Exp(Box::new(inner)),
                })
            }
            t if t.starts_with(|c: char| c.is_ascii_digit() || c == '.') => t
                .parse::<f64>()
                .map(Node::Num)
                .map_err(|_| self.err(&format!("bad number literal `{t}`"))),
            t => Err(self.err(&format!("unknown name `{t}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, xi: [f64; 2]) -> Complex64 {
        Expr::parse(src).unwrap().eval(xi)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(ev("1+2*3", [0.0, 0.0]), Complex64::new(7.0, 0.0));
        assert_eq!(ev("(1+2)*3", [0.0, 0.0]), Complex64::new(9.0, 0.0));
        assert_eq!(ev("2^3^2", [0.0, 0.0]), Complex64::new(512.0, 0.0));
        assert_eq!(ev("-xi1^2", [3.0, 0.0]), Complex64::new(-9.0, 0.0));
        assert_eq!(ev("2^-1", [0.0, 0.0]), Complex64::new(0.5, 0.0));
        assert_eq!(ev("1.5e2", [0.0, 0.0]), Complex64::new(150.0, 0.0));
    }

    #[test]
    fn variables_functions_and_i() {
        assert_eq!(ev("xi1*xi2", [2.0, 3.0]), Complex64::new(6.0, 0.0));
        assert_eq!(ev("abs(i*xi1)", [-2.0, 0.0]), Complex64::new(2.0, 0.0));
        assert_eq!(ev("sqrt(xi1^2+xi2^2)", [3.0, 4.0]), Complex64::new(5.0, 0.0));
        assert_eq!(ev("i*xi2", [0.0, 3.0]), Complex64::new(0.0, 3.0));
        let v = ev("cos(x1) + 0.5*sin(2*x2)", [1.2, 0.7]);
        assert!((v - Complex64::new((1.2f64).cos() + 0.5 * (1.4f64).sin(), 0.0)).norm() <= 1e-15);
        let v = ev("exp(i*x1)", [0.3, 0.0]);
        assert!((v - Complex64::new((0.3f64).cos(), (0.3f64).sin())).norm() <= 1e-15);
    }

    #[test]
    fn drift_formula_matches_hand_values() {
        // the even builtin written out as expressions
        let e1 = Expr::parse("xi1*xi2/(xi1^2+xi2^2)").unwrap();
        let e2 = Expr::parse("-xi1^2/(xi1^2+xi2^2)").unwrap();
        assert_eq!(e1.eval([1.0, 0.0]), Complex64::new(0.0, 0.0));
        assert_eq!(e2.eval([1.0, 0.0]), Complex64::new(-1.0, 0.0));
        assert_eq!(e1.eval([1.0, 1.0]), Complex64::new(0.5, 0.0));
        assert_eq!(e2.eval([1.0, 1.0]), Complex64::new(-0.5, 0.0));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["xi3", "1+", "(", "1 2", "tan(xi1)", "1..2", "@"] {
            assert!(Expr::parse(bad).is_err(), "`{bad}` should fail to parse");
        }
    }
}
