//! Symbolic eigenvalue-ratio expressions.
//!
//! Exponents and stability conditions are reported both numerically and as
//! text in the λ-ratio notation, e.g. `-λ_{1,4}/max(λ_{1,2},λ_{1,3})`.
//! Rendering is canonical: singleton min/max collapse and whitespace is
//! never emitted, so string equality after `normalize` is expression
//! equality for the grammar used here.

use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "String")]
pub enum Expr {
    One,
    /// λ_{j,k}: the eigenvalue at equilibrium `j` along coordinate `k`.
    Lam(usize, usize),
    Neg(Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// `lhs - rhs`
    Sub(Box<Expr>, Box<Expr>),
    Min(Vec<Expr>),
    Max(Vec<Expr>),
    Mul(Vec<Expr>),
}

impl Expr {
    pub fn lam(j: usize, k: usize) -> Expr {
        Expr::Lam(j, k)
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    /// max over λ_{j,k} for k in `coords` (singleton collapses).
    pub fn max_lam(j: usize, coords: impl IntoIterator<Item = usize>) -> Expr {
        let items: Vec<Expr> = coords.into_iter().map(|k| Expr::Lam(j, k)).collect();
        Expr::Max(items)
    }

    pub fn eval(&self, lam: &impl Fn(usize, usize) -> f64) -> f64 {
        match self {
            Expr::One => 1.0,
            Expr::Lam(j, k) => lam(*j, *k),
            Expr::Neg(e) => -e.eval(lam),
            Expr::Div(a, b) => a.eval(lam) / b.eval(lam),
            Expr::Sub(a, b) => a.eval(lam) - b.eval(lam),
            Expr::Min(items) => items
                .iter()
                .map(|e| e.eval(lam))
                .fold(f64::INFINITY, f64::min),
            Expr::Max(items) => items
                .iter()
                .map(|e| e.eval(lam))
                .fold(f64::NEG_INFINITY, f64::max),
            Expr::Mul(items) => items.iter().map(|e| e.eval(lam)).product(),
        }
    }

    /// Singleton min/max render as their inner expression.
    fn resolved(&self) -> &Expr {
        match self {
            Expr::Min(items) | Expr::Max(items) if items.len() == 1 => items[0].resolved(),
            other => other,
        }
    }

    fn is_atom(&self) -> bool {
        matches!(self.resolved(), Expr::One | Expr::Lam(..))
    }

    /// A call like min(...)/max(...) needs no extra parentheses.
    fn is_call(&self) -> bool {
        matches!(self.resolved(), Expr::Min(_) | Expr::Max(_))
    }

    fn wrap(&self, out: &mut String) {
        if self.is_atom() || self.is_call() {
            self.write(out);
        } else {
            out.push('(');
            self.write(out);
            out.push(')');
        }
    }

    fn write(&self, out: &mut String) {
        match self.resolved() {
            Expr::One => out.push('1'),
            Expr::Lam(j, k) => out.push_str(&format!("λ_{{{j},{k}}}")),
            Expr::Neg(e) => {
                out.push('-');
                match e.resolved() {
                    x if x.is_atom() || x.is_call() => x.write(out),
                    Expr::Div(a, b) => write_div(a, b, out),
                    x => x.wrap(out),
                }
            }
            Expr::Div(a, b) => write_div(a, b, out),
            Expr::Sub(a, b) => {
                a.write(out);
                out.push('-');
                match b.resolved() {
                    x if x.is_atom() || x.is_call() => x.write(out),
                    Expr::Div(n, d) => write_div(n, d, out),
                    x => x.wrap(out),
                }
            }
            call @ (Expr::Min(_) | Expr::Max(_)) => {
                let (name, items) = match call {
                    Expr::Min(items) => ("min(", items),
                    Expr::Max(items) => ("max(", items),
                    _ => unreachable!(),
                };
                out.push_str(name);
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    e.write(out);
                }
                out.push(')');
            }
            Expr::Mul(items) => {
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        out.push('*');
                    }
                    e.wrap(out);
                }
            }
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }
}

fn write_div(a: &Expr, b: &Expr, out: &mut String) {
    a.wrap(out);
    out.push('/');
    b.wrap(out);
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl From<Expr> for String {
    fn from(e: Expr) -> String {
        e.render()
    }
}

/// Strips whitespace so hand-written reference strings compare reliably.
pub fn normalize(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}
