use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use crate::ids::{ObjTransId, VarName};
use crate::rate::{format_rational, Rational};

use super::term::Binding;
use super::GuardError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div => 2,
        }
    }
}

/// Arithmetic over rational literals and net-token rates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(Rational),
    /// The rate of object transition `transition` in the net bound to `var`.
    RateOf {
        var: VarName,
        transition: ObjTransId,
    },
    Neg(Box<Expr>),
    Bin(ArithOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn lit(r: Rational) -> Self {
        Expr::Lit(r)
    }

    pub fn rate_of(var: impl Into<VarName>, transition: impl Into<ObjTransId>) -> Self {
        Expr::RateOf {
            var: var.into(),
            transition: transition.into(),
        }
    }

    pub fn bin(op: ArithOp, a: Expr, b: Expr) -> Self {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn eval(&self, alpha: &Binding) -> Result<Rational, GuardError> {
        match self {
            Expr::Lit(r) => Ok(r.clone()),
            Expr::RateOf { var, transition } => {
                let net = alpha.get(var).ok_or_else(|| GuardError::UnboundVariable(var.clone()))?;
                net.rate(transition)
                    .map(|r| r.value().clone())
                    .ok_or_else(|| GuardError::UnknownTransition {
                        var: var.clone(),
                        transition: transition.clone(),
                    })
            }
            Expr::Neg(e) => Ok(-e.eval(alpha)?),
            Expr::Bin(op, a, b) => {
                let x = a.eval(alpha)?;
                let y = b.eval(alpha)?;
                Ok(match op {
                    ArithOp::Add => x + y,
                    ArithOp::Sub => x - y,
                    ArithOp::Mul => x * y,
                    ArithOp::Div => {
                        if y.is_zero() {
                            return Err(GuardError::DivisionByZero);
                        }
                        x / y
                    }
                })
            }
        }
    }

    /// Counts arithmetic operators and `rateOf` atoms.
    pub fn function_symbols(&self) -> usize {
        match self {
            Expr::Lit(_) => 0,
            Expr::RateOf { .. } => 1,
            Expr::Neg(e) => 1 + e.function_symbols(),
            Expr::Bin(_, a, b) => 1 + a.function_symbols() + b.function_symbols(),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarName>) {
        match self {
            Expr::Lit(_) => {}
            Expr::RateOf { var, .. } => {
                out.insert(var.clone());
            }
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8, right_side: bool) -> fmt::Result {
        match self {
            Expr::Lit(r) => f.write_str(&format_rational(r)),
            Expr::RateOf { var, transition } => write!(f, "rateOf({var}, {transition})"),
            // `-(2)` keeps a negated literal distinct from the literal -2
            Expr::Neg(e) if matches!(**e, Expr::Lit(_)) => write!(f, "-({e})"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_prec(f, 3, false)
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                let paren = p < parent || (p == parent && right_side);
                if paren {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, p, false)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, p, true)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0, false)
    }
}

/// A transition guard.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum Guard {
    #[default]
    True,
    Not(Box<Guard>),
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
    Cmp(CmpOp, Expr, Expr),
}

impl Guard {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Self {
        Guard::Cmp(op, a, b)
    }

    pub fn and(a: Guard, b: Guard) -> Self {
        Guard::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Guard, b: Guard) -> Self {
        Guard::Or(Box::new(a), Box::new(b))
    }

    pub fn negate(a: Guard) -> Self {
        Guard::Not(Box::new(a))
    }

    pub fn eval(&self, alpha: &Binding) -> Result<bool, GuardError> {
        match self {
            Guard::True => Ok(true),
            Guard::Not(g) => Ok(!g.eval(alpha)?),
            Guard::And(a, b) => Ok(a.eval(alpha)? && b.eval(alpha)?),
            Guard::Or(a, b) => Ok(a.eval(alpha)? || b.eval(alpha)?),
            Guard::Cmp(op, a, b) => {
                let x = a.eval(alpha)?;
                let y = b.eval(alpha)?;
                Ok(match op {
                    CmpOp::Lt => x < y,
                    CmpOp::Le => x <= y,
                    CmpOp::Eq => x == y,
                    CmpOp::Ge => x >= y,
                    CmpOp::Gt => x > y,
                })
            }
        }
    }

    /// Net-algebra operators occurring in the guard. The guard language has
    /// none, so this is always zero.
    pub fn net_op_count(&self) -> usize {
        0
    }

    /// Every function symbol: arithmetic operators and `rateOf` atoms.
    /// Comparisons and connectives are predicates and count zero.
    pub fn function_symbols(&self) -> usize {
        match self {
            Guard::True => 0,
            Guard::Not(g) => g.function_symbols(),
            Guard::And(a, b) | Guard::Or(a, b) => a.function_symbols() + b.function_symbols(),
            Guard::Cmp(_, a, b) => a.function_symbols() + b.function_symbols(),
        }
    }

    pub fn vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarName>) {
        match self {
            Guard::True => {}
            Guard::Not(g) => g.collect_vars(out),
            Guard::And(a, b) | Guard::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Guard::Cmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Guard::Or(..) => 1,
            Guard::And(..) => 2,
            Guard::Not(..) => 3,
            Guard::True | Guard::Cmp(..) => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Guard::True => f.write_str("true")?,
            Guard::Not(g) => {
                f.write_str("not ")?;
                g.fmt_prec(f, 3)?;
            }
            Guard::And(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" and ")?;
                b.fmt_prec(f, 3)?;
            }
            Guard::Or(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" or ")?;
                b.fmt_prec(f, 2)?;
            }
            Guard::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol())?,
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
