//! Scalar expression trees over chart coordinates.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::jets::{jet_apply, Elementary, Jet2, JetError};

/// Named one-argument functions of the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
    /// `pow(x, p)`, the only two-argument call.
    Pow,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "tan" => Self::Tan,
            "sinh" => Self::Sinh,
            "cosh" => Self::Cosh,
            "tanh" => Self::Tanh,
            "exp" => Self::Exp,
            "log" | "ln" => Self::Log,
            "sqrt" => Self::Sqrt,
            "abs" => Self::Abs,
            "pow" => Self::Pow,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Tan => "tan",
            Self::Sinh => "sinh",
            Self::Cosh => "cosh",
            Self::Tanh => "tanh",
            Self::Exp => "exp",
            Self::Log => "log",
            Self::Sqrt => "sqrt",
            Self::Abs => "abs",
            Self::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        if self == Self::Pow {
            2
        } else {
            1
        }
    }

    fn elementary(self) -> Elementary {
        match self {
            Self::Sin => Elementary::Sin,
            Self::Cos => Elementary::Cos,
            Self::Tan => Elementary::Tan,
            Self::Sinh => Elementary::Sinh,
            Self::Cosh => Elementary::Cosh,
            Self::Tanh => Elementary::Tanh,
            Self::Exp => Elementary::Exp,
            Self::Log => Elementary::Log,
            Self::Sqrt => Elementary::Sqrt,
            Self::Abs => Elementary::Abs,
            Self::Pow => unreachable!("pow is binary"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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
            Self::Add => "+",
            Self::Sub => "-",
            Self::Mul => "*",
            Self::Div => "/",
            Self::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            Self::Add | Self::Sub => 1,
            Self::Mul | Self::Div => 2,
            Self::Pow => 4,
        }
    }
}

/// A univariate function known only numerically, e.g. an ODE trajectory.
///
/// `taylor(x)` returns `(f(x), f'(x), f''(x))`.
pub trait UnivariateFn: Send + Sync {
    fn name(&self) -> &str;
    fn taylor(&self, x: f64) -> Result<(f64, f64, f64), JetError>;
}

/// Scalar expression.
///
/// Variables carry the index (`slot`) of the coordinate they refer to in the
/// chart the expression was resolved against; `None` means unresolved.
#[derive(Clone)]
pub enum Expr {
    Num(f64),
    Var {
        name: String,
        slot: Option<usize>,
    },
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Func,
        args: Vec<Expr>,
    },
    Custom {
        func: Arc<dyn UnivariateFn>,
        arg: Box<Expr>,
    },
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use Expr::*;
        match (self, other) {
            (Num(a), Num(b)) => a.to_bits() == b.to_bits(),
            (Var { name: a, slot: sa }, Var { name: b, slot: sb }) => a == b && sa == sb,
            (Neg(a), Neg(b)) => a == b,
            (
                Binary {
                    op: oa,
                    lhs: la,
                    rhs: ra,
                },
                Binary {
                    op: ob,
                    lhs: lb,
                    rhs: rb,
                },
            ) => oa == ob && la == lb && ra == rb,
            (Call { func: fa, args: aa }, Call { func: fb, args: ab }) => fa == fb && aa == ab,
            (Custom { func: fa, arg: aa }, Custom { func: fb, arg: ab }) => Arc::ptr_eq(fa, fb) && aa == ab,
            _ => false,
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    pub fn num(v: f64) -> Self {
        Expr::Num(v)
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var {
            name: name.into(),
            slot: None,
        }
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn call(func: Func, arg: Expr) -> Self {
        Expr::Call { func, args: vec![arg] }
    }

    pub fn custom(func: Arc<dyn UnivariateFn>, arg: Expr) -> Self {
        Expr::Custom {
            func,
            arg: Box::new(arg),
        }
    }

    pub fn recip(self) -> Self {
        Self::binary(BinOp::Div, Expr::Num(1.0), self)
    }

    pub fn powf(self, p: f64) -> Self {
        Self::binary(BinOp::Pow, self, Expr::Num(p))
    }

    /// Free coordinate symbols.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |name, _| {
            out.insert(name.to_string());
        });
        out
    }

    fn visit_vars(&self, f: &mut impl FnMut(&str, Option<usize>)) {
        match self {
            Expr::Num(_) => {}
            Expr::Var { name, slot } => f(name, *slot),
            Expr::Neg(e) => e.visit_vars(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.visit_vars(f);
                rhs.visit_vars(f);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.visit_vars(f)),
            Expr::Custom { arg, .. } => arg.visit_vars(f),
        }
    }

    /// Binds every variable to its index in `chart`.
    ///
    /// The constant `pi` is accepted when not shadowed by a coordinate.
    pub fn resolve(&mut self, chart: &[String]) -> Result<(), String> {
        match self {
            Expr::Num(_) => Ok(()),
            Expr::Var { name, slot } => match chart.iter().position(|c| c == name) {
                Some(i) => {
                    *slot = Some(i);
                    Ok(())
                }
                None if name == "pi" => {
                    *self = Expr::Num(std::f64::consts::PI);
                    Ok(())
                }
                None => Err(name.clone()),
            },
            Expr::Neg(e) => e.resolve(chart),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.resolve(chart)?;
                rhs.resolve(chart)
            }
            Expr::Call { args, .. } => args.iter_mut().try_for_each(|a| a.resolve(chart)),
            Expr::Custom { arg, .. } => arg.resolve(chart),
        }
    }

    /// Returns a copy whose slots are shifted by `offset`.
    pub fn shifted(&self, offset: usize) -> Self {
        let mut e = self.clone();
        e.shift_in_place(offset);
        e
    }

    fn shift_in_place(&mut self, offset: usize) {
        match self {
            Expr::Num(_) => {}
            Expr::Var { slot, .. } => {
                if let Some(s) = slot {
                    *s += offset;
                }
            }
            Expr::Neg(e) => e.shift_in_place(offset),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.shift_in_place(offset);
                rhs.shift_in_place(offset);
            }
            Expr::Call { args, .. } => args.iter_mut().for_each(|a| a.shift_in_place(offset)),
            Expr::Custom { arg, .. } => arg.shift_in_place(offset),
        }
    }

    /// Largest resolved slot, if any variable is present.
    pub fn max_slot(&self) -> Option<usize> {
        let mut best = None;
        self.visit_vars(&mut |_, s| {
            if let Some(s) = s {
                best = Some(best.map_or(s, |b: usize| b.max(s)));
            }
        });
        best
    }

    /// Evaluates on coordinate jets. Variables must be resolved.
    pub fn eval_jet(&self, vars: &[Jet2]) -> Result<Jet2, JetError> {
        let dim = vars.first().map_or(0, Jet2::dim);
        match self {
            Expr::Num(v) => Ok(Jet2::constant(*v, dim)),
            Expr::Var { name, slot } => {
                let s = slot.unwrap_or_else(|| panic!("unresolved variable `{name}`"));
                Ok(vars[s].clone())
            }
            Expr::Neg(e) => Ok(-e.eval_jet(vars)?),
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval_jet(vars)?;
                let b = rhs.eval_jet(vars)?;
                match op {
                    BinOp::Add => Ok(&a + &b),
                    BinOp::Sub => Ok(&a - &b),
                    BinOp::Mul => crate::jets::checked_mul(&a, &b),
                    BinOp::Div => a.checked_div(&b),
                    BinOp::Pow => jet_pow(&a, &b),
                }
            }
            Expr::Call { func, args } => {
                let a = args[0].eval_jet(vars)?;
                if *func == Func::Pow {
                    let b = args[1].eval_jet(vars)?;
                    jet_pow(&a, &b)
                } else {
                    jet_apply(func.elementary(), &a)
                }
            }
            Expr::Custom { func, arg } => {
                let a = arg.eval_jet(vars)?;
                let (f0, f1, f2) = func.taylor(a.value())?;
                let out = a.chain(f0, f1, f2);
                if out.is_finite() {
                    Ok(out)
                } else {
                    Err(JetError::NonFinite {
                        function: "custom",
                        value: a.value(),
                    })
                }
            }
        }
    }

    /// Plain floating point evaluation with the same domain rules as
    /// [`Expr::eval_jet`].
    pub fn eval(&self, vars: &[f64]) -> Result<f64, JetError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var { name, slot } => vars[slot.unwrap_or_else(|| panic!("unresolved variable `{name}`"))],
            Expr::Neg(e) => -e.eval(vars)?,
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval(vars)?;
                let b = rhs.eval(vars)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(JetError::Domain {
                                function: "recip",
                                value: b,
                            });
                        }
                        a / b
                    }
                    BinOp::Pow => f64_pow(a, b)?,
                }
            }
            Expr::Call { func, args } => {
                let a = args[0].eval(vars)?;
                if *func == Func::Pow {
                    f64_pow(a, args[1].eval(vars)?)?
                } else {
                    func.elementary().taylor(a)?.0
                }
            }
            Expr::Custom { func, arg } => func.taylor(arg.eval(vars)?)?.0,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(JetError::NonFinite {
                function: "eval",
                value: v,
            })
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.is_sign_negative() => 3,
            _ => 5,
        }
    }
}

fn jet_pow(base: &Jet2, exponent: &Jet2) -> Result<Jet2, JetError> {
    if exponent.is_constant() {
        return jet_apply(Elementary::Pow(exponent.value()), base);
    }
    // a^b = exp(b log a), needs a > 0
    let log = jet_apply(Elementary::Log, base)?;
    jet_apply(Elementary::Exp, &(exponent * &log))
}

fn f64_pow(a: f64, b: f64) -> Result<f64, JetError> {
    Ok(Elementary::Pow(b).taylor(a)?.0)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write_num(f, *v),
            Expr::Var { name, .. } => f.write_str(name),
            Expr::Neg(e) => match **e {
                // "-2" would read back as a negative literal
                Expr::Num(v) if !v.is_sign_negative() => write!(f, "-({e})"),
                _ if e.precedence() < 3 => write!(f, "-({e})"),
                _ => write!(f, "-{e}"),
            },
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                let (lp, rp) = (lhs.precedence(), rhs.precedence());
                let left_parens = if *op == BinOp::Pow { lp <= p } else { lp < p };
                let right_parens = if *op == BinOp::Pow { rp < 3 } else { rp <= p };
                paren(f, lhs, left_parens)?;
                if *op == BinOp::Pow {
                    f.write_str("^")?;
                } else {
                    write!(f, " {} ", op.symbol())?;
                }
                paren(f, rhs, right_parens)
            }
            Expr::Call { func, args } => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Custom { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}

fn paren(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // `{:?}` is the shortest representation that reads back bit-exactly
    let s = format!("{v:?}");
    f.write_str(s.strip_suffix(".0").unwrap_or(&s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(text: &str, chart: &[&str]) -> Expr {
        let mut e = crate::dsl::parser::parse_expr(text).unwrap();
        let chart: Vec<String> = chart.iter().map(|s| s.to_string()).collect();
        e.resolve(&chart).unwrap();
        e
    }

    #[test]
    fn symbols_and_resolution() {
        let mut e = crate::dsl::parser::parse_expr("cosh(t) + x*pi").unwrap();
        let syms: Vec<_> = e.symbols().into_iter().collect();
        assert_eq!(syms, vec!["pi", "t", "x"]);
        assert_eq!(e.resolve(&["t".into()]), Err("x".to_string()));
        let e = resolved("cosh(t) + x*pi", &["x", "t"]);
        assert!((e.eval(&[1.0, 0.0]).unwrap() - (1.0 + std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn variable_exponent_uses_exp_log() {
        let e = resolved("x^y", &["x", "y"]);
        let jets = Jet2::coordinates(&[2.0, 3.0]);
        let j = e.eval_jet(&jets).unwrap();
        assert!((j.value() - 8.0).abs() < 1e-12);
        assert!((j.gradient()[0] - 12.0).abs() < 1e-12);
        assert!((j.gradient()[1] - 8.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rational_power_needs_positive_base() {
        let e = resolved("pow(x, 2/3)", &["x"]);
        assert!(e.eval(&[-1.0]).is_err());
        assert!((e.eval(&[8.0]).unwrap() - 4.0).abs() < 1e-14);
        let cube = resolved("x^3", &["x"]);
        assert_eq!(cube.eval(&[-2.0]).unwrap(), -8.0);
    }

    #[test]
    fn printing_keeps_structure() {
        for text in [
            "a - (b - c)",
            "(a^b)^c",
            "a^b^c",
            "-(a + b)",
            "(-2)^x",
            "2^-x",
            "a / (b * c)",
        ] {
            let e = crate::dsl::parser::parse_expr(text).unwrap();
            let again = crate::dsl::parser::parse_expr(&e.to_string()).unwrap();
            assert_eq!(e, again, "{text} printed as {e}");
        }
        assert_eq!(
            crate::dsl::parser::parse_expr("24*x^-3").unwrap().to_string(),
            "24 * x^-3"
        );
    }
}
