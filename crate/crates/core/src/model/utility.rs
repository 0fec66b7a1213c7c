use alloc::boxed::Box;
use alloc::string::ToString;
use core::fmt;

use crate::error::{EvalError, EvalErrorKind};
use crate::math;

/// The two observables a utility may depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Mse,
    Pa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Log,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression tree over `(MSE, PA)`.
///
/// Utilities are data: `Q_DC` and `Q_AD` are parsed from text such as
/// `"-MSE + 25*PA"` or `"log(MSE) + 0.75*log(PA)"` and evaluated with
/// [`UtilityExpr::eval`]. Equality is structural.
#[derive(Debug, Clone, PartialEq)]
pub enum UtilityExpr {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Box<UtilityExpr>),
    Binary(BinaryOp, Box<UtilityExpr>, Box<UtilityExpr>),
    /// Power with a constant exponent.
    Pow(Box<UtilityExpr>, f64),
}

impl UtilityExpr {
    pub fn constant(value: f64) -> Self {
        UtilityExpr::Const(value)
    }

    pub fn mse() -> Self {
        UtilityExpr::Var(Var::Mse)
    }

    pub fn pa() -> Self {
        UtilityExpr::Var(Var::Pa)
    }

    pub fn unary(op: UnaryOp, arg: UtilityExpr) -> Self {
        UtilityExpr::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: UtilityExpr, rhs: UtilityExpr) -> Self {
        UtilityExpr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn pow(base: UtilityExpr, exponent: f64) -> Self {
        UtilityExpr::Pow(Box::new(base), exponent)
    }

    /// Evaluates the tree at `(mse, pa)`.
    ///
    /// Fails on `log` of a non-positive argument, `sqrt` of a negative one,
    /// division by zero, or any non-finite intermediate.
    pub fn eval(&self, mse: f64, pa: f64) -> Result<f64, EvalError> {
        let value = match self {
            UtilityExpr::Const(c) => *c,
            UtilityExpr::Var(Var::Mse) => mse,
            UtilityExpr::Var(Var::Pa) => pa,
            UtilityExpr::Unary(op, arg) => {
                let x = arg.eval(mse, pa)?;
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Log => {
                        if x <= 0.0 {
                            return Err(self.error(EvalErrorKind::LogNonPositive, x));
                        }
                        math::ln(x)
                    }
                    UnaryOp::Sqrt => {
                        if x < 0.0 {
                            return Err(self.error(EvalErrorKind::SqrtNegative, x));
                        }
                        math::sqrt(x)
                    }
                }
            }
            UtilityExpr::Binary(op, lhs, rhs) => {
                let a = lhs.eval(mse, pa)?;
                let b = rhs.eval(mse, pa)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(self.error(EvalErrorKind::DivideByZero, b));
                        }
                        a / b
                    }
                }
            }
            UtilityExpr::Pow(base, exponent) => math::powf(base.eval(mse, pa)?, *exponent),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.error(EvalErrorKind::NonFinite, value))
        }
    }

    /// Whether `var` occurs anywhere in the tree.
    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            UtilityExpr::Const(_) => false,
            UtilityExpr::Var(v) => *v == var,
            UtilityExpr::Unary(_, arg) => arg.depends_on(var),
            UtilityExpr::Binary(_, lhs, rhs) => lhs.depends_on(var) || rhs.depends_on(var),
            UtilityExpr::Pow(base, _) => base.depends_on(var),
        }
    }

    fn error(&self, kind: EvalErrorKind, argument: f64) -> EvalError {
        EvalError {
            kind,
            expr: self.to_string(),
            argument,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            UtilityExpr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            UtilityExpr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            UtilityExpr::Unary(UnaryOp::Neg, _) => 3,
            UtilityExpr::Pow(..) => 4,
            // negative literals print as `(-c)` and count as atoms
            UtilityExpr::Const(_) | UtilityExpr::Var(_) | UtilityExpr::Unary(..) => 5,
        }
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, value: f64) -> fmt::Result {
    // `{}` on f64 is the shortest string that parses back to the same bits
    if value < 0.0 || (value == 0.0 && value.is_sign_negative()) {
        write!(f, "(-{})", -value)
    } else {
        write!(f, "{}", value)
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, expr: &UtilityExpr, min_prec: u8) -> fmt::Result {
    if expr.precedence() < min_prec {
        write!(f, "({})", expr)
    } else {
        write!(f, "{}", expr)
    }
}

/// Canonical printer: minimal parentheses, `parse(print(e)) == e`.
impl fmt::Display for UtilityExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UtilityExpr::Const(c) => write_number(f, *c),
            UtilityExpr::Var(Var::Mse) => f.write_str("MSE"),
            UtilityExpr::Var(Var::Pa) => f.write_str("PA"),
            UtilityExpr::Unary(UnaryOp::Neg, arg) => match **arg {
                // `-2` would re-parse as the literal -2
                UtilityExpr::Const(c) if !c.is_sign_negative() => write!(f, "-({})", c),
                _ => {
                    f.write_str("-")?;
                    write_operand(f, arg, 3)
                }
            },
            UtilityExpr::Unary(UnaryOp::Log, arg) => write!(f, "log({})", arg),
            UtilityExpr::Unary(UnaryOp::Sqrt, arg) => write!(f, "sqrt({})", arg),
            UtilityExpr::Binary(op, lhs, rhs) => {
                let (symbol, prec) = match op {
                    BinaryOp::Add => (" + ", 1),
                    BinaryOp::Sub => (" - ", 1),
                    BinaryOp::Mul => ("*", 2),
                    BinaryOp::Div => ("/", 2),
                };
                write_operand(f, lhs, prec)?;
                f.write_str(symbol)?;
                // left-associative: an equal-precedence right operand needs parens
                write_operand(f, rhs, prec + 1)
            }
            UtilityExpr::Pow(base, exponent) => {
                write_operand(f, base, 5)?;
                f.write_str("^")?;
                write_number(f, *exponent)
            }
        }
    }
}

impl core::str::FromStr for UtilityExpr {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        super::parse::parse_utility(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_utility;

    fn eval(text: &str, mse: f64, pa: f64) -> Result<f64, EvalError> {
        parse_utility(text).unwrap().eval(mse, pa)
    }

    #[test]
    fn example_one_dc_utility() {
        let v = eval("-MSE + 25*PA", 10.07, 0.807).unwrap();
        assert!((v - 10.105).abs() < 1e-12);
    }

    #[test]
    fn log_of_one_is_zero() {
        assert_eq!(eval("log(MSE) + 0.75*log(PA)", 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn ratio_utility() {
        let v = eval("PA / sqrt(MSE)", 6.52, 0.214).unwrap();
        assert!((v - 0.214 / 6.52f64.sqrt()).abs() < 1e-15);
        assert!((v - 0.0838).abs() < 5e-5);
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let err = eval("1 + log(PA)", 1.0, 0.0).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::LogNonPositive);
        assert_eq!(err.expr, "log(PA)");

        let err = eval("PA/MSE", 0.0, 0.5).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::DivideByZero);
        assert_eq!(err.expr, "PA/MSE");

        let err = eval("sqrt(PA - 1)", 1.0, 0.5).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::SqrtNegative);
    }

    #[test]
    fn sqrt_of_zero_is_allowed() {
        assert_eq!(eval("sqrt(PA)", 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn pow_with_constant_exponent() {
        assert_eq!(eval("MSE^2", 3.0, 0.5).unwrap(), 9.0);
        assert!((eval("MSE^-0.5", 4.0, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(eval("(PA - 1)^0.5", 1.0, 0.5).unwrap_err().kind, EvalErrorKind::NonFinite);
    }

    #[test]
    fn printer_is_minimal() {
        let cases = [
            ("-MSE + 25*PA", "-MSE + 25*PA"),
            ("log(MSE)+0.75*log(PA)", "log(MSE) + 0.75*log(PA)"),
            ("PA/sqrt(MSE)", "PA/sqrt(MSE)"),
            ("MSE - (PA - 1)", "MSE - (PA - 1)"),
            ("(MSE - PA) - 1", "MSE - PA - 1"),
            ("-(MSE*PA)", "-(MSE*PA)"),
            ("(-MSE)^2", "(-MSE)^2"),
            ("-2", "(-2)"),
        ];
        for (input, printed) in cases {
            assert_eq!(parse_utility(input).unwrap().to_string(), printed, "{input}");
        }
    }

    #[test]
    fn depends_on() {
        let e = parse_utility("25*PA").unwrap();
        assert!(e.depends_on(Var::Pa));
        assert!(!e.depends_on(Var::Mse));
    }
}
