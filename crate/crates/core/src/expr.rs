//! Closed-form coefficient expressions in the coordinate `x` (or `r`).

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::fields::CoefField;
use crate::geometry::{Geometry, Side};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("cannot parse expression `{source_text}`: {reason}")]
pub struct ExprError {
    pub source_text: String,
    pub reason: String,
}

/// Parsed expression. Supports `+ − * / ^`, parentheses, `sin`, `cos`,
/// `exp`, `abs` and the coordinate under either name `x` or `r`.
#[derive(Clone)]
pub struct Expr {
    text: String,
    parsed: meval::Expr,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Self, ExprError> {
        let fail = |reason: String| ExprError {
            source_text: text.to_string(),
            reason,
        };
        let parsed = meval::Expr::from_str(text).map_err(|e| fail(e.to_string()))?;
        // binding checks that no other free variables remain
        let _ = parsed.clone().bind2("x", "r").map_err(|e| fail(e.to_string()))?;
        Ok(Expr {
            text: text.to_string(),
            parsed,
        })
    }

    pub fn constant(value: f64) -> Self {
        Expr::parse(&format!("{value:?}")).expect("float literal parses")
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn eval(&self, x: f64) -> f64 {
        let f = self.parsed.clone().bind2("x", "r").expect("checked at parse time");
        f(x, x)
    }

    /// Samples the expression at the nodes of one side.
    pub fn sample<T: Real>(&self, g: &Geometry<T>, side: Side) -> CoefField<T> {
        let f = self.parsed.clone().bind2("x", "r").expect("checked at parse time");
        CoefField::from_fn(g, side, |x| {
            let x = x.as_f64();
            T::lit(f(x, x))
        })
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.text)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Expr::constant(v)),
            Raw::Text(t) => Expr::parse(&t).map_err(de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let e = Expr::parse("1 + sin(3*x) - cos(2*r)^2 / exp(abs(x))").unwrap();
        let x: f64 = -0.4;
        let want = 1.0 + (3.0 * x).sin() - (2.0 * x).cos().powi(2) / x.abs().exp();
        assert!((e.eval(x) - want).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_symbols() {
        assert!(Expr::parse("y + 1").is_err());
        assert!(Expr::parse("sin(").is_err());
    }

    #[test]
    fn deserializes_numbers_and_strings() {
        let v: Vec<Expr> = serde_json::from_str(r#"[2.5, "x^2"]"#).unwrap();
        assert_eq!(v[0].eval(7.0), 2.5);
        assert_eq!(v[1].eval(3.0), 9.0);
        assert!(serde_json::from_str::<Expr>(r#""z""#).is_err());
    }
}
