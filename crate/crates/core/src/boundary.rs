//! Boundary conditions u^[1](0) − H u(0) = 0 and u^[1](1) + h u(1) = 0.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::potential::PiecewiseSigma;

/// A boundary parameter in ℝ ∪ {∞}; ∞ selects the Dirichlet condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryValue {
    Finite(f64),
    Infinite,
}

impl BoundaryValue {
    pub fn is_infinite(self) -> bool {
        matches!(self, BoundaryValue::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            BoundaryValue::Finite(v) => Some(v),
            BoundaryValue::Infinite => None,
        }
    }

    fn offset(self, shift: f64) -> Self {
        match self {
            BoundaryValue::Finite(v) => BoundaryValue::Finite(v + shift),
            BoundaryValue::Infinite => BoundaryValue::Infinite,
        }
    }
}

impl From<f64> for BoundaryValue {
    fn from(v: f64) -> Self {
        if v.is_infinite() {
            BoundaryValue::Infinite
        } else {
            BoundaryValue::Finite(v)
        }
    }
}

impl fmt::Display for BoundaryValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryValue::Finite(v) => write!(f, "{v}"),
            BoundaryValue::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for BoundaryValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(BoundaryValue::Infinite);
        }
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(BoundaryValue::Finite(v)),
            _ => Err(Error::MalformedInput(format!(
                "boundary value {s:?} is neither a finite number nor \"inf\""
            ))),
        }
    }
}

impl Serialize for BoundaryValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BoundaryValue::Finite(v) => serializer.serialize_f64(*v),
            BoundaryValue::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for BoundaryValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct BoundaryVisitor;

        impl Visitor<'_> for BoundaryVisitor {
            type Value = BoundaryValue;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a finite number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<BoundaryValue, E> {
                if v.is_finite() {
                    Ok(BoundaryValue::Finite(v))
                } else {
                    Err(E::custom("non-finite boundary value"))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BoundaryValue, E> {
                Ok(BoundaryValue::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BoundaryValue, E> {
                Ok(BoundaryValue::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BoundaryValue, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(BoundaryVisitor)
    }
}

/// The pair (H, h) of boundary parameters at x = 0 and x = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    #[serde(rename = "H")]
    pub left: BoundaryValue,
    #[serde(rename = "h")]
    pub right: BoundaryValue,
}

impl BoundaryData {
    pub fn new(left: impl Into<BoundaryValue>, right: impl Into<BoundaryValue>) -> Self {
        Self {
            left: left.into(),
            right: right.into(),
        }
    }

    pub fn dirichlet_third(h: f64) -> Self {
        Self::new(BoundaryValue::Infinite, h)
    }

    pub fn dirichlet_dirichlet() -> Self {
        Self::new(BoundaryValue::Infinite, BoundaryValue::Infinite)
    }
}

/// Gauge identity T(σ + c, H − c, h + c) = T(σ, H, h); Dirichlet sides stay Dirichlet.
pub fn gauge_transform(
    sigma: &PiecewiseSigma,
    bc: BoundaryData,
    shift: f64,
) -> (PiecewiseSigma, BoundaryData) {
    (
        sigma.shifted(shift),
        BoundaryData {
            left: bc.left.offset(-shift),
            right: bc.right.offset(shift),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_shifts_finite_parameters() {
        let (s, bc) = gauge_transform(&PiecewiseSigma::zero(), BoundaryData::new(0.0, 1.0), 1.0);
        assert_eq!(s.values(), &[1.0]);
        assert_eq!(bc, BoundaryData::new(-1.0, 2.0));
    }

    #[test]
    fn gauge_keeps_dirichlet() {
        let (s, bc) = gauge_transform(
            &PiecewiseSigma::zero(),
            BoundaryData::new(BoundaryValue::Infinite, 0.0),
            2.0,
        );
        assert_eq!(s.values(), &[2.0]);
        assert_eq!(bc, BoundaryData::new(BoundaryValue::Infinite, 2.0));
    }

    #[test]
    fn boundary_value_json() {
        let bc: BoundaryData = serde_json::from_str(r#"{"H":"inf","h":-0.5}"#).unwrap();
        assert_eq!(bc, BoundaryData::new(BoundaryValue::Infinite, -0.5));
        assert_eq!(serde_json::to_string(&bc).unwrap(), r#"{"H":"inf","h":-0.5}"#);
        assert!(serde_json::from_str::<BoundaryValue>(r#""nan""#).is_err());
        assert_eq!("Inf".parse::<BoundaryValue>().unwrap(), BoundaryValue::Infinite);
        assert_eq!("2".parse::<BoundaryValue>().unwrap(), BoundaryValue::Finite(2.0));
    }
}
