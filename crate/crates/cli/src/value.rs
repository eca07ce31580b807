//! JSON encoding of backend scalars: rationals as decimal strings
//! ("11/10", "3", "-0.25"), floats as JSON numbers.

use num_rational::BigRational;
use serde_json::Value;
use transvect::Coeff;

use crate::CliError;

pub trait CoeffCodec: Coeff {
    const BACKEND: &'static str;
    fn parse_json(v: &Value) -> Result<Self, CliError>;
    fn to_json(&self) -> Value;
}

impl CoeffCodec for f64 {
    const BACKEND: &'static str = "float64";

    fn parse_json(v: &Value) -> Result<Self, CliError> {
        v.as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CliError::Parse(format!("expected a finite number, got {v}")))
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
}

impl CoeffCodec for BigRational {
    const BACKEND: &'static str = "rational";

    fn parse_json(v: &Value) -> Result<Self, CliError> {
        let s = v
            .as_str()
            .ok_or_else(|| CliError::Parse(format!("expected a rational string, got {v}")))?;
        parse_rational(s).ok_or_else(|| CliError::Parse(format!("bad rational '{s}'")))
    }

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: num_bigint::BigInt = num.trim().parse().ok()?;
        let d: num_bigint::BigInt = den.trim().parse().ok()?;
        if d == 0.into() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let i: num_bigint::BigInt = if int_part == "-" || int_part.is_empty() {
            0.into()
        } else {
            int_part.parse().ok()?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let f: num_bigint::BigInt = frac_part.parse().ok()?;
        let scale = num_bigint::BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = BigRational::new(f, scale);
        let int = BigRational::from_integer(i);
        return Some(if negative { int - frac } else { int + frac });
    }
    let n: num_bigint::BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_forms() {
        assert_eq!(
            parse_rational("11/10").unwrap(),
            BigRational::from_ratio(11, 10)
        );
        assert_eq!(parse_rational("3").unwrap(), BigRational::from_ratio(3, 1));
        assert_eq!(
            parse_rational("-0.25").unwrap(),
            BigRational::from_ratio(-1, 4)
        );
        assert_eq!(
            parse_rational("1.5").unwrap(),
            BigRational::from_ratio(3, 2)
        );
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
    }

    #[test]
    fn rational_roundtrip_is_exact() {
        let v = BigRational::from_ratio(-22, 7);
        let j = v.to_json();
        assert_eq!(BigRational::parse_json(&j).unwrap(), v);
    }
}
