//! JSON rendering with every float written to 17 significant digits.

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, Serializer};
use std::io::{self, Write};

pub const SIGNIFICANT_DIGITS: usize = 17;

struct SigFormatter;

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn write_i64<W: ?Sized + Write>(&mut self, writer: &mut W, value: i64) -> io::Result<()> {
        CompactFormatter.write_i64(writer, value)
    }
}

/// `value` rounded to 17 significant digits, positional for moderate exponents and
/// scientific otherwise, with redundant trailing zeros removed. Non-finite values are
/// not representable in JSON and become `null`.
pub fn format_f64(value: f64) -> String {
    if !value.is_finite() {
        return "null".into();
    }
    if value == 0.0 {
        return if value.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, value);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    if (-5..17).contains(&exp) {
        let point = exp + 1;
        let body = if point <= 0 {
            format!("0.{}{}", "0".repeat((-point) as usize), digits)
        } else if point as usize >= digits.len() {
            format!("{}{}.0", digits, "0".repeat(point as usize - digits.len()))
        } else {
            let (a, b) = digits.split_at(point as usize);
            format!("{a}.{b}")
        };
        format!("{sign}{body}")
    } else {
        let (a, b) = digits.split_at(1);
        let b = if b.is_empty() { "0" } else { b };
        format!("{sign}{a}.{b}e{exp}")
    }
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, SigFormatter);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for v in [
            std::f64::consts::PI,
            1.0 / 3.0,
            -2.5e-9,
            1e-12,
            6.02214076e23,
            0.1,
            1.0,
            -7.0,
            123456789.125,
            f64::MIN_POSITIVE,
            f64::MAX,
        ] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
            assert!(serde_json::from_str::<f64>(&s).is_ok(), "{s}");
        }
    }

    #[test]
    fn shapes() {
        assert_eq!(format_f64(0.5), "0.5");
        assert_eq!(format_f64(2.0), "2.0");
        assert_eq!(format_f64(1e-9), "1.0000000000000001e-9");
        assert_eq!(format_f64(9.3132257461547852e-10), "9.3132257461547852e-10");
        assert_eq!(format_f64(0.0), "0.0");
        assert_eq!(format_f64(f64::NAN), "null");
        assert_eq!(format_f64(std::f64::consts::FRAC_PI_2), "1.5707963267948966");
        assert_eq!(format_f64(1.0 / 3.0), "0.33333333333333331");
    }

    #[test]
    fn nested_values() {
        let v = serde_json::json!({"a": [1.0, 2, -0.25], "b": {"c": 0.0078125}});
        assert_eq!(to_string(&v), r#"{"a":[1.0,2,-0.25],"b":{"c":0.0078125}}"#);
    }
}
