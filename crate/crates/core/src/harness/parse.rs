//! Text parsers for command-line values.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Parses an angle into radians.
///
/// Accepted forms: `0.5`, `0.5rad`, `180deg`, `10 deg`, `pi`, `pi/18`,
/// `2pi/3`, `0.25*pi`. A bare number is taken as radians. `π` may be used
/// for `pi`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim();
    let bad = || Error::Parse(format!("invalid angle {text:?}"));
    let (body, scale) = if let Some(b) = t.strip_suffix("deg") {
        (b, PI / 180.0)
    } else if let Some(b) = t.strip_suffix("rad") {
        (b, 1.0)
    } else if let Some(b) = t.strip_suffix('°') {
        (b, PI / 180.0)
    } else {
        (t, 1.0)
    };
    let body = body.trim();
    if body.is_empty() {
        return Err(bad());
    }
    let value = parse_pi_expression(body).ok_or_else(bad)? * scale;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// `[a][*]pi[/b]` or a plain number.
fn parse_pi_expression(s: &str) -> Option<f64> {
    let s = s.replace('π', "pi");
    let Some(at) = s.find("pi") else {
        return parse_number(&s);
    };
    let (coef, rest) = s.split_at(at);
    let rest = &rest[2..];
    let coef = coef.trim().trim_end_matches('*').trim();
    let a = if coef.is_empty() {
        1.0
    } else {
        parse_number(coef)?
    };
    let rest = rest.trim();
    let b = if rest.is_empty() {
        1.0
    } else {
        let d = parse_number(rest.strip_prefix('/')?.trim())?;
        if d == 0.0 {
            return None;
        }
        d
    };
    Some(a * PI / b)
}

/// A finite decimal number; rejects `inf`, `nan` and friends.
fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty()
        || !s
            .bytes()
            .all(|c| c.is_ascii_digit() || b"+-.eE".contains(&c))
    {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// A list of finite reals separated by commas and/or whitespace, such as
/// sensor positions. Surrounding brackets are allowed.
pub fn parse_real_list(text: &str) -> Result<Vec<f64>> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    let mut out = Vec::new();
    for tok in inner.split(|c: char| c == ',' || c.is_whitespace()) {
        if tok.is_empty() {
            continue;
        }
        out.push(parse_number(tok).ok_or_else(|| Error::Parse(format!("invalid number {tok:?}")))?);
    }
    if out.is_empty() {
        return Err(Error::Parse("empty list".into()));
    }
    Ok(out)
}

/// Comma-separated non-negative integers, e.g. `8,16,32`.
pub fn parse_count_list(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for tok in text.split(',').map(str::trim) {
        if tok.is_empty() {
            continue;
        }
        out.push(
            tok.parse::<usize>()
                .map_err(|_| Error::Parse(format!("invalid count {tok:?}")))?,
        );
    }
    if out.is_empty() {
        return Err(Error::Parse("empty list".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-15 * b.abs().max(1.0)
    }

    #[test]
    fn angles() {
        assert!(close(parse_angle("180deg").unwrap(), PI));
        assert!(close(parse_angle(" 10 deg ").unwrap(), PI / 18.0));
        assert!(close(parse_angle("0.5").unwrap(), 0.5));
        assert!(close(parse_angle("0.5rad").unwrap(), 0.5));
        assert!(close(parse_angle("pi").unwrap(), PI));
        assert!(close(parse_angle("pi/18").unwrap(), PI / 18.0));
        assert!(close(parse_angle("π/18").unwrap(), PI / 18.0));
        assert!(close(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0));
        assert!(close(parse_angle("0.25*pi").unwrap(), PI / 4.0));
        assert!(close(parse_angle("90°").unwrap(), PI / 2.0));
        for bad in [
            "", "deg", "pi/0", "nan", "inf", "1e999", "pipi", "3 4", "-", "pi/", "x",
        ] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn real_lists() {
        assert_eq!(parse_real_list("0, 1.5 3").unwrap(), vec![0.0, 1.5, 3.0]);
        assert_eq!(parse_real_list("[0,2,5]").unwrap(), vec![0.0, 2.0, 5.0]);
        assert!(parse_real_list("").is_err());
        assert!(parse_real_list("1,,x").is_err());
        assert!(parse_real_list("1,NaN").is_err());
    }

    #[test]
    fn count_lists() {
        assert_eq!(parse_count_list("8,16, 32").unwrap(), vec![8, 16, 32]);
        assert!(parse_count_list("").is_err());
        assert!(parse_count_list("-1").is_err());
    }
}
