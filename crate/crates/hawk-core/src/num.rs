//! Exact rational coefficients for model structure.
//!
//! All structural constants (flow rates, guard thresholds, kernel
//! parameters) are kept as `i64` rationals so that canonical text and
//! JSON forms are exact and stable. Runtime valuations are `f64`.

use num_traits::{Signed as _, ToPrimitive, Zero};

pub type Q = num_rational::Ratio<i64>;

/// Exact conversion to `f64` (numerator/denominator division; exact for
/// all dyadic and small-denominator rationals used in models).
pub fn q_to_f64(q: Q) -> f64 {
    q.to_f64().expect("rational out of f64 range")
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(n)
}

/// Parses a decimal or rational literal: `3`, `-0.03`, `1/3`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Q::new(n, d));
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return None;
    }
    if let Some((int, frac)) = body.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if !int.is_empty() && !int.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let int: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
        let fr: i64 = frac.parse().ok()?;
        let den = 10i64.checked_pow(frac.len() as u32)?;
        Some(Q::new(sign * (int.checked_mul(den)?.checked_add(fr)?), den))
    } else {
        if !body.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let int: i64 = body.parse().ok()?;
        Some(Q::from_integer(sign * int))
    }
}

/// Canonical text form: integers bare, terminating decimals as decimals
/// (up to 9 fractional digits), everything else as `n/d`.
pub fn format_q(q: Q) -> String {
    let q = q.reduced();
    if q.denom() == &1 {
        return q.numer().to_string();
    }
    // d = 2^a * 5^b  =>  exact decimal expansion.
    let mut d = *q.denom();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    let digits = twos.max(fives);
    if d == 1 && digits <= 9 {
        let scale = 10i64.pow(digits);
        if let Some(scaled) = q.numer().checked_mul(scale / q.denom()) {
            let sign = if scaled.is_negative() { "-" } else { "" };
            let abs = scaled.abs();
            let int = abs / scale;
            let frac = abs % scale;
            let frac_str = format!("{:0width$}", frac, width = digits as usize);
            let frac_str = frac_str.trim_end_matches('0');
            if frac_str.is_empty() {
                return format!("{sign}{int}");
            }
            return format!("{sign}{int}.{frac_str}");
        }
    }
    format!("{}/{}", q.numer(), q.denom())
}

pub fn q_is_zero(q: Q) -> bool {
    q.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "3", "-7", "0.03", "-0.03", "21.5", "1/3", "-2/7", "0.000000001"] {
            let q = parse_q(s).unwrap();
            assert_eq!(format_q(q), s, "canonical form of {s}");
            assert_eq!(parse_q(&format_q(q)), Some(q));
        }
    }

    #[test]
    fn parse_normalizes() {
        assert_eq!(parse_q("0.50"), Some(Q::new(1, 2)));
        assert_eq!(format_q(Q::new(1, 2)), "0.5");
        assert_eq!(format_q(Q::new(2, 6)), "1/3");
        assert_eq!(parse_q("2/4"), Some(Q::new(1, 2)));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "x", "1.2.3", "1/0", "--3", "1e5", "-"] {
            assert_eq!(parse_q(s), None, "{s}");
        }
    }
}
