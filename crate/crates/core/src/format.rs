//! Fixed float formatting for CSV outputs.
//!
//! Outputs must be byte-for-byte reproducible, so every writer goes through
//! [`sig`], a `%g`-style formatter with a fixed number of significant digits.

/// Formats `x` with `digits` significant digits, `%g` style: fixed notation
/// for decimal exponents in `-5..digits`, scientific otherwise, trailing zeros
/// trimmed.
pub fn sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // Round first through scientific formatting so the exponent reflects
    // the rounded mantissa (e.g. 9.9999 -> 1.0e1).
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

/// 12 significant digits, the precision used by trace and map CSV files.
pub fn f12(x: f64) -> String {
    sig(x, 12)
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
