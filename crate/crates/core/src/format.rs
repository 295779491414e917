//! Number formatting for exported tables.

/// Format `x` with `digits` significant digits, `%g` style: fixed notation for
/// moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn formats() {
        assert_eq!(sig(0.0, 12), "0");
        assert_eq!(sig(1.0, 12), "1");
        assert_eq!(sig(-14.0, 12), "-14");
        assert_eq!(sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(sig(2.0 / 3.0 * 1e-7, 12), "6.66666666667e-8");
        assert_eq!(sig(123456789012345.0, 12), "1.23456789012e14");
        assert_eq!(sig(99999.99999999999, 12), "100000");
        assert_eq!(sig(f64::NAN, 12), "nan");
    }
}
