//! Number formatting for human-readable files.

/// Formats `x` with `digits` significant digits, in the style of C's `%g`:
/// fixed notation for moderate magnitudes, scientific otherwise, trailing
/// zeros removed.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent value");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Six significant digits, the precision used for all CSV outputs.
pub fn sig6(x: f64) -> String {
    sig(x, 6)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(0.399993325878073), "0.399993");
        assert_eq!(sig6(4.700045473616291), "4.70005");
        assert_eq!(sig6(12345678.0), "1.23457e7");
        assert_eq!(sig6(0.0000012345), "1.2345e-6");
        assert_eq!(sig6(-0.125), "-0.125");
        assert_eq!(sig6(999999.7), "1e6");
        assert_eq!(sig6(10.0), "10");
    }
}
