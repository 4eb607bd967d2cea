//! Numeric formatting for CSV output.

/// Formats with 12 significant digits, trimming trailing zeros.
pub(crate) fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    let s = format!("{:.11e}", x);
    // re-parse to shed digits beyond the 12th, then print positionally
    let rounded: f64 = s.parse().unwrap_or(x);
    let mut out = format!("{}", rounded);
    if out.contains('e') {
        out = s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::sig12;

    #[test]
    fn rounds_to_twelve_significant_digits() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(5.875), "5.875");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(-2.5), "-2.5");
    }
}
