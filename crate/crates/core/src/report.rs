//! Number formatting shared by the CSV writers.

/// Twelve significant digits in scientific notation, e.g. `9.62423650119e-1`.
pub fn sig12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.11e}")
}

#[cfg(test)]
mod tests {
    use super::sig12;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(0.9624236501192069), "9.62423650119e-1");
        assert_eq!(sig12(1.0), "1.00000000000e0");
        assert_eq!(sig12(-2.5e-7), "-2.50000000000e-7");
        assert_eq!(sig12(f64::INFINITY), "inf");
    }
}
