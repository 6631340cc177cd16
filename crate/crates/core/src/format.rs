//! Text formatting shared by the CSV and report writers.

/// Shortest decimal string that parses back to exactly `x`.
///
/// Plain notation is used for moderate magnitudes and exponent notation
/// otherwise, so that tiny imaginary parts do not turn into hundreds of zeros.
pub fn float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `x` rounded to `digits` significant figures, for human-readable reports.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}
