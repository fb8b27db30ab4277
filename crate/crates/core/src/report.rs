//! Locale-free number formatting shared by the CSV writers.

/// Shortest round-trip representation is not used on purpose: every float
/// is written with 17 significant digits so files compare byte-for-byte.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}
