//! Shared text formatting for file outputs.

/// Formats a float with 17 significant digits, enough for an exact
/// binary64 round trip through text.
pub fn g17(x: f64) -> String {
    format!("{:.16e}", x)
}
