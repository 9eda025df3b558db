//! Plain-text output conventions shared by every artifact: 17 significant
//! digits, comma separation, LF line endings.

use std::io::Write;

use crate::error::Result;

/// Shortest fixed-width scientific form carrying 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // collapse −0 so reruns never differ by the sign of zero
        return format!("{:.16e}", 0.0f64);
    }
    format!("{x:.16e}")
}

/// Writes `key=value` lines in the given order.
pub fn write_summary<'a>(mut w: impl Write, entries: impl IntoIterator<Item = (&'a str, String)>) -> Result<()> {
    for (k, v) in entries {
        writeln!(w, "{k}={v}")?;
    }
    Ok(())
}
