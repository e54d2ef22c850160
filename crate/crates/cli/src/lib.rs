//! IO layer of the time-bin interferometer toolkit: configuration
//! files, on-disk formats, and run manifests. The `timebin` binary in
//! this crate wires these onto the core library.

pub mod config;
pub mod formats;
pub mod manifest;

/// Consistent float formatting for CSV output: 12 decimal places with
/// trailing zeros trimmed, so re-runs are byte-identical.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0');
    let s = s.trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}
