pub mod benchmark;
pub mod cumulants;
pub mod discover;
pub mod graph_tools;
pub mod simulate;
pub mod treks;

/// clap parser for a finite, non-negative float.
pub fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        Ok(_) => Err("must be finite and >= 0".into()),
        Err(e) => Err(e.to_string()),
    }
}
