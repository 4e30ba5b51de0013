use std::io::Write;
use std::path::Path;

/// Rounds to 12 significant decimal digits so reports are stable across
/// platforms and re-runs.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let exp = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(11 - exp);
    (x * scale).round() / scale
}

pub fn num(x: f64) -> serde_json::Value {
    match serde_json::Number::from_f64(round_sig(x)) {
        Some(n) => serde_json::Value::Number(n),
        None => serde_json::Value::Null,
    }
}

pub fn opt_num(x: Option<f64>) -> serde_json::Value {
    match x {
        Some(v) => num(v),
        None => serde_json::Value::Null,
    }
}

/// Writes the document to `path` atomically (temp file plus rename), or to
/// stdout when no path is given.
pub fn emit(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    match path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
        Some(path) => {
            let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
            let tmp = match dir {
                Some(d) => d.join(format!(
                    ".{}.tmp",
                    path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
                )),
                None => std::path::PathBuf::from(format!(
                    ".{}.tmp",
                    path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
                )),
            };
            {
                let mut f = std::fs::File::create(&tmp)?;
                f.write_all(content.as_bytes())?;
                if !content.ends_with('\n') {
                    f.write_all(b"\n")?;
                }
                f.sync_all()?;
            }
            std::fs::rename(&tmp, path)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(0.8), 0.8);
        assert_eq!(round_sig(-123.456789012345), -123.456789012);
        assert_eq!(round_sig(0.0), 0.0);
    }
}
