//! Atomic file output, CSV formatting and run manifests.
//!
//! Every run writes its data files atomically (temp file + rename in the
//! same directory) and one manifest JSON recording the command, the resolved
//! parameters, the integrator configuration and the produced files. Floats
//! are printed with 17 significant digits so CSV values round-trip exactly.

use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// 17-significant-digit float formatting (round-trip exact for f64).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Writes `content` to `path` atomically.
pub fn write_atomic(path: &Path, content: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension(format!(
        "{}.tmp-{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(content)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Incremental CSV builder with a fixed header.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            buf: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "row width mismatch");
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub threads: usize,
    pub parameters: serde_json::Value,
    pub integrator: Option<spinspin::IntegratorConfig>,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(
        parameters: serde_json::Value,
        integrator: Option<spinspin::IntegratorConfig>,
    ) -> Self {
        Self {
            command: std::env::args().collect::<Vec<_>>().join(" "),
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads: rayon::current_num_threads(),
            parameters,
            integrator,
            wall_time_s: 0.0,
            outputs: Vec::new(),
        }
    }

    /// Writes the manifest next to the primary output as
    /// `<output>.manifest.json`.
    pub fn write(mut self, primary_output: &Path, wall_time_s: f64) -> std::io::Result<PathBuf> {
        self.wall_time_s = wall_time_s;
        let manifest_path = manifest_path_for(primary_output);
        let json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        write_atomic(&manifest_path, json.as_bytes())?;
        Ok(manifest_path)
    }
}

pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_roundtrips() {
        for &x in &[0.1, 18.2, -2.5e-13, std::f64::consts::PI, 1.0 / 3.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn csv_shape_is_enforced() {
        let mut csv = Csv::new(&["a", "b"]);
        csv.row(&["1".into(), "2".into()]);
        let text = String::from_utf8(csv.into_bytes()).unwrap();
        assert_eq!(text, "a,b\n1,2\n");
    }
}
