use std::io::Write;
use std::path::Path;

use serde_json::Value;

use super::{Failure, Format, Globals};

/// A finished result in both output formats.
#[derive(Clone, Debug)]
pub struct Rendered {
    pub json: Value,
    /// Header row plus data rows, newline terminated.
    pub csv: String,
    /// One line with the headline number.
    pub summary: String,
    /// Set when an invariant audit failed; carries the violated inequality.
    pub audit_failure: Option<String>,
}

impl Rendered {
    pub fn body(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("JSON values always serialize");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone(),
        }
    }
}

/// Write through a sibling temp file and rename it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

pub(super) fn emit(r: &Rendered, g: &Globals) -> Result<(), Failure> {
    let body = r.body(g.format);
    match &g.out {
        Some(path) => {
            write_atomic(path, body.as_bytes())
                .map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display())))?;
            println!("{}", r.summary);
        }
        None => {
            print!("{body}");
            eprintln!("{}", r.summary);
        }
    }
    Ok(())
}

/// Minimal CSV field quoting.
pub(super) fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
