use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use betatherm_core::{Error, Result};
use serde_json::Value;

/// Stdout rendering plus optional artifact directory. All writes go
/// through here.
pub struct Output {
    json: bool,
    dir: Option<PathBuf>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

impl Output {
    pub fn new(json: bool, dir: Option<PathBuf>) -> Self {
        Output { json, dir }
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    fn target(&self, name: &str) -> Result<Option<PathBuf>> {
        let Some(dir) = &self.dir else {
            return Ok(None);
        };
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Some(dir.join(name)))
    }

    pub fn emit(&self, v: &Value) -> Result<()> {
        let mut stdout = std::io::stdout().lock();
        let text = if self.json {
            serde_json::to_string_pretty(v).expect("value serializes")
        } else {
            render_text(v)
        };
        writeln!(stdout, "{text}").map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write_json(&self, name: &str, v: &Value) -> Result<()> {
        if let Some(path) = self.target(name)? {
            let text = serde_json::to_string_pretty(v).expect("value serializes");
            fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
        }
        Ok(())
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
        let Some(path) = self.target(name)? else {
            return Ok(());
        };
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(header).map_err(|e| io_err(&path, e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))
    }
}

fn render_text(v: &Value) -> String {
    match v {
        Value::Object(map) => {
            let width = map.keys().map(|k| k.len()).max().unwrap_or(0);
            map.iter()
                .map(|(k, v)| {
                    let shown = match v {
                        Value::String(s) => s.clone(),
                        Value::Null => "-".into(),
                        other => other.to_string(),
                    };
                    format!("{k:width$}  {shown}")
                })
                .collect::<Vec<_>>()
                .join("\n")
        }
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn text_rendering() {
        let s = render_text(&json!({"m": 0.5, "word": "01", "w": null}));
        assert_eq!(s, "m     0.5\nw     -\nword  01");
    }
}
