//! File writers. Every artifact carries the tool version and the resolved
//! config; files are assembled in memory and written one at a time.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

pub fn version() -> String {
    format!("spinprobe {}", spinprobe::VERSION)
}

/// Shortest round-trip formatting, with `-0` folded into `0`.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(config: &RunConfig, command: &str, columns: &[&str]) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# {} {command}", version());
        for line in config.to_toml().lines() {
            let _ = writeln!(text, "# {line}");
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn json_document(config: &RunConfig, command: &str, data: impl Serialize) -> String {
    let config = serde_json::to_value(config).expect("config serializes");
    let data = serde_json::to_value(data).expect("data serializes");
    let mut doc = json!({ "version": version(), "command": command, "config": config });
    if let (Value::Object(doc), Value::Object(data)) = (&mut doc, data) {
        doc.extend(data);
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
    s.push('\n');
    s
}

/// Text for an XML comment: `--` is not allowed inside one.
pub fn comment_safe(s: &str) -> String {
    let mut s = s.to_string();
    while s.contains("--") {
        s = s.replace("--", "- -");
    }
    s
}

pub fn svg_header(config: &RunConfig, command: &str) -> String {
    comment_safe(&format!("{} {command}\n{}", version(), config.to_toml()))
}

/// Collects output files and writes them after all computation is done.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        Self { dir: dir.as_ref().to_path_buf(), files: Vec::new() }
    }

    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn write(self) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir)?;
        let mut written = Vec::new();
        for (name, contents) in self.files {
            let path = self.dir.join(name);
            fs::write(&path, contents)?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_prints_as_zero() {
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(0.25), "0.25");
        assert_eq!(num(1e-20), "1e-20");
        assert_eq!(num(-3.5e-7), "-3.5e-7");
    }

    #[test]
    fn comments_never_contain_double_dash() {
        assert!(!comment_safe("a -- b --- c").contains("--"));
    }
}
