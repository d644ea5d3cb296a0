//! External codes exchanging data through text files.
//!
//! For every evaluation a directory `run-<index>` is created under the work root, the
//! template is written there with each `@name@` replaced by the shortest decimal that
//! round-trips the input value, and the command is run inside that directory. Outputs
//! are read from `output_file` (or the command's stdout) through anchors. The directory
//! is removed after a successful run and kept when anything fails.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputAnchor {
    /// Zero-based line index; used when `search` is absent.
    #[serde(default)]
    pub line: Option<usize>,
    /// Text marking the line of interest; tokens are taken after its first occurrence.
    #[serde(default)]
    pub search: Option<String>,
    /// Zero-based token index on the selected line.
    #[serde(default)]
    pub column: usize,
    /// Token separator; whitespace when absent.
    #[serde(default)]
    pub separator: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrapperProtocol {
    pub template: PathBuf,
    /// Name of the instantiated template inside the run directory.
    pub input_file: String,
    /// Program followed by its arguments.
    pub command: Vec<String>,
    /// File holding the outputs; stdout when absent.
    #[serde(default)]
    pub output_file: Option<String>,
    pub anchors: Vec<OutputAnchor>,
    pub work_dir: PathBuf,
    #[serde(default)]
    pub keep_directories: bool,
}

impl WrapperProtocol {
    pub(crate) fn check_placeholders(&self, names: &[String]) -> Result<()> {
        let text = std::fs::read_to_string(&self.template)?;
        for name in names {
            if !text.contains(&format!("@{name}@")) {
                return Err(Error::Wrapper(format!(
                    "template {} has no placeholder @{name}@",
                    self.template.display()
                )));
            }
        }
        Ok(())
    }

    pub fn run_directory(&self, run: u64) -> PathBuf {
        self.work_dir.join(format!("run-{run:06}"))
    }

    /// Runs the code once at `x`; `run` names the working directory.
    pub fn run(&self, names: &[String], x: &[f64], run: u64) -> Result<Vec<f64>> {
        let dir = self.run_directory(run);
        if dir.exists() {
            std::fs::remove_dir_all(&dir)?;
        }
        std::fs::create_dir_all(&dir)?;
        let template = std::fs::read_to_string(&self.template)?;
        let input = substitute(&template, names, x);
        std::fs::write(dir.join(&self.input_file), input)?;
        let (program, args) = self
            .command
            .split_first()
            .ok_or_else(|| Error::Wrapper("empty command".into()))?;
        let output = Command::new(program)
            .args(args)
            .current_dir(&dir)
            .output()
            .map_err(|e| Error::Wrapper(format!("cannot start {program}: {e}")))?;
        if !output.status.success() {
            return Err(Error::Wrapper(format!(
                "{program} exited with {} (run directory {})",
                output.status,
                dir.display()
            )));
        }
        let text = match &self.output_file {
            Some(name) => std::fs::read_to_string(dir.join(name)).map_err(|e| {
                Error::Wrapper(format!("cannot read {name} in {}: {e}", dir.display()))
            })?,
            None => String::from_utf8_lossy(&output.stdout).into_owned(),
        };
        let values = self
            .anchors
            .iter()
            .map(|a| read_anchor(&text, a))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Wrapper(format!("{e} (run directory {})", dir.display())))?;
        if !self.keep_directories {
            remove_quietly(&dir);
        }
        Ok(values)
    }
}

fn remove_quietly(dir: &Path) {
    let _ = std::fs::remove_dir_all(dir);
}

/// Replaces every `@name@` with the shortest round-trip decimal of the matching value.
pub fn substitute(template: &str, names: &[String], x: &[f64]) -> String {
    let mut text = template.to_owned();
    for (name, v) in names.iter().zip(x) {
        text = text.replace(&format!("@{name}@"), &v.to_string());
    }
    text
}

fn read_anchor(text: &str, anchor: &OutputAnchor) -> Result<f64> {
    let rest = match (&anchor.search, anchor.line) {
        (Some(key), _) => text
            .lines()
            .find_map(|l| l.find(key.as_str()).map(|p| &l[p + key.len()..]))
            .ok_or_else(|| Error::Wrapper(format!("anchor {key:?} not found")))?,
        (None, Some(i)) => text
            .lines()
            .nth(i)
            .ok_or_else(|| Error::Wrapper(format!("output has no line {i}")))?,
        (None, None) => return Err(Error::Wrapper("anchor needs a line or a search string".into())),
    };
    let token = match &anchor.separator {
        Some(sep) => rest.split(sep.as_str()).map(str::trim).filter(|t| !t.is_empty()).nth(anchor.column),
        None => rest.split_whitespace().nth(anchor.column),
    }
    .ok_or_else(|| Error::Wrapper(format!("no token {} on anchored line {rest:?}", anchor.column)))?;
    token
        .parse::<f64>()
        .map_err(|_| Error::Wrapper(format!("unparsable token {token:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_renders_shortest_decimals() {
        let names = vec!["Q".to_string(), "Ks".to_string()];
        let text = substitute("Q=@Q@\nKs=@Ks@", &names, &[1000.0, 30.0]);
        assert_eq!(text, "Q=1000\nKs=30");
        let text = substitute("@Q@", &names[..1], &[0.1 + 0.2]);
        assert_eq!(text.parse::<f64>().unwrap(), 0.1 + 0.2);
    }

    #[test]
    fn anchors() {
        let out = "header\nH = 2.5\nvalues 1;2;3\n";
        let a = OutputAnchor {
            line: None,
            search: Some("H =".into()),
            column: 0,
            separator: None,
        };
        assert_eq!(read_anchor(out, &a).unwrap(), 2.5);
        let b = OutputAnchor {
            line: Some(2),
            search: None,
            column: 1,
            separator: Some(";".into()),
        };
        assert_eq!(read_anchor(out, &b).unwrap(), 2.0);
        let missing = OutputAnchor {
            line: None,
            search: Some("Z".into()),
            column: 0,
            separator: None,
        };
        assert!(read_anchor(out, &missing).is_err());
    }
}
