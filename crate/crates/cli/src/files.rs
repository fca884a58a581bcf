use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use reflow::document::CanonicalDocument;
use reflow::wire;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Reads the record `name` out of an envelope file.
pub fn read_record<T: DeserializeOwned>(path: &Path, name: &str) -> CliResult<T> {
    let text = read_text(path)?;
    wire::parse_record(&text, name).map_err(|e| {
        CliError::Core(reflow::Error::Decode(format!("{}: {e}", path.display())))
    })
}

/// A document is a plain JSON object of string fields, not an envelope.
pub fn read_document(path: &Path) -> CliResult<CanonicalDocument> {
    Ok(CanonicalDocument::from_json_str(&read_text(path)?)?)
}

/// Where a command's result goes: a file when `--out` is given, stdout otherwise.
pub struct Output {
    pub path: Option<PathBuf>,
    pub force: bool,
    pub actor: Option<String>,
}

impl Output {
    pub fn record<T: Serialize>(&self, name: &str, value: &T, secret: bool) -> CliResult<()> {
        let text = wire::render_record(name, value, self.actor.as_deref(), secret)?;
        self.text(&text)
    }

    pub fn text(&self, text: &str) -> CliResult<()> {
        match &self.path {
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}"))),
            Some(path) => {
                if path.exists() && !self.force {
                    return Err(CliError::Io(format!(
                        "{} exists, pass --force to overwrite",
                        path.display()
                    )));
                }
                fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
            }
        }
    }

    pub fn bytes(&self, bytes: &[u8]) -> CliResult<()> {
        match std::str::from_utf8(bytes) {
            Ok(text) => self.text(text),
            Err(_) => Err(CliError::Io("output is not UTF-8".into())),
        }
    }
}
