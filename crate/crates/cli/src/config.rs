//! `--config FILE` support.
//!
//! The file is a flat list of `key = value` lines (`#` starts a comment).
//! Each entry becomes `--key value` spliced in right after the subcommand,
//! ahead of the user's own flags, so flags given on the command line win.

use std::ffi::OsString;
use std::path::Path;

use ere_core::{Error, Result};

const GLOBAL_WITH_VALUE: [&str; 2] = ["--config", "--threads"];

fn parse(text: &str, origin: &Path) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("{}:{}: expected key=value", origin.display(), no + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(Error::Config(format!(
                "{}:{}: invalid key '{key}'",
                origin.display(),
                no + 1
            )));
        }
        let value = value.trim();
        out.push(OsString::from(format!("--{key}")));
        // Booleans are not used by any command; every key carries a value.
        out.push(OsString::from(value));
    }
    Ok(out)
}

/// Returns `argv` with the config file's entries inserted.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut config = None;
    let mut sub = None;
    let mut i = 1;
    while i < argv.len() {
        let arg = argv[i].to_string_lossy();
        if let Some(v) = arg.strip_prefix("--config=") {
            config = Some(v.to_string());
        } else if arg == "--config" {
            config = argv.get(i + 1).map(|v| v.to_string_lossy().into_owned());
            i += 1;
        } else if GLOBAL_WITH_VALUE.contains(&arg.as_ref()) {
            i += 1;
        } else if sub.is_none() && !arg.starts_with('-') {
            sub = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub)) = (config, sub) else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let extra = parse(&text, path)?;
    let mut out = argv[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[sub + 1..]);
    Ok(out)
}
