//! `--config` files: one `key = value` per line, `#` starts a comment.
//!
//! Keys are long flag names of the chosen command (underscores allowed for
//! dashes). Entries are spliced in right after the command name, so flags on
//! the command line still win. `true` turns a switch on, `false` leaves it off,
//! and lists are comma separated.

use std::ffi::OsString;
use std::fs;

const GLOBAL_WITH_VALUE: [&str; 4] = ["--out", "--config", "--seed", "--name"];

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("config line {}: expected `key = value`", i + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key.starts_with('-') {
            return Err(format!("config line {}: bad key `{}`", i + 1, key));
        }
        let value = value.trim().trim_matches('"').to_string();
        out.push((key, value));
    }
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn command_index(argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let s = argv[i].to_string_lossy();
        if GLOBAL_WITH_VALUE.contains(&s.as_ref()) {
            i += 2;
        } else if s.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

/// Returns `argv` with the config entries spliced in as `--key=value` flags.
pub fn merge(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
    let entries = parse(&text)?;
    let Some(at) = command_index(&argv) else {
        return Ok(argv);
    };
    let mut flags = Vec::new();
    for (key, value) in entries {
        match value.as_str() {
            "true" => flags.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => flags.push(OsString::from(format!("--{key}={value}"))),
        }
    }
    let mut out = argv;
    out.splice(at + 1..at + 1, flags);
    Ok(out)
}
