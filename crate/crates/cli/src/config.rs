//! Line-oriented `key = value` run configuration.
//!
//! Keys are long flag names without the leading dashes. A config file is
//! expanded into flags placed right after the subcommand, so flags given
//! on the command line override it.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const SUBCOMMANDS: [&str; 4] = ["construct", "train", "simulate", "analyze"];

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`", i + 1);
        };
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            bail!("line {}: bad key {key:?}", i + 1);
        }
        out.push((key.to_owned(), value.trim().to_owned()));
    }
    Ok(out)
}

/// Flags for config entries: `true` becomes a bare switch, `false` is
/// dropped, anything else is `--key value`.
pub fn to_flags(entries: &[(String, String)]) -> Vec<OsString> {
    let mut out = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => out.push(format!("--{k}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{k}").into());
                out.push(v.into());
            }
        }
    }
    out
}

/// Replaces `--config FILE` (or `--config=FILE`) after the subcommand with
/// the flags the file holds.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(sub) = args
        .iter()
        .position(|a| a.to_str().is_some_and(|s| SUBCOMMANDS.contains(&s)))
    else {
        return Ok(args);
    };
    let mut path = None;
    let mut rest = Vec::new();
    let mut it = args[sub + 1..].iter();
    while let Some(a) = it.next() {
        match a.to_str() {
            Some("--config") => {
                let p = it.next().context("--config needs a file")?;
                path = Some(p.clone());
            }
            Some(s) if s.starts_with("--config=") => path = Some(s["--config=".len()..].into()),
            _ => rest.push(a.clone()),
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config {}", Path::new(&path).display()))?;
    let entries = parse(&text).with_context(|| format!("in config {}", Path::new(&path).display()))?;
    let mut out: Vec<OsString> = args[..=sub].to_vec();
    out.extend(to_flags(&entries));
    out.extend(rest);
    Ok(out)
}

/// Renders resolved settings, preceded by a version comment.
pub fn render(entries: &[(&str, String)]) -> String {
    let mut out = format!("# sparse-polar {} resolved config\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in entries {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}
