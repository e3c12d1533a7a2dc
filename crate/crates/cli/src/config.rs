//! `key = value` configuration files, merged into the argument list.
//!
//! Each key becomes `--key` followed by the whitespace-separated words of
//! its value; a bare `key` (or `key = true`) becomes a switch. The special
//! key `command` names the subcommand when none is given on the command
//! line. Flags given on the command line take precedence over the file.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const COMMANDS: [&str; 6] = [
    "edge-bands",
    "graph-scan",
    "t3-spectrum",
    "t3-butterfly",
    "t3-flatband-map",
    "susy-check",
];

#[derive(Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub command: Option<String>,
    /// `(key, words)` in file order.
    pub entries: Vec<(String, Vec<String>)>,
}

pub fn parse_config(text: &str, origin: &str) -> Result<ConfigFile> {
    let mut cfg = ConfigFile::default();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (line, "true"),
        };
        if key.is_empty() || key.contains(char::is_whitespace) {
            bail!("{origin}:{}: malformed entry {line:?}", no + 1);
        }
        let key = key.trim_start_matches("--").to_string();
        if key == "command" {
            cfg.command = Some(value.to_string());
        } else if cfg.entries.iter().any(|(k, _)| *k == key) {
            bail!("{origin}:{}: duplicate key {key:?}", no + 1);
        } else {
            cfg.entries.push((key, value.split_whitespace().map(str::to_string).collect()));
        }
    }
    Ok(cfg)
}

fn given_on_command_line(args: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefix = format!("--{key}=");
    args.iter().any(|a| a.to_str().is_some_and(|s| s == flag || s.starts_with(&prefix)))
}

/// Removes `--config <path>` from `args` and splices the file's entries in
/// right after the subcommand.
pub fn expand_args(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy().into_owned();
        if s == "--config" {
            if i + 1 >= args.len() {
                bail!("--config needs a file path");
            }
            path = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(OsString::from(p));
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else { return Ok(args) };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
    let cfg = parse_config(&text, &path.display().to_string())?;

    let mut pos = args
        .iter()
        .position(|a| a.to_str().is_some_and(|s| COMMANDS.contains(&s)))
        .map(|p| p + 1);
    if pos.is_none() {
        if let Some(cmd) = &cfg.command {
            args.insert(1, OsString::from(cmd));
            pos = Some(2);
        }
    }
    let Some(pos) = pos else {
        bail!("no subcommand given on the command line or in {}", path.display());
    };
    let mut extra = Vec::new();
    for (key, words) in &cfg.entries {
        if given_on_command_line(&args, key) {
            continue;
        }
        extra.push(OsString::from(format!("--{key}")));
        if !(words.len() == 1 && words[0] == "true") {
            extra.extend(words.iter().map(OsString::from));
        }
    }
    args.splice(pos..pos, extra);
    Ok(args)
}
