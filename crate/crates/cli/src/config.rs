//! Flat key-value config files supplying flag defaults.
//!
//! Each non-comment line is `key = value` where `key` is a long option
//! name of the invoked subcommand. Values from the command line win;
//! config keys that do not correspond to a flag are rejected during
//! argument parsing (the expansion turns them into `--key value`, which
//! clap refuses for unknown names).

use std::path::Path;

use anyhow::{bail, Context, Result};

/// Splits out `--config <path>` / `--config=<path>` from raw args and
/// appends `--key value` pairs for every config entry whose flag is not
/// already present on the command line.
pub fn expand_args(raw: Vec<String>) -> Result<Vec<String>> {
    let mut args = Vec::with_capacity(raw.len());
    let mut config: Option<String> = None;
    let mut it = raw.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            match it.next() {
                Some(p) => config = Some(p),
                None => bail!("--config requires a path"),
            }
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else {
            args.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(args);
    };
    for (key, value) in parse_file(Path::new(&path))? {
        let flag = format!("--{key}");
        let given = args
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if !given {
            args.push(flag);
            args.push(value);
        }
    }
    Ok(args)
}

fn parse_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {} is not `key = value`: {line}", no + 1);
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            bail!("config line {} has an empty key or value", no + 1);
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}
