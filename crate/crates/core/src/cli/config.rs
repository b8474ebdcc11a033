//! Flat `key = value` configuration files.
//!
//! Keys are long flag names without the leading dashes. A file is expanded
//! into flags inserted right after the subcommand, skipping every key the
//! command line already sets, so explicit flags always win. `true` turns a
//! key into a bare switch and `false` drops it. Repeating a key repeats the
//! flag.

use std::fs;
use std::path::Path;

use super::CliError;

pub(crate) fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            return Err(CliError::Config(format!("line {}: bad key `{key}`", n + 1)));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Location of `--config` in `args` (either `--config F` or `--config=F`).
fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn sets_flag(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_eq = format!("--{key}=");
    args.iter().any(|a| *a == flag || a.starts_with(&with_eq))
}

/// Inserts config-file flags after the subcommand token.
pub(crate) fn expand(args: Vec<String>, subcommands: &[&str]) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
    let entries = parse(&text)?;
    let Some(pos) = args.iter().skip(1).position(|a| subcommands.contains(&a.as_str())) else {
        return Ok(args);
    };
    let pos = pos + 2;
    let mut injected = Vec::new();
    for (key, value) in entries {
        if sets_flag(&args, &key) {
            continue;
        }
        match value.as_str() {
            "true" => injected.push(format!("--{key}")),
            "false" => {}
            _ => injected.push(format!("--{key}={value}")),
        }
    }
    let mut out = args[..pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_skips_comments() {
        let e = parse("# header\nbits = 3\n\nout=cb.gbcb # trailing\n").unwrap();
        assert_eq!(e, vec![("bits".into(), "3".into()), ("out".into(), "cb.gbcb".into())]);
        assert!(parse("just words").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.cfg");
        fs::write(&p, "bits = 3\nseed = 1\nproduct = true\nlog = false\n").unwrap();
        let args: Vec<String> = ["grassbook", "--config", p.to_str().unwrap(), "train", "--seed", "9"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let out = expand(args, &["train"]).unwrap();
        assert_eq!(&out[4..], &["--bits=3", "--product", "--seed", "9"]);
    }
}
