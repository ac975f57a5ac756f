//! `--config FILE` expansion. Each non-blank, non-`#` line is `key = value`
//! or a bare `key`; it becomes `--key value` (or `--key`) right after the
//! subcommand, so explicit flags later on the command line override it.

use std::ffi::OsString;
use std::fs;

fn parse_lines(text: &str) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (line, None),
        };
        if key.is_empty() || key.starts_with('-') || key == "config" {
            return Err(format!("config line {}: bad key `{key}`", n + 1));
        }
        match value {
            Some("false") => {}
            None | Some("true") => out.push(format!("--{key}").into()),
            Some(v) => {
                out.push(format!("--{key}").into());
                out.push(v.into());
            }
        }
    }
    Ok(out)
}

/// Drops config entries whose flag is already on the command line.
fn without_keys(args: Vec<OsString>, given: &[String]) -> Vec<OsString> {
    let mut out = Vec::new();
    let mut skipping = false;
    for a in args {
        match a.to_str().and_then(|s| s.strip_prefix("--")) {
            Some(key) => {
                skipping = given.iter().any(|g| g == key);
                if !skipping {
                    out.push(a);
                }
            }
            None if !skipping => out.push(a),
            None => {}
        }
    }
    out
}

pub fn expand(mut argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut path = None;
    let mut i = 1;
    while i < argv.len() {
        let arg = argv[i].to_string_lossy().into_owned();
        if arg == "--config" {
            if i + 1 >= argv.len() {
                return Err("--config needs a file".into());
            }
            path = Some(argv.remove(i + 1));
            argv.remove(i);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.into());
            argv.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.to_string_lossy()))?;
    let given: Vec<String> = argv
        .iter()
        .filter_map(|a| {
            a.to_str()?
                .strip_prefix("--")
                .map(|k| k.split('=').next().unwrap_or(k).to_string())
        })
        .collect();
    let extra = without_keys(parse_lines(&text)?, &given);
    let at = argv
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map_or(argv.len(), |p| p + 2);
    argv.splice(at..at, extra);
    Ok(argv)
}
