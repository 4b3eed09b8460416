//! `key = value` config files.
//!
//! Each line becomes a `--key value` flag inserted right after the
//! subcommand name, ahead of the user's own flags. Every subcommand sets
//! `args_override_self`, so a flag repeated on the command line wins.

use clap::CommandFactory;

use crate::args::Cli;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
/// Keys may use `_` or `-`.
pub fn parse(text: &str) -> Result<Vec<Entry>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected 'key = value', got '{raw}'", i + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        out.push(Entry {
            line: i + 1,
            key,
            value: value.trim().trim_matches('"').to_string(),
        });
    }
    Ok(out)
}

/// Turns config entries into flags for `subcommand`.
pub fn to_flags(subcommand: &str, entries: &[Entry]) -> Result<Vec<String>, String> {
    let cmd = Cli::command();
    let sub = cmd
        .find_subcommand(subcommand)
        .ok_or_else(|| format!("unknown subcommand '{subcommand}'"))?;
    let mut flags = Vec::new();
    for e in entries {
        if e.key == "config" {
            return Err(format!("config line {}: 'config' cannot be nested", e.line));
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(e.key.as_str()))
            .ok_or_else(|| format!("config line {}: '{}' is not an option of {subcommand}", e.line, e.key))?;
        if arg.get_action().takes_values() {
            flags.push(format!("--{}={}", e.key, e.value));
        } else {
            match e.value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => flags.push(format!("--{}", e.key)),
                "false" | "no" | "0" | "off" => {}
                other => {
                    return Err(format!(
                        "config line {}: '{}' expects true or false, got '{other}'",
                        e.line, e.key
                    ))
                }
            }
        }
    }
    Ok(flags)
}

/// Splices `flags` in after the subcommand token of `argv`.
pub fn splice(argv: &[String], subcommand: &str, flags: Vec<String>) -> Vec<String> {
    let pos = argv
        .iter()
        .enumerate()
        .skip(1)
        .position(|(i, a)| a == subcommand && argv[i - 1] != "--config")
        .map(|p| p + 2)
        .unwrap_or(argv.len());
    let mut out = argv[..pos].to_vec();
    out.extend(flags);
    out.extend_from_slice(&argv[pos..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_maps_keys() {
        let text = "# defaults\nn = 5\nradius=0.5  # comment\nallow_nonpositive = true\nsequential = false\n";
        let entries = parse(text).unwrap();
        assert_eq!(entries.len(), 4);
        let flags = to_flags("verify-ball", &entries).unwrap();
        assert_eq!(flags, vec!["--n=5", "--radius=0.5", "--allow-nonpositive"]);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse("n 3").is_err());
        let e = parse("bogus = 1").unwrap();
        assert!(to_flags("verify-ball", &e).is_err());
        let e = parse("sequential = maybe").unwrap();
        assert!(to_flags("verify-ball", &e).is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let argv: Vec<String> = ["serrin", "--config", "c.txt", "verify-ball", "--n", "2"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let out = splice(&argv, "verify-ball", vec!["--n=5".into()]);
        assert_eq!(
            out,
            vec!["serrin", "--config", "c.txt", "verify-ball", "--n=5", "--n", "2"]
        );
    }
}
