//! `gmoments`: command-line front end for gamma-moments.
//!
//! Exit codes: 0 success, 1 internal or accuracy failure, 2 invalid input.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use commands::{Cli, Failure};
use render::ReportEnvelope;

/// Environment variable naming a directory for relative `--output` paths.
pub const OUTPUT_DIR_ENV: &str = "GMOMENTS_OUTPUT_DIR";

fn config_flags(path: &str) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format!("config {path} is not JSON: {e}"))?;
    let Value::Object(map) = value else {
        return Err(format!("config {path} must be a JSON object"));
    };
    let mut keys: Vec<&String> = map.keys().collect();
    keys.sort();
    let mut out = Vec::new();
    for key in keys {
        let flag = format!("--{}", key.replace('_', "-"));
        match &map[key] {
            Value::Bool(b) => out.push(format!("{flag}={b}")),
            Value::Null => {}
            Value::String(s) => out.extend([flag, s.clone()]),
            Value::Number(n) => out.extend([flag, n.to_string()]),
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                out.extend([flag, parts.join(",")]);
            }
            Value::Object(_) => return Err(format!("config key {key} must not be an object")),
        }
    }
    Ok(out)
}

/// Splices config-file flags in front of the command-line flags, so that
/// later (command-line) occurrences override them.
fn merged_args(argv: Vec<String>) -> Result<Vec<String>, String> {
    let mut config = None;
    let mut i = 0;
    while i < argv.len() {
        if argv[i] == "--config" {
            config = argv.get(i + 1).cloned();
            break;
        }
        if let Some(p) = argv[i].strip_prefix("--config=") {
            config = Some(p.to_string());
            break;
        }
        i += 1;
    }
    let Some(path) = config else { return Ok(argv) };
    if argv.len() < 2 || argv[1].starts_with('-') {
        return Ok(argv);
    }
    let mut out = argv[..2].to_vec();
    out.extend(config_flags(&path)?);
    out.extend(argv[2..].iter().cloned());
    Ok(out)
}

fn resolve_output(path: &PathBuf) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.clone(),
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), String> {
    match output {
        Some(p) => {
            let p = resolve_output(p);
            std::fs::write(&p, text).map_err(|e| format!("cannot write {}: {e}", p.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn error_payload(command: &str, kind: &str, message: &str) -> String {
    render::to_json(&json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "error": { "kind": kind, "message": message },
    }))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match merged_args(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            print!("{}", error_payload("", "config", &msg));
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                // --help and --version
                return ExitCode::SUCCESS;
            }
            let command = argv.get(1).map(String::as_str).unwrap_or("");
            print!("{}", error_payload(command, "usage", &e.kind().to_string()));
            return ExitCode::from(2);
        }
    };
    let name = cli.command.name();
    let common = cli.command.common().clone();
    match commands::run(&cli.command) {
        Ok(out) => {
            let text = match common.format {
                commands::Format::Json => render::to_json(&ReportEnvelope {
                    tool_version: env!("CARGO_PKG_VERSION").into(),
                    command: name.into(),
                    inputs: out.inputs,
                    results: out.results,
                    warnings: out.warnings,
                }),
                commands::Format::Csv => match &out.table {
                    Some(t) => render::to_csv(t),
                    None => {
                        let msg = format!("command {name} has no tabular output; use --format json");
                        eprintln!("error: {msg}");
                        print!("{}", error_payload(name, "format", &msg));
                        return ExitCode::from(2);
                    }
                },
            };
            match emit(&text, common.output.as_ref()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(1)
                }
            }
        }
        Err(Failure { kind, message, validation }) => {
            eprintln!("error: {message}");
            print!("{}", error_payload(name, &kind, &message));
            ExitCode::from(if validation { 2 } else { 1 })
        }
    }
}
