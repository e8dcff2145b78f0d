mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use liouville_core::LiouvilleError;
use serde_json::{json, Value};

use args::{Cli, Format};
use commands::{output_of, run, SCHEMA};

const THREADS_VAR: &str = "LIOUVILLE_THREADS";

fn exit_code(e: &LiouvilleError) -> u8 {
    if e.is_domain() {
        2
    } else {
        3
    }
}

fn fail(error: Value, code: u8) -> ExitCode {
    let doc = json!({ "schema": SCHEMA, "error": error, "exit_code": code });
    eprintln!("{doc}");
    ExitCode::from(code)
}

fn usage(message: impl Into<String>) -> ExitCode {
    fail(json!({ "kind": "usage", "message": message.into() }), 2)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return usage(e.to_string().trim_end()),
    };
    if let Err(message) = configure_threads() {
        return usage(message);
    }
    let rendered = match run(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            let code = exit_code(&e);
            let mut error = serde_json::to_value(&e).unwrap_or(Value::Null);
            if let Value::Object(m) = &mut error {
                m.insert("message".into(), json!(e.to_string()));
            }
            return fail(error, code);
        }
    };
    let output = output_of(&cli.command);
    let text = match output.format {
        Format::Json => {
            let mut s =
                serde_json::to_string_pretty(&rendered.json).expect("JSON values serialize");
            s.push('\n');
            s
        }
        Format::Csv => match rendered.csv {
            Some(csv) => csv,
            None => return usage("this command has no CSV form"),
        },
    };
    let written = match &output.output {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(json!({ "kind": "io", "message": e.to_string() }), 1),
    }
}
