//! Command-line front end: argument parsing, dispatch, output files and run
//! manifests.
//!
//! Exit codes: 0 success, 1 invalid input or I/O failure, 2 a numerical
//! check failed, 64 usage error (unknown command or flag).

pub mod args;
pub mod commands;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, Format};
use commands::CliError;
use output::{sha256_hex, Report, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

fn dispatch(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Maxdist(a) => commands::maxdist(a),
        Command::Jointdist(a) => commands::jointdist(a),
        Command::GfCheck(a) => commands::gf_check(a),
        Command::Ell2Verify(a) => commands::ell2_verify(a),
        Command::Stationary(a) => commands::stationary(a),
        Command::Asymptotics(a) => commands::asymptotics(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Universality(a) => commands::universality(a),
    }
}

/// `<out>.manifest.json` next to the output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Runs one command line (including the program name) and returns the exit
/// code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let report = match dispatch(&cli.command) {
        Ok(report) => report,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            return e.exit_code();
        }
    };
    let output = cli.command.output();
    let bytes = report.render(output.format);
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        args: argv
            .iter()
            .skip(1)
            .map(|a| a.to_string_lossy().into_owned())
            .collect(),
        seeds: report.seeds.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: started,
        wall_time_seconds: clock.elapsed().as_secs_f64(),
        format: match output.format {
            Format::Json => "json".into(),
            Format::Csv => "csv".into(),
        },
        output: output
            .out
            .as_ref()
            .map_or("stdout".into(), |p| p.display().to_string()),
        output_sha256: sha256_hex(&bytes),
    };
    let written = match &output.out {
        Some(path) => std::fs::write(path, &bytes)
            .and_then(|()| {
                let mut text = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
                text.push(b'\n');
                std::fs::write(manifest_path(path), text)
            })
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout
            .write_all(&bytes)
            .and_then(|()| {
                let line = serde_json::to_string(&manifest).expect("manifest serializes");
                writeln!(stderr, "manifest: {line}")
            })
            .map_err(|e| format!("cannot write output: {e}")),
    };
    if let Err(message) = written {
        let _ = writeln!(stderr, "error: {message}");
        return EXIT_VALIDATION;
    }
    if let Some(summary) = &report.summary {
        let _ = writeln!(stderr, "{summary}");
    }
    if report.failed {
        EXIT_NUMERIC
    } else {
        EXIT_OK
    }
}
