//! The stand-alone scanner executable: loads a scanner spec and serves the
//! session protocol on stdin/stdout, so a parser can drive it as a separate
//! process (or a human can poke at it interactively).

use clf_core::lexer::load_spec;
use clf_core::session::{run_session, SessionConfig};
use clf_core::wire::TargetMode;

const USAGE: &str = "usage: clf-scanner --spec FILE [--end-marker STR] [--target MODE]

Serves the scanner session protocol on stdin/stdout: [BEGINDATA] starts a
scanning window ended by the end marker, [PARSEFILE]path scans a file,
[TARGET]debug|eclipse|centaur selects the output encoding, [QUIT] exits.
Every token burst is terminated by an [ENDTOKENS] line.";

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut spec_path = None;
    let mut config = SessionConfig::default();
    let mut i = 0;
    while i < args.len() {
        let take_value = |i: &mut usize| -> Option<String> {
            *i += 1;
            args.get(*i).cloned()
        };
        match args[i].as_str() {
            "-h" | "--help" => {
                println!("{USAGE}");
                return 0;
            }
            "-V" | "--version" => {
                println!("clf-scanner {}", env!("CARGO_PKG_VERSION"));
                return 0;
            }
            "--spec" => match take_value(&mut i) {
                Some(v) => spec_path = Some(v),
                None => return usage_error("--spec needs a value"),
            },
            "--end-marker" => match take_value(&mut i) {
                Some(v) => config.end_marker = v,
                None => return usage_error("--end-marker needs a value"),
            },
            "--target" => match take_value(&mut i) {
                Some(v) => match TargetMode::parse(&v) {
                    Some(mode) => config.target = mode,
                    None => return usage_error(&format!("unknown target mode `{v}`")),
                },
                None => return usage_error("--target needs a value"),
            },
            other => return usage_error(&format!("unexpected argument `{other}`")),
        }
        i += 1;
    }
    let Some(spec_path) = spec_path else {
        return usage_error("--spec FILE is required");
    };
    let text = match std::fs::read_to_string(&spec_path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("clf-scanner: cannot read {spec_path}: {err}");
            return 3;
        }
    };
    let spec = match load_spec(&text) {
        Ok(spec) => spec,
        Err(err) => {
            eprintln!("clf-scanner: {spec_path}: {err}");
            return 65;
        }
    };
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    match run_session(&spec, stdin.lock(), stdout.lock(), &config) {
        Ok(status) => status,
        Err(err) => {
            eprintln!("clf-scanner: session i/o failed: {err}");
            3
        }
    }
}

fn usage_error(message: &str) -> i32 {
    eprintln!("clf-scanner: {message}");
    eprintln!("{USAGE}");
    64
}
