//! The parse driver: feeds a source file through a scanner (in-process or a
//! separate scanner process speaking the token protocol) into the parser.

use super::{parse_tokens, ParseError, ParseResult};
use crate::grammar::CompiledGrammar;
use crate::lexer::{scan, LexSpec};
use crate::wire::{decode_token, Token, WireError, END_TOKENS};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, Command, Stdio};

/// Where tokens come from: scanning in this process, or a scanner
/// executable (program plus arguments) driven over its stdin/stdout.
pub enum Scanner<'a> {
    InProcess(&'a LexSpec),
    Subprocess(&'a [String]),
}

#[derive(Debug)]
pub enum DriverError {
    /// Reading the source file failed.
    FileRead { path: String, source: std::io::Error },
    /// The scanner executable could not be launched.
    SpawnFailed { program: String, source: std::io::Error },
    /// Talking to the scanner process failed.
    Io(std::io::Error),
    /// The scanner sent a line that is neither a token nor the sentinel.
    Protocol(String),
    /// A token line failed to decode.
    Decode(WireError),
    /// The token stream did not parse.
    Parse { file: String, error: ParseError },
}

impl fmt::Display for DriverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriverError::FileRead { path, source } => write!(f, "cannot read {path}: {source}"),
            DriverError::SpawnFailed { program, source } => {
                write!(f, "cannot launch scanner {program}: {source}")
            }
            DriverError::Io(e) => write!(f, "scanner i/o failed: {e}"),
            DriverError::Protocol(line) => {
                write!(f, "protocol violation: unexpected line {line:?}")
            }
            DriverError::Decode(e) => write!(f, "bad token line: {e}"),
            DriverError::Parse { file, error } => write!(f, "{file}: {error}"),
        }
    }
}

impl std::error::Error for DriverError {}

impl From<std::io::Error> for DriverError {
    fn from(e: std::io::Error) -> DriverError {
        DriverError::Io(e)
    }
}

/// Parses `file` with the given scanner and grammar. Both scanner modes
/// yield identical results on identical inputs.
pub fn clf_parse(
    scanner: &Scanner,
    grammar: &CompiledGrammar,
    file: &Path,
    keep_comments: bool,
) -> Result<ParseResult, DriverError> {
    let display = file.display().to_string();
    // read the source up front so an unreadable path fails the same way in
    // both modes
    let text = std::fs::read_to_string(file)
        .map_err(|e| DriverError::FileRead { path: display.clone(), source: e })?;
    let tokens = match scanner {
        Scanner::InProcess(spec) => scan(spec, &text, "sentences"),
        Scanner::Subprocess(argv) => subprocess_tokens(argv, file)?,
    };
    parse_tokens(grammar, &tokens, keep_comments)
        .map_err(|error| DriverError::Parse { file: display, error })
}

fn subprocess_tokens(argv: &[String], file: &Path) -> Result<Vec<Token>, DriverError> {
    let (program, args) = argv.split_first().ok_or_else(|| {
        DriverError::SpawnFailed {
            program: String::new(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty scanner command"),
        }
    })?;
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| DriverError::SpawnFailed { program: program.clone(), source: e })?;

    let result = drive_child(&mut child, file);
    if result.is_err() {
        let _ = child.kill();
    }
    let _ = child.wait();
    result
}

fn drive_child(child: &mut Child, file: &Path) -> Result<Vec<Token>, DriverError> {
    let mut stdin = child.stdin.take().expect("stdin piped");
    let stdout = child.stdout.take().expect("stdout piped");

    writeln!(stdin, "[TARGET]debug")?;
    writeln!(stdin, "[PARSEFILE]{}", file.display())?;
    stdin.flush()?;

    // decode as lines arrive; the child keeps scanning ahead meanwhile
    let mut tokens = Vec::new();
    let mut saw_sentinel = false;
    for line in BufReader::new(stdout).lines() {
        let line = line?;
        if line == END_TOKENS {
            saw_sentinel = true;
            break;
        }
        tokens.push(decode_token(&line).map_err(DriverError::Decode)?);
    }
    if !saw_sentinel {
        return Err(DriverError::Protocol("token stream ended without [ENDTOKENS]".into()));
    }
    let _ = writeln!(stdin, "[QUIT]");
    let _ = stdin.flush();
    Ok(tokens)
}
