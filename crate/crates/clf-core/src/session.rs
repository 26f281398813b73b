//! The stand-alone scanner session: a line protocol over stdin/stdout for
//! debugging a scanner by hand or serving tokens to a parser process.
//!
//! Before `[BEGINDATA]`, only command lines are honored. Inside a window,
//! every line is source text until the end-of-data marker arrives; the
//! accumulated text is then scanned and written as one token line per token,
//! terminated by `[ENDTOKENS]`. `[PARSEFILE]path` scans a whole file the
//! same way, `[TARGET]` switches the output encoding, `[QUIT]` (or end of
//! input) ends the session.

use crate::lexer::{scan, LexSpec};
use crate::wire::{
    encode_token, parse_command, SessionCommand, TargetMode, Token, DEFAULT_END_MARKER, END_TOKENS,
};
use std::io::{BufRead, Write};

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub end_marker: String,
    pub target: TargetMode,
}

impl Default for SessionConfig {
    fn default() -> SessionConfig {
        SessionConfig { end_marker: DEFAULT_END_MARKER.to_string(), target: TargetMode::Debug }
    }
}

/// Runs one scanner session over the given streams; returns the exit
/// status (0 on `[QUIT]` or end of input).
///
/// Token lines are flushed one by one, so a consumer sees token `i` before
/// it has to provide more input.
pub fn run_session(
    spec: &LexSpec,
    input: impl BufRead,
    mut output: impl Write,
    config: &SessionConfig,
) -> std::io::Result<i32> {
    let mut target = config.target;
    let mut scanning = false;
    let mut window: Vec<String> = Vec::new();

    for line in input.lines() {
        let line = line?;
        let command = parse_command(&line, &config.end_marker);
        if scanning {
            match command {
                Ok(Some(SessionCommand::EndData)) => {
                    let text = window.join("\n");
                    window.clear();
                    scanning = false;
                    emit_tokens(&scan(spec, &text, "sentences"), target, &mut output)?;
                    finish_burst(&mut output)?;
                }
                _ => window.push(line),
            }
            continue;
        }
        match command {
            Ok(Some(SessionCommand::BeginData)) => scanning = true,
            Ok(Some(SessionCommand::SetTarget(mode))) => target = mode,
            Ok(Some(SessionCommand::Quit)) => return Ok(0),
            Ok(Some(SessionCommand::ParseFile(path))) => {
                match std::fs::read_to_string(&path) {
                    Ok(text) => emit_tokens(&scan(spec, &text, "sentences"), target, &mut output)?,
                    Err(err) => {
                        let token = Token::LexError(format!("cannot read {path}: {err}"));
                        writeln!(output, "{}", encode_token(&token, target))?;
                    }
                }
                finish_burst(&mut output)?;
            }
            Ok(Some(SessionCommand::EndData)) | Ok(None) => {}
            Err(err) => {
                // diagnostics stay off the protocol stream
                let _ = writeln!(std::io::stderr(), "clf-scanner: {err}");
            }
        }
    }
    Ok(0)
}

fn emit_tokens(
    tokens: &[Token],
    target: TargetMode,
    output: &mut impl Write,
) -> std::io::Result<()> {
    for token in tokens {
        writeln!(output, "{}", encode_token(token, target))?;
        output.flush()?;
    }
    Ok(())
}

fn finish_burst(output: &mut impl Write) -> std::io::Result<()> {
    writeln!(output, "{END_TOKENS}")?;
    output.flush()
}
