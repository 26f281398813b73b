//! Token kinds and the line-oriented wire protocol between a scanner process
//! and a parser process.
//!
//! The protocol is plain text, one token per line. `debug` mode is
//! tab-separated and human-readable; `eclipse` mode emits ground-term lines
//! such as `token('ID',string("X1")).` for consumption by a logic host.
//! Session commands (`[BEGINDATA]`, `[PARSEFILE]path`, ...) share the same
//! line stream and never collide with token lines.

use std::fmt;

/// Default end-of-data sentinel. Deliberately unlikely to occur in source
/// text; overridable wherever it is matched.
pub const DEFAULT_END_MARKER: &str = "[)*&^%!ENDDATA!%&*(]";

/// Acknowledgment line terminating each token burst.
pub const END_TOKENS: &str = "[ENDTOKENS]";

/// One token crossing the scanner/parser boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    /// A reserved word or punctuation sign, carried as its raw text.
    Keyword(String),
    /// A string-valued token (identifiers, atoms, ...), tagged with its class name.
    SToken { class: String, value: String },
    /// An integer-valued token, tagged with its class name.
    IToken { class: String, value: i64 },
    /// One source newline; parsers count these to report line numbers.
    Newline,
    /// The text of one comment line.
    CommentText(String),
    /// An erroneous lexeme the scanner could not identify.
    LexError(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetMode {
    Debug,
    Eclipse,
    /// Accepted for compatibility; encodes exactly like [`TargetMode::Eclipse`].
    Centaur,
}

impl TargetMode {
    pub fn parse(word: &str) -> Option<TargetMode> {
        match word {
            "debug" => Some(TargetMode::Debug),
            "eclipse" => Some(TargetMode::Eclipse),
            "centaur" => Some(TargetMode::Centaur),
            _ => None,
        }
    }
}

/// A session-control line recognized by the stand-alone scanner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionCommand {
    BeginData,
    EndData,
    ParseFile(String),
    SetTarget(TargetMode),
    Quit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WireError {
    /// A line that should be a debug-format token line but is not.
    Malformed(String),
    /// An integer token value outside the signed 64-bit range.
    IntegerOverflow(String),
    /// `[TARGET]` with an unrecognized mode word.
    UnknownTarget(String),
}

impl fmt::Display for WireError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WireError::Malformed(line) => write!(f, "malformed token line: {line:?}"),
            WireError::IntegerOverflow(v) => {
                write!(f, "integer token value out of 64-bit range: {v}")
            }
            WireError::UnknownTarget(w) => write!(f, "unknown target mode: {w}"),
        }
    }
}

impl std::error::Error for WireError {}

fn escape_field(out: &mut String, field: &str) {
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
}

fn unescape_field(field: &str) -> Result<String, WireError> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            _ => return Err(WireError::Malformed(field.to_string())),
        }
    }
    Ok(out)
}

// Eclipse-mode atoms and strings use backslash escapes so that a token line
// can never contain a raw newline.
fn push_eclipse_atom(out: &mut String, name: &str) {
    out.push('\'');
    for c in name.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('\'');
}

fn push_eclipse_string(out: &mut String, value: &str) {
    out.push('"');
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
}

/// Encodes one token as one protocol line (without the trailing newline).
pub fn encode_token(token: &Token, mode: TargetMode) -> String {
    match mode {
        TargetMode::Debug => encode_debug(token),
        TargetMode::Eclipse | TargetMode::Centaur => encode_eclipse(token),
    }
}

fn encode_debug(token: &Token) -> String {
    let mut line = String::new();
    match token {
        Token::Keyword(text) => {
            line.push_str("keyword\t");
            escape_field(&mut line, text);
        }
        Token::SToken { class, value } => {
            line.push_str("stoken\t");
            escape_field(&mut line, class);
            line.push('\t');
            escape_field(&mut line, value);
        }
        Token::IToken { class, value } => {
            line.push_str("itoken\t");
            escape_field(&mut line, class);
            line.push('\t');
            line.push_str(&value.to_string());
        }
        Token::Newline => line.push_str("nl"),
        Token::CommentText(text) => {
            line.push_str("comtext\t");
            escape_field(&mut line, text);
        }
        Token::LexError(text) => {
            line.push_str("error\t");
            escape_field(&mut line, text);
        }
    }
    line
}

fn encode_eclipse(token: &Token) -> String {
    let mut line = String::new();
    match token {
        Token::Keyword(text) => {
            line.push_str("keyword(");
            push_eclipse_atom(&mut line, text);
            line.push(')');
        }
        Token::SToken { class, value } => {
            line.push_str("token(");
            push_eclipse_atom(&mut line, class);
            line.push_str(",string(");
            push_eclipse_string(&mut line, value);
            line.push_str("))");
        }
        Token::IToken { class, value } => {
            line.push_str("token(");
            push_eclipse_atom(&mut line, class);
            line.push_str(",integer(");
            line.push_str(&value.to_string());
            line.push_str("))");
        }
        Token::Newline => line.push_str("nl"),
        Token::CommentText(text) => {
            line.push_str("comtext(");
            push_eclipse_string(&mut line, text);
            line.push(')');
        }
        Token::LexError(text) => {
            line.push_str("error(");
            push_eclipse_string(&mut line, text);
            line.push(')');
        }
    }
    line.push('.');
    line
}

fn field_has_whitespace(s: &str) -> bool {
    s.chars().any(|c| c.is_whitespace())
}

/// Decodes one debug-format line back into a token. Left inverse of
/// [`encode_token`] in debug mode.
pub fn decode_token(line: &str) -> Result<Token, WireError> {
    let malformed = || WireError::Malformed(line.to_string());
    let mut fields = line.split('\t');
    let kind = fields.next().ok_or_else(malformed)?;
    let rest: Vec<&str> = fields.collect();
    match (kind, rest.as_slice()) {
        ("nl", []) => Ok(Token::Newline),
        ("keyword", [text]) => Ok(Token::Keyword(unescape_field(text)?)),
        ("comtext", [text]) => Ok(Token::CommentText(unescape_field(text)?)),
        ("error", [text]) => Ok(Token::LexError(unescape_field(text)?)),
        ("stoken", [class, value]) => {
            let class = unescape_field(class)?;
            if class.is_empty() || field_has_whitespace(&class) {
                return Err(malformed());
            }
            Ok(Token::SToken { class, value: unescape_field(value)? })
        }
        ("itoken", [class, value]) => {
            let class = unescape_field(class)?;
            if class.is_empty() || field_has_whitespace(&class) {
                return Err(malformed());
            }
            let value = unescape_field(value)?;
            let digits = value.strip_prefix('-').unwrap_or(&value);
            if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
                return Err(malformed());
            }
            let value =
                value.parse::<i64>().map_err(|_| WireError::IntegerOverflow(value.clone()))?;
            Ok(Token::IToken { class, value })
        }
        _ => Err(malformed()),
    }
}

/// Recognizes a session-command line. Returns `Ok(None)` for lines that are
/// not commands (source text, token lines, anything else). The end-of-data
/// sentinel is matched against the whole line.
pub fn parse_command(
    line: &str,
    end_marker: &str,
) -> Result<Option<SessionCommand>, WireError> {
    if line == "[BEGINDATA]" {
        return Ok(Some(SessionCommand::BeginData));
    }
    if line == end_marker {
        return Ok(Some(SessionCommand::EndData));
    }
    if line == "[QUIT]" {
        return Ok(Some(SessionCommand::Quit));
    }
    if let Some(path) = line.strip_prefix("[PARSEFILE]") {
        if !path.is_empty() {
            return Ok(Some(SessionCommand::ParseFile(path.to_string())));
        }
        return Ok(None);
    }
    if let Some(word) = line.strip_prefix("[TARGET]") {
        return match TargetMode::parse(word) {
            Some(mode) => Ok(Some(SessionCommand::SetTarget(mode))),
            None => Err(WireError::UnknownTarget(word.to_string())),
        };
    }
    Ok(None)
}
