//! The scanner engine: declarative specs (contexts, ordered regex rules,
//! action pipelines) compiled to longest-match automata and run over input
//! text to produce token streams.
//!
//! A spec file is line-oriented UTF-8:
//!
//! ```text
//! # comment
//! %abbrev NAME REGEX          abbreviation, referenced as {NAME}
//! %contexts a,b,...           full context list (defaults to the mandatory five)
//! %comments ada_like("--")    splice in a standard comment rule pack
//! <ctx,ctx> REGEX => action; action; ...
//! ```
//!
//! Actions: `keyword`, `keyword("lit")`, `stoken("CLASS")`, `itoken("CLASS")`,
//! `nl`, `comtext`, `error`, `begin(ctx)`, `skip`, or a transform name
//! (`shiftleft`, `suplast2`, `clear_string1`, ...).
//!
//! Matching is longest-match with earliest-rule tie-break. Characters no
//! rule matches become one-character `error` tokens, so scanning always
//! makes progress and never aborts.

mod comments;
pub mod pattern;
pub mod transform;

pub use comments::{comment_pack, CommentStyle};
pub use transform::{apply_transform, Transform};

use crate::wire::Token;
use pattern::{Ast, Matcher};
use std::collections::HashMap;
use std::fmt;

/// Contexts every spec must declare. `waitdata` is reserved for session
/// control and carries no user rules; `comm`/`incomm` exist so specs written
/// for comment-editing hosts still load.
pub const MANDATORY_CONTEXTS: [&str; 5] = ["waitdata", "sentences", "comment", "comm", "incomm"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    /// Emit a keyword token; `None` uses the (transformed) lexeme.
    Keyword(Option<String>),
    /// Emit a string token of the given class.
    SToken(String),
    /// Emit an integer token of the given class; a lexeme that does not
    /// parse as a signed 64-bit integer becomes an `error` token instead.
    IToken(String),
    /// Emit one newline token.
    Nl,
    /// Emit the lexeme as comment text.
    Comtext,
    /// Emit the lexeme as an erroneous token.
    Error,
    /// Switch the scanner to another context.
    Begin(String),
    /// Rewrite the lexeme before emission.
    Transform(Transform),
    /// Do nothing (discard the lexeme).
    Skip,
}

impl Action {
    fn is_value_emit(&self) -> bool {
        matches!(
            self,
            Action::Keyword(_) | Action::SToken(_) | Action::IToken(_) | Action::Comtext | Action::Error
        )
    }
}

/// One scanner rule before validation: a pattern active in some contexts
/// plus the actions to run on its lexeme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleDef {
    pub contexts: Vec<String>,
    pub pattern: String,
    pub actions: Vec<Action>,
    /// Spec-file line for diagnostics; 0 for synthesized rules.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadError {
    pub line: usize,
    pub kind: LoadErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadErrorKind {
    MissingMandatoryContext(String),
    DuplicateContext(String),
    UndeclaredContext(String),
    /// `waitdata` is reserved for the session layer.
    ReservedContext(String),
    UndeclaredAbbrev(String),
    DuplicateAbbrev(String),
    BadRegex(String),
    BadAction(String),
    /// The pattern cannot match any non-empty string.
    EmptyMatch,
    /// More than one value-emitting action in a pipeline.
    MultipleEmits,
    TransformAfterEmit,
    BadDirective(String),
    BadCommentDelimiter(String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            LoadErrorKind::MissingMandatoryContext(name) => {
                write!(f, "mandatory context `{name}` is missing from %contexts")
            }
            LoadErrorKind::DuplicateContext(name) => write!(f, "context `{name}` declared twice"),
            LoadErrorKind::UndeclaredContext(name) => write!(f, "undeclared context `{name}`"),
            LoadErrorKind::ReservedContext(name) => {
                write!(f, "context `{name}` is reserved for session control")
            }
            LoadErrorKind::UndeclaredAbbrev(name) => write!(f, "undeclared abbreviation `{name}`"),
            LoadErrorKind::DuplicateAbbrev(name) => {
                write!(f, "abbreviation `{name}` defined twice")
            }
            LoadErrorKind::BadRegex(msg) => write!(f, "bad pattern: {msg}"),
            LoadErrorKind::BadAction(msg) => write!(f, "bad action: {msg}"),
            LoadErrorKind::EmptyMatch => {
                write!(f, "pattern cannot match any non-empty string")
            }
            LoadErrorKind::MultipleEmits => {
                write!(f, "a rule may emit at most one keyword/stoken/itoken/comtext/error token")
            }
            LoadErrorKind::TransformAfterEmit => {
                write!(f, "transforms must precede the emitting action")
            }
            LoadErrorKind::BadDirective(msg) => write!(f, "bad directive: {msg}"),
            LoadErrorKind::BadCommentDelimiter(msg) => write!(f, "bad comment delimiter: {msg}"),
        }
    }
}

impl std::error::Error for LoadError {}

fn load_err<T>(line: usize, kind: LoadErrorKind) -> Result<T, LoadError> {
    Err(LoadError { line, kind })
}

struct CompiledRule {
    def: RuleDef,
    ast: Ast,
}

/// A validated, compiled scanner specification. Immutable after load; scans
/// may run concurrently against the same spec.
pub struct LexSpec {
    contexts: Vec<String>,
    context_ids: HashMap<String, usize>,
    rules: Vec<CompiledRule>,
    /// Per context: global indices of the rules active there, in rule order.
    ctx_rules: Vec<Vec<usize>>,
    matchers: Vec<Matcher>,
}

impl fmt::Debug for LexSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LexSpec")
            .field("contexts", &self.contexts)
            .field("rules", &self.rules.len())
            .finish()
    }
}

impl LexSpec {
    pub fn contexts(&self) -> &[String] {
        &self.contexts
    }

    pub fn context_index(&self, name: &str) -> Option<usize> {
        self.context_ids.get(name).copied()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn rule(&self, idx: usize) -> &RuleDef {
        &self.rules[idx].def
    }
}

/// Incremental construction of a [`LexSpec`], used by [`load_spec`] and by
/// code that assembles rule sets programmatically (comment packs, tests).
#[derive(Default)]
pub struct LexSpecBuilder {
    contexts: Option<(Vec<String>, usize)>,
    abbrevs: Vec<(String, String)>,
    rules: Vec<RuleDef>,
}

impl LexSpecBuilder {
    pub fn new() -> LexSpecBuilder {
        LexSpecBuilder::default()
    }

    /// Declares the full context list (replacing the default five); it must
    /// still include every mandatory context.
    pub fn set_contexts(&mut self, names: Vec<String>, line: usize) -> Result<(), LoadError> {
        let mut seen = HashMap::new();
        for name in &names {
            if seen.insert(name.clone(), ()).is_some() {
                return load_err(line, LoadErrorKind::DuplicateContext(name.clone()));
            }
        }
        self.contexts = Some((names, line));
        Ok(())
    }

    /// Defines an abbreviation. Earlier abbreviations may be referenced; the
    /// definition is expanded immediately.
    pub fn add_abbrev(&mut self, name: &str, regex: &str, line: usize) -> Result<(), LoadError> {
        if self.abbrevs.iter().any(|(n, _)| n == name) {
            return load_err(line, LoadErrorKind::DuplicateAbbrev(name.to_string()));
        }
        let expanded = substitute_abbrevs(regex, &self.abbrevs, line)?;
        self.abbrevs.push((name.to_string(), expanded));
        Ok(())
    }

    pub fn add_rule(&mut self, def: RuleDef) {
        self.rules.push(def);
    }

    pub fn add_rules(&mut self, defs: impl IntoIterator<Item = RuleDef>) {
        self.rules.extend(defs);
    }

    pub fn add_comment_pack(&mut self, style: &CommentStyle, line: usize) -> Result<(), LoadError> {
        let rules = comment_pack(style)
            .map_err(|msg| LoadError { line, kind: LoadErrorKind::BadCommentDelimiter(msg) })?;
        for mut def in rules {
            def.line = line;
            self.rules.push(def);
        }
        Ok(())
    }

    pub fn build(self) -> Result<LexSpec, LoadError> {
        let (contexts, ctx_line) = match self.contexts {
            Some((names, line)) => (names, line),
            None => (MANDATORY_CONTEXTS.iter().map(|s| s.to_string()).collect(), 0),
        };
        for mandatory in MANDATORY_CONTEXTS {
            if !contexts.iter().any(|c| c == mandatory) {
                return load_err(
                    ctx_line,
                    LoadErrorKind::MissingMandatoryContext(mandatory.to_string()),
                );
            }
        }
        let context_ids: HashMap<String, usize> =
            contexts.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();

        let mut rules = Vec::with_capacity(self.rules.len());
        for def in self.rules {
            validate_rule(&def, &context_ids)?;
            let expanded = substitute_abbrevs(&def.pattern, &self.abbrevs, def.line)?;
            let ast = pattern::parse(&expanded).map_err(|e| LoadError {
                line: def.line,
                kind: LoadErrorKind::BadRegex(e.to_string()),
            })?;
            if !pattern::matches_some_nonempty(&ast) {
                return load_err(def.line, LoadErrorKind::EmptyMatch);
            }
            rules.push(CompiledRule { def, ast });
        }

        let mut ctx_rules: Vec<Vec<usize>> = vec![Vec::new(); contexts.len()];
        for (idx, rule) in rules.iter().enumerate() {
            for ctx in &rule.def.contexts {
                ctx_rules[context_ids[ctx]].push(idx);
            }
        }
        let matchers = ctx_rules
            .iter()
            .map(|active| {
                let asts: Vec<&Ast> = active.iter().map(|&i| &rules[i].ast).collect();
                Matcher::new(&asts)
            })
            .collect();

        Ok(LexSpec { contexts, context_ids, rules, ctx_rules, matchers })
    }
}

fn validate_rule(def: &RuleDef, context_ids: &HashMap<String, usize>) -> Result<(), LoadError> {
    let line = def.line;
    if def.contexts.is_empty() {
        return load_err(line, LoadErrorKind::BadDirective("rule has no contexts".into()));
    }
    for ctx in &def.contexts {
        if !context_ids.contains_key(ctx.as_str()) {
            return load_err(line, LoadErrorKind::UndeclaredContext(ctx.clone()));
        }
        if ctx == "waitdata" {
            return load_err(line, LoadErrorKind::ReservedContext(ctx.clone()));
        }
    }
    if def.actions.is_empty() {
        return load_err(line, LoadErrorKind::BadAction("rule has no actions".into()));
    }
    let mut seen_emit = false;
    for action in &def.actions {
        match action {
            a if a.is_value_emit() => {
                if seen_emit {
                    return load_err(line, LoadErrorKind::MultipleEmits);
                }
                seen_emit = true;
            }
            Action::Transform(_) if seen_emit => {
                return load_err(line, LoadErrorKind::TransformAfterEmit);
            }
            Action::Begin(target) => {
                if !context_ids.contains_key(target.as_str()) {
                    return load_err(line, LoadErrorKind::UndeclaredContext(target.clone()));
                }
                if target == "waitdata" {
                    return load_err(line, LoadErrorKind::ReservedContext(target.clone()));
                }
            }
            _ => {}
        }
        if let Action::SToken(class) | Action::IToken(class) = action {
            if class.is_empty() || class.chars().any(char::is_whitespace) {
                return load_err(
                    line,
                    LoadErrorKind::BadAction(format!("invalid token class {class:?}")),
                );
            }
        }
    }
    Ok(())
}

/// Expands `{name}` references. Braces inside character classes and quoted
/// literals are left alone; a literal brace elsewhere must be escaped.
fn substitute_abbrevs(
    pattern: &str,
    abbrevs: &[(String, String)],
    line: usize,
) -> Result<String, LoadError> {
    let mut out = String::with_capacity(pattern.len());
    let mut chars = pattern.chars().peekable();
    let mut in_class = false;
    let mut in_quote = false;
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                out.push(c);
                if let Some(next) = chars.next() {
                    out.push(next);
                }
            }
            '"' if !in_class => {
                in_quote = !in_quote;
                out.push(c);
            }
            '[' if !in_quote && !in_class => {
                in_class = true;
                out.push(c);
            }
            ']' if in_class => {
                in_class = false;
                out.push(c);
            }
            '{' if !in_class && !in_quote => {
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(c) if c.is_ascii_alphanumeric() || c == '_' => name.push(c),
                        _ => {
                            return load_err(
                                line,
                                LoadErrorKind::BadRegex(format!(
                                    "unterminated abbreviation reference `{{{name}`"
                                )),
                            )
                        }
                    }
                }
                match abbrevs.iter().find(|(n, _)| *n == name) {
                    Some((_, def)) => {
                        out.push('(');
                        out.push_str(def);
                        out.push(')');
                    }
                    None => return load_err(line, LoadErrorKind::UndeclaredAbbrev(name)),
                }
            }
            _ => out.push(c),
        }
    }
    Ok(out)
}

/// Parses the spec file format and compiles it.
pub fn load_spec(text: &str) -> Result<LexSpec, LoadError> {
    let mut builder = LexSpecBuilder::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some(rest) = t.strip_prefix("%abbrev") {
            let rest = rest.trim_start();
            let (name, regex) = match rest.split_once(char::is_whitespace) {
                Some((n, r)) => (n, r.trim()),
                None => {
                    return load_err(
                        line,
                        LoadErrorKind::BadDirective("%abbrev needs a name and a pattern".into()),
                    )
                }
            };
            if !is_ident(name) {
                return load_err(
                    line,
                    LoadErrorKind::BadDirective(format!("invalid abbreviation name `{name}`")),
                );
            }
            if regex.is_empty() {
                return load_err(
                    line,
                    LoadErrorKind::BadDirective("%abbrev needs a pattern".into()),
                );
            }
            builder.add_abbrev(name, regex, line)?;
        } else if let Some(rest) = t.strip_prefix("%contexts") {
            let names: Vec<String> =
                rest.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            if names.is_empty() {
                return load_err(
                    line,
                    LoadErrorKind::BadDirective("%contexts needs at least one name".into()),
                );
            }
            if let Some(bad) = names.iter().find(|n| !is_ident(n)) {
                return load_err(
                    line,
                    LoadErrorKind::BadDirective(format!("invalid context name `{bad}`")),
                );
            }
            builder.set_contexts(names, line)?;
        } else if let Some(rest) = t.strip_prefix("%comments") {
            let style = parse_comment_style(rest.trim(), line)?;
            builder.add_comment_pack(&style, line)?;
        } else if t.starts_with('<') {
            builder.add_rule(parse_rule_line(t, line)?);
        } else {
            return load_err(
                line,
                LoadErrorKind::BadDirective(format!("unrecognized line `{t}`")),
            );
        }
    }
    builder.build()
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_comment_style(text: &str, line: usize) -> Result<CommentStyle, LoadError> {
    let bad = |msg: String| LoadError { line, kind: LoadErrorKind::BadDirective(msg) };
    let (name, rest) = text
        .split_once('(')
        .ok_or_else(|| bad("expected c_like(\"..\",\"..\") or ada_like(\"..\")".into()))?;
    let rest = rest
        .trim_end()
        .strip_suffix(')')
        .ok_or_else(|| bad("missing closing `)`".into()))?;
    let args = parse_quoted_args(rest).map_err(|e| bad(e))?;
    match (name.trim(), args.as_slice()) {
        ("c_like", [open, close]) => Ok(CommentStyle::c_like(open, close)),
        ("ada_like", [starter]) => Ok(CommentStyle::ada_like(starter)),
        ("c_like", _) => Err(bad("c_like takes two quoted arguments".into())),
        ("ada_like", _) => Err(bad("ada_like takes one quoted argument".into())),
        (other, _) => Err(bad(format!("unknown comment style `{other}`"))),
    }
}

fn parse_quoted_args(text: &str) -> Result<Vec<String>, String> {
    let mut args = Vec::new();
    let mut chars = text.chars().peekable();
    loop {
        while matches!(chars.peek(), Some(c) if c.is_whitespace()) {
            chars.next();
        }
        match chars.next() {
            None => break,
            Some('"') => {
                let mut arg = String::new();
                loop {
                    match chars.next() {
                        None => return Err("unterminated string argument".into()),
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some('\\') => arg.push('\\'),
                            Some('"') => arg.push('"'),
                            Some('n') => arg.push('\n'),
                            Some('t') => arg.push('\t'),
                            _ => return Err("bad escape in string argument".into()),
                        },
                        Some(c) => arg.push(c),
                    }
                }
                args.push(arg);
                while matches!(chars.peek(), Some(c) if c.is_whitespace()) {
                    chars.next();
                }
                match chars.next() {
                    None => break,
                    Some(',') => continue,
                    Some(c) => return Err(format!("expected `,` between arguments, found `{c}`")),
                }
            }
            Some(c) => return Err(format!("expected a quoted argument, found `{c}`")),
        }
    }
    Ok(args)
}

fn parse_rule_line(t: &str, line: usize) -> Result<RuleDef, LoadError> {
    let bad = |msg: String| LoadError { line, kind: LoadErrorKind::BadDirective(msg) };
    let rest = &t[1..];
    let close = rest.find('>').ok_or_else(|| bad("unterminated context list".into()))?;
    let contexts: Vec<String> =
        rest[..close].split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if contexts.is_empty() {
        return Err(bad("rule needs at least one context".into()));
    }
    let after = rest[close + 1..].trim_start();

    // Find the `=>` separator outside classes, quotes and escapes.
    let mut in_class = false;
    let mut in_quote = false;
    let mut prev_escape = false;
    let mut split_at = None;
    let bytes: Vec<(usize, char)> = after.char_indices().collect();
    let mut i = 0;
    while i < bytes.len() {
        let (off, c) = bytes[i];
        if prev_escape {
            prev_escape = false;
        } else {
            match c {
                '\\' => prev_escape = true,
                '"' if !in_class => in_quote = !in_quote,
                '[' if !in_quote && !in_class => in_class = true,
                ']' if in_class => in_class = false,
                '=' if !in_class && !in_quote => {
                    if matches!(bytes.get(i + 1), Some(&(_, '>'))) {
                        split_at = Some(off);
                        break;
                    }
                }
                _ => {}
            }
        }
        i += 1;
    }
    let split_at = split_at.ok_or_else(|| bad("rule is missing `=>`".into()))?;
    let pattern = after[..split_at].trim().to_string();
    if pattern.is_empty() {
        return Err(bad("rule has an empty pattern".into()));
    }
    let actions_text = &after[split_at + 2..];
    let mut actions = Vec::new();
    for piece in actions_text.split(';') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        actions.push(parse_action(piece, line)?);
    }
    if actions.is_empty() {
        return load_err(line, LoadErrorKind::BadAction("rule has no actions".into()));
    }
    Ok(RuleDef { contexts, pattern, actions, line })
}

fn parse_action(text: &str, line: usize) -> Result<Action, LoadError> {
    let bad = |msg: String| LoadError { line, kind: LoadErrorKind::BadAction(msg) };
    let (name, arg) = match text.split_once('(') {
        Some((name, rest)) => {
            let inner = rest
                .trim_end()
                .strip_suffix(')')
                .ok_or_else(|| bad(format!("missing `)` in `{text}`")))?;
            (name.trim(), Some(inner.trim()))
        }
        None => (text, None),
    };
    let quoted = |arg: Option<&str>| -> Result<String, LoadError> {
        let arg = arg.ok_or_else(|| bad(format!("`{name}` needs an argument")))?;
        let args = parse_quoted_args(arg).map_err(|e| bad(e))?;
        match args.as_slice() {
            [one] => Ok(one.clone()),
            _ => Err(bad(format!("`{name}` takes one quoted argument"))),
        }
    };
    match (name, arg) {
        ("keyword", None) => Ok(Action::Keyword(None)),
        ("keyword", some) => Ok(Action::Keyword(Some(quoted(some)?))),
        ("stoken", some @ Some(_)) => Ok(Action::SToken(quoted(some)?)),
        ("itoken", some @ Some(_)) => Ok(Action::IToken(quoted(some)?)),
        ("nl", None) => Ok(Action::Nl),
        ("comtext", None) => Ok(Action::Comtext),
        ("error", None) => Ok(Action::Error),
        ("skip", None) => Ok(Action::Skip),
        ("begin", Some(ctx)) if is_ident(ctx) => Ok(Action::Begin(ctx.to_string())),
        ("begin", _) => Err(bad("begin needs a context name".into())),
        ("shiftleft", None) => Ok(Action::Transform(Transform::ShiftLeft)),
        ("shiftleft2", None) => Ok(Action::Transform(Transform::ShiftLeft2)),
        ("suplast", None) => Ok(Action::Transform(Transform::SupLast)),
        ("suplast2", None) => Ok(Action::Transform(Transform::SupLast2)),
        ("rmtabs", None) => Ok(Action::Transform(Transform::RmTabs)),
        ("rm_leading_spaces", None) => Ok(Action::Transform(Transform::RmLeadingSpaces)),
        ("clear_string", some @ Some(_)) => {
            let arg = quoted(some)?;
            let mut chars = arg.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(Action::Transform(Transform::ClearString(c))),
                _ => Err(bad("clear_string takes a single character".into())),
            }
        }
        ("clear_string1", None) => Ok(Action::Transform(Transform::ClearString1)),
        ("clear_string2", None) => Ok(Action::Transform(Transform::ClearString2)),
        ("stoken" | "itoken" | "clear_string", None) => {
            Err(bad(format!("`{name}` needs an argument")))
        }
        _ => Err(bad(format!("unknown action `{text}`"))),
    }
}

/// Runs the scanner over `input`, starting in the named context.
///
/// Panics if `start` is not a declared context (callers are expected to
/// validate; the toolkit always starts in `sentences`).
pub fn scan(spec: &LexSpec, input: &str, start: &str) -> Vec<Token> {
    let mut ctx = spec
        .context_index(start)
        .unwrap_or_else(|| panic!("start context `{start}` is not declared"));
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < input.len() {
        let matched = spec.matchers[ctx].longest_match(input, pos);
        match matched {
            Some((len, local_idx)) => {
                let rule = &spec.rules[spec.ctx_rules[ctx][local_idx]];
                let mut lexeme = std::borrow::Cow::from(&input[pos..pos + len]);
                for action in &rule.def.actions {
                    match action {
                        Action::Transform(t) => {
                            lexeme = std::borrow::Cow::Owned(apply_transform(*t, &lexeme));
                        }
                        Action::Keyword(lit) => out.push(Token::Keyword(
                            lit.clone().unwrap_or_else(|| lexeme.to_string()),
                        )),
                        Action::SToken(class) => out.push(Token::SToken {
                            class: class.clone(),
                            value: lexeme.to_string(),
                        }),
                        Action::IToken(class) => match lexeme.parse::<i64>() {
                            Ok(value) => {
                                out.push(Token::IToken { class: class.clone(), value })
                            }
                            Err(_) => out.push(Token::LexError(lexeme.to_string())),
                        },
                        Action::Nl => out.push(Token::Newline),
                        Action::Comtext => out.push(Token::CommentText(lexeme.to_string())),
                        Action::Error => out.push(Token::LexError(lexeme.to_string())),
                        Action::Begin(name) => {
                            ctx = spec.context_index(name).expect("begin target validated at load");
                        }
                        Action::Skip => {}
                    }
                }
                pos += len;
            }
            None => {
                let c = input[pos..].chars().next().expect("pos is on a char boundary");
                out.push(Token::LexError(c.to_string()));
                pos += c.len_utf8();
            }
        }
    }
    out
}

/// Reusable conformance check: every `\n` in the input must be reflected by
/// exactly one newline token. Rule authors owe this to the parser, which
/// counts newline tokens to report line numbers.
pub fn check_nl_conservation(spec: &LexSpec, input: &str) -> bool {
    let tokens = scan(spec, input, "sentences");
    let emitted = tokens.iter().filter(|t| matches!(t, Token::Newline)).count();
    emitted == input.matches('\n').count()
}
