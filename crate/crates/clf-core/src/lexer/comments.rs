//! The two standard comment rule packs, generalized over their delimiters.
//!
//! Block comments (`c_like`) open with one delimiter, may span lines and
//! close with another; each comment line becomes one `comtext` token with
//! tabs replaced by spaces and the newline reported separately. Line
//! comments (`ada_like`) run from a starter to the end of the line.

use super::{Action, RuleDef};
use crate::lexer::transform::Transform;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommentStyle {
    CLike { open: String, close: String },
    AdaLike { starter: String },
}

impl CommentStyle {
    pub fn c_like(open: &str, close: &str) -> CommentStyle {
        CommentStyle::CLike { open: open.to_string(), close: close.to_string() }
    }

    pub fn ada_like(starter: &str) -> CommentStyle {
        CommentStyle::AdaLike { starter: starter.to_string() }
    }
}

fn class_excluding(chars: &[char]) -> String {
    let mut out = String::from("[^");
    for &c in chars {
        match c {
            '\\' | ']' | '^' | '-' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push_str("\\n]");
    out
}

fn escaped(text: &str) -> String {
    super::pattern::escape_literal(text)
}

fn rule(contexts: &[&str], pattern: String, actions: Vec<Action>) -> RuleDef {
    RuleDef {
        contexts: contexts.iter().map(|s| s.to_string()).collect(),
        pattern,
        actions,
        line: 0,
    }
}

// suplast/suplast2 pipeline dropping exactly n trailing characters
fn drop_back_actions(n: usize) -> Vec<Action> {
    let mut actions = Vec::new();
    for _ in 0..n / 2 {
        actions.push(Action::Transform(Transform::SupLast2));
    }
    if n % 2 == 1 {
        actions.push(Action::Transform(Transform::SupLast));
    }
    actions
}

/// Builds the scanner rules for one comment style.
///
/// `c_like` closers may be one or two characters long (which covers the
/// delimiters in actual use: `*/`, `*)`, `}`, `-}`); anything longer is
/// rejected. Delimiters must be non-empty and free of newlines.
pub fn comment_pack(style: &CommentStyle) -> Result<Vec<RuleDef>, String> {
    match style {
        CommentStyle::CLike { open, close } => c_like_rules(open, close),
        CommentStyle::AdaLike { starter } => ada_like_rules(starter),
    }
}

fn check_delimiter(name: &str, text: &str) -> Result<(), String> {
    if text.is_empty() {
        return Err(format!("{name} delimiter must be non-empty"));
    }
    if text.contains('\n') {
        return Err(format!("{name} delimiter must not contain a newline"));
    }
    Ok(())
}

fn c_like_rules(open: &str, close: &str) -> Result<Vec<RuleDef>, String> {
    check_delimiter("open", open)?;
    check_delimiter("close", close)?;
    let close_chars: Vec<char> = close.chars().collect();

    // Inside `comment`, one rule matches a full comment line (content up to
    // but not including the newline) and one matches content terminated by
    // the close delimiter. Content never crosses the close delimiter, so the
    // body pattern excludes it via the classic run-of-first-char construction.
    let (line_body, close_pattern, close_len) = match close_chars.as_slice() {
        [d] => {
            let c1 = class_excluding(&[*d]);
            let body = format!("{c1}*");
            let close_pat = format!("{body}{}", escaped(&d.to_string()));
            (body, close_pat, 1)
        }
        [d1, d2] => {
            let c1 = class_excluding(&[*d1]);
            let c2 = class_excluding(&[*d1, *d2]);
            let d1q = escaped(&d1.to_string());
            let d2q = escaped(&d2.to_string());
            let ca = format!("({c1}*({d1q}+{c2})?)*");
            let cb = format!("{ca}{d1q}*");
            let close_pat = format!("{cb}{d2q}");
            (cb, close_pat, 2)
        }
        _ => {
            return Err(format!(
                "close delimiter {close:?} is {} characters long; only 1- and 2-character closers are supported",
                close_chars.len()
            ))
        }
    };

    let mut line_actions = vec![Action::Transform(Transform::SupLast)];
    line_actions.push(Action::Transform(Transform::RmTabs));
    line_actions.push(Action::Comtext);
    line_actions.push(Action::Nl);

    let mut close_actions = vec![Action::Begin("sentences".into())];
    close_actions.extend(drop_back_actions(close_len));
    close_actions.push(Action::Transform(Transform::RmTabs));
    close_actions.push(Action::Comtext);

    Ok(vec![
        rule(&["comment"], format!("{line_body}\\n"), line_actions),
        rule(&["comment"], close_pattern, close_actions),
        rule(&["sentences"], escaped(open), vec![Action::Begin("comment".into())]),
    ])
}

fn ada_like_rules(starter: &str) -> Result<Vec<RuleDef>, String> {
    check_delimiter("starter", starter)?;
    let startq = escaped(starter);
    let n = starter.chars().count();

    // A starter immediately followed by newline is an empty comment; the
    // general case switches to `comment`, takes the rest of the line as one
    // comtext, and the newline returns to `sentences`.
    let mut empty_actions = drop_back_actions(n + 1);
    empty_actions.push(Action::Comtext);
    empty_actions.push(Action::Nl);

    Ok(vec![
        rule(&["sentences"], format!("{startq}\\n"), empty_actions),
        rule(&["sentences"], startq, vec![Action::Begin("comment".into())]),
        rule(&["comment"], ".*".into(), vec![Action::Comtext]),
        rule(
            &["comment"],
            "\\n".into(),
            vec![Action::Begin("sentences".into()), Action::Nl],
        ),
    ])
}
