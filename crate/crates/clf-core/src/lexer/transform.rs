//! The string-normalization library applied to lexemes before emission:
//! boundary stripping, tab replacement, and forcing-character removal, so
//! token values reach the tree in canonical form.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// Drop the first character.
    ShiftLeft,
    /// Drop the first two characters.
    ShiftLeft2,
    /// Drop the last character.
    SupLast,
    /// Drop the last two characters.
    SupLast2,
    /// Replace each tab with one space.
    RmTabs,
    /// Strip leading spaces.
    RmLeadingSpaces,
    /// Remove every occurrence of the given character.
    ClearString(char),
    /// Treat the first character as the forcing character: drop the first and
    /// last characters and collapse each doubled forcing character to one
    /// (`'foo''bar'` becomes `foo'bar`).
    ClearString1,
    /// Drop the first and last characters and remove each backslash that
    /// forces the following character, keeping the forced character.
    ClearString2,
}

impl Transform {
    pub fn name(&self) -> &'static str {
        match self {
            Transform::ShiftLeft => "shiftleft",
            Transform::ShiftLeft2 => "shiftleft2",
            Transform::SupLast => "suplast",
            Transform::SupLast2 => "suplast2",
            Transform::RmTabs => "rmtabs",
            Transform::RmLeadingSpaces => "rm_leading_spaces",
            Transform::ClearString(_) => "clear_string",
            Transform::ClearString1 => "clear_string1",
            Transform::ClearString2 => "clear_string2",
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::ClearString(c) => write!(f, "clear_string({c:?})"),
            t => f.write_str(t.name()),
        }
    }
}

/// Applies one transform to a lexeme. Dropping more characters than the
/// string holds yields the empty string.
pub fn apply_transform(t: Transform, lexeme: &str) -> String {
    match t {
        Transform::ShiftLeft => skip_front(lexeme, 1),
        Transform::ShiftLeft2 => skip_front(lexeme, 2),
        Transform::SupLast => drop_back(lexeme, 1),
        Transform::SupLast2 => drop_back(lexeme, 2),
        Transform::RmTabs => lexeme.replace('\t', " "),
        Transform::RmLeadingSpaces => lexeme.trim_start_matches(' ').to_string(),
        Transform::ClearString(c) => lexeme.chars().filter(|&x| x != c).collect(),
        Transform::ClearString1 => clear_string1(lexeme),
        Transform::ClearString2 => clear_string2(lexeme),
    }
}

fn skip_front(s: &str, n: usize) -> String {
    s.chars().skip(n).collect()
}

fn drop_back(s: &str, n: usize) -> String {
    let total = s.chars().count();
    s.chars().take(total.saturating_sub(n)).collect()
}

fn clear_string1(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    if chars.len() < 2 {
        return String::new();
    }
    let forcing = chars[0];
    let inner = &chars[1..chars.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut i = 0;
    while i < inner.len() {
        if inner[i] == forcing && i + 1 < inner.len() && inner[i + 1] == forcing {
            out.push(forcing);
            i += 2;
        } else {
            out.push(inner[i]);
            i += 1;
        }
    }
    out
}

fn clear_string2(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    if chars.len() < 2 {
        return String::new();
    }
    let inner = &chars[1..chars.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut i = 0;
    while i < inner.len() {
        if inner[i] == '\\' {
            if i + 1 < inner.len() {
                out.push(inner[i + 1]);
            }
            i += 2;
        } else {
            out.push(inner[i]);
            i += 1;
        }
    }
    out
}

pub const ALL_TRANSFORM_NAMES: [&str; 9] = [
    "shiftleft",
    "shiftleft2",
    "suplast",
    "suplast2",
    "rmtabs",
    "rm_leading_spaces",
    "clear_string",
    "clear_string1",
    "clear_string2",
];
