//! The pattern dialect behind scanner rules and its longest-match engine.
//!
//! Supported syntax: literals, `.` (any char except newline), character
//! classes `[...]` / `[^...]` with ranges, grouping, alternation `|`, the
//! postfix operators `*` `+` `?`, quoted literal runs `"..."`, and the
//! escapes `\n` `\t` `\r` plus `\<any>` for a literal character. Anchors and
//! trailing context are not part of the dialect.
//!
//! All rules active in a context are compiled into one NFA; matching is
//! longest-match with earliest-rule tie-break, the discipline scanner
//! generators traditionally use.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for PatternError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at pattern offset {})", self.message, self.offset)
    }
}

impl std::error::Error for PatternError {}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, PatternError> {
    Err(PatternError { offset, message: message.into() })
}

/// A set of characters as sorted, disjoint inclusive ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharSet {
    ranges: Vec<(char, char)>,
}

const CHAR_MAX: char = char::MAX;

impl CharSet {
    pub fn single(c: char) -> CharSet {
        CharSet { ranges: vec![(c, c)] }
    }

    pub fn from_ranges(mut ranges: Vec<(char, char)>) -> CharSet {
        ranges.retain(|(lo, hi)| lo <= hi);
        ranges.sort();
        let mut merged: Vec<(char, char)> = Vec::with_capacity(ranges.len());
        for (lo, hi) in ranges {
            match merged.last_mut() {
                // overlapping or adjacent: extend the previous range
                Some((_, prev_hi)) if char_succ(*prev_hi).map_or(true, |succ| lo <= succ) => {
                    if hi > *prev_hi {
                        *prev_hi = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        CharSet { ranges: merged }
    }

    /// Any character except newline (the meaning of `.`).
    pub fn any_but_newline() -> CharSet {
        CharSet::from_ranges(vec![('\0', '\t'), ('\u{b}', CHAR_MAX)])
    }

    pub fn negate(&self) -> CharSet {
        let mut out = Vec::new();
        let mut next = Some('\0');
        for &(lo, hi) in &self.ranges {
            if let Some(n) = next {
                if n < lo {
                    out.push((n, char_pred(lo)));
                }
            }
            next = char_succ(hi);
        }
        if let Some(n) = next {
            out.push((n, CHAR_MAX));
        }
        CharSet::from_ranges(out)
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.ranges
            .binary_search_by(|&(lo, hi)| {
                if c < lo {
                    std::cmp::Ordering::Greater
                } else if c > hi {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }
}

fn char_succ(c: char) -> Option<char> {
    // skip the surrogate gap
    if c == '\u{D7FF}' {
        return Some('\u{E000}');
    }
    char::from_u32(c as u32 + 1)
}

fn char_pred(c: char) -> char {
    if c == '\u{E000}' {
        return '\u{D7FF}';
    }
    char::from_u32(c as u32 - 1).expect("predecessor of NUL requested")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ast {
    Empty,
    Char(CharSet),
    Seq(Vec<Ast>),
    Alt(Vec<Ast>),
    Star(Box<Ast>),
    Plus(Box<Ast>),
    Opt(Box<Ast>),
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

/// Parses one pattern (after abbreviation substitution) into an AST.
pub fn parse(text: &str) -> Result<Ast, PatternError> {
    let mut p = Parser { chars: text.char_indices().collect(), pos: 0, text };
    let ast = p.alt()?;
    if let Some(&(off, c)) = p.peek() {
        return err(off, format!("unexpected `{c}`"));
    }
    Ok(ast)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, char)> {
        self.chars.get(self.pos)
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let c = self.chars.get(self.pos).copied();
        self.pos += 1;
        c
    }

    fn alt(&mut self) -> Result<Ast, PatternError> {
        let mut branches = vec![self.seq()?];
        while matches!(self.peek(), Some(&(_, '|'))) {
            self.bump();
            branches.push(self.seq()?);
        }
        Ok(if branches.len() == 1 { branches.pop().unwrap() } else { Ast::Alt(branches) })
    }

    fn seq(&mut self) -> Result<Ast, PatternError> {
        let mut items = Vec::new();
        while let Some(&(_, c)) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            items.push(self.repeat()?);
        }
        Ok(match items.len() {
            0 => Ast::Empty,
            1 => items.pop().unwrap(),
            _ => Ast::Seq(items),
        })
    }

    fn repeat(&mut self) -> Result<Ast, PatternError> {
        let mut atom = self.atom()?;
        while let Some(&(_, c)) = self.peek() {
            match c {
                '*' => {
                    self.bump();
                    atom = Ast::Star(Box::new(atom));
                }
                '+' => {
                    self.bump();
                    atom = Ast::Plus(Box::new(atom));
                }
                '?' => {
                    self.bump();
                    atom = Ast::Opt(Box::new(atom));
                }
                _ => break,
            }
        }
        Ok(atom)
    }

    fn atom(&mut self) -> Result<Ast, PatternError> {
        let (off, c) = match self.bump() {
            Some(x) => x,
            None => return err(self.text.len(), "unexpected end of pattern"),
        };
        match c {
            '(' => {
                let inner = self.alt()?;
                match self.bump() {
                    Some((_, ')')) => Ok(inner),
                    _ => err(off, "unclosed group"),
                }
            }
            '[' => self.class(off),
            '"' => self.quoted(off),
            '.' => Ok(Ast::Char(CharSet::any_but_newline())),
            '\\' => {
                let (_, esc) = self
                    .bump()
                    .ok_or_else(|| PatternError { offset: off, message: "dangling escape".into() })?;
                Ok(Ast::Char(CharSet::single(unescape(esc))))
            }
            '*' | '+' | '?' => err(off, format!("`{c}` has nothing to repeat")),
            ')' => err(off, "unmatched `)`"),
            ']' => err(off, "unmatched `]`"),
            '{' | '}' => err(off, format!("`{c}` is reserved for abbreviations (escape it as `\\{c}`)")),
            _ => Ok(Ast::Char(CharSet::single(c))),
        }
    }

    fn quoted(&mut self, open_off: usize) -> Result<Ast, PatternError> {
        let mut items = Vec::new();
        loop {
            match self.bump() {
                None => return err(open_off, "unclosed quoted literal"),
                Some((_, '"')) => break,
                Some((off, '\\')) => {
                    let (_, esc) = self.bump().ok_or_else(|| PatternError {
                        offset: off,
                        message: "dangling escape".into(),
                    })?;
                    items.push(Ast::Char(CharSet::single(unescape(esc))));
                }
                Some((_, c)) => items.push(Ast::Char(CharSet::single(c))),
            }
        }
        Ok(match items.len() {
            0 => Ast::Empty,
            1 => items.pop().unwrap(),
            _ => Ast::Seq(items),
        })
    }

    fn class(&mut self, open_off: usize) -> Result<Ast, PatternError> {
        let negated = if matches!(self.peek(), Some(&(_, '^'))) {
            self.bump();
            true
        } else {
            false
        };
        let mut ranges: Vec<(char, char)> = Vec::new();
        let mut first = true;
        loop {
            let (off, c) = match self.bump() {
                Some(x) => x,
                None => return err(open_off, "unclosed character class"),
            };
            let lo = match c {
                ']' if !first => break,
                ']' => ']', // `]` first in a class is literal
                '\\' => {
                    let (_, esc) = self.bump().ok_or_else(|| PatternError {
                        offset: off,
                        message: "dangling escape".into(),
                    })?;
                    unescape(esc)
                }
                c => c,
            };
            first = false;
            // range?
            if matches!(self.peek(), Some(&(_, '-')))
                && !matches!(self.chars.get(self.pos + 1), None | Some(&(_, ']')))
            {
                self.bump(); // the dash
                let (hoff, hc) = self.bump().unwrap();
                let hi = if hc == '\\' {
                    let (_, esc) = self.bump().ok_or_else(|| PatternError {
                        offset: hoff,
                        message: "dangling escape".into(),
                    })?;
                    unescape(esc)
                } else {
                    hc
                };
                if hi < lo {
                    return err(off, format!("inverted range `{lo}-{hi}`"));
                }
                ranges.push((lo, hi));
            } else {
                ranges.push((lo, lo));
            }
        }
        let set = CharSet::from_ranges(ranges);
        let set = if negated { set.negate() } else { set };
        if set.is_empty() {
            return err(open_off, "empty character class");
        }
        Ok(Ast::Char(set))
    }
}

fn unescape(c: char) -> char {
    match c {
        'n' => '\n',
        't' => '\t',
        'r' => '\r',
        '0' => '\0',
        other => other,
    }
}

/// Escapes a literal string so it matches itself as a pattern.
pub fn escape_literal(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '(' | ')' | '[' | ']' | '{' | '}' | '|' | '*' | '+' | '?' | '.' | '"' | '\\' | '<'
            | '>' | '-' | '^' | '$' | '/' | ';' | '=' | ' ' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out
}

// === NFA ===

#[derive(Debug, Default, Clone)]
struct NState {
    char_edges: Vec<(CharSet, u32)>,
    eps: Vec<u32>,
    accept: Option<u32>,
}

/// A combined longest-match automaton for an ordered list of patterns.
#[derive(Debug, Clone)]
pub struct Matcher {
    states: Vec<NState>,
    closures: Vec<Vec<u32>>,
    start: u32,
    words: usize,
}

struct Builder {
    states: Vec<NState>,
}

impl Builder {
    fn state(&mut self) -> u32 {
        self.states.push(NState::default());
        (self.states.len() - 1) as u32
    }

    fn eps(&mut self, from: u32, to: u32) {
        self.states[from as usize].eps.push(to);
    }

    // returns (start, end) of the fragment
    fn fragment(&mut self, ast: &Ast) -> (u32, u32) {
        match ast {
            Ast::Empty => {
                let s = self.state();
                let e = self.state();
                self.eps(s, e);
                (s, e)
            }
            Ast::Char(set) => {
                let s = self.state();
                let e = self.state();
                self.states[s as usize].char_edges.push((set.clone(), e));
                (s, e)
            }
            Ast::Seq(items) => {
                let mut start = None;
                let mut prev_end: Option<u32> = None;
                for item in items {
                    let (s, e) = self.fragment(item);
                    if let Some(pe) = prev_end {
                        self.eps(pe, s);
                    } else {
                        start = Some(s);
                    }
                    prev_end = Some(e);
                }
                (start.unwrap(), prev_end.unwrap())
            }
            Ast::Alt(branches) => {
                let s = self.state();
                let e = self.state();
                for b in branches {
                    let (bs, be) = self.fragment(b);
                    self.eps(s, bs);
                    self.eps(be, e);
                }
                (s, e)
            }
            Ast::Star(inner) => {
                let s = self.state();
                let e = self.state();
                let (is, ie) = self.fragment(inner);
                self.eps(s, is);
                self.eps(s, e);
                self.eps(ie, is);
                self.eps(ie, e);
                (s, e)
            }
            Ast::Plus(inner) => {
                let s = self.state();
                let e = self.state();
                let (is, ie) = self.fragment(inner);
                self.eps(s, is);
                self.eps(ie, is);
                self.eps(ie, e);
                (s, e)
            }
            Ast::Opt(inner) => {
                let s = self.state();
                let e = self.state();
                let (is, ie) = self.fragment(inner);
                self.eps(s, is);
                self.eps(s, e);
                self.eps(ie, e);
                (s, e)
            }
        }
    }
}

impl Matcher {
    pub fn new(patterns: &[&Ast]) -> Matcher {
        let mut b = Builder { states: Vec::new() };
        let start = b.state();
        for (idx, ast) in patterns.iter().enumerate() {
            let (s, e) = b.fragment(ast);
            b.eps(start, s);
            b.states[e as usize].accept = Some(idx as u32);
        }
        let closures = compute_closures(&b.states);
        let words = (b.states.len() + 63) / 64;
        Matcher { states: b.states, closures, start, words }
    }

    /// Longest match at byte offset `from`; ties broken by smallest pattern
    /// index. Zero-length matches are never reported.
    pub fn longest_match(&self, text: &str, from: usize) -> Option<(usize, usize)> {
        let mut current = vec![0u64; self.words];
        let mut next = vec![0u64; self.words];
        for &s in &self.closures[self.start as usize] {
            current[(s / 64) as usize] |= 1 << (s % 64);
        }
        let mut best: Option<(usize, usize)> = None;
        for (i, c) in text[from..].char_indices() {
            next.iter_mut().for_each(|w| *w = 0);
            let mut any = false;
            for (wi, &word) in current.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let bit = bits.trailing_zeros();
                    bits &= bits - 1;
                    let s = (wi as u32) * 64 + bit;
                    for (set, target) in &self.states[s as usize].char_edges {
                        if set.contains(c) {
                            for &t in &self.closures[*target as usize] {
                                next[(t / 64) as usize] |= 1 << (t % 64);
                                any = true;
                            }
                        }
                    }
                }
            }
            if !any {
                break;
            }
            std::mem::swap(&mut current, &mut next);
            let len = i + c.len_utf8();
            if let Some(rule) = self.best_accept(&current) {
                best = Some((len, rule));
            }
        }
        best
    }

    fn best_accept(&self, set: &[u64]) -> Option<usize> {
        let mut best: Option<u32> = None;
        for (wi, &word) in set.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let bit = bits.trailing_zeros();
                bits &= bits - 1;
                let s = (wi as u32) * 64 + bit;
                if let Some(tag) = self.states[s as usize].accept {
                    best = Some(best.map_or(tag, |b: u32| b.min(tag)));
                }
            }
        }
        best.map(|b| b as usize)
    }
}

fn compute_closures(states: &[NState]) -> Vec<Vec<u32>> {
    let mut closures = Vec::with_capacity(states.len());
    let mut seen = vec![false; states.len()];
    for s in 0..states.len() as u32 {
        seen.iter_mut().for_each(|v| *v = false);
        let mut stack = vec![s];
        let mut closure = Vec::new();
        seen[s as usize] = true;
        while let Some(t) = stack.pop() {
            closure.push(t);
            for &u in &states[t as usize].eps {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    stack.push(u);
                }
            }
        }
        closure.sort_unstable();
        closures.push(closure);
    }
    closures
}

/// True iff the pattern's language contains at least one non-empty string.
/// Patterns failing this would either never match or only ever match the
/// empty string, so rules carrying them are rejected at load time.
pub fn matches_some_nonempty(ast: &Ast) -> bool {
    let m = Matcher::new(&[ast]);
    // once one character is consumed, is an accept reachable?
    let mut reach = vec![false; m.states.len()];
    let mut stack: Vec<u32> = Vec::new();
    for &s in &m.closures[m.start as usize] {
        for (set, t) in &m.states[s as usize].char_edges {
            if !set.is_empty() && !reach[*t as usize] {
                reach[*t as usize] = true;
                stack.push(*t);
            }
        }
    }
    while let Some(s) = stack.pop() {
        for &t in &m.closures[s as usize] {
            if m.states[t as usize].accept.is_some() {
                return true;
            }
            for (set, u) in &m.states[t as usize].char_edges {
                if !set.is_empty() && !reach[*u as usize] {
                    reach[*u as usize] = true;
                    stack.push(*u);
                }
            }
        }
    }
    false
}
