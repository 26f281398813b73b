//! Parser for the clause-grammar source syntax (`.csp` files).

use super::{
    cs_err, BodyItem, Clause, ClauseOrigin, CsError, CsErrorKind, Grammar, TermPattern, ValueKind,
};
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Atom(String),
    Var(String),
    Int(i64),
    ColonDash,
    Comma,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Pipe,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Lexer<'a> {
        Lexer { chars: text.chars().peekable(), line: 1 }
    }

    fn next_tok(&mut self) -> Result<Option<(Tok, usize)>, CsError> {
        loop {
            match self.chars.peek() {
                None => return Ok(None),
                Some('\n') => {
                    self.line += 1;
                    self.chars.next();
                }
                Some(c) if c.is_whitespace() => {
                    self.chars.next();
                }
                Some('%') => {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.chars.next();
                    }
                }
                Some(_) => break,
            }
        }
        let line = self.line;
        let c = *self.chars.peek().unwrap();
        let tok = match c {
            '(' => {
                self.chars.next();
                Tok::LParen
            }
            ')' => {
                self.chars.next();
                Tok::RParen
            }
            '[' => {
                self.chars.next();
                Tok::LBracket
            }
            ']' => {
                self.chars.next();
                Tok::RBracket
            }
            '|' => {
                self.chars.next();
                Tok::Pipe
            }
            ',' => {
                self.chars.next();
                Tok::Comma
            }
            '.' => {
                self.chars.next();
                match self.chars.peek() {
                    None => Tok::Dot,
                    Some(&c) if c.is_whitespace() || c == '%' => Tok::Dot,
                    Some(&c) => {
                        return cs_err(
                            line,
                            CsErrorKind::Syntax(format!("unexpected `{c}` after clause-ending `.`")),
                        )
                    }
                }
            }
            ':' => {
                self.chars.next();
                match self.chars.next() {
                    Some('-') => Tok::ColonDash,
                    _ => return cs_err(line, CsErrorKind::Syntax("expected `:-`".into())),
                }
            }
            '\'' => {
                self.chars.next();
                let mut name = String::new();
                loop {
                    match self.chars.next() {
                        None => {
                            return cs_err(line, CsErrorKind::Syntax("unterminated quoted atom".into()))
                        }
                        Some('\'') => {
                            // doubled quote is an escaped quote
                            if self.chars.peek() == Some(&'\'') {
                                self.chars.next();
                                name.push('\'');
                            } else {
                                break;
                            }
                        }
                        Some('\n') => {
                            return cs_err(line, CsErrorKind::Syntax("unterminated quoted atom".into()))
                        }
                        Some(c) => name.push(c),
                    }
                }
                Tok::Atom(name)
            }
            c if c.is_ascii_digit() => Tok::Int(self.integer(line, false)?),
            '-' => {
                self.chars.next();
                match self.chars.peek() {
                    Some(c) if c.is_ascii_digit() => Tok::Int(self.integer(line, true)?),
                    _ => return cs_err(line, CsErrorKind::Syntax("stray `-`".into())),
                }
            }
            c if c.is_ascii_lowercase() => {
                let name = self.ident();
                Tok::Atom(name)
            }
            c if c.is_ascii_uppercase() || c == '_' => {
                let name = self.ident();
                Tok::Var(name)
            }
            c => return cs_err(line, CsErrorKind::Syntax(format!("unexpected character `{c}`"))),
        };
        Ok(Some((tok, line)))
    }

    fn ident(&mut self) -> String {
        let mut name = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                name.push(c);
                self.chars.next();
            } else {
                break;
            }
        }
        name
    }

    fn integer(&mut self, line: usize, negative: bool) -> Result<i64, CsError> {
        let mut digits = String::new();
        if negative {
            digits.push('-');
        }
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                self.chars.next();
            } else {
                break;
            }
        }
        digits.parse::<i64>().map_err(|_| CsError { line, kind: CsErrorKind::IntOutOfRange(digits) })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    fresh_anon: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).or_else(|| self.toks.last()).map_or(0, |&(_, l)| l)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), CsError> {
        let line = self.line();
        match self.bump() {
            Some(ref t) if t == want => Ok(()),
            other => cs_err(
                line,
                CsErrorKind::Syntax(format!("expected {what}, found {}", describe(other.as_ref()))),
            ),
        }
    }

    fn pattern(&mut self) -> Result<TermPattern, CsError> {
        let line = self.line();
        match self.bump() {
            Some(Tok::Var(name)) => {
                if name == "_" {
                    self.fresh_anon += 1;
                    Ok(TermPattern::Var(format!("_G{}", self.fresh_anon)))
                } else {
                    Ok(TermPattern::Var(name))
                }
            }
            Some(Tok::Int(n)) => Ok(TermPattern::Int(n)),
            Some(Tok::Atom(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.bump();
                    let args = self.pattern_list()?;
                    self.expect(&Tok::RParen, "`)`")?;
                    if args.is_empty() {
                        return cs_err(
                            line,
                            CsErrorKind::Syntax(format!("`{name}()` has no arguments")),
                        );
                    }
                    Ok(TermPattern::Compound(name, args))
                } else {
                    Ok(TermPattern::Symbol(name))
                }
            }
            Some(Tok::LBracket) => {
                if self.peek() == Some(&Tok::RBracket) {
                    self.bump();
                    return Ok(TermPattern::List(Vec::new(), None));
                }
                let mut elems = vec![self.pattern()?];
                loop {
                    match self.bump() {
                        Some(Tok::Comma) => elems.push(self.pattern()?),
                        Some(Tok::RBracket) => return Ok(TermPattern::List(elems, None)),
                        Some(Tok::Pipe) => {
                            let tail_line = self.line();
                            let tail = match self.bump() {
                                Some(Tok::Var(v)) => v,
                                other => {
                                    return cs_err(
                                        tail_line,
                                        CsErrorKind::Syntax(format!(
                                            "list tail must be a variable, found {}",
                                            describe(other.as_ref())
                                        )),
                                    )
                                }
                            };
                            self.expect(&Tok::RBracket, "`]`")?;
                            return Ok(TermPattern::List(elems, Some(tail)));
                        }
                        other => {
                            return cs_err(
                                line,
                                CsErrorKind::Syntax(format!(
                                    "expected `,`, `|` or `]` in list pattern, found {}",
                                    describe(other.as_ref())
                                )),
                            )
                        }
                    }
                }
            }
            other => cs_err(
                line,
                CsErrorKind::Syntax(format!("expected a pattern, found {}", describe(other.as_ref()))),
            ),
        }
    }

    fn pattern_list(&mut self) -> Result<Vec<TermPattern>, CsError> {
        let mut args = vec![self.pattern()?];
        while self.peek() == Some(&Tok::Comma) {
            self.bump();
            args.push(self.pattern()?);
        }
        Ok(args)
    }

    fn body_item(&mut self, items: &mut Vec<BodyItem>) -> Result<(), CsError> {
        let line = self.line();
        match self.bump() {
            // `['+']` or `['(', ')']`: one keyword match per element
            Some(Tok::LBracket) => {
                loop {
                    match self.bump() {
                        Some(Tok::Atom(text)) => {
                            items.push(BodyItem::KeywordLit(text));
                        }
                        other => {
                            return cs_err(
                                line,
                                CsErrorKind::Form(format!(
                                    "keyword lists hold quoted literals, found {}",
                                    describe(other.as_ref())
                                )),
                            )
                        }
                    }
                    match self.bump() {
                        Some(Tok::Comma) => {}
                        Some(Tok::RBracket) => break,
                        other => {
                            return cs_err(
                                line,
                                CsErrorKind::Syntax(format!(
                                    "expected `,` or `]`, found {}",
                                    describe(other.as_ref())
                                )),
                            )
                        }
                    }
                }
                Ok(())
            }
            Some(Tok::Atom(name)) if name == "stoken" => {
                self.expect(&Tok::LParen, "`(`")?;
                let class = match self.bump() {
                    Some(Tok::Atom(c)) => c,
                    other => {
                        return cs_err(
                            line,
                            CsErrorKind::Form(format!(
                                "stoken class must be an atom, found {}",
                                describe(other.as_ref())
                            )),
                        )
                    }
                };
                self.expect(&Tok::Comma, "`,`")?;
                let kind = match self.bump() {
                    Some(Tok::Atom(k)) if k == "string" => ValueKind::String,
                    Some(Tok::Atom(k)) if k == "integer" => ValueKind::Integer,
                    other => {
                        return cs_err(
                            line,
                            CsErrorKind::Form(format!(
                                "stoken value form must be string(V) or integer(V), found {}",
                                describe(other.as_ref())
                            )),
                        )
                    }
                };
                self.expect(&Tok::LParen, "`(`")?;
                let var = match self.bump() {
                    Some(Tok::Var(v)) if v != "_" => v,
                    other => {
                        return cs_err(
                            line,
                            CsErrorKind::Form(format!(
                                "stoken binds a named variable, found {}",
                                describe(other.as_ref())
                            )),
                        )
                    }
                };
                self.expect(&Tok::RParen, "`)`")?;
                self.expect(&Tok::RParen, "`)`")?;
                items.push(BodyItem::SToken { class, kind, var });
                Ok(())
            }
            Some(Tok::Atom(name)) => {
                if self.peek() != Some(&Tok::LParen) {
                    return cs_err(
                        line,
                        CsErrorKind::Form(format!("`{name}` without arguments in a body")),
                    );
                }
                self.bump();
                let args = self.pattern_list()?;
                self.expect(&Tok::RParen, "`)`")?;
                if args.len() != 1 {
                    return cs_err(
                        line,
                        CsErrorKind::HeadArity { nonterminal: name, arity: args.len() },
                    );
                }
                items.push(BodyItem::Call { nonterminal: name, args });
                Ok(())
            }
            other => cs_err(
                line,
                CsErrorKind::Form(format!("expected a body item, found {}", describe(other.as_ref()))),
            ),
        }
    }

    fn clause(&mut self) -> Result<Clause, CsError> {
        let line = self.line();
        let head = match self.bump() {
            Some(Tok::Atom(name)) => name,
            other => {
                return cs_err(
                    line,
                    CsErrorKind::Syntax(format!(
                        "expected a clause head, found {}",
                        describe(other.as_ref())
                    )),
                )
            }
        };
        if head.contains('$') {
            return cs_err(line, CsErrorKind::ReservedName(head));
        }
        if head == "stoken" {
            return cs_err(line, CsErrorKind::ReservedName(head));
        }
        let args = if self.peek() == Some(&Tok::LParen) {
            self.bump();
            let args = self.pattern_list()?;
            self.expect(&Tok::RParen, "`)`")?;
            args
        } else {
            Vec::new()
        };
        if args.len() != 1 {
            return cs_err(line, CsErrorKind::HeadArity { nonterminal: head, arity: args.len() });
        }
        let mut body = Vec::new();
        match self.bump() {
            Some(Tok::Dot) => {}
            Some(Tok::ColonDash) => loop {
                self.body_item(&mut body)?;
                match self.bump() {
                    Some(Tok::Comma) => {}
                    Some(Tok::Dot) => break,
                    other => {
                        return cs_err(
                            self.line(),
                            CsErrorKind::Syntax(format!(
                                "expected `,` or `.`, found {}",
                                describe(other.as_ref())
                            )),
                        )
                    }
                }
            },
            other => {
                return cs_err(
                    line,
                    CsErrorKind::Syntax(format!("expected `:-` or `.`, found {}", describe(other.as_ref()))),
                )
            }
        }
        Ok(Clause { head, args, body, origin: ClauseOrigin::User, line })
    }
}

fn describe(tok: Option<&Tok>) -> String {
    match tok {
        None => "end of input".into(),
        Some(Tok::Atom(a)) => format!("atom `{a}`"),
        Some(Tok::Var(v)) => format!("variable `{v}`"),
        Some(Tok::Int(n)) => format!("integer `{n}`"),
        Some(Tok::ColonDash) => "`:-`".into(),
        Some(Tok::Comma) => "`,`".into(),
        Some(Tok::Dot) => "`.`".into(),
        Some(Tok::LParen) => "`(`".into(),
        Some(Tok::RParen) => "`)`".into(),
        Some(Tok::LBracket) => "`[`".into(),
        Some(Tok::RBracket) => "`]`".into(),
        Some(Tok::Pipe) => "`|`".into(),
    }
}

/// Parses clause-grammar source text and validates it:
/// one construction argument per head, bodies built from keyword lists,
/// `stoken` literals and calls, every invoked nonterminal defined, every
/// head variable bound by the body (or the head is a bare pass-through
/// variable).
pub fn parse_cs(text: &str) -> Result<Grammar, CsError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(tok) = lexer.next_tok()? {
        toks.push(tok);
    }
    let mut parser = Parser { toks, pos: 0, fresh_anon: 0 };
    let mut clauses = Vec::new();
    while parser.peek().is_some() {
        clauses.push(parser.clause()?);
    }
    let grammar = Grammar { clauses };
    validate(&grammar)?;
    Ok(grammar)
}

fn validate(grammar: &Grammar) -> Result<(), CsError> {
    let defined: HashSet<&str> = grammar.clauses.iter().map(|c| c.head.as_str()).collect();
    for clause in &grammar.clauses {
        let mut body_vars: HashSet<String> = HashSet::new();
        for item in &clause.body {
            match item {
                BodyItem::Call { nonterminal, args } => {
                    if !defined.contains(nonterminal.as_str()) {
                        return cs_err(
                            clause.line,
                            CsErrorKind::UndefinedNonterminal(nonterminal.clone()),
                        );
                    }
                    args.iter().for_each(|a| a.visit_vars(&mut |v| {
                        body_vars.insert(v.to_string());
                    }));
                }
                BodyItem::SToken { var, .. } => {
                    body_vars.insert(var.clone());
                }
                BodyItem::KeywordLit(_) | BodyItem::KeywordVar(_) => {}
            }
        }
        let pass_through = matches!(clause.args.as_slice(), [TermPattern::Var(_)]);
        let mut unbound = None;
        for arg in &clause.args {
            arg.visit_vars(&mut |v| {
                if !body_vars.contains(v) && unbound.is_none() {
                    unbound = Some(v.to_string());
                }
            });
        }
        if let Some(var) = unbound {
            if !pass_through {
                return cs_err(
                    clause.line,
                    CsErrorKind::UnboundHeadVariable { nonterminal: clause.head.clone(), var },
                );
            }
        }
    }
    Ok(())
}
