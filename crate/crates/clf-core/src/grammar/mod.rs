//! The clause-grammar compiler.
//!
//! Grammars are ordinary logic-program clauses whose heads carry exactly one
//! construction argument:
//!
//! ```text
//! exp(plus(A,B)) :- exp(A), ['+'], exp(B).
//! exp(id(A))     :- stoken('ID',string(A)).
//! ```
//!
//! Two transformations prepare them for execution: groups of clauses led by
//! three or more distinct keywords become token dispatchers (so clause
//! selection is indexed), and directly left-recursive nonterminals are
//! rewritten into accumulator loops that preserve left associativity.
//! [`emit_dcg`] renders the transformed clauses as a readable listing;
//! [`wrap_entry`] compiles them for the parser runtime.

mod compile;
mod emit;
mod parse;
mod transform;

pub use compile::{wrap_entry, CompiledGrammar, ProdKind};
pub(crate) use compile::{AccumCont, CompiledClause, Instr, Pat, Production, VarId};
pub use emit::emit_dcg;
pub use parse::parse_cs;
pub use transform::{eliminate_left_recursion, left_factor};

use std::fmt;

/// A pattern over terms, as written in clause heads and call arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermPattern {
    Var(String),
    Symbol(String),
    Int(i64),
    Compound(String, Vec<TermPattern>),
    /// `[a,b]` or `[a,b|T]`; the optional tail must be a variable.
    List(Vec<TermPattern>, Option<String>),
}

impl TermPattern {
    fn visit_vars(&self, f: &mut impl FnMut(&str)) {
        match self {
            TermPattern::Var(v) => f(v),
            TermPattern::Symbol(_) | TermPattern::Int(_) => {}
            TermPattern::Compound(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
            TermPattern::List(elems, tail) => {
                elems.iter().for_each(|e| e.visit_vars(f));
                if let Some(t) = tail {
                    f(t);
                }
            }
        }
    }
}

/// Whether a token literal binds a string-valued or integer-valued token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    String,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyItem {
    /// `['+']` — match one keyword by its text.
    KeywordLit(String),
    /// `[T]` — match any keyword, binding its text. Generated by
    /// left-factoring; not writable in source.
    KeywordVar(String),
    /// `stoken('ID',string(A))` / `stoken('INT',integer(N))`.
    SToken { class: String, kind: ValueKind, var: String },
    /// Invoke another nonterminal. User calls carry one argument; generated
    /// helper calls carry two (accumulator/key plus result).
    Call { nonterminal: String, args: Vec<TermPattern> },
}

/// Provenance marker for transformed clauses; drives compilation of
/// dispatch tables and accumulator loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseOrigin {
    User,
    /// `a(X) :- [T], a$h(T,X).`
    DispatchEntry,
    /// `a$h('t1',X) :- ...` — args\[0\] is the dispatch key.
    DispatchArm,
    /// `add(C) :- mult(X), add$x(X,C).`
    AccumEntry,
    /// `add$x(A,C) :- ..., add$x(plus(A,B),C).`
    AccumCont,
    /// `add$x(A,A) :- .`
    AccumStop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub head: String,
    pub args: Vec<TermPattern>,
    pub body: Vec<BodyItem>,
    pub origin: ClauseOrigin,
    /// Source line of the clause (0 for generated clauses).
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Grammar {
    pub clauses: Vec<Clause>,
}

impl Grammar {
    /// Nonterminals in first-occurrence order.
    pub fn nonterminals(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for c in &self.clauses {
            if !seen.contains(&c.head.as_str()) {
                seen.push(c.head.as_str());
            }
        }
        seen
    }

    pub fn clauses_of(&self, nt: &str) -> Vec<&Clause> {
        self.clauses.iter().filter(|c| c.head == nt).collect()
    }

    pub fn defines(&self, nt: &str) -> bool {
        self.clauses.iter().any(|c| c.head == nt)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsError {
    pub line: usize,
    pub kind: CsErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CsErrorKind {
    Syntax(String),
    /// Heads must carry exactly one construction argument.
    HeadArity { nonterminal: String, arity: usize },
    /// `$` is reserved for generated helper names; `stoken` is a literal.
    ReservedName(String),
    Form(String),
    UndefinedNonterminal(String),
    UnboundHeadVariable { nonterminal: String, var: String },
    /// Every clause of the nonterminal is left-recursive.
    NoBaseCase(String),
    /// Left recursion through two or more nonterminals.
    IndirectLeftRecursion(Vec<String>),
    /// The recursive clause consumes nothing after the recursive call.
    EmptyRecursion(String),
    UndefinedEntry(String),
    IntOutOfRange(String),
}

impl fmt::Display for CsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: ", self.line)?;
        }
        match &self.kind {
            CsErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            CsErrorKind::HeadArity { nonterminal, arity } => write!(
                f,
                "`{nonterminal}` has {arity} argument(s); every head takes exactly one construction argument"
            ),
            CsErrorKind::ReservedName(name) => write!(f, "`{name}` is a reserved name"),
            CsErrorKind::Form(msg) => write!(f, "unknown body form: {msg}"),
            CsErrorKind::UndefinedNonterminal(name) => {
                write!(f, "nonterminal `{name}` is invoked but never defined")
            }
            CsErrorKind::UnboundHeadVariable { nonterminal, var } => {
                write!(f, "variable `{var}` in the head of `{nonterminal}` is not bound by its body")
            }
            CsErrorKind::NoBaseCase(nt) => {
                write!(f, "every clause of `{nt}` is left-recursive; one base clause is required")
            }
            CsErrorKind::IndirectLeftRecursion(cycle) => {
                write!(f, "unsupported indirect left recursion: {}", cycle.join(" -> "))
            }
            CsErrorKind::EmptyRecursion(nt) => {
                write!(f, "left-recursive clause of `{nt}` consumes nothing after the recursive call")
            }
            CsErrorKind::UndefinedEntry(name) => write!(f, "entry nonterminal `{name}` is not defined"),
            CsErrorKind::IntOutOfRange(text) => write!(f, "integer literal out of range: {text}"),
        }
    }
}

impl std::error::Error for CsError {}

pub(crate) fn cs_err<T>(line: usize, kind: CsErrorKind) -> Result<T, CsError> {
    Err(CsError { line, kind })
}
