//! The backtracking parser runtime.
//!
//! [`parse_tokens`] runs a compiled grammar over a buffered token stream
//! with ordered-alternative backtracking, building the abstract term and the
//! parallel reference tree of 1-based source lines. Newline tokens drive the
//! line counter; comment tokens are skipped between terminals (collected in
//! keep mode). On failure the reported location is the furthest position any
//! terminal match was attempted, together with the set of terminals expected
//! there.
//!
//! The engine is an explicit machine: the goal stack is a persistent heap
//! list and alternatives live on a choice-point stack, so a parse may nest
//! hundreds of thousands of accumulator iterations without touching the host
//! call stack. Terms and reference trees grow in arenas and are truncated on
//! backtracking.

mod driver;

pub use driver::{clf_parse, DriverError, Scanner};

use crate::grammar::{
    AccumCont, CompiledClause, CompiledGrammar, Instr, Pat, Production, ValueKind, VarId,
};
use crate::term::{RefTree, Term};
use crate::wire::Token;
use std::fmt;
use std::rc::Rc;

/// A successful parse: the term, its reference tree, and the comments
/// collected while skipping (empty unless keep mode was requested).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseResult {
    pub term: Term,
    pub refs: RefTree,
    pub comments: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    /// Every alternative failed; `line` is the furthest significant line
    /// reached by any terminal match attempt.
    Expected { line: usize, expected: Vec<String>, found: String },
    /// The grammar declared one value kind for a token class, the scanner
    /// sent the other.
    KindMismatch { class: String, declared: ValueKind, line: usize },
    /// A clause head variable was never bound by its body.
    Unbound { production: String },
    /// A list tail pattern was bound to a non-list value.
    ImproperTail { production: String },
}

impl ParseError {
    /// The reported source line, where the error carries one.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Expected { line, .. } | ParseError::KindMismatch { line, .. } => Some(*line),
            _ => None,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Expected { line, expected, found } => {
                write!(f, "line {line}: expected ")?;
                for (i, e) in expected.iter().enumerate() {
                    if i > 0 {
                        write!(f, " or ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ", found {found}")
            }
            ParseError::KindMismatch { class, declared, line } => {
                let (decl, got) = match declared {
                    ValueKind::String => ("string", "an integer"),
                    ValueKind::Integer => ("integer", "a string"),
                };
                write!(
                    f,
                    "line {line}: token class `{class}` is declared {decl}-valued but the scanner sent {got} token"
                )
            }
            ParseError::Unbound { production } => {
                write!(f, "unbound variable while constructing the result of `{production}`")
            }
            ParseError::ImproperTail { production } => {
                write!(f, "list tail bound to a non-list value in `{production}`")
            }
        }
    }
}

impl std::error::Error for ParseError {}

/// A cursor over a buffered token stream: position plus the count of
/// newline tokens already consumed (so the current line is `line + 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenCursor<'a> {
    pub tokens: &'a [Token],
    pub cursor: usize,
    pub line: usize,
}

impl<'a> TokenCursor<'a> {
    pub fn new(tokens: &'a [Token]) -> TokenCursor<'a> {
        TokenCursor { tokens, cursor: 0, line: 0 }
    }
}

/// Advances past contiguous newline and comment tokens, counting lines.
/// With `comments`, each comment is recorded as `(line, text)` where `line`
/// is the 1-based line it sits on. Stops at the first other token or at the
/// end of the stream.
pub fn skip_comm(state: &mut TokenCursor, mut comments: Option<&mut Vec<(usize, String)>>) {
    while let Some(token) = state.tokens.get(state.cursor) {
        match token {
            Token::Newline => {
                state.cursor += 1;
                state.line += 1;
            }
            Token::CommentText(text) => {
                if let Some(sink) = comments.as_deref_mut() {
                    sink.push((state.line + 1, text.clone()));
                }
                state.cursor += 1;
            }
            _ => break,
        }
    }
}

// === runtime values ===

type TermId = u32;
type RefId = u32;
type FrameId = u32;

const NIL_REF: RefId = 0;

#[derive(Debug)]
enum RTerm {
    Symbol(Box<str>),
    Int(i64),
    Compound(Box<str>, Vec<TermId>),
    Nil,
    Cons(TermId, TermId),
}

#[derive(Debug)]
enum RRef {
    Nil,
    Node(u32, Vec<RefId>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Val {
    term: TermId,
    refs: RefId,
    start_line: Option<u32>,
}

#[derive(Debug)]
struct Frame {
    base: u32,
    first_line: Option<u32>,
    entry_line: u32,
}

#[derive(Debug, Clone, Copy)]
struct Recv<'g> {
    frame: FrameId,
    /// `None` receives the entry production's result.
    out: Option<&'g Pat>,
}

#[derive(Debug, Clone)]
enum Goal<'g> {
    SkipComm,
    CheckEof,
    Call { prod: usize, recv: Recv<'g> },
    Instr { frame: FrameId, instr: &'g Instr },
    Build { frame: FrameId, prod: usize, head: &'g Pat, recv: Recv<'g> },
    AccumStep { prod: usize, acc: Val, recv: Recv<'g> },
    AccumFold {
        frame: FrameId,
        prod: usize,
        fold: &'g Pat,
        acc: Val,
        entry_cursor: usize,
        recv: Recv<'g>,
    },
}

struct GoalNode<'g> {
    goal: Goal<'g>,
    rest: GoalList<'g>,
}

struct GoalList<'g>(Option<Rc<GoalNode<'g>>>);

impl<'g> Clone for GoalList<'g> {
    fn clone(&self) -> Self {
        GoalList(self.0.clone())
    }
}

impl<'g> GoalList<'g> {
    fn empty() -> Self {
        GoalList(None)
    }

    fn push(&mut self, goal: Goal<'g>) {
        let rest = GoalList(self.0.take());
        self.0 = Some(Rc::new(GoalNode { goal, rest }));
    }

    fn pop(&mut self) -> Option<Goal<'g>> {
        let node = self.0.take()?;
        let goal = node.goal.clone();
        self.0 = node.rest.0.clone();
        Some(goal)
    }
}

// Long parses build long shared lists; dropping them must not recurse.
impl<'g> Drop for GoalList<'g> {
    fn drop(&mut self) {
        let mut cur = self.0.take();
        while let Some(rc) = cur {
            match Rc::try_unwrap(rc) {
                Ok(mut node) => cur = node.rest.0.take(),
                Err(_) => break,
            }
        }
    }
}

#[derive(Debug)]
enum AltSet<'g> {
    Clauses {
        prod: usize,
        clauses: &'g [CompiledClause],
        next: usize,
        recv: Recv<'g>,
        /// Line of the dispatching keyword when these alternatives came from
        /// a dispatch table (the arm's construct starts at that keyword).
        seed_line: Option<u32>,
    },
    AccumConts {
        prod: usize,
        conts: &'g [AccumCont],
        next: usize,
        acc: Val,
        recv: Recv<'g>,
    },
}

struct ChoicePoint<'g> {
    goals: GoalList<'g>,
    alts: AltSet<'g>,
    cursor: usize,
    line: usize,
    comments_len: usize,
    trail_len: usize,
    frames_len: usize,
    bindings_len: usize,
    terms_len: usize,
    refs_len: usize,
}

enum Trail {
    Bind(u32),
    FirstLine(FrameId),
}

enum Step {
    Continue,
    Fail,
}

struct Machine<'g> {
    g: &'g CompiledGrammar,
    tokens: &'g [Token],
    keep_comments: bool,

    cursor: usize,
    line: usize,
    comments: Vec<(usize, String)>,

    goals: GoalList<'g>,
    cps: Vec<ChoicePoint<'g>>,

    frames: Vec<Frame>,
    bindings: Vec<Option<Val>>,
    trail: Vec<Trail>,

    terms: Vec<RTerm>,
    refs: Vec<RRef>,

    result: Option<Val>,

    // furthest terminal-attempt position and what was attempted there
    hw: usize,
    expected: Vec<String>,
}

/// Runs the compiled grammar over the token stream. The root behavior is:
/// skip leading newlines/comments, parse the entry production, skip trailing
/// ones, require end of stream.
pub fn parse_tokens(
    grammar: &CompiledGrammar,
    tokens: &[Token],
    keep_comments: bool,
) -> Result<ParseResult, ParseError> {
    Machine::new(grammar, tokens, keep_comments).run()
}

impl<'g> Machine<'g> {
    fn new(g: &'g CompiledGrammar, tokens: &'g [Token], keep_comments: bool) -> Machine<'g> {
        let mut goals = GoalList::empty();
        goals.push(Goal::CheckEof);
        goals.push(Goal::SkipComm);
        goals.push(Goal::Call { prod: g.entry, recv: Recv { frame: 0, out: None } });
        goals.push(Goal::SkipComm);
        Machine {
            g,
            tokens,
            keep_comments,
            cursor: 0,
            line: 0,
            comments: Vec::new(),
            goals,
            cps: Vec::new(),
            frames: vec![Frame { base: 0, first_line: None, entry_line: 1 }],
            bindings: vec![None],
            trail: Vec::new(),
            terms: Vec::new(),
            refs: vec![RRef::Nil],
            result: None,
            hw: 0,
            expected: Vec::new(),
        }
    }

    fn run(&mut self) -> Result<ParseResult, ParseError> {
        loop {
            let goal = match self.goals.pop() {
                None => {
                    let val = self.result.expect("a result was delivered before success");
                    return Ok(self.extract(val));
                }
                Some(goal) => goal,
            };
            match self.execute(goal)? {
                Step::Continue => {}
                Step::Fail => self.backtrack()?,
            }
        }
    }

    // --- state helpers ---

    fn skip(&mut self) {
        let mut cur = TokenCursor { tokens: self.tokens, cursor: self.cursor, line: self.line };
        let comments = if self.keep_comments { Some(&mut self.comments) } else { None };
        skip_comm(&mut cur, comments);
        self.cursor = cur.cursor;
        self.line = cur.line;
    }

    fn new_frame(&mut self, nvars: usize, first_line: Option<u32>) -> FrameId {
        let base = self.bindings.len() as u32;
        self.bindings.extend(std::iter::repeat(None).take(nvars));
        self.frames.push(Frame { base, first_line, entry_line: self.line as u32 + 1 });
        (self.frames.len() - 1) as FrameId
    }

    fn slot(&self, frame: FrameId, var: VarId) -> usize {
        self.frames[frame as usize].base as usize + var as usize
    }

    fn bind(&mut self, frame: FrameId, var: VarId, val: Val) {
        let slot = self.slot(frame, var);
        debug_assert!(self.bindings[slot].is_none(), "rebinding a bound slot");
        self.bindings[slot] = Some(val);
        self.trail.push(Trail::Bind(slot as u32));
    }

    fn note_first_line(&mut self, frame: FrameId, line: Option<u32>) {
        let Some(line) = line else { return };
        let f = &mut self.frames[frame as usize];
        if f.first_line.is_none() {
            f.first_line = Some(line);
            self.trail.push(Trail::FirstLine(frame));
        }
    }

    fn record_attempt(&mut self, desc: String) {
        let pos = self.cursor;
        if pos > self.hw {
            self.hw = pos;
            self.expected.clear();
        }
        if pos == self.hw && !self.expected.contains(&desc) {
            self.expected.push(desc);
        }
    }

    fn production(&self, prod: usize) -> &'g Production {
        &self.g.prods[prod]
    }

    fn prod_name(&self, prod: usize) -> String {
        self.g.names[prod].clone()
    }

    // --- goal execution ---

    fn execute(&mut self, goal: Goal<'g>) -> Result<Step, ParseError> {
        match goal {
            Goal::SkipComm => {
                self.skip();
                Ok(Step::Continue)
            }
            Goal::CheckEof => {
                self.record_attempt("end of input".into());
                if self.cursor == self.tokens.len() {
                    Ok(Step::Continue)
                } else {
                    Ok(Step::Fail)
                }
            }
            Goal::Call { prod, recv } => self.call(prod, recv),
            Goal::Instr { frame, instr } => self.instr(frame, instr),
            Goal::Build { frame, prod, head, recv } => {
                let val = self.build(frame, prod, head)?;
                Ok(self.deliver(val, recv))
            }
            Goal::AccumStep { prod, acc, recv } => {
                let conts = match self.production(prod) {
                    Production::Accum(conts) => conts.as_slice(),
                    other => unreachable!("accum step on {other:?}"),
                };
                if conts.is_empty() {
                    return Ok(self.deliver(acc, recv));
                }
                self.push_choice(AltSet::AccumConts { prod, conts, next: 0, acc, recv });
                Ok(self.take_alternative())
            }
            Goal::AccumFold { frame, prod, fold, acc, entry_cursor, recv } => {
                // an iteration that consumed nothing would fold forever
                if self.cursor == entry_cursor {
                    return Ok(Step::Fail);
                }
                let (first_line, entry_line) = {
                    let f = &self.frames[frame as usize];
                    (f.first_line, f.entry_line)
                };
                let node_line = acc.start_line.or(first_line).unwrap_or(entry_line);
                let start_line = acc.start_line.or(first_line);
                let (term, refs) = self.instantiate(frame, prod, fold, node_line)?;
                let next = Val { term, refs, start_line };
                self.goals.push(Goal::AccumStep { prod, acc: next, recv });
                Ok(Step::Continue)
            }
        }
    }

    fn call(&mut self, prod: usize, recv: Recv<'g>) -> Result<Step, ParseError> {
        match self.production(prod) {
            Production::Clauses(clauses) => {
                self.push_choice(AltSet::Clauses {
                    prod,
                    clauses,
                    next: 0,
                    recv,
                    seed_line: None,
                });
                Ok(self.take_alternative())
            }
            Production::Dispatch(table) => {
                self.skip();
                for (key, _) in table {
                    self.record_attempt(format!("'{key}'"));
                }
                let key = match self.tokens.get(self.cursor) {
                    Some(Token::Keyword(k)) => k,
                    _ => return Ok(Step::Fail),
                };
                let Some((_, clauses)) = table.iter().find(|(k, _)| k == key) else {
                    return Ok(Step::Fail);
                };
                let kw_line = self.line as u32 + 1;
                self.cursor += 1;
                self.push_choice(AltSet::Clauses {
                    prod,
                    clauses,
                    next: 0,
                    recv,
                    seed_line: Some(kw_line),
                });
                Ok(self.take_alternative())
            }
            Production::Accum(_) => unreachable!("accumulator productions are invoked as loops"),
        }
    }

    fn instr(&mut self, frame: FrameId, instr: &'g Instr) -> Result<Step, ParseError> {
        match instr {
            Instr::Keyword(text) => {
                self.skip();
                self.record_attempt(format!("'{text}'"));
                match self.tokens.get(self.cursor) {
                    Some(Token::Keyword(k)) if k == text => {
                        self.cursor += 1;
                        let line = self.line as u32 + 1;
                        self.note_first_line(frame, Some(line));
                        Ok(Step::Continue)
                    }
                    _ => Ok(Step::Fail),
                }
            }
            Instr::SToken { class, kind, var } => {
                self.skip();
                self.record_attempt(class.clone());
                let line = self.line as u32 + 1;
                match (kind, self.tokens.get(self.cursor)) {
                    (ValueKind::String, Some(Token::SToken { class: c, value })) if c == class => {
                        let term = self.push_term(RTerm::Symbol(value.as_str().into()));
                        self.cursor += 1;
                        self.note_first_line(frame, Some(line));
                        self.bind(frame, *var, Val { term, refs: NIL_REF, start_line: Some(line) });
                        Ok(Step::Continue)
                    }
                    (ValueKind::Integer, Some(Token::IToken { class: c, value })) if c == class => {
                        let term = self.push_term(RTerm::Int(*value));
                        self.cursor += 1;
                        self.note_first_line(frame, Some(line));
                        self.bind(frame, *var, Val { term, refs: NIL_REF, start_line: Some(line) });
                        Ok(Step::Continue)
                    }
                    (ValueKind::Integer, Some(Token::SToken { class: c, .. })) if c == class => {
                        Err(ParseError::KindMismatch {
                            class: class.clone(),
                            declared: ValueKind::Integer,
                            line: self.line + 1,
                        })
                    }
                    (ValueKind::String, Some(Token::IToken { class: c, .. })) if c == class => {
                        Err(ParseError::KindMismatch {
                            class: class.clone(),
                            declared: ValueKind::String,
                            line: self.line + 1,
                        })
                    }
                    _ => Ok(Step::Fail),
                }
            }
            Instr::Call { prod, out } => {
                self.goals.push(Goal::Call {
                    prod: *prod,
                    recv: Recv { frame, out: Some(out) },
                });
                Ok(Step::Continue)
            }
            Instr::AccumCall { prod, seed, out } => {
                let (first_line, entry_line) = {
                    let f = &self.frames[frame as usize];
                    (f.first_line, f.entry_line)
                };
                let node_line = first_line.unwrap_or(entry_line);
                let start_line = first_line;
                let (term, refs) = self.instantiate(frame, *prod, seed, node_line)?;
                let acc = Val { term, refs, start_line };
                self.goals.push(Goal::AccumStep {
                    prod: *prod,
                    acc,
                    recv: Recv { frame, out: Some(out) },
                });
                Ok(Step::Continue)
            }
        }
    }

    // --- alternatives and backtracking ---

    fn push_choice(&mut self, alts: AltSet<'g>) {
        self.cps.push(ChoicePoint {
            goals: self.goals.clone(),
            alts,
            cursor: self.cursor,
            line: self.line,
            comments_len: self.comments.len(),
            trail_len: self.trail.len(),
            frames_len: self.frames.len(),
            bindings_len: self.bindings.len(),
            terms_len: self.terms.len(),
            refs_len: self.refs.len(),
        });
    }

    /// Sets up the next alternative of the top choice point (the state must
    /// already equal the choice point's snapshot). Pops the choice point
    /// once its last alternative is taken.
    fn take_alternative(&mut self) -> Step {
        enum Chosen<'g> {
            Clause {
                prod: usize,
                clause: &'g CompiledClause,
                recv: Recv<'g>,
                seed_line: Option<u32>,
                goals: GoalList<'g>,
                pop: bool,
            },
            Cont {
                prod: usize,
                cont: &'g AccumCont,
                acc: Val,
                recv: Recv<'g>,
                goals: GoalList<'g>,
            },
            Stop {
                acc: Val,
                recv: Recv<'g>,
                goals: GoalList<'g>,
            },
        }
        let chosen = {
            let cp = self.cps.last_mut().expect("take_alternative needs a choice point");
            match &mut cp.alts {
                AltSet::Clauses { prod, clauses, next, recv, seed_line } => {
                    debug_assert!(*next < clauses.len(), "exhausted choice points are popped");
                    let cls: &'g [CompiledClause] = clauses;
                    let clause = &cls[*next];
                    *next += 1;
                    Chosen::Clause {
                        prod: *prod,
                        clause,
                        recv: *recv,
                        seed_line: *seed_line,
                        goals: cp.goals.clone(),
                        pop: *next >= clauses.len(),
                    }
                }
                AltSet::AccumConts { prod, conts, next, acc, recv } => {
                    if *next >= conts.len() {
                        Chosen::Stop { acc: *acc, recv: *recv, goals: cp.goals.clone() }
                    } else {
                        let cs: &'g [AccumCont] = conts;
                        let cont = &cs[*next];
                        *next += 1;
                        Chosen::Cont {
                            prod: *prod,
                            cont,
                            acc: *acc,
                            recv: *recv,
                            goals: cp.goals.clone(),
                        }
                    }
                }
            }
        };
        match chosen {
            Chosen::Clause { prod, clause, recv, seed_line, goals, pop } => {
                if pop {
                    self.cps.pop();
                }
                self.goals = goals;
                let frame = self.new_frame(clause.nvars, seed_line);
                self.goals.push(Goal::Build { frame, prod, head: &clause.head, recv });
                for item in clause.items.iter().rev() {
                    self.goals.push(Goal::Instr { frame, instr: item });
                }
                Step::Continue
            }
            Chosen::Cont { prod, cont, acc, recv, goals } => {
                self.goals = goals;
                let frame = self.new_frame(cont.nvars, None);
                self.bind(frame, cont.hole, acc);
                self.goals.push(Goal::AccumFold {
                    frame,
                    prod,
                    fold: &cont.fold,
                    acc,
                    entry_cursor: self.cursor,
                    recv,
                });
                for item in cont.items.iter().rev() {
                    self.goals.push(Goal::Instr { frame, instr: item });
                }
                Step::Continue
            }
            Chosen::Stop { acc, recv, goals } => {
                // the epsilon alternative: return the accumulator
                self.cps.pop();
                self.goals = goals;
                self.deliver(acc, recv)
            }
        }
    }

    fn backtrack(&mut self) -> Result<(), ParseError> {
        loop {
            if self.cps.is_empty() {
                return Err(self.failure());
            }
            {
                let cp = self.cps.last().expect("nonempty");
                let (cursor, line) = (cp.cursor, cp.line);
                let comments_len = cp.comments_len;
                let trail_len = cp.trail_len;
                let frames_len = cp.frames_len;
                let bindings_len = cp.bindings_len;
                let terms_len = cp.terms_len;
                let refs_len = cp.refs_len;
                self.cursor = cursor;
                self.line = line;
                self.comments.truncate(comments_len);
                while self.trail.len() > trail_len {
                    match self.trail.pop().expect("trail entry") {
                        Trail::Bind(slot) => self.bindings[slot as usize] = None,
                        Trail::FirstLine(frame) => {
                            self.frames[frame as usize].first_line = None
                        }
                    }
                }
                self.frames.truncate(frames_len);
                self.bindings.truncate(bindings_len);
                self.terms.truncate(terms_len);
                self.refs.truncate(refs_len);
            }
            match self.take_alternative() {
                Step::Continue => return Ok(()),
                Step::Fail => continue,
            }
        }
    }

    fn failure(&self) -> ParseError {
        let mut expected = self.expected.clone();
        expected.sort();
        expected.dedup();
        let found = match self.tokens.get(self.hw) {
            None => "end of input".to_string(),
            Some(t) => describe_token(t),
        };
        // trailing newlines and comments do not push the reported line
        // past the last significant token
        let mut sig_end = self.hw;
        if self.hw >= self.tokens.len() {
            while sig_end > 0
                && matches!(
                    self.tokens[sig_end - 1],
                    Token::Newline | Token::CommentText(_)
                )
            {
                sig_end -= 1;
            }
        }
        let line = 1 + self.tokens[..sig_end.min(self.tokens.len())]
            .iter()
            .filter(|t| matches!(t, Token::Newline))
            .count();
        ParseError::Expected { line, expected, found }
    }

    // --- values ---

    fn push_term(&mut self, t: RTerm) -> TermId {
        self.terms.push(t);
        (self.terms.len() - 1) as TermId
    }

    fn push_ref(&mut self, r: RRef) -> RefId {
        self.refs.push(r);
        (self.refs.len() - 1) as RefId
    }

    fn build(&mut self, frame: FrameId, prod: usize, head: &'g Pat) -> Result<Val, ParseError> {
        let (first_line, entry_line) = {
            let f = &self.frames[frame as usize];
            (f.first_line, f.entry_line)
        };
        if let Pat::Var(v) = head {
            // pass-through clause: forward the inner value; the construct
            // still starts at this clause's first consumed terminal
            let slot = self.slot(frame, *v);
            let val = self.bindings[slot]
                .ok_or_else(|| ParseError::Unbound { production: self.prod_name(prod) })?;
            return Ok(Val { term: val.term, refs: val.refs, start_line: first_line });
        }
        let node_line = first_line.unwrap_or(entry_line);
        let (term, refs) = self.instantiate(frame, prod, head, node_line)?;
        Ok(Val { term, refs, start_line: first_line })
    }

    /// Instantiates a construction pattern under the frame's bindings.
    /// Every structural node gets a reference node at `node_line`;
    /// variable positions contribute the refs of their bound values.
    fn instantiate(
        &mut self,
        frame: FrameId,
        prod: usize,
        pat: &Pat,
        node_line: u32,
    ) -> Result<(TermId, RefId), ParseError> {
        match pat {
            Pat::Var(v) => {
                let slot = self.slot(frame, *v);
                let val = self.bindings[slot]
                    .ok_or_else(|| ParseError::Unbound { production: self.prod_name(prod) })?;
                Ok((val.term, val.refs))
            }
            Pat::Symbol(s) => Ok((self.push_term(RTerm::Symbol(s.as_str().into())), NIL_REF)),
            Pat::Int(n) => Ok((self.push_term(RTerm::Int(*n)), NIL_REF)),
            Pat::Compound(functor, args) => {
                let mut terms = Vec::with_capacity(args.len());
                let mut refs = Vec::with_capacity(args.len());
                for arg in args {
                    let (t, r) = self.instantiate(frame, prod, arg, node_line)?;
                    terms.push(t);
                    refs.push(r);
                }
                let term = self.push_term(RTerm::Compound(functor.as_str().into(), terms));
                let node = self.push_ref(RRef::Node(node_line, refs));
                Ok((term, node))
            }
            Pat::List(elems, tail) => {
                let (mut term, mut refs) = match tail {
                    None => (self.push_term(RTerm::Nil), NIL_REF),
                    Some(v) => {
                        let slot = self.slot(frame, *v);
                        let val = self.bindings[slot].ok_or_else(|| ParseError::Unbound {
                            production: self.prod_name(prod),
                        })?;
                        if !matches!(self.terms[val.term as usize], RTerm::Nil | RTerm::Cons(_, _))
                        {
                            return Err(ParseError::ImproperTail {
                                production: self.prod_name(prod),
                            });
                        }
                        (val.term, val.refs)
                    }
                };
                let mut built = Vec::with_capacity(elems.len());
                for elem in elems {
                    built.push(self.instantiate(frame, prod, elem, node_line)?);
                }
                for (elem_term, elem_ref) in built.into_iter().rev() {
                    term = self.push_term(RTerm::Cons(elem_term, term));
                    refs = self.push_ref(RRef::Node(node_line, vec![elem_ref, refs]));
                }
                Ok((term, refs))
            }
        }
    }

    /// Matches a delivered value against the receiver's out pattern, binding
    /// pattern variables (and destructuring the value's refs in parallel).
    fn deliver(&mut self, val: Val, recv: Recv<'g>) -> Step {
        self.note_first_line(recv.frame, val.start_line);
        match recv.out {
            None => {
                self.result = Some(val);
                Step::Continue
            }
            Some(pat) => {
                if self.match_pattern(recv.frame, pat, val) {
                    Step::Continue
                } else {
                    Step::Fail
                }
            }
        }
    }

    fn match_pattern(&mut self, frame: FrameId, pat: &Pat, val: Val) -> bool {
        match pat {
            Pat::Var(v) => {
                let slot = self.slot(frame, *v);
                match self.bindings[slot] {
                    None => {
                        self.bindings[slot] = Some(val);
                        self.trail.push(Trail::Bind(slot as u32));
                        true
                    }
                    Some(prev) => self.terms_equal(prev.term, val.term),
                }
            }
            Pat::Symbol(s) => {
                matches!(&self.terms[val.term as usize], RTerm::Symbol(name) if name.as_ref() == s)
            }
            Pat::Int(n) => matches!(&self.terms[val.term as usize], RTerm::Int(v) if v == n),
            Pat::Compound(functor, args) => {
                let (functor_ok, children) = match &self.terms[val.term as usize] {
                    RTerm::Compound(f, children) if f.as_ref() == functor.as_str() => {
                        (children.len() == args.len(), children.clone())
                    }
                    _ => return false,
                };
                if !functor_ok {
                    return false;
                }
                let child_refs: Vec<RefId> = match &self.refs[val.refs as usize] {
                    RRef::Node(_, refs) if refs.len() == children.len() => refs.clone(),
                    _ => vec![NIL_REF; children.len()],
                };
                for ((arg, child), child_ref) in args.iter().zip(children).zip(child_refs) {
                    let start = match &self.refs[child_ref as usize] {
                        RRef::Node(line, _) => Some(*line),
                        RRef::Nil => None,
                    };
                    let child_val = Val { term: child, refs: child_ref, start_line: start };
                    if !self.match_pattern(frame, arg, child_val) {
                        return false;
                    }
                }
                true
            }
            Pat::List(elems, tail) => {
                let mut cur = val;
                for elem in elems {
                    let (head, rest) = match self.terms[cur.term as usize] {
                        RTerm::Cons(h, t) => (h, t),
                        _ => return false,
                    };
                    let (head_ref, rest_ref) = match &self.refs[cur.refs as usize] {
                        RRef::Node(_, children) if children.len() == 2 => {
                            (children[0], children[1])
                        }
                        _ => (NIL_REF, NIL_REF),
                    };
                    let start = match &self.refs[head_ref as usize] {
                        RRef::Node(line, _) => Some(*line),
                        RRef::Nil => None,
                    };
                    if !self.match_pattern(frame, elem, Val { term: head, refs: head_ref, start_line: start }) {
                        return false;
                    }
                    let rest_start = match &self.refs[rest_ref as usize] {
                        RRef::Node(line, _) => Some(*line),
                        RRef::Nil => None,
                    };
                    cur = Val { term: rest, refs: rest_ref, start_line: rest_start };
                }
                match tail {
                    Some(v) => {
                        if !matches!(self.terms[cur.term as usize], RTerm::Nil | RTerm::Cons(_, _))
                        {
                            return false;
                        }
                        self.match_pattern(frame, &Pat::Var(*v), cur)
                    }
                    None => matches!(self.terms[cur.term as usize], RTerm::Nil),
                }
            }
        }
    }

    fn terms_equal(&self, a: TermId, b: TermId) -> bool {
        let mut work = vec![(a, b)];
        while let Some((x, y)) = work.pop() {
            if x == y {
                continue;
            }
            match (&self.terms[x as usize], &self.terms[y as usize]) {
                (RTerm::Symbol(p), RTerm::Symbol(q)) if p == q => {}
                (RTerm::Int(p), RTerm::Int(q)) if p == q => {}
                (RTerm::Nil, RTerm::Nil) => {}
                (RTerm::Cons(h1, t1), RTerm::Cons(h2, t2)) => {
                    work.push((*h1, *h2));
                    work.push((*t1, *t2));
                }
                (RTerm::Compound(f, xs), RTerm::Compound(g, ys))
                    if f == g && xs.len() == ys.len() =>
                {
                    work.extend(xs.iter().copied().zip(ys.iter().copied()));
                }
                _ => return false,
            }
        }
        true
    }

    // --- extraction ---

    fn extract(&self, val: Val) -> ParseResult {
        ParseResult {
            term: self.term_of(val.term),
            refs: self.ref_of(val.refs),
            comments: self.comments.clone(),
        }
    }

    fn term_of(&self, root: TermId) -> Term {
        enum Walk {
            Enter(TermId),
            ExitCompound(Box<str>, usize),
            ExitList(usize),
        }
        let mut stack = vec![Walk::Enter(root)];
        let mut values: Vec<Term> = Vec::new();
        while let Some(step) = stack.pop() {
            match step {
                Walk::Enter(id) => match &self.terms[id as usize] {
                    RTerm::Symbol(s) => values.push(Term::Symbol(s.to_string())),
                    RTerm::Int(n) => values.push(Term::Int(*n)),
                    RTerm::Compound(f, args) => {
                        stack.push(Walk::ExitCompound(f.clone(), args.len()));
                        for &arg in args.iter().rev() {
                            stack.push(Walk::Enter(arg));
                        }
                    }
                    RTerm::Nil => values.push(Term::List(Vec::new())),
                    RTerm::Cons(_, _) => {
                        // walk the spine; improper tails cannot be built
                        let mut heads = Vec::new();
                        let mut cur = id;
                        loop {
                            match &self.terms[cur as usize] {
                                RTerm::Cons(h, t) => {
                                    heads.push(*h);
                                    cur = *t;
                                }
                                RTerm::Nil => break,
                                other => unreachable!("improper list tail {other:?}"),
                            }
                        }
                        stack.push(Walk::ExitList(heads.len()));
                        for &h in heads.iter().rev() {
                            stack.push(Walk::Enter(h));
                        }
                    }
                },
                Walk::ExitCompound(f, n) => {
                    let args = values.split_off(values.len() - n);
                    values.push(Term::Compound(f.to_string(), args));
                }
                Walk::ExitList(n) => {
                    let elems = values.split_off(values.len() - n);
                    values.push(Term::List(elems));
                }
            }
        }
        debug_assert_eq!(values.len(), 1);
        values.pop().expect("one root value")
    }

    fn ref_of(&self, root: RefId) -> RefTree {
        enum Walk {
            Enter(RefId),
            Exit(u32, usize),
        }
        let mut stack = vec![Walk::Enter(root)];
        let mut values: Vec<RefTree> = Vec::new();
        while let Some(step) = stack.pop() {
            match step {
                Walk::Enter(id) => match &self.refs[id as usize] {
                    RRef::Nil => values.push(RefTree::Nil),
                    RRef::Node(line, children) => {
                        stack.push(Walk::Exit(*line, children.len()));
                        for &c in children.iter().rev() {
                            stack.push(Walk::Enter(c));
                        }
                    }
                },
                Walk::Exit(line, n) => {
                    let children = values.split_off(values.len() - n);
                    values.push(RefTree::Node(line as usize, children));
                }
            }
        }
        debug_assert_eq!(values.len(), 1);
        values.pop().expect("one root ref")
    }
}

fn describe_token(t: &Token) -> String {
    match t {
        Token::Keyword(k) => format!("'{k}'"),
        Token::SToken { class, value } => format!("{class} {value:?}"),
        Token::IToken { class, value } => format!("{class} {value}"),
        Token::Newline => "newline".into(),
        Token::CommentText(_) => "comment".into(),
        Token::LexError(text) => format!("unrecognized text {text:?}"),
    }
}
