//! The abstract term universe, the line-reference tree universe, and their
//! canonical textual forms.
//!
//! Every other part of the toolkit builds on these two value types: a parse
//! produces a [`Term`] together with a [`RefTree`] of identical shape whose
//! nodes carry 1-based source line numbers.

use std::fmt;

/// An abstract syntax value produced by a parse.
///
/// A zero-arity constructor is represented as [`Term::Symbol`]; compounds
/// always have at least one argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Symbol(String),
    Int(i64),
    Str(String),
    Compound(String, Vec<Term>),
    List(Vec<Term>),
}

/// The line-number tree paired with a parsed term.
///
/// Atomic term positions (token-bound or constant arguments) map to `Nil`;
/// every constructed node maps to a `Node` carrying the 1-based line of the
/// first token of the construct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefTree {
    Node(usize, Vec<RefTree>),
    Nil,
}

impl Term {
    /// Builds a compound term. Arity must be >= 1.
    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Term {
        let functor = functor.into();
        assert!(!functor.is_empty(), "compound functor must be non-empty");
        assert!(!args.is_empty(), "compound arity must be >= 1");
        Term::Compound(functor, args)
    }

    pub fn symbol(name: impl Into<String>) -> Term {
        Term::Symbol(name.into())
    }
}

// Parse results can nest hundreds of thousands of levels deep (a long chain
// of left-associated operators), so anything that walks a Term or RefTree
// must not recurse on the host stack. Drop included.
impl Drop for Term {
    fn drop(&mut self) {
        let mut stack: Vec<Term> = Vec::new();
        match self {
            Term::Compound(_, args) => stack.append(args),
            Term::List(elems) => stack.append(elems),
            _ => return,
        }
        while let Some(mut t) = stack.pop() {
            match &mut t {
                Term::Compound(_, args) => stack.append(args),
                Term::List(elems) => stack.append(elems),
                _ => {}
            }
        }
    }
}

impl Drop for RefTree {
    fn drop(&mut self) {
        let mut stack: Vec<RefTree> = Vec::new();
        if let RefTree::Node(_, children) = self {
            stack.append(children);
        }
        while let Some(mut r) = stack.pop() {
            if let RefTree::Node(_, children) = &mut r {
                stack.append(children);
            }
        }
    }
}

/// True iff `name` prints without quotes: non-empty, starts with a lowercase
/// ASCII letter, and continues with lowercase letters or digits only.
fn symbol_is_plain(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
}

/// Renders a symbol with the canonical quoting rule (used by the grammar
/// listing as well as the term printer).
pub(crate) fn quote_symbol(name: &str) -> String {
    let mut out = String::new();
    push_symbol(&mut out, name);
    out
}

fn push_symbol(out: &mut String, name: &str) {
    if symbol_is_plain(name) {
        out.push_str(name);
    } else {
        out.push('\'');
        for c in name.chars() {
            if c == '\'' {
                out.push_str("''");
            } else {
                out.push(c);
            }
        }
        out.push('\'');
    }
}

fn push_str_literal(out: &mut String, value: &str) {
    out.push('"');
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            _ => out.push(c),
        }
    }
    out.push('"');
}

enum PrintJob<'a> {
    Term(&'a Term),
    Ref(&'a RefTree),
    Text(&'static str),
}

/// Canonical text of a term: `plus(id('A'),id('B'))`, `[1,2]`, `"a\"b"`.
///
/// Injective on the term universe; the output format of the `parse` command.
pub fn print_term(term: &Term) -> String {
    let mut out = String::new();
    let mut stack = vec![PrintJob::Term(term)];
    while let Some(job) = stack.pop() {
        match job {
            PrintJob::Text(s) => out.push_str(s),
            PrintJob::Term(t) => match t {
                Term::Symbol(name) => push_symbol(&mut out, name),
                Term::Int(n) => out.push_str(&n.to_string()),
                Term::Str(s) => push_str_literal(&mut out, s),
                Term::Compound(functor, args) => {
                    push_symbol(&mut out, functor);
                    out.push('(');
                    stack.push(PrintJob::Text(")"));
                    for (i, arg) in args.iter().enumerate().rev() {
                        stack.push(PrintJob::Term(arg));
                        if i > 0 {
                            stack.push(PrintJob::Text(","));
                        }
                    }
                }
                Term::List(elems) => {
                    out.push('[');
                    stack.push(PrintJob::Text("]"));
                    for (i, e) in elems.iter().enumerate().rev() {
                        stack.push(PrintJob::Term(e));
                        if i > 0 {
                            stack.push(PrintJob::Text(","));
                        }
                    }
                }
            },
            PrintJob::Ref(_) => unreachable!(),
        }
    }
    out
}

/// Canonical text of a reference tree: `node(12,node(12,nil),node(13,nil))`.
pub fn print_ref(refs: &RefTree) -> String {
    let mut out = String::new();
    let mut stack = vec![PrintJob::Ref(refs)];
    while let Some(job) = stack.pop() {
        match job {
            PrintJob::Text(s) => out.push_str(s),
            PrintJob::Ref(r) => match r {
                RefTree::Nil => out.push_str("nil"),
                RefTree::Node(line, children) => {
                    out.push_str("node(");
                    out.push_str(&line.to_string());
                    stack.push(PrintJob::Text(")"));
                    for child in children.iter().rev() {
                        stack.push(PrintJob::Ref(child));
                        stack.push(PrintJob::Text(","));
                    }
                }
            },
            PrintJob::Term(_) => unreachable!(),
        }
    }
    out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl fmt::Display for RefTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_ref(self))
    }
}

enum ShapeItem<'a> {
    Pair(&'a Term, &'a RefTree),
    ListTail(&'a [Term], &'a RefTree),
}

/// True iff `refs` has exactly the shape the parser would build for `term`:
/// compounds pair with nodes of equal arity, atoms pair with `nil`, and a
/// list pairs with a right-nested chain of binary nodes ending in `nil`
/// (one node per cons cell).
pub fn shape_matches(term: &Term, refs: &RefTree) -> bool {
    let mut work = vec![ShapeItem::Pair(term, refs)];
    while let Some(item) = work.pop() {
        match item {
            ShapeItem::Pair(t, r) => match (t, r) {
                (Term::Symbol(_) | Term::Int(_) | Term::Str(_), RefTree::Nil) => {}
                (Term::Compound(_, args), RefTree::Node(_, children))
                    if args.len() == children.len() =>
                {
                    for (a, c) in args.iter().zip(children) {
                        work.push(ShapeItem::Pair(a, c));
                    }
                }
                (Term::List(elems), r) => work.push(ShapeItem::ListTail(elems, r)),
                _ => return false,
            },
            ShapeItem::ListTail(elems, r) => match (elems.split_first(), r) {
                (None, RefTree::Nil) => {}
                (Some((head, rest)), RefTree::Node(_, children)) if children.len() == 2 => {
                    work.push(ShapeItem::Pair(head, &children[0]));
                    work.push(ShapeItem::ListTail(rest, &children[1]));
                }
                _ => return false,
            },
        }
    }
    true
}
