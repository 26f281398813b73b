//! Textual listing of (transformed) clauses in arrow style, for inspection
//! and golden comparison.

use super::{BodyItem, Clause, ClauseOrigin, Grammar, TermPattern};
use crate::term::quote_symbol;

fn always_quoted(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('\'');
    for c in text.chars() {
        if c == '\'' {
            out.push_str("''");
        } else {
            out.push(c);
        }
    }
    out.push('\'');
    out
}

fn push_pattern(out: &mut String, pat: &TermPattern) {
    match pat {
        TermPattern::Var(v) => out.push_str(v),
        TermPattern::Symbol(s) => out.push_str(&quote_symbol(s)),
        TermPattern::Int(n) => out.push_str(&n.to_string()),
        TermPattern::Compound(f, args) => {
            out.push_str(&quote_symbol(f));
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                push_pattern(out, a);
            }
            out.push(')');
        }
        TermPattern::List(elems, tail) => {
            out.push('[');
            for (i, e) in elems.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                push_pattern(out, e);
            }
            if let Some(t) = tail {
                out.push('|');
                out.push_str(t);
            }
            out.push(']');
        }
    }
}

fn push_head(out: &mut String, clause: &Clause) {
    out.push_str(&clause.head);
    out.push('(');
    for (i, arg) in clause.args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        // dispatch keys are keyword texts and always print quoted
        if i == 0 && clause.origin == ClauseOrigin::DispatchArm {
            if let TermPattern::Symbol(key) = arg {
                out.push_str(&always_quoted(key));
                continue;
            }
        }
        push_pattern(out, arg);
    }
    out.push(')');
}

fn push_item(out: &mut String, item: &BodyItem) {
    match item {
        BodyItem::KeywordLit(k) => {
            out.push('[');
            out.push_str(&always_quoted(k));
            out.push(']');
        }
        BodyItem::KeywordVar(v) => {
            out.push('[');
            out.push_str(v);
            out.push(']');
        }
        BodyItem::SToken { class, kind, var } => {
            out.push_str("stoken(");
            out.push_str(&always_quoted(class));
            out.push(',');
            out.push_str(match kind {
                super::ValueKind::String => "string(",
                super::ValueKind::Integer => "integer(",
            });
            out.push_str(var);
            out.push_str("))");
        }
        BodyItem::Call { nonterminal, args } => {
            out.push_str(nonterminal);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                push_pattern(out, a);
            }
            out.push(')');
        }
    }
}

/// Renders each clause as `head -> item, item.` (an empty body prints as
/// `head -> .`), one clause per line. Deterministic; transforming an already
/// transformed grammar leaves the listing unchanged.
pub fn emit_dcg(grammar: &Grammar) -> String {
    let mut out = String::new();
    for clause in &grammar.clauses {
        push_head(&mut out, clause);
        out.push_str(" -> ");
        for (i, item) in clause.body.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            push_item(&mut out, item);
        }
        out.push_str(".\n");
    }
    out
}
