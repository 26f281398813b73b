//! Independent reference semantics for clause grammars, used to check the
//! transformed parser. Two deliberately different algorithms over the
//! untransformed surface clauses:
//!
//! * an ordered depth-first enumerator (the declarative reading of ordered
//!   alternatives), sound for grammars without left recursion;
//! * a bottom-up chart fixpoint that derives every (span, term) item, which
//!   handles left recursion and yields the full solution set.
//!
//! Both work by substitution over owned terms; nothing here touches the
//! production compiler or the parser machine.

use clf_core::grammar::{BodyItem, Clause, Grammar, TermPattern, ValueKind};
use clf_core::term::{print_term, Term};
use clf_core::wire::Token;
use std::collections::BTreeMap;

type Env = BTreeMap<String, Term>;

fn instantiate(pat: &TermPattern, env: &Env) -> Option<Term> {
    match pat {
        TermPattern::Var(v) => env.get(v).cloned(),
        TermPattern::Symbol(s) => Some(Term::Symbol(s.clone())),
        TermPattern::Int(n) => Some(Term::Int(*n)),
        TermPattern::Compound(f, args) => {
            let args: Option<Vec<Term>> = args.iter().map(|a| instantiate(a, env)).collect();
            Some(Term::Compound(f.clone(), args?))
        }
        TermPattern::List(elems, tail) => {
            let mut out: Vec<Term> = Vec::new();
            for e in elems {
                out.push(instantiate(e, env)?);
            }
            if let Some(t) = tail {
                match env.get(t)? {
                    Term::List(rest) => out.extend(rest.iter().cloned()),
                    _ => return None,
                }
            }
            Some(Term::List(out))
        }
    }
}

fn match_pat(pat: &TermPattern, term: &Term, env: &mut Env) -> bool {
    match (pat, term) {
        (TermPattern::Var(v), _) => match env.get(v) {
            Some(bound) => bound == term,
            None => {
                env.insert(v.clone(), term.clone());
                true
            }
        },
        (TermPattern::Symbol(s), Term::Symbol(t)) => s == t,
        (TermPattern::Int(n), Term::Int(m)) => n == m,
        (TermPattern::Compound(f, args), Term::Compound(g, terms)) => {
            f == g
                && args.len() == terms.len()
                && args.iter().zip(terms).all(|(a, t)| match_pat(a, t, env))
        }
        (TermPattern::List(elems, tail), Term::List(items)) => {
            if items.len() < elems.len() || (tail.is_none() && items.len() != elems.len()) {
                return false;
            }
            if !elems.iter().zip(items).all(|(e, t)| match_pat(e, t, env)) {
                return false;
            }
            match tail {
                None => true,
                Some(v) => {
                    let rest = Term::List(items[elems.len()..].to_vec());
                    match env.get(v) {
                        Some(bound) => *bound == rest,
                        None => {
                            env.insert(v.clone(), rest);
                            true
                        }
                    }
                }
            }
        }
        _ => false,
    }
}

fn token_matches(item: &BodyItem, token: &Token, env: &mut Env) -> bool {
    match (item, token) {
        (BodyItem::KeywordLit(k), Token::Keyword(t)) => k == t,
        (BodyItem::KeywordVar(v), Token::Keyword(t)) => {
            env.insert(v.clone(), Term::Symbol(t.clone()));
            true
        }
        (BodyItem::SToken { class, kind: ValueKind::String, var }, Token::SToken { class: c, value })
            if class == c =>
        {
            env.insert(var.clone(), Term::Symbol(value.clone()));
            true
        }
        (BodyItem::SToken { class, kind: ValueKind::Integer, var }, Token::IToken { class: c, value })
            if class == c =>
        {
            env.insert(var.clone(), Term::Int(*value));
            true
        }
        _ => false,
    }
}

// === ordered depth-first enumeration ===

pub struct Dfs<'a> {
    grammar: &'a Grammar,
    tokens: &'a [Token],
    depth_limit: usize,
    budget: usize,
}

impl<'a> Dfs<'a> {
    pub fn new(grammar: &'a Grammar, tokens: &'a [Token]) -> Dfs<'a> {
        let nts = grammar.nonterminals().len();
        Dfs {
            grammar,
            tokens,
            // between two token consumptions a derivation without left
            // recursion visits each nonterminal at most once
            depth_limit: (tokens.len() + 1) * (nts + 1) + 1,
            budget: 2_000_000,
        }
    }

    /// All solutions of `nt` starting at `pos`, in the order ordered-clause
    /// backtracking yields them.
    fn solutions(&mut self, nt: &str, pos: usize, depth: usize) -> Vec<(usize, Term)> {
        if depth > self.depth_limit || self.budget == 0 {
            return Vec::new();
        }
        self.budget = self.budget.saturating_sub(1);
        let mut out = Vec::new();
        let clauses: Vec<Clause> =
            self.grammar.clauses_of(nt).into_iter().cloned().collect();
        for clause in &clauses {
            let mut states: Vec<(usize, Env)> = vec![(pos, Env::new())];
            for item in &clause.body {
                let mut next = Vec::new();
                for (at, env) in states {
                    match item {
                        BodyItem::KeywordLit(_)
                        | BodyItem::KeywordVar(_)
                        | BodyItem::SToken { .. } => {
                            if let Some(token) = self.tokens.get(at) {
                                let mut env = env.clone();
                                if token_matches(item, token, &mut env) {
                                    next.push((at + 1, env));
                                }
                            }
                        }
                        BodyItem::Call { nonterminal, args } => {
                            for (end, term) in self.solutions(nonterminal, at, depth + 1) {
                                let mut env = env.clone();
                                if match_pat(&args[0], &term, &mut env) {
                                    next.push((end, env));
                                }
                            }
                        }
                    }
                }
                states = next;
                if states.is_empty() {
                    break;
                }
            }
            for (end, env) in states {
                if let Some(term) = instantiate(&clause.args[0], &env) {
                    out.push((end, term));
                }
            }
        }
        out
    }

    /// First full-span solution under ordered-alternative semantics.
    pub fn first(&mut self, entry: &str) -> Option<Term> {
        let len = self.tokens.len();
        self.solutions(entry, 0, 0)
            .into_iter()
            .find(|(end, _)| *end == len)
            .map(|(_, term)| term)
    }
}

// === bottom-up chart fixpoint ===

/// All full-span solutions of `entry`, derived by iterating every clause
/// over every start position until no new (span, term) item appears.
/// Handles left recursion; panics if the item set explodes (the corpus
/// grammars are small and unambiguous).
pub fn chart_solutions(grammar: &Grammar, entry: &str, tokens: &[Token]) -> Vec<Term> {
    type Key = (String, usize);
    let mut items: BTreeMap<Key, Vec<(usize, Term)>> = BTreeMap::new();
    let mut total = 0usize;
    loop {
        let mut added = false;
        for clause in &grammar.clauses {
            for start in 0..=tokens.len() {
                let mut states: Vec<(usize, Env)> = vec![(start, Env::new())];
                for item in &clause.body {
                    let mut next = Vec::new();
                    for (at, env) in &states {
                        match item {
                            BodyItem::KeywordLit(_)
                            | BodyItem::KeywordVar(_)
                            | BodyItem::SToken { .. } => {
                                if let Some(token) = tokens.get(*at) {
                                    let mut env = env.clone();
                                    if token_matches(item, token, &mut env) {
                                        next.push((*at + 1, env));
                                    }
                                }
                            }
                            BodyItem::Call { nonterminal, args } => {
                                let key = (nonterminal.clone(), *at);
                                for (end, term) in
                                    items.get(&key).map(Vec::as_slice).unwrap_or(&[])
                                {
                                    let mut env = env.clone();
                                    if match_pat(&args[0], term, &mut env) {
                                        next.push((*end, env));
                                    }
                                }
                            }
                        }
                    }
                    states = next;
                    if states.is_empty() {
                        break;
                    }
                }
                for (end, env) in states {
                    if let Some(term) = instantiate(&clause.args[0], &env) {
                        let entry_items = items.entry((clause.head.clone(), start)).or_default();
                        if !entry_items.iter().any(|(e, t)| *e == end && *t == term) {
                            entry_items.push((end, term));
                            total += 1;
                            added = true;
                        }
                    }
                }
            }
        }
        assert!(total < 100_000, "chart oracle item explosion; simplify the corpus grammar");
        if !added {
            break;
        }
    }
    let mut out: Vec<Term> = items
        .get(&(entry.to_string(), 0))
        .map(Vec::as_slice)
        .unwrap_or(&[])
        .iter()
        .filter(|(end, _)| *end == tokens.len())
        .map(|(_, term)| term.clone())
        .collect();
    out.sort_by_key(|t| print_term(t));
    out.dedup();
    out
}

/// True when some clause of some nonterminal starts by calling that same
/// nonterminal (the case the depth-first oracle cannot handle).
pub fn is_left_recursive(grammar: &Grammar) -> bool {
    grammar.clauses.iter().any(|c| {
        matches!(c.body.first(), Some(BodyItem::Call { nonterminal, .. }) if *nonterminal == c.head)
    })
}

// === random token sequences over a grammar's terminal alphabet ===

/// The terminal alphabet of a grammar: every keyword text and every token
/// class with its kind.
pub fn alphabet(grammar: &Grammar) -> (Vec<String>, Vec<(String, ValueKind)>) {
    let mut keywords: Vec<String> = Vec::new();
    let mut classes: Vec<(String, ValueKind)> = Vec::new();
    for clause in &grammar.clauses {
        for item in &clause.body {
            match item {
                BodyItem::KeywordLit(k) => {
                    if !keywords.contains(k) {
                        keywords.push(k.clone());
                    }
                }
                BodyItem::SToken { class, kind, .. } => {
                    if !classes.iter().any(|(c, _)| c == class) {
                        classes.push((class.clone(), *kind));
                    }
                }
                _ => {}
            }
        }
    }
    (keywords, classes)
}

pub struct TokenGen {
    pub keywords: Vec<String>,
    pub classes: Vec<(String, ValueKind)>,
}

impl TokenGen {
    pub fn for_grammar(grammar: &Grammar) -> TokenGen {
        let (keywords, classes) = alphabet(grammar);
        TokenGen { keywords, classes }
    }

    pub fn random_token(&self, rng: &mut impl rand::Rng) -> Token {
        let n_kw = self.keywords.len();
        let n_cls = self.classes.len();
        let pick = rng.gen_range(0..n_kw + n_cls);
        if pick < n_kw {
            Token::Keyword(self.keywords[pick].clone())
        } else {
            let (class, kind) = &self.classes[pick - n_kw];
            match kind {
                ValueKind::String => Token::SToken {
                    class: class.clone(),
                    value: ["A", "B", "X1"][rng.gen_range(0..3)].to_string(),
                },
                ValueKind::Integer => Token::IToken {
                    class: class.clone(),
                    value: [0, 1, 42][rng.gen_range(0..3)],
                },
            }
        }
    }

    /// A random sequence drawn from the alphabet, length <= `max_len`.
    pub fn random_sequence(&self, rng: &mut impl rand::Rng, max_len: usize) -> Vec<Token> {
        let len = rng.gen_range(0..=max_len);
        (0..len).map(|_| self.random_token(rng)).collect()
    }

    /// A sequence derived from the grammar itself (hence likely accepted),
    /// optionally perturbed by the caller.
    pub fn derived_sequence(
        &self,
        grammar: &Grammar,
        entry: &str,
        rng: &mut impl rand::Rng,
        budget: usize,
    ) -> Option<Vec<Token>> {
        let mut out = Vec::new();
        if self.expand(grammar, entry, rng, budget, &mut out) {
            Some(out)
        } else {
            None
        }
    }

    fn expand(
        &self,
        grammar: &Grammar,
        nt: &str,
        rng: &mut impl rand::Rng,
        budget: usize,
        out: &mut Vec<Token>,
    ) -> bool {
        if budget == 0 {
            return false;
        }
        let clauses = grammar.clauses_of(nt);
        let mut order: Vec<usize> = (0..clauses.len()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        'clauses: for idx in order {
            let clause = clauses[idx];
            let mark = out.len();
            for item in &clause.body {
                let ok = match item {
                    BodyItem::KeywordLit(k) => {
                        out.push(Token::Keyword(k.clone()));
                        true
                    }
                    BodyItem::KeywordVar(_) => false,
                    BodyItem::SToken { class, kind, .. } => {
                        let token = match kind {
                            ValueKind::String => Token::SToken {
                                class: class.clone(),
                                value: ["A", "B", "X1"][rng.gen_range(0..3)].to_string(),
                            },
                            ValueKind::Integer => Token::IToken {
                                class: class.clone(),
                                value: [0, 1, 42][rng.gen_range(0..3)],
                            },
                        };
                        out.push(token);
                        true
                    }
                    BodyItem::Call { nonterminal, .. } => {
                        self.expand(grammar, nonterminal, rng, budget - 1, out)
                    }
                };
                if !ok {
                    out.truncate(mark);
                    continue 'clauses;
                }
            }
            return true;
        }
        false
    }
}
