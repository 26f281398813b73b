//! Compilation of transformed clauses into the executable production table
//! the parser runtime interprets.

use super::{
    eliminate_left_recursion, left_factor, BodyItem, Clause, ClauseOrigin, CsError, CsErrorKind,
    Grammar, TermPattern, ValueKind,
};
use std::collections::HashMap;

pub type VarId = u16;
pub(crate) type ProdId = usize;

/// A term pattern with variables resolved to clause-local slots.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Pat {
    Var(VarId),
    Symbol(String),
    Int(i64),
    Compound(String, Vec<Pat>),
    List(Vec<Pat>, Option<VarId>),
}

#[derive(Debug, Clone)]
pub(crate) enum Instr {
    /// Match one keyword token with this exact text.
    Keyword(String),
    /// Match a string/integer token of the class, binding its value.
    SToken { class: String, kind: ValueKind, var: VarId },
    /// Invoke a production and match its result against `out`.
    Call { prod: ProdId, out: Pat },
    /// Invoke an accumulator loop seeded with `seed`; the final accumulated
    /// term matches against `out`.
    AccumCall { prod: ProdId, seed: Pat, out: Pat },
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledClause {
    pub nvars: usize,
    pub items: Vec<Instr>,
    /// Construction pattern instantiated when the body succeeds.
    pub head: Pat,
}

/// One recursive continuation of an accumulator loop.
#[derive(Debug, Clone)]
pub(crate) struct AccumCont {
    pub nvars: usize,
    /// Slot holding the incoming accumulated value.
    pub hole: VarId,
    pub items: Vec<Instr>,
    /// Pattern folding the accumulator into the next value.
    pub fold: Pat,
}

#[derive(Debug)]
pub(crate) enum Production {
    Clauses(Vec<CompiledClause>),
    /// Match any keyword, then select the alternatives keyed by its text.
    Dispatch(Vec<(String, Vec<CompiledClause>)>),
    /// Try each continuation per iteration; stop by returning the
    /// accumulator (the epsilon alternative is implicit and last).
    Accum(Vec<AccumCont>),
}

/// The executable form of a grammar: productions plus the entry point. The
/// runtime wraps the entry in the standard root (skip leading comments and
/// newlines, parse, skip trailing ones, require end of input).
#[derive(Debug)]
pub struct CompiledGrammar {
    pub(crate) names: Vec<String>,
    pub(crate) prods: Vec<Production>,
    pub(crate) by_name: HashMap<String, ProdId>,
    pub(crate) entry: ProdId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProdKind {
    Clauses,
    Dispatch,
    Accum,
}

impl CompiledGrammar {
    pub fn entry_name(&self) -> &str {
        &self.names[self.entry]
    }

    pub fn production_names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(|s| s.as_str())
    }

    pub fn production_kind(&self, name: &str) -> Option<ProdKind> {
        self.by_name.get(name).map(|&id| match self.prods[id] {
            Production::Clauses(_) => ProdKind::Clauses,
            Production::Dispatch(_) => ProdKind::Dispatch,
            Production::Accum(_) => ProdKind::Accum,
        })
    }

    pub fn dispatch_keys(&self, name: &str) -> Option<Vec<&str>> {
        match self.by_name.get(name).map(|&id| &self.prods[id]) {
            Some(Production::Dispatch(table)) => {
                Some(table.iter().map(|(k, _)| k.as_str()).collect())
            }
            _ => None,
        }
    }
}

struct VarMap {
    ids: HashMap<String, VarId>,
}

impl VarMap {
    fn new() -> VarMap {
        VarMap { ids: HashMap::new() }
    }

    fn id(&mut self, name: &str) -> VarId {
        let next = self.ids.len() as VarId;
        *self.ids.entry(name.to_string()).or_insert(next)
    }

    fn pat(&mut self, pattern: &TermPattern) -> Pat {
        match pattern {
            TermPattern::Var(v) => Pat::Var(self.id(v)),
            TermPattern::Symbol(s) => Pat::Symbol(s.clone()),
            TermPattern::Int(n) => Pat::Int(*n),
            TermPattern::Compound(f, args) => {
                Pat::Compound(f.clone(), args.iter().map(|a| self.pat(a)).collect())
            }
            TermPattern::List(elems, tail) => Pat::List(
                elems.iter().map(|e| self.pat(e)).collect(),
                tail.as_ref().map(|t| self.id(t)),
            ),
        }
    }
}

/// Applies both transformations and compiles the grammar with the given
/// entry nonterminal.
pub fn wrap_entry(grammar: &Grammar, entry: &str) -> Result<CompiledGrammar, CsError> {
    if !grammar.defines(entry) {
        return super::cs_err(0, CsErrorKind::UndefinedEntry(entry.to_string()));
    }
    let transformed = eliminate_left_recursion(&left_factor(grammar)?)?;
    compile(&transformed, entry)
}

fn compile(g: &Grammar, entry: &str) -> Result<CompiledGrammar, CsError> {
    let mut groups: Vec<(&str, Vec<&Clause>)> = Vec::new();
    for nt in g.nonterminals() {
        groups.push((nt, g.clauses_of(nt)));
    }

    // Arm groups are embedded into their dispatcher, so they get no
    // production of their own.
    let is_arm_group =
        |clauses: &[&Clause]| clauses.iter().all(|c| c.origin == ClauseOrigin::DispatchArm);

    let mut names = Vec::new();
    let mut by_name: HashMap<String, ProdId> = HashMap::new();
    for (nt, clauses) in &groups {
        if is_arm_group(clauses) {
            continue;
        }
        by_name.insert(nt.to_string(), names.len());
        names.push(nt.to_string());
    }

    let arm_groups: HashMap<&str, &[&Clause]> = groups
        .iter()
        .filter(|(_, clauses)| is_arm_group(clauses))
        .map(|(nt, clauses)| (*nt, clauses.as_slice()))
        .collect();

    let mut prods = Vec::with_capacity(names.len());
    for (nt, clauses) in &groups {
        if is_arm_group(clauses) {
            continue;
        }
        let prod = match clauses[0].origin {
            ClauseOrigin::DispatchEntry => {
                debug_assert_eq!(clauses.len(), 1, "dispatcher `{nt}` has one clause");
                let helper = match &clauses[0].body[..] {
                    [BodyItem::KeywordVar(_), BodyItem::Call { nonterminal, .. }] => nonterminal,
                    other => unreachable!("malformed dispatcher body {other:?}"),
                };
                let arms = arm_groups
                    .get(helper.as_str())
                    .unwrap_or_else(|| unreachable!("arm group `{helper}` exists"));
                let mut table: Vec<(String, Vec<CompiledClause>)> = Vec::new();
                for arm in *arms {
                    let key = match &arm.args[0] {
                        TermPattern::Symbol(k) => k.clone(),
                        other => unreachable!("dispatch key is a keyword text, got {other:?}"),
                    };
                    let compiled = compile_clause(&arm.args[1], &arm.body, &by_name, g)?;
                    match table.iter_mut().find(|(k, _)| *k == key) {
                        Some((_, list)) => list.push(compiled),
                        None => table.push((key, vec![compiled])),
                    }
                }
                Production::Dispatch(table)
            }
            ClauseOrigin::AccumCont | ClauseOrigin::AccumStop => {
                let mut conts = Vec::new();
                for clause in clauses.iter().copied() {
                    match clause.origin {
                        ClauseOrigin::AccumStop => {}
                        ClauseOrigin::AccumCont => {
                            conts.push(compile_cont(clause, &by_name, g)?);
                        }
                        other => unreachable!("accumulator group holds {other:?}"),
                    }
                }
                Production::Accum(conts)
            }
            _ => {
                let mut compiled = Vec::new();
                for clause in clauses.iter().copied() {
                    compiled.push(compile_clause(&clause.args[0], &clause.body, &by_name, g)?);
                }
                Production::Clauses(compiled)
            }
        };
        prods.push(prod);
    }

    let entry = *by_name.get(entry).expect("entry checked before transforms");
    Ok(CompiledGrammar { names, prods, by_name, entry })
}

fn compile_clause(
    head: &TermPattern,
    body: &[BodyItem],
    by_name: &HashMap<String, ProdId>,
    g: &Grammar,
) -> Result<CompiledClause, CsError> {
    let mut vars = VarMap::new();
    let items = compile_items(body, &mut vars, by_name, g)?;
    let head = vars.pat(head);
    Ok(CompiledClause { nvars: vars.ids.len(), items, head })
}

fn compile_cont(
    clause: &Clause,
    by_name: &HashMap<String, ProdId>,
    g: &Grammar,
) -> Result<AccumCont, CsError> {
    let mut vars = VarMap::new();
    let hole = match &clause.args[0] {
        TermPattern::Var(v) => vars.id(v),
        other => unreachable!("continuation hole is a variable, got {other:?}"),
    };
    let (tail_call, items) = clause.body.split_last().expect("continuation ends in the loop call");
    let items = compile_items(items, &mut vars, by_name, g)?;
    let fold = match tail_call {
        BodyItem::Call { args, .. } => vars.pat(&args[0]),
        other => unreachable!("continuation tail is the loop call, got {other:?}"),
    };
    Ok(AccumCont { nvars: vars.ids.len(), hole, items, fold })
}

fn compile_items(
    body: &[BodyItem],
    vars: &mut VarMap,
    by_name: &HashMap<String, ProdId>,
    g: &Grammar,
) -> Result<Vec<Instr>, CsError> {
    let mut items = Vec::with_capacity(body.len());
    for item in body {
        match item {
            BodyItem::KeywordLit(k) => items.push(Instr::Keyword(k.clone())),
            BodyItem::KeywordVar(_) => {
                unreachable!("keyword variables appear only in dispatcher entries")
            }
            BodyItem::SToken { class, kind, var } => {
                items.push(Instr::SToken { class: class.clone(), kind: *kind, var: vars.id(var) })
            }
            BodyItem::Call { nonterminal, args } => {
                let prod = *by_name
                    .get(nonterminal)
                    .unwrap_or_else(|| unreachable!("call target `{nonterminal}` exists"));
                let is_accum = g
                    .clauses_of(nonterminal)
                    .first()
                    .is_some_and(|c| {
                        matches!(c.origin, ClauseOrigin::AccumCont | ClauseOrigin::AccumStop)
                    });
                if is_accum {
                    debug_assert_eq!(args.len(), 2);
                    items.push(Instr::AccumCall {
                        prod,
                        seed: vars.pat(&args[0]),
                        out: vars.pat(&args[1]),
                    });
                } else {
                    debug_assert_eq!(args.len(), 1);
                    items.push(Instr::Call { prod, out: vars.pat(&args[0]) });
                }
            }
        }
    }
    Ok(items)
}
