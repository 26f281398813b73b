//! The two clause transformations: keyword dispatch (left-factoring) and
//! left-recursion elimination.

use super::{
    cs_err, BodyItem, Clause, ClauseOrigin, CsError, CsErrorKind, Grammar, TermPattern,
};
use std::collections::{HashMap, HashSet};

fn taken_names(g: &Grammar) -> HashSet<String> {
    g.clauses.iter().map(|c| c.head.clone()).collect()
}

fn fresh_name(base: String, taken: &mut HashSet<String>) -> String {
    let mut name = base.clone();
    let mut n = 1;
    while taken.contains(&name) {
        n += 1;
        name = format!("{base}{n}");
    }
    taken.insert(name.clone());
    name
}

fn clause_vars(clause: &Clause) -> HashSet<String> {
    let mut vars = HashSet::new();
    let mut add = |v: &str| {
        vars.insert(v.to_string());
    };
    for arg in &clause.args {
        arg.visit_vars(&mut add);
    }
    for item in &clause.body {
        match item {
            BodyItem::SToken { var, .. } => {
                vars.insert(var.clone());
            }
            BodyItem::KeywordVar(v) => {
                vars.insert(v.clone());
            }
            BodyItem::Call { args, .. } => {
                for a in args {
                    a.visit_vars(&mut |v| {
                        vars.insert(v.to_string());
                    });
                }
            }
            BodyItem::KeywordLit(_) => {}
        }
    }
    vars
}

fn fresh_var(preferred: &str, used: &HashSet<String>) -> String {
    if !used.contains(preferred) {
        return preferred.to_string();
    }
    let mut n = 1;
    loop {
        let candidate = format!("{preferred}{n}");
        if !used.contains(&candidate) {
            return candidate;
        }
        n += 1;
    }
}

// Rebuilds the clause list by replacing each nonterminal's group (groups in
// first-occurrence order) with whatever `f` returns for it.
fn map_groups(
    g: &Grammar,
    mut f: impl FnMut(&str, Vec<Clause>) -> Result<Vec<Clause>, CsError>,
) -> Result<Grammar, CsError> {
    let mut grouped: HashMap<&str, Vec<Clause>> = HashMap::new();
    for c in &g.clauses {
        grouped.entry(c.head.as_str()).or_default().push(c.clone());
    }
    let mut clauses = Vec::with_capacity(g.clauses.len());
    for nt in g.nonterminals() {
        let group = grouped.remove(nt).expect("group exists");
        clauses.extend(f(nt, group)?);
    }
    Ok(Grammar { clauses })
}

/// Replaces every nonterminal whose clauses all start with a keyword literal
/// and use at least three distinct leading keywords by a token dispatcher:
///
/// ```text
/// a(X) :- [T], a$h(T,X).
/// a$h('t1',X) :- ...rest of the 't1' clause...
/// ```
///
/// Clause order within each keyword is preserved. Groups with fewer than
/// three distinct keywords, or with any clause not led by a keyword, are
/// left untouched.
pub fn left_factor(g: &Grammar) -> Result<Grammar, CsError> {
    let mut taken = taken_names(g);
    map_groups(g, |nt, group| {
        let all_keyword_led = group.iter().all(|c| {
            matches!(c.body.first(), Some(BodyItem::KeywordLit(_)))
                && c.args.len() == 1
                && c.origin == ClauseOrigin::User
        });
        if !all_keyword_led {
            return Ok(group);
        }
        let mut distinct: Vec<&str> = Vec::new();
        for c in &group {
            if let Some(BodyItem::KeywordLit(k)) = c.body.first() {
                if !distinct.contains(&k.as_str()) {
                    distinct.push(k);
                }
            }
        }
        if distinct.len() < 3 {
            return Ok(group);
        }
        let helper = fresh_name(format!("{nt}$h"), &mut taken);
        let dispatcher = Clause {
            head: nt.to_string(),
            args: vec![TermPattern::Var("X".into())],
            body: vec![
                BodyItem::KeywordVar("T".into()),
                BodyItem::Call {
                    nonterminal: helper.clone(),
                    args: vec![TermPattern::Var("T".into()), TermPattern::Var("X".into())],
                },
            ],
            origin: ClauseOrigin::DispatchEntry,
            line: 0,
        };
        let mut out = vec![dispatcher];
        for clause in group {
            let mut body = clause.body;
            let key = match body.remove(0) {
                BodyItem::KeywordLit(k) => k,
                _ => unreachable!("checked keyword-led above"),
            };
            let mut args = vec![TermPattern::Symbol(key)];
            args.extend(clause.args);
            out.push(Clause {
                head: helper.clone(),
                args,
                body,
                origin: ClauseOrigin::DispatchArm,
                line: clause.line,
            });
        }
        Ok(out)
    })
}

/// Rewrites each directly left-recursive nonterminal into accumulator form:
///
/// ```text
/// add(plus(A,B)) :- add(A), ['+'], mult(B).      add(C) :- mult(X), add$x(X,C).
/// add(X) :- mult(X).                       =>    add$x(A,C) :- ['+'], mult(B), add$x(plus(A,B),C).
///                                                add$x(A,A) :- .
/// ```
///
/// The base alternatives are tried in their original order; the helper tries
/// the recursive continuations in order and stops with the epsilon
/// alternative, which returns the accumulated term. Indirect left recursion
/// (a cycle through two or more nonterminals) is unsupported and reported.
pub fn eliminate_left_recursion(g: &Grammar) -> Result<Grammar, CsError> {
    detect_indirect_cycles(g)?;
    let mut taken = taken_names(g);
    map_groups(g, |nt, group| {
        let is_recursive = |c: &Clause| {
            matches!(c.body.first(), Some(BodyItem::Call { nonterminal, .. }) if nonterminal == nt)
        };
        if !group.iter().any(is_recursive) {
            return Ok(group);
        }
        let (recursive, base): (Vec<Clause>, Vec<Clause>) =
            group.into_iter().partition(is_recursive);
        if base.is_empty() {
            return cs_err(
                recursive.first().map_or(0, |c| c.line),
                CsErrorKind::NoBaseCase(nt.to_string()),
            );
        }
        let helper = fresh_name(format!("{nt}$x"), &mut taken);

        let mut out = Vec::new();
        for clause in base {
            let used = clause_vars(&clause);
            let result = fresh_var("C", &used);
            let mut body = clause.body;
            body.push(BodyItem::Call {
                nonterminal: helper.clone(),
                args: vec![clause.args[0].clone(), TermPattern::Var(result.clone())],
            });
            out.push(Clause {
                head: nt.to_string(),
                args: vec![TermPattern::Var(result)],
                body,
                origin: ClauseOrigin::AccumEntry,
                line: clause.line,
            });
        }
        for clause in recursive {
            let line = clause.line;
            let used = clause_vars(&clause);
            let mut body = clause.body;
            let hole = match body.remove(0) {
                BodyItem::Call { args, .. } => match args.as_slice() {
                    [TermPattern::Var(v)] => v.clone(),
                    _ => {
                        return cs_err(
                            line,
                            CsErrorKind::Form(format!(
                                "the left-recursive call of `{nt}` must bind a plain variable"
                            )),
                        )
                    }
                },
                _ => unreachable!("partitioned on leading call"),
            };
            if body.is_empty() {
                return cs_err(line, CsErrorKind::EmptyRecursion(nt.to_string()));
            }
            let result = fresh_var("C", &used);
            body.push(BodyItem::Call {
                nonterminal: helper.clone(),
                args: vec![clause.args[0].clone(), TermPattern::Var(result.clone())],
            });
            out.push(Clause {
                head: helper.clone(),
                args: vec![TermPattern::Var(hole), TermPattern::Var(result)],
                body,
                origin: ClauseOrigin::AccumCont,
                line,
            });
        }
        out.push(Clause {
            head: helper.clone(),
            args: vec![TermPattern::Var("A".into()), TermPattern::Var("A".into())],
            body: Vec::new(),
            origin: ClauseOrigin::AccumStop,
            line: 0,
        });
        Ok(out)
    })
}

// A cycle in the leftmost-call graph (excluding direct self loops, which the
// accumulator rewrite handles) would make the parser recurse at a fixed
// input position through several productions.
fn detect_indirect_cycles(g: &Grammar) -> Result<(), CsError> {
    let mut edges: HashMap<&str, Vec<&str>> = HashMap::new();
    for c in &g.clauses {
        if let Some(BodyItem::Call { nonterminal, .. }) = c.body.first() {
            if nonterminal != &c.head {
                edges.entry(c.head.as_str()).or_default().push(nonterminal.as_str());
            }
        }
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Gray,
        Black,
    }
    let nts: Vec<&str> = g.nonterminals();
    let mut marks: HashMap<&str, Mark> = nts.iter().map(|&n| (n, Mark::White)).collect();

    fn dfs<'a>(
        node: &'a str,
        edges: &HashMap<&'a str, Vec<&'a str>>,
        marks: &mut HashMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
    ) -> Option<Vec<String>> {
        marks.insert(node, Mark::Gray);
        stack.push(node);
        for &next in edges.get(node).into_iter().flatten() {
            match marks.get(next).copied().unwrap_or(Mark::White) {
                Mark::Gray => {
                    let start = stack.iter().position(|&n| n == next).unwrap_or(0);
                    let mut cycle: Vec<String> =
                        stack[start..].iter().map(|s| s.to_string()).collect();
                    cycle.push(next.to_string());
                    return Some(cycle);
                }
                Mark::White => {
                    if let Some(cycle) = dfs(next, edges, marks, stack) {
                        return Some(cycle);
                    }
                }
                Mark::Black => {}
            }
        }
        stack.pop();
        marks.insert(node, Mark::Black);
        None
    }

    for &nt in &nts {
        if marks[nt] == Mark::White {
            let mut stack = Vec::new();
            if let Some(cycle) = dfs(nt, &edges, &mut marks, &mut stack) {
                return cs_err(0, CsErrorKind::IndirectLeftRecursion(cycle));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::parse_cs;
    use super::*;

    const ADD: &str = "add(plus(A,B)) :- add(A), ['+'], mult(B).\n\
                       add(X) :- mult(X).\n\
                       mult(int(A)) :- stoken('INT',integer(A)).\n";

    const DISPATCH: &str = "a(X) :- ['t1'], b(X).\n\
                            a(X) :- ['t2'], b(X).\n\
                            a(X) :- ['t3'], b(X).\n\
                            b(leaf(A)) :- stoken('ID',string(A)).\n";

    #[test]
    fn factors_three_distinct_keywords() {
        let g = left_factor(&parse_cs(DISPATCH).unwrap()).unwrap();
        let a = g.clauses_of("a");
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].origin, ClauseOrigin::DispatchEntry);
        assert_eq!(a[0].body[0], BodyItem::KeywordVar("T".into()));
        let arms = g.clauses_of("a$h");
        assert_eq!(arms.len(), 3);
        assert_eq!(arms[0].args[0], TermPattern::Symbol("t1".into()));
        assert_eq!(arms[2].args[0], TermPattern::Symbol("t3".into()));
        assert_eq!(arms[0].origin, ClauseOrigin::DispatchArm);
    }

    #[test]
    fn two_keywords_stay_untouched() {
        let two = "a(X) :- ['t1'], b(X).\na(X) :- ['t2'], b(X).\nb(leaf(A)) :- stoken('ID',string(A)).\n";
        let g0 = parse_cs(two).unwrap();
        let g = left_factor(&g0).unwrap();
        assert_eq!(g, g0);
    }

    #[test]
    fn repeated_keywords_count_once_and_group() {
        // three clauses but only two distinct keywords: untouched
        let src = "a(one(X)) :- ['t1'], b(X).\na(two(X)) :- ['t1'], b(X).\na(X) :- ['t2'], b(X).\n\
                   b(leaf(A)) :- stoken('ID',string(A)).\n";
        let g0 = parse_cs(src).unwrap();
        assert_eq!(left_factor(&g0).unwrap(), g0);
        // four clauses, three distinct: the duplicate keyword keeps clause order
        let src = "a(one(X)) :- ['t1'], b(X).\na(two(X)) :- ['t1'], b(X).\na(X) :- ['t2'], b(X).\n\
                   a(X) :- ['t3'], b(X).\nb(leaf(A)) :- stoken('ID',string(A)).\n";
        let g = left_factor(&parse_cs(src).unwrap()).unwrap();
        let arms = g.clauses_of("a$h");
        assert_eq!(arms.len(), 4);
        assert_eq!(arms[0].args[0], TermPattern::Symbol("t1".into()));
        assert_eq!(arms[0].args[1], TermPattern::Compound("one".into(), vec![TermPattern::Var("X".into())]));
        assert_eq!(arms[1].args[0], TermPattern::Symbol("t1".into()));
        assert_eq!(arms[1].args[1], TermPattern::Compound("two".into(), vec![TermPattern::Var("X".into())]));
    }

    #[test]
    fn mixed_groups_are_not_factored() {
        let src = "a(X) :- ['t1'], b(X).\na(X) :- ['t2'], b(X).\na(X) :- b(X).\n\
                   b(leaf(A)) :- stoken('ID',string(A)).\n";
        let g0 = parse_cs(src).unwrap();
        assert_eq!(left_factor(&g0).unwrap(), g0);
    }

    #[test]
    fn eliminates_direct_left_recursion() {
        let g = eliminate_left_recursion(&parse_cs(ADD).unwrap()).unwrap();
        let add = g.clauses_of("add");
        assert_eq!(add.len(), 1);
        assert_eq!(add[0].origin, ClauseOrigin::AccumEntry);
        assert_eq!(add[0].args, vec![TermPattern::Var("C".into())]);
        let helper = g.clauses_of("add$x");
        assert_eq!(helper.len(), 2);
        assert_eq!(helper[0].origin, ClauseOrigin::AccumCont);
        // continuation: ['+'], mult(B), add$x(plus(A,B),C)
        assert_eq!(helper[0].body.len(), 3);
        assert_eq!(helper[0].body[0], BodyItem::KeywordLit("+".into()));
        assert!(
            matches!(&helper[0].body[1], BodyItem::Call { nonterminal, .. } if nonterminal == "mult")
        );
        assert_eq!(helper[1].origin, ClauseOrigin::AccumStop);
        assert_eq!(helper[1].args, vec![TermPattern::Var("A".into()), TermPattern::Var("A".into())]);
    }

    #[test]
    fn non_recursive_grammars_are_unchanged() {
        let g0 = parse_cs("a(X) :- b(X).\nb(leaf(A)) :- stoken('ID',string(A)).\n").unwrap();
        assert_eq!(eliminate_left_recursion(&g0).unwrap(), g0);
    }

    #[test]
    fn all_recursive_clauses_need_a_base_case() {
        let err = eliminate_left_recursion(
            &parse_cs("p(f(A)) :- p(A), ['!'].\n").unwrap(),
        )
        .unwrap_err();
        assert_eq!(err.kind, CsErrorKind::NoBaseCase("p".into()));
    }

    #[test]
    fn indirect_left_recursion_is_reported_with_the_cycle() {
        let src = "p(f(A)) :- q(A), ['x'].\np(one) :- ['1'].\n\
                   q(g(A)) :- p(A), ['y'].\nq(two) :- ['2'].\n";
        let err = eliminate_left_recursion(&parse_cs(src).unwrap()).unwrap_err();
        match err.kind {
            CsErrorKind::IndirectLeftRecursion(cycle) => {
                assert!(cycle.len() >= 3);
                assert_eq!(cycle.first(), cycle.last());
            }
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn empty_recursive_continuation_is_rejected() {
        let err =
            eliminate_left_recursion(&parse_cs("p(f(A)) :- p(A).\np(z) :- ['z'].\n").unwrap())
                .unwrap_err();
        assert_eq!(err.kind, CsErrorKind::EmptyRecursion("p".into()));
    }

    #[test]
    fn transformations_are_idempotent() {
        let once = eliminate_left_recursion(&parse_cs(ADD).unwrap()).unwrap();
        let twice = eliminate_left_recursion(&once).unwrap();
        assert_eq!(once, twice);
        let once = left_factor(&parse_cs(DISPATCH).unwrap()).unwrap();
        let twice = left_factor(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn fresh_result_variable_avoids_collisions() {
        let src = "p(f(C,B)) :- p(C), ['+'], q(B).\np(C) :- q(C).\nq(x(V)) :- stoken('ID',string(V)).\n";
        let g = eliminate_left_recursion(&parse_cs(src).unwrap()).unwrap();
        let entry = &g.clauses_of("p")[0];
        // base clause already uses C, so the generated result var must differ
        assert_eq!(entry.args, vec![TermPattern::Var("C1".into())]);
    }
}
