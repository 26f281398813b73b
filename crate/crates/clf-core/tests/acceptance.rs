//! The acceptance suite: one test per shipping criterion, each printing a
//! PASS line with the measured evidence (run with `--nocapture` to see them).

mod common;

use clf_core::fixtures;
use clf_core::grammar::{eliminate_left_recursion, emit_dcg, left_factor, parse_cs, wrap_entry};
use clf_core::lexer::{apply_transform, check_nl_conservation, load_spec, scan, Transform};
use clf_core::runtime::{clf_parse, parse_tokens, ParseError, Scanner};
use clf_core::session::{run_session, SessionConfig};
use clf_core::term::{print_ref, print_term, shape_matches};
use clf_core::wire::{Token, DEFAULT_END_MARKER};
use common::oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

fn parse_source(
    lexer_spec: &str,
    grammar: &str,
    entry: &str,
    source: &str,
) -> Result<clf_core::runtime::ParseResult, ParseError> {
    let spec = load_spec(lexer_spec).expect("spec loads");
    let compiled = wrap_entry(&parse_cs(grammar).expect("grammar parses"), entry).expect("entry");
    parse_tokens(&compiled, &scan(&spec, source, "sentences"), true)
}

#[test]
fn criterion_1_reference_tree_reproduction() {
    let source = "\n\n\n\n\n\n\n\n\n\n\nA +\n  B\n";
    let started = Instant::now();
    let result = parse_source(fixtures::EXP_LEX, fixtures::EXP_CSP, "exp", source).unwrap();
    let elapsed = started.elapsed();
    let term = print_term(&result.term);
    let refs = print_ref(&result.refs);
    assert_eq!(term, "plus(id('A'),id('B'))");
    assert_eq!(refs, "node(12,node(12,nil),node(13,nil))");
    assert!(shape_matches(&result.term, &result.refs));
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("[criterion 1] PASS reference-tree reproduction: {term} / {refs} in {elapsed:?}");
}

#[test]
fn criterion_2_transformation_goldens() {
    let transformed = |src: &str| {
        let g = parse_cs(src).unwrap();
        emit_dcg(&eliminate_left_recursion(&left_factor(&g).unwrap()).unwrap())
    };
    let add = transformed(fixtures::ADD_CSP);
    assert_eq!(add, include_str!("goldens/add_dcg.txt"), "accumulator golden");
    let dispatch = transformed(fixtures::DISPATCH_CSP);
    assert_eq!(dispatch, include_str!("goldens/dispatch_dcg.txt"), "dispatch golden");
    println!(
        "[criterion 2] PASS transformation goldens byte-exact ({} + {} lines)",
        add.lines().count(),
        dispatch.lines().count()
    );
}

#[test]
fn criterion_3_string_library() {
    use Transform::*;
    let table: &[(Transform, &str, &str)] = &[
        (ShiftLeft, "abc", "bc"),
        (ShiftLeft, "", ""),
        (ShiftLeft2, "#!x", "x"),
        (ShiftLeft2, "a", ""),
        (SupLast, "abc;", "abc"),
        (SupLast, "", ""),
        (SupLast2, "x*/", "x"),
        (SupLast2, "ab", ""),
        (RmTabs, "a\tb\tc", "a b c"),
        (RmLeadingSpaces, "   lead", "lead"),
        (RmLeadingSpaces, "\t x", "\t x"),
        (ClearString('%'), "a%b%%c", "abc"),
        (ClearString1, "'foo''bar'", "foo'bar"),
        (ClearString1, "\"aaa\"\"bbb\"", "aaa\"bbb"),
        (ClearString1, "''", ""),
        (ClearString2, "\"a\\\"b\"", "a\"b"),
        (ClearString2, "\"a\\\\b\"", "a\\b"),
        (ClearString2, "\"\"", ""),
    ];
    for (t, input, want) in table {
        assert_eq!(&apply_transform(*t, input), want, "{t} on {input:?}");
    }
    println!("[criterion 3] PASS string library: {} table entries byte-exact", table.len());
}

#[test]
fn criterion_4_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut checked = 0usize;
    let mut accepted = 0usize;
    for fixture in fixtures::corpus() {
        let grammar = parse_cs(fixture.grammar).unwrap();
        let compiled = wrap_entry(&grammar, fixture.entry).unwrap();
        let left_recursive = oracle::is_left_recursive(&grammar);
        let gen = oracle::TokenGen::for_grammar(&grammar);
        let mut sequences_run = 0usize;
        while sequences_run < 220 {
            let mut tokens = if sequences_run % 3 == 0 {
                gen.random_sequence(&mut rng, 12)
            } else {
                match gen.derived_sequence(&grammar, fixture.entry, &mut rng, 40) {
                    Some(tokens) => tokens,
                    None => continue,
                }
            };
            // perturb derived sequences so near-misses are exercised too
            if !tokens.is_empty() && rng.gen_bool(0.4) {
                let at = rng.gen_range(0..tokens.len());
                match rng.gen_range(0..3) {
                    0 => {
                        tokens.remove(at);
                    }
                    1 => tokens.insert(at, gen.random_token(&mut rng)),
                    _ => tokens[at] = gen.random_token(&mut rng),
                }
            }
            tokens.truncate(12);
            sequences_run += 1;
            checked += 1;

            let got = parse_tokens(&compiled, &tokens, false);
            let solutions = oracle::chart_solutions(&grammar, fixture.entry, &tokens);
            match &got {
                Ok(result) => {
                    accepted += 1;
                    assert!(
                        !solutions.is_empty(),
                        "{}: parser accepted, oracle rejected: {tokens:?}",
                        fixture.name
                    );
                    assert_eq!(
                        solutions.len(),
                        1,
                        "{}: corpus grammar must be unambiguous: {tokens:?}",
                        fixture.name
                    );
                    assert_eq!(
                        print_term(&result.term),
                        print_term(&solutions[0]),
                        "{}: term mismatch on {tokens:?}",
                        fixture.name
                    );
                    assert!(shape_matches(&result.term, &result.refs));
                }
                Err(ParseError::Expected { .. }) => {
                    assert!(
                        solutions.is_empty(),
                        "{}: parser rejected, oracle accepts: {tokens:?}",
                        fixture.name
                    );
                }
                Err(other) => panic!("{}: hard error on {tokens:?}: {other}", fixture.name),
            }
            if !left_recursive {
                let first = oracle::Dfs::new(&grammar, &tokens).first(fixture.entry);
                assert_eq!(
                    first.as_ref().map(print_term),
                    got.as_ref().ok().map(|r| print_term(&r.term)),
                    "{}: ordered-first-solution mismatch on {tokens:?}",
                    fixture.name
                );
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "[criterion 4] PASS oracle equivalence: {checked} sequences over {} grammars \
         ({accepted} accepted), zero mismatches in {elapsed:?}",
        fixtures::corpus().len()
    );
}

#[test]
fn criterion_5_nl_conservation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let alphabet: Vec<char> =
        "AB1xyz+-*()%/'\"=;_ \t\n\n".chars().collect();
    let mut checked = 0usize;
    for (name, text) in fixtures::lexer_specs() {
        let spec = load_spec(text).unwrap();
        for _ in 0..100 {
            let len = rng.gen_range(0..60);
            let input: String =
                (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
            assert!(
                check_nl_conservation(&spec, &input),
                "{name}: newline count diverged on {input:?}"
            );
            checked += 1;
        }
    }
    println!("[criterion 5] PASS newline conservation: {checked} random inputs, zero mismatches");
}

#[test]
fn criterion_6_protocol_transcripts() {
    let spec = load_spec(fixtures::EXP_LEX).unwrap();
    let run = |input: &str, config: &SessionConfig| {
        let mut out = Vec::new();
        let status = run_session(&spec, input.as_bytes(), &mut out, config).unwrap();
        (String::from_utf8(out).unwrap(), status)
    };
    let config = SessionConfig::default();

    // BEGINDATA window
    let (out, status) = run(&format!("[BEGINDATA]\nX + 1\n{DEFAULT_END_MARKER}\n"), &config);
    assert_eq!(out, "stoken\tID\tX\nkeyword\t+\nitoken\tINT\t1\n[ENDTOKENS]\n");
    assert_eq!(status, 0);

    // PARSEFILE
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.exp");
    std::fs::write(&path, "A\n").unwrap();
    let (out, _) = run(&format!("[PARSEFILE]{}\n[QUIT]\n", path.display()), &config);
    assert_eq!(out, "stoken\tID\tA\nnl\n[ENDTOKENS]\n");

    // TARGET eclipse
    let (out, _) =
        run(&format!("[TARGET]eclipse\n[BEGINDATA]\nX\n{DEFAULT_END_MARKER}\n"), &config);
    assert_eq!(out, "token('ID',string(\"X\")).\n[ENDTOKENS]\n");

    // QUIT
    let (out, status) = run("[QUIT]\n", &config);
    assert_eq!((out.as_str(), status), ("", 0));

    // restartability: two identical windows, identical outputs
    let window = format!("[BEGINDATA]\n1 + B\n{DEFAULT_END_MARKER}\n");
    let (once, _) = run(&window, &config);
    let (twice, _) = run(&format!("{window}{window}"), &config);
    assert_eq!(twice, format!("{once}{once}"));

    println!("[criterion 6] PASS protocol transcripts byte-exact (window, parsefile, eclipse, quit, restart)");
}

#[test]
fn criterion_7_mode_equivalence() {
    let scanner_bin = env!("CARGO_BIN_EXE_clf-scanner");
    let dir = tempfile::tempdir().unwrap();
    let mut compared = 0usize;
    for fixture in fixtures::corpus() {
        let spec_path = dir.path().join(format!("{}.lex", fixture.name));
        std::fs::write(&spec_path, fixture.lexer_spec).unwrap();
        let spec = load_spec(fixture.lexer_spec).unwrap();
        let compiled = wrap_entry(&parse_cs(fixture.grammar).unwrap(), fixture.entry).unwrap();
        let argv = vec![
            scanner_bin.to_string(),
            "--spec".to_string(),
            spec_path.display().to_string(),
        ];
        for sample in fixture.samples {
            let source_path = dir.path().join(format!("{}_{}.src", fixture.name, sample.name));
            std::fs::write(&source_path, sample.input).unwrap();
            let in_process =
                clf_parse(&Scanner::InProcess(&spec), &compiled, &source_path, true).unwrap();
            let subprocess =
                clf_parse(&Scanner::Subprocess(&argv), &compiled, &source_path, true).unwrap();
            assert_eq!(
                print_term(&in_process.term),
                print_term(&subprocess.term),
                "{}/{}",
                fixture.name,
                sample.name
            );
            assert_eq!(
                print_ref(&in_process.refs),
                print_ref(&subprocess.refs),
                "{}/{}",
                fixture.name,
                sample.name
            );
            assert_eq!(in_process.comments, subprocess.comments, "{}/{}", fixture.name, sample.name);
            // and both match the frozen fixture expectations
            assert_eq!(print_term(&in_process.term), sample.term);
            assert_eq!(print_ref(&in_process.refs), sample.refs);
            compared += 1;
        }
    }
    println!("[criterion 7] PASS mode equivalence: {compared} corpus files identical across in-process and subprocess scanning");
}

fn synthetic_exp_source(target: usize) -> String {
    let mut s = String::with_capacity(target + 16);
    s.push('1');
    let mut i = 0usize;
    while s.len() < target {
        s.push('+');
        if i % 3 == 0 {
            s.push_str("X1234");
        } else {
            s.push_str("4217");
        }
        i += 1;
        if i % 12 == 0 {
            s.push('\n');
        }
    }
    s
}

fn time_scan_parse(
    spec: &clf_core::lexer::LexSpec,
    compiled: &clf_core::grammar::CompiledGrammar,
    source: &str,
) -> Duration {
    let mut best = Duration::MAX;
    for _ in 0..2 {
        let started = Instant::now();
        let tokens = scan(spec, source, "sentences");
        let result = parse_tokens(compiled, &tokens, false).unwrap();
        let elapsed = started.elapsed();
        assert!(matches!(result.term, clf_core::term::Term::Compound(_, _)));
        best = best.min(elapsed);
    }
    best
}

#[test]
fn criterion_8_throughput() {
    let spec = load_spec(fixtures::EXP_LEX).unwrap();
    let compiled = wrap_entry(&parse_cs(fixtures::EXP_CSP).unwrap(), "exp").unwrap();
    let small = synthetic_exp_source(100_000);
    let large = synthetic_exp_source(1_000_000);
    assert!(large.len() >= 1_000_000);
    let t_small = time_scan_parse(&spec, &compiled, &small).max(Duration::from_millis(1));
    let t_large = time_scan_parse(&spec, &compiled, &large);
    assert!(
        t_large < Duration::from_secs(10),
        "1M characters took {t_large:?} (budget 10s)"
    );
    let ratio = t_large.as_secs_f64() / t_small.as_secs_f64();
    assert!(
        ratio <= 30.0,
        "100k -> 1M grew by {ratio:.1}x (limit 30x for a 10x size increase)"
    );
    println!(
        "[criterion 8] PASS throughput: 1M chars in {t_large:?}, 100k in {t_small:?} \
         (growth {ratio:.1}x <= 30x)"
    );
}

#[test]
fn criterion_9_error_location() {
    let spec = load_spec(fixtures::EXP_LEX).unwrap();
    let grammar = parse_cs(fixtures::EXP_CSP).unwrap();
    let compiled = wrap_entry(&grammar, "exp").unwrap();
    let gen = oracle::TokenGen::for_grammar(&grammar);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0usize;
    while checked < 50 {
        let Some(tokens) = gen.derived_sequence(&grammar, "exp", &mut rng, 24) else {
            continue;
        };
        let has_operator = tokens
            .iter()
            .any(|t| matches!(t, Token::Keyword(k) if k == "+" || k == "-" || k == "*"));
        let Some(final_operand) = tokens
            .iter()
            .rposition(|t| matches!(t, Token::SToken { .. } | Token::IToken { .. }))
        else {
            continue;
        };
        if !has_operator || tokens.len() > 40 {
            continue;
        }

        // lay the tokens out with random line breaks, but never between the
        // final operand and anything after it
        let mut text = String::new();
        let mut deleted_range = None;
        for (i, token) in tokens.iter().enumerate() {
            let lexeme = match token {
                Token::Keyword(k) => k.clone(),
                Token::SToken { value, .. } => value.clone(),
                Token::IToken { value, .. } => value.to_string(),
                _ => unreachable!("generator emits significant tokens only"),
            };
            if i == final_operand {
                deleted_range = Some((text.len(), lexeme.len()));
            }
            text.push_str(&lexeme);
            if i + 1 < tokens.len() {
                if i < final_operand && rng.gen_bool(0.3) {
                    text.push('\n');
                } else {
                    text.push(' ');
                }
            }
        }
        text.push('\n');

        let valid = parse_tokens(&compiled, &scan(&spec, &text, "sentences"), false);
        assert!(valid.is_ok(), "generator produced an invalid file: {text:?}");

        let (start, len) = deleted_range.expect("an operand exists");
        let mutated = format!("{}{}", &text[..start], &text[start + len..]);
        let last_significant_line = mutated
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, _)| i + 1)
            .last()
            .expect("mutated file keeps significant text");

        match parse_tokens(&compiled, &scan(&spec, &mutated, "sentences"), false) {
            Err(ParseError::Expected { line, .. }) => {
                assert_eq!(
                    line, last_significant_line,
                    "error line vs last significant line of {mutated:?}"
                );
            }
            other => panic!("mutated file must fail with a location: {other:?} for {mutated:?}"),
        }
        checked += 1;
    }
    println!("[criterion 9] PASS error location: 50 mutated files, error line = last significant line, zero misses");
}
