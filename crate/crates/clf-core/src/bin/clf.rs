//! The umbrella command-line tool: stand-alone scanner sessions, grammar
//! compilation and listing, and end-to-end parsing.

use clf_core::grammar::{eliminate_left_recursion, emit_dcg, left_factor, parse_cs, wrap_entry};
use clf_core::lexer::load_spec;
use clf_core::runtime::{clf_parse, DriverError, ParseError, Scanner};
use clf_core::session::{run_session, SessionConfig};
use clf_core::term::{print_ref, print_term};
use clf_core::wire::TargetMode;
use std::io::Write;
use std::path::Path;

const EXIT_OK: i32 = 0;
const EXIT_PARSE: i32 = 2;
const EXIT_IO: i32 = 3;
const EXIT_USAGE: i32 = 64;
const EXIT_LOAD: i32 = 65;

const USAGE: &str = "usage: clf <lex|compile-grammar|emit-dcg|parse> [options]
       clf --help";

const HELP: &str = "clf - scanner engine, clause-grammar compiler and parser runtime

usage: clf <command> [options]

commands:
  lex --spec FILE [--end-marker STR] [--target MODE]
        Run a stand-alone scanner session on stdin/stdout. Session commands:
        [BEGINDATA] ... end marker, [PARSEFILE]path, [TARGET]debug|eclipse|centaur,
        [QUIT]. One encoded token per line, bursts end with [ENDTOKENS].
  compile-grammar FILE.csp [--entry NT] [--emit-dcg OUT]
        Load and check a grammar, apply the indexing and left-recursion
        transformations, optionally verify an entry point and write the
        transformed listing to OUT.
  emit-dcg FILE.csp
        Print the transformed clause listing.
  parse (--spec FILE | --scanner CMD) --grammar FILE.csp --entry NT
        [--keep-comments] FILE
        Parse FILE and print the term and its line-reference tree, one per
        line. --spec scans in-process; --scanner launches a scanner command
        speaking the token protocol. --keep-comments appends one
        `% LINE: text` line per collected comment.

options:
  -h, --help         Show this help
  -V, --version      Show the version

exit status:
  0 success, 2 parse error, 3 i/o or protocol error, 64 usage error,
  65 scanner-spec or grammar load error";

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(run(&args));
}

fn run(args: &[String]) -> i32 {
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return EXIT_USAGE;
    };
    match command.as_str() {
        "-h" | "--help" | "help" => {
            println!("{HELP}");
            EXIT_OK
        }
        "-V" | "--version" => {
            println!("clf {}", env!("CARGO_PKG_VERSION"));
            EXIT_OK
        }
        "lex" => cmd_lex(&args[1..]),
        "compile-grammar" => cmd_compile_grammar(&args[1..]),
        "emit-dcg" => cmd_emit_dcg(&args[1..]),
        "parse" => cmd_parse(&args[1..]),
        other => {
            eprintln!("clf: unknown command `{other}`");
            eprintln!("{USAGE}");
            EXIT_USAGE
        }
    }
}

fn usage_error(message: &str) -> i32 {
    eprintln!("clf: {message}");
    eprintln!("{USAGE}");
    EXIT_USAGE
}

struct Flags<'a> {
    args: &'a [String],
    pos: usize,
}

impl<'a> Flags<'a> {
    fn new(args: &'a [String]) -> Flags<'a> {
        Flags { args, pos: 0 }
    }

    fn next(&mut self) -> Option<&'a str> {
        let arg = self.args.get(self.pos)?;
        self.pos += 1;
        Some(arg)
    }

    fn value(&mut self, flag: &str) -> Result<&'a str, String> {
        self.next().ok_or_else(|| format!("{flag} needs a value"))
    }
}

fn cmd_lex(args: &[String]) -> i32 {
    let mut spec_path = None;
    let mut config = SessionConfig::default();
    let mut flags = Flags::new(args);
    while let Some(arg) = flags.next() {
        match arg {
            "--spec" => match flags.value("--spec") {
                Ok(v) => spec_path = Some(v.to_string()),
                Err(e) => return usage_error(&e),
            },
            "--end-marker" => match flags.value("--end-marker") {
                Ok(v) => config.end_marker = v.to_string(),
                Err(e) => return usage_error(&e),
            },
            "--target" => match flags.value("--target") {
                Ok(v) => match TargetMode::parse(v) {
                    Some(mode) => config.target = mode,
                    None => return usage_error(&format!("unknown target mode `{v}`")),
                },
                Err(e) => return usage_error(&e),
            },
            other => return usage_error(&format!("unexpected argument `{other}`")),
        }
    }
    let Some(spec_path) = spec_path else {
        return usage_error("lex needs --spec FILE");
    };
    let spec = match load_spec_file(&spec_path) {
        Ok(spec) => spec,
        Err(code) => return code,
    };
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    match run_session(&spec, stdin.lock(), stdout.lock(), &config) {
        Ok(status) => status,
        Err(err) => {
            eprintln!("clf: session i/o failed: {err}");
            EXIT_IO
        }
    }
}

fn load_spec_file(path: &str) -> Result<clf_core::lexer::LexSpec, i32> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("clf: cannot read {path}: {err}");
            return Err(EXIT_IO);
        }
    };
    load_spec(&text).map_err(|err| {
        eprintln!("clf: {path}: {err}");
        EXIT_LOAD
    })
}

fn load_grammar_file(path: &str) -> Result<clf_core::grammar::Grammar, i32> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("clf: cannot read {path}: {err}");
            return Err(EXIT_IO);
        }
    };
    parse_cs(&text).map_err(|err| {
        eprintln!("clf: {path}: {err}");
        EXIT_LOAD
    })
}

fn cmd_emit_dcg(args: &[String]) -> i32 {
    let mut file = None;
    let mut flags = Flags::new(args);
    while let Some(arg) = flags.next() {
        if arg.starts_with('-') {
            return usage_error(&format!("unexpected argument `{arg}`"));
        }
        if file.replace(arg.to_string()).is_some() {
            return usage_error("emit-dcg takes one grammar file");
        }
    }
    let Some(file) = file else {
        return usage_error("emit-dcg needs a grammar file");
    };
    let grammar = match load_grammar_file(&file) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let transformed = match left_factor(&grammar).and_then(|g| eliminate_left_recursion(&g)) {
        Ok(g) => g,
        Err(err) => {
            eprintln!("clf: {file}: {err}");
            return EXIT_LOAD;
        }
    };
    print!("{}", emit_dcg(&transformed));
    EXIT_OK
}

fn cmd_compile_grammar(args: &[String]) -> i32 {
    let mut file = None;
    let mut entry = None;
    let mut emit_out = None;
    let mut flags = Flags::new(args);
    while let Some(arg) = flags.next() {
        match arg {
            "--entry" => match flags.value("--entry") {
                Ok(v) => entry = Some(v.to_string()),
                Err(e) => return usage_error(&e),
            },
            "--emit-dcg" => match flags.value("--emit-dcg") {
                Ok(v) => emit_out = Some(v.to_string()),
                Err(e) => return usage_error(&e),
            },
            other if other.starts_with('-') => {
                return usage_error(&format!("unexpected argument `{other}`"))
            }
            other => {
                if file.replace(other.to_string()).is_some() {
                    return usage_error("compile-grammar takes one grammar file");
                }
            }
        }
    }
    let Some(file) = file else {
        return usage_error("compile-grammar needs a grammar file");
    };
    let grammar = match load_grammar_file(&file) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let transformed = match left_factor(&grammar).and_then(|g| eliminate_left_recursion(&g)) {
        Ok(g) => g,
        Err(err) => {
            eprintln!("clf: {file}: {err}");
            return EXIT_LOAD;
        }
    };
    if let Some(entry) = entry {
        if let Err(err) = wrap_entry(&grammar, &entry) {
            eprintln!("clf: {file}: {err}");
            return EXIT_LOAD;
        }
    }
    if let Some(out) = emit_out {
        if let Err(err) = std::fs::write(&out, emit_dcg(&transformed)) {
            eprintln!("clf: cannot write {out}: {err}");
            return EXIT_IO;
        }
    }
    EXIT_OK
}

fn cmd_parse(args: &[String]) -> i32 {
    let mut spec_path = None;
    let mut scanner_cmd = None;
    let mut grammar_path = None;
    let mut entry = None;
    let mut keep_comments = false;
    let mut file = None;
    let mut flags = Flags::new(args);
    while let Some(arg) = flags.next() {
        match arg {
            "--spec" => match flags.value("--spec") {
                Ok(v) => spec_path = Some(v.to_string()),
                Err(e) => return usage_error(&e),
            },
            "--scanner" => match flags.value("--scanner") {
                Ok(v) => scanner_cmd = Some(v.to_string()),
                Err(e) => return usage_error(&e),
            },
            "--grammar" => match flags.value("--grammar") {
                Ok(v) => grammar_path = Some(v.to_string()),
                Err(e) => return usage_error(&e),
            },
            "--entry" => match flags.value("--entry") {
                Ok(v) => entry = Some(v.to_string()),
                Err(e) => return usage_error(&e),
            },
            "--keep-comments" => keep_comments = true,
            other if other.starts_with('-') => {
                return usage_error(&format!("unexpected argument `{other}`"))
            }
            other => {
                if file.replace(other.to_string()).is_some() {
                    return usage_error("parse takes one source file");
                }
            }
        }
    }
    let (Some(grammar_path), Some(entry), Some(file)) = (grammar_path, entry, file) else {
        return usage_error("parse needs --grammar, --entry and a source file");
    };
    let scanner_argv: Vec<String>;
    let spec;
    let scanner = match (&spec_path, &scanner_cmd) {
        (Some(path), None) => {
            spec = match load_spec_file(path) {
                Ok(s) => s,
                Err(code) => return code,
            };
            Scanner::InProcess(&spec)
        }
        (None, Some(cmd)) => {
            scanner_argv = cmd.split_whitespace().map(str::to_string).collect();
            if scanner_argv.is_empty() {
                return usage_error("--scanner needs a command");
            }
            Scanner::Subprocess(&scanner_argv)
        }
        _ => return usage_error("parse needs exactly one of --spec or --scanner"),
    };
    let grammar = match load_grammar_file(&grammar_path) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let compiled = match wrap_entry(&grammar, &entry) {
        Ok(cg) => cg,
        Err(err) => {
            eprintln!("clf: {grammar_path}: {err}");
            return EXIT_LOAD;
        }
    };
    match clf_parse(&scanner, &compiled, Path::new(&file), keep_comments) {
        Ok(result) => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            let mut write = || -> std::io::Result<()> {
                writeln!(out, "{}", print_term(&result.term))?;
                writeln!(out, "{}", print_ref(&result.refs))?;
                if keep_comments {
                    for (line, text) in &result.comments {
                        writeln!(out, "% {line}: {text}")?;
                    }
                }
                out.flush()
            };
            if let Err(err) = write() {
                eprintln!("clf: cannot write output: {err}");
                return EXIT_IO;
            }
            EXIT_OK
        }
        Err(DriverError::Parse { file, error }) => match error {
            ParseError::Expected { line, expected, found } => {
                let expected = expected.join(" or ");
                eprintln!("error: {file}:{line} expected {expected}, found {found}");
                EXIT_PARSE
            }
            other => {
                eprintln!("clf: {file}: {other}");
                EXIT_LOAD
            }
        },
        Err(err) => {
            eprintln!("clf: {err}");
            EXIT_IO
        }
    }
}
