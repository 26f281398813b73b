//! clf — a parser construction toolkit.
//!
//! The toolkit splits parsing into two cooperating halves connected by a
//! plain-text token protocol, so each half can be developed, debugged and
//! run on its own (even as separate processes):
//!
//! * [`lexer`] — a rule-based scanner engine: declarative specs with
//!   contexts, longest-match regex rules and action pipelines, plus the
//!   standard comment rule packs and the string-normalization library.
//! * [`wire`] — the six token kinds and the line protocol / session
//!   commands crossing the scanner/parser boundary.
//! * [`session`] — the stand-alone scanner session (`[BEGINDATA]` ...
//!   end-marker windows, `[PARSEFILE]`, `[TARGET]`, `[QUIT]`).
//! * [`grammar`] — the clause-grammar compiler: parses `.csp` rules,
//!   left-factors keyword-led alternatives into token dispatchers, rewrites
//!   left recursion into accumulator loops, and emits a readable listing.
//! * [`runtime`] — the backtracking parser: runs a compiled grammar over a
//!   token stream, builds the abstract [`term::Term`] and the parallel
//!   [`term::RefTree`] of source line numbers, and reports error locations.
//! * [`term`] — the term and reference-tree value types and their
//!   canonical text forms.
//! * [`fixtures`] — the bundled example language corpus used by the test
//!   suite and handy for experimentation.

pub mod fixtures;
pub mod grammar;
pub mod lexer;
pub mod runtime;
pub mod session;
pub mod term;
pub mod wire;

pub use term::{print_ref, print_term, shape_matches, RefTree, Term};
pub use wire::{Token, DEFAULT_END_MARKER, END_TOKENS};
