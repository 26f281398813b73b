//! The bundled example-language corpus: scanner specs, grammars, and sample
//! inputs with their expected printed results. The test suite replays every
//! sample verbatim; the samples double as usage examples.

/// One source sample and the exact `parse` output it must produce.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub name: &'static str,
    pub input: &'static str,
    pub term: &'static str,
    pub refs: &'static str,
    /// Comments collected in keep mode, as (line, text).
    pub comments: &'static [(usize, &'static str)],
}

#[derive(Debug, Clone, Copy)]
pub struct CorpusFixture {
    pub name: &'static str,
    pub lexer_spec: &'static str,
    pub grammar: &'static str,
    pub entry: &'static str,
    pub samples: &'static [Sample],
}

pub const EXP_LEX: &str = include_str!("../fixtures/exp.lex");
pub const CLIKE_LEX: &str = include_str!("../fixtures/clike.lex");
pub const ATOMS_LEX: &str = include_str!("../fixtures/atoms.lex");
pub const DISPATCH_LEX: &str = include_str!("../fixtures/dispatch.lex");

pub const EXP_CSP: &str = include_str!("../fixtures/exp.csp");
pub const ADD_CSP: &str = include_str!("../fixtures/add.csp");
pub const DISPATCH_CSP: &str = include_str!("../fixtures/dispatch.csp");
pub const LISTS_CSP: &str = include_str!("../fixtures/lists.csp");
pub const STMT_CSP: &str = include_str!("../fixtures/stmt.csp");

const EXP_SAMPLES: &[Sample] = &[
    Sample {
        name: "ref_lines",
        input: "\n\n\n\n\n\n\n\n\n\n\nA +\n  B\n",
        term: "plus(id('A'),id('B'))",
        refs: "node(12,node(12,nil),node(13,nil))",
        comments: &[],
    },
    Sample {
        name: "left_assoc",
        input: "A - B - C\n",
        term: "minus(minus(id('A'),id('B')),id('C'))",
        refs: "node(1,node(1,node(1,nil),node(1,nil)),node(1,nil))",
        comments: &[],
    },
    Sample {
        name: "precedence",
        input: "X1 * (2 + 3)\n% trailing note\n",
        term: "mult(id('X1'),plus(int(2),int(3)))",
        refs: "node(1,node(1,nil),node(1,node(1,nil),node(1,nil)))",
        comments: &[(2, " trailing note")],
    },
    Sample {
        name: "comment_between_operands",
        input: "A % left operand\n+ B\n",
        term: "plus(id('A'),id('B'))",
        refs: "node(1,node(1,nil),node(2,nil))",
        comments: &[(1, " left operand")],
    },
];

const ADD_SAMPLES: &[Sample] = &[Sample {
    name: "folded_sum",
    input: "1 + 2 + 3\n",
    term: "plus(plus(int(1),int(2)),int(3))",
    refs: "node(1,node(1,node(1,nil),node(1,nil)),node(1,nil))",
    comments: &[],
}];

const DISPATCH_SAMPLES: &[Sample] = &[Sample {
    name: "keyed_alternative",
    input: "t2 HELLO\n",
    term: "leaf('HELLO')",
    refs: "node(1,nil)",
    comments: &[],
}];

const LISTS_SAMPLES: &[Sample] = &[
    Sample {
        name: "three_elements",
        input: "A B 1\n",
        term: "[id('A'),id('B'),int(1)]",
        refs: "node(1,node(1,nil),node(1,node(1,nil),node(1,node(1,nil),nil)))",
        comments: &[],
    },
    Sample {
        name: "one_per_line",
        input: "A\nB\n",
        term: "[id('A'),id('B')]",
        refs: "node(1,node(1,nil),node(2,node(2,nil),nil))",
        comments: &[],
    },
    Sample {
        name: "empty_sequence",
        input: "",
        term: "[]",
        refs: "nil",
        comments: &[],
    },
];

const STMT_SAMPLES: &[Sample] = &[Sample {
    name: "two_assignments",
    input: "X = 1 ;\nY = X\n",
    term: "[assign(id('X'),val(1)),assign(id('Y'),var('X'))]",
    refs: "node(1,node(1,node(1,nil),node(1,nil)),node(2,node(2,node(2,nil),node(2,nil)),nil))",
    comments: &[],
}];

const CLIKE_SAMPLES: &[Sample] = &[Sample {
    name: "block_comment_between_tokens",
    input: "a + b /* note\nmore */ * c\n",
    term: "plus(id(a),mult(id(b),id(c)))",
    refs: "node(1,node(1,nil),node(1,node(1,nil),node(2,nil)))",
    comments: &[(1, " note"), (2, "more ")],
}];

/// Every grammar fixture with its scanner and samples.
pub fn corpus() -> Vec<CorpusFixture> {
    vec![
        CorpusFixture {
            name: "exp",
            lexer_spec: EXP_LEX,
            grammar: EXP_CSP,
            entry: "exp",
            samples: EXP_SAMPLES,
        },
        CorpusFixture {
            name: "add",
            lexer_spec: EXP_LEX,
            grammar: ADD_CSP,
            entry: "add",
            samples: ADD_SAMPLES,
        },
        CorpusFixture {
            name: "dispatch",
            lexer_spec: DISPATCH_LEX,
            grammar: DISPATCH_CSP,
            entry: "a",
            samples: DISPATCH_SAMPLES,
        },
        CorpusFixture {
            name: "lists",
            lexer_spec: EXP_LEX,
            grammar: LISTS_CSP,
            entry: "element_s",
            samples: LISTS_SAMPLES,
        },
        CorpusFixture {
            name: "stmt",
            lexer_spec: EXP_LEX,
            grammar: STMT_CSP,
            entry: "prog",
            samples: STMT_SAMPLES,
        },
        CorpusFixture {
            name: "clike",
            lexer_spec: CLIKE_LEX,
            grammar: EXP_CSP,
            entry: "exp",
            samples: CLIKE_SAMPLES,
        },
    ]
}

/// Every scanner spec in the corpus, for lexer-level sweeps.
pub fn lexer_specs() -> Vec<(&'static str, &'static str)> {
    vec![
        ("exp.lex", EXP_LEX),
        ("clike.lex", CLIKE_LEX),
        ("atoms.lex", ATOMS_LEX),
        ("dispatch.lex", DISPATCH_LEX),
    ]
}
