//! Signatures, terms over `x1..xn`, atomic formulas and equation systems.
//!
//! Terms are written in prefix form: `f(t1,...,tk)` for operations, bare
//! names for constants and `x1`, `x2`, ... for variables. Equality of terms
//! here is purely syntactic; equality of the induced term functions is
//! decided by [`crate::freealg`].

use std::collections::HashSet;
use std::fmt;

use crate::error::ParseError;

/// Index of an operation symbol inside its [`Signature`].
pub type OpId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpSymbol {
    pub name: String,
    pub arity: usize,
}

/// Ordered list of operation symbols with their arities.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    ops: Vec<OpSymbol>,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
}

/// `x` followed by digits only. Such names are reserved for variables.
fn is_variable_name(s: &str) -> bool {
    s.len() > 1 && s.starts_with('x') && s[1..].bytes().all(|b| b.is_ascii_digit())
}

/// Text before the first `#`.
pub fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

impl Signature {
    pub fn new(ops: impl IntoIterator<Item = (impl Into<String>, usize)>) -> Result<Self, String> {
        let mut sig = Signature::default();
        for (name, arity) in ops {
            sig.push(name.into(), arity)?;
        }
        Ok(sig)
    }

    fn push(&mut self, name: String, arity: usize) -> Result<(), String> {
        if !is_identifier(&name) {
            return Err(format!("invalid operation name {name:?}"));
        }
        if is_variable_name(&name) {
            return Err(format!("operation name {name:?} is reserved for variables"));
        }
        if self.lookup(&name).is_some() {
            return Err(format!("duplicate op name {name:?}"));
        }
        self.ops.push(OpSymbol { name, arity });
        Ok(())
    }

    pub fn ops(&self) -> &[OpSymbol] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn op(&self, id: OpId) -> &OpSymbol {
        &self.ops[id]
    }

    pub fn arity(&self, id: OpId) -> usize {
        self.ops[id].arity
    }

    pub fn lookup(&self, name: &str) -> Option<OpId> {
        self.ops.iter().position(|o| o.name == name)
    }

    /// Ids of the arity-0 symbols, in declaration order.
    pub fn constants(&self) -> impl Iterator<Item = OpId> + '_ {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, o)| o.arity == 0)
            .map(|(i, _)| i)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, op) in self.ops.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "op {} {}", op.name, op.arity)?;
        }
        Ok(())
    }
}

/// Parse `op <name> <arity>` declarations, one per line.
pub fn parse_signature(text: &str) -> Result<Signature, ParseError> {
    let mut sig = Signature::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        let lineno = lineno + 1;
        let tokens: Vec<(usize, &str)> = tokens_with_columns(line);
        if tokens.is_empty() {
            continue;
        }
        let (col, kw) = tokens[0];
        if kw != "op" {
            return Err(ParseError::new(
                lineno,
                col,
                format!("expected `op`, found {kw:?}"),
            ));
        }
        let end_col = line.trim_end().len() + 1;
        let (name_col, name) = *tokens
            .get(1)
            .ok_or_else(|| ParseError::new(lineno, end_col, "missing op name"))?;
        let (arity_col, arity) = *tokens
            .get(2)
            .ok_or_else(|| ParseError::new(lineno, end_col, "missing arity"))?;
        if let Some(&(extra_col, extra)) = tokens.get(3) {
            return Err(ParseError::new(
                lineno,
                extra_col,
                format!("unexpected token {extra:?}"),
            ));
        }
        let arity: usize = arity.parse().map_err(|_| {
            ParseError::new(
                lineno,
                arity_col,
                format!("arity must be a nonnegative integer, found {arity:?}"),
            )
        })?;
        sig.push(name.to_string(), arity)
            .map_err(|msg| ParseError::semantic(lineno, name_col, msg))?;
    }
    Ok(sig)
}

/// Whitespace-separated tokens with 1-based start columns.
pub(crate) fn tokens_with_columns(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// A term of `T_L(x1..xn)`. Variable indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    App(OpId, Vec<Term>),
}

impl Term {
    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }

    pub fn constant(op: OpId) -> Term {
        Term::App(op, Vec::new())
    }

    pub fn app(op: OpId, args: Vec<Term>) -> Term {
        Term::App(op, args)
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    /// Largest variable index occurring in the term, 0 if none.
    pub fn max_var(&self) -> usize {
        match self {
            Term::Var(i) => *i,
            Term::App(_, args) => args.iter().map(Term::max_var).max().unwrap_or(0),
        }
    }

    /// Check arities against `sig` and variable indices against `1..=n`.
    pub fn check(&self, sig: &Signature, n: usize) -> Result<(), String> {
        match self {
            Term::Var(i) if *i >= 1 && *i <= n => Ok(()),
            Term::Var(i) => Err(format!("variable x{i} out of range 1..{n}")),
            Term::App(op, args) => {
                let sym = sig
                    .ops()
                    .get(*op)
                    .ok_or_else(|| format!("unknown operation id {op}"))?;
                if sym.arity != args.len() {
                    return Err(format!(
                        "arity mismatch: {} expects {} arguments, got {}",
                        sym.name,
                        sym.arity,
                        args.len()
                    ));
                }
                args.iter().try_for_each(|a| a.check(sig, n))
            }
        }
    }

    /// Printable view of the term using `sig` for symbol names.
    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(i) => write!(f, "x{i}"),
            Term::App(op, args) => {
                f.write_str(&self.sig.op(*op).name)?;
                if args.is_empty() {
                    return Ok(());
                }
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", a.display(self.sig))?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Canonical prefix rendering, the inverse of [`parse_term`].
pub fn format_term(t: &Term, sig: &Signature) -> String {
    t.display(sig).to_string()
}

struct TermParser<'a> {
    src: &'a str,
    pos: usize,
    sig: &'a Signature,
    vars: usize,
}

impl<'a> TermParser<'a> {
    fn err(&self, at: usize, msg: impl Into<String>) -> ParseError {
        ParseError::new(1, at + 1, msg)
    }

    fn undefined(&self, at: usize, msg: impl Into<String>) -> ParseError {
        ParseError::semantic(1, at + 1, msg)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn ident(&mut self) -> Result<(usize, &'a str), ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if is_ident_start(c) => {}
            Some(c) => return Err(self.err(start, format!("unexpected character {c:?}"))),
            None => return Err(self.err(start, "unexpected end of input")),
        }
        while matches!(self.peek(), Some(c) if is_ident_char(c)) {
            self.pos += 1;
        }
        Ok((start, &self.src[start..self.pos]))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (start, name) = self.ident()?;
        if is_variable_name(name) {
            let idx: usize = name[1..]
                .parse()
                .map_err(|_| self.err(start, format!("variable index too large in {name}")))?;
            if idx == 0 || idx > self.vars {
                return Err(self.undefined(
                    start,
                    format!("variable {name} out of range x1..x{}", self.vars),
                ));
            }
            self.skip_ws();
            if self.peek() == Some('(') {
                return Err(self.err(self.pos, format!("variable {name} cannot take arguments")));
            }
            return Ok(Term::Var(idx));
        }
        let op = self
            .sig
            .lookup(name)
            .ok_or_else(|| self.undefined(start, format!("unknown symbol {name:?}")))?;
        let arity = self.sig.arity(op);
        self.skip_ws();
        if self.peek() != Some('(') {
            if arity != 0 {
                return Err(self.undefined(
                    start,
                    format!("arity mismatch: {name} expects {arity} arguments, got 0"),
                ));
            }
            return Ok(Term::App(op, Vec::new()));
        }
        let open = self.pos;
        if arity == 0 {
            return Err(self.err(
                open,
                format!("constant {name} is written without parentheses"),
            ));
        }
        self.pos += 1;
        let mut args = Vec::with_capacity(arity);
        loop {
            args.push(self.term()?);
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => {
                    return Err(self.err(self.pos, format!("expected `,` or `)`, found {c:?}")))
                }
                None => return Err(self.err(open, "unbalanced parentheses")),
            }
        }
        if args.len() != arity {
            return Err(self.undefined(
                start,
                format!(
                    "arity mismatch: {name} expects {arity} arguments, got {}",
                    args.len()
                ),
            ));
        }
        Ok(Term::App(op, args))
    }
}

/// Parse one prefix-notation term over `x1..xn`. Errors report line 1.
pub fn parse_term(text: &str, sig: &Signature, n: usize) -> Result<Term, ParseError> {
    parse_term_at(text, sig, n, 0)
}

/// Parse with columns offset by `col_offset` characters (for embedded terms).
fn parse_term_at(
    text: &str,
    sig: &Signature,
    n: usize,
    col_offset: usize,
) -> Result<Term, ParseError> {
    let mut p = TermParser {
        src: text,
        pos: 0,
        sig,
        vars: n,
    };
    let shift = |mut e: ParseError| {
        e.column += col_offset;
        e
    };
    let t = p.term().map_err(shift)?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        let msg = if c == ')' {
            "unbalanced parentheses".to_string()
        } else {
            format!("trailing input starting with {c:?}")
        };
        return Err(shift(p.err(p.pos, msg)));
    }
    Ok(t)
}

/// An equation `lhs ≈ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomicFormula {
    pub lhs: Term,
    pub rhs: Term,
}

impl AtomicFormula {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        AtomicFormula { lhs, rhs }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        struct D<'a>(&'a AtomicFormula, &'a Signature);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(
                    f,
                    "{} = {}",
                    self.0.lhs.display(self.1),
                    self.0.rhs.display(self.1)
                )
            }
        }
        D(self, sig)
    }
}

/// Duplicate-free ordered system of equations over `x1..xn`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    vars: usize,
    formulas: Vec<AtomicFormula>,
}

impl EquationSystem {
    pub fn new(vars: usize) -> Self {
        EquationSystem {
            vars,
            formulas: Vec::new(),
        }
    }

    /// Build from formulas, dropping structural duplicates (first occurrence wins).
    pub fn from_formulas(vars: usize, formulas: impl IntoIterator<Item = AtomicFormula>) -> Self {
        let mut sys = EquationSystem::new(vars);
        let mut seen = HashSet::new();
        for f in formulas {
            if seen.insert(f.clone()) {
                sys.formulas.push(f);
            }
        }
        sys
    }

    /// Append unless already present; returns whether it was added.
    pub fn push(&mut self, f: AtomicFormula) -> bool {
        if self.formulas.contains(&f) {
            return false;
        }
        self.formulas.push(f);
        true
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn formulas(&self) -> &[AtomicFormula] {
        &self.formulas
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }
}

/// Parse `<term> = <term>` lines. Blank lines and `#` comments are skipped.
pub fn parse_system(text: &str, sig: &Signature, n: usize) -> Result<EquationSystem, ParseError> {
    let mut formulas = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        formulas.extend(parse_equation_line(raw, sig, n).map_err(|e| e.at_line(i + 1))?);
    }
    Ok(EquationSystem::from_formulas(n, formulas))
}

/// Parse a single equation line; `Ok(None)` for blank/comment lines.
pub(crate) fn parse_equation_line(
    raw: &str,
    sig: &Signature,
    n: usize,
) -> Result<Option<AtomicFormula>, ParseError> {
    let line = strip_comment(raw);
    if line.trim().is_empty() {
        return Ok(None);
    }
    let mut parts = line.match_indices('=');
    let (eq, _) = parts
        .next()
        .ok_or_else(|| ParseError::new(1, 1, "expected `<term> = <term>`"))?;
    if let Some((second, _)) = parts.next() {
        return Err(ParseError::new(
            1,
            second + 1,
            "more than one `=` in equation",
        ));
    }
    let lhs = parse_term_at(&line[..eq], sig, n, 0)?;
    let rhs = parse_term_at(&line[eq + 1..], sig, n, eq + 1)?;
    Ok(Some(AtomicFormula::new(lhs, rhs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn group_sig() -> Signature {
        parse_signature("op mul 2\nop inv 1\nop e 0").unwrap()
    }

    #[test]
    fn signature_examples() {
        let s = parse_signature("op meet 2").unwrap();
        assert_eq!(
            s.ops(),
            &[OpSymbol {
                name: "meet".into(),
                arity: 2
            }]
        );
        let g = group_sig();
        let names: Vec<_> = g.ops().iter().map(|o| (o.name.as_str(), o.arity)).collect();
        assert_eq!(names, vec![("mul", 2), ("inv", 1), ("e", 0)]);
        let err = parse_signature("op f 2\nop f 1").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("duplicate"), "{err}");
    }

    #[test]
    fn signature_rejects_bad_tokens() {
        assert!(parse_signature("op f -1")
            .unwrap_err()
            .message
            .contains("nonnegative"));
        assert!(parse_signature("op f")
            .unwrap_err()
            .message
            .contains("missing arity"));
        assert!(parse_signature("op 2f 1").is_err());
        assert!(parse_signature("fn f 1").is_err());
        assert!(parse_signature("op x3 1")
            .unwrap_err()
            .message
            .contains("reserved"));
        assert!(parse_signature("op f 1 2").is_err());
        let s = parse_signature("# comment\n\nop f 1 # trailing\n").unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn term_examples() {
        let sl = parse_signature("op meet 2").unwrap();
        let t = parse_term("meet(x1,x2)", &sl, 2).unwrap();
        assert_eq!(t, Term::app(0, vec![Term::var(1), Term::var(2)]));

        let g = group_sig();
        let t = parse_term("mul(x1,inv(x1))", &g, 1).unwrap();
        assert_eq!(t.depth(), 2);

        let err = parse_term("meet(x1)", &sl, 2).unwrap_err();
        assert!(err.message.contains("arity mismatch"), "{err}");
    }

    #[test]
    fn term_errors_carry_positions() {
        let g = group_sig();
        let e = parse_term("mul(x1, foo)", &g, 1).unwrap_err();
        assert_eq!((e.line, e.column), (1, 9));
        assert!(e.message.contains("unknown symbol"));
        let e = parse_term("mul(x1,x2)", &g, 1).unwrap_err();
        assert!(e.message.contains("out of range"));
        assert_eq!(e.column, 8);
        assert!(parse_term("x0", &g, 1).is_err());
        assert!(parse_term("mul(x1,x1", &g, 1)
            .unwrap_err()
            .message
            .contains("unbalanced"));
        assert!(parse_term("inv(x1))", &g, 1)
            .unwrap_err()
            .message
            .contains("unbalanced"));
        assert!(parse_term("e()", &g, 1).is_err());
        assert!(parse_term("inv", &g, 1).is_err());
        assert!(parse_term("", &g, 1).is_err());
        assert!(parse_term("x1(e)", &g, 1).is_err());
    }

    #[test]
    fn format_examples() {
        let sl = parse_signature("op meet 2").unwrap();
        let g = group_sig();
        assert_eq!(
            format_term(&Term::app(0, vec![Term::var(1), Term::var(2)]), &sl),
            "meet(x1,x2)"
        );
        assert_eq!(format_term(&Term::var(3), &sl), "x3");
        assert_eq!(format_term(&Term::constant(2), &g), "e");
    }

    #[test]
    fn system_examples() {
        let g = group_sig();
        let s = parse_system("mul(x1,x1) = e", &g, 1).unwrap();
        assert_eq!(s.len(), 1);
        let s = parse_system("x1 = e\n  x1=e  \n", &g, 1).unwrap();
        assert_eq!(s.len(), 1);
        let s = parse_system("", &g, 1).unwrap();
        assert!(s.is_empty());
        let e = parse_system("x1 = e\n\nx1 = inv(x2)", &g, 1).unwrap_err();
        assert_eq!((e.line, e.column), (3, 10));
        assert!(parse_system("x1 = e = e", &g, 1).is_err());
        assert!(parse_system("x1", &g, 1).is_err());
    }

    fn arb_term(vars: usize) -> impl Strategy<Value = Term> {
        // group signature: mul/2, inv/1, e/0
        let leaf = prop_oneof![(1..=vars).prop_map(Term::Var), Just(Term::constant(2))];
        leaf.prop_recursive(5, 64, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app(0, vec![a, b])),
                inner.prop_map(|a| Term::app(1, vec![a])),
            ]
        })
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(t in arb_term(3)) {
            let g = group_sig();
            let text = format_term(&t, &g);
            prop_assert_eq!(parse_term(&text, &g, 3).unwrap(), t);
        }

        #[test]
        fn parser_never_panics(s in "[a-z0-9(), =#]{0,24}") {
            let g = group_sig();
            let _ = parse_term(&s, &g, 2);
            let _ = parse_system(&s, &g, 2);
        }
    }
}
