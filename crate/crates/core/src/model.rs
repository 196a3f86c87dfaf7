//! The line-oriented model file read by the command-line tool.
//!
//! ```text
//! signature
//!   op mul 2
//!   op e 0
//! algebra Z2
//!   size 2
//!   table mul: 0,0=0 0,1=1 1,0=1 1,1=0
//!   const e = 0
//! system S vars 1
//!   mul(x1,x1) = e
//! points P dim 1
//!   (0)
//!   (1)
//! ```
//!
//! Blocks start with `signature`, `algebra <name>`, `system <name> vars <n>`
//! or `points <name> dim <n>` at the start of a line and run to the next
//! block header. `#` starts a comment. Indentation is free. LF and CRLF line
//! endings are both accepted.

use std::collections::HashMap;
use std::sync::Arc;

use crate::algebras::FiniteAlgebra;
use crate::error::{Error, ParseError, Result};
use crate::terms::{
    parse_equation_line, parse_signature, strip_comment, tokens_with_columns, EquationSystem,
    Signature,
};

const KEYWORDS: [&str; 4] = ["signature", "algebra", "system", "points"];

/// A `points` block: integer tuples, range-checked against an algebra only
/// when used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointsBlock {
    pub dim: usize,
    pub tuples: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub signature: Arc<Signature>,
    pub algebras: Vec<(String, FiniteAlgebra)>,
    pub systems: Vec<(String, EquationSystem)>,
    pub points: Vec<(String, PointsBlock)>,
}

fn find<'a, T>(items: &'a [(String, T)], name: &str, what: &str) -> Result<&'a T> {
    items
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, v)| v)
        .ok_or_else(|| {
            let known: Vec<&str> = items.iter().map(|(n, _)| n.as_str()).collect();
            Error::semantic(format!(
                "no {what} named {name:?} (defined: {})",
                known.join(", ")
            ))
        })
}

impl Model {
    pub fn algebra(&self, name: &str) -> Result<&FiniteAlgebra> {
        find(&self.algebras, name, "algebra")
    }

    pub fn system(&self, name: &str) -> Result<&EquationSystem> {
        find(&self.systems, name, "system")
    }

    pub fn points(&self, name: &str) -> Result<&PointsBlock> {
        find(&self.points, name, "points block")
    }
}

enum Header {
    Signature,
    Algebra(String),
    System(String, usize),
    Points(String, usize),
}

struct Block<'a> {
    header: Header,
    line: usize,
    body: Vec<(usize, &'a str)>,
}

fn parse_header(lineno: usize, tokens: &[(usize, &str)]) -> Result<Option<Header>, ParseError> {
    let (col, kw) = tokens[0];
    if !KEYWORDS.contains(&kw) {
        return Ok(None);
    }
    let arg = |i: usize, what: &str| -> Result<(usize, &str), ParseError> {
        tokens
            .get(i)
            .copied()
            .ok_or_else(|| ParseError::new(lineno, col, format!("`{kw}` needs {what}")))
    };
    let count = |i: usize, label: &str| -> Result<usize, ParseError> {
        let (c, word) = arg(i, &format!("`{label} <n>`"))?;
        if word != label {
            return Err(ParseError::new(
                lineno,
                c,
                format!("expected `{label}`, found {word:?}"),
            ));
        }
        let (c, num) = arg(i + 1, &format!("a count after `{label}`"))?;
        num.parse()
            .map_err(|_| ParseError::new(lineno, c, format!("expected a count, found {num:?}")))
    };
    let (expected_len, header) = match kw {
        "signature" => (1, Header::Signature),
        "algebra" => (2, Header::Algebra(arg(1, "a name")?.1.to_string())),
        "system" => (
            4,
            Header::System(arg(1, "a name")?.1.to_string(), count(2, "vars")?),
        ),
        _ => (
            4,
            Header::Points(arg(1, "a name")?.1.to_string(), count(2, "dim")?),
        ),
    };
    if let Some(&(c, extra)) = tokens.get(expected_len) {
        return Err(ParseError::new(
            lineno,
            c,
            format!("unexpected token {extra:?}"),
        ));
    }
    Ok(Some(header))
}

/// Parse a complete model file.
pub fn parse_model(text: &str) -> Result<Model> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let tokens = tokens_with_columns(strip_comment(raw));
        if tokens.is_empty() {
            continue;
        }
        match parse_header(lineno, &tokens)? {
            Some(header) => blocks.push(Block {
                header,
                line: lineno,
                body: Vec::new(),
            }),
            None => match blocks.last_mut() {
                Some(b) => b.body.push((lineno, raw)),
                None => {
                    return Err(ParseError::new(
                        lineno,
                        tokens[0].0,
                        "expected a block header such as `signature`",
                    )
                    .into())
                }
            },
        }
    }

    let mut signature: Option<Arc<Signature>> = None;
    let mut model_algebras = Vec::new();
    let mut systems = Vec::new();
    let mut points = Vec::new();
    let mut names: HashMap<String, usize> = HashMap::new();
    let mut claim = |name: &str, line: usize| -> Result<()> {
        if let Some(prev) = names.insert(name.to_string(), line) {
            return Err(ParseError::semantic(
                line,
                1,
                format!("name {name:?} already defined on line {prev}"),
            )
            .into());
        }
        Ok(())
    };

    for block in &blocks {
        let need_sig = || {
            signature.clone().ok_or_else(|| {
                Error::from(ParseError::semantic(
                    block.line,
                    1,
                    "block appears before the signature",
                ))
            })
        };
        match &block.header {
            Header::Signature => {
                if signature.is_some() {
                    return Err(ParseError::semantic(
                        block.line,
                        1,
                        "a model file has exactly one signature",
                    )
                    .into());
                }
                signature = Some(Arc::new(parse_block_signature(&block.body)?));
            }
            Header::Algebra(name) => {
                claim(name, block.line)?;
                let alg = parse_algebra(need_sig()?, block)?.with_name(name.clone());
                model_algebras.push((name.clone(), alg));
            }
            Header::System(name, vars) => {
                claim(name, block.line)?;
                let sig = need_sig()?;
                let mut formulas = Vec::new();
                for &(lineno, raw) in &block.body {
                    formulas.extend(
                        parse_equation_line(raw, &sig, *vars).map_err(|e| e.at_line(lineno))?,
                    );
                }
                systems.push((name.clone(), EquationSystem::from_formulas(*vars, formulas)));
            }
            Header::Points(name, dim) => {
                claim(name, block.line)?;
                let tuples = block
                    .body
                    .iter()
                    .map(|&(lineno, raw)| parse_tuple(lineno, raw, *dim))
                    .collect::<Result<_, _>>()?;
                points.push((name.clone(), PointsBlock { dim: *dim, tuples }));
            }
        }
    }
    let signature =
        signature.ok_or_else(|| Error::from(ParseError::new(1, 1, "missing `signature` block")))?;
    Ok(Model {
        signature,
        algebras: model_algebras,
        systems,
        points,
    })
}

fn parse_block_signature(body: &[(usize, &str)]) -> Result<Signature> {
    let mut lines = String::new();
    let mut numbers = Vec::new();
    for &(lineno, raw) in body {
        lines.push_str(raw);
        lines.push('\n');
        numbers.push(lineno);
    }
    let sig = parse_signature(&lines).map_err(|e| {
        let line = numbers[e.line - 1];
        e.at_line(line)
    })?;
    for (op, sym) in sig.ops().iter().enumerate() {
        if KEYWORDS.contains(&sym.name.as_str()) {
            let line = numbers.get(op).copied().unwrap_or(1);
            return Err(ParseError::semantic(
                line,
                1,
                format!("{:?} is a reserved word", sym.name),
            )
            .into());
        }
    }
    Ok(sig)
}

fn parse_value(lineno: usize, col: usize, s: &str) -> Result<usize, ParseError> {
    s.trim().parse().map_err(|_| {
        ParseError::new(
            lineno,
            col,
            format!("expected an element label, found {:?}", s.trim()),
        )
    })
}

fn parse_algebra(sig: Arc<Signature>, block: &Block) -> Result<FiniteAlgebra> {
    let mut size: Option<usize> = None;
    let mut entries: Vec<Vec<Option<usize>>> = vec![Vec::new(); sig.len()];
    let mut entry_lines: Vec<usize> = vec![block.line; sig.len()];
    for &(lineno, raw) in &block.body {
        let line = strip_comment(raw);
        let tokens = tokens_with_columns(line);
        let (col, kw) = tokens[0];
        match kw {
            "size" => {
                if size.is_some() {
                    return Err(ParseError::new(lineno, col, "size given twice").into());
                }
                let (c, v) = *tokens
                    .get(1)
                    .ok_or_else(|| ParseError::new(lineno, col, "`size` needs a value"))?;
                let m = parse_value(lineno, c, v)?;
                if m == 0 {
                    return Err(ParseError::semantic(lineno, c, "carrier must be nonempty").into());
                }
                if let Some(&(c, extra)) = tokens.get(2) {
                    return Err(
                        ParseError::new(lineno, c, format!("unexpected token {extra:?}")).into(),
                    );
                }
                size = Some(m);
            }
            "table" | "const" => {
                let m = size.ok_or_else(|| {
                    ParseError::new(lineno, col, "`size` must come before tables")
                })?;
                let rest = &line[col - 1 + kw.len()..];
                let rest_col = col + kw.len();
                let sep = if kw == "table" { ':' } else { '=' };
                let at = rest.find(sep).ok_or_else(|| {
                    ParseError::new(lineno, col, format!("expected `{kw} <op>{sep} ...`"))
                })?;
                let op_name = rest[..at].trim();
                let op_col = rest_col + rest[..at].find(op_name).unwrap_or(0);
                let op = sig.lookup(op_name).ok_or_else(|| {
                    ParseError::semantic(lineno, op_col, format!("unknown operation {op_name:?}"))
                })?;
                let arity = sig.arity(op);
                if (kw == "const") != (arity == 0) {
                    let msg = if arity == 0 {
                        format!("{op_name} is a constant; use `const {op_name} = <value>`")
                    } else {
                        format!("{op_name} has arity {arity}; use `table {op_name}: ...`")
                    };
                    return Err(ParseError::semantic(lineno, op_col, msg).into());
                }
                let cells = crate::options::checked_pow(m, arity);
                if cells > 1 << 24 {
                    return Err(Error::Budget {
                        what: format!("table of {op_name}"),
                        needed: cells,
                        limit: 1 << 24,
                    });
                }
                if entries[op].is_empty() {
                    entries[op] = vec![None; cells as usize];
                    entry_lines[op] = lineno;
                }
                let body = &rest[at + 1..];
                let body_col = rest_col + at + 1;
                let items: Vec<(usize, &str)> = if kw == "const" {
                    vec![(body_col, body)]
                } else {
                    tokens_with_columns(body)
                        .into_iter()
                        .map(|(c, t)| (c + body_col - 1, t))
                        .collect()
                };
                for (c, item) in items {
                    let (args, value) = if kw == "const" {
                        (Vec::new(), item)
                    } else {
                        let eq = item.find('=').ok_or_else(|| {
                            ParseError::new(
                                lineno,
                                c,
                                format!("expected `args=value`, found {item:?}"),
                            )
                        })?;
                        let args: Vec<usize> = item[..eq]
                            .split(',')
                            .map(|a| parse_value(lineno, c, a))
                            .collect::<Result<_, _>>()?;
                        (args, &item[eq + 1..])
                    };
                    if args.len() != arity {
                        return Err(ParseError::semantic(
                            lineno,
                            c,
                            format!(
                                "{op_name} takes {arity} arguments, entry has {}",
                                args.len()
                            ),
                        )
                        .into());
                    }
                    let v = parse_value(lineno, c, value)?;
                    if let Some(&bad) = args.iter().chain([&v]).find(|&&x| x >= m) {
                        return Err(ParseError::semantic(
                            lineno,
                            c,
                            format!("element {bad} is outside 0..{}", m - 1),
                        )
                        .into());
                    }
                    let idx = args.iter().fold(0, |acc, &a| acc * m + a);
                    if entries[op][idx].replace(v).is_some() {
                        return Err(ParseError::semantic(
                            lineno,
                            c,
                            format!("duplicate entry for {op_name}"),
                        )
                        .into());
                    }
                }
            }
            other => {
                return Err(ParseError::new(
                    lineno,
                    col,
                    format!("expected `size`, `table` or `const`, found {other:?}"),
                )
                .into())
            }
        }
    }
    let m = size.ok_or_else(|| ParseError::new(block.line, 1, "algebra block has no `size`"))?;
    let mut tables = Vec::with_capacity(sig.len());
    for (op, cells) in entries.into_iter().enumerate() {
        let name = &sig.op(op).name;
        if cells.is_empty() {
            return Err(
                ParseError::semantic(block.line, 1, format!("missing table for {name}")).into(),
            );
        }
        let filled = cells.iter().filter(|c| c.is_some()).count();
        if filled != cells.len() {
            return Err(ParseError::semantic(
                entry_lines[op],
                1,
                format!("table for {name} has {filled} of {} entries", cells.len()),
            )
            .into());
        }
        tables.push(cells.into_iter().map(|c| c.unwrap_or_default()).collect());
    }
    FiniteAlgebra::new(sig, m, tables)
}

fn parse_tuple(lineno: usize, raw: &str, dim: usize) -> Result<Vec<usize>, ParseError> {
    let line = strip_comment(raw);
    let start = line.len() - line.trim_start().len();
    let t = line.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| ParseError::new(lineno, start + 1, "expected a tuple `(a1,...,an)`"))?;
    let values: Vec<usize> = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|v| parse_value(lineno, start + 2, v))
            .collect::<Result<_, _>>()?
    };
    if values.len() != dim {
        return Err(ParseError::semantic(
            lineno,
            start + 1,
            format!(
                "tuple has {} coordinates, block has dim {dim}",
                values.len()
            ),
        ));
    }
    Ok(values)
}
