//! Line-oriented text format for structure windows.
//!
//! ```text
//! # comments and blank lines are ignored
//! structure 1
//! symbol Succ 2
//! symbol Black 1
//! element 0
//! element 1
//! Succ(0,1)
//! Black(1)
//! frontier 0
//! ```
//!
//! `symbol` lines fix the language in declaration order. Element ids are any
//! non-empty strings without whitespace, parentheses, commas or `#`. Lines may
//! appear in any order after the header; [`to_text`] writes them in canonical
//! order (symbols as declared, elements and tuples lexicographically, frontier
//! last), so `load(save(m)) == m` and the saved bytes are stable.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::structure::{is_element_id, validate_structure, RawStructure, Structure};

pub const FORMAT_HEADER: &str = "structure 1";

pub fn to_text(m: &Structure) -> String {
    let mut out = String::with_capacity(32 * (m.len() + m.tuple_count()) + 64);
    out.push_str(FORMAT_HEADER);
    out.push('\n');
    for s in m.language().symbols() {
        let _ = writeln!(out, "symbol {} {}", s.name, s.arity);
    }
    for name in m.names() {
        let _ = writeln!(out, "element {name}");
    }
    for (s, rel) in m.relations().iter().enumerate() {
        let sym = m.language().name(s);
        for t in rel.iter() {
            out.push_str(sym);
            out.push('(');
            for (i, &e) in t.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(m.name(e));
            }
            out.push_str(")\n");
        }
    }
    for f in m.frontier() {
        let _ = writeln!(out, "frontier {}", m.name(f));
    }
    out
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub fn parse(text: &str) -> Result<Structure> {
    let mut raw = RawStructure::default();
    let mut seen_header = false;
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let body = line.split('#').next().unwrap_or("");
        let indent = body.len() - body.trim_start().len();
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let col = indent + 1;
        if !seen_header {
            if body != FORMAT_HEADER {
                return Err(perr(ln, col, format!("expected `{FORMAT_HEADER}` header")));
            }
            seen_header = true;
            continue;
        }
        let mut words = body.split_whitespace();
        let head = words.next().unwrap_or_default();
        match head {
            "symbol" => {
                let (name, arity) = match (words.next(), words.next(), words.next()) {
                    (Some(n), Some(a), None) => (n, a),
                    _ => return Err(perr(ln, col, "expected `symbol NAME ARITY`")),
                };
                let arity: usize = arity.parse().map_err(|_| {
                    let c = col + body.rfind(arity).unwrap_or(0);
                    perr(ln, c, format!("invalid arity `{arity}`"))
                })?;
                if arity == 0 {
                    return Err(perr(ln, col, "arity must be positive"));
                }
                raw.symbols.push((name.to_string(), arity));
            }
            "element" | "frontier" => {
                let id = match (words.next(), words.next()) {
                    (Some(id), None) => id,
                    _ => return Err(perr(ln, col, format!("expected `{head} ID`"))),
                };
                if !is_element_id(id) {
                    return Err(perr(ln, col + head.len() + 1, format!("invalid element id `{id}`")));
                }
                if head == "element" {
                    raw.elements.push(id.to_string());
                } else {
                    raw.frontier.push(id.to_string());
                }
            }
            _ => {
                let open = body
                    .find('(')
                    .ok_or_else(|| perr(ln, col, format!("unrecognised line `{body}`")))?;
                if !body.ends_with(')') {
                    return Err(perr(ln, col + body.len(), "expected `)` at end of tuple"));
                }
                let sym = body[..open].trim_end();
                let inner = &body[open + 1..body.len() - 1];
                let args: Vec<String> = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner.split(',').map(|a| a.trim().to_string()).collect()
                };
                if let Some(bad) = args.iter().find(|a| !is_element_id(a)) {
                    let c = col + open + 1 + inner.find(bad.as_str()).unwrap_or(0);
                    return Err(perr(ln, c, format!("invalid element id `{bad}`")));
                }
                raw.tuples.push((sym.to_string(), args));
            }
        }
    }
    if !seen_header {
        return Err(perr(1, 1, format!("missing `{FORMAT_HEADER}` header")));
    }
    validate_structure(&raw)
}

pub fn load(path: impl AsRef<Path>) -> Result<Structure> {
    let text = std::fs::read_to_string(path)?;
    parse(&text)
}

pub fn save(m: &Structure, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_text(m))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str =
        "structure 1\nsymbol Succ 2\nsymbol Black 1\nelement b\nelement a\nSucc(a,b)\nBlack(b)\nfrontier a\n";

    #[test]
    fn round_trip_is_byte_stable() {
        let m = parse(SAMPLE).unwrap();
        let text = to_text(&m);
        assert_eq!(
            text,
            "structure 1\nsymbol Succ 2\nsymbol Black 1\nelement a\nelement b\nSucc(a,b)\nBlack(b)\nfrontier a\n"
        );
        let again = parse(&text).unwrap();
        assert_eq!(again, m);
        assert_eq!(to_text(&again), text);
    }

    #[test]
    fn arity_error_reports_location() {
        let bad = "structure 1\nsymbol Succ x\n";
        match parse(bad) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 13);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tuple_arity_is_validated() {
        let bad = "structure 1\nsymbol Succ 2\nelement a\nSucc(a)\n";
        assert!(matches!(parse(bad), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn missing_header() {
        assert!(matches!(parse("symbol R 1\n"), Err(Error::Parse { line: 1, .. })));
    }
}
