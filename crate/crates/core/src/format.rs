//! Line-oriented text format for instances.
//!
//! ```text
//! # comment
//! MDP <n> <m> <k>
//! V <id> <P|R>          (n lines, each id exactly once)
//! E <u> <v>             (m lines)
//! L <j> <c> <ids...>    (for j = 1..k, ids ascending)
//! U <j> <c> <ids...>
//! ```
//!
//! [`write_instance`] emits the canonical form: vertices and edges in
//! ascending order, one `L`/`U` line per pair.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::{Instance, MdpModel, Owner, StreettPair, StreettSpec, Vertex, VertexSet};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number; 0 when the error concerns the whole input.
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing `MDP <n> <m> <k>` header")]
    MissingHeader,
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("invalid number `{0}`")]
    BadNumber(String),
    #[error("invalid owner `{0}` (expected P or R)")]
    BadOwner(String),
    #[error("vertex {0} declared twice")]
    DuplicateVertex(Vertex),
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(Vertex, Vertex),
    #[error("random vertex {0} has out-degree 0")]
    RandomSink(Vertex),
    #[error("count mismatch for {what}: expected {expected}, found {found}")]
    CountMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("expected `{expected}` line, found `{found}`")]
    UnexpectedLine { expected: String, found: String },
    #[error("ids must be strictly ascending")]
    NotAscending,
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn number(line: usize, tok: &str) -> Result<usize, ParseError> {
    tok.parse()
        .map_err(|_| err(line, ParseErrorKind::BadNumber(tok.to_string())))
}

fn vertex(line: usize, tok: &str, n: usize) -> Result<Vertex, ParseError> {
    let v = number(line, tok)?;
    if v >= n {
        return Err(err(line, ParseErrorKind::VertexOutOfRange { vertex: v, n }));
    }
    Ok(v)
}

/// Parses and validates an instance.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(err(0, ParseErrorKind::MissingHeader))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.first() != Some(&"MDP") {
        return Err(err(hline, ParseErrorKind::MissingHeader));
    }
    if toks.len() != 4 {
        return Err(err(hline, ParseErrorKind::Malformed(header.to_string())));
    }
    let n = number(hline, toks[1])?;
    let m = number(hline, toks[2])?;
    let k = number(hline, toks[3])?;

    let mut owners: Vec<Option<Owner>> = vec![None; n];
    let mut decl_line = vec![0usize; n];
    let mut declared = 0usize;
    let mut edges = Vec::with_capacity(m);
    let mut edge_lines = Vec::with_capacity(m);
    let mut pairs: Vec<StreettPair> = Vec::with_capacity(k);
    let mut pending_requests: Option<VertexSet> = None;

    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "V" if pairs.is_empty() && pending_requests.is_none() => {
                if toks.len() != 3 {
                    return Err(err(ln, ParseErrorKind::Malformed(line.to_string())));
                }
                let v = vertex(ln, toks[1], n)?;
                let owner = match toks[2] {
                    "P" => Owner::Player1,
                    "R" => Owner::Random,
                    other => return Err(err(ln, ParseErrorKind::BadOwner(other.to_string()))),
                };
                if owners[v].is_some() {
                    return Err(err(ln, ParseErrorKind::DuplicateVertex(v)));
                }
                owners[v] = Some(owner);
                decl_line[v] = ln;
                declared += 1;
            }
            "E" if pairs.is_empty() && pending_requests.is_none() => {
                if toks.len() != 3 {
                    return Err(err(ln, ParseErrorKind::Malformed(line.to_string())));
                }
                let u = vertex(ln, toks[1], n)?;
                let v = vertex(ln, toks[2], n)?;
                edges.push((u, v));
                edge_lines.push(ln);
            }
            tag @ ("L" | "U") => {
                let j = pairs.len() + 1;
                let expected = if pending_requests.is_none() { "L" } else { "U" };
                if tag != expected || toks.len() < 3 || number(ln, toks[1])? != j || j > k {
                    return Err(err(
                        ln,
                        ParseErrorKind::UnexpectedLine {
                            expected: format!("{expected} {j}"),
                            found: line.to_string(),
                        },
                    ));
                }
                let c = number(ln, toks[2])?;
                if toks.len() - 3 != c {
                    return Err(err(
                        ln,
                        ParseErrorKind::CountMismatch {
                            what: "set members",
                            expected: c,
                            found: toks.len() - 3,
                        },
                    ));
                }
                let ids = toks[3..]
                    .iter()
                    .map(|t| vertex(ln, t, n))
                    .collect::<Result<Vec<_>, _>>()?;
                if ids.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(err(ln, ParseErrorKind::NotAscending));
                }
                let set = VertexSet::from_vec(ids);
                match pending_requests.take() {
                    None => pending_requests = Some(set),
                    Some(requests) => pairs.push(StreettPair {
                        requests,
                        grants: set,
                    }),
                }
            }
            "V" | "E" => {
                return Err(err(
                    ln,
                    ParseErrorKind::UnexpectedLine {
                        expected: "L or U".to_string(),
                        found: line.to_string(),
                    },
                ))
            }
            other => return Err(err(ln, ParseErrorKind::UnknownDirective(other.to_string()))),
        }
    }

    if declared != n {
        return Err(err(
            0,
            ParseErrorKind::CountMismatch {
                what: "V lines",
                expected: n,
                found: declared,
            },
        ));
    }
    if edges.len() != m {
        return Err(err(
            0,
            ParseErrorKind::CountMismatch {
                what: "E lines",
                expected: m,
                found: edges.len(),
            },
        ));
    }
    if pending_requests.is_some() || pairs.len() != k {
        return Err(err(
            0,
            ParseErrorKind::CountMismatch {
                what: "Streett pairs",
                expected: k,
                found: pairs.len(),
            },
        ));
    }

    let mut seen: Vec<(Vertex, Vertex, usize)> = edges
        .iter()
        .zip(&edge_lines)
        .map(|(&(u, v), &l)| (u, v, l))
        .collect();
    seen.sort_unstable();
    if let Some(w) = seen
        .windows(2)
        .filter(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        .min_by_key(|w| w[0].2.max(w[1].2))
    {
        return Err(err(
            w[0].2.max(w[1].2),
            ParseErrorKind::DuplicateEdge(w[0].0, w[0].1),
        ));
    }

    let owners: Vec<Owner> = owners.into_iter().map(|o| o.expect("all declared")).collect();
    let mut out_degree = vec![0usize; n];
    for &(u, _) in &edges {
        out_degree[u] += 1;
    }
    if let Some(v) = (0..n).find(|&v| owners[v].is_random() && out_degree[v] == 0) {
        return Err(err(decl_line[v], ParseErrorKind::RandomSink(v)));
    }

    let model = MdpModel::new(owners, edges).expect("validated above");
    Ok(Instance {
        model,
        spec: StreettSpec::new(pairs),
    })
}

fn write_set(out: &mut String, tag: char, j: usize, set: &VertexSet) -> fmt::Result {
    write!(out, "{tag} {j} {}", set.len())?;
    for v in set {
        write!(out, " {v}")?;
    }
    out.push('\n');
    Ok(())
}

/// Canonical text form of an instance.
pub fn write_instance(model: &MdpModel, spec: &StreettSpec) -> String {
    let mut out = String::new();
    let _ = (|| -> fmt::Result {
        writeln!(
            out,
            "MDP {} {} {}",
            model.vertex_count(),
            model.edge_count(),
            spec.k()
        )?;
        for v in 0..model.vertex_count() {
            let tag = if model.is_random(v) { 'R' } else { 'P' };
            writeln!(out, "V {v} {tag}")?;
        }
        for &(u, v) in model.edges() {
            writeln!(out, "E {u} {v}")?;
        }
        for (i, pair) in spec.pairs().iter().enumerate() {
            write_set(&mut out, 'L', i + 1, &pair.requests)?;
            write_set(&mut out, 'U', i + 1, &pair.grants)?;
        }
        Ok(())
    })();
    out
}

/// Parses a deletion list: one `D <u> <v>` per line, `#` comments allowed.
pub fn parse_deletions(text: &str) -> Result<Vec<(Vertex, Vertex)>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "D" {
            return Err(err(ln, ParseErrorKind::Malformed(line.to_string())));
        }
        out.push((number(ln, toks[1])?, number(ln, toks[2])?));
    }
    Ok(out)
}

pub fn write_deletions(edges: &[(Vertex, Vertex)]) -> String {
    let mut out = String::new();
    for (u, v) in edges {
        let _ = writeln!(out, "D {u} {v}");
    }
    out
}
