//! Edge-list text format.
//!
//! ```text
//! # comment
//! N D          node count, declared degree (0 if irregular)
//! i j          one edge per line, 1-based, i < j
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::Graph;
use crate::{Error, Result};

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_graph(&text, path)
}

pub fn write_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_graph(g))?;
    Ok(())
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = String::new();
    let d = g.regular_degree().unwrap_or(0);
    writeln!(out, "{} {}", g.node_count(), d).unwrap();
    for (i, j) in g.edges() {
        writeln!(out, "{i} {j}").unwrap();
    }
    out
}

/// Parses the edge-list format; `origin` only labels error messages.
pub fn parse_graph(text: &str, origin: impl AsRef<Path>) -> Result<Graph> {
    let origin: PathBuf = origin.as_ref().to_path_buf();
    let err = |line: usize, message: String| Error::Parse {
        path: origin.clone(),
        line,
        message,
    };

    let mut header: Option<(usize, usize, usize)> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut seen = std::collections::HashSet::new();

    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(
                lineno,
                format!("expected two fields, found {}", fields.len()),
            ));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(lineno, format!("not a non-negative integer: {s:?}")))
        };
        let (a, b) = (parse(fields[0])?, parse(fields[1])?);
        match header {
            None => {
                if a == 0 {
                    return Err(err(lineno, "node count must be positive".into()));
                }
                header = Some((a, b, lineno));
            }
            Some((n, _, _)) => {
                if a == 0 || b == 0 {
                    return Err(err(lineno, "node ids are 1-based".into()));
                }
                if a > n || b > n {
                    return Err(err(lineno, format!("node id out of range 1..={n}")));
                }
                if a == b {
                    return Err(err(lineno, format!("self-loop at node {a}")));
                }
                let e = (a.min(b), a.max(b));
                if !seen.insert(e) {
                    return Err(err(lineno, format!("duplicate edge ({}, {})", e.0, e.1)));
                }
                edges.push(e);
            }
        }
    }

    let (n, declared, header_line) = header.ok_or_else(|| err(0, "missing header line".into()))?;
    let g = Graph::new(n, edges).map_err(|e| err(header_line, e.to_string()))?;
    if declared != 0 {
        if let Some(v) = g.nodes().find(|&v| g.degree(v) != declared) {
            return Err(err(
                header_line,
                format!(
                    "declared degree {declared} but node {v} has degree {}",
                    g.degree(v)
                ),
            ));
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Graph> {
        parse_graph(text, "test.edges")
    }

    #[test]
    fn round_trip_k4() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k4.edges");
        let g = Graph::complete(4);
        write_graph(&g, &path).unwrap();
        assert_eq!(read_graph(&path).unwrap(), g);
        assert!(fs::read_to_string(&path).unwrap().starts_with("4 3\n1 2\n"));
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse("# triangle\n3 2\n\n1 2 # first\n2 3\n1 3\n").unwrap();
        assert_eq!(g, Graph::complete(3));
    }

    #[test]
    fn self_loop_reports_line() {
        match parse("3 0\n1 2\n1 1\n") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("self-loop"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_index_rejected() {
        assert!(matches!(
            parse("3 0\n0 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn out_of_range_and_duplicates() {
        assert!(matches!(
            parse("3 0\n1 4\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("3 0\n1 2\n2 1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse("3 0\n1 2 3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("3 0\n1 x\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn declared_degree_checked() {
        assert!(matches!(
            parse("3 2\n1 2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
