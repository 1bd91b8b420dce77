//! SNAP-style edge-list reading and canonical dumping.
//!
//! Input: one edge per line as two integer tokens separated by whitespace,
//! `#` starts a comment line, extra tokens after the first two are ignored.
//! IDs are relabelled to `0..n` in first-appearance order.
//!
//! The canonical dump starts with a `# canonical nodes=N edges=M` header.
//! When the loader sees that header it keeps IDs verbatim, so isolated nodes
//! survive and `write -> load -> write` is byte-identical.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::Graph;
use crate::{Error, Result};

const CANONICAL_PREFIX: &str = "# canonical nodes=";

/// A graph together with the original label of each relabelled node.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `labels[i]` is the ID node `i` carried in the source file.
    pub labels: Vec<u64>,
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    load_edge_list_with_labels(path).map(|l| l.graph)
}

pub fn load_edge_list_with_labels(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}

fn parse_canonical_header(line: &str) -> Option<usize> {
    let rest = line.strip_prefix(CANONICAL_PREFIX)?;
    rest.split_whitespace().next()?.parse().ok()
}

pub(crate) fn parse_edge_list(text: &str, path: &Path) -> Result<LoadedGraph> {
    let mut canonical_n: Option<usize> = None;
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut labels: Vec<u64> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if lineno == 0 {
                canonical_n = parse_canonical_header(line);
            }
            continue;
        }
        let mut tokens = line.split_whitespace();
        let mut next_id = || -> Result<u64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg: "expected two node IDs".into(),
            })?;
            tok.parse::<u64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg: format!("invalid node ID {tok:?}"),
            })
        };
        let (a, b) = (next_id()?, next_id()?);

        match canonical_n {
            Some(n) => {
                if a >= n as u64 || b >= n as u64 {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: lineno + 1,
                        msg: format!("node ID out of range for canonical header nodes={n}"),
                    });
                }
                pairs.push((a as usize, b as usize));
            }
            None => {
                let mut id = |x: u64| {
                    *index.entry(x).or_insert_with(|| {
                        labels.push(x);
                        labels.len() - 1
                    })
                };
                let (u, v) = (id(a), id(b));
                pairs.push((u, v));
            }
        }
    }

    let n = match canonical_n {
        Some(n) => {
            labels = (0..n as u64).collect();
            n
        }
        None => labels.len(),
    };
    if n == 0 {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    let graph = Graph::from_edges(n, pairs)?;
    Ok(LoadedGraph { graph, labels })
}

/// Renders the canonical dump: header, then `u v` lines with `u < v` in
/// sorted order.
pub fn canonical_dump(g: &Graph) -> String {
    let mut out = String::with_capacity(16 * g.m() + 64);
    let _ = writeln!(out, "{CANONICAL_PREFIX}{} edges={}", g.n(), g.m());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn write_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, canonical_dump(g)).map_err(|e| Error::io(path, e))
}

/// Writes the `new_id original_id` sidecar produced during relabelling.
pub fn write_label_map(labels: &[u64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("# new_id original_id\n");
    for (i, l) in labels.iter().enumerate() {
        let _ = writeln!(out, "{i} {l}");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LoadedGraph> {
        parse_edge_list(text, Path::new("mem"))
    }

    #[test]
    fn dedup_and_self_loops() {
        let g = parse("0 1\n1 2\n1 0\n2 2").unwrap().graph;
        assert_eq!((g.n(), g.m()), (3, 2));
    }

    #[test]
    fn relabels_first_appearance() {
        let l = parse("# comment\n10 30\n30 20\t7\n").unwrap();
        assert_eq!(l.labels, vec![10, 30, 20]);
        assert_eq!(l.graph.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn reports_line_numbers() {
        match parse("0 1\n\n2 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse("0 1\n5\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_error() {
        assert!(matches!(parse("# nothing\n\n"), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn canonical_round_trip_keeps_isolated_nodes() {
        let g = Graph::from_edges(6, [(4, 1), (0, 3)]).unwrap();
        let dump = canonical_dump(&g);
        let back = parse(&dump).unwrap().graph;
        assert_eq!(back, g);
        assert_eq!(canonical_dump(&back), dump);
    }
}
