//! Skeleton graph files.
//!
//! Edge list: `v x y z` node lines then `e i j` edge lines, 0-based.
//! OBJ line set: `v x y z` and `l i j`, 1-based.

use std::fmt::Write as _;
use std::path::Path;

use treeskel_core::{SkeletonGraph, Vec3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Obj,
}

impl GraphFormat {
    /// `.obj` files are OBJ, everything else an edge list.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("obj") => GraphFormat::Obj,
            _ => GraphFormat::EdgeList,
        }
    }

    fn edge_tag(self) -> &'static str {
        match self {
            GraphFormat::EdgeList => "e",
            GraphFormat::Obj => "l",
        }
    }

    fn base(self) -> usize {
        match self {
            GraphFormat::EdgeList => 0,
            GraphFormat::Obj => 1,
        }
    }
}

/// Coordinates are written in shortest round-trip form, so reading back
/// reproduces them exactly.
pub fn encode_graph(graph: &SkeletonGraph, format: GraphFormat) -> String {
    let mut out = String::new();
    for p in &graph.nodes {
        let _ = writeln!(out, "v {:?} {:?} {:?}", p.0[0], p.0[1], p.0[2]);
    }
    for &(a, b) in &graph.edges {
        let _ = writeln!(out, "{} {} {}", format.edge_tag(), a + format.base(), b + format.base());
    }
    out
}

pub fn export_graph(graph: &SkeletonGraph, path: impl AsRef<Path>, format: GraphFormat) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_graph(graph, format)).map_err(|e| Error::io(path, e))
}

pub fn read_graph(path: impl AsRef<Path>, format: GraphFormat) -> Result<SkeletonGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph(&text, format, path)
}

/// Parses either format. Unrelated OBJ records (`vn`, `o`, `g`, ...) are
/// ignored; polylines `l a b c` become consecutive edges.
pub fn parse_graph(text: &str, format: GraphFormat, path: &Path) -> Result<SkeletonGraph> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |msg: String| Error::parse(path, format!("line {}", i + 1), msg);
        let tokens: Vec<&str> = line.split('#').next().unwrap_or("").split_whitespace().collect();
        let Some((&tag, rest)) = tokens.split_first() else {
            continue;
        };
        if tag == "v" {
            if rest.len() < 3 {
                return Err(err("vertex needs 3 coordinates".into()));
            }
            let mut c = [0.0; 3];
            for (v, t) in c.iter_mut().zip(rest) {
                *v = t.parse().map_err(|_| err(format!("`{t}` is not a number")))?;
            }
            nodes.push(Vec3(c));
        } else if tag == format.edge_tag() {
            let idx = rest
                .iter()
                .map(|t| {
                    // OBJ may carry `v/vt` pairs; only the vertex index matters
                    let v = t.split('/').next().unwrap_or("");
                    v.parse::<usize>()
                        .ok()
                        .and_then(|k| k.checked_sub(format.base()))
                        .ok_or_else(|| err(format!("bad node index `{t}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if idx.len() < 2 || (format == GraphFormat::EdgeList && idx.len() != 2) {
                return Err(err("edge needs two node indices".into()));
            }
            edges.extend(idx.windows(2).map(|w| (w[0], w[1])));
        } else if format == GraphFormat::EdgeList {
            return Err(err(format!("unknown record `{tag}`")));
        }
    }
    SkeletonGraph::new(nodes, edges).map_err(|e| Error::parse(path, "file", e.to_string()))
}
