//! Graph file formats: a line-oriented text format and a JSON mirror.
//!
//! Text format, one directive per line (`#` starts a comment anywhere):
//!
//! ```text
//! node A
//! node U hidden
//! edge A Y
//! ```
//!
//! Vertex ids are assigned in node-declaration order; otherwise parsing is
//! order-independent, so edges may reference nodes declared later. Labels
//! match `[A-Za-z0-9_]+`. Duplicate edges collapse silently; self-loops are
//! rejected.

use adjust_core::graph::{Dag, VertexSet};
use serde_json::{json, Value};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct FileError {
    pub line: Option<usize>,
    pub message: String,
}

impl FileError {
    fn at(line: usize, message: impl Into<String>) -> FileError {
        FileError {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> FileError {
        FileError {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

fn valid_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses either format, sniffing JSON by a leading `{`.
pub fn parse_graph(text: &str) -> Result<Dag, FileError> {
    if text.trim_start().starts_with('{') {
        parse_graph_json(text)
    } else {
        parse_graph_text(text)
    }
}

pub fn parse_graph_text(text: &str) -> Result<Dag, FileError> {
    struct Line<'a> {
        number: usize,
        tokens: Vec<&'a str>,
    }
    let lines: Vec<Line> = text
        .lines()
        .enumerate()
        .map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            Line {
                number: i + 1,
                tokens: body.split_whitespace().collect(),
            }
        })
        .filter(|l| !l.tokens.is_empty())
        .collect();

    let mut labels: Vec<String> = Vec::new();
    let mut hidden = Vec::new();
    for l in &lines {
        if l.tokens[0] != "node" {
            continue;
        }
        match l.tokens.as_slice() {
            ["node", label] | ["node", label, "hidden"] => {
                if !valid_label(label) {
                    return Err(FileError::at(l.number, format!("invalid label `{label}`")));
                }
                if labels.iter().any(|x| x == label) {
                    return Err(FileError::at(l.number, format!("duplicate node `{label}`")));
                }
                if l.tokens.len() == 3 {
                    hidden.push(labels.len());
                }
                labels.push(label.to_string());
            }
            _ => {
                return Err(FileError::at(
                    l.number,
                    "expected `node <label>` or `node <label> hidden`",
                ))
            }
        }
    }

    let mut edges = Vec::new();
    for l in &lines {
        match l.tokens.as_slice() {
            ["node", ..] => {}
            ["edge", from, to] => {
                let fi = labels
                    .iter()
                    .position(|x| x == from)
                    .ok_or_else(|| FileError::at(l.number, format!("unknown node `{from}`")))?;
                let ti = labels
                    .iter()
                    .position(|x| x == to)
                    .ok_or_else(|| FileError::at(l.number, format!("unknown node `{to}`")))?;
                if fi == ti {
                    return Err(FileError::at(l.number, format!("self-loop on `{from}`")));
                }
                edges.push((fi, ti));
            }
            [other, ..] => {
                return Err(FileError::at(
                    l.number,
                    format!("unknown directive `{other}`"),
                ))
            }
            [] => unreachable!(),
        }
    }

    Dag::new(labels, &edges, &hidden.into_iter().collect::<VertexSet>())
        .map_err(|e| FileError::general(e.to_string()))
}

pub fn parse_graph_json(text: &str) -> Result<Dag, FileError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| FileError::at(e.line(), format!("invalid JSON: {e}")))?;
    let nodes = value
        .get("nodes")
        .and_then(Value::as_array)
        .ok_or_else(|| FileError::general("missing `nodes` array"))?;
    let mut labels = Vec::new();
    let mut hidden = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        let label = node
            .get("label")
            .and_then(Value::as_str)
            .ok_or_else(|| FileError::general(format!("node {i} is missing `label`")))?;
        if !valid_label(label) {
            return Err(FileError::general(format!("invalid label `{label}`")));
        }
        if node.get("hidden").and_then(Value::as_bool).unwrap_or(false) {
            hidden.push(i);
        }
        labels.push(label.to_string());
    }
    let mut edges = Vec::new();
    for (i, edge) in value
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| FileError::general("missing `edges` array"))?
        .iter()
        .enumerate()
    {
        let pair = edge
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| FileError::general(format!("edge {i} must be a [from, to] pair")))?;
        let mut ids = [0usize; 2];
        for (k, side) in pair.iter().enumerate() {
            let label = side
                .as_str()
                .ok_or_else(|| FileError::general(format!("edge {i} endpoints must be labels")))?;
            ids[k] = labels
                .iter()
                .position(|x| x == label)
                .ok_or_else(|| FileError::general(format!("unknown node `{label}`")))?;
        }
        edges.push((ids[0], ids[1]));
    }
    Dag::new(labels, &edges, &hidden.into_iter().collect::<VertexSet>())
        .map_err(|e| FileError::general(e.to_string()))
}

/// Canonical text rendering: nodes in id order, then edges sorted by id.
pub fn serialize_graph(dag: &Dag) -> String {
    let mut out = String::new();
    for v in 0..dag.vertex_count() {
        out.push_str("node ");
        out.push_str(dag.label(v));
        if dag.is_hidden(v) {
            out.push_str(" hidden");
        }
        out.push('\n');
    }
    for (u, v) in dag.edges() {
        out.push_str(&format!("edge {} {}\n", dag.label(u), dag.label(v)));
    }
    out
}

/// Text rendering of an undirected graph, same directives as the input
/// format with `edge` lines read as undirected.
pub fn serialize_ugraph(h: &adjust_core::graph::UGraph) -> String {
    let mut out = String::from("# undirected graph; edge lines are symmetric\n");
    for v in 0..h.vertex_count() {
        out.push_str("node ");
        out.push_str(h.label(v));
        out.push('\n');
    }
    for (u, v) in h.edges() {
        out.push_str(&format!("edge {} {}\n", h.label(u), h.label(v)));
    }
    out
}

pub fn graph_to_json(dag: &Dag) -> Value {
    json!({
        "nodes": (0..dag.vertex_count())
            .map(|v| json!({"label": dag.label(v), "hidden": dag.is_hidden(v)}))
            .collect::<Vec<_>>(),
        "edges": dag
            .edges()
            .into_iter()
            .map(|(u, v)| json!([dag.label(u), dag.label(v)]))
            .collect::<Vec<_>>(),
    })
}
