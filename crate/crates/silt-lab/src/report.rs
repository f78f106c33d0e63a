//! Canonical structured report format.
//!
//! A report is an ordered tree of `key: value` lines with two-space
//! indentation under a version header. Emission is deterministic and
//! re-parsing an emitted document yields an equal tree, so identical jobs
//! produce byte-identical structured output.

use std::fmt;
use thiserror::Error;

pub const FORMAT_HEADER: &str = "silt-lab/1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Leaf(String),
    Tree(StructTree),
}

/// An ordered list of key/value entries; keys may repeat.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct StructTree {
    pub entries: Vec<(String, Value)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error("line {0}: missing `{FORMAT_HEADER}` header")]
    MissingHeader(usize),
    #[error("line {0}: bad indentation")]
    BadIndent(usize),
    #[error("line {0}: expected `key:` or `key: value`")]
    BadLine(usize),
}

impl StructTree {
    pub fn new() -> StructTree {
        StructTree::default()
    }

    pub fn leaf(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        self.entries
            .push((key.into(), Value::Leaf(value.to_string())));
        self
    }

    pub fn tree(&mut self, key: impl Into<String>, sub: StructTree) -> &mut Self {
        self.entries.push((key.into(), Value::Tree(sub)));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_leaf(&self, key: &str) -> Option<&str> {
        match self.get(key) {
            Some(Value::Leaf(s)) => Some(s),
            _ => None,
        }
    }

    fn emit_into(&self, out: &mut String, depth: usize) {
        for (k, v) in &self.entries {
            for _ in 0..depth {
                out.push_str("  ");
            }
            match v {
                Value::Leaf(s) => {
                    out.push_str(k);
                    out.push_str(": ");
                    out.push_str(s);
                    out.push('\n');
                }
                Value::Tree(t) => {
                    out.push_str(k);
                    out.push_str(":\n");
                    t.emit_into(out, depth + 1);
                }
            }
        }
    }
}

/// Serializes a tree to the canonical version-headed text.
pub fn emit_structured(tree: &StructTree) -> String {
    let mut out = String::from(FORMAT_HEADER);
    out.push('\n');
    tree.emit_into(&mut out, 0);
    out
}

/// Parses the canonical text back into a tree.
pub fn parse_structured(text: &str) -> Result<StructTree, ReportError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == FORMAT_HEADER => {}
        _ => return Err(ReportError::MissingHeader(1)),
    }
    // stack of (depth, tree) under construction
    let mut stack: Vec<(usize, StructTree)> = vec![(0, StructTree::new())];
    for (idx, raw) in lines {
        let lineno = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let indent = raw.len() - raw.trim_start_matches(' ').len();
        if indent % 2 != 0 {
            return Err(ReportError::BadIndent(lineno));
        }
        let depth = indent / 2;
        if depth + 1 > stack.len() {
            return Err(ReportError::BadIndent(lineno));
        }
        // close deeper trees
        while stack.len() > depth + 1 {
            let (_, done) = stack.pop().unwrap();
            let parent = &mut stack.last_mut().unwrap().1;
            match parent.entries.last_mut() {
                Some((_, v)) if *v == Value::Leaf(String::new()) => {
                    *v = Value::Tree(done);
                }
                _ => return Err(ReportError::BadIndent(lineno)),
            }
        }
        let line = raw.trim_start_matches(' ');
        let Some(colon) = line.find(':') else {
            return Err(ReportError::BadLine(lineno));
        };
        let key = line[..colon].to_string();
        let rest = &line[colon + 1..];
        let cur = &mut stack.last_mut().unwrap().1;
        if rest.is_empty() {
            // subtree opener: placeholder leaf, replaced when it closes
            cur.entries.push((key, Value::Leaf(String::new())));
            stack.push((depth + 1, StructTree::new()));
        } else if let Some(v) = rest.strip_prefix(' ') {
            cur.entries.push((key, Value::Leaf(v.to_string())));
        } else {
            return Err(ReportError::BadLine(lineno));
        }
    }
    while stack.len() > 1 {
        let (_, done) = stack.pop().unwrap();
        let parent = &mut stack.last_mut().unwrap().1;
        match parent.entries.last_mut() {
            Some((_, v)) if *v == Value::Leaf(String::new()) => {
                *v = Value::Tree(done);
            }
            _ => return Err(ReportError::BadIndent(0)),
        }
    }
    Ok(stack.pop().unwrap().1)
}

/// A finished report: human text plus the canonical structured tree.
#[derive(Clone, Debug)]
pub struct Report {
    pub human: String,
    pub tree: StructTree,
}

impl Report {
    pub fn structured(&self) -> String {
        emit_structured(&self.tree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> StructTree {
        let mut flags = StructTree::new();
        flags.leaf("slice", true).leaf("codimension", false);
        let mut t = StructTree::new();
        t.leaf("task", "classify").tree("flags", flags).leaf(
            "witness",
            "cover p0 < p1",
        );
        t
    }

    #[test]
    fn emit_parse_round_trip() {
        let t = sample();
        let text = emit_structured(&t);
        let back = parse_structured(&text).unwrap();
        assert_eq!(back, t);
        // parse ∘ emit ∘ parse = parse
        assert_eq!(parse_structured(&emit_structured(&back)).unwrap(), t);
        // byte-identical re-emission
        assert_eq!(emit_structured(&back), text);
    }

    #[test]
    fn empty_document_is_header_only() {
        let t = StructTree::new();
        assert_eq!(emit_structured(&t), format!("{FORMAT_HEADER}\n"));
        assert_eq!(parse_structured(&emit_structured(&t)).unwrap(), t);
    }

    #[test]
    fn missing_header_rejected() {
        assert!(matches!(
            parse_structured("task: classify\n"),
            Err(ReportError::MissingHeader(_))
        ));
    }

    #[test]
    fn nested_trees_round_trip() {
        let mut inner2 = StructTree::new();
        inner2.leaf("a", 1);
        let mut inner1 = StructTree::new();
        inner1.tree("deep", inner2).leaf("b", 2);
        let mut t = StructTree::new();
        t.tree("outer", inner1).leaf("c", 3);
        let text = emit_structured(&t);
        assert_eq!(parse_structured(&text).unwrap(), t);
    }

    #[test]
    fn repeated_keys_preserved_in_order() {
        let mut t = StructTree::new();
        t.leaf("node", "a").leaf("node", "b").leaf("node", "c");
        let back = parse_structured(&emit_structured(&t)).unwrap();
        assert_eq!(back, t);
    }
}
