use std::collections::HashSet;

use thiserror::Error;

use super::tree::{InvalidTree, Node, NodeId, RootedTree};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("expected '(' or a leaf label")]
    ExpectedSubtree,
    #[error("unbalanced parentheses: unexpected ')'")]
    UnexpectedClose,
    #[error("unbalanced parentheses: missing ')'")]
    MissingClose,
    #[error("missing terminating ';'")]
    MissingSemicolon,
    #[error("missing branch length on a non-root node")]
    MissingLength,
    #[error("negative branch length {0}")]
    NegativeLength(f64),
    #[error("invalid number '{0}'")]
    InvalidNumber(String),
    #[error("duplicate leaf label '{0}'")]
    DuplicateLabel(String),
    #[error("internal node has a single child")]
    UnaryNode,
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("trailing input after ';'")]
    TrailingInput,
    #[error(transparent)]
    Structure(#[from] InvalidTree),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn at(offset: usize, kind: ParseErrorKind) -> Self {
        ParseError { offset, kind }
    }
}

fn is_delimiter(b: u8) -> bool {
    matches!(b, b'(' | b')' | b',' | b':' | b';') || b.is_ascii_whitespace()
}

struct Cursor<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn current_char(&self) -> char {
        self.text[self.pos..].chars().next().unwrap_or('\0')
    }

    /// Maximal run of non-delimiter bytes. Delimiters are ASCII, so the
    /// slice boundaries always fall on UTF-8 character boundaries.
    fn token(&mut self) -> (usize, &'a str) {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && !is_delimiter(self.bytes[self.pos]) {
            self.pos += 1;
        }
        (start, &self.text[start..self.pos])
    }

    fn length(&mut self) -> Result<Option<f64>, ParseError> {
        if self.peek() != Some(b':') {
            return Ok(None);
        }
        self.pos += 1;
        let (start, tok) = self.token();
        let value: f64 =
            tok.parse().map_err(|_| ParseError::at(start, ParseErrorKind::InvalidNumber(tok.to_string())))?;
        if !value.is_finite() {
            return Err(ParseError::at(start, ParseErrorKind::InvalidNumber(tok.to_string())));
        }
        if value < 0.0 {
            return Err(ParseError::at(start, ParseErrorKind::NegativeLength(value)));
        }
        Ok(Some(value))
    }
}

/// Parses one Newick tree terminated by `;`.
///
/// Branch lengths are required on every node except the root. Internal node
/// labels are accepted and dropped. Whitespace between tokens is ignored.
pub fn parse_newick(text: &str) -> Result<RootedTree, ParseError> {
    let mut cur = Cursor { text, bytes: text.as_bytes(), pos: 0 };
    let mut nodes: Vec<Node> = Vec::new();
    let mut open: Vec<NodeId> = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();

    'subtree: loop {
        // Descend through opening parentheses to the next leaf.
        loop {
            match cur.peek() {
                Some(b'(') => {
                    cur.pos += 1;
                    let id = nodes.len();
                    nodes.push(Node { parent: open.last().copied(), children: vec![], length: None, label: None });
                    if let Some(&p) = open.last() {
                        nodes[p].children.push(id);
                    }
                    open.push(id);
                }
                Some(_) => break,
                None => return Err(ParseError::at(cur.pos, ParseErrorKind::ExpectedSubtree)),
            }
        }
        let (start, label) = cur.token();
        if label.is_empty() {
            let kind = match cur.bytes.get(cur.pos) {
                Some(b')') => ParseErrorKind::UnexpectedClose,
                _ => ParseErrorKind::ExpectedSubtree,
            };
            return Err(ParseError::at(start, kind));
        }
        if !seen.insert(label) {
            return Err(ParseError::at(start, ParseErrorKind::DuplicateLabel(label.to_string())));
        }
        let mut last = nodes.len();
        nodes.push(Node {
            parent: open.last().copied(),
            children: vec![],
            length: None,
            label: Some(label.to_string()),
        });
        if let Some(&p) = open.last() {
            nodes[p].children.push(last);
        }

        // Close as many subtrees as the input allows.
        loop {
            let at = {
                cur.skip_ws();
                cur.pos
            };
            let length = cur.length()?;
            if length.is_none() && nodes[last].parent.is_some() {
                return Err(ParseError::at(cur.pos.max(at), ParseErrorKind::MissingLength));
            }
            nodes[last].length = length;
            match cur.peek() {
                Some(b',') => {
                    if open.is_empty() {
                        return Err(ParseError::at(cur.pos, ParseErrorKind::UnexpectedChar(',')));
                    }
                    cur.pos += 1;
                    continue 'subtree;
                }
                Some(b')') => {
                    let Some(id) = open.pop() else {
                        return Err(ParseError::at(cur.pos, ParseErrorKind::UnexpectedClose));
                    };
                    if nodes[id].children.len() < 2 {
                        return Err(ParseError::at(cur.pos, ParseErrorKind::UnaryNode));
                    }
                    cur.pos += 1;
                    // Internal labels are tolerated and dropped.
                    let _ = cur.token();
                    last = id;
                }
                Some(b';') => {
                    if !open.is_empty() {
                        return Err(ParseError::at(cur.pos, ParseErrorKind::MissingClose));
                    }
                    cur.pos += 1;
                    if cur.peek().is_some() {
                        return Err(ParseError::at(cur.pos, ParseErrorKind::TrailingInput));
                    }
                    break 'subtree;
                }
                Some(_) => {
                    return Err(ParseError::at(cur.pos, ParseErrorKind::UnexpectedChar(cur.current_char())));
                }
                None => {
                    let kind =
                        if open.is_empty() { ParseErrorKind::MissingSemicolon } else { ParseErrorKind::MissingClose };
                    return Err(ParseError::at(cur.pos, kind));
                }
            }
        }
    }

    let root = nodes.iter().position(|n| n.parent.is_none()).unwrap_or(0);
    RootedTree::from_nodes(nodes, root).map_err(|e| ParseError::at(text.len(), e.into()))
}
