//! Line-oriented corpus export format.
//!
//! ```text
//! #FORMAT <version>
//! #TAGSET <name>
//! #BOS <sentence-id>
//! %% <comment line>
//! <form>\t<pos>\t<edge-label>\t<parent-id>
//! #<node-id>\t<category>\t<edge-label>\t<parent-id>
//! #EOS <sentence-id>
//! ```
//!
//! Parent id `0` is the virtual root. Terminal lines appear in token order;
//! canonical output lists nonterminals after the terminals in ascending id
//! order, uses LF line endings and writes each comment line as `%% text`.
//! `%%` lines outside a sentence are ignored by the parser.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::graph::{Edge, NodeId, Parent, SyntaxGraph, Token, MAX_TOKENS};
use crate::label::{FunctionLabel, PosTag};
use crate::validate::Strictness;

pub const DEFAULT_FORMAT_VERSION: &str = "1";
pub const DEFAULT_TAGSET: &str = "stts";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExportDocument {
    pub format_version: String,
    pub tagset_name: String,
    pub sentences: Vec<SyntaxGraph>,
}

impl Default for ExportDocument {
    fn default() -> Self {
        ExportDocument {
            format_version: DEFAULT_FORMAT_VERSION.to_owned(),
            tagset_name: DEFAULT_TAGSET.to_owned(),
            sentences: Vec::new(),
        }
    }
}

impl ExportDocument {
    pub fn new(sentences: Vec<SyntaxGraph>) -> Self {
        ExportDocument {
            sentences,
            ..Default::default()
        }
    }

    pub fn sentence(&self, id: &str) -> Option<&SyntaxGraph> {
        self.sentences.iter().find(|s| s.sentence_id() == id)
    }
}

/// Parse failure with a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cannot serialize: {0}")]
pub struct SerializeError(pub String);

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

/// Parse raw bytes; invalid UTF-8 is reported at the offending byte.
pub fn parse_export_bytes(input: &[u8]) -> Result<ExportDocument, ParseError> {
    match std::str::from_utf8(input) {
        Ok(text) => parse_export(text),
        Err(e) => {
            let valid = &input[..e.valid_up_to()];
            let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
            let line_start = valid.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            let column = String::from_utf8_lossy(&valid[line_start..]).chars().count() + 1;
            Err(err(line, column, "invalid UTF-8"))
        }
    }
}

struct PendingTerminal {
    line: usize,
    token: Token,
    label: FunctionLabel,
    parent: (u32, usize),
}

struct PendingNonterminal {
    line: usize,
    id: NodeId,
    category: String,
    label: FunctionLabel,
    parent: (u32, usize),
}

struct PendingSentence {
    id: String,
    bos_line: usize,
    comment: Vec<String>,
    terminals: Vec<PendingTerminal>,
    nonterminals: Vec<PendingNonterminal>,
}

pub fn parse_export(input: &str) -> Result<ExportDocument, ParseError> {
    let mut doc = ExportDocument::default();
    let mut current: Option<PendingSentence> = None;
    let mut seen_ids: BTreeSet<String> = BTreeSet::new();
    let mut last_line = 0;

    let mut lines = input.split('\n').enumerate().peekable();
    while let Some((idx, line)) = lines.next() {
        let lineno = idx + 1;
        // a trailing newline leaves one empty final piece
        if line.is_empty() && lines.peek().is_none() {
            break;
        }
        last_line = lineno;
        if line.starts_with("%%") {
            if let Some(s) = current.as_mut() {
                let text = &line[2..];
                s.comment.push(text.strip_prefix(' ').unwrap_or(text).to_owned());
            }
            continue;
        }
        match current.as_mut() {
            None => {
                if line.is_empty() {
                    continue;
                }
                if let Some(rest) = line.strip_prefix("#FORMAT ") {
                    if !doc.sentences.is_empty() {
                        return Err(err(lineno, 1, "#FORMAT after the first sentence"));
                    }
                    doc.format_version = header_value(rest, lineno, 9)?;
                } else if let Some(rest) = line.strip_prefix("#TAGSET ") {
                    if !doc.sentences.is_empty() {
                        return Err(err(lineno, 1, "#TAGSET after the first sentence"));
                    }
                    doc.tagset_name = header_value(rest, lineno, 9)?;
                } else if let Some(rest) = line.strip_prefix("#BOS ") {
                    let id = sentence_id(rest, lineno, 6)?;
                    if !seen_ids.insert(id.clone()) {
                        return Err(err(lineno, 6, format!("duplicate sentence id `{id}`")));
                    }
                    current = Some(PendingSentence {
                        id,
                        bos_line: lineno,
                        comment: Vec::new(),
                        terminals: Vec::new(),
                        nonterminals: Vec::new(),
                    });
                } else if line.starts_with("#EOS") {
                    return Err(err(lineno, 1, "#EOS without matching #BOS"));
                } else {
                    return Err(err(lineno, 1, "expected #FORMAT, #TAGSET or #BOS"));
                }
            }
            Some(sentence) => {
                if let Some(rest) = line.strip_prefix("#EOS ") {
                    let id = sentence_id(rest, lineno, 6)?;
                    if id != sentence.id {
                        return Err(err(
                            lineno,
                            6,
                            format!("#EOS {id} does not close #BOS {}", sentence.id),
                        ));
                    }
                    let finished = current.take().unwrap();
                    doc.sentences.push(build_sentence(finished, lineno)?);
                } else if line.starts_with("#BOS ") {
                    return Err(err(
                        lineno,
                        1,
                        format!("missing #EOS for sentence {}", sentence.id),
                    ));
                } else {
                    parse_node_line(line, lineno, sentence)?;
                }
            }
        }
    }
    if let Some(s) = current {
        return Err(err(
            last_line.max(s.bos_line),
            1,
            format!("missing #EOS for sentence {}", s.id),
        ));
    }
    Ok(doc)
}

fn header_value(rest: &str, line: usize, column: usize) -> Result<String, ParseError> {
    if rest.is_empty() || rest.chars().any(char::is_control) {
        return Err(err(line, column, "empty or malformed header value"));
    }
    Ok(rest.to_owned())
}

fn sentence_id(rest: &str, line: usize, column: usize) -> Result<String, ParseError> {
    if rest.is_empty() {
        return Err(err(line, column, "missing sentence id"));
    }
    if let Some((i, _)) = rest
        .chars()
        .enumerate()
        .find(|(_, c)| c.is_whitespace() || c.is_control())
    {
        return Err(err(line, column + i, "whitespace in sentence id"));
    }
    Ok(rest.to_owned())
}

fn parse_node_line(line: &str, lineno: usize, s: &mut PendingSentence) -> Result<(), ParseError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 {
        return Err(err(
            lineno,
            1,
            format!("expected 4 tab-separated fields, found {}", fields.len()),
        ));
    }
    let mut columns = [1usize; 4];
    for i in 1..4 {
        columns[i] = columns[i - 1] + fields[i - 1].chars().count() + 1;
    }
    for (i, f) in fields.iter().enumerate() {
        if f.is_empty() {
            return Err(err(lineno, columns[i], "empty field"));
        }
        if let Some(off) = f.chars().position(char::is_control) {
            return Err(err(lineno, columns[i] + off, "control character"));
        }
    }
    for i in 1..3 {
        if let Some(off) = fields[i].chars().position(char::is_whitespace) {
            return Err(err(lineno, columns[i] + off, "whitespace in label"));
        }
    }
    let parent: u32 = fields[3]
        .parse()
        .map_err(|_| err(lineno, columns[3], format!("bad parent id `{}`", fields[3])))?;
    let label = FunctionLabel::new(fields[2]);

    match nonterminal_number(fields[0]) {
        Some(num) => {
            let id: u32 = num
                .parse()
                .map_err(|_| err(lineno, 2, format!("node id `{num}` out of range")))?;
            let id = NodeId(id);
            if s.nonterminals.iter().any(|n| n.id == id) {
                return Err(err(lineno, 2, format!("duplicate node id {id}")));
            }
            s.nonterminals.push(PendingNonterminal {
                line: lineno,
                id,
                category: fields[1].to_owned(),
                label,
                parent: (parent, columns[3]),
            });
        }
        None => {
            if s.terminals.len() >= MAX_TOKENS {
                return Err(err(lineno, 1, "too many tokens in sentence"));
            }
            s.terminals.push(PendingTerminal {
                line: lineno,
                token: Token {
                    form: fields[0].to_owned(),
                    pos: PosTag::new(fields[1]),
                    pos_reliable: true,
                },
                label,
                parent: (parent, columns[3]),
            });
        }
    }
    Ok(())
}

/// `#123` → `Some("123")`.
fn nonterminal_number(field: &str) -> Option<&str> {
    let digits = field.strip_prefix('#')?;
    (!digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())).then_some(digits)
}

fn build_sentence(s: PendingSentence, eos_line: usize) -> Result<SyntaxGraph, ParseError> {
    let tokens: Vec<Token> = s.terminals.iter().map(|t| t.token.clone()).collect();
    let mut g = SyntaxGraph::new(s.id.clone(), tokens);
    if !s.comment.is_empty() {
        g.set_comment(Some(s.comment.join("\n")));
    }
    let mut line_of: BTreeMap<NodeId, usize> = BTreeMap::new();
    for n in &s.nonterminals {
        g.add_nonterminal(n.id, n.category.as_str(), Edge::root())
            .map_err(|e| err(n.line, 2, e.to_string()))?;
        line_of.insert(n.id, n.line);
    }
    let resolve = |parent: (u32, usize), line: usize| -> Result<Parent, ParseError> {
        let p = Parent::from_wire_id(parent.0);
        match p {
            Parent::Node(id) if !s.nonterminals.iter().any(|n| n.id == id) => Err(err(
                line,
                parent.1,
                format!("parent {id} does not exist in sentence {}", s.id),
            )),
            _ => Ok(p),
        }
    };
    for (pos, t) in s.terminals.iter().enumerate() {
        let parent = resolve(t.parent, t.line)?;
        g.set_edge(NodeId::terminal(pos), Edge::new(parent, t.label.clone()))
            .expect("terminal exists");
        line_of.insert(NodeId::terminal(pos), t.line);
    }
    for n in &s.nonterminals {
        let parent = resolve(n.parent, n.line)?;
        g.set_edge(n.id, Edge::new(parent, n.label.clone()))
            .expect("nonterminal exists");
    }
    if let Some(v) = g.validate(Strictness::Lenient).into_iter().next() {
        let line = v.node.and_then(|n| line_of.get(&n).copied()).unwrap_or(eos_line);
        return Err(err(line, 1, v.to_string()));
    }
    Ok(g)
}

/// Canonical serialization.
pub fn serialize_export(doc: &ExportDocument) -> Result<String, SerializeError> {
    check_header("format version", &doc.format_version)?;
    check_header("tagset name", &doc.tagset_name)?;
    let mut out = String::new();
    out.push_str("#FORMAT ");
    out.push_str(&doc.format_version);
    out.push('\n');
    out.push_str("#TAGSET ");
    out.push_str(&doc.tagset_name);
    out.push('\n');
    let mut seen = BTreeSet::new();
    for g in &doc.sentences {
        if !seen.insert(g.sentence_id()) {
            return Err(SerializeError(format!(
                "duplicate sentence id `{}`",
                g.sentence_id()
            )));
        }
        write_sentence(&mut out, g)?;
    }
    Ok(out)
}

fn check_header(what: &str, value: &str) -> Result<(), SerializeError> {
    if value.is_empty() || value.chars().any(char::is_control) {
        return Err(SerializeError(format!("malformed {what} `{value}`")));
    }
    Ok(())
}

fn check_label(sentence: &str, what: &str, value: &str) -> Result<(), SerializeError> {
    if value.is_empty() || value.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(SerializeError(format!(
            "sentence {sentence}: malformed {what} `{value}`"
        )));
    }
    Ok(())
}

fn write_sentence(out: &mut String, g: &SyntaxGraph) -> Result<(), SerializeError> {
    let sid = g.sentence_id();
    check_label(sid, "sentence id", sid)?;
    let violations = g.validate(Strictness::Lenient);
    if let Some(v) = violations.first() {
        return Err(SerializeError(format!("sentence {sid}: {v}")));
    }
    out.push_str("#BOS ");
    out.push_str(sid);
    out.push('\n');
    if let Some(comment) = g.comment() {
        for line in comment.split('\n') {
            if line.chars().any(char::is_control) {
                return Err(SerializeError(format!(
                    "sentence {sid}: control character in comment"
                )));
            }
            out.push_str("%% ");
            out.push_str(line);
            out.push('\n');
        }
    }
    for (pos, t) in g.tokens().iter().enumerate() {
        let form = t.form.as_str();
        if form.is_empty()
            || form.chars().any(char::is_control)
            || form.starts_with("%%")
            || form.starts_with("#BOS ")
            || form.starts_with("#EOS ")
            || nonterminal_number(form).is_some()
        {
            return Err(SerializeError(format!(
                "sentence {sid}: form `{form}` cannot be written"
            )));
        }
        check_label(sid, "tag", &t.pos)?;
        let edge = g.edge(NodeId::terminal(pos)).unwrap();
        check_label(sid, "edge label", &edge.label)?;
        out.push_str(&format!("{form}\t{}\t{}\t{}\n", t.pos, edge.label, edge.parent));
    }
    for (id, n) in g.nonterminals() {
        check_label(sid, "category", &n.category)?;
        check_label(sid, "edge label", &n.edge.label)?;
        out.push_str(&format!(
            "#{id}\t{}\t{}\t{}\n",
            n.category, n.edge.label, n.edge.parent
        ));
    }
    out.push_str("#EOS ");
    out.push_str(sid);
    out.push('\n');
    Ok(())
}

impl fmt::Display for ExportDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match serialize_export(self) {
            Ok(text) => f.write_str(&text),
            Err(_) => Err(fmt::Error),
        }
    }
}
