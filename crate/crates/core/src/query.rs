//! Corpus query language.
//!
//! ```text
//! query     = clause { "&" clause } ;
//! clause    = term [ relation term ] ;
//! term      = "#" name ":" node | "#" name | node ;
//! node      = "[" pred "]" ;
//! pred      = conj { "|" conj } ;
//! conj      = unary { "&" unary } ;
//! unary     = "!" unary | atom ;
//! atom      = attr "=" string | "discont" | "(" pred ")" ;
//! attr      = "cat" | "func" | "pos" | "form" ;
//! relation  = ">>" | ">" | "." | "$" ;
//! string    = '"' { char | '\"' | '\\' } '"' ;
//! ```
//!
//! `A > B`: B is a child of A. `A >> B`: A properly dominates B.
//! `A . B`: the last terminal of A immediately precedes the first terminal
//! of B. `A $ B`: distinct nodes with the same parent (the virtual root
//! counts). Every node term is a variable; unnamed ones are reported as
//! `_0`, `_1`, ... in order of appearance. A `#name` reference must follow
//! the term that binds it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::export::ExportDocument;
use crate::graph::{NodeId, Parent, Structure, SyntaxGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Attr {
    Cat,
    Func,
    Pos,
    Form,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Pred {
    Test(Attr, String),
    Discont,
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Dominates,
    ImmediatelyDominates,
    Precedes,
    Sibling,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Variable {
    pub name: String,
    pub anonymous: bool,
    pub pred: Pred,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub left: usize,
    pub relation: Relation,
    pub right: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Query {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("query column {column}: {message}")]
pub struct QueryError {
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    LBracket,
    RBracket,
    LParen,
    RParen,
    And,
    Or,
    Not,
    Eq,
    Colon,
    Gt,
    GtGt,
    Dot,
    Dollar,
    Var(String),
    Ident(String),
    Str(String),
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Var(v) => format!("`#{v}`"),
        Tok::Ident(i) => format!("`{i}`"),
        Tok::Str(s) => format!("string {s:?}"),
        Tok::End => "end of query".to_owned(),
        other => {
            let s = match other {
                Tok::LBracket => "[",
                Tok::RBracket => "]",
                Tok::LParen => "(",
                Tok::RParen => ")",
                Tok::And => "&",
                Tok::Or => "|",
                Tok::Not => "!",
                Tok::Eq => "=",
                Tok::Colon => ":",
                Tok::Gt => ">",
                Tok::GtGt => ">>",
                Tok::Dot => ".",
                Tok::Dollar => "$",
                _ => unreachable!(),
            };
            format!("`{s}`")
        }
    }
}

fn qerr(column: usize, message: impl Into<String>) -> QueryError {
    QueryError {
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, QueryError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let is_name = |c: char| c.is_alphanumeric() || c == '_' || c == '-';
    while i < chars.len() {
        let col = i + 1;
        let c = chars[i];
        let single = match c {
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            '!' => Some(Tok::Not),
            '=' => Some(Tok::Eq),
            ':' => Some(Tok::Colon),
            '.' => Some(Tok::Dot),
            '$' => Some(Tok::Dollar),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, col));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '>' {
            if chars.get(i + 1) == Some(&'>') {
                out.push((Tok::GtGt, col));
                i += 2;
            } else {
                out.push((Tok::Gt, col));
                i += 1;
            }
        } else if c == '#' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && is_name(chars[j]) {
                j += 1;
            }
            if j == start {
                return Err(qerr(col, "expected a variable name after `#`"));
            }
            out.push((Tok::Var(chars[start..j].iter().collect()), col));
            i = j;
        } else if c == '"' {
            let mut s = String::new();
            let mut j = i + 1;
            loop {
                match chars.get(j) {
                    None => return Err(qerr(col, "unterminated string")),
                    Some('"') => break,
                    Some('\\') => match chars.get(j + 1) {
                        Some(&e @ ('"' | '\\')) => {
                            s.push(e);
                            j += 2;
                        }
                        _ => return Err(qerr(j + 1, "invalid escape in string")),
                    },
                    Some(&ch) => {
                        s.push(ch);
                        j += 1;
                    }
                }
            }
            out.push((Tok::Str(s), col));
            i = j + 1;
        } else if is_name(c) {
            let mut j = i;
            while j < chars.len() && is_name(chars[j]) {
                j += 1;
            }
            out.push((Tok::Ident(chars[i..j].iter().collect()), col));
            i = j;
        } else {
            return Err(qerr(col, format!("unexpected character `{c}`")));
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: Vec<Variable>,
    named: BTreeMap<String, usize>,
    anonymous: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), QueryError> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(qerr(
                self.column(),
                format!("expected {what}, found {}", describe(self.peek())),
            ))
        }
    }

    fn query(&mut self) -> Result<Vec<Constraint>, QueryError> {
        let mut constraints = Vec::new();
        loop {
            let left = self.term()?;
            let relation = match self.peek() {
                Tok::Gt => Some(Relation::ImmediatelyDominates),
                Tok::GtGt => Some(Relation::Dominates),
                Tok::Dot => Some(Relation::Precedes),
                Tok::Dollar => Some(Relation::Sibling),
                _ => None,
            };
            if let Some(relation) = relation {
                self.next();
                let right = self.term()?;
                constraints.push(Constraint {
                    left,
                    relation,
                    right,
                });
            }
            match self.peek() {
                Tok::And => {
                    self.next();
                }
                Tok::End => return Ok(constraints),
                other => {
                    return Err(qerr(
                        self.column(),
                        format!("expected `&`, a relation or end of query, found {}", describe(other)),
                    ))
                }
            }
        }
    }

    fn term(&mut self) -> Result<usize, QueryError> {
        match self.peek().clone() {
            Tok::Var(name) => {
                let col = self.column();
                self.next();
                if *self.peek() == Tok::Colon {
                    self.next();
                    if self.named.contains_key(&name) {
                        return Err(qerr(col, format!("variable #{name} bound twice")));
                    }
                    let pred = self.node()?;
                    self.vars.push(Variable {
                        name: name.clone(),
                        anonymous: false,
                        pred,
                    });
                    self.named.insert(name, self.vars.len() - 1);
                    Ok(self.vars.len() - 1)
                } else {
                    self.named
                        .get(&name)
                        .copied()
                        .ok_or_else(|| qerr(col, format!("unbound variable #{name}")))
                }
            }
            Tok::LBracket => {
                let pred = self.node()?;
                let name = format!("_{}", self.anonymous);
                self.anonymous += 1;
                self.vars.push(Variable {
                    name,
                    anonymous: true,
                    pred,
                });
                Ok(self.vars.len() - 1)
            }
            other => Err(qerr(
                self.column(),
                format!("expected a node description, found {}", describe(&other)),
            )),
        }
    }

    fn node(&mut self) -> Result<Pred, QueryError> {
        self.expect(Tok::LBracket, "`[`")?;
        let p = self.pred()?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(p)
    }

    fn pred(&mut self) -> Result<Pred, QueryError> {
        let mut left = self.conj()?;
        while *self.peek() == Tok::Or {
            self.next();
            let right = self.conj()?;
            left = Pred::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn conj(&mut self) -> Result<Pred, QueryError> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::And {
            self.next();
            let right = self.unary()?;
            left = Pred::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Pred, QueryError> {
        if *self.peek() == Tok::Not {
            self.next();
            return Ok(Pred::Not(Box::new(self.unary()?)));
        }
        let col = self.column();
        match self.next().0 {
            Tok::LParen => {
                let p = self.pred()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(p)
            }
            Tok::Ident(name) => {
                let attr = match name.as_str() {
                    "discont" => return Ok(Pred::Discont),
                    "cat" => Attr::Cat,
                    "func" => Attr::Func,
                    "pos" => Attr::Pos,
                    "form" => Attr::Form,
                    _ => return Err(qerr(col, format!("unknown attribute `{name}`"))),
                };
                self.expect(Tok::Eq, "`=`")?;
                let col = self.column();
                match self.next().0 {
                    Tok::Str(v) => Ok(Pred::Test(attr, v)),
                    other => Err(qerr(col, format!("expected a string, found {}", describe(&other)))),
                }
            }
            other => Err(qerr(col, format!("expected a predicate, found {}", describe(&other)))),
        }
    }
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: Vec::new(),
        named: BTreeMap::new(),
        anonymous: 0,
    };
    let constraints = p.query()?;
    Ok(Query {
        variables: p.vars,
        constraints,
    })
}

impl Pred {
    pub fn matches(&self, g: &SyntaxGraph, st: &Structure, node: NodeId) -> bool {
        match self {
            Pred::Test(attr, value) => match attr {
                Attr::Cat => g.category(node).is_some_and(|c| c == value.as_str()),
                Attr::Func => g.edge(node).is_some_and(|e| e.label == value.as_str()),
                Attr::Pos => g.token(node).is_some_and(|t| t.pos == value.as_str()),
                Attr::Form => g.token(node).is_some_and(|t| t.form == *value),
            },
            Pred::Discont => st.is_discontinuous(node),
            Pred::And(a, b) => a.matches(g, st, node) && b.matches(g, st, node),
            Pred::Or(a, b) => a.matches(g, st, node) || b.matches(g, st, node),
            Pred::Not(a) => !a.matches(g, st, node),
        }
    }
}

impl Relation {
    pub fn holds(self, g: &SyntaxGraph, st: &Structure, a: NodeId, b: NodeId) -> bool {
        match self {
            Relation::ImmediatelyDominates => g.parent(b) == Some(Parent::Node(a)),
            Relation::Dominates => {
                let mut current = b;
                for _ in 0..=g.nonterminals().len() {
                    match g.parent(current) {
                        Some(Parent::Node(p)) if p == a => return true,
                        Some(Parent::Node(p)) => current = p,
                        _ => return false,
                    }
                }
                false
            }
            Relation::Precedes => match (st.yield_of(a).last(), st.yield_of(b).first()) {
                (Some(&end), Some(&start)) => end + 1 == start,
                _ => false,
            },
            Relation::Sibling => a != b && g.parent(a).is_some() && g.parent(a) == g.parent(b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Match {
    pub sentence_id: String,
    pub bindings: Vec<(String, NodeId)>,
}

/// All binding tuples of one sentence, ordered by the leftmost positions of
/// the bound nodes (in variable order), then by node ids.
pub fn search_graph(g: &SyntaxGraph, q: &Query) -> Vec<Match> {
    let st = g.structure();
    let nodes = g.node_ids();
    let candidates: Vec<Vec<NodeId>> = q
        .variables
        .iter()
        .map(|v| {
            nodes
                .iter()
                .copied()
                .filter(|&n| v.pred.matches(g, &st, n))
                .collect()
        })
        .collect();
    // constraints checkable once variable i is bound
    let mut ready: Vec<Vec<&Constraint>> = vec![Vec::new(); q.variables.len()];
    for c in &q.constraints {
        ready[c.left.max(c.right)].push(c);
    }

    let mut found: Vec<Vec<NodeId>> = Vec::new();
    let mut current: Vec<NodeId> = Vec::with_capacity(q.variables.len());
    fn extend(
        i: usize,
        current: &mut Vec<NodeId>,
        found: &mut Vec<Vec<NodeId>>,
        candidates: &[Vec<NodeId>],
        ready: &[Vec<&Constraint>],
        g: &SyntaxGraph,
        st: &Structure,
    ) {
        if i == candidates.len() {
            found.push(current.clone());
            return;
        }
        for &n in &candidates[i] {
            current.push(n);
            if ready[i]
                .iter()
                .all(|c| c.relation.holds(g, st, current[c.left], current[c.right]))
            {
                extend(i + 1, current, found, candidates, ready, g, st);
            }
            current.pop();
        }
    }
    if !q.variables.is_empty() {
        extend(0, &mut current, &mut found, &candidates, &ready, g, &st);
    }

    found.sort_by_key(|t| {
        let left: Vec<usize> = t.iter().map(|n| st.leftmost(*n).unwrap_or(usize::MAX)).collect();
        (left, t.clone())
    });
    found
        .into_iter()
        .map(|t| Match {
            sentence_id: g.sentence_id().to_owned(),
            bindings: q
                .variables
                .iter()
                .zip(t)
                .map(|(v, n)| (v.name.clone(), n))
                .collect(),
        })
        .collect()
}

pub fn search(corpus: &ExportDocument, q: &Query) -> Vec<Match> {
    corpus
        .sentences
        .iter()
        .flat_map(|g| search_graph(g, q))
        .collect()
}

impl Match {
    /// `sentence<TAB>name=node<TAB>...`
    pub fn to_line(&self) -> String {
        let mut s = self.sentence_id.clone();
        for (name, node) in &self.bindings {
            s.push('\t');
            s.push_str(&format!("{name}={node}"));
        }
        s
    }
}
