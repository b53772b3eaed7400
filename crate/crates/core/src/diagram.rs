//! UML class diagrams and the line-oriented `.ucd` text format.
//!
//! ```text
//! diagram "Hardware"
//! # comment
//! class "System unit"
//!     attr "serial" : "String"
//!     op "boot"
//! class "Memory"
//! compose "System unit" "Memory"
//! ```

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationKind {
    Inheritance,
    Aggregation,
    Composition,
    Association,
}

impl RelationKind {
    pub const ALL: [RelationKind; 4] = [
        RelationKind::Inheritance,
        RelationKind::Aggregation,
        RelationKind::Composition,
        RelationKind::Association,
    ];

    /// Keyword used for this kind in `.ucd` files.
    pub fn keyword(self) -> &'static str {
        match self {
            RelationKind::Inheritance => "inherit",
            RelationKind::Aggregation => "aggregate",
            RelationKind::Composition => "compose",
            RelationKind::Association => "assoc",
        }
    }

    fn from_keyword(word: &str) -> Option<Self> {
        RelationKind::ALL.into_iter().find(|k| k.keyword() == word)
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub type_name: String,
}

impl Attribute {
    pub fn new(name: impl Into<String>, type_name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            type_name: type_name.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UmlClass {
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub operations: Vec<String>,
}

impl UmlClass {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            attributes: Vec::new(),
            operations: Vec::new(),
        }
    }

    pub fn with_attribute(mut self, name: impl Into<String>, type_name: impl Into<String>) -> Self {
        self.attributes.push(Attribute::new(name, type_name));
        self
    }
}

/// A directed relationship. For `Inheritance` the source is the child; for
/// `Composition` and `Aggregation` the source is the whole.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UmlRelationship {
    pub source: String,
    pub target: String,
    pub kind: RelationKind,
}

impl UmlRelationship {
    pub fn new(source: impl Into<String>, target: impl Into<String>, kind: RelationKind) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            kind,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("duplicate class {0:?}")]
    DuplicateClass(String),
    #[error("class name must not be empty")]
    EmptyClassName,
    #[error("duplicate attribute {attribute:?} in class {class:?}")]
    DuplicateAttribute { class: String, attribute: String },
    #[error("relationship endpoint {0:?} is not a declared class")]
    DanglingEndpoint(String),
    #[error("class {0:?} cannot inherit from itself")]
    SelfInheritance(String),
    #[error("duplicate {kind} relationship {from:?} -> {to:?}")]
    DuplicateRelationship {
        from: String,
        to: String,
        kind: RelationKind,
    },
}

/// A validated class diagram.
///
/// Equality ignores the order of classes and relationships; attribute and
/// operation order inside a class is significant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassDiagram {
    name: String,
    classes: Vec<UmlClass>,
    relationships: Vec<UmlRelationship>,
}

impl ClassDiagram {
    pub fn new(
        name: impl Into<String>,
        classes: Vec<UmlClass>,
        relationships: Vec<UmlRelationship>,
    ) -> Result<Self, DiagramError> {
        let mut names = HashSet::new();
        for class in &classes {
            if class.name.is_empty() {
                return Err(DiagramError::EmptyClassName);
            }
            if !names.insert(class.name.as_str()) {
                return Err(DiagramError::DuplicateClass(class.name.clone()));
            }
            let mut attrs = HashSet::new();
            for attr in &class.attributes {
                if !attrs.insert(attr.name.as_str()) {
                    return Err(DiagramError::DuplicateAttribute {
                        class: class.name.clone(),
                        attribute: attr.name.clone(),
                    });
                }
            }
        }
        let mut seen = HashSet::new();
        for rel in &relationships {
            for end in [&rel.source, &rel.target] {
                if !names.contains(end.as_str()) {
                    return Err(DiagramError::DanglingEndpoint(end.clone()));
                }
            }
            if rel.kind == RelationKind::Inheritance && rel.source == rel.target {
                return Err(DiagramError::SelfInheritance(rel.source.clone()));
            }
            if !seen.insert(rel) {
                return Err(DiagramError::DuplicateRelationship {
                    from: rel.source.clone(),
                    to: rel.target.clone(),
                    kind: rel.kind,
                });
            }
        }
        Ok(Self {
            name: name.into(),
            classes,
            relationships,
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            classes: Vec::new(),
            relationships: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn classes(&self) -> &[UmlClass] {
        &self.classes
    }

    pub fn relationships(&self) -> &[UmlRelationship] {
        &self.relationships
    }

    pub fn class(&self, name: &str) -> Option<&UmlClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Copy with classes sorted by name and relationships sorted by
    /// (source, target, kind).
    pub fn normalized(&self) -> ClassDiagram {
        let mut classes = self.classes.clone();
        classes.sort_by(|a, b| a.name.cmp(&b.name));
        let mut relationships = self.relationships.clone();
        relationships.sort();
        ClassDiagram {
            name: self.name.clone(),
            classes,
            relationships,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl PartialEq for ClassDiagram {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.normalized(), other.normalized());
        a.name == b.name && a.classes == b.classes && a.relationships == b.relationships
    }
}

impl Eq for ClassDiagram {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
    #[error(transparent)]
    Invalid(#[from] DiagramError),
}

/// A `.ucd` parse failure. `line` and `column` are 1-based.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn syntax(line: usize, column: usize, msg: impl Into<String>) -> Self {
        Self {
            line,
            column,
            kind: ParseErrorKind::Syntax(msg.into()),
        }
    }

    fn invalid(line: usize, column: usize, err: DiagramError) -> Self {
        Self {
            line,
            column,
            kind: ParseErrorKind::Invalid(err),
        }
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Word(String),
    Quoted(String),
    Colon,
}

/// Splits one line into tokens, stopping at an unquoted `#`.
/// Returns (column, token) pairs with 1-based character columns.
fn tokenize(line: &str, line_no: usize) -> Result<Vec<(usize, Token)>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().enumerate().peekable();
    while let Some(&(idx, ch)) = chars.peek() {
        let col = idx + 1;
        match ch {
            '#' => break,
            c if c.is_whitespace() => {
                chars.next();
            }
            ':' => {
                chars.next();
                tokens.push((col, Token::Colon));
            }
            '"' => {
                chars.next();
                let mut value = String::new();
                let mut closed = false;
                while let Some((_, c)) = chars.next() {
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => match chars.next() {
                            Some((_, '"')) => value.push('"'),
                            Some((_, '\\')) => value.push('\\'),
                            Some((i, other)) => {
                                return Err(ParseError::syntax(
                                    line_no,
                                    i + 1,
                                    format!("unknown escape \\{other}"),
                                ))
                            }
                            None => break,
                        },
                        c => value.push(c),
                    }
                }
                if !closed {
                    return Err(ParseError::syntax(line_no, col, "unterminated string"));
                }
                tokens.push((col, Token::Quoted(value)));
            }
            _ => {
                let mut word = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || c == '"' || c == ':' || c == '#' {
                        break;
                    }
                    word.push(c);
                    chars.next();
                }
                tokens.push((col, Token::Word(word)));
            }
        }
    }
    Ok(tokens)
}

fn expect_quoted(
    tokens: &[(usize, Token)],
    pos: usize,
    line_no: usize,
    line_len: usize,
    what: &str,
) -> Result<String, ParseError> {
    match tokens.get(pos) {
        Some((_, Token::Quoted(s))) => Ok(s.clone()),
        Some((col, _)) => Err(ParseError::syntax(
            line_no,
            *col,
            format!("expected quoted {what}"),
        )),
        None => Err(ParseError::syntax(
            line_no,
            line_len + 1,
            format!("expected quoted {what}"),
        )),
    }
}

fn expect_end(tokens: &[(usize, Token)], pos: usize, line_no: usize) -> Result<(), ParseError> {
    match tokens.get(pos) {
        None => Ok(()),
        Some((col, _)) => Err(ParseError::syntax(
            line_no,
            *col,
            "unexpected trailing input",
        )),
    }
}

/// Parses raw bytes, reporting invalid UTF-8 as a positioned error.
pub fn parse_diagram_bytes(bytes: &[u8]) -> Result<ClassDiagram, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_diagram(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
            let line_start = valid.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
            let column = String::from_utf8_lossy(&valid[line_start..])
                .chars()
                .count()
                + 1;
            Err(ParseError {
                line,
                column,
                kind: ParseErrorKind::InvalidUtf8,
            })
        }
    }
}

pub fn parse_diagram(text: &str) -> Result<ClassDiagram, ParseError> {
    let mut name: Option<String> = None;
    let mut classes: Vec<UmlClass> = Vec::new();
    let mut relationships: Vec<UmlRelationship> = Vec::new();
    let mut rel_lines: Vec<(usize, usize)> = Vec::new();
    // Whether the previous non-blank line belonged to a class block.
    let mut in_class = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let tokens = tokenize(line, line_no)?;
        let Some((col, head)) = tokens.first() else {
            continue;
        };
        let col = *col;
        let indented = line.starts_with(char::is_whitespace);
        let line_len = line.chars().count();
        let keyword = match head {
            Token::Word(w) => w.as_str(),
            _ => return Err(ParseError::syntax(line_no, col, "expected a keyword")),
        };

        if name.is_none() {
            if keyword != "diagram" {
                return Err(ParseError::syntax(
                    line_no,
                    col,
                    "first statement must be `diagram \"<name>\"`",
                ));
            }
            let n = expect_quoted(&tokens, 1, line_no, line_len, "diagram name")?;
            expect_end(&tokens, 2, line_no)?;
            name = Some(n);
            continue;
        }

        match keyword {
            "diagram" => {
                return Err(ParseError::syntax(
                    line_no,
                    col,
                    "duplicate `diagram` header",
                ));
            }
            "class" => {
                let n = expect_quoted(&tokens, 1, line_no, line_len, "class name")?;
                expect_end(&tokens, 2, line_no)?;
                if n.is_empty() {
                    return Err(ParseError::invalid(
                        line_no,
                        col,
                        DiagramError::EmptyClassName,
                    ));
                }
                if classes.iter().any(|c| c.name == n) {
                    return Err(ParseError::invalid(
                        line_no,
                        col,
                        DiagramError::DuplicateClass(n),
                    ));
                }
                classes.push(UmlClass::new(n));
                in_class = true;
            }
            "attr" | "op" => {
                let owner = match classes.last_mut() {
                    Some(c) if in_class && indented => c,
                    _ => {
                        return Err(ParseError::syntax(
                            line_no,
                            col,
                            format!("`{keyword}` must be an indented line inside a class block"),
                        ))
                    }
                };
                if keyword == "attr" {
                    let attr = expect_quoted(&tokens, 1, line_no, line_len, "attribute name")?;
                    match tokens.get(2) {
                        Some((_, Token::Colon)) => {}
                        Some((c, _)) => {
                            return Err(ParseError::syntax(line_no, *c, "expected `:`"))
                        }
                        None => {
                            return Err(ParseError::syntax(line_no, line_len + 1, "expected `:`"))
                        }
                    }
                    let ty = expect_quoted(&tokens, 3, line_no, line_len, "attribute type")?;
                    expect_end(&tokens, 4, line_no)?;
                    if owner.attributes.iter().any(|a| a.name == attr) {
                        return Err(ParseError::invalid(
                            line_no,
                            col,
                            DiagramError::DuplicateAttribute {
                                class: owner.name.clone(),
                                attribute: attr,
                            },
                        ));
                    }
                    owner.attributes.push(Attribute::new(attr, ty));
                } else {
                    let op = expect_quoted(&tokens, 1, line_no, line_len, "operation name")?;
                    expect_end(&tokens, 2, line_no)?;
                    owner.operations.push(op);
                }
                continue;
            }
            other => {
                let Some(kind) = RelationKind::from_keyword(other) else {
                    return Err(ParseError::syntax(
                        line_no,
                        col,
                        format!("unknown keyword `{other}`"),
                    ));
                };
                let source = expect_quoted(&tokens, 1, line_no, line_len, "source class")?;
                let target = expect_quoted(&tokens, 2, line_no, line_len, "target class")?;
                expect_end(&tokens, 3, line_no)?;
                relationships.push(UmlRelationship::new(source, target, kind));
                rel_lines.push((line_no, col));
                in_class = false;
            }
        }
    }

    let Some(name) = name else {
        return Err(ParseError::syntax(
            1,
            1,
            "missing `diagram \"<name>\"` header",
        ));
    };

    // Endpoints may reference classes declared later, so relationship checks
    // run once all classes are known.
    let names: HashSet<&str> = classes.iter().map(|c| c.name.as_str()).collect();
    let mut seen = HashSet::new();
    for (rel, &(line, col)) in relationships.iter().zip(&rel_lines) {
        for end in [&rel.source, &rel.target] {
            if !names.contains(end.as_str()) {
                return Err(ParseError::invalid(
                    line,
                    col,
                    DiagramError::DanglingEndpoint(end.clone()),
                ));
            }
        }
        if rel.kind == RelationKind::Inheritance && rel.source == rel.target {
            return Err(ParseError::invalid(
                line,
                col,
                DiagramError::SelfInheritance(rel.source.clone()),
            ));
        }
        if !seen.insert(rel) {
            return Err(ParseError::invalid(
                line,
                col,
                DiagramError::DuplicateRelationship {
                    from: rel.source.clone(),
                    to: rel.target.clone(),
                    kind: rel.kind,
                },
            ));
        }
    }

    ClassDiagram::new(name, classes, relationships).map_err(|e| ParseError::invalid(1, 1, e))
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Writes `d` in `.ucd` form with classes and relationships in sorted order.
pub fn serialize_diagram(d: &ClassDiagram) -> String {
    let d = d.normalized();
    let mut out = format!("diagram {}\n", quote(&d.name));
    for class in &d.classes {
        out.push_str(&format!("class {}\n", quote(&class.name)));
        for attr in &class.attributes {
            out.push_str(&format!(
                "    attr {} : {}\n",
                quote(&attr.name),
                quote(&attr.type_name)
            ));
        }
        for op in &class.operations {
            out.push_str(&format!("    op {}\n", quote(op)));
        }
    }
    for rel in &d.relationships {
        out.push_str(&format!(
            "{} {} {}\n",
            rel.kind.keyword(),
            quote(&rel.source),
            quote(&rel.target)
        ));
    }
    out
}

/// True when the `Inheritance` edges contain no directed cycle.
pub fn inheritance_is_acyclic(d: &ClassDiagram) -> bool {
    let edges: Vec<(&str, &str)> = d
        .relationships
        .iter()
        .filter(|r| r.kind == RelationKind::Inheritance)
        .map(|r| (r.source.as_str(), r.target.as_str()))
        .collect();
    let nodes: BTreeSet<&str> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    crate::graph::is_acyclic(nodes.into_iter(), edges.into_iter())
}
