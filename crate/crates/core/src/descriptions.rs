//! Service descriptions in a small, closed subset of Turtle.
//!
//! Each description is a top-level blank node:
//!
//! ```text
//! @prefix service: <http://www.pats.ua.ac.be/AALService#> .
//! @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
//!
//! [
//!   service:creationTime "2013-05-12T13:00:00"^^xsd:dateTime ;
//!   service:endTime "2013-05-12T21:00:00"^^xsd:dateTime ;
//!   service:hasCreator <http://www.pats.ua.ac.be/aal/user/15441#this> ;
//!   service:provide service:Walking ;
//!   service:startTime "2013-05-12T17:00:00"^^xsd:dateTime
//! ] .
//! ```
//!
//! The parser also accepts two irregularities found in hand-written records:
//! a dangling `a` right after the opening bracket, and a location block whose
//! predicate and object are split by a stray `;`.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default binding of the `service:` prefix.
pub const SERVICE_NS: &str = "http://www.pats.ua.ac.be/AALService#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";
/// Predicate linking a location block to the place it lies in.
pub const LOCATED_IN: &str = "http://dbpedia.org/ontology/location";

const DATE_TIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%S%.f";

pub type Timestamp = NaiveDateTime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("description has neither `provide` nor `request`")]
    NoService,
    #[error("start time {start} is after end time {end}")]
    TimeOrder { start: String, end: String },
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("invalid IRI `{0}`")]
    InvalidIri(String),
    #[error("invalid service type name `{0}`")]
    InvalidTypeName(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescriptionError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("invalid description at byte {offset}: {source}")]
    Invalid {
        offset: usize,
        #[source]
        source: ValidationError,
    },
}

impl DescriptionError {
    fn parse(offset: usize, message: impl Into<String>) -> Self {
        DescriptionError::Parse {
            offset,
            message: message.into(),
        }
    }
}

/// Where a service takes place.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocationSpec {
    pub place_class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub located_in: Option<String>,
}

/// Which side(s) of an exchange a description takes part in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    ProviderOnly,
    RequesterOnly,
    Mutualistic,
}

/// One published provide/request record.
///
/// Always valid: at least one of `provide`/`request` is present and
/// `start_time <= end_time`. Build one with [`ServiceDescription::builder`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ServiceDescription {
    creation_time: Timestamp,
    start_time: Timestamp,
    end_time: Timestamp,
    creator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    location: Option<LocationSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    provide: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    request: Option<String>,
}

impl ServiceDescription {
    pub fn builder(creator: impl Into<String>) -> DescriptionBuilder {
        DescriptionBuilder {
            creator: Some(creator.into()),
            ..DescriptionBuilder::default()
        }
    }

    pub fn creation_time(&self) -> Timestamp {
        self.creation_time
    }

    pub fn start_time(&self) -> Timestamp {
        self.start_time
    }

    pub fn end_time(&self) -> Timestamp {
        self.end_time
    }

    pub fn creator(&self) -> &str {
        &self.creator
    }

    pub fn location(&self) -> Option<&LocationSpec> {
        self.location.as_ref()
    }

    pub fn provide(&self) -> Option<&str> {
        self.provide.as_deref()
    }

    pub fn request(&self) -> Option<&str> {
        self.request.as_deref()
    }

    pub fn classify(&self) -> Role {
        match (&self.provide, &self.request) {
            (Some(_), Some(_)) => Role::Mutualistic,
            (Some(_), None) => Role::ProviderOnly,
            (None, Some(_)) => Role::RequesterOnly,
            (None, None) => unreachable!("validated descriptions name a service"),
        }
    }

    /// Closed-interval overlap of the `[start, end]` windows.
    pub fn overlaps(&self, other: &ServiceDescription) -> bool {
        self.start_time <= other.end_time && other.start_time <= self.end_time
    }

    /// Copy with the request side removed. `None` if that would leave the
    /// description without any service.
    pub fn without_request(&self) -> Option<ServiceDescription> {
        self.provide.as_ref()?;
        Some(ServiceDescription {
            request: None,
            ..self.clone()
        })
    }

    pub fn to_turtle(&self) -> String {
        serialize_description(self)
    }
}

pub fn classify(d: &ServiceDescription) -> Role {
    d.classify()
}

#[derive(Debug, Clone, Default)]
pub struct DescriptionBuilder {
    creation_time: Option<Timestamp>,
    start_time: Option<Timestamp>,
    end_time: Option<Timestamp>,
    creator: Option<String>,
    location: Option<LocationSpec>,
    provide: Option<String>,
    request: Option<String>,
}

impl DescriptionBuilder {
    pub fn creation_time(mut self, t: Timestamp) -> Self {
        self.creation_time = Some(t);
        self
    }

    pub fn start_time(mut self, t: Timestamp) -> Self {
        self.start_time = Some(t);
        self
    }

    pub fn end_time(mut self, t: Timestamp) -> Self {
        self.end_time = Some(t);
        self
    }

    /// Sets creation, start and end in one go.
    pub fn window(self, created: Timestamp, start: Timestamp, end: Timestamp) -> Self {
        self.creation_time(created).start_time(start).end_time(end)
    }

    pub fn location(mut self, loc: LocationSpec) -> Self {
        self.location = Some(loc);
        self
    }

    pub fn provide(mut self, ty: impl Into<String>) -> Self {
        self.provide = Some(ty.into());
        self
    }

    pub fn request(mut self, ty: impl Into<String>) -> Self {
        self.request = Some(ty.into());
        self
    }

    pub fn build(self) -> Result<ServiceDescription, ValidationError> {
        let creator = self.creator.ok_or(ValidationError::MissingField("hasCreator"))?;
        let creation_time = self
            .creation_time
            .ok_or(ValidationError::MissingField("creationTime"))?;
        let start_time = self
            .start_time
            .ok_or(ValidationError::MissingField("startTime"))?;
        let end_time = self.end_time.ok_or(ValidationError::MissingField("endTime"))?;
        check_iri(&creator)?;
        if let Some(loc) = &self.location {
            check_iri(&loc.place_class)?;
            if let Some(place) = &loc.located_in {
                check_iri(place)?;
            }
        }
        let provide = self.provide.map(normalize_type).transpose()?;
        let request = self.request.map(normalize_type).transpose()?;
        if provide.is_none() && request.is_none() {
            return Err(ValidationError::NoService);
        }
        if start_time > end_time {
            return Err(ValidationError::TimeOrder {
                start: format_timestamp(&start_time),
                end: format_timestamp(&end_time),
            });
        }
        Ok(ServiceDescription {
            creation_time,
            start_time,
            end_time,
            creator,
            location: self.location,
            provide,
            request,
        })
    }
}

fn is_iri_char(c: char) -> bool {
    !(c.is_whitespace() || c.is_control() || "<>\"{}|^`\\".contains(c))
}

fn check_iri(iri: &str) -> Result<(), ValidationError> {
    if iri.contains(':') && iri.chars().all(is_iri_char) {
        Ok(())
    } else {
        Err(ValidationError::InvalidIri(iri.to_owned()))
    }
}

/// Type names under the default service namespace are stored by local name.
fn normalize_type(ty: String) -> Result<String, ValidationError> {
    let ty = match ty.strip_prefix(SERVICE_NS) {
        Some(local) => local.to_owned(),
        None => ty,
    };
    if ty.is_empty() || !ty.chars().all(is_iri_char) {
        return Err(ValidationError::InvalidTypeName(ty));
    }
    Ok(ty)
}

pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    NaiveDateTime::parse_from_str(s, DATE_TIME_FORMAT).ok()
}

pub fn format_timestamp(t: &Timestamp) -> String {
    t.format(DATE_TIME_FORMAT).to_string()
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    PrefixKw,
    Iri(String),
    PName(String, String),
    Literal(String, Option<Box<Tok>>),
    A,
    LBracket,
    RBracket,
    Semi,
    Dot,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.'
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn tokenize(mut self) -> Result<Vec<(usize, Tok)>, DescriptionError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let start = self.pos;
            let Some(c) = self.peek() else { break };
            let tok = match c {
                '[' => {
                    self.bump();
                    Tok::LBracket
                }
                ']' => {
                    self.bump();
                    Tok::RBracket
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                '.' => {
                    self.bump();
                    Tok::Dot
                }
                '<' => self.iri()?,
                '"' => self.literal()?,
                '@' => {
                    self.bump();
                    let word = self.word();
                    if word != "prefix" {
                        return Err(DescriptionError::parse(
                            start,
                            format!("unsupported directive `@{word}`"),
                        ));
                    }
                    Tok::PrefixKw
                }
                _ if is_name_char(c) || c == ':' => self.name(start)?,
                _ => {
                    return Err(DescriptionError::parse(
                        start,
                        format!("unexpected character `{c}`"),
                    ))
                }
            };
            out.push((start, tok));
        }
        Ok(out)
    }

    fn word(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_alphanumeric()) {
            self.bump();
        }
        &self.src[start..self.pos]
    }

    fn iri(&mut self) -> Result<Tok, DescriptionError> {
        let start = self.pos;
        self.bump();
        let body_start = self.pos;
        loop {
            match self.bump() {
                Some('>') => break,
                Some(c) if is_iri_char(c) => {}
                Some(c) => {
                    return Err(DescriptionError::parse(
                        self.pos - c.len_utf8(),
                        format!("character `{}` not allowed in IRI", c.escape_debug()),
                    ))
                }
                None => return Err(DescriptionError::parse(start, "unterminated IRI")),
            }
        }
        Ok(Tok::Iri(self.src[body_start..self.pos - 1].to_owned()))
    }

    fn literal(&mut self) -> Result<Tok, DescriptionError> {
        let start = self.pos;
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('"') => value.push('"'),
                    Some('\\') => value.push('\\'),
                    Some('n') => value.push('\n'),
                    Some('t') => value.push('\t'),
                    _ => return Err(DescriptionError::parse(self.pos, "bad escape in literal")),
                },
                Some('\n') | None => {
                    return Err(DescriptionError::parse(start, "unterminated string literal"))
                }
                Some(c) => value.push(c),
            }
        }
        let datatype = if self.src[self.pos..].starts_with("^^") {
            self.pos += 2;
            let dt_start = self.pos;
            let dt = match self.peek() {
                Some('<') => self.iri()?,
                Some(c) if is_name_char(c) || c == ':' => self.name(dt_start)?,
                _ => return Err(DescriptionError::parse(dt_start, "expected datatype after `^^`")),
            };
            Some(Box::new(dt))
        } else if self.peek() == Some('@') {
            return Err(DescriptionError::parse(self.pos, "language-tagged literals are not supported"));
        } else {
            None
        };
        Ok(Tok::Literal(value, datatype))
    }

    fn name(&mut self, start: usize) -> Result<Tok, DescriptionError> {
        while matches!(self.peek(), Some(c) if is_name_char(c) || c == ':') {
            self.bump();
        }
        // A trailing dot terminates the statement, it is not part of the name.
        while self.pos > start && self.src[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        let text = &self.src[start..self.pos];
        if text == "a" {
            return Ok(Tok::A);
        }
        match text.split_once(':') {
            Some((prefix, local)) if !local.contains(':') => {
                Ok(Tok::PName(prefix.to_owned(), local.to_owned()))
            }
            _ => Err(DescriptionError::parse(start, format!("unexpected bare word `{text}`"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Parser

#[derive(Debug, Clone)]
enum Term {
    A,
    Iri(String),
    Literal(String, Option<String>),
    Block(Vec<Statement>),
}

#[derive(Debug, Clone)]
struct Node {
    offset: usize,
    term: Term,
}

type Statement = Vec<Node>;

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    prefixes: HashMap<String, String>,
}

impl Parser {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_dot(&mut self) -> Result<(), DescriptionError> {
        let at = self.offset();
        match self.next() {
            Some((_, Tok::Dot)) => Ok(()),
            _ => Err(DescriptionError::parse(at, "expected `.`")),
        }
    }

    fn resolve_pname(&self, offset: usize, prefix: &str, local: &str) -> Result<String, DescriptionError> {
        match self.prefixes.get(prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(DescriptionError::parse(offset, format!("undeclared prefix `{prefix}:`"))),
        }
    }

    fn resolve(&self, offset: usize, tok: &Tok) -> Result<String, DescriptionError> {
        match tok {
            Tok::Iri(iri) => Ok(iri.clone()),
            Tok::PName(p, l) => self.resolve_pname(offset, p, l),
            _ => Err(DescriptionError::parse(offset, "expected an IRI")),
        }
    }

    fn document(&mut self) -> Result<Vec<ServiceDescription>, DescriptionError> {
        let mut out = Vec::new();
        while let Some((offset, tok)) = self.next() {
            match tok {
                Tok::PrefixKw => {
                    let at = self.offset();
                    let prefix = match self.next() {
                        Some((_, Tok::PName(p, l))) if l.is_empty() => p,
                        _ => return Err(DescriptionError::parse(at, "expected prefix name like `service:`")),
                    };
                    let at = self.offset();
                    let ns = match self.next() {
                        Some((_, Tok::Iri(ns))) => ns,
                        _ => return Err(DescriptionError::parse(at, "expected namespace IRI")),
                    };
                    self.expect_dot()?;
                    self.prefixes.insert(prefix, ns);
                }
                Tok::LBracket => {
                    let stmts = self.block(offset)?;
                    self.expect_dot()?;
                    out.push(self.interpret_record(offset, &stmts)?);
                }
                _ => {
                    return Err(DescriptionError::parse(
                        offset,
                        "expected `@prefix` or a `[` description block",
                    ))
                }
            }
        }
        Ok(out)
    }

    /// Parses up to and including the closing `]`; the `[` is already consumed.
    fn block(&mut self, open: usize) -> Result<Vec<Statement>, DescriptionError> {
        let mut stmts = Vec::new();
        let mut current = Vec::new();
        loop {
            let Some((offset, tok)) = self.next() else {
                return Err(DescriptionError::parse(open, "unclosed `[`"));
            };
            let term = match tok {
                Tok::RBracket => {
                    if !current.is_empty() {
                        stmts.push(current);
                    }
                    return Ok(stmts);
                }
                Tok::Semi => {
                    if !current.is_empty() {
                        stmts.push(std::mem::take(&mut current));
                    }
                    continue;
                }
                Tok::A => Term::A,
                Tok::LBracket => Term::Block(self.block(offset)?),
                Tok::Iri(_) | Tok::PName(..) => Term::Iri(self.resolve(offset, &tok)?),
                Tok::Literal(value, dt) => {
                    let dt = dt.map(|d| self.resolve(offset, &d)).transpose()?;
                    Term::Literal(value, dt)
                }
                Tok::Dot | Tok::PrefixKw => {
                    return Err(DescriptionError::parse(offset, "unexpected token inside `[ ]`"))
                }
            };
            current.push(Node { offset, term });
        }
    }

    fn service_ns(&self) -> &str {
        self.prefixes.get("service").map_or(SERVICE_NS, String::as_str)
    }

    fn predicate_name<'n>(&self, node: &'n Node) -> Option<&'n str> {
        let Term::Iri(iri) = &node.term else { return None };
        let local = iri.strip_prefix(self.service_ns())?;
        PREDICATES.contains(&local).then_some(local)
    }

    fn interpret_record(&self, offset: usize, stmts: &[Statement]) -> Result<ServiceDescription, DescriptionError> {
        let mut fields: HashMap<&str, &Node> = HashMap::new();
        for (i, stmt) in stmts.iter().enumerate() {
            let (pred, obj) = match stmt.as_slice() {
                // `[ a service:creationTime ...` : the `a` has no object of its own.
                [a, p, o] if i == 0 && matches!(a.term, Term::A) && self.predicate_name(p).is_some() => (p, o),
                // rdf:type statements carry nothing we model.
                [a, _] if matches!(a.term, Term::A) => continue,
                [p, o] => (p, o),
                _ => {
                    let at = stmt.first().map_or(offset, |n| n.offset);
                    return Err(DescriptionError::parse(at, "expected a predicate-object pair"));
                }
            };
            let Some(name) = self.predicate_name(pred) else {
                return Err(DescriptionError::parse(pred.offset, "unrecognized predicate"));
            };
            if fields.insert(name, obj).is_some() {
                return Err(DescriptionError::parse(pred.offset, format!("duplicate predicate `{name}`")));
            }
        }

        let mut b = DescriptionBuilder::default();
        for (name, node) in &fields {
            b = match *name {
                "creationTime" => b.creation_time(datetime(node)?),
                "startTime" => b.start_time(datetime(node)?),
                "endTime" => b.end_time(datetime(node)?),
                "hasCreator" => {
                    b.creator = Some(iri(node)?);
                    b
                }
                "hasServiceLocation" => b.location(location(node)?),
                "provide" => b.provide(self.type_name(node)?),
                "request" => b.request(self.type_name(node)?),
                _ => unreachable!(),
            };
        }
        b.build()
            .map_err(|source| DescriptionError::Invalid { offset, source })
    }

    fn type_name(&self, node: &Node) -> Result<String, DescriptionError> {
        let full = iri(node)?;
        Ok(match full.strip_prefix(self.service_ns()) {
            Some(local) if !local.is_empty() => local.to_owned(),
            _ => full,
        })
    }
}

const PREDICATES: [&str; 7] = [
    "creationTime",
    "endTime",
    "hasCreator",
    "hasServiceLocation",
    "provide",
    "request",
    "startTime",
];

fn iri(node: &Node) -> Result<String, DescriptionError> {
    match &node.term {
        Term::Iri(i) => Ok(i.clone()),
        _ => Err(DescriptionError::parse(node.offset, "expected an IRI")),
    }
}

fn datetime(node: &Node) -> Result<Timestamp, DescriptionError> {
    let xsd_dt = format!("{XSD_NS}dateTime");
    match &node.term {
        Term::Literal(v, Some(dt)) if *dt == xsd_dt => parse_timestamp(v)
            .ok_or_else(|| DescriptionError::parse(node.offset, format!("bad xsd:dateTime `{v}`"))),
        _ => Err(DescriptionError::parse(node.offset, "expected an xsd:dateTime literal")),
    }
}

fn location(node: &Node) -> Result<LocationSpec, DescriptionError> {
    let Term::Block(stmts) = &node.term else {
        return Err(DescriptionError::parse(node.offset, "expected a `[ ]` location block"));
    };
    let mut place_class = None;
    let mut located_in = None;
    let mut i = 0;
    while i < stmts.len() {
        let stmt = &stmts[i];
        let (pred, obj) = match stmt.as_slice() {
            [a, class] if matches!(a.term, Term::A) => {
                if place_class.replace(iri(class)?).is_some() {
                    return Err(DescriptionError::parse(a.offset, "location has two place classes"));
                }
                i += 1;
                continue;
            }
            [p, o] => (p, o),
            // predicate and object split by a stray `;`
            [p] if i + 1 < stmts.len() && stmts[i + 1].len() == 1 => {
                i += 1;
                (p, &stmts[i][0])
            }
            _ => {
                let at = stmt.first().map_or(node.offset, |n| n.offset);
                return Err(DescriptionError::parse(at, "malformed location block"));
            }
        };
        if iri(pred)? != LOCATED_IN {
            return Err(DescriptionError::parse(pred.offset, "unrecognized location predicate"));
        }
        if located_in.replace(iri(obj)?).is_some() {
            return Err(DescriptionError::parse(pred.offset, "location has two places"));
        }
        i += 1;
    }
    let place_class = place_class
        .ok_or_else(|| DescriptionError::parse(node.offset, "location block has no `a <class>`"))?;
    Ok(LocationSpec {
        place_class,
        located_in,
    })
}

/// Parses every description block in `text`.
pub fn parse_descriptions(text: &str) -> Result<Vec<ServiceDescription>, DescriptionError> {
    let toks = Lexer { src: text, pos: 0 }.tokenize()?;
    let mut prefixes = HashMap::new();
    prefixes.insert("service".to_owned(), SERVICE_NS.to_owned());
    prefixes.insert("xsd".to_owned(), XSD_NS.to_owned());
    Parser {
        toks,
        pos: 0,
        end: text.len(),
        prefixes,
    }
    .document()
}

// ---------------------------------------------------------------------------
// Serializer

const PREFIX_BLOCK: &str = concat!(
    "@prefix service: <http://www.pats.ua.ac.be/AALService#> .\n",
    "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n",
);

fn is_plain_local(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphanumeric() || c == '_')
        && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-')
}

fn write_type(out: &mut String, ty: &str) {
    if is_plain_local(ty) {
        let _ = write!(out, "service:{ty}");
    } else if ty.contains(':') {
        let _ = write!(out, "<{ty}>");
    } else {
        let _ = write!(out, "<{SERVICE_NS}{ty}>");
    }
}

fn write_block(out: &mut String, d: &ServiceDescription) {
    let dt = |t: &Timestamp| format!("\"{}\"^^xsd:dateTime", format_timestamp(t));
    let mut lines: Vec<String> = Vec::with_capacity(7);
    lines.push(format!("service:creationTime {}", dt(&d.creation_time)));
    lines.push(format!("service:endTime {}", dt(&d.end_time)));
    lines.push(format!("service:hasCreator <{}>", d.creator));
    if let Some(loc) = &d.location {
        let mut s = format!("service:hasServiceLocation [\n    a <{}>", loc.place_class);
        if let Some(place) = &loc.located_in {
            let _ = write!(s, " ;\n    <{LOCATED_IN}> <{place}>");
        }
        s.push_str("\n  ]");
        lines.push(s);
    }
    if let Some(p) = &d.provide {
        let mut s = String::from("service:provide ");
        write_type(&mut s, p);
        lines.push(s);
    }
    if let Some(r) = &d.request {
        let mut s = String::from("service:request ");
        write_type(&mut s, r);
        lines.push(s);
    }
    lines.push(format!("service:startTime {}", dt(&d.start_time)));

    out.push_str("[\n");
    let n = lines.len();
    for (i, line) in lines.into_iter().enumerate() {
        out.push_str("  ");
        out.push_str(&line);
        out.push_str(if i + 1 < n { " ;\n" } else { "\n" });
    }
    out.push_str("] .\n");
}

/// Canonical Turtle for one description: fixed prefix block, predicates in
/// lexicographic order, two-space indentation.
pub fn serialize_description(d: &ServiceDescription) -> String {
    serialize_descriptions(std::slice::from_ref(d))
}

pub fn serialize_descriptions(ds: &[ServiceDescription]) -> String {
    let mut out = String::from(PREFIX_BLOCK);
    for d in ds {
        out.push('\n');
        write_block(&mut out, d);
    }
    out
}

impl fmt::Display for ServiceDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_description(self))
    }
}
