//! Finite relational models: a domain of named elements plus unary and
//! binary relations over it.
//!
//! Models are immutable after construction and validate their invariants
//! (non-empty domain, members drawn from the domain, well-formed names).
//! All iteration orders are lexicographic so every downstream algorithm is
//! deterministic.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Names that the formula grammar claims as keywords; a relation with one of
/// these names could never be rendered back into parseable formula text.
const RESERVED_NAMES: [&str; 3] = ["T", "some", "ex"];

/// Identifier of a domain element. Cheap to clone; ordered lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId(Arc<str>);

impl ElementId {
    pub fn new(name: impl AsRef<str>) -> Self {
        ElementId(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for ElementId {
    fn from(s: &str) -> Self {
        ElementId::new(s)
    }
}

impl Borrow<str> for ElementId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// True iff `s` matches `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("invalid identifier `{0}`")]
    InvalidIdent(String),
    #[error("`{0}` is a reserved name and cannot name a relation")]
    ReservedName(String),
    #[error("domain must not be empty")]
    EmptyDomain,
    #[error("duplicate element `{0}` in domain")]
    DuplicateElement(String),
    #[error("duplicate member `{member}` in relation `{relation}`")]
    DuplicateMember { relation: String, member: String },
    #[error("duplicate relation `{0}`")]
    DuplicateRelation(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid JSON model: {0}")]
    Json(#[from] serde_json::Error),
}

/// A binary relation stored as forward and reverse adjacency for O(log n)
/// successor/predecessor queries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct BinaryRelation {
    succ: BTreeMap<ElementId, BTreeSet<ElementId>>,
    pred: BTreeMap<ElementId, BTreeSet<ElementId>>,
    len: usize,
}

impl BinaryRelation {
    /// Returns false if the pair was already present.
    fn insert(&mut self, from: ElementId, to: ElementId) -> bool {
        let fresh = self
            .succ
            .entry(from.clone())
            .or_default()
            .insert(to.clone());
        if fresh {
            self.pred.entry(to).or_default().insert(from);
            self.len += 1;
        }
        fresh
    }

    fn contains(&self, from: &str, to: &str) -> bool {
        self.succ.get(from).is_some_and(|s| s.contains(to))
    }

    fn pairs(&self) -> impl Iterator<Item = (&ElementId, &ElementId)> {
        self.succ
            .iter()
            .flat_map(|(from, tos)| tos.iter().map(move |to| (from, to)))
    }
}

/// An immutable finite relational model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationalModel {
    domain: BTreeSet<ElementId>,
    unary: BTreeMap<String, BTreeSet<ElementId>>,
    binary: BTreeMap<String, BinaryRelation>,
}

impl RelationalModel {
    /// Builds a model from explicit parts, validating every invariant.
    /// Relations may be declared with empty extensions; that keeps them in
    /// the model's vocabulary (negative atoms in ELAN range over it).
    pub fn new<'a>(
        domain: impl IntoIterator<Item = &'a str>,
        unary: impl IntoIterator<Item = (&'a str, Vec<&'a str>)>,
        binary: impl IntoIterator<Item = (&'a str, Vec<(&'a str, &'a str)>)>,
    ) -> Result<Self, ModelError> {
        let mut dom = BTreeSet::new();
        for name in domain {
            if !is_valid_ident(name) {
                return Err(ModelError::InvalidIdent(name.to_string()));
            }
            if !dom.insert(ElementId::new(name)) {
                return Err(ModelError::DuplicateElement(name.to_string()));
            }
        }
        if dom.is_empty() {
            return Err(ModelError::EmptyDomain);
        }

        let require = |dom: &BTreeSet<ElementId>, name: &str| -> Result<ElementId, ModelError> {
            dom.get(name)
                .cloned()
                .ok_or_else(|| ModelError::UnknownElement(name.to_string()))
        };
        let check_name = |name: &str, seen: bool| -> Result<(), ModelError> {
            if !is_valid_ident(name) {
                return Err(ModelError::InvalidIdent(name.to_string()));
            }
            if RESERVED_NAMES.contains(&name) {
                return Err(ModelError::ReservedName(name.to_string()));
            }
            if seen {
                return Err(ModelError::DuplicateRelation(name.to_string()));
            }
            Ok(())
        };

        let mut un: BTreeMap<String, BTreeSet<ElementId>> = BTreeMap::new();
        for (name, members) in unary {
            check_name(name, un.contains_key(name))?;
            let set = un.entry(name.to_string()).or_default();
            for m in members {
                if !set.insert(require(&dom, m)?) {
                    return Err(ModelError::DuplicateMember {
                        relation: name.to_string(),
                        member: m.to_string(),
                    });
                }
            }
        }

        let mut bin: BTreeMap<String, BinaryRelation> = BTreeMap::new();
        for (name, pairs) in binary {
            check_name(name, bin.contains_key(name))?;
            let rel = bin.entry(name.to_string()).or_default();
            for (from, to) in pairs {
                let (from, to) = (require(&dom, from)?, require(&dom, to)?);
                let shown = format!("({from},{to})");
                if !rel.insert(from, to) {
                    return Err(ModelError::DuplicateMember {
                        relation: name.to_string(),
                        member: shown,
                    });
                }
            }
        }

        Ok(RelationalModel {
            domain: dom,
            unary: un,
            binary: bin,
        })
    }

    /// Assembles a model from parts whose names were already validated as
    /// part of an existing model (description graphs copy facts and reuse
    /// element names, including generated ones outside the file grammar).
    /// Every fact must mention domain members only.
    pub(crate) fn assemble(
        domain: BTreeSet<ElementId>,
        unary: BTreeMap<String, BTreeSet<ElementId>>,
        binary: BTreeMap<String, Vec<(ElementId, ElementId)>>,
    ) -> RelationalModel {
        debug_assert!(!domain.is_empty());
        debug_assert!(unary.values().flatten().all(|e| domain.contains(e)));
        let mut bin: BTreeMap<String, BinaryRelation> = BTreeMap::new();
        for (name, pairs) in binary {
            let rel = bin.entry(name).or_default();
            for (from, to) in pairs {
                debug_assert!(domain.contains(&from) && domain.contains(&to));
                let fresh = rel.insert(from, to);
                debug_assert!(fresh, "assemble saw a duplicate pair");
            }
        }
        RelationalModel {
            domain,
            unary,
            binary: bin,
        }
    }

    pub fn domain(&self) -> impl ExactSizeIterator<Item = &ElementId> {
        self.domain.iter()
    }

    pub fn domain_len(&self) -> usize {
        self.domain.len()
    }

    pub fn contains_element(&self, name: &str) -> bool {
        self.domain.contains(name)
    }

    /// The canonical `ElementId` for a name, if it is in the domain.
    pub fn element(&self, name: &str) -> Option<&ElementId> {
        self.domain.get(name)
    }

    pub fn unary_names(&self) -> impl Iterator<Item = &str> {
        self.unary.keys().map(String::as_str)
    }

    pub fn binary_names(&self) -> impl Iterator<Item = &str> {
        self.binary.keys().map(String::as_str)
    }

    pub fn has_unary(&self, name: &str) -> bool {
        self.unary.contains_key(name)
    }

    pub fn has_binary(&self, name: &str) -> bool {
        self.binary.contains_key(name)
    }

    /// Members of a unary relation; `None` if the name is not declared.
    pub fn unary_members(&self, name: &str) -> Option<&BTreeSet<ElementId>> {
        self.unary.get(name)
    }

    pub fn unary_holds(&self, name: &str, element: &str) -> bool {
        self.unary.get(name).is_some_and(|s| s.contains(element))
    }

    pub fn binary_holds(&self, name: &str, from: &str, to: &str) -> bool {
        self.binary.get(name).is_some_and(|r| r.contains(from, to))
    }

    /// All pairs of a binary relation in lexicographic order.
    pub fn binary_pairs(&self, name: &str) -> impl Iterator<Item = (&ElementId, &ElementId)> {
        self.binary.get(name).into_iter().flat_map(|r| r.pairs())
    }

    pub fn successors(&self, element: &str, relation: &str) -> impl Iterator<Item = &ElementId> {
        self.binary
            .get(relation)
            .and_then(|r| r.succ.get(element))
            .into_iter()
            .flatten()
    }

    pub fn predecessors(&self, element: &str, relation: &str) -> impl Iterator<Item = &ElementId> {
        self.binary
            .get(relation)
            .and_then(|r| r.pred.get(element))
            .into_iter()
            .flatten()
    }

    pub fn has_successor(&self, element: &str, relation: &str) -> bool {
        self.successors(element, relation).next().is_some()
    }

    /// `|Δ|` plus the sum of all relation extensions.
    pub fn model_size(&self) -> usize {
        self.domain.len()
            + self.unary.values().map(BTreeSet::len).sum::<usize>()
            + self.binary.values().map(|r| r.len).sum::<usize>()
    }

    /// The set of unary relation names holding at `element`.
    pub fn unary_profile(&self, element: &str) -> BTreeSet<&str> {
        self.unary
            .iter()
            .filter(|(_, members)| members.contains(element))
            .map(|(name, _)| name.as_str())
            .collect()
    }

    /// Quotient by a partition of the domain. Each class is named after its
    /// lexicographically least member; relation membership lifts
    /// existentially (classes of a similarity quotient have uniform
    /// profiles, so no information is lost there). Returns the quotient
    /// model and the element-to-class map.
    pub fn quotient(
        &self,
       partition: &[BTreeSet<ElementId>],
    ) -> Result<(RelationalModel, BTreeMap<ElementId, ElementId>), ModelError> {
        let mut class_of: BTreeMap<ElementId, ElementId> = BTreeMap::new();
        for block in partition {
            let rep = block
                .iter()
                .next()
                .ok_or_else(|| ModelError::InvalidPartition("empty block".into()))?;
            for e in block {
                if !self.domain.contains(e.as_str()) {
                    return Err(ModelError::UnknownElement(e.to_string()));
                }
                if class_of.insert(e.clone(), rep.clone()).is_some() {
                    return Err(ModelError::InvalidPartition(format!(
                        "element `{e}` appears in more than one block"
                    )));
                }
            }
        }
        if let Some(missing) = self.domain.iter().find(|e| !class_of.contains_key(*e)) {
            return Err(ModelError::InvalidPartition(format!(
                "element `{missing}` is not covered"
            )));
        }

        let domain: BTreeSet<ElementId> = class_of.values().cloned().collect();
        let unary = self
            .unary
            .iter()
            .map(|(name, members)| {
                let lifted = members.iter().map(|e| class_of[e].clone()).collect();
                (name.clone(), lifted)
            })
            .collect();
        let mut binary = BTreeMap::new();
        for (name, rel) in &self.binary {
            let mut lifted = BinaryRelation::default();
            for (from, to) in rel.pairs() {
                lifted.insert(class_of[from].clone(), class_of[to].clone());
            }
            binary.insert(name.clone(), lifted);
        }
        let model = RelationalModel {
            domain,
            unary,
            binary,
        };
        Ok((model, class_of))
    }

    /// Depth-bounded tree unraveling from `root`: nodes are the paths of
    /// length at most `depth`, labeled like their endpoints. Fresh node ids
    /// are `n0`, `n1`, ... in breadth-first discovery order; `n0` is the
    /// root. The full relational vocabulary is kept, even where empty.
    pub fn unravel(&self, root: &str, depth: usize) -> Result<(RelationalModel, ElementId), ModelError> {
        let root = self
            .element(root)
            .ok_or_else(|| ModelError::UnknownElement(root.to_string()))?;

        let mut domain = BTreeSet::new();
        let mut unary: BTreeMap<String, BTreeSet<ElementId>> =
            self.unary.keys().map(|n| (n.clone(), BTreeSet::new())).collect();
        let mut binary: BTreeMap<String, BinaryRelation> = self
            .binary
            .keys()
            .map(|n| (n.clone(), BinaryRelation::default()))
            .collect();

        let mut next = 0usize;
        let mut fresh = |domain: &mut BTreeSet<ElementId>, orig: &ElementId,
                         unary: &mut BTreeMap<String, BTreeSet<ElementId>>| {
            let id = ElementId::new(format!("n{next}"));
            next += 1;
            domain.insert(id.clone());
            for (name, members) in &self.unary {
                if members.contains(orig.as_str()) {
                    unary.get_mut(name).expect("declared").insert(id.clone());
                }
            }
            id
        };

        let root_id = fresh(&mut domain, root, &mut unary);
        let mut queue = VecDeque::new();
        queue.push_back((root.clone(), root_id.clone(), 0usize));
        while let Some((orig, id, d)) = queue.pop_front() {
            if d == depth {
                continue;
            }
            for (rel_name, rel) in &self.binary {
                if let Some(succs) = rel.succ.get(&orig) {
                    for s in succs {
                        let child = fresh(&mut domain, s, &mut unary);
                        binary
                            .get_mut(rel_name)
                            .expect("declared")
                            .insert(id.clone(), child.clone());
                        queue.push_back((s.clone(), child, d + 1));
                    }
                }
            }
        }

        let model = RelationalModel {
            domain,
            unary,
            binary,
        };
        Ok((model, root_id))
    }

    /// The strict linear order on `{1, ..., n}`: elements `"1"` to `"n"`,
    /// one binary relation `r` holding exactly the pairs (i, j) with i < j,
    /// and no unary relations.
    pub fn linear_order_model(n: usize) -> Result<RelationalModel, ModelError> {
        if n == 0 {
            return Err(ModelError::InvalidParameter(
                "linear order needs at least one element".into(),
            ));
        }
        let ids: Vec<ElementId> = (1..=n).map(|i| ElementId::new(i.to_string())).collect();
        let mut rel = BinaryRelation::default();
        for i in 0..n {
            for j in i + 1..n {
                rel.insert(ids[i].clone(), ids[j].clone());
            }
        }
        Ok(RelationalModel {
            domain: ids.into_iter().collect(),
            unary: BTreeMap::new(),
            binary: BTreeMap::from([("r".to_string(), rel)]),
        })
    }
}

// ---------------------------------------------------------------------------
// Text format

struct LineLexer<'a> {
    rest: &'a str,
    line: usize,
    col: usize,
    /// Start column of the most recently returned token; errors point here.
    tok_col: usize,
}

#[derive(Debug, PartialEq)]
enum Tok<'a> {
    Ident(&'a str),
    Colon,
    LParen,
    RParen,
    Comma,
}

impl<'a> LineLexer<'a> {
    fn new(line_no: usize, text: &'a str) -> Self {
        LineLexer {
            rest: text,
            line: line_no,
            col: 1,
            tok_col: 1,
        }
    }

    fn error(&self, msg: impl Into<String>) -> ModelError {
        ModelError::Parse {
            line: self.line,
            col: self.tok_col,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.rest.chars().next() {
            if c.is_whitespace() {
                self.col += 1;
                self.rest = &self.rest[c.len_utf8()..];
            } else {
                break;
            }
        }
    }

    fn next(&mut self) -> Result<Option<Tok<'a>>, ModelError> {
        self.skip_ws();
        self.tok_col = self.col;
        let Some(c) = self.rest.chars().next() else {
            return Ok(None);
        };
        let single = |t| {
            Ok::<_, ModelError>((t, 1usize))
        };
        let (tok, len) = match c {
            ':' => single(Tok::Colon)?,
            '(' => single(Tok::LParen)?,
            ')' => single(Tok::RParen)?,
            ',' => single(Tok::Comma)?,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let end = self
                    .rest
                    .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                    .unwrap_or(self.rest.len());
                (Tok::Ident(&self.rest[..end]), end)
            }
            other => return Err(self.error(format!("unexpected character `{other}`"))),
        };
        self.rest = &self.rest[len..];
        self.col += len;
        Ok(Some(tok))
    }

    fn expect_ident(&mut self, what: &str) -> Result<&'a str, ModelError> {
        match self.next()? {
            Some(Tok::Ident(s)) => Ok(s),
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn expect(&mut self, tok: Tok<'_>, what: &str) -> Result<(), ModelError> {
        match self.next()? {
            Some(t) if t == tok => Ok(()),
            _ => Err(self.error(format!("expected {what}"))),
        }
    }
}

impl RelationalModel {
    /// Parses the line-oriented text format:
    ///
    /// ```text
    /// # a comment
    /// domain: a b c
    /// unary dog: a b
    /// binary sniffs: (a,b) (b,c)
    /// ```
    ///
    /// The domain line must come first; `#` starts a comment anywhere.
    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let mut domain: Vec<&str> = Vec::new();
        let mut unary: Vec<(&str, Vec<&str>)> = Vec::new();
        let mut binary: Vec<(&str, Vec<(&str, &str)>)> = Vec::new();
        let mut saw_domain = false;

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let mut lx = LineLexer::new(idx + 1, line);
            let keyword = lx.expect_ident("`domain`, `unary` or `binary`")?;
            match keyword {
                "domain" => {
                    if saw_domain {
                        return Err(lx.error("a model has exactly one domain line"));
                    }
                    saw_domain = true;
                    lx.expect(Tok::Colon, "`:`")?;
                    while let Some(tok) = lx.next()? {
                        match tok {
                            Tok::Ident(name) => {
                                if domain.contains(&name) {
                                    return Err(lx.error(format!("duplicate element `{name}`")));
                                }
                                domain.push(name);
                            }
                            _ => return Err(lx.error("expected an element name")),
                        }
                    }
                    if domain.is_empty() {
                        return Err(lx.error("domain must not be empty"));
                    }
                }
                "unary" => {
                    if !saw_domain {
                        return Err(lx.error("the domain line must come first"));
                    }
                    let name = lx.expect_ident("a relation name")?;
                    lx.expect(Tok::Colon, "`:`")?;
                    let mut members = Vec::new();
                    while let Some(tok) = lx.next()? {
                        match tok {
                            Tok::Ident(m) => {
                                if members.contains(&m) {
                                    return Err(lx.error(format!("duplicate member `{m}`")));
                                }
                                if !domain.contains(&m) {
                                    return Err(lx.error(format!("unknown element `{m}`")));
                                }
                                members.push(m);
                            }
                            _ => return Err(lx.error("expected an element name")),
                        }
                    }
                    if unary.iter().any(|(n, _)| *n == name) {
                        return Err(lx.error(format!("duplicate relation `{name}`")));
                    }
                    unary.push((name, members));
                }
                "binary" => {
                    if !saw_domain {
                        return Err(lx.error("the domain line must come first"));
                    }
                    let name = lx.expect_ident("a relation name")?;
                    lx.expect(Tok::Colon, "`:`")?;
                    let mut pairs = Vec::new();
                    while let Some(tok) = lx.next()? {
                        match tok {
                            Tok::LParen => {
                                let from = lx.expect_ident("an element name")?;
                                lx.expect(Tok::Comma, "`,`")?;
                                let to = lx.expect_ident("an element name")?;
                                lx.expect(Tok::RParen, "`)`")?;
                                for e in [from, to] {
                                    if !domain.contains(&e) {
                                        return Err(lx.error(format!("unknown element `{e}`")));
                                    }
                                }
                                if pairs.contains(&(from, to)) {
                                    return Err(lx.error(format!("duplicate pair `({from},{to})`")));
                                }
                                pairs.push((from, to));
                            }
                            _ => return Err(lx.error("expected a pair `(a,b)`")),
                        }
                    }
                    if binary.iter().any(|(n, _)| *n == name) {
                        return Err(lx.error(format!("duplicate relation `{name}`")));
                    }
                    binary.push((name, pairs));
                }
                other => {
                    return Err(lx.error(format!(
                        "expected `domain`, `unary` or `binary`, found `{other}`"
                    )))
                }
            }
        }

        if !saw_domain {
            return Err(ModelError::EmptyDomain);
        }
        RelationalModel::new(domain, unary, binary)
    }

    /// Renders the text format; `from_text(m.to_text())` reproduces `m`.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        write!(out, "domain:").unwrap();
        for e in &self.domain {
            write!(out, " {e}").unwrap();
        }
        out.push('\n');
        for (name, members) in &self.unary {
            write!(out, "unary {name}:").unwrap();
            for m in members {
                write!(out, " {m}").unwrap();
            }
            out.push('\n');
        }
        for (name, rel) in &self.binary {
            write!(out, "binary {name}:").unwrap();
            for (from, to) in rel.pairs() {
                write!(out, " ({from},{to})").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

// ---------------------------------------------------------------------------
// JSON format

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonModel {
    domain: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    unary: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    binary: BTreeMap<String, Vec<(String, String)>>,
}

impl RelationalModel {
    /// Parses the JSON representation:
    /// `{"domain": [...], "unary": {"p": [...]}, "binary": {"r": [["a","b"], ...]}}`.
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let raw: JsonModel = serde_json::from_str(text)?;
        RelationalModel::new(
            raw.domain.iter().map(String::as_str),
            raw.unary
                .iter()
                .map(|(n, ms)| (n.as_str(), ms.iter().map(String::as_str).collect())),
            raw.binary.iter().map(|(n, ps)| {
                (
                    n.as_str(),
                    ps.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect(),
                )
            }),
        )
    }

    pub fn to_json_string(&self) -> String {
        let raw = JsonModel {
            domain: self.domain.iter().map(|e| e.to_string()).collect(),
            unary: self
                .unary
                .iter()
                .map(|(n, ms)| (n.clone(), ms.iter().map(|e| e.to_string()).collect()))
                .collect(),
            binary: self
                .binary
                .iter()
                .map(|(n, rel)| {
                    let pairs = rel
                        .pairs()
                        .map(|(a, b)| (a.to_string(), b.to_string()))
                        .collect();
                    (n.clone(), pairs)
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("model serialization cannot fail")
    }
}
