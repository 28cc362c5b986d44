//! Validation against a small subset of W3C XML Schema.
//!
//! Supported: global `element` declarations, named and anonymous
//! `simpleType` restrictions (enumeration, pattern, min/maxInclusive,
//! min/maxLength), `complexType` with a `sequence` of local elements or with
//! `simpleContent` extension, attributes with `use`, and the built-in types
//! string, boolean, decimal, double, integer, nonNegativeInteger,
//! positiveInteger and dateTime. Anything else is rejected when the schema is
//! parsed rather than silently ignored.

use std::collections::HashMap;
use std::sync::OnceLock;

use chrono::NaiveDateTime;
use regex::Regex;

use crate::xml::{self, Element};

/// The schema served for centrality responses.
pub const CENTRALITY_XSD: &str = include_str!("../../schema/centrality.xsd");

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("schema error: {0}")]
pub struct SchemaError(pub String);

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("{path}: {message}")]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Builtin {
    String,
    Boolean,
    Decimal,
    Double,
    Integer,
    NonNegativeInteger,
    PositiveInteger,
    DateTime,
}

impl Builtin {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "string" => Builtin::String,
            "boolean" => Builtin::Boolean,
            "decimal" => Builtin::Decimal,
            "double" => Builtin::Double,
            "integer" => Builtin::Integer,
            "nonNegativeInteger" => Builtin::NonNegativeInteger,
            "positiveInteger" => Builtin::PositiveInteger,
            "dateTime" => Builtin::DateTime,
            _ => return None,
        })
    }

    fn numeric(self) -> bool {
        !matches!(self, Builtin::String | Builtin::Boolean | Builtin::DateTime)
    }
}

#[derive(Debug, Clone)]
struct SimpleType {
    base: Builtin,
    enumeration: Vec<String>,
    /// One group per derivation step; a value must match some pattern of
    /// every group.
    patterns: Vec<Vec<Regex>>,
    min_inclusive: Option<f64>,
    max_inclusive: Option<f64>,
    min_length: Option<usize>,
    max_length: Option<usize>,
}

impl SimpleType {
    fn builtin(base: Builtin) -> Self {
        SimpleType {
            base,
            enumeration: Vec::new(),
            patterns: Vec::new(),
            min_inclusive: None,
            max_inclusive: None,
            min_length: None,
            max_length: None,
        }
    }

    fn check(&self, raw: &str) -> Result<(), String> {
        let value = if self.base == Builtin::String { raw } else { raw.trim() };
        lexical(self.base, value)?;
        if !self.enumeration.is_empty() && !self.enumeration.iter().any(|e| e == value) {
            return Err(format!("{value:?} is not one of {:?}", self.enumeration));
        }
        for group in &self.patterns {
            if !group.iter().any(|p| p.is_match(value)) {
                return Err(format!("{value:?} does not match the required pattern"));
            }
        }
        let len = value.chars().count();
        if self.min_length.is_some_and(|m| len < m) || self.max_length.is_some_and(|m| len > m) {
            return Err(format!("{value:?} has length {len} outside the allowed range"));
        }
        if self.base.numeric() {
            let x: f64 = value.parse().unwrap_or(f64::NAN);
            if self.min_inclusive.is_some_and(|m| !(x >= m)) {
                return Err(format!("{value} is below the minimum"));
            }
            if self.max_inclusive.is_some_and(|m| !(x <= m)) {
                return Err(format!("{value} is above the maximum"));
            }
        }
        Ok(())
    }
}

fn lexical(base: Builtin, value: &str) -> Result<(), String> {
    static PATTERNS: OnceLock<[Regex; 4]> = OnceLock::new();
    let [double, decimal, integer, datetime] = PATTERNS.get_or_init(|| {
        [
            Regex::new(r"^(?:[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?|INF|-INF|NaN)$"),
            Regex::new(r"^[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)$"),
            Regex::new(r"^[+-]?[0-9]+$"),
            Regex::new(r"^(-?[0-9]{4,}-[0-9]{2}-[0-9]{2}T[0-9]{2}:[0-9]{2}:[0-9]{2}(?:\.[0-9]+)?)(?:Z|[+-][0-9]{2}:[0-9]{2})?$"),
        ]
        .map(|r| r.expect("built-in lexical pattern"))
    });
    let ok = match base {
        Builtin::String => true,
        Builtin::Boolean => matches!(value, "true" | "false" | "1" | "0"),
        Builtin::Decimal => decimal.is_match(value),
        Builtin::Double => double.is_match(value),
        Builtin::Integer => integer.is_match(value),
        Builtin::NonNegativeInteger => {
            integer.is_match(value) && (!value.starts_with('-') || value[1..].bytes().all(|b| b == b'0'))
        }
        Builtin::PositiveInteger => {
            integer.is_match(value)
                && !value.starts_with('-')
                && value.bytes().any(|b| (b'1'..=b'9').contains(&b))
        }
        Builtin::DateTime => datetime.captures(value).is_some_and(|c| {
            NaiveDateTime::parse_from_str(&c[1], "%Y-%m-%dT%H:%M:%S%.f").is_ok()
        }),
    };
    if ok {
        Ok(())
    } else {
        Err(format!("{value:?} is not a valid {base:?}"))
    }
}

#[derive(Debug, Clone)]
struct AttributeDecl {
    name: String,
    ty: SimpleType,
    required: bool,
}

#[derive(Debug, Clone)]
enum Content {
    Empty,
    Simple(SimpleType),
    Sequence(Vec<ElementDecl>),
}

#[derive(Debug, Clone)]
struct ElementDecl {
    name: String,
    min: u64,
    /// `None` means unbounded.
    max: Option<u64>,
    content: Content,
    attributes: Vec<AttributeDecl>,
}

/// A parsed schema, ready to validate documents.
#[derive(Debug, Clone)]
pub struct Schema {
    roots: Vec<ElementDecl>,
}

fn schema_err(msg: impl Into<String>) -> SchemaError {
    SchemaError(msg.into())
}

fn local_name(qname: &str) -> &str {
    qname.rsplit(':').next().unwrap_or(qname)
}

struct Parser<'a> {
    simple: HashMap<&'a str, &'a Element>,
    complex: HashMap<&'a str, &'a Element>,
    resolved: HashMap<String, SimpleType>,
}

impl<'a> Parser<'a> {
    fn simple_type_ref(&mut self, qname: &str) -> Result<SimpleType, SchemaError> {
        let name = local_name(qname);
        if let Some(t) = self.resolved.get(name) {
            return Ok(t.clone());
        }
        if let Some(&el) = self.simple.get(name) {
            let t = self.simple_type(el)?;
            self.resolved.insert(name.to_string(), t.clone());
            return Ok(t);
        }
        Builtin::from_name(name)
            .map(SimpleType::builtin)
            .ok_or_else(|| schema_err(format!("unknown or unsupported type {qname}")))
    }

    fn simple_type(&mut self, el: &Element) -> Result<SimpleType, SchemaError> {
        let restriction = el
            .child("restriction")
            .ok_or_else(|| schema_err("simpleType must contain a restriction"))?;
        let base = restriction
            .attr("base")
            .ok_or_else(|| schema_err("restriction without base"))?;
        let mut ty = self.simple_type_ref(base)?;
        let mut patterns = Vec::new();
        let mut enumeration = Vec::new();
        for facet in restriction.elements() {
            let value = facet
                .attr("value")
                .ok_or_else(|| schema_err(format!("facet {} without value", facet.name)))?;
            let number = || {
                value
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| schema_err(format!("facet {} needs a number", facet.name)))
            };
            let count = || {
                value
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| schema_err(format!("facet {} needs a count", facet.name)))
            };
            match facet.name.as_str() {
                "enumeration" => enumeration.push(value.to_string()),
                "pattern" => patterns.push(
                    Regex::new(&format!("^(?:{value})$"))
                        .map_err(|e| schema_err(format!("pattern {value:?}: {e}")))?,
                ),
                "minInclusive" => ty.min_inclusive = Some(number()?),
                "maxInclusive" => ty.max_inclusive = Some(number()?),
                "minLength" => ty.min_length = Some(count()?),
                "maxLength" => ty.max_length = Some(count()?),
                other => return Err(schema_err(format!("unsupported facet {other}"))),
            }
        }
        if !enumeration.is_empty() {
            ty.enumeration = enumeration;
        }
        if !patterns.is_empty() {
            ty.patterns.push(patterns);
        }
        Ok(ty)
    }

    fn attribute(&mut self, el: &Element) -> Result<AttributeDecl, SchemaError> {
        let name = el
            .attr("name")
            .ok_or_else(|| schema_err("attribute without name"))?;
        let ty = match (el.attr("type"), el.child("simpleType")) {
            (Some(t), None) => self.simple_type_ref(t)?,
            (None, Some(st)) => self.simple_type(st)?,
            (None, None) => SimpleType::builtin(Builtin::String),
            (Some(_), Some(_)) => return Err(schema_err(format!("attribute {name} has two types"))),
        };
        let required = match el.attr("use").unwrap_or("optional") {
            "required" => true,
            "optional" => false,
            other => return Err(schema_err(format!("unsupported use={other}"))),
        };
        Ok(AttributeDecl {
            name: name.to_string(),
            ty,
            required,
        })
    }

    fn attributes(&mut self, parent: &Element) -> Result<Vec<AttributeDecl>, SchemaError> {
        parent
            .children_named("attribute")
            .map(|a| self.attribute(a))
            .collect()
    }

    fn complex_type(&mut self, el: &Element) -> Result<(Content, Vec<AttributeDecl>), SchemaError> {
        if el.attr("mixed") == Some("true") {
            return Err(schema_err("mixed content is not supported"));
        }
        for child in el.elements() {
            if !matches!(
                child.name.as_str(),
                "sequence" | "simpleContent" | "attribute" | "annotation"
            ) {
                return Err(schema_err(format!("unsupported complexType part {}", child.name)));
            }
        }
        if let Some(sc) = el.child("simpleContent") {
            let ext = sc
                .child("extension")
                .ok_or_else(|| schema_err("simpleContent must contain an extension"))?;
            let base = ext
                .attr("base")
                .ok_or_else(|| schema_err("extension without base"))?;
            let ty = self.simple_type_ref(base)?;
            return Ok((Content::Simple(ty), self.attributes(ext)?));
        }
        let content = match el.child("sequence") {
            Some(seq) => {
                let mut particles = Vec::new();
                for child in seq.elements() {
                    if child.name != "element" {
                        return Err(schema_err(format!("unsupported sequence part {}", child.name)));
                    }
                    particles.push(self.element(child)?);
                }
                Content::Sequence(particles)
            }
            None => Content::Empty,
        };
        Ok((content, self.attributes(el)?))
    }

    fn element(&mut self, el: &Element) -> Result<ElementDecl, SchemaError> {
        let name = el
            .attr("name")
            .ok_or_else(|| schema_err("element without name (ref is not supported)"))?;
        let min = match el.attr("minOccurs") {
            Some(v) => v.parse().map_err(|_| schema_err(format!("bad minOccurs {v:?}")))?,
            None => 1,
        };
        let max = match el.attr("maxOccurs") {
            Some("unbounded") => None,
            Some(v) => Some(v.parse().map_err(|_| schema_err(format!("bad maxOccurs {v:?}")))?),
            None => Some(1),
        };
        let (content, attributes) = match (el.attr("type"), el.child("complexType"), el.child("simpleType")) {
            (Some(t), None, None) => {
                if let Some(&ct) = self.complex.get(local_name(t)) {
                    self.complex_type(ct)?
                } else {
                    (Content::Simple(self.simple_type_ref(t)?), Vec::new())
                }
            }
            (None, Some(ct), None) => self.complex_type(ct)?,
            (None, None, Some(st)) => (Content::Simple(self.simple_type(st)?), Vec::new()),
            (None, None, None) => (Content::Simple(SimpleType::builtin(Builtin::String)), Vec::new()),
            _ => return Err(schema_err(format!("element {name} has more than one type"))),
        };
        Ok(ElementDecl {
            name: name.to_string(),
            min,
            max,
            content,
            attributes,
        })
    }
}

impl Schema {
    pub fn parse(xsd: &str) -> Result<Schema, SchemaError> {
        let root = xml::parse(xsd).map_err(|e| schema_err(e.to_string()))?;
        if root.name != "schema" {
            return Err(schema_err(format!("root element is {}, not schema", root.name)));
        }
        let mut parser = Parser {
            simple: HashMap::new(),
            complex: HashMap::new(),
            resolved: HashMap::new(),
        };
        for el in root.elements() {
            let name = el.attr("name");
            match (el.name.as_str(), name) {
                ("simpleType", Some(n)) => {
                    parser.simple.insert(n, el);
                }
                ("complexType", Some(n)) => {
                    parser.complex.insert(n, el);
                }
                ("element" | "annotation", _) => {}
                (other, _) => return Err(schema_err(format!("unsupported top-level {other}"))),
            }
        }
        let roots = root
            .children_named("element")
            .map(|el| parser.element(el))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Schema { roots })
    }

    /// Checks a complete document against the global element declarations.
    pub fn validate(&self, document: &str) -> Result<(), ValidationError> {
        let root = xml::parse(document).map_err(|e| ValidationError {
            path: "/".into(),
            message: e.to_string(),
        })?;
        let decl = self
            .roots
            .iter()
            .find(|d| d.name == root.name)
            .ok_or_else(|| ValidationError {
                path: format!("/{}", root.name),
                message: "no global declaration for the root element".into(),
            })?;
        validate_element(decl, &root, &format!("/{}", root.name))
    }
}

fn invalid(path: &str, message: impl Into<String>) -> ValidationError {
    ValidationError {
        path: path.to_string(),
        message: message.into(),
    }
}

fn validate_element(decl: &ElementDecl, el: &Element, path: &str) -> Result<(), ValidationError> {
    for (name, value) in &el.attributes {
        let attr_path = format!("{path}/@{name}");
        let a = decl
            .attributes
            .iter()
            .find(|a| &a.name == name)
            .ok_or_else(|| invalid(&attr_path, "attribute not declared"))?;
        a.ty.check(value).map_err(|m| invalid(&attr_path, m))?;
    }
    for a in decl.attributes.iter().filter(|a| a.required) {
        if el.attr(&a.name).is_none() {
            return Err(invalid(path, format!("missing required attribute {}", a.name)));
        }
    }
    match &decl.content {
        Content::Empty => {
            if el.elements().next().is_some() || el.has_direct_text() {
                return Err(invalid(path, "element must be empty"));
            }
        }
        Content::Simple(ty) => {
            if el.elements().next().is_some() {
                return Err(invalid(path, "element children are not allowed here"));
            }
            ty.check(&el.text()).map_err(|m| invalid(path, m))?;
        }
        Content::Sequence(particles) => {
            if el.has_direct_text() {
                return Err(invalid(path, "text is not allowed here"));
            }
            let children: Vec<&Element> = el.elements().collect();
            let mut next = 0;
            for p in particles {
                let mut seen = 0u64;
                while next < children.len()
                    && children[next].name == p.name
                    && p.max.is_none_or(|m| seen < m)
                {
                    seen += 1;
                    let child_path = format!("{path}/{}[{seen}]", p.name);
                    validate_element(p, children[next], &child_path)?;
                    next += 1;
                }
                if seen < p.min {
                    return Err(invalid(
                        path,
                        format!("expected at least {} {} element(s), found {seen}", p.min, p.name),
                    ));
                }
            }
            if let Some(extra) = children.get(next) {
                return Err(invalid(path, format!("unexpected element {}", extra.name)));
            }
        }
    }
    Ok(())
}

/// The parsed schema for centrality responses.
pub fn centrality_schema() -> &'static Schema {
    static SCHEMA: OnceLock<Schema> = OnceLock::new();
    SCHEMA.get_or_init(|| Schema::parse(CENTRALITY_XSD).expect("shipped schema parses"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(authors: &str, root_attrs: &str) -> String {
        format!("<?xml version=\"1.0\"?><centralityResult {root_attrs}>{authors}</centralityResult>")
    }

    const ROOT: &str = r#"repository="r" partitionKind="ddc_exact" partitionCode="004" mode="unweighted" generatedAt="2024-05-01T10:00:00.5Z""#;

    #[test]
    fn accepts_valid_document() {
        let s = centrality_schema();
        s.validate(&doc("", ROOT)).unwrap();
        s.validate(&doc(
            r#"<author rank="1" raw="2.5" normalized="0.25" publications="3">Doe, J.</author>"#,
            ROOT,
        ))
        .unwrap();
    }

    #[test]
    fn rejects_violations() {
        let s = centrality_schema();
        let bad_author = |attrs: &str| doc(&format!("<author {attrs}>x</author>"), ROOT);
        for case in [
            bad_author(r#"rank="0" raw="1" normalized="0" publications="1""#),
            bad_author(r#"rank="1" raw="-1" normalized="0" publications="1""#),
            bad_author(r#"rank="1" raw="1" normalized="1.5" publications="1""#),
            bad_author(r#"rank="1" raw="x" normalized="0" publications="1""#),
            bad_author(r#"rank="1" raw="1" normalized="0""#),
            bad_author(r#"rank="1" raw="1" normalized="0" publications="1" extra="y""#),
            doc("<author rank=\"1\" raw=\"1\" normalized=\"0\" publications=\"1\"><b/></author>", ROOT),
            doc("<other/>", ROOT),
            doc("stray text", ROOT),
            doc("", r#"repository="r" partitionKind="ddc_exact" partitionCode="04" mode="unweighted" generatedAt="2024-05-01T10:00:00Z""#),
            doc("", r#"repository="r" partitionKind="everything" mode="unweighted" generatedAt="2024-05-01T10:00:00Z""#),
            doc("", r#"repository="r" partitionKind="repository_wide" mode="unweighted" generatedAt="2024-13-01T10:00:00Z""#),
            doc("", r#"partitionKind="repository_wide" mode="unweighted" generatedAt="2024-05-01T10:00:00Z""#),
            "<somethingElse/>".to_string(),
        ] {
            assert!(s.validate(&case).is_err(), "accepted {case}");
        }
    }

    #[test]
    fn rejects_unsupported_constructs() {
        let xsd = r#"<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">
            <xs:element name="a"><xs:complexType><xs:choice/></xs:complexType></xs:element>
        </xs:schema>"#;
        assert!(Schema::parse(xsd).is_err());
        let xsd = r#"<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">
            <xs:element name="a" type="xs:duration"/></xs:schema>"#;
        assert!(Schema::parse(xsd).is_err());
    }

    #[test]
    fn occurrence_bounds() {
        let xsd = r#"<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">
            <xs:element name="list"><xs:complexType><xs:sequence>
              <xs:element name="head" type="xs:integer"/>
              <xs:element name="item" type="xs:boolean" minOccurs="0" maxOccurs="2"/>
            </xs:sequence></xs:complexType></xs:element></xs:schema>"#;
        let s = Schema::parse(xsd).unwrap();
        s.validate("<list><head>1</head></list>").unwrap();
        s.validate("<list><head> -4 </head><item>true</item><item>0</item></list>").unwrap();
        assert!(s.validate("<list/>").is_err());
        assert!(s.validate("<list><head>1</head><item>1</item><item>1</item><item>1</item></list>").is_err());
        assert!(s.validate("<list><item>1</item><head>1</head></list>").is_err());
        assert!(s.validate("<list><head>1.5</head></list>").is_err());
    }
}
