//! Credential and parameter declarations.
//!
//! Only `<credential …/>` and `<parameter …/>` elements are read; they may
//! appear anywhere in a document, and a document may be a bare fragment
//! with several top-level elements. Attribute values map verbatim onto
//! [`CredentialDecl`] / [`ParameterDecl`]; unknown attributes are kept in
//! `extra_attributes` and reported as warnings.
//!
//! ```xml
//! <credential
//!     absfname="RoundRobinGenerator" purpose="payload"
//!     security_class="frontend" trust_domain="grid"
//!     context="{'items': ['str1', 'str2', 'str3'], 'type': 'text'}"
//!     type="generator"
//! />
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::context::{parse_context_literal, GeneratorContext};
use crate::credential::{Credential, Purpose, Source};
use crate::generators::{GeneratorError, GeneratorHandle, GeneratorRegistry};
use crate::parameters::{ParamType, Parameter};

const ROOT: &str = "credstack-declarations";

/// 1-based line and column of an element in the source document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("markup error at {location}: {message}")]
    Markup { location: Location, message: String },
    #[error("<{element}> at {location}: {message}")]
    Decl { element: &'static str, location: Location, attribute: Option<String>, message: String },
    #[error("<{element}> at {location}: {message}")]
    Resolve { element: &'static str, location: Location, message: String },
}

impl ConfigError {
    fn decl(element: &'static str, location: Location, attribute: &str, message: impl Into<String>) -> Self {
        ConfigError::Decl { element, location, attribute: Some(attribute.to_string()), message: message.into() }
    }
}

/// A declaration together with where it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct Located<T> {
    pub location: Location,
    pub value: T,
}

impl<T> Deref for Located<T> {
    type Target = T;

    fn deref(&self) -> &T {
        &self.value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CredentialDeclType {
    File,
    Generator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CredentialDecl {
    /// File path, or generator name when `decl_type` is `Generator`.
    pub absfname: String,
    pub purpose: Purpose,
    pub security_class: String,
    pub trust_domain: String,
    pub decl_type: CredentialDeclType,
    /// The `type` attribute as written.
    pub declared_type: String,
    pub context: Option<GeneratorContext>,
    pub extra_attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterDeclType {
    Literal,
    Generator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterDecl {
    pub name: String,
    /// Literal value, or generator name when `decl_type` is `Generator`.
    pub value: String,
    pub decl_type: ParameterDeclType,
    /// For literals, from the `type` attribute (default string); for
    /// generators, from the context's `"type"`.
    pub ptype: ParamType,
    /// The `type` attribute as written, if any.
    pub declared_type: Option<String>,
    pub context: Option<GeneratorContext>,
    pub extra_attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedConfig {
    pub credentials: Vec<Located<CredentialDecl>>,
    pub parameters: Vec<Located<ParameterDecl>>,
    pub warnings: Vec<String>,
}

const CREDENTIAL_ATTRS: [&str; 6] = ["absfname", "purpose", "security_class", "trust_domain", "type", "context"];
const PARAMETER_ATTRS: [&str; 4] = ["name", "value", "type", "context"];

/// Maps byte offsets of the wrapped document back to the caller's text.
struct SourceMap<'a> {
    original: &'a str,
    skipped: usize,
    prefix: usize,
}

impl SourceMap<'_> {
    fn location(&self, wrapped_offset: usize) -> Location {
        let offset = (wrapped_offset + self.skipped).saturating_sub(self.prefix).min(self.original.len());
        let before = &self.original[..offset];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        Location { line, column: before[line_start..].chars().count() + 1 }
    }
}

fn wrapped_offset(wrapped: &str, pos: roxmltree::TextPos) -> usize {
    let mut offset = 0;
    for (i, line) in wrapped.split_inclusive('\n').enumerate() {
        if i + 1 == pos.row as usize {
            return offset + line.chars().take(pos.col.saturating_sub(1) as usize).map(char::len_utf8).sum::<usize>();
        }
        offset += line.len();
    }
    wrapped.len()
}

/// Parse every credential and parameter declaration in `text`.
pub fn parse_config(text: &str) -> Result<ParsedConfig, ConfigError> {
    let skipped = prolog_len(text);
    let open = format!("<{ROOT}>");
    let wrapped = format!("{open}{}</{ROOT}>", &text[skipped..]);
    let map = SourceMap { original: text, skipped, prefix: open.len() };

    let doc = roxmltree::Document::parse(&wrapped).map_err(|e| ConfigError::Markup {
        location: map.location(wrapped_offset(&wrapped, e.pos())),
        message: e.to_string(),
    })?;

    let mut parsed = ParsedConfig::default();
    for node in doc.descendants().filter(|n| n.is_element()) {
        let location = map.location(node.range().start);
        match node.tag_name().name() {
            "credential" => {
                let value = credential_decl(&node, location, &mut parsed.warnings)?;
                parsed.credentials.push(Located { location, value });
            }
            "parameter" => {
                let value = parameter_decl(&node, location, &mut parsed.warnings)?;
                parsed.parameters.push(Located { location, value });
            }
            _ => {}
        }
    }
    Ok(parsed)
}

/// Length of a leading `<?xml …?>` declaration, which cannot be wrapped.
fn prolog_len(text: &str) -> usize {
    let trimmed = text.trim_start();
    if trimmed.starts_with("<?xml") {
        if let Some(end) = trimmed.find("?>") {
            return text.len() - trimmed.len() + end + 2;
        }
    }
    0
}

struct Attributes<'a> {
    element: &'static str,
    location: Location,
    values: BTreeMap<&'a str, &'a str>,
}

impl<'a> Attributes<'a> {
    fn collect(
        node: &roxmltree::Node<'a, 'a>,
        element: &'static str,
        location: Location,
        known: &[&str],
        warnings: &mut Vec<String>,
    ) -> (Self, BTreeMap<String, String>) {
        let mut values = BTreeMap::new();
        let mut extra = BTreeMap::new();
        for attr in node.attributes() {
            if known.contains(&attr.name()) {
                values.insert(attr.name(), attr.value());
            } else {
                warnings.push(format!("<{element}> at {location}: unknown attribute '{}' preserved", attr.name()));
                extra.insert(attr.name().to_string(), attr.value().to_string());
            }
        }
        (Self { element, location, values }, extra)
    }

    fn required(&self, name: &str) -> Result<&'a str, ConfigError> {
        self.values
            .get(name)
            .copied()
            .ok_or_else(|| ConfigError::decl(self.element, self.location, name, format!("missing required attribute '{name}'")))
    }

    fn optional(&self, name: &str) -> Option<&'a str> {
        self.values.get(name).copied()
    }

    fn context(&self, required: bool) -> Result<Option<GeneratorContext>, ConfigError> {
        let Some(text) = self.optional("context") else {
            return if required {
                Err(ConfigError::decl(self.element, self.location, "context", "generator declarations need a context"))
            } else {
                Ok(None)
            };
        };
        let ctx = parse_context_literal(text)
            .map_err(|e| ConfigError::decl(self.element, self.location, "context", e.to_string()))?;
        if required {
            ctx.validate().map_err(|m| ConfigError::decl(self.element, self.location, "context", m))?;
        }
        Ok(Some(ctx))
    }
}

fn credential_decl(
    node: &roxmltree::Node,
    location: Location,
    warnings: &mut Vec<String>,
) -> Result<CredentialDecl, ConfigError> {
    let (attrs, extra_attributes) = Attributes::collect(node, "credential", location, &CREDENTIAL_ATTRS, warnings);
    let absfname = attrs.required("absfname")?;
    let purpose = attrs.required("purpose")?;
    let purpose: Purpose = purpose
        .parse()
        .map_err(|e: crate::credential::CredentialError| ConfigError::decl("credential", location, "purpose", e.to_string()))?;
    let declared_type = attrs.required("type")?;
    let decl_type = if declared_type == "generator" { CredentialDeclType::Generator } else { CredentialDeclType::File };
    if absfname.is_empty() {
        return Err(ConfigError::decl("credential", location, "absfname", "must not be empty"));
    }

    Ok(CredentialDecl {
        absfname: absfname.to_string(),
        purpose,
        security_class: attrs.required("security_class")?.to_string(),
        trust_domain: attrs.required("trust_domain")?.to_string(),
        decl_type,
        declared_type: declared_type.to_string(),
        context: attrs.context(decl_type == CredentialDeclType::Generator)?,
        extra_attributes,
    })
}

fn parameter_decl(
    node: &roxmltree::Node,
    location: Location,
    warnings: &mut Vec<String>,
) -> Result<ParameterDecl, ConfigError> {
    let (attrs, extra_attributes) = Attributes::collect(node, "parameter", location, &PARAMETER_ATTRS, warnings);
    let name = attrs.required("name")?;
    let value = attrs.required("value")?;
    let declared_type = attrs.optional("type");

    let (decl_type, context, ptype) = match declared_type {
        Some("generator") => {
            let context = attrs.context(true)?;
            let ptype = context
                .as_ref()
                .and_then(GeneratorContext::type_tag)
                .map(ParamType::from_type_tag)
                .unwrap_or(ParamType::String);
            (ParameterDeclType::Generator, context, ptype)
        }
        Some(t) => {
            let ptype = t.parse().map_err(|e: crate::parameters::ParameterError| {
                ConfigError::decl("parameter", location, "type", e.to_string())
            })?;
            (ParameterDeclType::Literal, attrs.context(false)?, ptype)
        }
        None => (ParameterDeclType::Literal, attrs.context(false)?, ParamType::String),
    };

    Ok(ParameterDecl {
        name: name.to_string(),
        value: value.to_string(),
        decl_type,
        ptype,
        declared_type: declared_type.map(str::to_string),
        context,
        extra_attributes,
    })
}

/// Write declarations back out as markup that [`parse_config`] reads to the
/// same values. Contexts are written in single-quoted literal style.
pub fn serialize_config(credentials: &[CredentialDecl], parameters: &[ParameterDecl]) -> String {
    let mut out = String::new();
    for c in credentials {
        let mut attrs = vec![
            ("absfname", c.absfname.clone()),
            ("purpose", c.purpose.to_string()),
            ("security_class", c.security_class.clone()),
            ("trust_domain", c.trust_domain.clone()),
        ];
        if let Some(ctx) = &c.context {
            attrs.push(("context", ctx.to_literal()));
        }
        attrs.push(("type", c.declared_type.clone()));
        write_element(&mut out, "credential", &attrs, &c.extra_attributes);
    }
    for p in parameters {
        let mut attrs = vec![("name", p.name.clone()), ("value", p.value.clone())];
        if let Some(ctx) = &p.context {
            attrs.push(("context", ctx.to_literal()));
        }
        if let Some(t) = &p.declared_type {
            attrs.push(("type", t.clone()));
        }
        write_element(&mut out, "parameter", &attrs, &p.extra_attributes);
    }
    out
}

fn write_element(out: &mut String, name: &str, attrs: &[(&str, String)], extra: &BTreeMap<String, String>) {
    out.push('<');
    out.push_str(name);
    let extra = extra.iter().map(|(k, v)| (k.as_str(), v.clone()));
    for (k, v) in attrs.iter().cloned().chain(extra) {
        out.push_str(&format!("\n    {k}=\"{}\"", escape_attribute(&v)));
    }
    out.push_str("\n/>\n");
}

fn escape_attribute(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

/// Where a resolved credential will come from.
#[derive(Debug)]
pub enum ResolvedSource {
    File(Credential),
    Generator(GeneratorHandle),
}

#[derive(Debug)]
pub struct ResolvedCredential {
    pub location: Location,
    pub purpose: Purpose,
    pub trust_domain: String,
    pub security_class: String,
    pub source: ResolvedSource,
}

impl ResolvedCredential {
    /// Produce the credential: read from the resolved file, or generate one
    /// with the handle (kind taken from the context's `"type"`).
    pub fn credential(&mut self, args: &crate::generators::RuntimeArgs) -> Result<Credential, GeneratorError> {
        let cred = match &mut self.source {
            ResolvedSource::File(cred) => return Ok(cred.clone()),
            ResolvedSource::Generator(handle) => {
                let generated = handle.generate(args)?;
                Credential::new(crate::credential::CredentialKind::from_type_tag(&generated.type_tag), generated.value)
                    .with_source(Source::Generator(handle.name().to_string()))
            }
        };
        Ok(cred
            .with_purpose(self.purpose)
            .with_trust_domain(self.trust_domain.clone())
            .with_security_class(self.security_class.clone()))
    }
}

/// Resolve one credential declaration. Relative file paths are taken from
/// `base_dir` when given.
pub fn resolve_decl(
    decl: &Located<CredentialDecl>,
    registry: &GeneratorRegistry,
    base_dir: Option<&Path>,
) -> Result<ResolvedCredential, ConfigError> {
    let fail = |message: String| ConfigError::Resolve { element: "credential", location: decl.location, message };
    let source = match decl.decl_type {
        CredentialDeclType::Generator => {
            let context = decl.context.clone().unwrap_or_default();
            ResolvedSource::Generator(registry.load_generator(&decl.absfname, context).map_err(|e| fail(e.to_string()))?)
        }
        CredentialDeclType::File => {
            let path = resolve_path(&decl.absfname, base_dir);
            let cred = Credential::from_file(&path).map_err(|e| fail(e.to_string()))?;
            ResolvedSource::File(
                cred.with_purpose(decl.purpose)
                    .with_trust_domain(decl.trust_domain.clone())
                    .with_security_class(decl.security_class.clone()),
            )
        }
    };
    Ok(ResolvedCredential {
        location: decl.location,
        purpose: decl.purpose,
        trust_domain: decl.trust_domain.clone(),
        security_class: decl.security_class.clone(),
        source,
    })
}

pub fn resolve_decls(
    decls: &[Located<CredentialDecl>],
    registry: &GeneratorRegistry,
    base_dir: Option<&Path>,
) -> Result<Vec<ResolvedCredential>, ConfigError> {
    decls.iter().map(|d| resolve_decl(d, registry, base_dir)).collect()
}

pub fn resolve_parameter_decl(
    decl: &Located<ParameterDecl>,
    registry: &GeneratorRegistry,
) -> Result<Parameter, ConfigError> {
    match decl.decl_type {
        ParameterDeclType::Literal => Ok(Parameter::literal(decl.name.clone(), decl.ptype, decl.value.value.clone())),
        ParameterDeclType::Generator => {
            let context = decl.context.clone().unwrap_or_default();
            let handle = registry.load_generator(&decl.value.value, context).map_err(|e| ConfigError::Resolve {
                element: "parameter",
                location: decl.location,
                message: e.to_string(),
            })?;
            Ok(Parameter::generated(decl.name.clone(), decl.ptype, handle))
        }
    }
}

fn resolve_path(absfname: &str, base_dir: Option<&Path>) -> PathBuf {
    let path = Path::new(absfname);
    match base_dir {
        Some(base) if path.is_relative() => base.join(path),
        _ => path.to_path_buf(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::ContextValue;

    #[test]
    fn fragment_with_several_roots() {
        let parsed = parse_config(
            r#"<parameter name="a" value="1" type="integer"/>
<parameter name="b" value="x"/>"#,
        )
        .unwrap();
        assert_eq!(parsed.parameters.len(), 2);
        assert_eq!(parsed.parameters[0].ptype, ParamType::Integer);
        assert_eq!(parsed.parameters[1].ptype, ParamType::String);
        assert_eq!(parsed.parameters[1].location, Location { line: 2, column: 1 });
        assert_eq!(parsed.parameters[0].location, Location { line: 1, column: 1 });
    }

    #[test]
    fn nested_in_larger_document_with_prolog() {
        let doc = "<?xml version=\"1.0\"?>\n<frontend><security>\n  <credentials>\n    <credential absfname=\"/x.scitoken\" purpose=\"request\" security_class=\"f\" trust_domain=\"grid\" type=\"scitoken\"/>\n  </credentials>\n</security></frontend>";
        let parsed = parse_config(doc).unwrap();
        assert_eq!(parsed.credentials.len(), 1);
        assert_eq!(parsed.credentials[0].decl_type, CredentialDeclType::File);
        assert_eq!(parsed.credentials[0].location, Location { line: 4, column: 5 });
    }

    #[test]
    fn bad_purpose_names_element_and_attribute() {
        let err = parse_config(
            r#"<credential absfname="G" purpose="bogus" security_class="f" trust_domain="grid" context="{'type': 'text'}" type="generator"/>"#,
        )
        .unwrap_err();
        match err {
            ConfigError::Decl { element, attribute, .. } => {
                assert_eq!(element, "credential");
                assert_eq!(attribute.as_deref(), Some("purpose"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn generator_needs_typed_context() {
        let err = parse_config(
            r#"<credential absfname="G" purpose="payload" security_class="f" trust_domain="grid" context="{'items': []}" type="generator"/>"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("type"), "{err}");
        let err = parse_config(r#"<parameter name="p" value="G" type="generator"/>"#).unwrap_err();
        assert!(matches!(err, ConfigError::Decl { .. }));
    }

    #[test]
    fn bad_context_literal() {
        let err = parse_config(
            r#"<credential absfname="G" purpose="payload" security_class="f" trust_domain="grid" context="{'type':}" type="generator"/>"#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Decl { attribute: Some(ref a), .. } if a == "context"));
    }

    #[test]
    fn malformed_markup_reports_location() {
        let err = parse_config("<parameter name=\"a\" value=\"1\"/>\n<parameter name=\"b\"").unwrap_err();
        match err {
            ConfigError::Markup { location, .. } => assert_eq!(location.line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_attributes_are_preserved_with_warning() {
        let parsed = parse_config(r#"<parameter name="a" value="1" comment="hi"/>"#).unwrap();
        assert_eq!(parsed.parameters[0].extra_attributes.get("comment").map(String::as_str), Some("hi"));
        assert_eq!(parsed.warnings.len(), 1);
    }

    #[test]
    fn missing_required_attribute() {
        let err = parse_config(r#"<credential absfname="x" purpose="payload"/>"#).unwrap_err();
        assert!(err.to_string().contains("missing required attribute"), "{err}");
    }

    #[test]
    fn serialize_round_trip() {
        let doc = r#"<credential absfname="RoundRobinGenerator" purpose="payload" security_class="front&amp;end" trust_domain="grid" context="{'items': ['a &quot;q&quot;', 'b'], 'type': 'text', 'n': 3}" type="generator" x="y"/>
<parameter name="VMId" value="RoundRobinGenerator" context="{'items': ['vm1'], 'type': 'string'}" type="generator"/>
<parameter name="slots" value="8" type="integer"/>
<parameter name="plain" value="line1&#10;line2"/>"#;
        let first = parse_config(doc).unwrap();
        let creds: Vec<_> = first.credentials.iter().map(|c| c.value.clone()).collect();
        let params: Vec<_> = first.parameters.iter().map(|p| p.value.clone()).collect();
        let second = parse_config(&serialize_config(&creds, &params)).unwrap();
        assert_eq!(second.credentials.iter().map(|c| c.value.clone()).collect::<Vec<_>>(), creds);
        assert_eq!(second.parameters.iter().map(|p| p.value.clone()).collect::<Vec<_>>(), params);
        assert_eq!(creds[0].context.as_ref().unwrap().get("n"), Some(&ContextValue::Integer(3)));
    }

    #[test]
    fn resolve_missing_file_names_path() {
        let parsed = parse_config(
            r#"<credential absfname="/no/such/dir/x.scitoken" purpose="request" security_class="f" trust_domain="grid" type="scitoken"/>"#,
        )
        .unwrap();
        let err = resolve_decls(&parsed.credentials, &GeneratorRegistry::with_builtins(), None).unwrap_err();
        assert!(err.to_string().contains("/no/such/dir/x.scitoken"), "{err}");
    }

    #[test]
    fn resolve_unknown_generator() {
        let parsed = parse_config(
            r#"<credential absfname="Nope" purpose="request" security_class="f" trust_domain="grid" context="{'type': 'x'}" type="generator"/>"#,
        )
        .unwrap();
        let err = resolve_decls(&parsed.credentials, &GeneratorRegistry::with_builtins(), None).unwrap_err();
        assert!(err.to_string().contains("unknown generator"), "{err}");
    }
}
