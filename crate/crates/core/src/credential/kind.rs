use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{jwt, x509, CredentialError};

/// Credential kinds.
///
/// `Token` is the parent of `IdToken` and `SciToken`. `X509Pair` is both a
/// pair and an `X509Cert`. `SshKeyPair` pairs two `Generic` key blobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CredentialKind {
    Generic,
    Token,
    IdToken,
    SciToken,
    X509Cert,
    X509Pair,
    SshKeyPair,
}

impl CredentialKind {
    pub const ALL: [CredentialKind; 7] = [
        CredentialKind::Generic,
        CredentialKind::Token,
        CredentialKind::IdToken,
        CredentialKind::SciToken,
        CredentialKind::X509Cert,
        CredentialKind::X509Pair,
        CredentialKind::SshKeyPair,
    ];

    /// The kind this one specializes, if any.
    pub fn parent(self) -> Option<CredentialKind> {
        match self {
            CredentialKind::IdToken | CredentialKind::SciToken => Some(CredentialKind::Token),
            CredentialKind::X509Pair => Some(CredentialKind::X509Cert),
            CredentialKind::SshKeyPair => Some(CredentialKind::Generic),
            _ => None,
        }
    }

    /// True if `self` is `ancestor` or descends from it.
    pub fn is_a(self, ancestor: CredentialKind) -> bool {
        let mut current = Some(self);
        while let Some(kind) = current {
            if kind == ancestor {
                return true;
            }
            current = kind.parent();
        }
        false
    }

    pub fn is_token(self) -> bool {
        self.is_a(CredentialKind::Token)
    }

    pub fn is_x509(self) -> bool {
        self.is_a(CredentialKind::X509Cert)
    }

    pub fn is_pair(self) -> bool {
        matches!(self, CredentialKind::X509Pair | CredentialKind::SshKeyPair)
    }

    /// Extension (without the dot) used when this kind is written to disk.
    pub fn canonical_extension(self) -> &'static str {
        match self {
            CredentialKind::Generic => "cred",
            CredentialKind::Token => "jwt",
            CredentialKind::IdToken => "idtoken",
            CredentialKind::SciToken => "scitoken",
            CredentialKind::X509Cert | CredentialKind::X509Pair => "pem",
            CredentialKind::SshKeyPair => "pub",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CredentialKind::Generic => "Generic",
            CredentialKind::Token => "Token",
            CredentialKind::IdToken => "IdToken",
            CredentialKind::SciToken => "SciToken",
            CredentialKind::X509Cert => "X509Cert",
            CredentialKind::X509Pair => "X509Pair",
            CredentialKind::SshKeyPair => "SshKeyPair",
        }
    }

    /// Kind for a generated value's content type tag (`"scitoken"`,
    /// `"idtoken"`, ...). Unknown tags such as `"text"` map to `Generic`.
    pub fn from_type_tag(tag: &str) -> CredentialKind {
        match tag.to_ascii_lowercase().as_str() {
            "scitoken" => CredentialKind::SciToken,
            "idtoken" => CredentialKind::IdToken,
            "token" | "jwt" => CredentialKind::Token,
            "x509" | "x509_cert" | "pem" => CredentialKind::X509Cert,
            _ => CredentialKind::Generic,
        }
    }
}

impl fmt::Display for CredentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CredentialKind {
    type Err = CredentialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CredentialKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| CredentialError::UnknownKind(s.to_string()))
    }
}

/// Extension → kind table consulted by [`classify_file`] before content
/// sniffing. `.pub` is special-cased: it is an `SshKeyPair` only when an
/// extensionless sibling (the private key) exists, otherwise `Generic`.
pub const EXTENSION_TABLE: &[(&str, CredentialKind)] = &[
    ("idtoken", CredentialKind::IdToken),
    ("scitoken", CredentialKind::SciToken),
    ("jwt", CredentialKind::Token),
    ("pem", CredentialKind::X509Cert),
    ("crt", CredentialKind::X509Cert),
    ("pub", CredentialKind::SshKeyPair),
    ("cred", CredentialKind::Generic),
];

pub fn kind_for_extension(ext: &str) -> Option<CredentialKind> {
    EXTENSION_TABLE
        .iter()
        .find(|(e, _)| e.eq_ignore_ascii_case(ext))
        .map(|(_, k)| *k)
}

/// Determine a credential file's kind from its extension, falling back to
/// content sniffing (JWT shape, then PEM armor).
pub fn classify_file(path: &Path, contents: &[u8]) -> Result<CredentialKind, CredentialError> {
    if let Some(kind) = path.extension().and_then(|e| e.to_str()).and_then(kind_for_extension) {
        if kind == CredentialKind::SshKeyPair && !path.with_extension("").is_file() {
            return Ok(CredentialKind::Generic);
        }
        return Ok(kind);
    }
    if jwt::looks_like_jwt(contents) {
        return Ok(CredentialKind::Token);
    }
    if x509::has_pem_armor(contents) {
        return Ok(CredentialKind::X509Cert);
    }
    Err(CredentialError::UnrecognizedCredential(path.display().to_string()))
}
