//! JWT decoding and local HS256 signing.
//!
//! Decoding is structural: the three segments are split, the header and
//! claim segments are base64url-decoded and parsed as JSON objects, and the
//! signature segment is only checked for valid encoding. Issuer signatures
//! are never verified here. [`sign_hs256`] and [`verify_hs256`] exist for
//! tokens minted locally (fixtures, examples, the test-token generator).

use base64::alphabet;
use base64::engine::{DecodePaddingMode, GeneralPurpose, GeneralPurposeConfig};
use base64::Engine;
use hmac::{Hmac, Mac};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::Sha256;

use super::CredentialError;

type HmacSha256 = Hmac<Sha256>;

/// base64url that tolerates (but does not emit) trailing padding.
const B64URL: GeneralPurpose = GeneralPurpose::new(
    &alphabet::URL_SAFE,
    GeneralPurposeConfig::new()
        .with_encode_padding(false)
        .with_decode_padding_mode(DecodePaddingMode::Indifferent),
);

/// Claims whose values must be non-negative integral epoch seconds.
const TIME_CLAIMS: [&str; 3] = ["exp", "nbf", "iat"];

/// Decoded claim map of a JWT-family credential.
///
/// Accessors return `None` for missing claims (and for claims of the wrong
/// JSON type) instead of failing.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TokenClaims {
    claims: Map<String, Value>,
}

impl TokenClaims {
    pub fn from_map(claims: Map<String, Value>) -> Result<Self, CredentialError> {
        for name in TIME_CLAIMS {
            if let Some(value) = claims.get(name) {
                if epoch_seconds(value).is_none() {
                    return Err(CredentialError::MalformedToken(format!(
                        "claim '{name}' is not a non-negative integer"
                    )));
                }
            }
        }
        Ok(Self { claims })
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.claims.get(name)
    }

    pub fn as_map(&self) -> &Map<String, Value> {
        &self.claims
    }

    pub fn into_map(self) -> Map<String, Value> {
        self.claims
    }

    fn text(&self, name: &str) -> Option<&str> {
        self.claims.get(name).and_then(Value::as_str)
    }

    pub fn sub(&self) -> Option<&str> {
        self.text("sub")
    }

    pub fn scope(&self) -> Option<&str> {
        self.text("scope")
    }

    pub fn iss(&self) -> Option<&str> {
        self.text("iss")
    }

    pub fn jti(&self) -> Option<&str> {
        self.text("jti")
    }

    /// Audience. A single-element array is flattened to its element; longer
    /// arrays are joined with a single space.
    pub fn aud(&self) -> Option<String> {
        match self.claims.get("aud")? {
            Value::String(s) => Some(s.clone()),
            Value::Array(items) => {
                let parts: Vec<&str> = items.iter().filter_map(Value::as_str).collect();
                if parts.is_empty() {
                    None
                } else {
                    Some(parts.join(" "))
                }
            }
            _ => None,
        }
    }

    pub fn exp(&self) -> Option<i64> {
        self.claims.get("exp").and_then(epoch_seconds)
    }

    pub fn nbf(&self) -> Option<i64> {
        self.claims.get("nbf").and_then(epoch_seconds)
    }

    pub fn iat(&self) -> Option<i64> {
        self.claims.get("iat").and_then(epoch_seconds)
    }
}

/// Integers and integral floats, normalized to i64. Negative or fractional
/// values are rejected.
fn epoch_seconds(value: &Value) -> Option<i64> {
    let n = value.as_number()?;
    if let Some(i) = n.as_i64() {
        return (i >= 0).then_some(i);
    }
    if let Some(u) = n.as_u64() {
        return i64::try_from(u).ok();
    }
    let f = n.as_f64()?;
    if f.is_finite() && f >= 0.0 && f.fract() == 0.0 && f <= i64::MAX as f64 {
        Some(f as i64)
    } else {
        None
    }
}

/// Decode a JWT without verifying its signature.
///
/// Surrounding whitespace (including a trailing newline from a token file)
/// is stripped first. Byte input must be UTF-8.
pub fn decode_token(raw: impl AsRef<[u8]>) -> Result<TokenClaims, CredentialError> {
    let text = std::str::from_utf8(raw.as_ref()).map_err(|e| CredentialError::Encoding(e.to_string()))?;
    let text = text.trim();
    if text.is_empty() {
        return Err(CredentialError::MalformedToken("empty token".into()));
    }
    let (header, claims, signature) = split_segments(text)?;

    decode_object(header, "header")?;
    let claims = decode_object(claims, "payload")?;
    B64URL
        .decode(signature)
        .map_err(|e| CredentialError::MalformedToken(format!("signature segment: {e}")))?;

    TokenClaims::from_map(claims)
}

fn split_segments(text: &str) -> Result<(&str, &str, &str), CredentialError> {
    let mut parts = text.split('.');
    match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(h), Some(c), Some(s), None) if !h.is_empty() && !c.is_empty() => Ok((h, c, s)),
        _ => Err(CredentialError::MalformedToken(
            "expected three dot-separated base64url segments".into(),
        )),
    }
}

fn decode_object(segment: &str, what: &str) -> Result<Map<String, Value>, CredentialError> {
    let bytes = B64URL
        .decode(segment)
        .map_err(|e| CredentialError::MalformedToken(format!("{what} segment: {e}")))?;
    match serde_json::from_slice::<Value>(&bytes) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CredentialError::MalformedToken(format!("{what} is not a JSON object"))),
        Err(e) => Err(CredentialError::MalformedToken(format!("{what} is not valid JSON: {e}"))),
    }
}

/// Cheap check used by file sniffing: does the text look like a decodable JWT?
pub(crate) fn looks_like_jwt(contents: &[u8]) -> bool {
    decode_token(contents).is_ok()
}

/// Encode and sign `claims` with HMAC-SHA256.
pub fn sign_hs256(claims: &Map<String, Value>, key: &[u8]) -> String {
    let header = serde_json::json!({"alg": "HS256", "typ": "JWT"});
    let header = B64URL.encode(header.to_string());
    let body = B64URL.encode(Value::Object(claims.clone()).to_string());
    let signing_input = format!("{header}.{body}");
    let signature = B64URL.encode(mac(key, signing_input.as_bytes()).finalize().into_bytes());
    format!("{signing_input}.{signature}")
}

/// Check the HS256 signature of `token` against `key`.
///
/// Returns `Ok(false)` for a wrong key or tampered token, and an error only
/// when the token is structurally unusable.
pub fn verify_hs256(token: impl AsRef<[u8]>, key: &[u8]) -> Result<bool, CredentialError> {
    let text = std::str::from_utf8(token.as_ref()).map_err(|e| CredentialError::Encoding(e.to_string()))?;
    let (header, claims, signature) = split_segments(text.trim())?;
    let header_map = decode_object(header, "header")?;
    if header_map.get("alg").and_then(Value::as_str) != Some("HS256") {
        return Ok(false);
    }
    let signature = B64URL
        .decode(signature)
        .map_err(|e| CredentialError::MalformedToken(format!("signature segment: {e}")))?;
    let mut mac = mac(key, header.as_bytes());
    mac.update(b".");
    mac.update(claims.as_bytes());
    Ok(mac.verify_slice(&signature).is_ok())
}

fn mac(key: &[u8], data: &[u8]) -> HmacSha256 {
    // HMAC accepts keys of any length.
    let mut mac = HmacSha256::new_from_slice(key).expect("hmac key of any length");
    mac.update(data);
    mac
}
