use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{Map, Value};

use crate::credential::{sign_hs256, verify_hs256, Credential, CredentialError, CredentialKind, Source};

/// Current time in epoch seconds.
pub fn unix_now() -> i64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs() as i64).unwrap_or(0)
}

/// Mint an HS256-signed token carrying `claims` plus `iat = now` and
/// `exp = now + ttl` (these two override any given values).
///
/// # Panics
///
/// If `ttl` is zero or `kind` is not a token kind.
pub fn issue_test_token(kind: CredentialKind, claims: &Map<String, Value>, key: &[u8], ttl: u64, now: i64) -> Credential {
    assert!(ttl > 0, "ttl must be positive");
    assert!(kind.is_token(), "{kind} is not a token kind");
    let mut claims = claims.clone();
    claims.insert("iat".into(), Value::from(now));
    claims.insert("exp".into(), Value::from(now + ttl as i64));
    Credential::new(kind, sign_hs256(&claims, key)).with_source(Source::Literal("test-token".into()))
}

/// HMAC check for a locally issued token. `Ok(false)` on a wrong key.
pub fn verify_test_token(cred: &Credential, key: &[u8]) -> Result<bool, CredentialError> {
    match cred.string() {
        Some(s) => verify_hs256(s, key),
        None => Ok(false),
    }
}
