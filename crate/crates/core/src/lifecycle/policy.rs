use serde::Serialize;

use super::StoreError;
use crate::credential::Credential;

/// Lower bound on a derived renewal threshold, in seconds.
pub const MIN_DERIVED_THRESHOLD: u64 = 300;
pub const DEFAULT_MIN_INTERVAL: u64 = 60;

/// When to renew: once fewer than `threshold_seconds` of validity remain,
/// and no more often than every `min_interval_seconds`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RenewalPolicy {
    threshold_seconds: u64,
    min_interval_seconds: u64,
}

impl RenewalPolicy {
    pub fn new(threshold_seconds: u64, min_interval_seconds: u64) -> Result<Self, StoreError> {
        if threshold_seconds == 0 {
            return Err(StoreError::InvalidPolicy("threshold_seconds must be positive".into()));
        }
        Ok(Self { threshold_seconds, min_interval_seconds })
    }

    /// Policy used when none is configured: a third of the credential's
    /// original lifetime, but at least [`MIN_DERIVED_THRESHOLD`].
    pub fn derived_for(cred: &Credential) -> Self {
        let lifetime = match (cred.issued_at(), cred.expires_at()) {
            (Ok(Some(start)), Ok(Some(end))) if end > start => (end - start) as u64,
            _ => 0,
        };
        Self {
            threshold_seconds: (lifetime / 3).max(MIN_DERIVED_THRESHOLD),
            min_interval_seconds: DEFAULT_MIN_INTERVAL,
        }
    }

    pub fn threshold_seconds(&self) -> u64 {
        self.threshold_seconds
    }

    pub fn min_interval_seconds(&self) -> u64 {
        self.min_interval_seconds
    }
}
