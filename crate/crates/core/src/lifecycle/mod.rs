//! Credential storage, renewal and invalidation.
//!
//! A [`CredentialStore`] manages one directory:
//!
//! ```text
//! <dir>/<id>.<ext>    credential string, mode 0600
//! <dir>/index.json    entry metadata, rewritten atomically
//! ```
//!
//! Entry ids are derived from (purpose, trust domain, source), so storing a
//! credential with the same provenance again replaces the earlier one.
//! Mutations take `&mut self`; a single store value is the single writer.

mod fsutil;
mod issue;
mod policy;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use fsutil::{ensure_owner_only, mode_of, std_rename, write_atomic, RenameFn};
pub use issue::{issue_test_token, unix_now, verify_test_token};
pub use policy::{RenewalPolicy, DEFAULT_MIN_INTERVAL, MIN_DERIVED_THRESHOLD};

use crate::context::{ContextValue, GeneratorContext};
use crate::credential::{Credential, CredentialError, CredentialKind, Purpose, Source};
use crate::generators::{GeneratorError, GeneratorHandle, GeneratorRegistry, RuntimeArgs};

pub const INDEX_FILE: &str = "index.json";
const INDEX_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("storage error on {path}: {message}")]
    Storage { path: PathBuf, message: String },
    #[error("no active entry with id {0}")]
    NotFound(String),
    #[error("entry {0} has no renewer")]
    NoRenewer(String),
    #[error("cannot store an empty credential")]
    EmptyCredential,
    #[error("renewal of {id} rejected: {message}")]
    RenewalRejected { id: String, message: String },
    #[error("renewal of {id} failed: {source}")]
    Generator {
        id: String,
        #[source]
        source: GeneratorError,
    },
    #[error("invalid index: {0}")]
    Index(String),
    #[error("invalid renewal policy: {0}")]
    InvalidPolicy(String),
    #[error(transparent)]
    Credential(#[from] CredentialError),
}

impl StoreError {
    fn io(path: &Path, err: io::Error) -> Self {
        StoreError::Storage { path: path.to_path_buf(), message: err.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryStatus {
    Active,
    Invalidated,
}

/// Generator used to renew an entry, by name and context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenewerSpec {
    pub generator: String,
    pub context: GeneratorContext,
}

impl RenewerSpec {
    pub fn new(generator: impl Into<String>, context: GeneratorContext) -> Self {
        Self { generator: generator.into(), context }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreEntry {
    pub id: String,
    pub credential: Credential,
    pub stored_at: i64,
    pub last_renewed: Option<i64>,
    pub path: PathBuf,
    pub renewer: Option<RenewerSpec>,
    pub status: EntryStatus,
}

impl StoreEntry {
    pub fn is_active(&self) -> bool {
        self.status == EntryStatus::Active
    }
}

/// Stable id for a credential: hash of purpose, trust domain and source.
pub fn entry_id(cred: &Credential) -> String {
    let mut hasher = Sha256::new();
    hasher.update(cred.purpose().map(Purpose::as_str).unwrap_or(""));
    hasher.update([0]);
    hasher.update(cred.trust_domain().unwrap_or(""));
    hasher.update([0]);
    hasher.update(cred.source().descriptor());
    hasher.finalize()[..16].iter().map(|b| format!("{b:02x}")).collect()
}

/// True iff the credential expires and has less than the policy threshold
/// left. Credentials without an expiry never need renewal.
pub fn needs_renewal(entry: &StoreEntry, now: i64, policy: &RenewalPolicy) -> bool {
    match entry.credential.expires_at() {
        Ok(Some(exp)) => exp - now < policy.threshold_seconds() as i64,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RenewOutcome {
    Renewed(Box<StoreEntry>),
    /// Rate limited; the previous renewal was too recent.
    Skipped { id: String, retry_in: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TickItem {
    pub id: String,
    pub reason: String,
}

/// Outcome of one [`CredentialStore::tick`] pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TickReport {
    pub renewed: Vec<String>,
    pub skipped: Vec<TickItem>,
    pub failed: Vec<TickItem>,
}

impl TickReport {
    pub fn is_success(&self) -> bool {
        self.failed.is_empty()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexFile {
    version: u32,
    entries: Vec<IndexRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexRecord {
    id: String,
    kind: CredentialKind,
    purpose: Option<Purpose>,
    trust_domain: Option<String>,
    #[serde(default)]
    security_class: Option<String>,
    stored_at: i64,
    #[serde(default)]
    last_renewed: Option<i64>,
    status: EntryStatus,
    source: String,
    file: String,
    #[serde(default)]
    renewer: Option<RenewerRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RenewerRecord {
    generator: String,
    context: serde_json::Value,
}

fn parse_source(descriptor: &str) -> Source {
    match descriptor.split_once(':') {
        Some(("file", rest)) => Source::File(PathBuf::from(rest)),
        Some(("generator", rest)) => Source::Generator(rest.to_string()),
        Some(("literal", rest)) => Source::Literal(rest.to_string()),
        _ => Source::Literal(descriptor.to_string()),
    }
}

pub struct CredentialStore {
    dir: PathBuf,
    entries: BTreeMap<String, StoreEntry>,
    registry: Arc<GeneratorRegistry>,
    handles: HashMap<String, GeneratorHandle>,
    rename: RenameFn,
}

impl fmt::Debug for CredentialStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CredentialStore")
            .field("dir", &self.dir)
            .field("entries", &self.entries.keys().collect::<Vec<_>>())
            .finish_non_exhaustive()
    }
}

impl CredentialStore {
    /// Open the store in `dir`, loading `index.json` if present. The
    /// directory must already exist.
    pub fn open(dir: impl Into<PathBuf>, registry: Arc<GeneratorRegistry>) -> Result<Self, StoreError> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(StoreError::Storage { path: dir, message: "not a directory".into() });
        }
        let mut store = Self { dir, entries: BTreeMap::new(), registry, handles: HashMap::new(), rename: std_rename };
        store.load_index()?;
        Ok(store)
    }

    /// Replace the rename step used by atomic writes. Meant for simulating
    /// interrupted writes in tests.
    pub fn set_rename_fn(&mut self, rename: RenameFn) {
        self.rename = rename;
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn index_path(&self) -> PathBuf {
        self.dir.join(INDEX_FILE)
    }

    fn load_index(&mut self) -> Result<(), StoreError> {
        let index_path = self.index_path();
        let bytes = match std::fs::read(&index_path) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(()),
            Err(e) => return Err(StoreError::io(&index_path, e)),
        };
        let index: IndexFile = serde_json::from_slice(&bytes).map_err(|e| StoreError::Index(e.to_string()))?;
        if index.version != INDEX_VERSION {
            return Err(StoreError::Index(format!("unsupported index version {}", index.version)));
        }
        for record in index.entries {
            let path = self.dir.join(&record.file);
            let contents = match record.status {
                EntryStatus::Active => std::fs::read(&path).map_err(|e| StoreError::io(&path, e))?,
                EntryStatus::Invalidated => Vec::new(),
            };
            let mut credential = Credential::new(record.kind, contents).with_source(parse_source(&record.source));
            if let Some(p) = record.purpose {
                credential = credential.with_purpose(p);
            }
            if let Some(td) = record.trust_domain {
                credential = credential.with_trust_domain(td);
            }
            if let Some(sc) = record.security_class {
                credential = credential.with_security_class(sc);
            }
            let renewer = match record.renewer {
                None => None,
                Some(r) => match ContextValue::from_json(&r.context) {
                    Ok(ContextValue::Map(map)) => Some(RenewerSpec::new(r.generator, GeneratorContext::new(map))),
                    _ => return Err(StoreError::Index(format!("entry {}: invalid renewer context", record.id))),
                },
            };
            self.entries.insert(
                record.id.clone(),
                StoreEntry {
                    id: record.id,
                    credential,
                    stored_at: record.stored_at,
                    last_renewed: record.last_renewed,
                    path,
                    renewer,
                    status: record.status,
                },
            );
        }
        Ok(())
    }

    fn write_index(&self) -> Result<(), StoreError> {
        let entries = self
            .entries
            .values()
            .map(|e| IndexRecord {
                id: e.id.clone(),
                kind: e.credential.kind(),
                purpose: e.credential.purpose(),
                trust_domain: e.credential.trust_domain().map(str::to_owned),
                security_class: e.credential.security_class().map(str::to_owned),
                stored_at: e.stored_at,
                last_renewed: e.last_renewed,
                status: e.status,
                source: e.credential.source().descriptor(),
                file: e.path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                renewer: e
                    .renewer
                    .as_ref()
                    .map(|r| RenewerRecord { generator: r.generator.clone(), context: r.context.to_json() }),
            })
            .collect();
        let json = serde_json::to_vec_pretty(&IndexFile { version: INDEX_VERSION, entries })
            .map_err(|e| StoreError::Index(e.to_string()))?;
        let path = self.index_path();
        write_atomic(&path, &json, self.rename).map_err(|e| StoreError::io(&path, e))
    }

    fn write_credential(&self, path: &Path, cred: &Credential) -> Result<(), StoreError> {
        let bytes = cred.string().ok_or(StoreError::EmptyCredential)?;
        write_atomic(path, bytes, self.rename).map_err(|e| StoreError::io(path, e))
    }

    /// Write `cred` as `<id>.<ext>` and record it. Storing under an existing
    /// id replaces that entry.
    pub fn store(&mut self, cred: Credential, renewer: Option<RenewerSpec>, now: i64) -> Result<&StoreEntry, StoreError> {
        if cred.string().is_none() {
            return Err(StoreError::EmptyCredential);
        }
        let id = entry_id(&cred);
        let path = self.dir.join(format!("{id}.{}", cred.kind().canonical_extension()));
        self.write_credential(&path, &cred)?;

        if let Some(old) = self.entries.get(&id) {
            if old.path != path && old.path.exists() {
                let _ = std::fs::remove_file(&old.path);
            }
            if old.renewer != renewer {
                self.handles.remove(&id);
            }
        }
        let entry = StoreEntry {
            id: id.clone(),
            credential: cred,
            stored_at: now,
            last_renewed: None,
            path,
            renewer,
            status: EntryStatus::Active,
        };
        self.entries.insert(id.clone(), entry);
        self.write_index()?;
        Ok(&self.entries[&id])
    }

    /// Active entry by id.
    pub fn lookup(&self, id: &str) -> Result<&StoreEntry, StoreError> {
        self.entries
            .get(id)
            .filter(|e| e.is_active())
            .ok_or_else(|| StoreError::NotFound(id.to_string()))
    }

    pub fn active_entries(&self) -> impl Iterator<Item = &StoreEntry> {
        self.entries.values().filter(|e| e.is_active())
    }

    pub fn is_empty(&self) -> bool {
        self.active_entries().next().is_none()
    }

    /// Generate a replacement credential with the entry's renewer and store
    /// it under the same id. A renewal that would shorten validity, or that
    /// produces an undecodable credential, is rejected.
    pub fn renew(
        &mut self,
        id: &str,
        args: &RuntimeArgs,
        now: i64,
        policy: &RenewalPolicy,
    ) -> Result<RenewOutcome, StoreError> {
        let entry = self.lookup(id)?.clone();
        let renewer = entry.renewer.clone().ok_or_else(|| StoreError::NoRenewer(id.to_string()))?;
        if let Some(last) = entry.last_renewed {
            let elapsed = now - last;
            if elapsed < policy.min_interval_seconds() as i64 {
                return Ok(RenewOutcome::Skipped {
                    id: id.to_string(),
                    retry_in: policy.min_interval_seconds() as i64 - elapsed,
                });
            }
        }

        let args = args.clone().with_extra("now", now);
        let generated = {
            let handle = match self.handles.entry(id.to_string()) {
                std::collections::hash_map::Entry::Occupied(o) => o.into_mut(),
                std::collections::hash_map::Entry::Vacant(v) => v.insert(
                    self.registry
                        .load_generator(&renewer.generator, renewer.context.clone())
                        .map_err(|source| StoreError::Generator { id: id.to_string(), source })?,
                ),
            };
            handle.generate(&args).map_err(|source| StoreError::Generator { id: id.to_string(), source })?
        };

        let renewed = entry.credential.with_string(generated.value);
        let reject = |message: String| StoreError::RenewalRejected { id: id.to_string(), message };
        let report = renewed.validate(now);
        if !report.structurally_valid {
            return Err(reject(report.problems.join("; ")));
        }
        if let (Ok(Some(old_exp)), Ok(Some(new_exp))) = (entry.credential.expires_at(), renewed.expires_at()) {
            if new_exp < old_exp {
                return Err(reject(format!("new expiry {new_exp} is earlier than current expiry {old_exp}")));
            }
        }

        self.write_credential(&entry.path, &renewed)?;
        let updated = StoreEntry { credential: renewed, stored_at: now, last_renewed: Some(now), ..entry };
        self.entries.insert(id.to_string(), updated.clone());
        self.write_index()?;
        Ok(RenewOutcome::Renewed(Box::new(updated)))
    }

    /// Mark an entry invalidated and delete its file. Invalidating an
    /// already invalidated entry is a no-op.
    pub fn invalidate(&mut self, id: &str) -> Result<&StoreEntry, StoreError> {
        let entry = self.entries.get_mut(id).ok_or_else(|| StoreError::NotFound(id.to_string()))?;
        if entry.status == EntryStatus::Invalidated {
            return Ok(&self.entries[id]);
        }
        entry.status = EntryStatus::Invalidated;
        entry.credential = entry.credential.with_string(Vec::new());
        self.handles.remove(id);
        let path = entry.path.clone();
        let removed = match std::fs::remove_file(&path) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => Err(StoreError::io(&path, e)),
            _ => Ok(()),
        };
        self.write_index()?;
        removed?;
        Ok(&self.entries[id])
    }

    /// One renewal pass over all active entries. With no policy, each entry
    /// uses [`RenewalPolicy::derived_for`]. Failures are collected in the
    /// report and never stop the pass.
    pub fn tick(&mut self, now: i64, policy: Option<&RenewalPolicy>, args: &RuntimeArgs) -> TickReport {
        let mut report = TickReport::default();
        let due: Vec<(String, RenewalPolicy, bool)> = self
            .active_entries()
            .filter_map(|e| {
                let policy = policy.copied().unwrap_or_else(|| RenewalPolicy::derived_for(&e.credential));
                needs_renewal(e, now, &policy).then(|| (e.id.clone(), policy, e.renewer.is_some()))
            })
            .collect();

        for (id, policy, has_renewer) in due {
            if !has_renewer {
                report.skipped.push(TickItem { id, reason: "no renewer configured".into() });
                continue;
            }
            match self.renew(&id, args, now, &policy) {
                Ok(RenewOutcome::Renewed(_)) => report.renewed.push(id),
                Ok(RenewOutcome::Skipped { retry_in, .. }) => {
                    report.skipped.push(TickItem { id, reason: format!("rate limited, retry in {retry_in}s") })
                }
                Err(e) => report.failed.push(TickItem { id, reason: e.to_string() }),
            }
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::{json, Map, Value};

    const KEY: &str = "fixture-key";

    fn registry() -> Arc<GeneratorRegistry> {
        Arc::new(GeneratorRegistry::with_builtins())
    }

    fn token(sub: &str, ttl: u64, now: i64) -> Credential {
        let claims: Map<String, Value> = json!({"sub": sub}).as_object().unwrap().clone();
        issue_test_token(CredentialKind::SciToken, &claims, KEY.as_bytes(), ttl, now)
            .with_purpose(Purpose::Payload)
            .with_trust_domain("grid")
            .with_source(Source::Generator(format!("fixture-{sub}")))
    }

    fn token_renewer(ttl: i64) -> RenewerSpec {
        let mut ctx: GeneratorContext = [("type", "scitoken"), ("key", KEY)].into_iter().collect();
        ctx.insert("ttl", ttl);
        RenewerSpec::new("TestTokenGenerator", ctx)
    }

    #[test]
    fn store_writes_owner_only_file_with_canonical_extension() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = CredentialStore::open(dir.path(), registry()).unwrap();
        let entry = store.store(token("a", 3600, 0), None, 0).unwrap().clone();
        assert_eq!(entry.path.extension().unwrap(), "scitoken");
        assert_eq!(entry.path.file_stem().unwrap().to_string_lossy(), entry.id);
        assert_eq!(mode_of(&entry.path).unwrap(), 0o600);
        assert_eq!(mode_of(&store.index_path()).unwrap(), 0o600);
        let reread = Credential::from_file(&entry.path).unwrap();
        assert_eq!(reread.kind(), CredentialKind::SciToken);
        assert_eq!(reread.string(), entry.credential.string());
    }

    #[test]
    fn same_id_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = CredentialStore::open(dir.path(), registry()).unwrap();
        let first = store.store(token("a", 100, 0), None, 0).unwrap().clone();
        let second = store.store(token("a", 200, 5), None, 5).unwrap().clone();
        assert_eq!(first.id, second.id);
        assert_eq!(store.active_entries().count(), 1);
        assert_eq!(std::fs::read(&second.path).unwrap(), second.credential.string().unwrap());
    }

    #[test]
    fn unwritable_dir_is_storage_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(CredentialStore::open(dir.path().join("missing"), registry()).is_err());
        let mut store = CredentialStore::open(dir.path(), registry()).unwrap();
        std::fs::remove_dir(dir.path()).unwrap();
        assert!(matches!(store.store(token("a", 10, 0), None, 0), Err(StoreError::Storage { .. })));
    }

    #[test]
    fn needs_renewal_truth_table() {
        let policy = RenewalPolicy::new(300, 0).unwrap();
        let now = 10_000;
        let entry = |cred| StoreEntry {
            id: "x".into(),
            credential: cred,
            stored_at: 0,
            last_renewed: None,
            path: PathBuf::new(),
            renewer: None,
            status: EntryStatus::Active,
        };
        assert!(needs_renewal(&entry(token("a", 100, now)), now, &policy));
        assert!(!needs_renewal(&entry(token("a", 10_000, now)), now, &policy));
        assert!(!needs_renewal(&entry(Credential::new(CredentialKind::Generic, "x")), now, &policy));
    }

    #[test]
    fn renew_extends_expiry() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = CredentialStore::open(dir.path(), registry()).unwrap();
        let id = store.store(token("a", 100, 0), Some(token_renewer(3600)), 0).unwrap().id.clone();
        let policy = RenewalPolicy::new(300, 60).unwrap();
        let RenewOutcome::Renewed(entry) = store.renew(&id, &RuntimeArgs::new(), 50, &policy).unwrap() else {
            panic!("expected renewal")
        };
        assert_eq!(entry.credential.expires_at().unwrap(), Some(3650));
        assert!(verify_test_token(&entry.credential, KEY.as_bytes()).unwrap());
        assert_eq!(entry.credential.purpose(), Some(Purpose::Payload));

        let again = store.renew(&id, &RuntimeArgs::new(), 51, &policy).unwrap();
        assert_eq!(again, RenewOutcome::Skipped { id: id.clone(), retry_in: 59 });
    }

    #[test]
    fn renew_without_renewer() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = CredentialStore::open(dir.path(), registry()).unwrap();
        let id = store.store(token("a", 100, 0), None, 0).unwrap().id.clone();
        let err = store.renew(&id, &RuntimeArgs::new(), 0, &RenewalPolicy::new(1, 0).unwrap()).unwrap_err();
        assert!(matches!(err, StoreError::NoRenewer(_)));
    }

    #[test]
    fn renewal_that_shortens_validity_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = CredentialStore::open(dir.path(), registry()).unwrap();
        let original = token("a", 5000, 0);
        let id = store.store(original.clone(), Some(token_renewer(10)), 0).unwrap().id.clone();
        let err = store.renew(&id, &RuntimeArgs::new(), 100, &RenewalPolicy::new(300, 0).unwrap()).unwrap_err();
        assert!(matches!(err, StoreError::RenewalRejected { .. }));
        assert_eq!(store.lookup(&id).unwrap().credential, original);
    }

    #[test]
    fn invalidate_removes_file_and_hides_entry() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = CredentialStore::open(dir.path(), registry()).unwrap();
        let entry = store.store(token("a", 100, 0), None, 0).unwrap().clone();
        let invalidated = store.invalidate(&entry.id).unwrap();
        assert_eq!(invalidated.status, EntryStatus::Invalidated);
        assert!(!entry.path.exists());
        assert!(store.invalidate(&entry.id).is_ok());
        assert!(matches!(store.lookup(&entry.id), Err(StoreError::NotFound(_))));
        assert!(matches!(store.invalidate("nope"), Err(StoreError::NotFound(_))));
    }

    #[test]
    fn index_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let (kept, dropped) = {
            let mut store = CredentialStore::open(dir.path(), registry()).unwrap();
            let kept = store.store(token("a", 100, 0), Some(token_renewer(3600)), 7).unwrap().clone();
            let dropped = store.store(token("b", 100, 0), None, 7).unwrap().id.clone();
            store.invalidate(&dropped).unwrap();
            (kept, dropped)
        };
        let store = CredentialStore::open(dir.path(), registry()).unwrap();
        assert_eq!(store.lookup(&kept.id).unwrap(), &kept);
        assert!(store.lookup(&dropped).is_err());

        let index: Value = serde_json::from_slice(&std::fs::read(store.index_path()).unwrap()).unwrap();
        let first = &index["entries"][0];
        for key in ["id", "kind", "purpose", "trust_domain", "stored_at", "status", "source"] {
            assert!(first.get(key).is_some(), "index entry missing {key}");
        }
    }

    #[test]
    fn tick_isolates_failures_and_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = CredentialStore::open(dir.path(), registry()).unwrap();
        let now = 1_000;
        let due = store.store(token("due", 100, now), Some(token_renewer(3600)), now).unwrap().id.clone();
        let broken_ctx: GeneratorContext = [("type", "scitoken")].into_iter().collect();
        let broken = store
            .store(token("broken", 100, now), Some(RenewerSpec::new("RoundRobinGenerator", broken_ctx)), now)
            .unwrap()
            .id
            .clone();
        let manual = store.store(token("manual", 100, now), None, now).unwrap().id.clone();
        store.store(token("fresh", 10_000, now), Some(token_renewer(3600)), now).unwrap();

        let policy = RenewalPolicy::new(300, 0).unwrap();
        let report = store.tick(now, Some(&policy), &RuntimeArgs::new());
        assert_eq!(report.renewed, vec![due.clone()]);
        assert_eq!(report.failed.len(), 1);
        assert_eq!(report.failed[0].id, broken);
        assert_eq!(report.skipped, vec![TickItem { id: manual, reason: "no renewer configured".into() }]);

        let second = store.tick(now, Some(&policy), &RuntimeArgs::new());
        assert!(second.renewed.is_empty());
    }

    #[test]
    fn empty_store_tick() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = CredentialStore::open(dir.path(), registry()).unwrap();
        assert_eq!(store.tick(0, None, &RuntimeArgs::new()), TickReport::default());
    }
}
