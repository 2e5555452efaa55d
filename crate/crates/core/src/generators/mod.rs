//! Runtime generators for credentials and parameter values.
//!
//! A generator is looked up by name in a [`GeneratorRegistry`] and
//! instantiated with a [`GeneratorContext`] (which must carry a `"type"`
//! key). The resulting [`GeneratorHandle`] owns any per-instance state, such
//! as a round-robin cursor, and produces a [`GeneratedValue`] per call.
//!
//! Names that are not registered in-process are looked up as executables in
//! the registry's plugin directory and driven through the callout wire
//! protocol (see [`callout`]).

mod builtin;
pub mod callout;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

pub use builtin::{
    LegacyGenerator, RandomGenerator, RoundRobinGenerator, TestTokenGenerator, NO_ITEMS_MESSAGE,
};
pub use callout::{run_callout, CalloutError, CalloutInvocation};

use crate::context::{ContextValue, GeneratorContext};
use crate::credential::Purpose;

/// Default limit on a single callout execution.
pub const DEFAULT_CALLOUT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("invalid context for {generator}: {message}")]
    InvalidContext { generator: String, message: String },
    /// Failure reported by the generator itself. Displays as the bare message.
    #[error("{0}")]
    Generation(String),
    #[error(transparent)]
    Callout(#[from] CalloutError),
}

impl GeneratorError {
    pub fn invalid_context(generator: &str, message: impl Into<String>) -> Self {
        GeneratorError::InvalidContext { generator: generator.to_string(), message: message.into() }
    }

    /// Whether this is a load-time problem (bad name or context) as opposed
    /// to a failure while generating.
    pub fn is_configuration_error(&self) -> bool {
        matches!(
            self,
            GeneratorError::UnknownGenerator(_)
                | GeneratorError::InvalidContext { .. }
                | GeneratorError::Callout(CalloutError::NotFound(_))
        )
    }
}

/// Runtime arguments handed to every `generate` call.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuntimeArgs {
    pub site_name: Option<String>,
    pub trust_domain: Option<String>,
    pub purpose: Option<Purpose>,
    extra: BTreeMap<String, ContextValue>,
}

impl RuntimeArgs {
    const RESERVED: [&'static str; 3] = ["site_name", "trust_domain", "purpose"];

    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_site(mut self, site: impl Into<String>) -> Self {
        self.site_name = Some(site.into());
        self
    }

    pub fn with_trust_domain(mut self, trust_domain: impl Into<String>) -> Self {
        self.trust_domain = Some(trust_domain.into());
        self
    }

    pub fn with_purpose(mut self, purpose: Purpose) -> Self {
        self.purpose = Some(purpose);
        self
    }

    /// Add an extra argument. Keys naming a dedicated field are dropped.
    pub fn with_extra(mut self, key: impl Into<String>, value: impl Into<ContextValue>) -> Self {
        let key = key.into();
        if Self::RESERVED.contains(&key.as_str()) {
            log::warn!("ignoring extra runtime argument '{key}': it names a dedicated field");
        } else {
            self.extra.insert(key, value.into());
        }
        self
    }

    pub fn extra(&self) -> &BTreeMap<String, ContextValue> {
        &self.extra
    }

    pub(crate) fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "site_name": self.site_name,
            "trust_domain": self.trust_domain,
            "purpose": self.purpose.map(Purpose::as_str),
        })
    }
}

/// What a generator implementation returns. The handle adds the type tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorOutput {
    pub value: String,
    pub expiry: Option<i64>,
}

impl From<String> for GeneratorOutput {
    fn from(value: String) -> Self {
        Self { value, expiry: None }
    }
}

impl From<&str> for GeneratorOutput {
    fn from(value: &str) -> Self {
        value.to_string().into()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratedValue {
    /// Always equal to the context's `"type"`.
    pub type_tag: String,
    pub value: String,
    pub expiry: Option<i64>,
}

/// A generator instance. `context` is the instance's settings map.
pub trait Generator: Send {
    fn generate(&mut self, context: &GeneratorContext, args: &RuntimeArgs) -> Result<GeneratorOutput, GeneratorError>;
}

/// Settings available to factories when building an instance.
#[derive(Debug, Clone)]
pub struct LoadEnv {
    pub plugin_dir: Option<PathBuf>,
    pub callout_timeout: Duration,
}

pub type GeneratorFactory =
    Arc<dyn Fn(&GeneratorContext, &LoadEnv) -> Result<Box<dyn Generator>, GeneratorError> + Send + Sync>;

pub struct GeneratorHandle {
    name: String,
    context: GeneratorContext,
    inner: Box<dyn Generator>,
}

impl GeneratorHandle {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn context(&self) -> &GeneratorContext {
        &self.context
    }

    pub fn type_tag(&self) -> &str {
        self.context.type_tag().unwrap_or_default()
    }

    pub fn generate(&mut self, args: &RuntimeArgs) -> Result<GeneratedValue, GeneratorError> {
        let output = self.inner.generate(&self.context, args)?;
        Ok(GeneratedValue { type_tag: self.type_tag().to_string(), value: output.value, expiry: output.expiry })
    }
}

impl fmt::Debug for GeneratorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorHandle")
            .field("name", &self.name)
            .field("context", &self.context)
            .finish_non_exhaustive()
    }
}

/// Name → factory table. Safe to share between threads.
pub struct GeneratorRegistry {
    factories: RwLock<HashMap<String, GeneratorFactory>>,
    warnings: Mutex<Vec<String>>,
    env: LoadEnv,
}

impl Default for GeneratorRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl GeneratorRegistry {
    /// An empty registry.
    pub fn new() -> Self {
        Self {
            factories: RwLock::new(HashMap::new()),
            warnings: Mutex::new(Vec::new()),
            env: LoadEnv { plugin_dir: None, callout_timeout: DEFAULT_CALLOUT_TIMEOUT },
        }
    }

    /// A registry preloaded with `RoundRobinGenerator`, `RandomGenerator`,
    /// `LegacyGenerator` and `TestTokenGenerator`.
    pub fn with_builtins() -> Self {
        let registry = Self::new();
        builtin::register_builtins(&registry);
        registry
    }

    pub fn with_plugin_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.env.plugin_dir = Some(dir.into());
        self
    }

    pub fn with_callout_timeout(mut self, timeout: Duration) -> Self {
        self.env.callout_timeout = timeout;
        self
    }

    pub fn plugin_dir(&self) -> Option<&Path> {
        self.env.plugin_dir.as_deref()
    }

    /// Register `factory` under `name`. A later registration of the same
    /// name replaces the earlier one and records a warning.
    ///
    /// # Panics
    ///
    /// If `name` is empty.
    pub fn register_generator<F>(&self, name: &str, factory: F)
    where
        F: Fn(&GeneratorContext, &LoadEnv) -> Result<Box<dyn Generator>, GeneratorError> + Send + Sync + 'static,
    {
        assert!(!name.is_empty(), "generator name must not be empty");
        let previous = self.factories.write().unwrap().insert(name.to_string(), Arc::new(factory));
        if previous.is_some() {
            let message = format!("generator '{name}' re-registered; previous factory replaced");
            log::warn!("{message}");
            self.warnings.lock().unwrap().push(message);
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.read().unwrap().contains_key(name)
    }

    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<_> = self.factories.read().unwrap().keys().cloned().collect();
        names.sort();
        names
    }

    pub fn warnings(&self) -> Vec<String> {
        self.warnings.lock().unwrap().clone()
    }

    pub fn factory(&self, name: &str) -> Option<GeneratorFactory> {
        self.factories.read().unwrap().get(name).cloned()
    }

    /// Instantiate `name` with `context`.
    ///
    /// In-process registrations win; otherwise an executable called `name`
    /// in the plugin directory is used as an external generator.
    pub fn load_generator(&self, name: &str, context: GeneratorContext) -> Result<GeneratorHandle, GeneratorError> {
        let factory = match self.factory(name) {
            Some(factory) => factory,
            None => match self.external_plugin(name) {
                Some(path) => Arc::new(move |_: &GeneratorContext, env: &LoadEnv| {
                    Ok(Box::new(callout::ExternalGenerator::new(path.clone(), env.callout_timeout))
                        as Box<dyn Generator>)
                }),
                None => return Err(GeneratorError::UnknownGenerator(name.to_string())),
            },
        };
        context.validate().map_err(|m| GeneratorError::invalid_context(name, m))?;
        let inner = factory(&context, &self.env)?;
        Ok(GeneratorHandle { name: name.to_string(), context, inner })
    }

    fn external_plugin(&self, name: &str) -> Option<PathBuf> {
        if name.contains(['/', '\\']) || name.starts_with('.') {
            return None;
        }
        let path = self.env.plugin_dir.as_ref()?.join(name);
        path.is_file().then_some(path)
    }
}

impl fmt::Debug for GeneratorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorRegistry")
            .field("names", &self.names())
            .field("env", &self.env)
            .finish()
    }
}
