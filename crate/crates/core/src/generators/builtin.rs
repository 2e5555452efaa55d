use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{Map, Value};

use super::callout::{self, CalloutInvocation};
use super::{Generator, GeneratorError, GeneratorOutput, GeneratorRegistry, RuntimeArgs};
use crate::context::{ContextValue, GeneratorContext};
use crate::credential::CredentialKind;
use crate::lifecycle::{issue_test_token, unix_now};

pub const NO_ITEMS_MESSAGE: &str = "No items provided for generation";

pub(super) fn register_builtins(registry: &GeneratorRegistry) {
    registry.register_generator("RoundRobinGenerator", |ctx, _| {
        Ok(Box::new(RoundRobinGenerator::from_context(ctx)?))
    });
    registry.register_generator("RandomGenerator", |ctx, _| Ok(Box::new(RandomGenerator::from_context(ctx)?)));
    registry.register_generator("LegacyGenerator", |ctx, env| {
        Ok(Box::new(LegacyGenerator::from_context(ctx, env.plugin_dir.as_deref(), env.callout_timeout)?))
    });
    registry.register_generator("TestTokenGenerator", |ctx, _| {
        Ok(Box::new(TestTokenGenerator::from_context(ctx)?))
    });
}

/// `items` as rendered text; missing means empty.
fn context_items(generator: &str, ctx: &GeneratorContext) -> Result<Vec<String>, GeneratorError> {
    match ctx.get("items") {
        None => Ok(Vec::new()),
        Some(ContextValue::List(items)) => Ok(items.iter().map(ContextValue::render).collect()),
        Some(_) => Err(GeneratorError::invalid_context(generator, "\"items\" must be a list")),
    }
}

/// Cycles through `items` in list order, starting at the first item. The
/// cursor belongs to the instance.
#[derive(Debug, Clone)]
pub struct RoundRobinGenerator {
    items: Vec<String>,
    cursor: usize,
}

impl RoundRobinGenerator {
    pub fn from_context(ctx: &GeneratorContext) -> Result<Self, GeneratorError> {
        Ok(Self { items: context_items("RoundRobinGenerator", ctx)?, cursor: 0 })
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }
}

impl Generator for RoundRobinGenerator {
    fn generate(&mut self, _: &GeneratorContext, _: &RuntimeArgs) -> Result<GeneratorOutput, GeneratorError> {
        if self.items.is_empty() {
            return Err(GeneratorError::Generation(NO_ITEMS_MESSAGE.into()));
        }
        let item = self.items[self.cursor].clone();
        self.cursor = (self.cursor + 1) % self.items.len();
        Ok(item.into())
    }
}

/// Uniform random choice from `items`. An integer `seed` in the context
/// makes the sequence reproducible.
#[derive(Debug, Clone)]
pub struct RandomGenerator {
    items: Vec<String>,
    rng: StdRng,
}

impl RandomGenerator {
    pub fn from_context(ctx: &GeneratorContext) -> Result<Self, GeneratorError> {
        let rng = match ctx.get("seed") {
            None => StdRng::from_entropy(),
            Some(ContextValue::Integer(seed)) => StdRng::seed_from_u64(*seed as u64),
            Some(_) => return Err(GeneratorError::invalid_context("RandomGenerator", "\"seed\" must be an integer")),
        };
        Ok(Self { items: context_items("RandomGenerator", ctx)?, rng })
    }
}

impl Generator for RandomGenerator {
    fn generate(&mut self, _: &GeneratorContext, _: &RuntimeArgs) -> Result<GeneratorOutput, GeneratorError> {
        if self.items.is_empty() {
            return Err(GeneratorError::Generation(NO_ITEMS_MESSAGE.into()));
        }
        let index = self.rng.gen_range(0..self.items.len());
        Ok(self.items[index].clone().into())
    }
}

/// Adapter for callout executables: context keys `callout` (required),
/// `type`, and an optional `kwargs` map forwarded to the executable.
#[derive(Debug, Clone)]
pub struct LegacyGenerator {
    executable: PathBuf,
    kwargs: BTreeMap<String, ContextValue>,
    timeout: Duration,
}

impl LegacyGenerator {
    pub fn from_context(
        ctx: &GeneratorContext,
        plugin_dir: Option<&std::path::Path>,
        default_timeout: Duration,
    ) -> Result<Self, GeneratorError> {
        let callout = ctx
            .get_str("callout")
            .filter(|c| !c.is_empty())
            .ok_or_else(|| GeneratorError::invalid_context("LegacyGenerator", "missing required \"callout\" key"))?;
        let kwargs = match ctx.get("kwargs") {
            None => BTreeMap::new(),
            Some(ContextValue::Map(map)) => map.clone(),
            Some(_) => return Err(GeneratorError::invalid_context("LegacyGenerator", "\"kwargs\" must be a map")),
        };
        let timeout = match ctx.get("timeout") {
            None => default_timeout,
            Some(ContextValue::Integer(secs)) if *secs > 0 => Duration::from_secs(*secs as u64),
            Some(_) => {
                return Err(GeneratorError::invalid_context("LegacyGenerator", "\"timeout\" must be a positive integer"))
            }
        };
        let executable = callout::resolve_executable(callout, plugin_dir)?;
        Ok(Self { executable, kwargs, timeout })
    }
}

impl Generator for LegacyGenerator {
    fn generate(&mut self, ctx: &GeneratorContext, args: &RuntimeArgs) -> Result<GeneratorOutput, GeneratorError> {
        let value = callout::run_callout(&CalloutInvocation {
            executable: &self.executable,
            context: ctx,
            kwargs: &self.kwargs,
            args,
            timeout: self.timeout,
        })?;
        Ok(GeneratorOutput { value: value.value, expiry: value.expiry })
    }
}

/// Mints HS256 test tokens. Context keys: `key` (required), `ttl` seconds
/// (default 3600), `claims` map. The issue time is the runtime argument
/// `now` when present, otherwise the system clock.
#[derive(Debug, Clone)]
pub struct TestTokenGenerator {
    key: Vec<u8>,
    ttl: u64,
    claims: Map<String, Value>,
    kind: CredentialKind,
}

impl TestTokenGenerator {
    pub fn from_context(ctx: &GeneratorContext) -> Result<Self, GeneratorError> {
        const NAME: &str = "TestTokenGenerator";
        let key = ctx
            .get_str("key")
            .filter(|k| !k.is_empty())
            .ok_or_else(|| GeneratorError::invalid_context(NAME, "missing required \"key\""))?;
        let ttl = match ctx.get("ttl") {
            None => 3600,
            Some(ContextValue::Integer(t)) if *t > 0 => *t as u64,
            Some(_) => return Err(GeneratorError::invalid_context(NAME, "\"ttl\" must be a positive integer")),
        };
        let claims = match ctx.get("claims").map(ContextValue::to_json) {
            None => Map::new(),
            Some(Value::Object(map)) => map,
            Some(_) => return Err(GeneratorError::invalid_context(NAME, "\"claims\" must be a map")),
        };
        let mut kind = CredentialKind::from_type_tag(ctx.type_tag().unwrap_or_default());
        if !kind.is_token() {
            kind = CredentialKind::Token;
        }
        Ok(Self { key: key.as_bytes().to_vec(), ttl, claims, kind })
    }
}

impl Generator for TestTokenGenerator {
    fn generate(&mut self, _: &GeneratorContext, args: &RuntimeArgs) -> Result<GeneratorOutput, GeneratorError> {
        let now = args.extra().get("now").and_then(ContextValue::as_integer).unwrap_or_else(unix_now);
        let token = issue_test_token(self.kind, &self.claims, &self.key, self.ttl, now);
        let value = String::from_utf8(token.string().unwrap_or_default().to_vec())
            .map_err(|e| GeneratorError::Generation(e.to_string()))?;
        Ok(GeneratorOutput { value, expiry: Some(now + self.ttl as i64) })
    }
}
