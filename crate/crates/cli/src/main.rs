//! `credstack` command-line tool.
//!
//! Exit codes: 0 success, 1 domain failure (invalid credential, generator
//! error, failed renewal, bad declaration), 2 usage or environment problem
//! (unreadable file, unknown generator, bad context).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use chrono::{DateTime, SecondsFormat};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use credstack_core::config::{parse_config, resolve_decl, resolve_parameter_decl};
use credstack_core::credential::{classify_file, CredentialError};
use credstack_core::lifecycle::{unix_now, CredentialStore, RenewalPolicy};
use credstack_core::parameters::ParameterValue;
use credstack_core::{
    Credential, CredentialKind, GeneratorContext, GeneratorError, GeneratorRegistry, Payload, Purpose, RuntimeArgs,
    ValidityReport,
};

#[derive(Parser)]
#[command(name = "credstack", version, about = "Inspect, validate, generate and renew credentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the kind and derived attributes of a credential file.
    Inspect {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Exit 0 iff the credential is well formed and currently valid.
    Validate {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a generator once and print its value.
    Generate {
        #[arg(long)]
        generator: String,
        /// Context map, as JSON or a single-quoted literal.
        #[arg(long)]
        context: String,
        #[arg(long)]
        site: Option<String>,
        #[arg(long)]
        trust_domain: Option<String>,
        #[arg(long)]
        purpose: Option<Purpose>,
        #[command(flatten)]
        plugins: Plugins,
        #[command(flatten)]
        common: Common,
    },
    /// Run one renewal pass over a credential store.
    Renew {
        #[arg(long)]
        store_dir: PathBuf,
        /// Run a single pass. This is the only mode; accepted for scripts.
        #[arg(long)]
        once: bool,
        /// Renewal threshold in seconds. Derived per credential when absent.
        #[arg(long)]
        threshold: Option<u64>,
        #[arg(long, default_value_t = credstack_core::lifecycle::DEFAULT_MIN_INTERVAL)]
        min_interval: u64,
        #[arg(long)]
        site: Option<String>,
        #[command(flatten)]
        plugins: Plugins,
        #[command(flatten)]
        common: Common,
    },
    /// Parse a declaration file and resolve every declaration.
    ConfigCheck {
        path: PathBuf,
        #[command(flatten)]
        plugins: Plugins,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Emit one JSON object instead of text.
    #[arg(long)]
    json: bool,
    /// Current time as epoch seconds.
    #[arg(long)]
    now: Option<i64>,
}

impl Common {
    fn now(&self) -> i64 {
        self.now.unwrap_or_else(unix_now)
    }
}

#[derive(Args)]
struct Plugins {
    /// Directory searched for executable generators and callouts.
    #[arg(long, env = "CREDSTACK_PLUGIN_DIR")]
    plugin_dir: Option<PathBuf>,
}

impl Plugins {
    fn registry(&self) -> GeneratorRegistry {
        let registry = GeneratorRegistry::with_builtins();
        match &self.plugin_dir {
            Some(dir) => registry.with_plugin_dir(dir),
            None => registry,
        }
    }
}

const SUCCESS: u8 = 0;
const FAILURE: u8 = 1;
const USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Inspect { path, common } => inspect(&path, &common),
        Command::Validate { path, common } => validate(&path, &common),
        Command::Generate { generator, context, site, trust_domain, purpose, plugins, common } => {
            let mut args = RuntimeArgs::new();
            if let Some(site) = site {
                args = args.with_site(site);
            }
            if let Some(td) = trust_domain {
                args = args.with_trust_domain(td);
            }
            if let Some(p) = purpose {
                args = args.with_purpose(p);
            }
            generate(&generator, &context, &args, &plugins, &common)
        }
        Command::Renew { store_dir, once: _, threshold, min_interval, site, plugins, common } => {
            let args = site.map(|s| RuntimeArgs::new().with_site(s)).unwrap_or_default();
            renew(&store_dir, threshold, min_interval, &args, &plugins, &common)
        }
        Command::ConfigCheck { path, plugins, common } => config_check(&path, &plugins, &common),
    };
    ExitCode::from(code)
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values always serialize"));
}

fn iso8601(epoch: i64) -> Option<String> {
    DateTime::from_timestamp(epoch, 0).map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true))
}

fn read_file(path: &Path) -> Result<Vec<u8>, u8> {
    std::fs::read(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        USAGE
    })
}

/// Purpose and trust domain recorded for `path` in a store index next to it.
fn recorded_metadata(path: &Path) -> Option<Credential> {
    let dir = path.parent()?;
    if !dir.join(credstack_core::lifecycle::INDEX_FILE).is_file() {
        return None;
    }
    let store = CredentialStore::open(dir, Arc::new(GeneratorRegistry::new())).ok()?;
    let file_name = path.file_name()?;
    let found = store.active_entries().find(|e| e.path.file_name() == Some(file_name)).map(|e| e.credential.clone());
    found
}

fn optional<T>(r: Result<Option<T>, CredentialError>) -> Option<T> {
    r.ok().flatten()
}

fn inspect(path: &Path, common: &Common) -> u8 {
    let contents = match read_file(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let kind = match classify_file(path, &contents) {
        Ok(kind) => kind,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    let mut cred = Credential::new(kind, contents);
    if let Some(recorded) = recorded_metadata(path) {
        if let Some(p) = recorded.purpose() {
            cred = cred.with_purpose(p);
        }
        if let Some(td) = recorded.trust_domain() {
            cred = cred.with_trust_domain(td);
        }
    }

    let now = common.now();
    let report = cred.validate(now);
    let (subject, scope, issuer) = if kind.is_token() {
        (optional(cred.subject()), optional(cred.scope()), optional(cred.issuer()))
    } else {
        let leaf_subject = match cred.payload() {
            Ok(Some(Payload::X509(summary))) => summary.leaf().map(|c| c.subject.clone()),
            _ => None,
        };
        let leaf_issuer = match cred.payload() {
            Ok(Some(Payload::X509(summary))) => summary.leaf().map(|c| c.issuer.clone()),
            _ => None,
        };
        (leaf_subject, None, leaf_issuer)
    };
    let expires_at = optional(cred.expires_at());

    if common.json {
        print_json(&json!({
            "path": path.display().to_string(),
            "kind": kind.as_str(),
            "purpose": cred.purpose().map(Purpose::as_str),
            "trust_domain": cred.trust_domain(),
            "subject": subject,
            "scope": scope,
            "issuer": issuer,
            "expires_at": expires_at,
            "expires_at_iso": expires_at.and_then(iso8601),
            "validity": report,
        }));
        return SUCCESS;
    }

    println!("path: {}", path.display());
    println!("kind: {kind}");
    if let Some(p) = cred.purpose() {
        println!("purpose: {p}");
    }
    if let Some(td) = cred.trust_domain() {
        println!("trust_domain: {td}");
    }
    for (label, value) in [("sub", &subject), ("scope", &scope), ("iss", &issuer)] {
        if let Some(v) = value {
            println!("{label}: {v}");
        }
    }
    if let Some(exp) = expires_at {
        println!("exp: {}", iso8601(exp).unwrap_or_else(|| exp.to_string()));
    }
    println!("valid: {}", if report.is_valid() { "yes" } else { "no" });
    for problem in &report.problems {
        println!("problem: {problem}");
    }
    SUCCESS
}

fn validate(path: &Path, common: &Common) -> u8 {
    let contents = match read_file(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let (kind, report) = match classify_file(path, &contents) {
        Ok(kind) => (Some(kind), Credential::new(kind, contents).validate(common.now())),
        Err(e) => (None, ValidityReport::structure_failure(&e.to_string())),
    };

    if common.json {
        print_json(&json!({
            "path": path.display().to_string(),
            "kind": kind.map(CredentialKind::as_str),
            "valid": report.is_valid(),
            "report": report,
        }));
    } else {
        println!("{}: {}", path.display(), if report.is_valid() { "valid" } else { "invalid" });
        for problem in &report.problems {
            println!("problem: {problem}");
        }
    }
    if report.is_valid() {
        SUCCESS
    } else {
        FAILURE
    }
}

fn generator_exit(e: &GeneratorError) -> u8 {
    if e.is_configuration_error() {
        USAGE
    } else {
        FAILURE
    }
}

fn generate(name: &str, context: &str, args: &RuntimeArgs, plugins: &Plugins, common: &Common) -> u8 {
    let context = match GeneratorContext::parse(context) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid context: {e}");
            return USAGE;
        }
    };
    let registry = plugins.registry();
    let result = registry.load_generator(name, context).and_then(|mut handle| handle.generate(args));
    match result {
        Ok(generated) => {
            if common.json {
                print_json(&json!({
                    "generator": name,
                    "type": generated.type_tag,
                    "value": generated.value,
                    "expiry": generated.expiry,
                }));
            } else {
                println!("{}", generated.value);
            }
            SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            generator_exit(&e)
        }
    }
}

fn renew(
    store_dir: &Path,
    threshold: Option<u64>,
    min_interval: u64,
    args: &RuntimeArgs,
    plugins: &Plugins,
    common: &Common,
) -> u8 {
    let policy = match threshold.map(|t| RenewalPolicy::new(t, min_interval)).transpose() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    let mut store = match CredentialStore::open(store_dir, Arc::new(plugins.registry())) {
        Ok(store) => store,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    let report = store.tick(common.now(), policy.as_ref(), args);

    if common.json {
        print_json(&json!({
            "renewed": report.renewed.len(),
            "skipped": report.skipped.len(),
            "failed": report.failed.len(),
            "details": report,
        }));
    } else {
        println!("renewed: {}", report.renewed.len());
        println!("skipped: {}", report.skipped.len());
        println!("failed: {}", report.failed.len());
        for id in &report.renewed {
            println!("renewed {id}");
        }
        for item in &report.skipped {
            println!("skipped {}: {}", item.id, item.reason);
        }
        for item in &report.failed {
            eprintln!("failed {}: {}", item.id, item.reason);
        }
    }
    if report.is_success() {
        SUCCESS
    } else {
        FAILURE
    }
}

fn config_check(path: &Path, plugins: &Plugins, common: &Common) -> u8 {
    let text = match read_file(path).map(String::from_utf8) {
        Ok(Ok(text)) => text,
        Ok(Err(_)) => {
            eprintln!("error: {} is not UTF-8", path.display());
            return USAGE;
        }
        Err(code) => return code,
    };
    let parsed = match parse_config(&text) {
        Ok(parsed) => parsed,
        Err(e) => {
            if common.json {
                print_json(&json!({ "ok": false, "error": e.to_string(), "warnings": [], "declarations": [] }));
            } else {
                eprintln!("error: {e}");
            }
            return FAILURE;
        }
    };

    let registry = plugins.registry();
    let base_dir = path.parent();
    let mut results = Vec::new();
    for decl in &parsed.credentials {
        let outcome = resolve_decl(decl, &registry, base_dir).map(|_| ()).map_err(|e| e.to_string());
        results.push(("credential", decl.location, decl.absfname.clone(), outcome));
    }
    for decl in &parsed.parameters {
        let outcome = resolve_parameter_decl(decl, &registry).map_err(|e| e.to_string()).and_then(|mut p| {
            if matches!(p.value, ParameterValue::Literal(_)) {
                p.resolve(&RuntimeArgs::new()).map(|_| ()).map_err(|e| format!("<parameter> at {}: {e}", decl.location))
            } else {
                Ok(())
            }
        });
        results.push(("parameter", decl.location, decl.name.clone(), outcome));
    }
    let ok = results.iter().all(|r| r.3.is_ok());

    if common.json {
        let declarations: Vec<Value> = results
            .iter()
            .map(|(element, location, name, outcome)| {
                json!({
                    "element": element,
                    "line": location.line,
                    "column": location.column,
                    "name": name,
                    "ok": outcome.is_ok(),
                    "error": outcome.as_ref().err(),
                })
            })
            .collect();
        print_json(&json!({ "ok": ok, "warnings": parsed.warnings, "declarations": declarations }));
    } else {
        for warning in &parsed.warnings {
            eprintln!("warning: {warning}");
        }
        for (element, location, name, outcome) in &results {
            match outcome {
                Ok(()) => println!("OK    {element} {name} ({location})"),
                Err(message) => println!("ERROR {message}"),
            }
        }
    }
    if ok {
        SUCCESS
    } else {
        FAILURE
    }
}
