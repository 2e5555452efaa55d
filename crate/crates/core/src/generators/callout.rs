//! External generator executables ("callouts").
//!
//! Wire protocol: the executable is started with no payload arguments and
//! receives one UTF-8 JSON object on stdin, followed by end of stream:
//!
//! ```text
//! {"context": {...}, "kwargs": {...}, "args": {"site_name": ..., "trust_domain": ..., "purpose": ...}}
//! ```
//!
//! It must answer with one JSON object on stdout and exit 0:
//!
//! ```text
//! {"type": "<text>", "value": "<text>", "expiry": <int, optional>}
//! ```
//!
//! A nonzero exit is a failure; stderr is captured verbatim into the error.
//! `kwargs` is the context's `kwargs` map with the runtime extra arguments
//! filled in underneath it (configured kwargs win on conflict).

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;
use wait_timeout::ChildExt;

use super::{GeneratedValue, Generator, GeneratorError, GeneratorOutput, RuntimeArgs};
use crate::context::{ContextValue, GeneratorContext};

#[derive(Debug, Error)]
pub enum CalloutError {
    #[error("callout not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("callout failed ({}): {stderr}", exit_description(*.code))]
    Failed { code: Option<i32>, stderr: String },
    #[error("callout protocol error: {0}")]
    Protocol(String),
    #[error("callout timed out after {0:?}")]
    Timeout(Duration),
    #[error("callout I/O error: {0}")]
    Io(String),
}

fn exit_description(code: Option<i32>) -> String {
    match code {
        Some(code) => format!("exit code {code}"),
        None => "killed by signal".to_string(),
    }
}

/// Everything needed for one callout execution.
#[derive(Debug, Clone, Copy)]
pub struct CalloutInvocation<'a> {
    pub executable: &'a Path,
    pub context: &'a GeneratorContext,
    pub kwargs: &'a BTreeMap<String, ContextValue>,
    pub args: &'a RuntimeArgs,
    pub timeout: Duration,
}

impl CalloutInvocation<'_> {
    /// The exact JSON document written to the callout's stdin.
    pub fn request_json(&self) -> serde_json::Value {
        let mut kwargs: serde_json::Map<String, serde_json::Value> =
            self.args.extra().iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
        kwargs.extend(self.kwargs.iter().map(|(k, v)| (k.clone(), v.to_json())));
        serde_json::json!({
            "context": self.context.to_json(),
            "kwargs": kwargs,
            "args": self.args.to_json(),
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Reply {
    #[serde(rename = "type")]
    type_tag: String,
    value: String,
    #[serde(default)]
    expiry: Option<i64>,
}

/// Absolute paths are used as-is; relative ones are taken from `plugin_dir`
/// (or the working directory when there is none).
pub fn resolve_executable(callout: &str, plugin_dir: Option<&Path>) -> Result<PathBuf, CalloutError> {
    let path = Path::new(callout);
    let resolved = if path.is_absolute() {
        path.to_path_buf()
    } else {
        plugin_dir.map(|d| d.join(path)).unwrap_or_else(|| path.to_path_buf())
    };
    if resolved.is_file() {
        Ok(resolved)
    } else {
        Err(CalloutError::NotFound(resolved))
    }
}

/// Run one callout and parse its reply. The returned type tag is the
/// context's `"type"`; a reply announcing a different type is a protocol
/// error.
pub fn run_callout(invocation: &CalloutInvocation<'_>) -> Result<GeneratedValue, CalloutError> {
    let expected_type = invocation
        .context
        .type_tag()
        .ok_or_else(|| CalloutError::Protocol("context has no \"type\"".into()))?
        .to_string();
    if !invocation.executable.is_file() {
        return Err(CalloutError::NotFound(invocation.executable.to_path_buf()));
    }

    let request = invocation.request_json().to_string();
    let mut child = spawn(invocation.executable)?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = thread::spawn(move || {
        // A callout that exits without reading its input closes the pipe
        // early; that is reported through its exit status instead.
        match stdin.write_all(request.as_bytes()) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            other => other,
        }
    });
    let stdout = drain(child.stdout.take().expect("piped stdout"));
    let stderr = drain(child.stderr.take().expect("piped stderr"));

    let status = match child.wait_timeout(invocation.timeout).map_err(|e| CalloutError::Io(e.to_string()))? {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            // Reader threads are left to finish on their own: a grandchild
            // may still hold the pipes open.
            return Err(CalloutError::Timeout(invocation.timeout));
        }
    };

    let write_result = writer.join().unwrap_or(Ok(()));
    let stdout = stdout.join().unwrap_or_default();
    let stderr = String::from_utf8_lossy(&stderr.join().unwrap_or_default()).into_owned();

    if !status.success() {
        return Err(CalloutError::Failed { code: status.code(), stderr });
    }
    write_result.map_err(|e| CalloutError::Io(format!("writing request: {e}")))?;

    let text = std::str::from_utf8(&stdout)
        .map_err(|e| CalloutError::Protocol(format!("reply is not UTF-8: {e}")))?;
    let reply: Reply = serde_json::from_str(text.trim())
        .map_err(|e| CalloutError::Protocol(format!("unparseable reply: {e}")))?;
    if reply.type_tag != expected_type {
        return Err(CalloutError::Protocol(format!(
            "reply type '{}' does not match context type '{expected_type}'",
            reply.type_tag
        )));
    }
    Ok(GeneratedValue { type_tag: expected_type, value: reply.value, expiry: reply.expiry })
}

fn spawn(executable: &Path) -> Result<Child, CalloutError> {
    const ETXTBSY: i32 = 26;
    let mut attempts = 0;
    loop {
        let result = Command::new(executable)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn();
        match result {
            Ok(child) => return Ok(child),
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(CalloutError::NotFound(executable.to_path_buf()))
            }
            // A freshly written script can be briefly busy while another
            // thread's fork still holds its write descriptor.
            Err(e) if e.raw_os_error() == Some(ETXTBSY) && attempts < 20 => {
                attempts += 1;
                thread::sleep(Duration::from_millis(10));
            }
            Err(e) => return Err(CalloutError::Io(format!("spawning {}: {e}", executable.display()))),
        }
    }
}

fn drain(mut pipe: impl Read + Send + 'static) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = pipe.read_to_end(&mut buf);
        buf
    })
}

/// Generator backed by an executable found in the plugin directory.
/// Context `kwargs` (if a map) is forwarded.
#[derive(Debug, Clone)]
pub(crate) struct ExternalGenerator {
    executable: PathBuf,
    timeout: Duration,
}

impl ExternalGenerator {
    pub(crate) fn new(executable: PathBuf, timeout: Duration) -> Self {
        Self { executable, timeout }
    }
}

impl Generator for ExternalGenerator {
    fn generate(&mut self, ctx: &GeneratorContext, args: &RuntimeArgs) -> Result<GeneratorOutput, GeneratorError> {
        let kwargs = ctx.get("kwargs").and_then(ContextValue::as_map).cloned().unwrap_or_default();
        let value = run_callout(&CalloutInvocation {
            executable: &self.executable,
            context: ctx,
            kwargs: &kwargs,
            args,
            timeout: self.timeout,
        })?;
        Ok(GeneratorOutput { value: value.value, expiry: value.expiry })
    }
}
