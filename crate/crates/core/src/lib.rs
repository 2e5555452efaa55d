//! # credstack
//!
//! Credential lifecycle toolkit for pilot-based workload management.
//!
//! - [`credential`]: typed credentials whose attributes are derived from the
//!   stored string, token/X.509 decoding, pairs, validation.
//! - [`generators`]: a registry of runtime generators (round-robin, random,
//!   callout adapter, test tokens) and the external callout protocol.
//! - [`parameters`]: typed security parameters, literal or generated.
//! - [`config`]: `<credential/>` and `<parameter/>` declaration parsing.
//! - [`lifecycle`]: owner-only credential storage, renewal, invalidation.

pub mod config;
pub mod context;
pub mod credential;
pub mod generators;
pub mod lifecycle;
pub mod parameters;

pub use config::{parse_config, CredentialDecl, ParameterDecl, ParsedConfig};
pub use context::{parse_context_literal, ContextSyntaxError, ContextValue, GeneratorContext};
pub use credential::{
    decode_token, make_pair, private_of, Credential, CredentialError, CredentialKind, CredentialLike,
    CredentialPair, Payload, Purpose, Source, TokenClaims, ValidityReport,
};
pub use generators::{GeneratedValue, GeneratorError, GeneratorHandle, GeneratorRegistry, RuntimeArgs};
pub use lifecycle::{
    issue_test_token, needs_renewal, CredentialStore, RenewalPolicy, RenewOutcome, StoreEntry, StoreError,
    TickReport,
};
pub use parameters::{resolve_parameter, ParamType, Parameter, ResolvedValue};
