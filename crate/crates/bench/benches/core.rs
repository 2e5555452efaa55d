use criterion::{black_box, criterion_group, criterion_main, Criterion};
use serde_json::Map;

use credstack_core::{
    decode_token, issue_test_token, parse_config, parse_context_literal, CredentialKind, GeneratorRegistry, RuntimeArgs,
};

const DECLS: &str = r#"
<credential absfname="RoundRobinGenerator" purpose="payload" security_class="frontend" trust_domain="grid"
    context="{'items': ['str1', 'str2', 'str3'], 'type': 'text'}" type="generator"/>
<parameter name="VMId" value="RoundRobinGenerator"
    context="{'items': ['vm1', 'vm2', 'vm3'], 'type': 'string'}" type="generator"/>
"#;

fn benches(c: &mut Criterion) {
    let token = issue_test_token(CredentialKind::SciToken, &Map::new(), b"bench", 3600, 0);
    let raw = token.string().unwrap().to_vec();
    c.bench_function("decode_token", |b| b.iter(|| decode_token(black_box(&raw)).unwrap()));

    let literal = "{'callout': 'example_callout.py', 'type': 'scitoken', 'kwargs': {'param1': 'value1', 'param2': 'value2'}}";
    c.bench_function("parse_context_literal", |b| b.iter(|| parse_context_literal(black_box(literal)).unwrap()));

    c.bench_function("parse_config", |b| b.iter(|| parse_config(black_box(DECLS)).unwrap()));

    let registry = GeneratorRegistry::with_builtins();
    let ctx = parse_context_literal("{'items': ['str1', 'str2', 'str3'], 'type': 'text'}").unwrap();
    let mut handle = registry.load_generator("RoundRobinGenerator", ctx).unwrap();
    let args = RuntimeArgs::new();
    c.bench_function("round_robin_generate", |b| b.iter(|| handle.generate(&args).unwrap()));
}

criterion_group!(core, benches);
criterion_main!(core);
