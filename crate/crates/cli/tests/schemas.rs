//! Reports validate against the JSON schemas shipped in `schemas/`.

use std::path::PathBuf;

use serde_json::Value;
use sketchy_cli::commands::*;
use sketchy_cli::Method;
use sketchy_core::matcore::gaussian_map;
use sketchy_core::synth::{cardiac_like_spec, SynthSpec};
use sketchy_core::RandomStream;

fn schema(name: &str) -> jsonschema::Validator {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "schemas", &format!("{name}.v1.json")].iter().collect();
    let text = std::fs::read_to_string(path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(name: &str, value: &Value) {
    let v = schema(name);
    let errors: Vec<String> = v.iter_errors(value).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

#[test]
fn reports_match_their_schemas() {
    let a = gaussian_map(120, 100, RandomStream::new(1, 0)).unwrap();
    let args = SketchArgs { rank: 2, k: None, s: None, p: Some(0.8), q: None, seed: 0 };
    let opts = ApproxOptions { trials: 2, incoherence: true, bounds: true, ..ApproxOptions::default() };
    let run = approx(&a, Method::SketchyCoreSvd, &args.config(), &opts).unwrap();
    assert_valid("run-report", &serde_json::to_value(&run).unwrap());
    let plain = approx(
        &a,
        Method::Baseline(sketchy_core::baselines::BaselineMethod::Cohen),
        &args.config(),
        &ApproxOptions::default(),
    )
    .unwrap();
    assert_valid("run-report", &serde_json::to_value(&plain).unwrap());

    let cmp = compare(&a, &[Method::SketchyCoreSvd, Method::SketchySvd], &[0.8, 0.9], &args, &ApproxOptions::default())
        .unwrap();
    assert_valid("compare-report", &serde_json::to_value(&cmp).unwrap());

    let scr = scree(&a, Some(5), DEFAULT_MAX_DENSE).unwrap();
    assert_valid("scree-report", &serde_json::to_value(&scr).unwrap());

    let mut vopts = VerifyOptions::new(0);
    vopts.trials = Some(5);
    let ver = verify(Suite::All, &vopts).unwrap();
    assert_valid("verify-report", &serde_json::to_value(&ver).unwrap());

    let bopts =
        BenchOptions { rows: 120, cols: 100, sketch: args, sweep: vec![0.8], reps: 1, max_dense: DEFAULT_MAX_DENSE };
    let b = bench(&a, &bopts).unwrap();
    assert_valid("bench-report", &serde_json::to_value(&b).unwrap());

    assert_valid("synth-spec", &serde_json::to_value(cardiac_like_spec()).unwrap());
}

#[test]
fn schema_rejects_a_broken_report() {
    let a = gaussian_map(60, 50, RandomStream::new(2, 0)).unwrap();
    let run = approx(&a, Method::SketchySvd, &SketchArgs::new(2).config(), &ApproxOptions::default()).unwrap();
    let mut value = serde_json::to_value(&run).unwrap();
    value["err"]["mean"] = Value::from(-1.0);
    assert!(!schema("run-report").is_valid(&value));
    value["err"]["mean"] = Value::from(0.5);
    value["schema_version"] = Value::from(2);
    assert!(!schema("run-report").is_valid(&value));
}

#[test]
fn synth_spec_json_round_trips() {
    let spec = cardiac_like_spec().with_seed(5);
    let text = serde_json::to_string(&spec).unwrap();
    assert_eq!(serde_json::from_str::<SynthSpec>(&text).unwrap(), spec);
}
