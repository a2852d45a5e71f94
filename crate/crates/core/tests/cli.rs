mod common;

use serde_json::{json, Value};

use common::*;
use strata::equations::Verdict;
use strata::cli::{self, execute, AimReport, AnalyzeReport, Command, DeformReport, Options, PlumbReport, ValidateReport};

fn doc(name: &str) -> Value {
    serde_json::from_str(&fixture_text(name)).unwrap()
}

fn run(cmd: Command, v: &Value) -> cli::Outcome {
    execute(cmd, &v.to_string(), &Options::default())
}

fn json_opts() -> Options {
    Options { json: true, ..Options::default() }
}

#[test]
fn all_fixtures_validate() {
    for name in FIXTURES {
        let out = execute(Command::Validate, &fixture_text(name), &Options::default());
        assert_eq!(out.code, 0, "{name}: {}", out.stdout);
    }
}

#[test]
fn malformed_number_is_a_parse_error() {
    let text = fixture_text("worked_plumbing").replacen("\"1+i\"", "\"1+*i\"", 1);
    let out = execute(Command::Validate, &text, &Options::default());
    assert_eq!(out.code, cli::EXIT_PARSE);
    assert!(out.stdout.starts_with("parse error at line"), "{}", out.stdout);
}

#[test]
fn truncated_document_is_a_parse_error() {
    let text = fixture_text("cusp");
    let out = execute(Command::Analyze, &text[..text.len() / 2], &Options::default());
    assert_eq!(out.code, cli::EXIT_PARSE);
}

#[test]
fn wrong_schema_is_rejected() {
    let mut v = doc("cusp");
    v["schema"] = json!("sbv-0");
    assert_eq!(run(Command::Validate, &v).code, cli::EXIT_PARSE);
}

#[test]
fn edge_to_missing_vertex_is_a_violation() {
    let mut v = doc("worked_plumbing");
    v["graph"]["edges"][0]["ends"][1] = json!("nowhere");
    let out = execute(Command::Validate, &v.to_string(), &json_opts());
    assert_eq!(out.code, cli::EXIT_VIOLATION);
    let rep: ValidateReport = serde_json::from_str(&out.stdout).unwrap();
    assert!(!rep.ok && !rep.violations.is_empty());
    assert_eq!(run(Command::Plumb, &v).code, cli::EXIT_VIOLATION);
}

#[test]
fn empty_system_is_consistent() {
    let mut v = doc("worked_plumbing");
    v["system"]["equations"] = json!([]);
    let out = execute(Command::Analyze, &v.to_string(), &json_opts());
    assert_eq!(out.code, 0, "{}", out.stdout);
    let rep: AnalyzeReport = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(rep.classes.len(), 2);
}

#[test]
fn missing_ratio_is_a_conversion_obstruction() {
    let mut v = doc("worked_plumbing");
    v["system"]["equations"].as_array_mut().unwrap().truncate(1);
    let out = execute(Command::Plumb, &v.to_string(), &json_opts());
    assert_eq!(out.code, cli::EXIT_CONVERSION, "{}", out.stdout);
    let rep: PlumbReport = serde_json::from_str(&out.stdout).unwrap();
    assert!(rep.obstruction.unwrap().contains("λ_e2"));
}

#[test]
fn deformation_needs_a_real_system() {
    let mut v = doc("worked_plumbing");
    v["system"]["flags"]["real"] = json!(false);
    assert_eq!(run(Command::Deform, &v).code, cli::EXIT_HYPOTHESIS);
}

#[test]
fn worked_plumbing_table() {
    let out = execute(Command::Plumb, &fixture_text("worked_plumbing"), &Options::default());
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("exp(f1) s_e1 - s_e2 = 0"), "{}", out.stdout);
}

#[test]
fn three_nodes_carry_an_obligation() {
    let text = fixture_text("three_horizontal_nodes");
    let out = execute(Command::Analyze, &text, &json_opts());
    assert_eq!(out.code, 0);
    let rep: AnalyzeReport = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(rep.classes, vec![vec!["e1".to_string(), "e2".into(), "e3".into()]]);
    assert_eq!(rep.certificate.verdict, Verdict::ConsistentWithObligations);
    assert_eq!(rep.certificate.obligations, vec![vec!["e1".to_string(), "e2".into(), "e3".into()]]);
    let assumed = execute(Command::Analyze, &text, &Options { json: true, assume_theorems: true, ..Options::default() });
    let rep: AnalyzeReport = serde_json::from_str(&assumed.stdout).unwrap();
    assert_eq!(rep.certificate.verdict, Verdict::Consistent);
}

#[test]
fn limit_caps_undegenerations() {
    let text = fixture_text("double_cover");
    let opts = Options { json: true, limit: 3, ..Options::default() };
    let rep: AnalyzeReport = serde_json::from_str(&execute(Command::Analyze, &text, &opts).stdout).unwrap();
    assert_eq!(rep.undegenerations.len(), 3);
    assert!(rep.undegenerations_total > 3);
}

#[test]
fn pairwise_cross_is_gated_on_minimality() {
    let text = fixture_text("no_pairwise_local");
    let pair = Some(("e1".to_string(), "e2".to_string()));
    let gated = execute(Command::Aim, &text, &Options { pairwise_cross: pair.clone(), ..Options::default() });
    assert_eq!(gated.code, cli::EXIT_HYPOTHESIS);
    let forced = execute(Command::Aim, &text, &Options { pairwise_cross: pair, force_minimal: true, ..Options::default() });
    assert_eq!(forced.code, cli::EXIT_INCONSISTENT);
}

#[test]
fn minimal_four_nodes_decomposes() {
    let text = fixture_text("minimal_four_nodes");
    let opts = Options { json: true, decompose: Some(7), circum: Some(6), ..Options::default() };
    let out = execute(Command::Aim, &text, &opts);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let rep: AimReport = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(rep.decomposition.unwrap().terms.len(), 3);
    assert_eq!(rep.circum.unwrap().terms.len(), 1);
}

fn round_trip<T: serde::Serialize + serde::de::DeserializeOwned>(text: &str) -> String {
    let report: T = serde_json::from_str(text).unwrap();
    serde_json::to_string_pretty(&report).unwrap()
}

#[test]
fn reports_round_trip() {
    for name in FIXTURES {
        let text = fixture_text(name);
        for cmd in [Command::Validate, Command::Analyze, Command::Plumb, Command::Deform, Command::Aim] {
            let out = execute(cmd, &text, &json_opts());
            let again = match (cmd, out.code) {
                (Command::Validate, _) | (_, cli::EXIT_VIOLATION) => round_trip::<ValidateReport>(&out.stdout),
                (Command::Analyze, _) => round_trip::<AnalyzeReport>(&out.stdout),
                (Command::Plumb, _) => round_trip::<PlumbReport>(&out.stdout),
                (Command::Deform, _) => round_trip::<DeformReport>(&out.stdout),
                (Command::Aim, _) => round_trip::<AimReport>(&out.stdout),
            };
            assert_eq!(again, out.stdout.trim_end(), "{name} {cmd:?}");
        }
    }
}
