//! Runs the consistency rules on a document and prints the certificate.
//!
//! `cargo run --example consistency -- path/to/system.json`

use strata::cli::{load, Document};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/intro_two_level.json").into());
    let text = std::fs::read_to_string(&path).expect("readable file");
    let doc = Document::parse(&text).unwrap_or_else(|e| panic!("{e}"));
    let sys = load(&doc).expect("valid document").system;

    let classes: Vec<Vec<String>> = sys.cross_equivalence_classes().iter().map(|c| sys.edge_names(c)).collect();
    println!("classes: {classes:?}");
    let cert = sys.consistency_report(false);
    println!("verdict: {:?}", cert.verdict);
    if let Some(rule) = &cert.rule {
        println!("violated: {rule} ({})", cert.forced_relation.as_deref().unwrap_or("-"));
    }
    for line in &cert.trace {
        println!("  {line}");
    }
}
