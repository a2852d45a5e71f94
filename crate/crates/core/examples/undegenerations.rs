//! Classifies every undegeneration of a system and flags the divisorial ones.

use strata::cli::{load, Document};

fn main() {
    let text = include_str!("../fixtures/three_horizontal_nodes.json");
    let sys = load(&Document::parse(text).unwrap()).unwrap().system;
    for u in sys.graph.undegenerations() {
        let c = sys.classify_undegeneration(&u);
        println!(
            "passages {:?} horizontal {:?}: codim {} lost {}{}",
            c.kept_passages,
            c.kept_horizontal,
            c.codim,
            c.lost,
            if c.divisorial { "  divisorial" } else { "" }
        );
    }
}
