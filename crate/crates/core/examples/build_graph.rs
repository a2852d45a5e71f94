//! Builds a two-level graph by hand, checks it and lists its passages.

use std::collections::BTreeMap;

use strata::homology::{BasisElement, Kind};
use strata::level_graph::{Edge, Marking, Vertex};
use strata::{AdaptedBasis, EnhancedLevelGraph};

fn element(name: &str, level: i32, crossing: Option<&str>, pairings: &[(&str, i64)]) -> BasisElement {
    BasisElement {
        name: name.into(),
        level,
        kind: if crossing.is_some() { Kind::Crossing } else { Kind::Noncrossing },
        edge: crossing.map(Into::into),
        pairings: pairings.iter().map(|(e, x)| (e.to_string(), *x)).collect::<BTreeMap<_, _>>(),
    }
}

fn main() {
    let graph = EnhancedLevelGraph {
        vertices: vec![
            Vertex { id: "top".into(), genus: 2, level: 0 },
            Vertex { id: "bot".into(), genus: 0, level: -1 },
        ],
        edges: vec![
            Edge { id: "h".into(), ends: ["bot".into(), "bot".into()], top: None, kappa: None },
            Edge { id: "v1".into(), ends: ["top".into(), "bot".into()], top: Some("top".into()), kappa: Some(1) },
            Edge { id: "v2".into(), ends: ["top".into(), "bot".into()], top: Some("top".into()), kappa: Some(2) },
        ],
        markings: vec![
            Marking { vertex: "top".into(), order: 1 },
            Marking { vertex: "bot".into(), order: 5 },
        ],
    };
    let problems = graph.validate();
    if !problems.is_empty() {
        for v in &problems {
            eprintln!("{}: {}", v.rule, v.message);
        }
        std::process::exit(1);
    }
    for p in graph.passages() {
        println!("passage {p}: a = {}, crossing {:?}", graph.lcm_weight(p).unwrap(), graph.crossing_edges(p));
        for e in graph.crossing_edges(p) {
            println!("  m({e}) = {}", graph.prong_multiplicity(&e, p).unwrap());
        }
    }

    let basis = AdaptedBasis::new(
        vec![
            element("a", 0, None, &[]),
            element("b", 0, None, &[("v1", 1), ("v2", -1)]),
            element("d", -1, Some("h"), &[("h", 1)]),
        ],
        &graph,
    )
    .expect("pairings name known edges");
    for v in basis.validate_adapted(&graph) {
        println!("{}: {}", v.rule, v.message);
    }
    println!("undegenerations: {}", graph.undegenerations().len());
}
