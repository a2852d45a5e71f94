//! Tangent space and pairwise statements on a minimal stratum.

use strata::aim::{self, PairwiseWitness};
use strata::cli::{load, Document};

fn main() {
    let loaded = load(&Document::parse(include_str!("../fixtures/minimal_four_nodes.json")).unwrap()).unwrap();
    let sys = &loaded.system;
    let data = loaded.symplectic.as_ref().unwrap();

    let t = aim::tangent_absolute(sys, data);
    println!("tangent dimension {}, symplectic {}", t.dim, t.symplectic);
    for class in sys.cross_equivalence_classes() {
        println!("class {:?}: bound {}", sys.edge_names(&class), aim::lemma_bound(sys, data, &class).unwrap());
    }
    match aim::pairwise_cross_witness(sys, 0, 2, false).unwrap() {
        PairwiseWitness::Found { rendered, .. } => println!("crosses e1 and e3 only: {rendered}"),
        PairwiseWitness::Absent { diagnostic } => println!("no witness: {diagnostic}"),
    }
    let f = &sys.equations[6];
    for term in aim::at_most_two_decompose(sys, f, false).unwrap() {
        println!("  {}", term.render(&sys.basis));
    }
}
