//! Converts period equations into plumbing equations and reads off the
//! local singularity.

use strata::cli::{load, Document};
use strata::plumbing;

fn main() {
    for text in [include_str!("../fixtures/worked_plumbing.json"), include_str!("../fixtures/cusp.json")] {
        let sys = load(&Document::parse(text).unwrap()).unwrap().system;
        let conv = plumbing::convert(&sys).expect("convertible");
        print!("{}", conv.table());
        let bins: Vec<_> = conv.binomials().collect();
        let lattice = plumbing::lattice_analysis(&bins, &sys.basis.edges);
        println!("kind {:?}, normal {:?}", lattice.kind, lattice.normal);
        println!("local model {}\n", plumbing::local_model(&conv, &sys).rendered);
    }
}
