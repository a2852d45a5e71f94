//! Stretches and shears a cylinder class and checks that the periods still
//! satisfy every equation.

use num_rational::BigRational;
use strata::cli::{load, Document};
use strata::Cycle;
use strata::deformation::{apply_deformation, check_preserved, CylinderClass, ShearStretch};

fn main() {
    let loaded = load(&Document::parse(include_str!("../fixtures/cusp.json")).unwrap()).unwrap();
    let (sys, periods) = (&loaded.system, loaded.periods.as_ref().unwrap());
    let class = CylinderClass::by_index(sys, 0).unwrap();
    let m = ShearStretch::new(BigRational::new(5.into(), 2.into()), BigRational::from_integer((-3).into())).unwrap();

    let report = check_preserved(sys, periods, &class, &m).unwrap();
    for row in &report.rows {
        println!("row {}: residual {}", row.row, row.residual);
    }
    println!("preserved: {}", report.preserved);

    let moved = apply_deformation(periods, &class, &m);
    for f in [&sys.equations[0], &Cycle::element(&sys.basis, 0)] {
        println!("∫ {}: {} before, {} after", f.render(&sys.basis), periods.evaluate(f), moved.evaluate(f));
    }
}
