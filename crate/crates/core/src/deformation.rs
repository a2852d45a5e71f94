//! Shearing and stretching the cylinders of one cross-equivalence class,
//! and the check that the defining equations survive it.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::equations::EquationSystem;
use crate::error::{Error, Violation};
use crate::gaussian::Gq;
use crate::homology::{AdaptedBasis, Cycle};
use crate::linalg::{self, Vector};

/// Tolerance for residuals in floating-point mode.
pub const APPROX_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodRecord {
    #[serde(default)]
    pub basis: BTreeMap<String, Gq>,
    #[serde(default)]
    pub lambda: BTreeMap<String, Gq>,
}

/// Exact values of the basis periods and the λ-periods.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodAssignment {
    pub basis: Vector,
    pub lambda: Vector,
}

impl PeriodAssignment {
    pub fn from_record(rec: &PeriodRecord, basis: &AdaptedBasis) -> Result<Self, Violation> {
        let basis_vals = basis
            .elements
            .iter()
            .map(|el| {
                rec.basis.get(&el.name).cloned().ok_or_else(|| {
                    Violation::new("periods", format!("no period given for {}", el.name))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let lambda = basis
            .edges
            .iter()
            .map(|e| {
                rec.lambda
                    .get(e)
                    .cloned()
                    .ok_or_else(|| Violation::new("periods", format!("no λ-period given for {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for name in rec.basis.keys() {
            if basis.index_of(name).is_none() {
                return Err(Violation::new("reference", format!("unknown basis element {name}")));
            }
        }
        for e in rec.lambda.keys() {
            if basis.edge_index(e).is_none() {
                return Err(Violation::new("reference", format!("unknown edge {e}")));
            }
        }
        Ok(PeriodAssignment { basis: basis_vals, lambda })
    }

    pub fn to_record(&self, basis: &AdaptedBasis) -> PeriodRecord {
        PeriodRecord {
            basis: basis.elements.iter().map(|e| e.name.clone()).zip(self.basis.iter().cloned()).collect(),
            lambda: basis.edges.iter().cloned().zip(self.lambda.iter().cloned()).collect(),
        }
    }

    pub fn evaluate(&self, f: &Cycle) -> Gq {
        linalg::dot(&f.basis, &self.basis) + linalg::dot(&f.lambda, &self.lambda)
    }

    /// Indices of equations not vanishing at these periods, together with
    /// declared relations and ratios that fail.
    pub fn violations(&self, sys: &EquationSystem) -> Vec<String> {
        let mut out = Vec::new();
        for (k, f) in sys.equations.iter().enumerate() {
            let v = self.evaluate(f);
            if !v.is_zero() {
                out.push(format!("equation {} evaluates to {v}", k + 1));
            }
        }
        for r in &sys.relations.echelon {
            if !linalg::dot(r, &self.lambda).is_zero() {
                out.push("a declared λ-relation fails".into());
            }
        }
        for r in &sys.ratios {
            if let (Some(a), Some(b)) = (sys.basis.edge_index(&r.e), sys.basis.edge_index(&r.e_prime)) {
                if self.lambda[a] != &r.q * &self.lambda[b] {
                    out.push(format!("ratio ∫λ_{} = {} ∫λ_{} fails", r.e, r.q, r.e_prime));
                }
            }
        }
        out
    }

    pub fn to_approx(&self) -> ApproxPeriods {
        ApproxPeriods {
            basis: self.basis.iter().map(Gq::to_c64).collect(),
            lambda: self.lambda.iter().map(Gq::to_c64).collect(),
        }
    }
}

/// `a_t u_s`: `(x, y) ↦ (x + s y, r y)` on the cross-curve periods of a
/// class, with `r > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShearStretch {
    pub r: Gq,
    pub s: Gq,
}

impl ShearStretch {
    pub fn new(r: BigRational, s: BigRational) -> Result<Self, Error> {
        if !r.is_positive() {
            return Err(Error::Precondition(format!("stretch factor {r} must be positive")));
        }
        Ok(ShearStretch { r: Gq::real(r), s: Gq::real(s) })
    }

    fn check(&self) -> Result<(), Error> {
        if !self.r.is_real() || !self.s.is_real() || !self.r.re.is_positive() {
            return Err(Error::Precondition("deformation needs rational r > 0 and rational s".into()));
        }
        Ok(())
    }

    pub fn apply(&self, z: &Gq) -> Gq {
        Gq::new(&z.re + &(&self.s.re * &z.im), &self.r.re * &z.im)
    }

    /// The deformation `next ∘ self`.
    pub fn then(&self, next: &ShearStretch) -> ShearStretch {
        ShearStretch { r: &self.r * &next.r, s: &self.s + &(&self.r * &next.s) }
    }
}

/// The cross curves of one cross-equivalence class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderClass {
    pub edges: Vec<usize>,
    pub cross_curves: Vec<usize>,
}

impl CylinderClass {
    pub fn new(sys: &EquationSystem, edges: &[usize]) -> Result<Self, Error> {
        let mut want = edges.to_vec();
        want.sort_unstable();
        if !sys.cross_equivalence_classes().contains(&want) {
            return Err(Error::Precondition(format!(
                "{{{}}} is not a cross-equivalence class",
                sys.edge_names(&want).join(", ")
            )));
        }
        let cross_curves = want
            .iter()
            .map(|&e| {
                sys.basis.crossing_element(&sys.basis.edges[e]).ok_or_else(|| {
                    Error::Precondition(format!("edge {} has no cross curve", sys.basis.edges[e]))
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(CylinderClass { edges: want, cross_curves })
    }

    /// The class with the given index in the ordered class list.
    pub fn by_index(sys: &EquationSystem, k: usize) -> Result<Self, Error> {
        let classes = sys.cross_equivalence_classes();
        let c = classes.get(k).ok_or_else(|| Error::Precondition(format!("no class {k}")))?;
        Self::new(sys, c)
    }

    /// The class containing a given edge.
    pub fn containing(sys: &EquationSystem, edge: &str) -> Result<Self, Error> {
        let e = sys.basis.edge_index(edge).ok_or_else(|| Error::Precondition(format!("no edge {edge}")))?;
        let classes = sys.cross_equivalence_classes();
        let c = classes
            .iter()
            .find(|c| c.contains(&e))
            .ok_or_else(|| Error::Precondition(format!("edge {edge} is not horizontal")))?;
        Self::new(sys, c)
    }
}

pub fn apply_deformation(p: &PeriodAssignment, class: &CylinderClass, m: &ShearStretch) -> PeriodAssignment {
    let mut out = p.clone();
    for &l in &class.cross_curves {
        out.basis[l] = m.apply(&p.basis[l]);
    }
    out
}

/// `F = β + Σ c_i δ_i` with `δ_i` the cross curves of the class and `β`
/// pairing to zero with the class.
pub fn horizontal_decomposition(
    sys: &EquationSystem,
    f: &Cycle,
    class: &CylinderClass,
) -> Result<(Cycle, Vec<Gq>), Error> {
    let supp = sys.hor_support(f);
    if let Some(e) = supp.iter().find(|e| !class.edges.contains(e)) {
        return Err(Error::Hypothesis(format!(
            "{} crosses {} outside the class",
            f.render(&sys.basis),
            sys.basis.edges[*e]
        )));
    }
    let coeffs: Vec<Gq> = class.cross_curves.iter().map(|&l| f.basis[l].clone()).collect();
    let mut beta = f.clone();
    for &l in &class.cross_curves {
        beta.basis[l] = Gq::zero();
    }
    debug_assert!(class.edges.iter().all(|&e| beta.pair(&sys.basis, e).is_zero()));
    Ok((beta, coeffs))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowCheck {
    pub row: usize,
    pub covered: bool,
    pub reason: Option<String>,
    pub residual: Gq,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub class: Vec<String>,
    pub deformation: ShearStretch,
    pub rows: Vec<RowCheck>,
    pub preserved: bool,
}

/// Deforms `p` along `class` and evaluates every rref row.
pub fn check_preserved(
    sys: &EquationSystem,
    p: &PeriodAssignment,
    class: &CylinderClass,
    m: &ShearStretch,
) -> Result<PreservationReport, Error> {
    m.check()?;
    if !sys.flags.real || !sys.rows().iter().all(Cycle::is_real) {
        return Err(Error::Hypothesis("requires real coefficients".into()));
    }
    let bad = p.violations(sys);
    if !bad.is_empty() {
        return Err(Error::Precondition(format!("periods do not satisfy the system: {}", bad.join("; "))));
    }
    let q = apply_deformation(p, class, m);
    let mut rows = Vec::new();
    for (k, f) in sys.rows().iter().enumerate() {
        let supp = sys.hor_support(f);
        let reason = if supp.iter().all(|e| !class.edges.contains(e)) {
            None
        } else {
            match horizontal_decomposition(sys, f, class) {
                Err(e) => Some(e.to_string()),
                Ok((beta, _)) => {
                    let v = p.evaluate(&beta);
                    (!v.im.is_zero()).then(|| format!("Im β = {} is not zero", Gq::real(v.im)))
                }
            }
        };
        rows.push(RowCheck { row: k + 1, covered: reason.is_none(), reason, residual: q.evaluate(f) });
    }
    let preserved = rows.iter().all(|r| r.covered && r.residual.is_zero());
    Ok(PreservationReport {
        class: sys.edge_names(&class.edges),
        deformation: m.clone(),
        rows,
        preserved,
    })
}

/// Floating-point periods for inputs known only approximately.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxPeriods {
    pub basis: Vec<Complex64>,
    pub lambda: Vec<Complex64>,
}

impl ApproxPeriods {
    pub fn evaluate(&self, f: &Cycle) -> Complex64 {
        let b = f.basis.iter().zip(&self.basis).map(|(c, v)| c.to_c64() * v);
        let l = f.lambda.iter().zip(&self.lambda).map(|(c, v)| c.to_c64() * v);
        b.chain(l).sum()
    }

    pub fn deform(&self, class: &CylinderClass, r: f64, s: f64) -> ApproxPeriods {
        let mut out = self.clone();
        for &l in &class.cross_curves {
            let z = self.basis[l];
            out.basis[l] = Complex64::new(z.re + s * z.im, r * z.im);
        }
        out
    }

    /// Whether every row vanishes within [`APPROX_TOL`].
    pub fn satisfies(&self, sys: &EquationSystem) -> bool {
        sys.rows().iter().all(|f| self.evaluate(f).norm() <= APPROX_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shear_stretch_group_law() {
        let a = ShearStretch::new(BigRational::new(2.into(), 1.into()), BigRational::new(1.into(), 3.into())).unwrap();
        let b = ShearStretch::new(BigRational::new(1.into(), 5.into()), BigRational::new((-4).into(), 1.into())).unwrap();
        let z = Gq::complex((3, 2), (7, 1));
        assert_eq!(b.apply(&a.apply(&z)), a.then(&b).apply(&z));
        assert!(ShearStretch::new(BigRational::zero(), BigRational::zero()).is_err());
    }
}
