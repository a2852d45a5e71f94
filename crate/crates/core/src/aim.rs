//! Affine invariant manifolds: symplecticity of the absolute tangent
//! space, the dimension bound for cylinder classes, and the pairwise
//! decompositions available in minimal strata.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::equations::{minimal_correlated, EquationSystem};
use crate::error::{Error, Violation};
use crate::gaussian::Gq;
use crate::homology::Cycle;
use crate::linalg::{self, Matrix, Vector};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymplecticRecord {
    #[serde(rename = "J")]
    pub j: Vec<Vec<i64>>,
    /// One row per absolute basis class: its image in basis coordinates.
    pub iota: Vec<Vec<Gq>>,
    /// Absolute class of each vanishing cycle.
    pub u_lambda: BTreeMap<String, Vec<Gq>>,
    #[serde(default)]
    pub minimal: bool,
}

/// Intersection form on absolute homology, the inclusion of absolute into
/// relative homology, and the absolute classes of the vanishing cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticData {
    pub j: Matrix,
    pub iota: Matrix,
    pub u: Matrix,
    pub minimal: bool,
}

impl SymplecticData {
    pub fn from_record(rec: &SymplecticRecord, sys: &EquationSystem) -> Result<Self, Vec<Violation>> {
        let n = rec.j.len();
        let k = sys.basis.len();
        let mut bad = Vec::new();
        if !n.is_multiple_of(2) || rec.j.iter().any(|r| r.len() != n) {
            bad.push(Violation::new("symplectic", "J must be a square matrix of even size"));
        }
        if rec.iota.len() != n || rec.iota.iter().any(|r| r.len() != k) {
            bad.push(Violation::new(
                "symplectic",
                format!("iota must have {n} rows of length {k}"),
            ));
        }
        let mut u = Vec::new();
        for e in &sys.basis.edges {
            match rec.u_lambda.get(e) {
                Some(v) if v.len() == n => u.push(v.clone()),
                Some(_) => bad.push(Violation::new("symplectic", format!("u_lambda[{e}] must have length {n}"))),
                None => bad.push(Violation::new("symplectic", format!("u_lambda has no entry for {e}"))),
            }
        }
        for e in rec.u_lambda.keys() {
            if sys.basis.edge_index(e).is_none() {
                bad.push(Violation::new("reference", format!("u_lambda names unknown edge {e}")));
            }
        }
        if !bad.is_empty() {
            return Err(bad);
        }
        Ok(SymplecticData { j: linalg::from_ints(&rec.j), iota: rec.iota.clone(), u, minimal: rec.minimal })
    }

    pub fn genus2(&self) -> usize {
        self.j.len()
    }

    /// `⟨x, y⟩ = xᵀ J y`.
    pub fn form(&self, x: &[Gq], y: &[Gq]) -> Gq {
        linalg::dot(x, &linalg::mat_vec(&self.j, y))
    }

    /// `ι(x)` in basis coordinates.
    pub fn include(&self, x: &[Gq]) -> Vector {
        linalg::combine(x, &self.iota, self.iota.first().map_or(0, Vec::len))
    }

    /// Relative-homology vector of a cycle, vanishing cycles replaced by
    /// the images of their absolute classes.
    pub fn relative(&self, c: &Cycle) -> Vector {
        let mut v = c.basis.clone();
        for (coef, u) in c.lambda.iter().zip(&self.u) {
            if !coef.is_zero() {
                linalg::add_scaled(&mut v, coef, &self.include(u));
            }
        }
        v
    }

    pub fn validate(&self, sys: &EquationSystem) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.genus2();
        for a in 0..n {
            for b in 0..n {
                if self.j[a][b] != -self.j[b][a].clone() {
                    out.push(Violation::new("symplectic", "J is not skew-symmetric"));
                    return out;
                }
            }
        }
        if linalg::rank(&self.j) != n {
            out.push(Violation::new("symplectic", "J is degenerate"));
        }
        for (k, row) in self.iota.iter().enumerate() {
            let x = linalg::unit(n, k);
            for (e, u) in self.u.iter().enumerate() {
                let lhs = self.form(&x, u);
                let c = Cycle { basis: row.clone(), lambda: linalg::zeros(sys.basis.n_edges()) };
                let rhs = c.pair(&sys.basis, e);
                if lhs != rhs {
                    out.push(Violation::new(
                        "adjunction",
                        format!(
                            "⟨a{}, u(λ_{})⟩ = {lhs} but ⟨ι(a{}), λ_{}⟩ = {rhs}",
                            k + 1,
                            sys.basis.edges[e],
                            k + 1,
                            sys.basis.edges[e]
                        ),
                    ));
                }
            }
        }
        if self.minimal {
            if self.iota.len() != sys.basis.len() || linalg::rank(&self.iota) != n {
                out.push(Violation::new("symplectic", "minimal stratum needs a square invertible ι"));
            }
            let hor: Matrix = sys.horizontal().iter().map(|&e| self.u[e].clone()).collect();
            if linalg::rank(&hor) != hor.len() {
                out.push(Violation::new("symplectic", "horizontal vanishing cycles must be independent"));
            }
        }
        if self.minimal != sys.flags.minimal_stratum {
            out.push(Violation::new("flags", "symplectic data and system disagree on the minimal flag"));
        }
        for r in &sys.relations.echelon {
            let image = linalg::combine(r, &self.u, n);
            if !linalg::is_zero(&image) {
                out.push(Violation::new("symplectic", "a declared λ-relation fails in absolute homology"));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceReport {
    pub dim: usize,
    /// Basis vectors in absolute homology.
    pub basis: Vec<Vec<Gq>>,
    /// Rank of the intersection form restricted to the subspace.
    pub form_rank: usize,
    pub symplectic: bool,
}

fn span_relative(sys: &EquationSystem, data: &SymplecticData) -> Matrix {
    let k = sys.basis.len();
    let rows: Matrix = sys.effective_rows().iter().map(|r| data.relative(&Cycle::from_vec(r, k))).collect();
    linalg::row_basis(&rows)
}

/// Absolute classes whose image lies in the span of the equations.
fn absolute_equations(sys: &EquationSystem, data: &SymplecticData) -> Matrix {
    let n = data.genus2();
    let span = span_relative(sys, data);
    if span.is_empty() {
        return linalg::row_basis(&linalg::left_kernel(&data.iota, sys.basis.len()));
    }
    let mut stacked = data.iota.clone();
    stacked.extend(span.iter().map(|r| r.iter().map(|x| -x.clone()).collect::<Vector>()));
    let rel = linalg::left_kernel(&stacked, sys.basis.len());
    linalg::row_basis(&rel.iter().map(|r| r[..n].to_vec()).collect::<Matrix>())
}

pub fn form_rank(data: &SymplecticData, basis: &[Vector]) -> usize {
    let gram: Matrix = basis.iter().map(|a| basis.iter().map(|b| data.form(a, b)).collect()).collect();
    linalg::rank(&gram)
}

/// `ι*(TM)`, identified through the intersection form with the symplectic
/// complement of the absolute classes in the equation span.
pub fn tangent_absolute(sys: &EquationSystem, data: &SymplecticData) -> SubspaceReport {
    let n = data.genus2();
    let w = absolute_equations(sys, data);
    let basis = if w.is_empty() {
        (0..n).map(|k| linalg::unit(n, k)).collect()
    } else {
        let wj: Matrix = w.iter().map(|x| (0..n).map(|c| linalg::dot(x, &data.j.iter().map(|r| r[c].clone()).collect::<Vector>())).collect()).collect();
        linalg::nullspace(&wj, n)
    };
    let rank = form_rank(data, &basis);
    SubspaceReport { dim: basis.len(), symplectic: rank == basis.len(), form_rank: rank, basis }
}

/// `dim ι*(TM ∩ Ann V⊥)` for the span `V` of the vanishing cycles of a
/// cross-equivalence class.
pub fn lemma_bound(sys: &EquationSystem, data: &SymplecticData, class: &[usize]) -> Result<usize, Error> {
    if !tangent_absolute(sys, data).symplectic {
        return Err(Error::Precondition("ι*(TM) is not symplectic".into()));
    }
    if let Some(&e) = class.iter().skip(1).find(|&&e| sys.lambda_ratio(e, class[0]).is_none()) {
        return Err(Error::Precondition(format!(
            "class is not parallel: ∫λ_{} and ∫λ_{} are not proportional",
            sys.basis.edges[e], sys.basis.edges[class[0]]
        )));
    }
    let k = sys.basis.len();
    let cols: Matrix = class.iter().map(|&e| sys.basis.pairing_column(e)[..k].to_vec()).collect();
    let span = span_relative(sys, data);
    let constraints: Matrix = span.iter().map(|n| cols.iter().map(|p| linalg::dot(p, n)).collect()).collect();
    let ys = if constraints.is_empty() {
        (0..class.len()).map(|j| linalg::unit(class.len(), j)).collect()
    } else {
        linalg::nullspace(&constraints, class.len())
    };
    let pulled: Matrix = ys
        .iter()
        .map(|y| {
            let phi = linalg::combine(y, &cols, k);
            data.iota.iter().map(|a| linalg::dot(&phi, a)).collect()
        })
        .collect();
    Ok(linalg::rank(&pulled))
}

fn require_minimal(sys: &EquationSystem, force: bool) -> Result<(), Error> {
    if sys.flags.minimal_stratum || force {
        Ok(())
    } else {
        Err(Error::Precondition("minimal stratum required".into()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum PairwiseWitness {
    Found { equation: crate::homology::CycleRecord, rendered: String },
    Absent { diagnostic: String },
}

/// A span element crossing exactly the two given cross-related nodes.
pub fn pairwise_cross_witness(sys: &EquationSystem, e1: usize, e2: usize, force: bool) -> Result<PairwiseWitness, Error> {
    require_minimal(sys, force)?;
    let classes = sys.cross_equivalence_classes();
    if e1 == e2 || !classes.iter().any(|c| c.contains(&e1) && c.contains(&e2)) {
        return Err(Error::Precondition(format!(
            "{} and {} are not distinct cross-related nodes",
            sys.basis.edges[e1], sys.basis.edges[e2]
        )));
    }
    let pair = [e1.min(e2), e1.max(e2)];
    Ok(match sys.correlated_witness(&pair, &sys.horizontal()) {
        Some(f) => {
            let f = f.scale(&f.pair(&sys.basis, pair[0]).inv());
            PairwiseWitness::Found { rendered: f.render(&sys.basis), equation: f.to_record(&sys.basis) }
        }
        None => PairwiseWitness::Absent {
            diagnostic: format!(
                "no equation crosses exactly {{{}, {}}}: the pairwise crossing property fails, so these data cannot come from a minimal stratum",
                sys.basis.edges[pair[0]], sys.basis.edges[pair[1]]
            ),
        },
    })
}

fn support(v: &[Gq]) -> Vec<usize> {
    v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, _)| k).collect()
}

/// Writes a λ-equation `F` as a sum of equations each involving at most
/// two of the λ-periods that appear in `F`.
pub fn pairwise_circum_decompose(sys: &EquationSystem, f: &Cycle, force: bool) -> Result<Vec<Cycle>, Error> {
    require_minimal(sys, force)?;
    let hor = sys.horizontal();
    if !f.is_pure_lambda() || support(&f.lambda).iter().any(|e| !hor.contains(e)) {
        return Err(Error::Precondition("expected a combination of horizontal λ-periods".into()));
    }
    if !linalg::in_span(&sys.effective_rows(), &f.to_vec()) {
        return Err(Error::NotInSpan(f.render(&sys.basis)));
    }
    let n = sys.basis.n_edges();
    let rels = sys.relation_space();
    // One two-term relation for each crossing row and each further node
    // it crosses, tied to the node of its pivot.
    let mut gens: Matrix = Vec::new();
    let k = sys.basis.len();
    for (row, &pivot) in sys.rows().iter().zip(&sys.rref().pivots) {
        let supp = sys.hor_support(row);
        let Some(&first) = supp.first() else { continue };
        let anchor = (pivot < k)
            .then(|| sys.basis.elements[pivot].edge.as_deref())
            .flatten()
            .and_then(|e| sys.basis.edge_index(e))
            .filter(|e| supp.contains(e))
            .unwrap_or(first);
        for &l in supp.iter().filter(|&&l| l != anchor) {
            if let Some(v) = two_term_relation(&rels, anchor, l, n) {
                gens.push(v);
            }
        }
    }
    let x = if gens.is_empty() { None } else { linalg::solve_combination(&gens, &f.lambda) };
    let x = x.ok_or_else(|| {
        Error::Infeasible(format!(
            "recombination stuck: {} is not a combination of the pairwise relations found",
            f.render(&sys.basis)
        ))
    })?;
    let mut terms: Matrix = x.iter().zip(&gens).map(|(c, g)| linalg::scaled(c, g)).collect();
    let target = support(&f.lambda);
    loop {
        terms.retain(|t| !linalg::is_zero(t));
        let outside = |t: &Vector| support(t).into_iter().filter(|e| !target.contains(e)).collect::<Vec<_>>();
        let bad: Vec<usize> = (0..terms.len()).filter(|&a| !outside(&terms[a]).is_empty()).collect();
        if bad.is_empty() {
            break;
        }
        let mixed = bad.iter().copied().find(|&a| support(&terms[a]).iter().any(|e| target.contains(e)));
        let Some(a) = mixed else {
            // Terms living entirely outside the target sum to zero.
            let sum = bad.iter().fold(linalg::zeros(n), |mut acc, &a| {
                linalg::add_scaled(&mut acc, &Gq::one(), &terms[a]);
                acc
            });
            if !linalg::is_zero(&sum) {
                return Err(Error::Infeasible("recombination stuck on terms outside the target".into()));
            }
            terms = (0..terms.len()).filter(|t| !bad.contains(t)).map(|t| terms[t].clone()).collect();
            continue;
        };
        let l = outside(&terms[a])[0];
        let b = (0..terms.len())
            .find(|&b| b != a && !terms[b][l].is_zero())
            .ok_or_else(|| Error::Infeasible("recombination stuck: unmatched outside term".into()))?;
        let ratio = &terms[b][l] / &terms[a][l];
        let ta = terms[a].clone();
        linalg::add_scaled(&mut terms[b], &-ratio.clone(), &ta);
        let grow = Gq::one() + ratio;
        terms[a] = linalg::scaled(&grow, &ta);
    }
    Ok(terms
        .into_iter()
        .map(|t| Cycle { basis: linalg::zeros(k), lambda: t })
        .collect())
}

/// A relation `b ∫λ_j + c ∫λ_l = 0` with `b, c ≠ 0`, if known.
fn two_term_relation(rels: &Matrix, j: usize, l: usize, n: usize) -> Option<Vector> {
    if rels.is_empty() {
        return None;
    }
    let others: Matrix = (0..n)
        .filter(|&k| k != j && k != l)
        .map(|k| rels.iter().map(|r| r[k].clone()).collect())
        .collect();
    let combos = if others.is_empty() {
        (0..rels.len()).map(|a| linalg::unit(rels.len(), a)).collect()
    } else {
        linalg::nullspace(&others, rels.len())
    };
    combos
        .iter()
        .map(|x| linalg::combine(x, rels, n))
        .find(|v| !v[j].is_zero() && !v[l].is_zero())
}

/// Writes `F` as a sum of span elements each crossing at most two
/// horizontal nodes.
pub fn at_most_two_decompose(sys: &EquationSystem, f: &Cycle, force: bool) -> Result<Vec<Cycle>, Error> {
    require_minimal(sys, force)?;
    if !sys.in_span(f) {
        return Err(Error::NotInSpan(f.render(&sys.basis)));
    }
    let mut out = Vec::new();
    split_two(sys, f.clone(), &mut out)?;
    Ok(out)
}

fn split_two(sys: &EquationSystem, f: Cycle, out: &mut Vec<Cycle>) -> Result<(), Error> {
    let s = sys.hor_support(&f);
    if s.len() <= 2 {
        if !f.is_zero() {
            out.push(f);
        }
        return Ok(());
    }
    let hor = sys.horizontal();
    let p = minimal_correlated(&s, |t| sys.is_correlated_within(t, &hor), 1).pop().unwrap_or_else(|| s.clone());
    if p.len() == s.len() {
        return Err(Error::Infeasible(format!(
            "{} crosses the primitive set {{{}}} of size {}, so no pairwise equation splits it",
            f.render(&sys.basis),
            sys.edge_names(&s).join(", "),
            s.len()
        )));
    }
    let w = sys.correlated_witness(&p, &hor).expect("correlated set has a witness");
    let c = &f.pair(&sys.basis, p[0]) / &w.pair(&sys.basis, p[0]);
    let part = w.scale(&c);
    let rest = f.sub(&part);
    split_two(sys, part, out)?;
    split_two(sys, rest, out)
}
