//! Conversion of period equations into plumbing coordinates, the local
//! binomial model near the boundary point and its lattice invariants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::equations::{EquationSystem, Verdict};
use crate::error::Error;
use crate::gaussian::Gq;
use crate::homology::{render_terms, Cycle};
use crate::lattice;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PlumbingEquation {
    /// `exp(f) s^I - s^J = 0`.
    Binomial {
        unit: String,
        #[serde(rename = "I")]
        i: BTreeMap<String, i64>,
        #[serde(rename = "J")]
        j: BTreeMap<String, i64>,
        /// Edge whose coordinate absorbs the unit.
        pivot: String,
    },
    /// An analytic equation whose top-level restriction is recorded.
    Analytic {
        symbol: String,
        top_restriction: BTreeMap<String, Gq>,
        #[serde(default)]
        top_restriction_lambda: BTreeMap<String, Gq>,
    },
}

impl PlumbingEquation {
    pub fn render(&self) -> String {
        match self {
            PlumbingEquation::Binomial { unit, i, j, .. } => {
                format!("exp({unit}) {} - {}", monomial("s", i), monomial("s", j))
            }
            PlumbingEquation::Analytic { top_restriction, top_restriction_lambda, .. } if top_restriction.is_empty() => {
                let mut terms: Vec<(&String, &Gq)> = top_restriction_lambda.iter().collect();
                terms.sort_by(|a, b| crate::level_graph::natural_cmp(a.0, b.0));
                format!("{} = 0", render_terms(terms.into_iter().map(|(e, c)| (format!("λ_{e}"), c))))
            }
            PlumbingEquation::Analytic { symbol, top_restriction, top_restriction_lambda } => {
                let terms = top_restriction
                    .iter()
                    .map(|(n, c)| (n.clone(), c))
                    .chain(top_restriction_lambda.iter().map(|(e, c)| (format!("∫λ_{e}"), c)));
                format!("{symbol} = 0, top-level part {}", render_terms(terms))
            }
        }
    }

    pub fn exponents(&self) -> Vec<i64> {
        match self {
            PlumbingEquation::Binomial { i, j, .. } => i.values().chain(j.values()).copied().collect(),
            PlumbingEquation::Analytic { .. } => Vec::new(),
        }
    }
}

fn monomial(var: &str, exps: &BTreeMap<String, i64>) -> String {
    let mut keys: Vec<&String> = exps.keys().collect();
    keys.sort_by(|a, b| crate::level_graph::natural_cmp(a, b));
    keys.iter()
        .map(|e| match exps[*e] {
            1 => format!("{var}_{e}"),
            n => format!("{var}_{e}^{n}"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlumbingRow {
    pub row: usize,
    pub period_equation: String,
    pub plumbing: PlumbingEquation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvertedSystem {
    pub rows: Vec<PlumbingRow>,
}

impl ConvertedSystem {
    pub fn binomials(&self) -> impl Iterator<Item = &PlumbingEquation> {
        self.rows.iter().map(|r| &r.plumbing).filter(|p| matches!(p, PlumbingEquation::Binomial { .. }))
    }

    /// Two-column table: period equation, plumbing equation.
    pub fn table(&self) -> String {
        let left: Vec<String> = self.rows.iter().map(|r| format!("{} = 0", r.period_equation)).collect();
        let w = left.iter().map(|s| s.chars().count()).max().unwrap_or(0).max(15);
        let mut out = format!("{:<w$} | plumbing equation\n", "period equation");
        out.push_str(&format!("{}-+-{}\n", "-".repeat(w), "-".repeat(17)));
        for (l, r) in left.iter().zip(&self.rows) {
            let pad = w - l.chars().count();
            let right = match &r.plumbing {
                PlumbingEquation::Binomial { .. } => format!("{} = 0", r.plumbing.render()),
                PlumbingEquation::Analytic { .. } => r.plumbing.render(),
            };
            out.push_str(&format!("{l}{} | {right}\n", " ".repeat(pad)));
        }
        out
    }
}

/// Clears denominators and divides out the common factor.
fn to_integers(q: &[BigRational]) -> Vec<BigInt> {
    let d = q.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let n: Vec<BigInt> = q.iter().map(|x| (x * &BigRational::from_integer(d.clone())).to_integer()).collect();
    let g = n.iter().fold(BigInt::from(0), |acc, x| acc.gcd(x));
    n.into_iter().map(|x| x / &g).collect()
}

/// Converts each rref row into its plumbing form.
pub fn convert(sys: &EquationSystem) -> Result<ConvertedSystem, Error> {
    let cert = sys.consistency_report(false);
    if cert.verdict == Verdict::Inconsistent {
        return Err(Error::Precondition(format!(
            "system is inconsistent by {}",
            cert.rule.unwrap_or_default()
        )));
    }
    let k = sys.basis.len();
    let mut rows = Vec::new();
    for (idx, (row, &pivot)) in sys.rows().iter().zip(&sys.rref().pivots).enumerate() {
        let n = idx + 1;
        let supp = sys.hor_support(row);
        let period_equation = row.render(&sys.basis);
        if supp.is_empty() {
            rows.push(PlumbingRow { row: n, period_equation, plumbing: analytic(sys, row, n) });
            continue;
        }
        let reference = (pivot < k)
            .then(|| sys.basis.elements[pivot].edge.as_deref())
            .flatten()
            .and_then(|e| sys.basis.edge_index(e))
            .filter(|e| supp.contains(e))
            .unwrap_or(supp[0]);
        let ref_name = &sys.basis.edges[reference];
        let mut qs = Vec::new();
        for &e in &supp {
            let r = sys.lambda_ratio(e, reference).ok_or_else(|| {
                Error::Conversion(format!(
                    "row {n} needs the relation ∫λ_{} ∝ ∫λ_{ref_name}",
                    sys.basis.edges[e]
                ))
            })?;
            let q = &row.pair(&sys.basis, e) * &r;
            if !q.is_real() || q.is_zero() {
                return Err(Error::Conversion(format!(
                    "row {n}: ratio {q} for edge {} is not a nonzero rational",
                    sys.basis.edges[e]
                )));
            }
            qs.push(q.re);
        }
        let mut ints = to_integers(&qs);
        let rpos = supp.iter().position(|&e| e == reference).unwrap_or(0);
        if ints[rpos].is_negative() {
            ints.iter_mut().for_each(|x| *x = -x.clone());
        }
        if ints.iter().all(|x| x.is_positive()) {
            return Err(Error::Conversion(format!(
                "boundary point not in closure: all exponents of row {n} have the same sign"
            )));
        }
        let mut i = BTreeMap::new();
        let mut j = BTreeMap::new();
        for (&e, x) in supp.iter().zip(&ints) {
            let v = x.abs().to_i64().ok_or_else(|| Error::Unsupported("exponent overflow".into()))?;
            if x.is_positive() {
                i.insert(sys.basis.edges[e].clone(), v);
            } else {
                j.insert(sys.basis.edges[e].clone(), v);
            }
        }
        rows.push(PlumbingRow {
            row: n,
            period_equation,
            plumbing: PlumbingEquation::Binomial { unit: format!("f{n}"), i, j, pivot: ref_name.clone() },
        });
    }
    Ok(ConvertedSystem { rows })
}

fn analytic(sys: &EquationSystem, row: &Cycle, n: usize) -> PlumbingEquation {
    let top = sys.top_level(row).unwrap_or(0);
    let top_restriction = sys
        .basis
        .elements
        .iter()
        .zip(&row.basis)
        .filter(|(el, c)| el.level == top && !c.is_zero())
        .map(|(el, c)| (el.name.clone(), c.clone()))
        .collect();
    let top_restriction_lambda = row
        .lambda
        .iter()
        .enumerate()
        .filter(|(e, c)| !c.is_zero() && (row.is_pure_lambda() || sys.edge_level(*e) == top))
        .map(|(e, c)| (sys.basis.edges[e].clone(), c.clone()))
        .collect();
    PlumbingEquation::Analytic { symbol: format!("G{n}"), top_restriction, top_restriction_lambda }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityKind {
    Smooth,
    ToricSingular,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub edges: Vec<String>,
    pub generators: Vec<Vec<i64>>,
    pub invariant_factors: Vec<String>,
    pub saturated: bool,
    pub kind: SingularityKind,
    /// `None` when normality is not decided by the available criteria.
    pub normal: Option<bool>,
}

/// Lattice invariants of a set of binomials over the given edges.
pub fn lattice_analysis(binomials: &[&PlumbingEquation], edges: &[String]) -> LatticeReport {
    let pos: BTreeMap<&str, usize> = edges.iter().enumerate().map(|(k, e)| (e.as_str(), k)).collect();
    let mut generators = Vec::new();
    let mut sides = Vec::new();
    for b in binomials {
        if let PlumbingEquation::Binomial { i, j, .. } = b {
            let mut g = vec![0i64; edges.len()];
            for (e, x) in i {
                g[pos[e.as_str()]] += x;
            }
            for (e, x) in j {
                g[pos[e.as_str()]] -= x;
            }
            generators.push(g);
            sides.push((i, j));
        }
    }
    let factors = lattice::invariant_factors(&generators);
    let saturated = factors.iter().all(|d| d.is_one());
    // Each binomial must be solvable for its own variable: one side is a
    // single variable to the first power, used by no other binomial.
    let solvable: Vec<Vec<&String>> = sides
        .iter()
        .enumerate()
        .map(|(k, (i, j))| {
            [i, j]
                .iter()
                .filter(|m| m.len() == 1 && *m.values().next().unwrap() == 1)
                .map(|m| m.keys().next().unwrap())
                .filter(|v| {
                    sides.iter().enumerate().all(|(l, (a, b))| l == k || (!a.contains_key(*v) && !b.contains_key(*v)))
                })
                .collect()
        })
        .collect();
    let smooth = solvable.iter().all(|c| !c.is_empty());
    let two_var = generators.len() == 1 && generators[0].iter().filter(|&&x| x != 0).count() == 2;
    let normal = if smooth {
        Some(true)
    } else if two_var || !saturated {
        Some(false)
    } else {
        None
    };
    LatticeReport {
        edges: edges.to_vec(),
        generators,
        invariant_factors: factors.iter().map(ToString::to_string).collect(),
        saturated,
        kind: if smooth { SingularityKind::Smooth } else { SingularityKind::ToricSingular },
        normal,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFactor {
    pub edges: Vec<String>,
    pub rows: Vec<usize>,
    pub lattice: LatticeReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalModel {
    /// Dimension of the smooth factor.
    pub smooth_dim: i64,
    pub factors: Vec<ClassFactor>,
    pub coordinate_changes: Vec<String>,
    pub rendered: String,
}

/// Groups the binomials by cross-equivalence class into the model
/// `ℂ^d × Π {x^I = x^J}`.
pub fn local_model(conv: &ConvertedSystem, sys: &EquationSystem) -> LocalModel {
    let classes = sys.cross_equivalence_classes();
    let mut factors = Vec::new();
    let mut free = 0i64;
    for class in &classes {
        let names = sys.edge_names(class);
        let rows: Vec<&PlumbingRow> = conv
            .rows
            .iter()
            .filter(|r| match &r.plumbing {
                PlumbingEquation::Binomial { i, .. } => i.keys().any(|e| names.contains(e)),
                _ => false,
            })
            .collect();
        if rows.is_empty() {
            free += names.len() as i64;
            continue;
        }
        let bins: Vec<&PlumbingEquation> = rows.iter().map(|r| &r.plumbing).collect();
        factors.push(ClassFactor {
            lattice: lattice_analysis(&bins, &names),
            edges: names,
            rows: rows.iter().map(|r| r.row).collect(),
        });
    }
    let analytic = conv.rows.iter().filter(|r| matches!(r.plumbing, PlumbingEquation::Analytic { .. })).count();
    let smooth_dim =
        sys.basis.len() as i64 - sys.horizontal().len() as i64 - analytic as i64 + free;
    let mut coordinate_changes = Vec::new();
    let mut parts = Vec::new();
    if smooth_dim > 0 {
        parts.push(if smooth_dim == 1 { "ℂ".to_string() } else { format!("ℂ^{smooth_dim}") });
    }
    for f in &factors {
        let mut eqs = Vec::new();
        for r in conv.rows.iter().filter(|r| f.rows.contains(&r.row)) {
            if let PlumbingEquation::Binomial { unit, i, j, pivot } = &r.plumbing {
                let root = match i.get(pivot) {
                    Some(1) | None => unit.clone(),
                    Some(n) => format!("{unit}/{n}"),
                };
                coordinate_changes.push(format!("x_{pivot} = exp({root}) s_{pivot}"));
                eqs.push(format!("{} = {}", monomial("x", i), monomial("x", j)));
            }
        }
        parts.push(format!("{{{}}}", eqs.join(", ")));
    }
    if parts.is_empty() {
        parts.push("point".into());
    }
    LocalModel { smooth_dim, factors, coordinate_changes, rendered: parts.join(" × ") }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothingWitness {
    pub passages: Vec<i32>,
    /// For each targeted class, a curve `x_e = τ^{w_e}` (or the point
    /// `x = 1`) on the binomial variety, nonzero for `τ ≠ 0`.
    pub curves: Vec<BTreeMap<String, i64>>,
    pub rendered: Vec<String>,
}

/// Exhibits a simultaneous smoothing of the targeted passages and whole
/// cross-equivalence classes.
pub fn can_smooth(
    conv: &ConvertedSystem,
    sys: &EquationSystem,
    passages: &[i32],
    classes: &[Vec<String>],
) -> Result<SmoothingWitness, Error> {
    let all = sys.graph.passages();
    for p in passages {
        if !all.contains(p) {
            return Err(Error::Precondition(format!("no passage {p}")));
        }
    }
    let known: Vec<BTreeSet<String>> =
        sys.cross_equivalence_classes().iter().map(|c| sys.edge_names(c).into_iter().collect()).collect();
    let mut curves = Vec::new();
    let mut rendered: Vec<String> = passages.iter().map(|p| format!("t_{} = τ", -p)).collect();
    for target in classes {
        let set: BTreeSet<String> = target.iter().cloned().collect();
        if !known.contains(&set) {
            return Err(Error::Precondition(format!(
                "partial class smoothing not guaranteed: {{{}}} is not a whole class",
                target.join(", ")
            )));
        }
        let bins: Vec<(&BTreeMap<String, i64>, &BTreeMap<String, i64>)> = conv
            .binomials()
            .filter_map(|b| match b {
                PlumbingEquation::Binomial { i, j, .. } if i.keys().any(|e| set.contains(e)) => Some((i, j)),
                _ => None,
            })
            .collect();
        let mut w: BTreeMap<String, i64> = set.iter().map(|e| (e.clone(), 0)).collect();
        if let [(i, j)] = bins.as_slice() {
            let a: i64 = i.values().sum();
            let b: i64 = j.values().sum();
            let g = a.gcd(&b);
            for e in i.keys() {
                w.insert(e.clone(), b / g);
            }
            for e in j.keys() {
                w.insert(e.clone(), a / g);
            }
        }
        let text: Vec<String> = w
            .iter()
            .map(|(e, &x)| match x {
                0 => format!("x_{e} = 1"),
                1 => format!("x_{e} = τ"),
                x => format!("x_{e} = τ^{x}"),
            })
            .collect();
        rendered.push(text.join(", "));
        curves.push(w);
    }
    Ok(SmoothingWitness { passages: passages.to_vec(), curves, rendered })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "certificate", rename_all = "kebab-case")]
pub enum HurwitzCertificate {
    /// A horizontal λ-period is itself an equation, so these nodes cannot
    /// occur in the closure.
    ImpossibleHorizontalNode { edges: Vec<String> },
    /// Every equation is non-horizontal: the closure is smooth with normal
    /// crossing boundary here.
    SmoothNormalCrossing,
}

pub fn hurwitz_rule(sys: &EquationSystem) -> Option<HurwitzCertificate> {
    let dead: Vec<String> = sys
        .horizontal()
        .into_iter()
        .filter(|&e| sys.in_span(&Cycle::vanishing(&sys.basis, e)))
        .map(|e| sys.basis.edges[e].clone())
        .collect();
    if !dead.is_empty() {
        return Some(HurwitzCertificate::ImpossibleHorizontalNode { edges: dead });
    }
    if sys.rank() > 0 && sys.rows().iter().all(|r| sys.hor_support(r).is_empty()) {
        return Some(HurwitzCertificate::SmoothNormalCrossing);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(i: &[(&str, i64)], j: &[(&str, i64)]) -> PlumbingEquation {
        PlumbingEquation::Binomial {
            unit: "f1".into(),
            i: i.iter().map(|(e, x)| (e.to_string(), *x)).collect(),
            j: j.iter().map(|(e, x)| (e.to_string(), *x)).collect(),
            pivot: i[0].0.to_string(),
        }
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn cusp_is_singular_and_not_normal() {
        let b = bin(&[("e1", 3)], &[("e2", 2)]);
        let r = lattice_analysis(&[&b], &names(&["e1", "e2"]));
        assert_eq!(r.kind, SingularityKind::ToricSingular);
        assert!(r.saturated);
        assert_eq!(r.normal, Some(false));
    }

    #[test]
    fn linear_binomial_is_smooth() {
        let b = bin(&[("e1", 1)], &[("e2", 1)]);
        let r = lattice_analysis(&[&b], &names(&["e1", "e2"]));
        assert_eq!(r.kind, SingularityKind::Smooth);
        assert_eq!(r.normal, Some(true));
    }

    #[test]
    fn cone_is_singular() {
        let b = bin(&[("e1", 1), ("e2", 1)], &[("e3", 2)]);
        let r = lattice_analysis(&[&b], &names(&["e1", "e2", "e3"]));
        assert_eq!(r.kind, SingularityKind::ToricSingular);
        assert!(r.saturated);
        assert_eq!(r.normal, None);
    }

    #[test]
    fn binomial_rendering() {
        assert_eq!(bin(&[("e1", 3)], &[("e2", 2)]).render(), "exp(f1) s_e1^3 - s_e2^2");
        assert_eq!(bin(&[("e1", 1), ("e2", 1)], &[("e3", 2)]).render(), "exp(f1) s_e1 s_e2 - s_e3^2");
    }
}
