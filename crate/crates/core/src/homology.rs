//! Adapted bases of relative homology, cycles with vanishing-cycle
//! components, the intersection pairing and Picard–Lefschetz transport.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::Violation;
use crate::gaussian::Gq;
use crate::level_graph::{de_id, natural_cmp, EnhancedLevelGraph};
use crate::linalg::{self, Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Crossing,
    Noncrossing,
}

fn de_opt_edge<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    struct Wrap(#[serde(deserialize_with = "de_id")] String);
    Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElement {
    pub name: String,
    pub level: i32,
    pub kind: Kind,
    #[serde(default, deserialize_with = "de_opt_edge")]
    pub edge: Option<String>,
    /// `⟨γ, λ_e⟩` for edges `e`; absent edges pair to zero.
    #[serde(default)]
    pub pairings: BTreeMap<String, i64>,
}

/// Basis elements resolved against a graph: the pairing table has one row
/// per element and one column per edge in natural order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdaptedBasis {
    pub elements: Vec<BasisElement>,
    pub edges: Vec<String>,
    pub table: Vec<Vec<i64>>,
}

impl AdaptedBasis {
    /// Resolves names and edge references; unresolved references are
    /// returned as violations.
    pub fn new(elements: Vec<BasisElement>, graph: &EnhancedLevelGraph) -> Result<Self, Vec<Violation>> {
        let edges = graph.edge_ids();
        let mut bad = Vec::new();
        let mut names = BTreeSet::new();
        for el in &elements {
            if !names.insert(el.name.as_str()) {
                bad.push(Violation::new("basis", format!("duplicate basis name {}", el.name)));
            }
            for e in el.pairings.keys().chain(el.edge.iter()) {
                if !edges.contains(e) {
                    bad.push(Violation::new(
                        "basis",
                        format!("basis element {} references unknown edge {e}", el.name),
                    ));
                }
            }
        }
        if !bad.is_empty() {
            return Err(bad);
        }
        let table = elements
            .iter()
            .map(|el| edges.iter().map(|e| el.pairings.get(e).copied().unwrap_or(0)).collect())
            .collect();
        Ok(AdaptedBasis { elements, edges, table })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Width of a cycle coordinate vector: basis columns then λ columns.
    pub fn width(&self) -> usize {
        self.len() + self.n_edges()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.name == name)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e == id)
    }

    /// Index of the crossing element paired with edge `e`.
    pub fn crossing_element(&self, edge: &str) -> Option<usize> {
        self.elements
            .iter()
            .position(|el| el.kind == Kind::Crossing && el.edge.as_deref() == Some(edge))
    }

    /// Column of the pairing table for edge `e`, as a cycle coordinate
    /// vector (λ part zero).
    pub fn pairing_column(&self, e: usize) -> Vector {
        let mut v: Vector = self.table.iter().map(|r| Gq::int(r[e])).collect();
        v.extend(linalg::zeros(self.n_edges()));
        v
    }

    /// Reverses the orientation of the vanishing cycle of edge `e`.
    pub fn flip_edge(&mut self, e: usize) {
        for r in &mut self.table {
            r[e] = -r[e];
        }
        let id = self.edges[e].clone();
        for el in &mut self.elements {
            if let Some(p) = el.pairings.get_mut(&id) {
                *p = -*p;
            }
        }
    }

    fn order_key(el: &BasisElement) -> (i32, u8) {
        (-el.level, if el.kind == Kind::Crossing { 0 } else { 1 })
    }

    /// Sorts elements into the canonical order: level descending, crossing
    /// before noncrossing, then name.
    pub fn sorted(mut elements: Vec<BasisElement>) -> Vec<BasisElement> {
        elements.sort_by(|a, b| {
            Self::order_key(a).cmp(&Self::order_key(b)).then_with(|| natural_cmp(&a.name, &b.name))
        });
        elements
    }

    pub fn validate_adapted(&self, graph: &EnhancedLevelGraph) -> Vec<Violation> {
        let mut out = Vec::new();
        let hor = graph.horizontal_edges();
        let depth = graph.depth() as i32;
        for w in self.elements.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let ord = Self::order_key(a)
                .cmp(&Self::order_key(b))
                .then_with(|| natural_cmp(&a.name, &b.name));
            if ord == std::cmp::Ordering::Greater {
                out.push(Violation::new(
                    "basis-order",
                    format!("{} must come after {}", a.name, b.name),
                ));
            }
        }
        let mut used = BTreeMap::new();
        for (l, el) in self.elements.iter().enumerate() {
            if el.level > 0 || el.level < -depth {
                out.push(Violation::new(
                    "basis",
                    format!("{} sits at level {} outside the graph", el.name, el.level),
                ));
            }
            match (el.kind, &el.edge) {
                (Kind::Crossing, None) => out.push(Violation::new(
                    "basis",
                    format!("crossing element {} has no paired edge", el.name),
                )),
                (Kind::Crossing, Some(e)) => {
                    if !hor.contains(e) {
                        out.push(Violation::new(
                            "basis",
                            format!("crossing element {} pairs with non-horizontal edge {e}", el.name),
                        ));
                    } else if let Some(edge) = graph.edge(e) {
                        if graph.carrier_level(edge) != el.level {
                            out.push(Violation::new(
                                "basis",
                                format!("crossing element {} is not at the level of {e}", el.name),
                            ));
                        }
                    }
                    if let Some(prev) = used.insert(e.clone(), el.name.clone()) {
                        out.push(Violation::new(
                            "basis",
                            format!("edge {e} is paired with both {prev} and {}", el.name),
                        ));
                    }
                }
                (Kind::Noncrossing, Some(e)) => out.push(Violation::new(
                    "basis",
                    format!("noncrossing element {} names edge {e}", el.name),
                )),
                (Kind::Noncrossing, None) => {}
            }
            for h in &hor {
                let Some(k) = self.edge_index(h) else { continue };
                let want = i64::from(el.kind == Kind::Crossing && el.edge.as_deref() == Some(h.as_str()));
                if self.table[l][k] != want {
                    out.push(Violation::new(
                        "basis-pairing",
                        format!("<{}, λ_{h}> = {} but must be {want}", el.name, self.table[l][k]),
                    ));
                }
            }
        }
        out
    }
}

/// An integral cycle combination with Gaussian-rational coefficients on the
/// basis and on the vanishing cycles `λ_e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cycle {
    pub basis: Vector,
    pub lambda: Vector,
}

impl Cycle {
    pub fn zero(basis: &AdaptedBasis) -> Self {
        Cycle { basis: linalg::zeros(basis.len()), lambda: linalg::zeros(basis.n_edges()) }
    }

    pub fn from_vec(v: &[Gq], k: usize) -> Self {
        Cycle { basis: v[..k].to_vec(), lambda: v[k..].to_vec() }
    }

    pub fn to_vec(&self) -> Vector {
        let mut v = self.basis.clone();
        v.extend(self.lambda.iter().cloned());
        v
    }

    pub fn element(basis: &AdaptedBasis, l: usize) -> Self {
        let mut c = Cycle::zero(basis);
        c.basis[l] = Gq::one();
        c
    }

    pub fn vanishing(basis: &AdaptedBasis, e: usize) -> Self {
        let mut c = Cycle::zero(basis);
        c.lambda[e] = Gq::one();
        c
    }

    pub fn is_zero(&self) -> bool {
        linalg::is_zero(&self.basis) && linalg::is_zero(&self.lambda)
    }

    pub fn is_real(&self) -> bool {
        self.basis.iter().chain(&self.lambda).all(Gq::is_real)
    }

    pub fn is_pure_lambda(&self) -> bool {
        linalg::is_zero(&self.basis)
    }

    pub fn add(&self, o: &Cycle) -> Cycle {
        Cycle {
            basis: self.basis.iter().zip(&o.basis).map(|(a, b)| a + b).collect(),
            lambda: self.lambda.iter().zip(&o.lambda).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Cycle) -> Cycle {
        self.add(&o.scale(&Gq::int(-1)))
    }

    pub fn scale(&self, c: &Gq) -> Cycle {
        Cycle { basis: linalg::scaled(c, &self.basis), lambda: linalg::scaled(c, &self.lambda) }
    }

    /// `⟨c, λ_e⟩`; the λ components pair to zero.
    pub fn pair(&self, basis: &AdaptedBasis, e: usize) -> Gq {
        self.basis
            .iter()
            .zip(&basis.table)
            .filter(|(c, r)| !c.is_zero() && r[e] != 0)
            .map(|(c, r)| c * &Gq::int(r[e]))
            .sum()
    }

    /// `c + Σ n_e ⟨c, λ_e⟩ λ_e`.
    pub fn picard_lefschetz(&self, basis: &AdaptedBasis, twists: &[(usize, i64)]) -> Cycle {
        let mut out = self.clone();
        for &(e, n) in twists {
            let p = self.pair(basis, e);
            out.lambda[e] += &(&Gq::int(n) * &p);
        }
        out
    }

    pub fn to_record(&self, basis: &AdaptedBasis) -> CycleRecord {
        CycleRecord {
            coeffs: basis
                .elements
                .iter()
                .zip(&self.basis)
                .filter(|(_, c)| !c.is_zero())
                .map(|(el, c)| (el.name.clone(), c.clone()))
                .collect(),
            lambda: basis
                .edges
                .iter()
                .zip(&self.lambda)
                .filter(|(_, c)| !c.is_zero())
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Human-readable form, e.g. `d1 - d2 + 2 λ_e1`.
    pub fn render(&self, basis: &AdaptedBasis) -> String {
        let terms = basis
            .elements
            .iter()
            .map(|el| el.name.clone())
            .zip(&self.basis)
            .chain(basis.edges.iter().map(|e| format!("λ_{e}")).zip(&self.lambda));
        render_terms(terms)
    }
}

pub(crate) fn render_terms<'a>(terms: impl Iterator<Item = (String, &'a Gq)>) -> String {
    let mut s = String::new();
    for (name, c) in terms {
        if c.is_zero() {
            continue;
        }
        let neg_real = c.is_real() && c.re < num_rational::BigRational::from_integer(0.into());
        let mag = if neg_real { -c.clone() } else { c.clone() };
        let sign = if s.is_empty() {
            if neg_real { "-" } else { "" }
        } else if neg_real {
            " - "
        } else {
            " + "
        };
        let coef = if mag.is_one() {
            String::new()
        } else if mag.is_real() {
            format!("{mag} ")
        } else {
            format!("({mag}) ")
        };
        let _ = write!(s, "{sign}{coef}{name}");
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Renders a linear form in λ-periods, e.g. `3 ∫λ_e1 - 2 ∫λ_e2`.
pub fn render_lambda_form(coeffs: &[Gq], edges: &[String]) -> String {
    render_terms(edges.iter().map(|e| format!("∫λ_{e}")).zip(coeffs))
}

/// Sparse serialized form of a cycle.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    #[serde(default)]
    pub coeffs: BTreeMap<String, Gq>,
    #[serde(default)]
    pub lambda: BTreeMap<String, Gq>,
}

impl CycleRecord {
    pub fn resolve(&self, basis: &AdaptedBasis) -> Result<Cycle, Violation> {
        let mut c = Cycle::zero(basis);
        for (name, q) in &self.coeffs {
            let l = basis.index_of(name).ok_or_else(|| {
                Violation::new("reference", format!("unknown basis element {name}"))
            })?;
            c.basis[l] = q.clone();
        }
        for (e, q) in &self.lambda {
            let k = basis
                .edge_index(e)
                .ok_or_else(|| Violation::new("reference", format!("unknown edge {e}")))?;
            c.lambda[k] = q.clone();
        }
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Declared,
    Derived,
}

/// Linear relations among the λ-periods, kept with their provenance and
/// as a reduced echelon basis.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LambdaRelationSet {
    pub sources: Vec<(Vector, Provenance)>,
    pub echelon: Matrix,
}

impl LambdaRelationSet {
    pub fn new(sources: Vec<(Vector, Provenance)>) -> Self {
        let echelon = linalg::row_basis(&sources.iter().map(|(v, _)| v.clone()).collect::<Vec<_>>());
        LambdaRelationSet { sources, echelon }
    }

    pub fn contains(&self, form: &[Gq]) -> bool {
        linalg::in_span(&self.echelon, form)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level_graph::{Edge, Marking, Vertex};

    pub(crate) fn loop_graph(n: usize) -> EnhancedLevelGraph {
        EnhancedLevelGraph {
            vertices: vec![Vertex { id: "v".into(), genus: 0, level: 0 }],
            edges: (1..=n)
                .map(|k| Edge { id: format!("e{k}"), ends: ["v".into(), "v".into()], top: None, kappa: None })
                .collect(),
            markings: vec![Marking { vertex: "v".into(), order: 2 * n as i64 - 2 }],
        }
    }

    fn delta(k: usize) -> BasisElement {
        BasisElement {
            name: format!("d{k}"),
            level: 0,
            kind: Kind::Crossing,
            edge: Some(format!("e{k}")),
            pairings: [(format!("e{k}"), 1)].into(),
        }
    }

    fn alpha(name: &str) -> BasisElement {
        BasisElement { name: name.into(), level: 0, kind: Kind::Noncrossing, edge: None, pairings: BTreeMap::new() }
    }

    #[test]
    fn adapted_basis_checks() {
        let g = loop_graph(2);
        let b = AdaptedBasis::new(vec![delta(1), delta(2), alpha("a")], &g).unwrap();
        assert!(b.validate_adapted(&g).is_empty());
        let mut bad = delta(2);
        bad.pairings.insert("e1".into(), 1);
        let b = AdaptedBasis::new(vec![delta(1), bad, alpha("a")], &g).unwrap();
        assert!(!b.validate_adapted(&g).is_empty());
        let b = AdaptedBasis::new(vec![alpha("a"), delta(1), delta(2)], &g).unwrap();
        assert!(b.validate_adapted(&g).iter().any(|v| v.rule == "basis-order"));
    }

    #[test]
    fn unknown_edge_reference() {
        let g = loop_graph(1);
        let mut d = delta(1);
        d.pairings.insert("zz".into(), 1);
        assert!(AdaptedBasis::new(vec![d], &g).is_err());
    }

    #[test]
    fn pairing_and_monodromy() {
        let g = loop_graph(2);
        let b = AdaptedBasis::new(vec![delta(1), delta(2), alpha("a")], &g).unwrap();
        let mut c = Cycle::zero(&b);
        c.basis[0] = Gq::int(2);
        c.basis[1] = Gq::int(-1);
        assert_eq!(c.pair(&b, 0), Gq::int(2));
        assert_eq!(c.pair(&b, 1), Gq::int(-1));
        let pl = c.picard_lefschetz(&b, &[(0, 3)]);
        assert_eq!(pl.lambda[0], Gq::int(6));
        assert_eq!(pl.basis, c.basis);
        assert_eq!(c.render(&b), "2 d1 - d2");
        let rec = c.to_record(&b);
        assert_eq!(rec.resolve(&b).unwrap(), c);
    }
}
