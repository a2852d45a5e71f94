//! Linear defining equations of a subvariety near a boundary point, and
//! the combinatorial consequences of the residue, cross-equivalence and
//! dimension theorems.

use num_rational::BigRational;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Violation};
use crate::gaussian::Gq;
use crate::homology::{render_lambda_form, AdaptedBasis, Cycle, Kind, LambdaRelationSet};
use crate::level_graph::{EnhancedLevelGraph, Undegeneration};
use crate::linalg::{self, Matrix, Vector};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    #[serde(default)]
    pub real: bool,
    #[serde(default)]
    pub minimal_stratum: bool,
}

/// `∫λ_e = q ∫λ_{e'}` on the subvariety.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    #[serde(deserialize_with = "crate::level_graph::de_id")]
    pub e: String,
    #[serde(rename = "e'", deserialize_with = "crate::level_graph::de_id")]
    pub e_prime: String,
    pub q: Gq,
}

/// The span of the equations in reduced row echelon form over the columns
/// (basis elements in basis order, then λ-carriers in edge order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RrefSystem {
    pub rows: Vec<Cycle>,
    pub pivots: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct EquationSystem {
    pub graph: EnhancedLevelGraph,
    pub basis: AdaptedBasis,
    pub equations: Vec<Cycle>,
    pub flags: Flags,
    pub relations: LambdaRelationSet,
    pub ratios: Vec<Ratio>,
    pub nonvanishing: BTreeSet<String>,
    rref: RrefSystem,
}

/// `F = H_1 + ... + H_k + G` with each `H_j` crossing a primitive set at
/// its own top level and `G` crossing no horizontal node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub parts: Vec<Cycle>,
    pub remainder: Cycle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Vertical,
    Horizontal,
    TheoremViolating,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub kept_passages: Vec<i32>,
    pub kept_horizontal: Vec<String>,
    pub codim: i64,
    pub rank: usize,
    pub lost: usize,
    pub divisorial: bool,
    pub branch: Option<Branch>,
    /// Whether the basis, read through the new levels, is still adapted.
    pub adapted_ordering: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    ConsistentWithObligations,
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyCertificate {
    pub verdict: Verdict,
    pub rule: Option<String>,
    /// The relation `c ∫λ_e = 0` that the rule forces, when there is one.
    pub forced_relation: Option<String>,
    pub forced_edge: Option<String>,
    /// Cross-equivalence classes whose proportionality constants are not
    /// determined by the data.
    pub obligations: Vec<Vec<String>>,
    pub trace: Vec<String>,
}

impl ConsistencyCertificate {
    fn inconsistent(rule: &str, edge: Option<String>, trace: Vec<String>) -> Self {
        ConsistencyCertificate {
            verdict: Verdict::Inconsistent,
            rule: Some(rule.to_string()),
            forced_relation: edge.as_ref().map(|e| format!("∫λ_{e} = 0")),
            forced_edge: edge,
            obligations: Vec::new(),
            trace,
        }
    }
}

impl EquationSystem {
    pub fn new(graph: EnhancedLevelGraph, basis: AdaptedBasis, equations: Vec<Cycle>) -> Self {
        let k = basis.len();
        let mut m: Matrix = equations.iter().map(Cycle::to_vec).collect();
        let pivots = linalg::rref(&mut m);
        let rows = m.iter().map(|r| Cycle::from_vec(r, k)).collect();
        EquationSystem {
            graph,
            basis,
            equations,
            flags: Flags::default(),
            relations: LambdaRelationSet::default(),
            ratios: Vec::new(),
            nonvanishing: BTreeSet::new(),
            rref: RrefSystem { rows, pivots },
        }
    }

    pub fn with_flags(mut self, flags: Flags) -> Self {
        self.flags = flags;
        self
    }

    pub fn with_relations(mut self, relations: LambdaRelationSet) -> Self {
        self.relations = relations;
        self
    }

    pub fn with_ratios(mut self, ratios: Vec<Ratio>) -> Self {
        self.ratios = ratios;
        self
    }

    pub fn with_nonvanishing(mut self, edges: impl IntoIterator<Item = String>) -> Self {
        self.nonvanishing = edges.into_iter().collect();
        self
    }

    pub fn rref(&self) -> &RrefSystem {
        &self.rref
    }

    pub fn rows(&self) -> &[Cycle] {
        &self.rref.rows
    }

    /// Dimension of the span of the equations.
    pub fn rank(&self) -> usize {
        self.rref.rows.len()
    }

    fn row_matrix(&self) -> Matrix {
        self.rref.rows.iter().map(Cycle::to_vec).collect()
    }

    pub fn zero(&self) -> Cycle {
        Cycle::zero(&self.basis)
    }

    pub fn in_span(&self, f: &Cycle) -> bool {
        linalg::in_span(&self.row_matrix(), &f.to_vec())
    }

    /// Coordinates of `f` with respect to the rref rows.
    pub fn coordinates(&self, f: &Cycle) -> Option<Vector> {
        if self.rank() == 0 {
            return f.is_zero().then(Vec::new);
        }
        linalg::solve_combination(&self.row_matrix(), &f.to_vec())
    }

    pub fn combine(&self, x: &[Gq]) -> Cycle {
        let v = linalg::combine(x, &self.row_matrix(), self.basis.width());
        Cycle::from_vec(&v, self.basis.len())
    }

    /// Indices (into `basis.edges`) of horizontal edges.
    pub fn horizontal(&self) -> Vec<usize> {
        self.graph
            .horizontal_edges()
            .iter()
            .filter_map(|e| self.basis.edge_index(e))
            .collect()
    }

    pub fn is_horizontal(&self, e: usize) -> bool {
        self.graph.edge(&self.basis.edges[e]).is_some_and(|x| self.graph.is_horizontal(x))
    }

    pub fn edge_level(&self, e: usize) -> i32 {
        self.graph.edge(&self.basis.edges[e]).map_or(0, |x| self.graph.carrier_level(x))
    }

    pub fn edge_names(&self, es: &[usize]) -> Vec<String> {
        es.iter().map(|&e| self.basis.edges[e].clone()).collect()
    }

    /// Horizontal edges `e` with `⟨F, λ_e⟩ ≠ 0`.
    pub fn hor_support(&self, f: &Cycle) -> Vec<usize> {
        self.horizontal().into_iter().filter(|&e| !f.pair(&self.basis, e).is_zero()).collect()
    }

    /// Levels of the nonzero carriers of `f`, through a level map.
    fn carrier_levels<'a>(&'a self, f: &'a Cycle, map: impl Fn(i32) -> i32 + 'a) -> impl Iterator<Item = i32> + 'a {
        let b = f
            .basis
            .iter()
            .zip(&self.basis.elements)
            .filter(|(c, _)| !c.is_zero())
            .map(|(_, el)| el.level);
        let l = f.lambda.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(e, _)| self.edge_level(e));
        b.chain(l).map(map)
    }

    /// Highest level carrying a nonzero coefficient of `f`.
    pub fn top_level(&self, f: &Cycle) -> Option<i32> {
        self.carrier_levels(f, |l| l).max()
    }

    /// Pairings of the rref rows with the edges in `edges`: one row per edge.
    fn pairing_constraints(&self, edges: &[usize]) -> Matrix {
        edges
            .iter()
            .map(|&e| self.rref.rows.iter().map(|r| r.pair(&self.basis, e)).collect())
            .collect()
    }

    /// Basis (in rref-row coordinates) of the span elements that pair to
    /// zero with every edge of `universe` outside `s`.
    fn support_space(&self, s: &[usize], universe: &[usize]) -> Matrix {
        let outside: Vec<usize> = universe.iter().copied().filter(|e| !s.contains(e)).collect();
        let c = self.pairing_constraints(&outside);
        if c.is_empty() {
            return (0..self.rank()).map(|j| linalg::unit(self.rank(), j)).collect();
        }
        linalg::nullspace(&c, self.rank())
    }

    /// Whether some span element crosses, among the edges of `universe`,
    /// exactly the edges in `s`.
    pub fn is_correlated_within(&self, s: &[usize], universe: &[usize]) -> bool {
        if s.iter().any(|e| !universe.contains(e)) {
            return false;
        }
        let z = self.support_space(s, universe);
        let q = self.pairing_constraints(s);
        q.iter().all(|col| z.iter().any(|v| !linalg::dot(v, col).is_zero()))
    }

    pub fn is_correlated(&self, s: &[usize]) -> bool {
        self.is_correlated_within(s, &self.horizontal())
    }

    /// A span element whose support within `universe` is exactly `s`.
    pub fn correlated_witness(&self, s: &[usize], universe: &[usize]) -> Option<Cycle> {
        if !self.is_correlated_within(s, universe) {
            return None;
        }
        let q = self.pairing_constraints(s);
        // Keep only directions that move the pairings with `s`.
        let mut z: Matrix = Vec::new();
        let mut images: Matrix = Vec::new();
        for v in self.support_space(s, universe) {
            let img: Vector = q.iter().map(|col| linalg::dot(&v, col)).collect();
            let mut trial = images.clone();
            trial.push(img.clone());
            if linalg::rank(&trial) > images.len() {
                images.push(img);
                z.push(v);
            }
        }
        // A generic combination works; only finitely many t fail.
        for t in 1..=(s.len() * z.len() + 2) as i64 {
            let mut x = linalg::zeros(self.rank());
            let mut w = Gq::one();
            for v in &z {
                linalg::add_scaled(&mut x, &w, v);
                w = &w * &Gq::int(t);
            }
            if q.iter().all(|col| !linalg::dot(&x, col).is_zero()) {
                return Some(self.combine(&x));
            }
        }
        None
    }

    /// Partition of the horizontal edges generated by the supports of the
    /// rref rows.
    pub fn cross_equivalence_classes(&self) -> Vec<Vec<usize>> {
        let hor = self.horizontal();
        let pos: BTreeMap<usize, usize> = hor.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        let mut uf = UnionFind::<usize>::new(hor.len());
        for r in &self.rref.rows {
            let s = self.hor_support(r);
            for w in s.windows(2) {
                uf.union(pos[&w[0]], pos[&w[1]]);
            }
        }
        group_classes(&hor, |k| uf.find(k))
    }

    /// Minimal nonempty correlated sets, found by exhaustive search.
    pub fn primitive_sets(&self, limit: usize) -> Result<Vec<Vec<usize>>, Error> {
        let hor = self.horizontal();
        if hor.len() > limit {
            return Err(Error::Precondition(format!(
                "{} horizontal edges exceed the search limit {limit}",
                hor.len()
            )));
        }
        let mut cands = BTreeSet::new();
        for r in &self.rref.rows {
            cands.extend(self.hor_support(r));
        }
        let cands: Vec<usize> = cands.into_iter().collect();
        Ok(minimal_correlated(&cands, |s| self.is_correlated_within(s, &hor), usize::MAX))
    }

    fn check_passage(&self, passage: i32) -> Result<(), Error> {
        if !self.graph.passages().contains(&passage) {
            return Err(Error::Precondition(format!("no passage {passage}")));
        }
        Ok(())
    }

    /// `(e, m_{e,i})` for vertical edges crossing passage `i`.
    pub fn monodromy_twists(&self, passage: i32) -> Result<Vec<(usize, i64)>, Error> {
        self.check_passage(passage)?;
        self.graph
            .crossing_edges(passage)
            .iter()
            .map(|id| {
                let m = self.graph.prong_multiplicity(id, passage)? as i64;
                Ok((self.basis.edge_index(id).unwrap_or(0), m))
            })
            .collect()
    }

    /// `R_i(F) = Σ m_{e,i} ⟨F, λ_e⟩ ∫λ_e` over vertical edges crossing
    /// passage `i`, as coefficients on the λ-periods.
    pub fn residue_relation(&self, f: &Cycle, passage: i32) -> Result<Vector, Error> {
        self.check_passage(passage)?;
        let top = self
            .top_level(f)
            .ok_or_else(|| Error::Precondition("zero cycle has no top level".into()))?;
        if passage > top {
            return Err(Error::Precondition(format!(
                "passage {passage} lies above the top level {top}"
            )));
        }
        let mut out = linalg::zeros(self.basis.n_edges());
        for (e, m) in self.monodromy_twists(passage)? {
            out[e] = &Gq::int(m) * &f.pair(&self.basis, e);
        }
        Ok(out)
    }

    /// Rows of the span together with the declared λ-relations and
    /// proportionalities, written as cycles.
    pub fn effective_rows(&self) -> Matrix {
        let k = self.basis.len();
        let width = self.basis.width();
        let mut m = self.row_matrix();
        let lift = |form: &[Gq]| {
            let mut v = linalg::zeros(k);
            v.extend(form.iter().cloned());
            v
        };
        for r in &self.relations.echelon {
            m.push(lift(r));
        }
        for r in &self.ratios {
            if let Some(form) = self.ratio_form(r) {
                m.push(lift(&form));
            }
        }
        debug_assert!(m.iter().all(|r| r.len() == width));
        m
    }

    fn ratio_form(&self, r: &Ratio) -> Option<Vector> {
        let a = self.basis.edge_index(&r.e)?;
        let b = self.basis.edge_index(&r.e_prime)?;
        let mut v = linalg::zeros(self.basis.n_edges());
        v[a] = Gq::one();
        v[b] -= &r.q;
        Some(v)
    }

    /// Relations among the λ-periods known to hold on the subvariety: the
    /// declared ones and the pure λ part of the span.
    pub fn relation_space(&self) -> Matrix {
        let k = self.basis.len();
        let mut m = self.effective_rows();
        let piv = linalg::rref(&mut m);
        m.into_iter().zip(piv).filter(|(_, p)| *p >= k).map(|(r, _)| r[k..].to_vec()).collect()
    }

    /// Relations supported on `{e, f}` only.
    fn relations_on_pair(space: &Matrix, e: usize, f: usize, n: usize) -> Matrix {
        if space.is_empty() {
            return Vec::new();
        }
        let others: Matrix = (0..n)
            .filter(|&k| k != e && k != f)
            .map(|k| space.iter().map(|r| r[k].clone()).collect())
            .collect();
        let combos = if others.is_empty() {
            (0..space.len()).map(|j| linalg::unit(space.len(), j)).collect()
        } else {
            linalg::nullspace(&others, space.len())
        };
        let vecs: Matrix = combos.iter().map(|x| linalg::combine(x, space, n)).collect();
        linalg::row_basis(&vecs)
    }

    /// `r` with `∫λ_e = r ∫λ_f` forced by the known relations.
    pub fn lambda_ratio(&self, e: usize, f: usize) -> Option<Gq> {
        if e == f {
            return Some(Gq::one());
        }
        let rels = Self::relations_on_pair(&self.relation_space(), e, f, self.basis.n_edges());
        if rels.len() != 1 {
            return None;
        }
        let v = &rels[0];
        if v[e].is_zero() || v[f].is_zero() {
            return None;
        }
        Some(-(&v[f] / &v[e]))
    }

    fn forces_zero(space: &Matrix, e: usize, n: usize) -> bool {
        linalg::in_span(space, &linalg::unit(n, e))
    }

    /// Edges whose λ-period is known not to vanish: horizontal edges and
    /// the declared ones.
    pub fn nonvanishing_edges(&self) -> Vec<usize> {
        let mut out: BTreeSet<usize> = self.horizontal().into_iter().collect();
        out.extend(self.nonvanishing.iter().filter_map(|e| self.basis.edge_index(e)));
        out.into_iter().collect()
    }

    /// Splits `f` into primitive horizontal pieces plus a remainder crossing
    /// no horizontal node.
    pub fn decompose(&self, f: &Cycle) -> Result<Decomposition, Error> {
        if !self.in_span(f) {
            return Err(Error::NotInSpan(f.render(&self.basis)));
        }
        let hor = self.horizontal();
        let mut parts = Vec::new();
        let mut remainder = self.zero();
        let mut cur = f.clone();
        loop {
            let supp = self.hor_support(&cur);
            if supp.is_empty() {
                remainder = remainder.add(&cur);
                break;
            }
            let t = self.top_level(&cur).unwrap_or(0);
            let top_supp: Vec<usize> = supp.iter().copied().filter(|&e| self.edge_level(e) == t).collect();
            if top_supp.is_empty() {
                let g0 = self.match_top_without_crossing(&cur, t)?;
                remainder = remainder.add(&g0);
                cur = cur.sub(&g0);
                continue;
            }
            let s = minimal_correlated(&top_supp, |s| self.is_correlated_within(s, &hor), 1)
                .pop()
                .ok_or_else(|| {
                    Error::Infeasible(format!(
                        "no primitive collection at level {t} inside the support of {}",
                        cur.render(&self.basis)
                    ))
                })?;
            let mut p = self.correlated_witness(&s, &hor).expect("correlated set has a witness");
            while let Some(tp) = self.top_level(&p).filter(|&tp| tp > t) {
                p = p.sub(&self.match_top_without_crossing(&p, tp)?);
            }
            let c = &cur.pair(&self.basis, s[0]) / &p.pair(&self.basis, s[0]);
            let h = p.scale(&c);
            cur = cur.sub(&h);
            parts.push(h);
        }
        Ok(Decomposition { parts, remainder })
    }

    /// A span element crossing no horizontal node that agrees with `f` on
    /// every carrier at level `t` or above.
    fn match_top_without_crossing(&self, f: &Cycle, t: i32) -> Result<Cycle, Error> {
        let k = self.basis.len();
        let cols: Vec<usize> = (0..self.basis.width())
            .filter(|&c| {
                let level = if c < k { self.basis.elements[c].level } else { self.edge_level(c - k) };
                level >= t
            })
            .collect();
        let hor = self.horizontal();
        let fv = f.to_vec();
        let gens: Matrix = self
            .rref
            .rows
            .iter()
            .map(|r| {
                let v = r.to_vec();
                let mut g: Vector = cols.iter().map(|&c| v[c].clone()).collect();
                g.extend(hor.iter().map(|&e| r.pair(&self.basis, e)));
                g
            })
            .collect();
        let mut target: Vector = cols.iter().map(|&c| fv[c].clone()).collect();
        target.extend(linalg::zeros(hor.len()));
        let x = if gens.is_empty() {
            linalg::is_zero(&target).then(Vec::new)
        } else {
            linalg::solve_combination(&gens, &target)
        };
        x.map(|x| self.combine(&x)).ok_or_else(|| {
            Error::Infeasible(format!(
                "no span element without horizontal crossings matches the level {t} part of {}",
                f.render(&self.basis)
            ))
        })
    }

    /// Number of rref rows that cross a kept horizontal edge at their top
    /// level, levels read in the target graph.
    pub fn lost_count(&self, u: &Undegeneration) -> usize {
        self.rref
            .rows
            .iter()
            .filter(|r| {
                let Some(top) = self.carrier_levels(r, |l| u.relabel(l)).max() else {
                    return false;
                };
                u.kept_horizontal.iter().any(|id| {
                    let Some(e) = self.basis.edge_index(id) else { return false };
                    u.relabel(self.edge_level(e)) == top && !r.pair(&self.basis, e).is_zero()
                })
            })
            .count()
    }

    fn adapted_after(&self, u: &Undegeneration) -> bool {
        let keys: Vec<(i32, u8)> = self
            .basis
            .elements
            .iter()
            .map(|el| {
                let crossing = el.kind == Kind::Crossing
                    && el.edge.as_ref().is_some_and(|e| u.kept_horizontal.contains(e));
                (-u.relabel(el.level), u8::from(!crossing))
            })
            .collect();
        keys.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn classify_undegeneration(&self, u: &Undegeneration) -> Classification {
        let m = self.rank();
        let c = self.lost_count(u);
        let codim = (u.kept_horizontal.len() + u.kept_passages.len() + m) as i64 - c as i64;
        let divisorial = codim == m as i64 + 1;
        let branch = divisorial.then(|| {
            if u.kept_passages.len() == 1 && u.kept_horizontal.is_empty() {
                return Branch::Vertical;
            }
            let kept: Vec<usize> = u.kept_horizontal.iter().filter_map(|e| self.basis.edge_index(e)).collect();
            let pairwise = kept.iter().enumerate().all(|(a, &x)| {
                kept[a + 1..].iter().all(|&y| self.is_correlated_within(&[x, y], &kept))
            });
            if u.kept_passages.is_empty() && pairwise {
                Branch::Horizontal
            } else {
                Branch::TheoremViolating
            }
        });
        Classification {
            kept_passages: u.kept_passages.clone(),
            kept_horizontal: u.kept_horizontal.clone(),
            codim,
            rank: m,
            lost: c,
            divisorial,
            branch,
            adapted_ordering: self.adapted_after(u),
        }
    }

    /// Applies the rules R1-R5 in order and stops at the first violation.
    pub fn consistency_report(&self, assume_theorems: bool) -> ConsistencyCertificate {
        let n = self.basis.n_edges();
        let names = |es: &[usize]| self.edge_names(es);
        let mut trace = Vec::new();

        // R1: a row crossing horizontal nodes crosses at least two.
        for (j, r) in self.rref.rows.iter().enumerate() {
            let s = self.hor_support(r);
            if s.len() == 1 {
                let e = self.basis.edges[s[0]].clone();
                trace.push(format!(
                    "R1: row {} = {} crosses the single horizontal node {e}",
                    j + 1,
                    r.render(&self.basis)
                ));
                trace.push(format!("monodromy around {e} forces ∫λ_{e} = 0, but {e} is horizontal"));
                return ConsistencyCertificate::inconsistent("R1", Some(e), trace);
            }
        }
        trace.push("R1: every crossing row crosses at least two horizontal nodes".into());

        // R2: residue relations must not kill a nonvanishing λ-period.
        let known = self.relation_space();
        let nonvanishing = self.nonvanishing_edges();
        for (j, r) in self.rref.rows.iter().enumerate() {
            let Some(top) = self.top_level(r) else { continue };
            for &i in self.graph.passages().iter().filter(|&&i| i <= top) {
                let Ok(rel) = self.residue_relation(r, i) else { continue };
                if linalg::is_zero(&rel) {
                    continue;
                }
                let mut with = known.clone();
                with.push(rel.clone());
                for &e in &nonvanishing {
                    if Self::forces_zero(&with, e, n) && !Self::forces_zero(&known, e, n) {
                        let id = self.basis.edges[e].clone();
                        trace.push(format!(
                            "R2: row {} = {} at passage {i} gives {} = 0",
                            j + 1,
                            r.render(&self.basis),
                            render_lambda_form(&rel, &self.basis.edges)
                        ));
                        trace.push(format!("modulo the known relations this forces ∫λ_{id} = 0"));
                        trace.push(format!("∫λ_{id} is declared nonvanishing"));
                        return ConsistencyCertificate::inconsistent("R2", Some(id), trace);
                    }
                }
            }
        }
        trace.push("R2: no residue relation forces a nonvanishing period to zero".into());

        // R3: each cross-equivalence class lies in a single level.
        let classes = self.cross_equivalence_classes();
        for class in &classes {
            let levels: BTreeSet<i32> = class.iter().map(|&e| self.edge_level(e)).collect();
            if levels.len() > 1 {
                trace.push(format!("R3: class {{{}}} spans levels {levels:?}", names(class).join(", ")));
                return ConsistencyCertificate::inconsistent("R3", None, trace);
            }
        }
        trace.push("R3: every cross-equivalence class lies in one level".into());

        // R4: rows cross horizontal nodes only at their top level.
        for (j, r) in self.rref.rows.iter().enumerate() {
            let top = self.top_level(r).unwrap_or(0);
            if let Some(&e) = self.hor_support(r).iter().find(|&&e| self.edge_level(e) < top) {
                trace.push(format!(
                    "R4: row {} = {} has top level {top} but crosses {} at level {}",
                    j + 1,
                    r.render(&self.basis),
                    self.basis.edges[e],
                    self.edge_level(e)
                ));
                return ConsistencyCertificate::inconsistent("R4", None, trace);
            }
        }
        trace.push("R4: rows cross horizontal nodes only at their top level".into());

        // R5: proportionality data is consistent and total on each class.
        if let Some(&e) = nonvanishing.iter().find(|&&e| Self::forces_zero(&known, e, n)) {
            let id = self.basis.edges[e].clone();
            trace.push(format!("R5: the declared relations force ∫λ_{id} = 0"));
            return ConsistencyCertificate::inconsistent("R5", Some(id), trace);
        }
        let obligations: Vec<Vec<String>> = classes
            .iter()
            .filter(|c| c.len() > 1 && c[1..].iter().any(|&e| self.lambda_ratio(e, c[0]).is_none()))
            .map(|c| names(c))
            .collect();
        for o in &obligations {
            let chain: Vec<String> = o.iter().map(|e| format!("λ_{e}")).collect();
            trace.push(format!("R5: proportionality {} is required but not supplied", chain.join(" ∝ ")));
        }
        let verdict = if obligations.is_empty() {
            trace.push("R5: proportionality data is total on every class".into());
            Verdict::Consistent
        } else if assume_theorems {
            trace.push("R5: required proportionalities assumed".into());
            Verdict::Consistent
        } else {
            Verdict::ConsistentWithObligations
        };
        ConsistencyCertificate { verdict, rule: None, forced_relation: None, forced_edge: None, obligations, trace }
    }

    /// Structural invariants of the system beyond those of graph and basis.
    pub fn validate_system(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let hor = self.graph.horizontal_edges();
        for r in &self.ratios {
            for e in [&r.e, &r.e_prime] {
                if !hor.contains(e) {
                    out.push(Violation::new("ratios", format!("ratio names non-horizontal edge {e}")));
                }
            }
            if r.q.is_zero() || !r.q.is_real() {
                out.push(Violation::new("ratios", format!("ratio {} must be a nonzero rational", r.q)));
            }
        }
        if out.is_empty() {
            if let Some(msg) = ratio_conflict(&self.ratios) {
                out.push(Violation::new("ratios", msg));
            }
        }
        for e in &self.nonvanishing {
            if self.basis.edge_index(e).is_none() {
                out.push(Violation::new("reference", format!("nonvanishing edge {e} does not exist")));
            }
        }
        if self.flags.real && !self.equations.iter().all(Cycle::is_real) {
            out.push(Violation::new("flags", "system is flagged real but has non-real coefficients"));
        }
        out
    }
}

/// Checks that declared ratios are transitively consistent.
fn ratio_conflict(ratios: &[Ratio]) -> Option<String> {
    let mut adj: BTreeMap<&str, Vec<(&str, BigRational)>> = BTreeMap::new();
    for r in ratios {
        // ∫λ_e = q ∫λ_e'
        adj.entry(&r.e).or_default().push((&r.e_prime, r.q.re.recip()));
        adj.entry(&r.e_prime).or_default().push((&r.e, r.q.re.clone()));
    }
    let mut value: BTreeMap<&str, BigRational> = BTreeMap::new();
    for &start in adj.keys() {
        if value.contains_key(start) {
            continue;
        }
        value.insert(start, BigRational::from_integer(1.into()));
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            let va = value[a].clone();
            for (b, q) in &adj[a] {
                let vb = &va * q;
                match value.get(b) {
                    Some(old) if *old != vb => {
                        return Some(format!("proportionality data is inconsistent around {a} and {b}"));
                    }
                    Some(_) => {}
                    None => {
                        value.insert(b, vb);
                        queue.push_back(b);
                    }
                }
            }
        }
    }
    None
}

fn group_classes(items: &[usize], root: impl Fn(usize) -> usize) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &e) in items.iter().enumerate() {
        groups.entry(root(k)).or_default().push(e);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

/// Minimal nonempty subsets of `cands` satisfying `pred`, by increasing
/// size; stops after `max` results.
pub(crate) fn minimal_correlated(cands: &[usize], pred: impl Fn(&[usize]) -> bool, max: usize) -> Vec<Vec<usize>> {
    let n = cands.len();
    let mut masks: Vec<u64> = (1..(1u64 << n)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut found: Vec<u64> = Vec::new();
    let mut out = Vec::new();
    for m in masks {
        if found.iter().any(|f| m & f == *f) {
            continue;
        }
        let s: Vec<usize> = (0..n).filter(|k| m >> k & 1 == 1).map(|k| cands[k]).collect();
        if pred(&s) {
            found.push(m);
            out.push(s);
            if out.len() >= max {
                break;
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::BasisElement;
    use crate::level_graph::{Edge, Marking, Vertex};

    fn loops(n: usize) -> EnhancedLevelGraph {
        EnhancedLevelGraph {
            vertices: vec![Vertex { id: "v".into(), genus: 0, level: 0 }],
            edges: (1..=n)
                .map(|k| Edge { id: format!("e{k}"), ends: ["v".into(), "v".into()], top: None, kappa: None })
                .collect(),
            markings: vec![Marking { vertex: "v".into(), order: 2 * n as i64 - 2 }],
        }
    }

    fn basis(g: &EnhancedLevelGraph, n: usize, extra: usize) -> AdaptedBasis {
        let mut els: Vec<BasisElement> = (1..=n)
            .map(|k| BasisElement {
                name: format!("d{k}"),
                level: 0,
                kind: Kind::Crossing,
                edge: Some(format!("e{k}")),
                pairings: [(format!("e{k}"), 1)].into(),
            })
            .collect();
        els.extend((1..=extra).map(|k| BasisElement {
            name: format!("a{k}"),
            level: 0,
            kind: Kind::Noncrossing,
            edge: None,
            pairings: BTreeMap::new(),
        }));
        AdaptedBasis::new(els, g).unwrap()
    }

    fn cyc(b: &AdaptedBasis, coeffs: &[i64], lambda: &[i64]) -> Cycle {
        let mut c = Cycle::zero(b);
        for (k, &x) in coeffs.iter().enumerate() {
            c.basis[k] = Gq::int(x);
        }
        for (k, &x) in lambda.iter().enumerate() {
            c.lambda[k] = Gq::int(x);
        }
        c
    }

    #[test]
    fn single_row_class_and_obligation() {
        let g = loops(3);
        let b = basis(&g, 3, 1);
        let f = cyc(&b, &[2, -1, 3], &[]);
        let sys = EquationSystem::new(g, b, vec![f]);
        assert_eq!(sys.cross_equivalence_classes(), vec![vec![0, 1, 2]]);
        assert_eq!(sys.primitive_sets(12).unwrap(), vec![vec![0, 1, 2]]);
        let cert = sys.consistency_report(false);
        assert_eq!(cert.verdict, Verdict::ConsistentWithObligations);
        assert_eq!(cert.obligations, vec![vec!["e1".to_string(), "e2".into(), "e3".into()]]);
        assert_eq!(sys.consistency_report(true).verdict, Verdict::Consistent);
    }

    #[test]
    fn single_crossing_is_r1() {
        let g = loops(2);
        let b = basis(&g, 2, 1);
        let sys = EquationSystem::new(g, b.clone(), vec![cyc(&b, &[1, 0, 1], &[])]);
        let cert = sys.consistency_report(false);
        assert_eq!(cert.verdict, Verdict::Inconsistent);
        assert_eq!(cert.rule.as_deref(), Some("R1"));
    }

    #[test]
    fn pure_lambda_rows_determine_ratios() {
        let g = loops(2);
        let b = basis(&g, 2, 1);
        let rows = vec![cyc(&b, &[1, -1, 0], &[]), cyc(&b, &[], &[2, -3])];
        let sys = EquationSystem::new(g, b, rows);
        assert_eq!(sys.rref().pivots, vec![0, 3]);
        assert_eq!(sys.lambda_ratio(0, 1), Some(Gq::ratio(3, 2)));
        assert_eq!(sys.consistency_report(false).verdict, Verdict::Consistent);
    }

    #[test]
    fn decompose_splits_classes() {
        let g = loops(4);
        let b = basis(&g, 4, 1);
        let rows = vec![cyc(&b, &[1, -1, 0, 0, 0], &[]), cyc(&b, &[0, 0, 1, 1, 0], &[]), cyc(&b, &[0, 0, 0, 0, 1], &[])];
        let sys = EquationSystem::new(g, b.clone(), rows);
        let f = cyc(&b, &[2, -2, 3, 3, 5], &[]);
        let d = sys.decompose(&f).unwrap();
        assert_eq!(d.parts.len(), 2);
        let total = d.parts.iter().fold(d.remainder.clone(), |acc, p| acc.add(p));
        assert_eq!(total, f);
        assert!(sys.hor_support(&d.remainder).is_empty());
        let outside = cyc(&b, &[1, 0, 0, 0, 0], &[]);
        assert!(matches!(sys.decompose(&outside), Err(Error::NotInSpan(_))));
    }

    #[test]
    fn lost_count_under_full_degeneration() {
        let g = loops(2);
        let b = basis(&g, 2, 1);
        let rows = vec![cyc(&b, &[1, -1, 0], &[]), cyc(&b, &[], &[1, -1])];
        let sys = EquationSystem::new(g.clone(), b, rows);
        let full = Undegeneration::identity(&g);
        assert_eq!(sys.lost_count(&full), 1);
        let c = sys.classify_undegeneration(&full);
        assert_eq!(c.codim, 3);
        assert!(c.divisorial);
        assert_eq!(c.branch, Some(Branch::Horizontal));
    }

    #[test]
    fn inconsistent_ratios_are_flagged() {
        let g = loops(2);
        let b = basis(&g, 2, 0);
        let sys = EquationSystem::new(g, b, vec![]).with_ratios(vec![
            Ratio { e: "e1".into(), e_prime: "e2".into(), q: Gq::int(2) },
            Ratio { e: "e2".into(), e_prime: "e1".into(), q: Gq::int(2) },
        ]);
        assert!(!sys.validate_system().is_empty());
    }
}
