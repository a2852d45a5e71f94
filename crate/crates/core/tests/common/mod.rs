#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use strata::cli::{load, Document, Loaded};
use strata::homology::{BasisElement, Kind};
use strata::level_graph::{Edge, EnhancedLevelGraph, Marking, Vertex};
use strata::linalg::{self, Matrix, Vector};
use strata::{AdaptedBasis, Cycle, EquationSystem, Gq};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

pub fn seed() -> u64 {
    std::env::var("STRATA_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED)
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed());
    r.set_stream(stream);
    r
}

pub fn proptest_config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(seed()),
        failure_persistence: None,
        ..Default::default()
    }
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture exists")
}

pub fn fixture(name: &str) -> Loaded {
    let doc = Document::parse(&fixture_text(name)).expect("fixture parses");
    load(&doc).unwrap_or_else(|v| panic!("fixture {name} invalid: {v:?}"))
}

pub const FIXTURES: [&str; 7] = [
    "cusp",
    "double_cover",
    "intro_two_level",
    "minimal_four_nodes",
    "no_pairwise_local",
    "three_horizontal_nodes",
    "worked_plumbing",
];

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn small(rng: &mut ChaCha8Rng) -> Gq {
    Gq::int(rng.gen_range(-2..=2))
}

pub fn vertex(id: &str, genus: u32, level: i32) -> Vertex {
    Vertex { id: id.into(), genus, level }
}

pub fn edge(id: &str, a: &str, b: &str, top: Option<&str>, kappa: Option<u32>) -> Edge {
    Edge { id: id.into(), ends: [a.into(), b.into()], top: top.map(Into::into), kappa }
}

pub fn element(name: &str, level: i32, edge: Option<&str>, pairings: &[(&str, i64)]) -> BasisElement {
    let mut p: BTreeMap<String, i64> = pairings.iter().map(|(e, x)| (e.to_string(), *x)).collect();
    if let Some(e) = edge {
        p.insert(e.to_string(), 1);
    }
    BasisElement {
        name: name.into(),
        level,
        kind: if edge.is_some() { Kind::Crossing } else { Kind::Noncrossing },
        edge: edge.map(Into::into),
        pairings: p,
    }
}

/// Adds one marking per vertex so that every vertex is order-balanced,
/// raising genera until each marking order is positive.
pub fn balance(vertices: &mut [Vertex], edges: &[Edge]) -> Vec<Marking> {
    let mut out = Vec::new();
    for v in vertices.iter_mut() {
        let mut ends = 0i64;
        for e in edges {
            let n_ends = e.ends.iter().filter(|x| **x == v.id).count() as i64;
            if n_ends == 0 {
                continue;
            }
            match e.kappa {
                None => ends -= n_ends,
                Some(k) => {
                    let k = k as i64;
                    ends += if e.top.as_deref() == Some(v.id.as_str()) { k - 1 } else { -k - 1 };
                }
            }
        }
        while 2 * v.genus as i64 - 2 - ends < 1 {
            v.genus += 1;
        }
        out.push(Marking { vertex: v.id.clone(), order: 2 * v.genus as i64 - 2 - ends });
    }
    out
}

pub fn system(graph: EnhancedLevelGraph, elements: Vec<BasisElement>, rows: &[Vector]) -> EquationSystem {
    assert!(graph.validate().is_empty(), "{:?}", graph.validate());
    let basis = AdaptedBasis::new(elements, &graph).expect("basis resolves");
    assert!(basis.validate_adapted(&graph).is_empty(), "{:?}", basis.validate_adapted(&graph));
    let k = basis.len();
    let eqs = rows.iter().map(|r| Cycle::from_vec(r, k)).collect();
    EquationSystem::new(graph, basis, eqs)
}

/// One vertex of genus 1 with `h` horizontal loops, crossing curves
/// `d1..dh` and `extra` noncrossing elements.
pub fn loops_graph(h: usize, extra: usize) -> (EnhancedLevelGraph, Vec<BasisElement>) {
    let edges: Vec<Edge> = (1..=h).map(|k| edge(&format!("e{k}"), "v", "v", None, None)).collect();
    let mut vertices = vec![vertex("v", 1, 0)];
    let markings = balance(&mut vertices, &edges);
    let graph = EnhancedLevelGraph { vertices, edges, markings };
    let mut els: Vec<BasisElement> = (1..=h).map(|k| element(&format!("d{k}"), 0, Some(&format!("e{k}")), &[])).collect();
    els.extend((1..=extra).map(|k| element(&format!("n{k}"), 0, None, &[])));
    (graph, els)
}

/// A random single-level system on `h` loops with coefficients in
/// `{-2..2}`.
pub fn random_flat_system(rng: &mut ChaCha8Rng) -> EquationSystem {
    let h = rng.gen_range(1..=4);
    let (graph, els) = loops_graph(h, 2);
    let width = els.len() + h;
    let n_rows = rng.gen_range(1..=6);
    let rows: Vec<Vector> = (0..n_rows).map(|_| (0..width).map(|_| small(rng)).collect()).collect();
    system(graph, els, &rows)
}

/// A random multi-level graph: one vertex per level joined in a chain by
/// vertical edges, up to two horizontal loops per level, and sometimes a
/// long vertical edge.
pub fn random_level_graph(rng: &mut ChaCha8Rng) -> (EnhancedLevelGraph, Vec<BasisElement>) {
    let depth = rng.gen_range(0..=2usize);
    let mut vertices: Vec<Vertex> = (0..=depth).map(|i| vertex(&format!("v{i}"), 0, -(i as i32))).collect();
    let mut edges = Vec::new();
    let mut loops: Vec<Vec<String>> = vec![Vec::new(); depth + 1];
    for i in 0..=depth {
        for k in 1..=rng.gen_range(0..=2) {
            let id = format!("h{i}x{k}");
            edges.push(edge(&id, &format!("v{i}"), &format!("v{i}"), None, None));
            loops[i].push(id);
        }
    }
    for i in 1..=depth {
        let top = format!("v{}", i - 1);
        edges.push(edge(&format!("t{i}"), &top, &format!("v{i}"), Some(&top), Some(rng.gen_range(1..=3))));
    }
    if depth == 2 && rng.gen_bool(0.5) {
        edges.push(edge("t9", "v0", "v2", Some("v0"), Some(rng.gen_range(1..=3))));
    }
    let markings = balance(&mut vertices, &edges);
    let vertical: Vec<String> = edges.iter().filter(|e| e.kappa.is_some()).map(|e| e.id.clone()).collect();
    let mut els = Vec::new();
    for i in 0..=depth {
        let level = -(i as i32);
        for (k, id) in loops[i].iter().enumerate() {
            els.push(element(&format!("c{i}x{}", k + 1), level, Some(id), &[]));
        }
        for k in 1..=rng.gen_range(1..=2) {
            let pairings: Vec<(&str, i64)> =
                vertical.iter().map(|e| (e.as_str(), rng.gen_range(-1..=1))).filter(|(_, x)| *x != 0).collect();
            els.push(element(&format!("n{i}x{k}"), level, None, &pairings));
        }
    }
    (EnhancedLevelGraph { vertices, edges, markings }, els)
}

pub fn random_level_system(rng: &mut ChaCha8Rng) -> EquationSystem {
    let (graph, els) = random_level_graph(rng);
    let width = els.len() + graph.edges.len();
    let n_rows = rng.gen_range(1..=4);
    let rows: Vec<Vector> = (0..n_rows)
        .map(|_| (0..width).map(|_| if rng.gen_bool(0.5) { small(rng) } else { Gq::zero() }).collect())
        .collect();
    system(graph, els, &rows)
}

/// `⟨F, λ_e⟩` read straight from the declared pairings.
pub fn pairing(sys: &EquationSystem, f: &Cycle, edge: &str) -> Gq {
    sys.basis
        .elements
        .iter()
        .zip(&f.basis)
        .map(|(el, c)| c * &Gq::int(el.pairings.get(edge).copied().unwrap_or(0)))
        .sum()
}

/// Pairings of a span basis with the horizontal edges: one column per edge.
pub fn crossing_columns(sys: &EquationSystem, rows: &[Cycle]) -> Vec<Vector> {
    sys.graph
        .horizontal_edges()
        .iter()
        .map(|e| rows.iter().map(|r| pairing(sys, r, e)).collect())
        .collect()
}

/// Subsets `S` of the horizontal edges (as bitmasks) for which some span
/// element crosses exactly `S`: the complement must be a flat of the
/// column matroid.
pub fn realizable_supports(sys: &EquationSystem) -> Vec<u32> {
    let rows = sys.rows().to_vec();
    let cols = crossing_columns(sys, &rows);
    let n = cols.len();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let outside: Matrix = (0..n).filter(|k| mask & (1 << k) == 0).map(|k| cols[k].clone()).collect();
        let ok = (0..n).filter(|k| mask & (1 << k) != 0).all(|k| {
            let mut ext = outside.clone();
            ext.push(cols[k].clone());
            linalg::rank(&ext) > linalg::rank(&outside)
        });
        if ok {
            out.push(mask);
        }
    }
    out
}

pub fn minimal_masks(masks: &[u32]) -> Vec<u32> {
    masks.iter().copied().filter(|&m| !masks.iter().any(|&o| o != m && o & m == o)).collect()
}

/// Classes of horizontal edge names generated by the minimal supports,
/// with every horizontal edge present.
pub fn closure_classes(n_edges: usize, primitive: &[u32], names: &[String]) -> BTreeSet<Vec<String>> {
    let mut comp: Vec<usize> = (0..n_edges).collect();
    fn root(c: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while c[x] != x {
            x = c[x];
        }
        x
    }
    for &m in primitive {
        let members: Vec<usize> = (0..n_edges).filter(|k| m & (1 << k) != 0).collect();
        for w in members.windows(2) {
            let (a, b) = (root(&mut comp, w[0]), root(&mut comp, w[1]));
            comp[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for k in 0..n_edges {
        let r = root(&mut comp, k);
        groups.entry(r).or_default().push(names[k].clone());
    }
    groups.into_values().collect()
}

pub fn int_lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    a / gcd(a, b) * b
}

/// Rank of a list of vectors, computed with fraction-free elimination on
/// scaled copies (independent of the library's reduction order).
pub fn rank_of(vs: &[Vector]) -> usize {
    let mut m: Matrix = vs.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in (0..cols).rev() {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let a = m[r][c].clone();
                let b = m[i][c].clone();
                m[i] = m[i].iter().zip(&m[r]).map(|(x, y)| &(x * &a) - &(y * &b)).collect();
            }
        }
        r += 1;
    }
    r
}

/// Basis of `span(a) ∩ span(b)` by the Zassenhaus construction.
pub fn zassenhaus(a: &[Vector], b: &[Vector], n: usize) -> Matrix {
    let mut m: Matrix = a.iter().map(|v| v.iter().chain(v.iter()).cloned().collect()).collect();
    m.extend(b.iter().map(|v| v.iter().cloned().chain(linalg::zeros(n)).collect()));
    let piv = linalg::rref(&mut m);
    m.into_iter().zip(piv).filter(|(_, p)| *p >= n).map(|(r, _)| r[n..].to_vec()).collect()
}
