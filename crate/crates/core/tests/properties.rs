mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use strata::cli::Document;
use strata::deformation::ShearStretch;
use strata::linalg::{self, Matrix};
use strata::{Cycle, Gq};

fn gq() -> impl Strategy<Value = Gq> {
    (-20i64..=20, 1i64..=9, -20i64..=20, 1i64..=9).prop_map(|(a, b, c, d)| Gq::complex((a, b), (c, d)))
}

fn real() -> impl Strategy<Value = num_rational::BigRational> {
    (-30i64..=30, 1i64..=7).prop_map(|(n, d)| q(n, d))
}

fn positive() -> impl Strategy<Value = num_rational::BigRational> {
    (1i64..=30, 1i64..=7).prop_map(|(n, d)| q(n, d))
}

fn int_matrix() -> impl Strategy<Value = (usize, Matrix)> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(-3i64..=3, c), r)
            .prop_map(move |m| (c, linalg::from_ints(&m)))
    })
}

proptest! {
    #![proptest_config(proptest_config(256))]

    #[test]
    fn field_laws(a in gq(), b in gq(), c in gq()) {
        prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
        prop_assert_eq!(a.clone() * b.clone(), b.clone() * a.clone());
        prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
        prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!(a.clone() - a.clone(), Gq::zero());
        if !a.is_zero() {
            prop_assert!((a.clone() * a.inv()).is_one());
        }
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_eq!(Gq::real(a.norm()), a.clone() * a.conj());
    }

    #[test]
    fn text_round_trip(a in gq()) {
        prop_assert_eq!(a.to_string().parse::<Gq>().unwrap(), a.clone());
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<Gq>(&json).unwrap(), a);
    }

    #[test]
    fn nullspace_annihilates((cols, m) in int_matrix()) {
        let null = linalg::nullspace(&m, cols);
        for v in &null {
            prop_assert!(linalg::is_zero(&linalg::mat_vec(&m, v)));
        }
        prop_assert_eq!(linalg::rank(&m) + null.len(), cols);
        prop_assert_eq!(linalg::rank(&null), null.len());
    }

    #[test]
    fn left_kernel_annihilates((cols, m) in int_matrix()) {
        for y in linalg::left_kernel(&m, cols) {
            prop_assert!(linalg::is_zero(&linalg::combine(&y, &m, cols)));
        }
    }

    #[test]
    fn shear_stretch_group_law(z in gq(), r1 in positive(), s1 in real(), r2 in positive(), s2 in real()) {
        let a = ShearStretch::new(r1, s1).unwrap();
        let b = ShearStretch::new(r2, s2).unwrap();
        prop_assert_eq!(b.apply(&a.apply(&z)), a.then(&b).apply(&z));
        let id = ShearStretch::new(q(1, 1), q(0, 1)).unwrap();
        prop_assert_eq!(id.apply(&z), z.clone());
        // Real parts of heights stay fixed when the imaginary part vanishes.
        let x = Gq::real(z.re.clone());
        prop_assert_eq!(a.apply(&x), x);
    }
}

proptest! {
    #![proptest_config(proptest_config(64))]

    #[test]
    fn monodromy_is_additive(s in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let sys = random_level_system(&mut rng);
        let k = sys.basis.len();
        let width = sys.basis.width();
        let draw = |rng: &mut ChaCha8Rng| {
            Cycle::from_vec(&(0..width).map(|_| small(rng)).collect::<Vec<_>>(), k)
        };
        let (f, g) = (draw(&mut rng), draw(&mut rng));
        for p in sys.graph.passages() {
            let t = sys.monodromy_twists(p).unwrap();
            let lhs = f.add(&g).picard_lefschetz(&sys.basis, &t);
            let rhs = f.picard_lefschetz(&sys.basis, &t).add(&g.picard_lefschetz(&sys.basis, &t));
            prop_assert_eq!(lhs, rhs);
            let moved = f.picard_lefschetz(&sys.basis, &t).sub(&f);
            prop_assert!(linalg::is_zero(&moved.basis));
        }
    }

    #[test]
    fn undegeneration_targets_validate(s in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let (graph, _) = random_level_graph(&mut rng);
        for u in graph.undegenerations() {
            let t = u.target(&graph);
            prop_assert!(t.validate().is_empty(), "{:?}", t.validate());
            prop_assert_eq!(t.codim(), u.codim());
        }
    }

    #[test]
    fn classes_partition_horizontal_edges(s in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let sys = random_flat_system(&mut rng);
        let mut all: Vec<usize> = sys.cross_equivalence_classes().concat();
        all.sort_unstable();
        prop_assert_eq!(all, sys.horizontal());
    }

    #[test]
    fn decomposition_sums_to_input(s in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let sys = random_level_system(&mut rng);
        let x: Vec<Gq> = (0..sys.equations.len()).map(|_| small(&mut rng)).collect();
        let f = sys.combine(&x);
        let d = match sys.decompose(&f) {
            Ok(d) => d,
            Err(e) => {
                prop_assert!(matches!(e, strata::Error::Infeasible(_)), "{e}");
                return Ok(());
            }
        };
        let total = d.parts.iter().fold(d.remainder.clone(), |acc, h| acc.add(h));
        prop_assert_eq!(total, f);
        prop_assert!(sys.hor_support(&d.remainder).is_empty());
    }
}

#[test]
fn documents_round_trip() {
    for name in FIXTURES {
        let doc = Document::parse(&fixture_text(name)).unwrap();
        let again = Document::parse(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(doc, again, "{name}");
    }
}
