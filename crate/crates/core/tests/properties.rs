use mukai_core::enumerate::{enumerate_fiber, FiberProblem};
use mukai_core::group_action::{frameshape_of, Isometry, DEFAULT_GROUP_CAP};
use mukai_core::linalg::{self, Matrix, Rational};
use mukai_core::problem::{self, ProblemFile};
use mukai_core::stability::{self, CentralCharge, ComplexQ, SplittingMode};
use mukai_core::{GroupAction, Lattice, LatticeVector, QSeries};
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{RngAlgorithm, RngSeed};

fn small_vec(n: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-6i64..=6, n)
}

fn symmetric(n: usize) -> impl Strategy<Value = Lattice> {
    proptest::collection::vec(-4i64..=4, n * n).prop_map(move |e| {
        let mut g = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in i..n {
                g[i][j] = e[i * n + j];
                g[j][i] = e[i * n + j];
            }
        }
        Lattice::from_i64(&g).unwrap()
    })
}

fn signed_permutation(n: usize) -> impl Strategy<Value = Matrix> {
    (Just((0..n).collect::<Vec<_>>()).prop_shuffle(), proptest::collection::vec(prop::bool::ANY, n)).prop_map(move |(p, s)| {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(p[i], i)] = BigInt::from(if s[i] { 1 } else { -1 });
        }
        m
    })
}

fn lv(v: &[i64]) -> LatticeVector {
    LatticeVector::from_i64(v)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, rng_algorithm: RngAlgorithm::ChaCha, rng_seed: RngSeed::Fixed(0x6d75_6b61_69), ..ProptestConfig::default() })]

    #[test]
    fn pairing_is_symmetric_and_bilinear(l in symmetric(4), a in small_vec(4), b in small_vec(4), c in small_vec(4), k in -5i64..=5) {
        let (a, b, c) = (lv(&a), lv(&b), lv(&c));
        prop_assert_eq!(l.pair(&a, &b).unwrap(), l.pair(&b, &a).unwrap());
        let lhs = l.pair(&a.scale(&BigInt::from(k)).add(&b), &c).unwrap();
        let rhs = BigInt::from(k) * l.pair(&a, &c).unwrap() + l.pair(&b, &c).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn rescaling_scales_the_form(l in symmetric(3), a in small_vec(3), b in small_vec(3), k in prop_oneof![-4i64..=-1, 1i64..=4]) {
        let (a, b) = (lv(&a), lv(&b));
        let r = l.rescale(k).unwrap();
        prop_assert_eq!(r.pair(&a, &b).unwrap(), BigInt::from(k) * l.pair(&a, &b).unwrap());
    }

    #[test]
    fn divisibility_divides_every_pairing(a in small_vec(5)) {
        prop_assume!(a.iter().any(|x| *x != 0));
        let l = Lattice::hyperbolic_plane().orthogonal_sum(&Lattice::diagonal(&[2, -2, -6]));
        let v = lv(&a);
        let d = l.divisibility(&v).unwrap();
        for i in 0..5 {
            let p = l.pair(&v, &LatticeVector::unit(5, i)).unwrap();
            prop_assert!((p % &d).is_zero());
        }
    }

    #[test]
    fn saturation_is_idempotent_and_contains(rows in proptest::collection::vec(small_vec(4), 1..=3)) {
        let l = Lattice::diagonal(&[1, 1, -1, -1]);
        let m = Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect(), 4).unwrap();
        prop_assume!(linalg::rank(&m) > 0);
        let s = l.sublattice(m.clone()).unwrap();
        let sat = s.saturate();
        prop_assert!(sat.is_saturated());
        let twice = sat.saturate();
        prop_assert_eq!(twice.basis(), sat.basis());
        for r in 0..m.rows() {
            prop_assert!(sat.contains(&LatticeVector(m.row(r).to_vec())).unwrap());
        }
        prop_assert!(sat.same_rational_span(&s));
    }

    #[test]
    fn kernel_rows_are_annihilated(rows in proptest::collection::vec(small_vec(5), 1..=3)) {
        let a = Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect(), 5).unwrap();
        let k = linalg::kernel_basis(&a);
        prop_assert_eq!(k.rows() + linalg::rank(&a), 5);
        for i in 0..k.rows() {
            prop_assert!(a.mul_vec(k.row(i)).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn frameshape_is_a_conjugation_invariant(g in signed_permutation(6), h in signed_permutation(6)) {
        let l = Lattice::diagonal(&[-2; 6]);
        let g = Isometry::checked(l.clone(), g).unwrap();
        let h = Isometry::checked(l, h).unwrap();
        let f1 = frameshape_of(&g, DEFAULT_GROUP_CAP).unwrap();
        let f2 = frameshape_of(&g.conjugate_by(&h).unwrap(), DEFAULT_GROUP_CAP).unwrap();
        prop_assert_eq!(f1.degree(), 6);
        prop_assert_eq!(f1, f2);
    }

    #[test]
    fn series_product_is_associative_and_commutative(
        a in proptest::collection::vec(-9i64..=9, 1..12),
        b in proptest::collection::vec(-9i64..=9, 1..12),
        c in proptest::collection::vec(-9i64..=9, 1..12),
        oa in -48i64..=48, ob in -48i64..=48,
    ) {
        let (a, b, c) = (QSeries::from_i64(oa, &a), QSeries::from_i64(ob, &b), QSeries::from_i64(0, &c));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn genericity_ignores_rotation_and_scaling(
        re in small_vec(4), im in small_vec(4), v in small_vec(4),
        s in (-4i64..=4, -4i64..=4).prop_filter("nonzero", |(a, b)| *a != 0 || *b != 0),
    ) {
        let l = Lattice::diagonal(&[2, 2, -2, -2]);
        let q = |x: &[i64]| x.iter().map(|&t| Rational::from_integer(t.into())).collect::<Vec<_>>();
        let z = CentralCharge::new(l.clone(), q(&re), q(&im)).unwrap();
        let v = lv(&v);
        prop_assume!(stability::spans_positive_plane(&z));
        prop_assume!(!v.is_zero() && l.is_primitive(&v).unwrap());
        prop_assume!(!stability::evaluate(&z, &v).unwrap().is_zero());
        let g = GroupAction::trivial(&l);
        let w = z.rotate(&ComplexQ::from_i64(s.0, s.1)).unwrap();
        for mode in [SplittingMode::Effective, SplittingMode::AllClasses] {
            let a = stability::is_g_sigma_generic(&z, &v, &g, mode).unwrap();
            let b = stability::is_g_sigma_generic(&w, &v, &g, mode).unwrap();
            prop_assert_eq!(a.generic, b.generic);
        }
    }

    #[test]
    fn fiber_members_satisfy_the_problem(target in -4i64..=4, min in -12i64..=-2) {
        let l = Lattice::e8().rescale(-1).unwrap().orthogonal_sum(&Lattice::diagonal(&[-2]));
        let map = Matrix::from_i64(&[vec![1, 0, 0, 0, 0, 0, 0, 0, 1]]);
        let p = FiberProblem::new(l.clone(), map, lv(&[target]), min).unwrap();
        let res = enumerate_fiber(&p).unwrap();
        prop_assert!(res.exhaustive);
        prop_assert!(res.vectors.windows(2).all(|w| w[0] < w[1]));
        for v in &res.vectors {
            prop_assert!(p.admits(v).unwrap());
        }
    }

    #[test]
    fn generated_problem_files_round_trip(entries in proptest::collection::vec(-(1i64 << 40)..(1i64 << 40), 3), big in 60u32..90) {
        let huge = BigInt::from(3).pow(big);
        let text = format!(
            r#"{{"version":"1","lattices":{{"A":{{"gram":[[{a},{b}],[{b},"{huge}"]],"names":["x","y"]}},"B":{{"diagonal":[{c},-2]}}}},
               "tasks":[{{"kind":"euler","frameshape":"1^24","terms":5}}]}}"#,
            a = entries[0], b = entries[1], c = entries[2]
        );
        let p = ProblemFile::from_json(&text).unwrap();
        let again = ProblemFile::from_json(&p.to_json().unwrap()).unwrap();
        prop_assert_eq!(&p, &again);
        prop_assert_eq!(p.to_json().unwrap(), again.to_json().unwrap());
    }
}

#[test]
fn shipped_fixtures_round_trip() {
    for name in problem::fixture_names() {
        let p = problem::load_fixture(name).unwrap();
        let text = p.to_json().unwrap();
        let q = ProblemFile::from_json(&text).unwrap();
        assert_eq!(p, q, "{name}");
        assert_eq!(text, q.to_json().unwrap(), "{name}");
    }
}
