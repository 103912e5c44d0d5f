mod common;

use common::random_rational_triple;
use proptest::prelude::*;
use quasifold::atlas::{relations, transition_map, Atlas};
use quasifold::field::{Domain, Scalar};
use quasifold::linalg::Mat;
use quasifold::num_rational::BigRational;
use quasifold::polytope::{Facet, Polytope, SampleConfig};
use quasifold::triple::{ProbeConfig, Quasilattice};
use quasifold::verify::{verify_all, NumericAtlas, TrialConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

fn q(p: i64, r: i64) -> Scalar {
    Domain::rational().from_rational(BigRational::new(p.into(), r.into()))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn random_triples_satisfy_the_cocycle_identities(seed in any::<u64>()) {
        let t = random_rational_triple(&mut ChaCha8Rng::seed_from_u64(seed));
        let atlas = Atlas::compile(&t).unwrap();
        let summary = atlas.cocycle_check();
        prop_assert!(summary.passed(), "{:?}", summary.violations);
        let m = t.fan().max_cones().len();
        prop_assert_eq!(summary.pairs_checked, m * (m - 1));
    }

    #[test]
    fn transitions_compose_to_inverse_pairs(seed in any::<u64>()) {
        let t = random_rational_triple(&mut ChaCha8Rng::seed_from_u64(seed));
        let cones = t.fan().max_cones();
        let (a, b) = (&cones[0], &cones[1]);
        let forward = transition_map(&t, a, b).unwrap().exponents;
        let back = transition_map(&t, b, a).unwrap().exponents;
        prop_assert!(back.matmul(&forward).unwrap().is_identity());
        prop_assert!(forward.matmul(&back).unwrap().is_identity());
    }

    #[test]
    fn relations_lie_in_the_kernel(seed in any::<u64>()) {
        let t = random_rational_triple(&mut ChaCha8Rng::seed_from_u64(seed));
        let pi = t.pi();
        for cone in t.fan().max_cones() {
            let set = relations(&t, cone).unwrap();
            prop_assert_eq!(set.relations.len(), t.ray_count() - t.dim());
            for v in &set.kernel_vectors {
                prop_assert!(pi.mul_vec(v).unwrap().iter().all(Scalar::is_zero));
            }
            // X_j reassembled from the cone's rays.
            for r in &set.relations {
                let a = t.cone_matrix(cone).unwrap();
                prop_assert_eq!(a.mul_vec(&r.coefficients).unwrap(), t.fan().ray(r.index).to_vec());
            }
        }
    }

    #[test]
    fn fixed_points_vanish_exactly_on_the_cone(seed in any::<u64>()) {
        let t = random_rational_triple(&mut ChaCha8Rng::seed_from_u64(seed));
        for c in Atlas::compile(&t).unwrap().charts {
            for (j, &z) in c.fixed_point.iter().enumerate() {
                prop_assert_eq!(z == 0, c.cone.contains(&(j + 1)));
            }
        }
    }

    #[test]
    fn gamma_is_reduced_and_consistent(seed in any::<u64>()) {
        let t = random_rational_triple(&mut ChaCha8Rng::seed_from_u64(seed));
        let g = t.lattice().generators();
        for c in Atlas::compile(&t).unwrap().charts {
            // A_σ⁻¹ Y_l = reduced part + integer part, with integer columns zeroed.
            let full = c.a_inv.matmul(g).unwrap();
            for l in 0..g.cols() {
                let integer_col: Vec<i64> = c.gamma_integer_parts.iter().map(|row| row[l]).collect();
                for (i, &k) in integer_col.iter().enumerate() {
                    let rebuilt = c.gamma_exponents.get(i, l) + &t.domain().from_integer(k);
                    prop_assert_eq!(&rebuilt, full.get(i, l));
                }
                let col = c.gamma_exponents.column(l);
                prop_assert!(col.iter().all(Scalar::is_zero) || col.iter().any(|x| !x.is_integer()));
            }
        }
    }

    #[test]
    fn validation_is_deterministic(seed in any::<u64>()) {
        let t = random_rational_triple(&mut ChaCha8Rng::seed_from_u64(seed));
        let probe = ProbeConfig { samples: 32, ..ProbeConfig::default() };
        let first = t.validate(&probe);
        prop_assert_eq!(&first, &t.validate(&probe));
        prop_assert!(first.check("simpliciality").unwrap().passed);
        prop_assert!(first.check("quasirationality").unwrap().passed);
    }

    #[test]
    fn random_triples_verify(seed in any::<u64>()) {
        let t = random_rational_triple(&mut ChaCha8Rng::seed_from_u64(seed));
        let atlas = Atlas::compile(&t).unwrap();
        let na = NumericAtlas::new(&t, &atlas, None).unwrap();
        let cfg = TrialConfig { samples: 8, seed, ..TrialConfig::default() };
        let summary = verify_all(&na, &cfg);
        prop_assert!(summary.passed(), "{:?}", summary);
        prop_assert_eq!(&summary, &verify_all(&na, &cfg));
    }

    #[test]
    fn invert_succeeds_iff_full_rank(entries in proptest::collection::vec(-3i64..=3, 9)) {
        let d = Domain::rational();
        let m = Mat::new(&d, 3, 3, entries.iter().map(|&x| d.from_integer(x)).collect()).unwrap();
        match m.invert() {
            Ok(inv) => {
                prop_assert_eq!(m.rank(), 3);
                prop_assert!(m.matmul(&inv).unwrap().is_identity());
            }
            Err(_) => prop_assert!(m.rank() < 3),
        }
    }

    #[test]
    fn boxes_have_saturated_vertices(widths in proptest::collection::vec((1i64..=5, 1i64..=4), 2..=3)) {
        // [0, w_i] for each axis: normals ±e_i, offsets 0 and -w_i.
        let d = Domain::rational();
        let n = widths.len();
        let mut facets = Vec::new();
        for (i, &(p, r)) in widths.iter().enumerate() {
            let axis = |s: i64| (0..n).map(|k| d.from_integer(if k == i { s } else { 0 })).collect::<Vec<_>>();
            facets.push(Facet { normal: axis(1), offset: d.zero() });
            facets.push(Facet { normal: axis(-1), offset: &d.zero() - &q(p, r) });
        }
        let poly = Polytope::new(&d, n, facets.clone(), &SampleConfig::default()).unwrap();
        prop_assert_eq!(poly.vertices().len(), 1 << n);
        let fan = poly.normal_fan().unwrap();
        prop_assert_eq!(fan.max_cones().len(), poly.vertices().len());
        for v in poly.vertices() {
            prop_assert_eq!(v.facets.len(), n);
            for (j, f) in facets.iter().enumerate() {
                let value = f.normal.iter().zip(&v.coordinates).fold(d.zero(), |acc, (x, y)| &acc + &(x * y));
                prop_assert_eq!(value == f.offset, v.facets.contains(&(j + 1)));
            }
        }
        let offsets: Vec<Scalar> = facets.iter().map(|f| f.offset.clone()).collect();
        prop_assert_eq!(poly.derived_offsets(&SampleConfig::default()).unwrap(), offsets);
        // Any lattice containing the normals gives a valid triple.
        let lattice = Quasilattice::new(Mat::identity(&d, n)).unwrap();
        let t = poly.to_triple(lattice, vec![None; 2 * n], 2).unwrap();
        let probe = ProbeConfig { samples: 32, ..ProbeConfig::default() };
        prop_assert!(t.validate(&probe).passed());
    }

    #[test]
    fn simplices_have_one_cone_per_vertex(scale in 1i64..=6, n in 2usize..=3) {
        // {x_i >= 0, Σ x_i <= scale}.
        let d = Domain::rational();
        let mut facets: Vec<Facet> = (0..n)
            .map(|i| Facet { normal: (0..n).map(|k| d.from_integer((k == i) as i64)).collect(), offset: d.zero() })
            .collect();
        facets.push(Facet { normal: vec![d.from_integer(-1); n], offset: d.from_integer(-scale) });
        let poly = Polytope::new(&d, n, facets, &SampleConfig::default()).unwrap();
        prop_assert_eq!(poly.vertices().len(), n + 1);
        prop_assert_eq!(poly.normal_fan().unwrap().max_cones().len(), n + 1);
    }
}
