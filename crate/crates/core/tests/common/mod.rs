#![allow(dead_code)]

use quasifold::atlas::Atlas;
use quasifold::document::{gallery, Loaded, Overrides};
use quasifold::field::{Domain, Scalar};
use quasifold::linalg::Mat;
use quasifold::num_rational::BigRational;
use quasifold::triple::{Fan, FundamentalTriple, Quasilattice, DEFAULT_WITNESS_BOX};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn load(name: &str) -> Loaded {
    gallery::load(name).unwrap().build(&Overrides::default()).unwrap()
}

pub fn compile(l: &Loaded) -> Atlas {
    Atlas::compile(&l.triple).unwrap()
}

pub fn scalars(d: &Domain, rows: &[&[&str]]) -> Vec<Vec<Scalar>> {
    rows.iter().map(|r| r.iter().map(|s| d.parse(s).unwrap()).collect()).collect()
}

pub fn rows(m: &Mat) -> Vec<Vec<Scalar>> {
    (0..m.rows()).map(|i| m.row(i)).collect()
}

pub fn rational(s: &str) -> BigRational {
    quasifold::field::parse_decimal(s).unwrap()
}

/// A random triple over Q: a rational quasilattice with n+1 generators, rays
/// given as small integer combinations, and random invertible cones
/// covering every ray.
pub fn random_rational_triple(rng: &mut ChaCha8Rng) -> FundamentalTriple {
    let d = Domain::rational();
    loop {
        let n = rng.random_range(2..=3usize);
        let k = n + 1;
        let gens: Vec<Vec<Scalar>> = (0..k)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        d.from_rational(BigRational::new(
                            rng.random_range(-4i64..=4).into(),
                            rng.random_range(1i64..=3).into(),
                        ))
                    })
                    .collect()
            })
            .collect();
        let lattice = Quasilattice::from_vectors(&d, n, &gens).unwrap();
        if lattice.generators().rank() < n {
            continue;
        }
        let rays_count = n + rng.random_range(1..=3usize);
        let witnesses: Vec<Vec<i64>> =
            (0..rays_count).map(|_| (0..k).map(|_| rng.random_range(-2i64..=2)).collect()).collect();
        let rays: Vec<Vec<Scalar>> = witnesses.iter().map(|m| lattice.combine(m).unwrap()).collect();
        let mut cones: Vec<Vec<usize>> = Vec::new();
        for _ in 0..200 {
            let mut cone: Vec<usize> = Vec::new();
            while cone.len() < n {
                let j = rng.random_range(1..=rays_count);
                if !cone.contains(&j) {
                    cone.push(j);
                }
            }
            cone.sort_unstable();
            let cols: Vec<Vec<Scalar>> = cone.iter().map(|&j| rays[j - 1].clone()).collect();
            if cones.contains(&cone) || Mat::from_columns(&d, n, &cols).unwrap().rank() < n {
                continue;
            }
            cones.push(cone);
            let covered = (1..=rays_count).all(|j| cones.iter().any(|c| c.contains(&j)));
            if covered && cones.len() >= 3 {
                break;
            }
        }
        if !(1..=rays_count).all(|j| cones.iter().any(|c| c.contains(&j))) {
            continue;
        }
        let fan = Fan::new(n, rays, cones).unwrap();
        let witnesses = witnesses.into_iter().map(Some).collect();
        return FundamentalTriple::new(fan, lattice, witnesses, DEFAULT_WITNESS_BOX).unwrap();
    }
}
