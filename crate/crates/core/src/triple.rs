//! Fundamental triples: a simplicial fan, a quasilattice and ray generators
//! with integer witnesses.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Domain, FieldError, Scalar};
use crate::linalg::{LinalgError, Mat};

/// Default half-width of the integer search box for witness recovery.
pub const DEFAULT_WITNESS_BOX: i64 = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TripleError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("malformed triple: {0}")]
    Structure(String),
    #[error("cone {cone} is not simplicial: its rays are linearly dependent")]
    NotSimplicial { cone: String },
    #[error("witness for ray X{ray} does not reproduce it")]
    WitnessMismatch { ray: usize },
    #[error("no integer witness found for ray X{ray} in the box [-{bound}, {bound}]; rational solutions: {solutions}")]
    NoWitness { ray: usize, bound: i64, solutions: String },
    #[error("{0} is not a maximal cone")]
    UnknownCone(String),
}

/// Formats a 1-based index set as `{1,2,3}`.
pub fn cone_label(cone: &[usize]) -> String {
    let parts: Vec<String> = cone.iter().map(usize::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

/// The ℤ-span of the columns of an n×k generator matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Quasilattice {
    generators: Mat,
}

impl Quasilattice {
    pub fn new(generators: Mat) -> Result<Quasilattice, TripleError> {
        let (n, k) = (generators.rows(), generators.cols());
        if n == 0 || k < n {
            return Err(TripleError::Structure(format!("quasilattice needs at least n = {n} generators, got {k}")));
        }
        Ok(Quasilattice { generators })
    }

    pub fn from_vectors(domain: &Domain, dim: usize, vectors: &[Vec<Scalar>]) -> Result<Quasilattice, TripleError> {
        Quasilattice::new(Mat::from_columns(domain, dim, vectors)?)
    }

    pub fn domain(&self) -> &Domain {
        self.generators.domain()
    }

    pub fn generators(&self) -> &Mat {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.generators.rows()
    }

    pub fn rank(&self) -> usize {
        self.generators.cols()
    }

    /// `G · m` for an integer coefficient vector.
    pub fn combine(&self, m: &[i64]) -> Result<Vec<Scalar>, TripleError> {
        let d = self.domain();
        let coeffs: Vec<Scalar> = m.iter().map(|&c| d.from_integer(c)).collect();
        Ok(self.generators.mul_vec(&coeffs)?)
    }
}

/// A simplicial fan: rays `X_1..X_d` and maximal cones as 1-based index sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Fan {
    dim: usize,
    rays: Vec<Vec<Scalar>>,
    max_cones: Vec<Vec<usize>>,
}

impl Fan {
    /// Checks only the shape of the data; linear independence is a
    /// validation concern.
    pub fn new(dim: usize, rays: Vec<Vec<Scalar>>, max_cones: Vec<Vec<usize>>) -> Result<Fan, TripleError> {
        let d = rays.len();
        if dim == 0 {
            return Err(TripleError::Structure("dimension must be positive".into()));
        }
        if let Some(j) = rays.iter().position(|r| r.len() != dim) {
            return Err(TripleError::Structure(format!("ray X{} has length {}, expected {dim}", j + 1, rays[j].len())));
        }
        if max_cones.is_empty() {
            return Err(TripleError::Structure("fan has no maximal cones".into()));
        }
        let mut used = vec![false; d];
        let mut cones = Vec::with_capacity(max_cones.len());
        for cone in max_cones {
            if cone.len() != dim {
                return Err(TripleError::Structure(format!(
                    "maximal cone {} has {} indices, expected {dim}",
                    cone_label(&cone),
                    cone.len()
                )));
            }
            for &i in &cone {
                if i == 0 || i > d {
                    return Err(TripleError::Structure(format!("ray index {i} out of range 1..{d}")));
                }
                used[i - 1] = true;
            }
            let mut sorted = cone;
            sorted.sort_unstable();
            cones.push(sorted);
        }
        if let Some(j) = used.iter().position(|u| !u) {
            return Err(TripleError::Structure(format!("ray X{} lies in no maximal cone", j + 1)));
        }
        Ok(Fan { dim, rays, max_cones: cones })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Vec<Scalar>] {
        &self.rays
    }

    pub fn ray(&self, j: usize) -> &[Scalar] {
        &self.rays[j - 1]
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    /// The n×d matrix of π: e_j ↦ X_j, columns labelled 1..d.
    pub fn pi(&self, domain: &Domain) -> Mat {
        let labels = (1..=self.rays.len()).collect();
        Mat::from_columns(domain, self.dim, &self.rays)
            .and_then(|m| m.with_labels(None, Some(labels)))
            .expect("rays have uniform length")
    }

    /// A_σ: columns X_i for i ∈ I_σ in increasing order, labelled by index.
    pub fn cone_matrix(&self, domain: &Domain, cone: &[usize]) -> Result<Mat, TripleError> {
        let cols: Vec<Vec<Scalar>> = cone.iter().map(|&i| self.rays[i - 1].clone()).collect();
        let m = Mat::from_columns(domain, self.dim, &cols)?;
        // Repeated indices cannot carry labels; they fail simpliciality anyway.
        Ok(m.clone().with_labels(None, Some(cone.to_vec())).unwrap_or(m))
    }

    pub fn cone_position(&self, cone: &[usize]) -> Option<usize> {
        let mut sorted = cone.to_vec();
        sorted.sort_unstable();
        self.max_cones.iter().position(|c| *c == sorted)
    }
}

/// Integer witnesses `m_j` with `G · m_j = X_j`, one per ray.
pub type Witness = Vec<i64>;

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalTriple {
    fan: Fan,
    lattice: Quasilattice,
    witnesses: Vec<Witness>,
}

impl FundamentalTriple {
    /// Assembles a triple, checking supplied witnesses and recovering missing
    /// ones with a search box of half-width `bound`.
    pub fn new(
        fan: Fan,
        lattice: Quasilattice,
        witnesses: Vec<Option<Witness>>,
        bound: i64,
    ) -> Result<FundamentalTriple, TripleError> {
        let domain = lattice.domain().clone();
        if lattice.dim() != fan.dim() {
            return Err(TripleError::Structure(format!(
                "quasilattice lives in dimension {}, fan in dimension {}",
                lattice.dim(),
                fan.dim()
            )));
        }
        if fan.rays().iter().flatten().any(|x| x.domain() != &domain) {
            return Err(TripleError::Field(FieldError::DomainMismatch));
        }
        if witnesses.len() != fan.rays().len() {
            return Err(TripleError::Structure(format!("{} witnesses for {} rays", witnesses.len(), fan.rays().len())));
        }
        let witnesses = witnesses
            .into_iter()
            .enumerate()
            .map(|(j, w)| find_witness(&lattice, fan.ray(j + 1), j + 1, w.as_deref(), bound))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FundamentalTriple { fan, lattice, witnesses })
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn lattice(&self) -> &Quasilattice {
        &self.lattice
    }

    pub fn domain(&self) -> &Domain {
        self.lattice.domain()
    }

    pub fn dim(&self) -> usize {
        self.fan.dim
    }

    pub fn ray_count(&self) -> usize {
        self.fan.rays.len()
    }

    pub fn witnesses(&self) -> &[Witness] {
        &self.witnesses
    }

    pub fn pi(&self) -> Mat {
        self.fan.pi(self.domain())
    }

    pub fn cone_matrix(&self, cone: &[usize]) -> Result<Mat, TripleError> {
        self.fan.cone_matrix(self.domain(), cone)
    }

    /// Re-verifies the stored witness for ray `j` (1-based).
    pub fn ray_membership(&self, j: usize) -> Result<Witness, TripleError> {
        if j == 0 || j > self.ray_count() {
            return Err(TripleError::Structure(format!("ray index {j} out of range")));
        }
        find_witness(&self.lattice, self.fan.ray(j), j, Some(&self.witnesses[j - 1]), DEFAULT_WITNESS_BOX)
    }

    /// Replaces every scalar through `f`, e.g. to specialize a parameter.
    pub fn map_scalars(
        &self,
        domain: &Domain,
        f: impl Fn(&Scalar) -> Result<Scalar, FieldError>,
    ) -> Result<FundamentalTriple, TripleError> {
        let rays = self
            .fan
            .rays
            .iter()
            .map(|r| r.iter().map(&f).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let generators = self.lattice.generators.try_map(domain, &f)?;
        let fan = Fan { dim: self.fan.dim, rays, max_cones: self.fan.max_cones.clone() };
        let witnesses = self.witnesses.iter().cloned().map(Some).collect();
        FundamentalTriple::new(fan, Quasilattice::new(generators)?, witnesses, DEFAULT_WITNESS_BOX)
    }

    pub fn specialize(&self, value: &num_rational::BigRational) -> Result<FundamentalTriple, TripleError> {
        self.map_scalars(&Domain::rational(), |x| x.specialize(value))
    }

    /// All unordered pairs of maximal cones (positions into `max_cones`).
    pub fn cone_adjacency(&self) -> Vec<ConeAdjacency> {
        let cones = &self.fan.max_cones;
        let mut out = Vec::new();
        for a in 0..cones.len() {
            for b in a + 1..cones.len() {
                let shared: Vec<usize> = cones[a].iter().copied().filter(|i| cones[b].contains(i)).collect();
                let h = self.dim() - shared.len();
                out.push(ConeAdjacency { first: a, second: b, shared, h });
            }
        }
        out
    }

    pub fn validate(&self, probe: &ProbeConfig) -> ValidationReport {
        let mut checks = Vec::new();
        let domain = self.domain();

        let mut failures = Vec::new();
        for cone in self.fan.max_cones() {
            let distinct = cone.iter().collect::<BTreeSet<_>>().len() == cone.len();
            let invertible = self.cone_matrix(cone).is_ok_and(|a| a.invert().is_ok());
            if !distinct || !invertible {
                failures.push(format!("{} has linearly dependent rays", cone_label(cone)));
            }
        }
        checks.push(CheckOutcome::hard("simpliciality", failures));

        let mut failures = Vec::new();
        if self.lattice.generators().rank() != self.dim() {
            failures.push(format!("quasilattice generators do not span dimension {}", self.dim()));
        }
        for j in 1..=self.ray_count() {
            if let Err(e) = self.ray_membership(j) {
                failures.push(e.to_string());
            }
        }
        checks.push(CheckOutcome::hard("quasirationality", failures));

        let mut failures = Vec::new();
        for adj in self.cone_adjacency() {
            if adj.shared.is_empty() {
                continue;
            }
            let ok = self.cone_matrix(&adj.shared).is_ok_and(|m| m.rank() == adj.shared.len());
            if !ok {
                let c = &self.fan.max_cones;
                failures.push(format!(
                    "shared rays {} of {} and {} are dependent",
                    cone_label(&adj.shared),
                    cone_label(&c[adj.first]),
                    cone_label(&c[adj.second])
                ));
            }
        }
        checks.push(CheckOutcome::hard("face_condition", failures));

        checks.push(self.support_probe(domain, probe));
        ValidationReport { checks }
    }

    /// Samples unit directions and counts the maximal cones containing each.
    fn support_probe(&self, domain: &Domain, probe: &ProbeConfig) -> CheckOutcome {
        let mut outcome =
            CheckOutcome { name: "support_probe".into(), passed: true, advisory: true, details: Vec::new() };
        let sample = probe.parameter_sample.or_else(|| domain.default_sample().and_then(|s| s.to_f64()));
        let inverses: Option<Vec<DMatrix<f64>>> = self
            .fan
            .max_cones()
            .iter()
            .map(|c| {
                let a = self.cone_matrix(c).ok()?;
                mat_to_f64(&a, sample).ok()?.try_inverse()
            })
            .collect();
        let Some(inverses) = inverses else {
            outcome.details.push("skipped: cone matrices have no numeric value".into());
            return outcome;
        };
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
        let (mut gaps, mut overlaps) = (0usize, 0usize);
        for _ in 0..probe.samples {
            let u = random_unit(&mut rng, n);
            let covering = inverses.iter().filter(|inv| (*inv * &u).iter().all(|&c| c > probe.tolerance)).count();
            let touching = inverses.iter().filter(|inv| (*inv * &u).iter().all(|&c| c > -probe.tolerance)).count();
            if touching == 0 {
                gaps += 1;
            }
            if covering >= 2 {
                overlaps += 1;
            }
        }
        outcome
            .details
            .push(format!("{} directions sampled, {gaps} uncovered, {overlaps} covered more than once", probe.samples));
        outcome.passed = gaps == 0 && overlaps == 0;
        outcome
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 1e-3 && norm <= 1.0 {
            return v / norm;
        }
    }
}

/// Numeric value of a matrix under the real embedding (or parameter sample).
pub fn mat_to_f64(m: &Mat, sample: Option<f64>) -> Result<DMatrix<f64>, FieldError> {
    let mut out = DMatrix::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(i, j)] = m.get(i, j).to_f64(sample)?;
        }
    }
    Ok(out)
}

/// Finds or checks an integer vector `m` with `G · m = x`.
///
/// The rational solution set is parametrized over a pivot column subset S of
/// G: `m_S = G_S⁻¹ (x − G_F m_F)`. Free coordinates `m_F` range over the box
/// and the solution of least l1-norm (then lexicographically least) wins.
pub fn find_witness(
    lattice: &Quasilattice,
    x: &[Scalar],
    ray: usize,
    supplied: Option<&[i64]>,
    bound: i64,
) -> Result<Witness, TripleError> {
    if let Some(m) = supplied {
        if m.len() != lattice.rank() {
            return Err(TripleError::Structure(format!(
                "witness for X{ray} has {} entries, expected {}",
                m.len(),
                lattice.rank()
            )));
        }
        return if lattice.combine(m)? == x { Ok(m.to_vec()) } else { Err(TripleError::WitnessMismatch { ray }) };
    }
    let g = lattice.generators();
    let pivots = pivot_columns(g);
    if pivots.len() != g.rows() {
        return Err(TripleError::Structure("quasilattice generators are rank deficient".into()));
    }
    let free: Vec<usize> = (0..g.cols()).filter(|j| !pivots.contains(j)).collect();
    let gs = g.select_columns(&pivots);
    let base = gs.solve(x)?;
    let shift = gs.solve_many(&g.select_columns(&free))?;
    let domain = lattice.domain();

    let mut best: Option<(i64, Witness)> = None;
    let mut offsets = vec![-bound; free.len()];
    loop {
        let mut m = vec![0i64; g.cols()];
        let mut integral = true;
        for (row, &p) in pivots.iter().enumerate() {
            let mut v = base[row].clone();
            for (c, &o) in offsets.iter().enumerate() {
                if o != 0 {
                    v = &v - &(shift.get(row, c) * &domain.from_integer(o));
                }
            }
            match v.as_integer().and_then(|z| z.to_i64()) {
                Some(z) => m[p] = z,
                None => {
                    integral = false;
                    break;
                }
            }
        }
        if integral {
            for (c, &f) in free.iter().enumerate() {
                m[f] = offsets[c];
            }
            let norm: i64 = m.iter().map(|v| v.abs()).sum();
            if best.as_ref().is_none_or(|(b, w)| (norm, &m) < (*b, w)) {
                best = Some((norm, m));
            }
        }
        // Odometer over the box.
        let mut k = 0;
        while k < offsets.len() && offsets[k] == bound {
            offsets[k] = -bound;
            k += 1;
        }
        if k == offsets.len() {
            break;
        }
        offsets[k] += 1;
    }
    match best {
        Some((_, m)) => Ok(m),
        None => {
            let parts: Vec<String> = pivots
                .iter()
                .enumerate()
                .map(|(row, &p)| {
                    let mut s = format!("m{} = {}", p + 1, base[row].pretty());
                    for (c, &f) in free.iter().enumerate() {
                        s.push_str(&format!(" - ({})*m{}", shift.get(row, c).pretty(), f + 1));
                    }
                    s
                })
                .collect();
            Err(TripleError::NoWitness { ray, bound, solutions: parts.join("; ") })
        }
    }
}

/// First linearly independent columns, scanning left to right.
fn pivot_columns(g: &Mat) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for j in 0..g.cols() {
        let mut trial = chosen.clone();
        trial.push(j);
        if g.select_columns(&trial).rank() == trial.len() {
            chosen = trial;
        }
        if chosen.len() == g.rows() {
            break;
        }
    }
    chosen
}

/// A pair of maximal cones (positions into the fan's cone list).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeAdjacency {
    pub first: usize,
    pub second: usize,
    /// 1-based ray indices in both cones.
    pub shared: Vec<usize>,
    /// Number of indices of either cone not shared with the other.
    pub h: usize,
}

impl ConeAdjacency {
    pub fn disjoint(&self) -> bool {
        self.shared.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub parameter_sample: Option<f64>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { samples: 256, seed: 0, tolerance: 1e-9, parameter_sample: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Advisory checks never fail a run.
    pub advisory: bool,
    pub details: Vec<String>,
}

impl CheckOutcome {
    fn hard(name: &str, failures: Vec<String>) -> CheckOutcome {
        CheckOutcome { name: name.into(), passed: failures.is_empty(), advisory: false, details: failures }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    /// True when every non-advisory check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.advisory)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}
