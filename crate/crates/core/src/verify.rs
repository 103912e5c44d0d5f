//! Monte-Carlo checks of the compiled atlas at sampled points.
//!
//! Exponents are exact upstream; here they are evaluated in f64 and all
//! checks work with explicit logarithms, so branch choices are visible. A
//! phase vector θ belongs to Γ_σ when some integer combination of the chart's
//! generator exponents agrees with θ modulo ℤⁿ; the combination is found by a
//! bounded search.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atlas::Atlas;
use crate::field::FieldError;
use crate::triple::{cone_label, mat_to_f64, FundamentalTriple};

/// Upper limit on the number of coefficient vectors tried per search.
const MAX_CANDIDATES: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub word_length: usize,
    pub integer_box: i64,
    pub parameter_sample: Option<f64>,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig { samples: 100, seed: 0, tolerance: 1e-9, word_length: 3, integer_box: 10, parameter_sample: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// No coefficient vector in the box matched the phase.
    SearchExhausted,
    /// A direct numeric identity failed.
    NumericMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub check: String,
    pub context: String,
    pub trial: usize,
    /// Seed of the failing trial's generator.
    pub seed: u64,
    pub deviation: f64,
    pub kind: FailureKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckBreakdown {
    pub check: String,
    pub trials: usize,
    pub skipped: usize,
    pub failures: usize,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrialReport {
    pub trials: usize,
    pub max_deviation: f64,
    pub failures: Vec<TrialFailure>,
    pub breakdown: Vec<CheckBreakdown>,
}

impl TrialReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Associative merge; breakdown rows with the same check name add up.
    pub fn merge(mut self, other: TrialReport) -> TrialReport {
        self.trials += other.trials;
        self.max_deviation = self.max_deviation.max(other.max_deviation);
        self.failures.extend(other.failures);
        for row in other.breakdown {
            match self.breakdown.iter_mut().find(|r| r.check == row.check) {
                Some(r) => {
                    r.trials += row.trials;
                    r.skipped += row.skipped;
                    r.failures += row.failures;
                    r.max_deviation = r.max_deviation.max(row.max_deviation);
                }
                None => self.breakdown.push(row),
            }
        }
        self
    }

    fn skipped(check: &str) -> TrialReport {
        TrialReport {
            breakdown: vec![CheckBreakdown {
                check: check.into(),
                trials: 0,
                skipped: 1,
                failures: 0,
                max_deviation: 0.0,
            }],
            ..TrialReport::default()
        }
    }
}

/// Outcome of a single trial: the worst residual and which kind it was.
struct Outcome {
    deviation: f64,
    kind: FailureKind,
}

impl Outcome {
    fn ok() -> Outcome {
        Outcome { deviation: 0.0, kind: FailureKind::NumericMismatch }
    }

    fn record(&mut self, deviation: f64, kind: FailureKind) {
        if deviation > self.deviation || deviation.is_nan() {
            self.deviation = deviation;
            self.kind = kind;
        }
    }
}

fn run_trials(
    check: &str,
    context: &str,
    context_id: u64,
    cfg: &TrialConfig,
    trial: impl Fn(&mut ChaCha8Rng) -> Outcome + Sync,
) -> TrialReport {
    let check_id = check.bytes().fold(0u64, |h, b| splitmix(h ^ u64::from(b)));
    let outcomes: Vec<(u64, Outcome)> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(cfg.seed, check_id, context_id, i as u64);
            (seed, trial(&mut ChaCha8Rng::seed_from_u64(seed)))
        })
        .collect();
    let mut report = TrialReport { trials: cfg.samples, ..TrialReport::default() };
    for (i, (seed, o)) in outcomes.into_iter().enumerate() {
        let deviation = if o.deviation.is_nan() { f64::MAX } else { o.deviation };
        report.max_deviation = report.max_deviation.max(deviation);
        if deviation >= cfg.tolerance {
            report.failures.push(TrialFailure {
                check: check.into(),
                context: context.into(),
                trial: i,
                seed,
                deviation,
                kind: o.kind,
            });
        }
    }
    report.breakdown.push(CheckBreakdown {
        check: check.into(),
        trials: report.trials,
        skipped: 0,
        failures: report.failures.len(),
        max_deviation: report.max_deviation,
    });
    report
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of one trial, derived from the run seed, check, context and index.
pub fn trial_seed(seed: u64, check: u64, context: u64, trial: u64) -> u64 {
    splitmix(splitmix(splitmix(splitmix(seed) ^ check) ^ context) ^ trial)
}

/// Distance from x to the nearest integer.
fn frac_dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    /// Max over components of the distance of `Σ m_c g_c − θ` to ℤ.
    pub residual: f64,
    pub coefficients: Option<Vec<i64>>,
}

type CandidateCache = Mutex<HashMap<(usize, i64), Arc<Vec<i64>>>>;

fn candidates(k: usize, bound: i64) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<CandidateCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().unwrap().get(&(k, bound)) {
        return c.clone();
    }
    let side = (2 * bound + 1) as usize;
    let total = side.pow(k as u32);
    let mut vecs: Vec<Vec<i64>> = (0..total)
        .map(|mut code| {
            (0..k)
                .map(|_| {
                    let v = (code % side) as i64 - bound;
                    code /= side;
                    v
                })
                .collect()
        })
        .collect();
    vecs.sort_by_key(|v| (v.iter().map(|x| x.abs()).sum::<i64>(), v.clone()));
    let flat = Arc::new(vecs.into_iter().flatten().collect::<Vec<_>>());
    cache.lock().unwrap().insert((k, bound), flat.clone());
    flat
}

/// Searches `m ∈ [−B, B]^k` with `Σ m_c g_c ≡ θ (mod ℤⁿ)` within `tol`,
/// smallest l1-norm first. The box shrinks if it would exceed the
/// candidate budget.
pub fn gamma_membership(generators: &[DVector<f64>], theta: &DVector<f64>, bound: i64, tol: f64) -> Membership {
    let k = generators.len();
    let mut b = bound.max(0);
    while b > 0 && (2 * b as usize + 1).checked_pow(k as u32).is_none_or(|c| c > MAX_CANDIDATES) {
        b -= 1;
    }
    let cands = candidates(k, b);
    let n = theta.len();
    let mut best = f64::INFINITY;
    let mut sum = vec![0.0; n];
    let chunks: Box<dyn Iterator<Item = &[i64]>> =
        if k == 0 { Box::new(std::iter::once(&[][..])) } else { Box::new(cands.chunks(k)) };
    for m in chunks {
        sum.iter_mut().zip(theta.iter()).for_each(|(s, t)| *s = -t);
        for (c, &mc) in m.iter().enumerate() {
            if mc != 0 {
                let g = &generators[c];
                for i in 0..n {
                    sum[i] += mc as f64 * g[i];
                }
            }
        }
        let r = sum.iter().map(|&x| frac_dist(x)).fold(0.0, f64::max);
        if r < tol {
            return Membership { residual: r, coefficients: Some(m.to_vec()) };
        }
        best = best.min(r);
    }
    Membership { residual: best, coefficients: None }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericChart {
    pub cone: Vec<usize>,
    pub a_sigma: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    /// Reduced Γ_σ generator exponents, n×k.
    pub gamma: DMatrix<f64>,
    /// (j, a^j) for every ray j outside the cone.
    pub relations: Vec<(usize, DVector<f64>)>,
}

impl NumericChart {
    /// Generator columns that are not identically zero.
    pub fn gamma_generators(&self) -> Vec<DVector<f64>> {
        self.gamma.column_iter().filter(|c| c.iter().any(|&x| x != 0.0)).map(|c| c.into_owned()).collect()
    }
}

/// f64 image of a compiled atlas, open to deliberate perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericAtlas {
    pub n: usize,
    pub d: usize,
    pub pi: DMatrix<f64>,
    pub generators: DMatrix<f64>,
    pub witnesses: Vec<Vec<i64>>,
    pub charts: Vec<NumericChart>,
    /// Dense table indexed by `from * m + to`; the diagonal holds identities.
    transitions: Vec<DMatrix<f64>>,
}

impl NumericAtlas {
    pub fn new(t: &FundamentalTriple, atlas: &Atlas, sample: Option<f64>) -> Result<NumericAtlas, FieldError> {
        let n = t.dim();
        let m = atlas.charts.len();
        let charts = atlas
            .charts
            .iter()
            .zip(&atlas.relations)
            .map(|(c, rel)| {
                let relations = rel
                    .relations
                    .iter()
                    .map(|r| {
                        let v = r.coefficients.iter().map(|x| x.to_f64(sample)).collect::<Result<Vec<_>, _>>()?;
                        Ok((r.index, DVector::from_vec(v)))
                    })
                    .collect::<Result<Vec<_>, FieldError>>()?;
                Ok(NumericChart {
                    cone: c.cone.clone(),
                    a_sigma: mat_to_f64(&c.a_sigma, sample)?,
                    a_inv: mat_to_f64(&c.a_inv, sample)?,
                    gamma: mat_to_f64(&c.gamma_exponents, sample)?,
                    relations,
                })
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        let mut transitions = vec![DMatrix::identity(n, n); m * m];
        for map in &atlas.transitions {
            let from = atlas.charts.iter().position(|c| c.cone == map.from_cone).unwrap();
            let to = atlas.charts.iter().position(|c| c.cone == map.to_cone).unwrap();
            transitions[from * m + to] = mat_to_f64(&map.exponents, sample)?;
        }
        Ok(NumericAtlas {
            n,
            d: t.ray_count(),
            pi: mat_to_f64(&t.pi(), sample)?,
            generators: mat_to_f64(t.lattice().generators(), sample)?,
            witnesses: t.witnesses().to_vec(),
            charts,
            transitions,
        })
    }

    pub fn chart_count(&self) -> usize {
        self.charts.len()
    }

    pub fn position(&self, cone: &[usize]) -> Option<usize> {
        let mut sorted = cone.to_vec();
        sorted.sort_unstable();
        self.charts.iter().position(|c| c.cone == sorted)
    }

    /// Exponent matrix of the transition from chart `from` to chart `to`.
    pub fn transition(&self, from: usize, to: usize) -> &DMatrix<f64> {
        &self.transitions[from * self.charts.len() + to]
    }

    /// |I_τ \ I_σ| for the pair.
    pub fn h(&self, from: usize, to: usize) -> usize {
        let (a, b) = (&self.charts[from].cone, &self.charts[to].cone);
        a.iter().filter(|j| !b.contains(j)).count()
    }

    pub fn perturb_transition(&mut self, from: usize, to: usize, row: usize, col: usize, delta: f64) {
        let m = self.charts.len();
        self.transitions[from * m + to][(row, col)] += delta;
    }

    pub fn perturb_gamma(&mut self, chart: usize, row: usize, col: usize, delta: f64) {
        self.charts[chart].gamma[(row, col)] += delta;
    }

    pub fn perturb_relation(&mut self, chart: usize, relation: usize, row: usize, delta: f64) {
        self.charts[chart].relations[relation].1[row] += delta;
    }
}

fn sample_torus(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::from_polar(rng.random_range(0.5..=2.0), rng.random_range(0.0..TAU))).collect()
}

fn branch_shift(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| f64::from(rng.random_range(-1i32..=1)))
}

/// log z with the imaginary part moved by 2π·shift.
fn logs(z: &[Complex64], shift: &DVector<f64>) -> DVector<Complex64> {
    DVector::from_fn(z.len(), |j, _| z[j].ln() + Complex64::new(0.0, TAU * shift[j]))
}

/// Monomials exp(E · L) for a log vector L.
fn apply_monomials(e: &DMatrix<f64>, l: &DVector<Complex64>) -> Vec<Complex64> {
    (0..e.nrows()).map(|i| (0..e.ncols()).map(|j| l[j] * e[(i, j)]).sum::<Complex64>().exp()).collect()
}

/// Phases (in turns, reduced to [0,1)) and modulus deviation of w'/w.
fn ratio_phases(after: &[Complex64], before: &[Complex64]) -> (DVector<f64>, f64) {
    let mut modulus_dev: f64 = 0.0;
    let theta = DVector::from_iterator(
        after.len(),
        after.iter().zip(before).map(|(a, b)| {
            let r = a / b;
            modulus_dev = modulus_dev.max((r.norm() - 1.0).abs());
            (r.arg() / TAU).rem_euclid(1.0)
        }),
    );
    (theta, modulus_dev)
}

/// Images of one class under different logarithm branches differ by Γ_σ.
/// Every transition into σ is exercised in each trial.
pub fn check_class_well_defined(na: &NumericAtlas, sigma: usize, cfg: &TrialConfig) -> TrialReport {
    let gens = na.charts[sigma].gamma_generators();
    let context = format!("into {}", cone_label(&na.charts[sigma].cone));
    run_trials("class_well_defined", &context, sigma as u64, cfg, |rng| {
        let mut out = Outcome::ok();
        let z = sample_torus(rng, na.n);
        let shift = branch_shift(rng, na.n);
        let base = logs(&z, &DVector::zeros(na.n));
        let moved = logs(&z, &shift);
        for tau in (0..na.chart_count()).filter(|&x| x != sigma) {
            let e = na.transition(tau, sigma);
            let (theta, modulus) = ratio_phases(&apply_monomials(e, &moved), &apply_monomials(e, &base));
            out.record(modulus, FailureKind::NumericMismatch);
            let found = gamma_membership(&gens, &theta, cfg.integer_box, cfg.tolerance);
            out.record(found.residual, FailureKind::SearchExhausted);
        }
        out
    })
}

/// T(γ·z) and T(z) differ by an element of Γ_σ for γ ∈ Γ_τ.
pub fn check_transition_equivariance(na: &NumericAtlas, tau: usize, sigma: usize, cfg: &TrialConfig) -> TrialReport {
    let source = na.charts[tau].gamma_generators();
    let target = na.charts[sigma].gamma_generators();
    let e = na.transition(tau, sigma);
    let context = format!("{} -> {}", cone_label(&na.charts[tau].cone), cone_label(&na.charts[sigma].cone));
    let context_id = (tau * na.chart_count() + sigma) as u64;
    run_trials("transition_equivariance", &context, context_id, cfg, |rng| {
        let mut out = Outcome::ok();
        let z = sample_torus(rng, na.n);
        // γ = exp(2πi φ) with φ a signed word in the generators plus an
        // integer lift, which changes γ's logarithm but not γ.
        let mut phi = branch_shift(rng, na.n);
        if !source.is_empty() {
            for _ in 0..rng.random_range(1..=cfg.word_length.max(1)) {
                let g = &source[rng.random_range(0..source.len())];
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                phi += g * sign;
            }
        }
        let base = logs(&z, &DVector::zeros(na.n));
        let moved = logs(&z, &phi);
        let (theta, modulus) = ratio_phases(&apply_monomials(e, &moved), &apply_monomials(e, &base));
        out.record(modulus, FailureKind::NumericMismatch);
        let found = gamma_membership(&target, &theta, cfg.integer_box, cfg.tolerance);
        out.record(found.residual, FailureKind::SearchExhausted);
        out
    })
}

/// X with π(X) ∈ Q splits as Y + W with exp(Y) ∈ Γ_σ and W ∈ 𝔫.
pub fn check_lemma_decomposition(na: &NumericAtlas, sigma: usize, cfg: &TrialConfig) -> TrialReport {
    let chart = &na.charts[sigma];
    let gens = chart.gamma_generators();
    let context = cone_label(&chart.cone);
    let k = na.generators.ncols();
    run_trials("lemma_decomposition", &context, sigma as u64, cfg, |rng| {
        let mut out = Outcome::ok();
        // Integer part: π(r) = G · Σ r_j m_j lies in Q.
        let mut x = DVector::from_fn(na.d, |_, _| f64::from(rng.random_range(-1i32..=1)));
        // Kernel part: Σ t_j (e_j − a^j).
        for (j, a) in &chart.relations {
            let t: f64 = rng.random_range(-2.0..2.0);
            x[j - 1] += t;
            for (row, &i) in chart.cone.iter().enumerate() {
                x[i - 1] -= t * a[row];
            }
        }
        // A quasilattice element lifted along the cone.
        let m = DVector::from_fn(k, |_, _| f64::from(rng.random_range(-1i32..=1)));
        let lift = &chart.a_inv * (&na.generators * m);
        for (row, &i) in chart.cone.iter().enumerate() {
            x[i - 1] += lift[row];
        }

        let image = &na.pi * &x;
        let y_cone = &chart.a_inv * &image;
        let mut w = x.clone();
        for (row, &i) in chart.cone.iter().enumerate() {
            w[i - 1] -= y_cone[row];
        }
        let scale = 1.0 + x.amax();
        out.record((&na.pi * &w).amax() / scale, FailureKind::NumericMismatch);
        let theta = y_cone.map(|v| v.rem_euclid(1.0));
        let found = gamma_membership(&gens, &theta, cfg.integer_box, cfg.tolerance);
        out.record(found.residual, FailureKind::SearchExhausted);
        out
    })
}

/// The group element built from the relations moves η_τ's representative
/// onto η_σ(T(z)), and its logarithm lies in 𝔫_ℂ.
pub fn check_proof_group_element(na: &NumericAtlas, tau: usize, sigma: usize, cfg: &TrialConfig) -> TrialReport {
    const CHECK: &str = "proof_group_element";
    let h = na.h(tau, sigma);
    if h == 0 || h == na.n {
        return TrialReport::skipped(CHECK);
    }
    let (src, dst) = (&na.charts[tau], &na.charts[sigma]);
    let e = na.transition(tau, sigma);
    let context = format!("{} -> {}", cone_label(&src.cone), cone_label(&dst.cone));
    let context_id = (tau * na.chart_count() + sigma) as u64;
    let moving: Vec<usize> = src.cone.iter().copied().filter(|j| !dst.cone.contains(j)).collect();
    run_trials(CHECK, &context, context_id, cfg, |rng| {
        let mut out = Outcome::ok();
        let z = sample_torus(rng, na.n);
        let log_z = logs(&z, &DVector::zeros(na.n));
        let log_of = |j: usize| log_z[src.cone.iter().position(|&x| x == j).unwrap()];

        let mut l = DVector::from_element(na.d, Complex64::new(0.0, 0.0));
        for &j in &moving {
            let a = &dst.relations.iter().find(|(idx, _)| *idx == j).expect("relation for moving index").1;
            for (row, &i) in dst.cone.iter().enumerate() {
                l[i - 1] += log_of(j) * a[row];
            }
            l[j - 1] = -log_of(j);
        }
        let pi_c = DMatrix::from_fn(na.n, na.d, |r, c| Complex64::new(na.pi[(r, c)], 0.0)) * &l;
        out.record(pi_c.iter().map(|v| v.norm()).fold(0.0, f64::max), FailureKind::NumericMismatch);

        let mut representative = vec![Complex64::new(1.0, 0.0); na.d];
        for (col, &j) in src.cone.iter().enumerate() {
            representative[j - 1] = z[col];
        }
        let moved: Vec<Complex64> = representative.iter().zip(l.iter()).map(|(r, lv)| r * lv.exp()).collect();

        let image = apply_monomials(e, &log_z);
        let mut expected = vec![Complex64::new(1.0, 0.0); na.d];
        for (row, &i) in dst.cone.iter().enumerate() {
            expected[i - 1] = image[row];
        }
        let mismatch = moved.iter().zip(&expected).map(|(a, b)| (a - b).norm() / (1.0 + b.norm())).fold(0.0, f64::max);
        out.record(mismatch, FailureKind::NumericMismatch);
        out
    })
}

/// Results of all four checks over a whole atlas.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub config: Option<TrialConfig>,
    pub class_well_defined: TrialReport,
    pub transition_equivariance: TrialReport,
    pub lemma_decomposition: TrialReport,
    pub proof_group_element: TrialReport,
}

impl VerificationSummary {
    pub fn passed(&self) -> bool {
        self.reports().iter().all(|(_, r)| r.passed())
    }

    pub fn reports(&self) -> [(&'static str, &TrialReport); 4] {
        [
            ("class_well_defined", &self.class_well_defined),
            ("transition_equivariance", &self.transition_equivariance),
            ("lemma_decomposition", &self.lemma_decomposition),
            ("proof_group_element", &self.proof_group_element),
        ]
    }
}

fn merge_all(reports: impl Iterator<Item = TrialReport>) -> TrialReport {
    reports.fold(TrialReport::default(), TrialReport::merge)
}

/// Runs every check: class and lemma per chart, equivariance and the proof
/// element per ordered pair of distinct charts.
pub fn verify_all(na: &NumericAtlas, cfg: &TrialConfig) -> VerificationSummary {
    let m = na.chart_count();
    let pairs: Vec<(usize, usize)> =
        (0..m).flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    VerificationSummary {
        config: Some(cfg.clone()),
        class_well_defined: merge_all((0..m).map(|s| check_class_well_defined(na, s, cfg))),
        transition_equivariance: merge_all(pairs.iter().map(|&(t, s)| check_transition_equivariance(na, t, s, cfg))),
        lemma_decomposition: merge_all((0..m).map(|s| check_lemma_decomposition(na, s, cfg))),
        proof_group_element: merge_all(pairs.iter().map(|&(t, s)| check_proof_group_element(na, t, s, cfg))),
    }
}
