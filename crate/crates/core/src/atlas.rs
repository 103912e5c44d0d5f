//! The canonical atlas: one chart per maximal cone, the groups Γ_σ, the
//! kernel relations and transition maps as generalized Laurent monomials.

use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{is_atomic, Scalar};
use crate::linalg::Mat;
use crate::triple::{cone_label, FundamentalTriple, TripleError};

/// Chart around the fixed point of a maximal cone σ.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    /// I_σ, 1-based and increasing.
    pub cone: Vec<usize>,
    /// Columns X_i for i ∈ I_σ.
    pub a_sigma: Mat,
    pub a_inv: Mat,
    /// 0 at positions in I_σ, 1 elsewhere.
    pub fixed_point: Vec<u8>,
    /// Columns π_σ⁻¹(g) for the quasilattice generators g, with entries that
    /// are rational integers replaced by 0. Rows labelled by I_σ.
    pub gamma_exponents: Mat,
    /// The integers removed from `A_inv · G` (n×k, row-major).
    pub gamma_integer_parts: Vec<Vec<i64>>,
}

impl Chart {
    /// Γ_σ generator columns that survive reduction (nonzero), by generator index.
    pub fn nonzero_gamma_columns(&self) -> Vec<usize> {
        (0..self.gamma_exponents.cols())
            .filter(|&c| (0..self.gamma_exponents.rows()).any(|r| !self.gamma_exponents.get(r, c).is_zero()))
            .collect()
    }

    pub fn fixed_point_text(&self) -> String {
        let parts: Vec<String> = self.fixed_point.iter().map(u8::to_string).collect();
        format!("[{}]", parts.join(":"))
    }

    /// Generator column `c` written as an exponent vector, e.g. `(1/a)`.
    pub fn gamma_text(&self, c: usize) -> String {
        let parts: Vec<String> = self.gamma_exponents.column(c).iter().map(Scalar::pretty).collect();
        format!("({})", parts.join(", "))
    }

    /// Integer coefficients `q` with `G · q = A_σ · c` for the reduced gamma
    /// column `c`, built from the witnesses: `A_σ·c = g_l − Σ_i z_i X_i`.
    pub fn gamma_lattice_coefficients(&self, t: &FundamentalTriple, l: usize) -> Vec<i64> {
        let mut q = vec![0i64; t.lattice().rank()];
        q[l] += 1;
        for (row, &i) in self.cone.iter().enumerate() {
            let z = self.gamma_integer_parts[row][l];
            for (qk, wk) in q.iter_mut().zip(&t.witnesses()[i - 1]) {
                *qk -= z * wk;
            }
        }
        q
    }
}

/// Transition from the chart of `from_cone` (τ) to that of `to_cone` (σ).
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialMap {
    pub from_cone: Vec<usize>,
    pub to_cone: Vec<usize>,
    /// E = A_σ⁻¹ · A_τ, rows labelled by I_σ, columns by I_τ.
    pub exponents: Mat,
    /// |I_τ \ I_σ|.
    pub h: usize,
}

impl MonomialMap {
    /// Disjoint index sets lie outside the hypothesis 1 ≤ h ≤ n−1; the map is
    /// still valid on the dense orbit.
    pub fn is_extension(&self) -> bool {
        self.h == self.from_cone.len()
    }

    /// Monomial for each target coordinate, e.g. `z2^-a z3`.
    pub fn row_texts(&self) -> Vec<String> {
        let e = &self.exponents;
        let single = self.from_cone.len() == 1;
        (0..e.rows())
            .map(|i| {
                let factors: Vec<String> = self
                    .from_cone
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| !e.get(i, *j).is_zero())
                    .map(|(j, &label)| {
                        let var = if single { "z".to_string() } else { format!("z{label}") };
                        let x = e.get(i, j);
                        if x.is_one() {
                            return var;
                        }
                        let text = x.pretty();
                        if is_atomic(&text) {
                            format!("{var}^{text}")
                        } else {
                            format!("{var}^({text})")
                        }
                    })
                    .collect();
                if factors.is_empty() {
                    "1".to_string()
                } else {
                    factors.join(" ")
                }
            })
            .collect()
    }

    /// The whole map, e.g. `[z2^-1 : z2^-a z3]`.
    pub fn render(&self) -> String {
        format!("[{}]", self.row_texts().join(" : "))
    }

    /// Column of E for ray index `j` of the source cone.
    pub fn column_for(&self, j: usize) -> Option<Vec<Scalar>> {
        self.from_cone.iter().position(|&x| x == j).map(|c| self.exponents.column(c))
    }
}

/// X_j = Σ_{i∈I_σ} a^j_i X_i for a ray j outside the cone.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub index: usize,
    /// a^j, indexed like the base cone.
    pub coefficients: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationSet {
    pub base_cone: Vec<usize>,
    pub relations: Vec<Relation>,
    /// e_j − a^j as length-d vectors, in the order of `relations`.
    pub kernel_vectors: Vec<Vec<Scalar>>,
}

impl RelationSet {
    pub fn relation(&self, j: usize) -> Option<&Relation> {
        self.relations.iter().find(|r| r.index == j)
    }

    /// `X4 = 1/phi X1 + 1/phi X2 - X3`.
    pub fn relation_text(&self, r: &Relation) -> String {
        let mut out = format!("X{} =", r.index);
        let mut first = true;
        for (c, &i) in r.coefficients.iter().zip(&self.base_cone) {
            if c.is_zero() {
                continue;
            }
            let text = c.pretty();
            let (negative, body) = match text.strip_prefix('-') {
                Some(rest) if !rest.contains(' ') => (true, rest.to_string()),
                _ if text.contains(' ') => (false, format!("({text})")),
                _ => (false, text.clone()),
            };
            let term = if body == "1" { format!("X{i}") } else { format!("{body} X{i}") };
            match (first, negative) {
                (true, true) => out.push_str(&format!(" -{term}")),
                (true, false) => out.push_str(&format!(" {term}")),
                (false, true) => out.push_str(&format!(" - {term}")),
                (false, false) => out.push_str(&format!(" + {term}")),
            }
            first = false;
        }
        if first {
            out.push_str(" 0");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitCount {
    pub cone_dim: usize,
    pub orbit_dim: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CocycleSummary {
    pub pairs_checked: usize,
    pub triples_checked: usize,
    pub violations: Vec<String>,
}

impl CocycleSummary {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn fixed_point(t: &FundamentalTriple, cone: &[usize]) -> Vec<u8> {
    (1..=t.ray_count()).map(|j| u8::from(!cone.contains(&j))).collect()
}

fn maximal_cone(t: &FundamentalTriple, cone: &[usize]) -> Result<Vec<usize>, TripleError> {
    let pos = t.fan().cone_position(cone).ok_or_else(|| TripleError::UnknownCone(cone_label(cone)))?;
    Ok(t.fan().max_cones()[pos].clone())
}

pub fn build_chart(t: &FundamentalTriple, cone: &[usize]) -> Result<Chart, TripleError> {
    let cone = maximal_cone(t, cone)?;
    let a_sigma = t.cone_matrix(&cone)?;
    let a_inv = a_sigma.invert().map_err(|_| TripleError::NotSimplicial { cone: cone_label(&cone) })?;
    let k = t.lattice().rank();
    let raw = a_inv.matmul(t.lattice().generators())?.with_labels(Some(cone.clone()), Some((1..=k).collect()))?;
    let mut gamma_exponents = raw.clone();
    let mut integer_parts = vec![vec![0i64; k]; cone.len()];
    for (r, row) in integer_parts.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            if let Some(z) = raw.get(r, c).as_integer().and_then(|z| z.to_i64()) {
                *slot = z;
                gamma_exponents.set(r, c, t.domain().zero());
            }
        }
    }
    Ok(Chart {
        fixed_point: fixed_point(t, &cone),
        cone,
        a_sigma,
        a_inv,
        gamma_exponents,
        gamma_integer_parts: integer_parts,
    })
}

fn transition_from_charts(from: &Chart, to: &Chart) -> Result<MonomialMap, TripleError> {
    let exponents = to.a_inv.matmul(&from.a_sigma)?;
    let h = from.cone.iter().filter(|j| !to.cone.contains(j)).count();
    Ok(MonomialMap { from_cone: from.cone.clone(), to_cone: to.cone.clone(), exponents, h })
}

/// Transition from the chart of τ (`from`) to the chart of σ (`to`).
pub fn transition_map(t: &FundamentalTriple, from: &[usize], to: &[usize]) -> Result<MonomialMap, TripleError> {
    transition_from_charts(&build_chart(t, from)?, &build_chart(t, to)?)
}

pub fn relations(t: &FundamentalTriple, cone: &[usize]) -> Result<RelationSet, TripleError> {
    relations_for_chart(t, &build_chart(t, cone)?)
}

fn relations_for_chart(t: &FundamentalTriple, chart: &Chart) -> Result<RelationSet, TripleError> {
    let index: Vec<usize> = chart.cone.iter().map(|i| i - 1).collect();
    let kernel_vectors = t.pi().kernel_basis(Some(&index))?;
    let outside = (1..=t.ray_count()).filter(|j| !chart.cone.contains(j));
    let relations = outside
        .zip(&kernel_vectors)
        .map(|(j, v)| Relation { index: j, coefficients: index.iter().map(|&i| -&v[i]).collect() })
        .collect();
    Ok(RelationSet { base_cone: chart.cone.clone(), relations, kernel_vectors })
}

/// Counts the faces of the fan (subsets of maximal index sets) by dimension.
pub fn orbit_report(t: &FundamentalTriple) -> Vec<OrbitCount> {
    let n = t.dim();
    let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for cone in t.fan().max_cones() {
        for mask in 0u32..(1 << cone.len()) {
            faces.insert(cone.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &i)| i).collect());
        }
    }
    (0..=n)
        .map(|m| OrbitCount { cone_dim: m, orbit_dim: n - m, count: faces.iter().filter(|f| f.len() == m).count() })
        .collect()
}

/// The compiled atlas of a triple.
#[derive(Debug, Clone, PartialEq)]
pub struct Atlas {
    pub charts: Vec<Chart>,
    /// All ordered pairs of distinct cones, source-major.
    pub transitions: Vec<MonomialMap>,
    pub relations: Vec<RelationSet>,
    pub orbits: Vec<OrbitCount>,
}

impl Atlas {
    pub fn compile(t: &FundamentalTriple) -> Result<Atlas, TripleError> {
        let charts = t.fan().max_cones().par_iter().map(|c| build_chart(t, c)).collect::<Result<Vec<_>, _>>()?;
        let m = charts.len();
        let transitions = (0..m * m)
            .into_par_iter()
            .filter(|p| p / m != p % m)
            .map(|p| transition_from_charts(&charts[p / m], &charts[p % m]))
            .collect::<Result<Vec<_>, _>>()?;
        let relations = charts.iter().map(|c| relations_for_chart(t, c)).collect::<Result<Vec<_>, _>>()?;
        Ok(Atlas { charts, transitions, relations, orbits: orbit_report(t) })
    }

    pub fn chart(&self, cone: &[usize]) -> Option<&Chart> {
        let mut sorted = cone.to_vec();
        sorted.sort_unstable();
        self.charts.iter().find(|c| c.cone == sorted)
    }

    fn position(&self, cone: &[usize]) -> Option<usize> {
        let mut sorted = cone.to_vec();
        sorted.sort_unstable();
        self.charts.iter().position(|c| c.cone == sorted)
    }

    fn transition_at(&self, from: usize, to: usize) -> &MonomialMap {
        let m = self.charts.len();
        &self.transitions[from * (m - 1) + if to < from { to } else { to - 1 }]
    }

    pub fn transition(&self, from: &[usize], to: &[usize]) -> Option<&MonomialMap> {
        let (f, t) = (self.position(from)?, self.position(to)?);
        (f != t).then(|| self.transition_at(f, t))
    }

    pub fn relations_for(&self, cone: &[usize]) -> Option<&RelationSet> {
        self.position(cone).map(|p| &self.relations[p])
    }

    /// Exact shared-column, inverse-pair and triangle identities over all
    /// ordered pairs and triples of distinct cones.
    pub fn cocycle_check(&self) -> CocycleSummary {
        let m = self.charts.len();
        let per_source: Vec<CocycleSummary> = (0..m)
            .into_par_iter()
            .map(|tau| {
                let mut s = CocycleSummary::default();
                for sigma in (0..m).filter(|&x| x != tau) {
                    let e = self.transition_at(tau, sigma);
                    let back = self.transition_at(sigma, tau);
                    let label = || format!("{} -> {}", cone_label(&e.from_cone), cone_label(&e.to_cone));
                    s.pairs_checked += 1;
                    if !e.exponents.matmul(&back.exponents).is_ok_and(|p| p.is_identity()) {
                        s.violations.push(format!("inverse pair fails for {}", label()));
                    }
                    for (c, &j) in e.from_cone.iter().enumerate() {
                        if let Some(r) = e.to_cone.iter().position(|&x| x == j) {
                            let unit = (0..e.exponents.rows()).all(|i| {
                                if i == r {
                                    e.exponents.get(i, c).is_one()
                                } else {
                                    e.exponents.get(i, c).is_zero()
                                }
                            });
                            if !unit {
                                s.violations.push(format!("shared column {j} is not a unit vector in {}", label()));
                            }
                        }
                    }
                    // E_{ρτ} = E_{ρσ} · E_{στ} for every third cone ρ.
                    for rho in (0..m).filter(|&x| x != tau && x != sigma) {
                        s.triples_checked += 1;
                        let direct = self.transition_at(tau, rho);
                        let via = self.transition_at(sigma, rho);
                        if !via.exponents.matmul(&e.exponents).is_ok_and(|p| p.same_entries(&direct.exponents)) {
                            s.violations.push(format!(
                                "triangle fails for {} -> {} -> {}",
                                cone_label(&e.from_cone),
                                cone_label(&e.to_cone),
                                cone_label(&via.to_cone)
                            ));
                        }
                    }
                }
                s
            })
            .collect();
        per_source.into_iter().fold(CocycleSummary::default(), |mut acc, s| {
            acc.pairs_checked += s.pairs_checked;
            acc.triples_checked += s.triples_checked;
            acc.violations.extend(s.violations);
            acc
        })
    }
}

/// Exact cocycle identities for a triple (compiles the atlas first).
pub fn cocycle_check(t: &FundamentalTriple) -> Result<CocycleSummary, TripleError> {
    Ok(Atlas::compile(t)?.cocycle_check())
}
