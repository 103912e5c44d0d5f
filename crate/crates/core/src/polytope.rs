//! Simple polytopes in facet form `⟨X_j, x⟩ ≥ λ_j` and their normal fans.

use num_rational::BigRational;
use rayon::prelude::*;
use thiserror::Error;

use crate::field::{parse_decimal, Domain, DomainKind, FieldError, Scalar, Sign};
use crate::linalg::{LinalgError, Mat};
use crate::triple::{cone_label, Fan, FundamentalTriple, Quasilattice, TripleError, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolytopeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Triple(#[from] TripleError),
    #[error("malformed polytope: {0}")]
    Structure(String),
    #[error("polytope is not simple: vertex {vertex} lies on facets {facets}")]
    NotSimple { vertex: String, facets: String },
    #[error("polytope has no vertices")]
    NoVertices,
    #[error("vertex structure depends on the parameter: samples {first} and {second} disagree")]
    SampleDependent { first: String, second: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Inward normal X_j.
    pub normal: Vec<Scalar>,
    /// λ_j in ⟨X_j, x⟩ ≥ λ_j.
    pub offset: Scalar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub coordinates: Vec<Scalar>,
    /// 1-based indices of the facets through the vertex, increasing.
    pub facets: Vec<usize>,
}

impl Vertex {
    pub fn coordinates_text(&self) -> String {
        let parts: Vec<String> = self.coordinates.iter().map(Scalar::pretty).collect();
        format!("({})", parts.join(", "))
    }
}

/// Parameter values used to decide signs the parameter field cannot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleConfig {
    pub primary: Option<BigRational>,
    pub secondary: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    domain: Domain,
    dim: usize,
    facets: Vec<Facet>,
    vertices: Vec<Vertex>,
}

fn fallback_samples(domain: &Domain, cfg: &SampleConfig) -> (BigRational, BigRational) {
    let primary = cfg
        .primary
        .clone()
        .or_else(|| domain.default_sample().cloned())
        .unwrap_or_else(|| parse_decimal("1.4142").unwrap());
    let mut secondary = cfg.secondary.clone().unwrap_or_else(|| parse_decimal("2.2361").unwrap());
    if secondary == primary {
        secondary = &primary + BigRational::new(1.into(), 7.into());
    }
    (primary, secondary)
}

/// Exact sign where decidable, otherwise the sign at `sample`.
fn sign_with(x: &Scalar, sample: Option<&BigRational>) -> Result<Sign, FieldError> {
    match (x.sign(), sample) {
        (Err(FieldError::IndeterminateSign { .. }), Some(s)) => x.sign_at(s),
        (r, _) => r,
    }
}

fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).fold(a[0].domain().zero(), |acc, (x, y)| &acc + &(x * y))
}

/// All k-subsets of 0..d in lexicographic order.
fn subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > d {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < d - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn enumerate(
    domain: &Domain,
    dim: usize,
    facets: &[Facet],
    sample: Option<&BigRational>,
) -> Result<Vec<Vertex>, PolytopeError> {
    let found: Vec<Option<Vertex>> = subsets(facets.len(), dim)
        .par_iter()
        .map(|subset| -> Result<Option<Vertex>, PolytopeError> {
            let rows: Vec<Vec<Scalar>> = subset.iter().map(|&j| facets[j].normal.clone()).collect();
            let a = Mat::from_rows(domain, rows)?;
            let b: Vec<Scalar> = subset.iter().map(|&j| facets[j].offset.clone()).collect();
            let v = match a.solve(&b) {
                Ok(v) => v,
                Err(LinalgError::Singular) => return Ok(None),
                Err(e) => return Err(e.into()),
            };
            let mut incident = Vec::new();
            for (j, f) in facets.iter().enumerate() {
                let slack = &dot(&f.normal, &v) - &f.offset;
                match sign_with(&slack, sample)? {
                    Sign::Negative => return Ok(None),
                    Sign::Zero => incident.push(j + 1),
                    Sign::Positive => {}
                }
            }
            Ok(Some(Vertex { coordinates: v, facets: incident }))
        })
        .collect::<Result<_, _>>()?;
    let mut vertices: Vec<Vertex> = Vec::new();
    for v in found.into_iter().flatten() {
        if let Some(existing) = vertices.iter_mut().find(|w| w.coordinates == v.coordinates) {
            for f in v.facets {
                if !existing.facets.contains(&f) {
                    existing.facets.push(f);
                }
            }
            existing.facets.sort_unstable();
        } else {
            vertices.push(v);
        }
    }
    if let Some(v) = vertices.iter().find(|v| v.facets.len() > dim) {
        return Err(PolytopeError::NotSimple { vertex: v.coordinates_text(), facets: cone_label(&v.facets) });
    }
    if vertices.is_empty() {
        return Err(PolytopeError::NoVertices);
    }
    vertices.sort_by(|a, b| a.facets.cmp(&b.facets));
    Ok(vertices)
}

fn summary(vertices: &[Vertex]) -> String {
    let parts: Vec<String> = vertices.iter().map(|v| cone_label(&v.facets)).collect();
    parts.join(" ")
}

impl Polytope {
    /// Builds the polytope and enumerates its vertices.
    ///
    /// Over a parameter field, signs that coefficient reasoning cannot fix are
    /// taken at a sample value, and the enumeration is repeated at a second
    /// sample; differing combinatorics are an error.
    pub fn new(
        domain: &Domain,
        dim: usize,
        facets: Vec<Facet>,
        samples: &SampleConfig,
    ) -> Result<Polytope, PolytopeError> {
        if dim == 0 {
            return Err(PolytopeError::Structure("dimension must be positive".into()));
        }
        if facets.len() < dim + 1 {
            return Err(PolytopeError::Structure(format!(
                "{} facets cannot bound a polytope in dimension {dim}",
                facets.len()
            )));
        }
        for (j, f) in facets.iter().enumerate() {
            if f.normal.len() != dim {
                return Err(PolytopeError::Structure(format!(
                    "normal X{} has length {}, expected {dim}",
                    j + 1,
                    f.normal.len()
                )));
            }
            if f.normal.iter().chain([&f.offset]).any(|x| x.domain() != domain) {
                return Err(FieldError::DomainMismatch.into());
            }
        }
        let vertices = if domain.kind() == DomainKind::RationalFunction {
            let (s1, s2) = fallback_samples(domain, samples);
            let first = enumerate(domain, dim, &facets, Some(&s1))?;
            let second = enumerate(domain, dim, &facets, Some(&s2))?;
            if first != second {
                return Err(PolytopeError::SampleDependent { first: summary(&first), second: summary(&second) });
            }
            first
        } else {
            enumerate(domain, dim, &facets, None)?
        };
        Ok(Polytope { domain: domain.clone(), dim, facets, vertices })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// One maximal cone per vertex, spanned by the normals of its facets.
    pub fn normal_fan(&self) -> Result<Fan, PolytopeError> {
        let rays = self.facets.iter().map(|f| f.normal.clone()).collect();
        let cones = self.vertices.iter().map(|v| v.facets.clone()).collect();
        Ok(Fan::new(self.dim, rays, cones)?)
    }

    pub fn to_triple(
        &self,
        lattice: Quasilattice,
        witnesses: Vec<Option<Witness>>,
        bound: i64,
    ) -> Result<FundamentalTriple, PolytopeError> {
        Ok(FundamentalTriple::new(self.normal_fan()?, lattice, witnesses, bound)?)
    }

    /// λ_j = min over vertices of ⟨X_j, v⟩, using the same sign rule as
    /// enumeration.
    pub fn derived_offsets(&self, samples: &SampleConfig) -> Result<Vec<Scalar>, PolytopeError> {
        let sample =
            (self.domain.kind() == DomainKind::RationalFunction).then(|| fallback_samples(&self.domain, samples).0);
        self.facets
            .iter()
            .map(|f| {
                let mut best: Option<Scalar> = None;
                for v in &self.vertices {
                    let value = dot(&f.normal, &v.coordinates);
                    let smaller = match &best {
                        None => true,
                        Some(b) => sign_with(&(&value - b), sample.as_ref())? == Sign::Negative,
                    };
                    if smaller {
                        best = Some(value);
                    }
                }
                Ok(best.expect("at least one vertex"))
            })
            .collect()
    }
}
