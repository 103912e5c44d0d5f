//! JSON input documents and the built-in gallery.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{parse_decimal, Domain, FieldError, QPoly, Scalar};
use crate::polytope::{Facet, Polytope, PolytopeError, SampleConfig};
use crate::triple::{Fan, FundamentalTriple, ProbeConfig, Quasilattice, TripleError, Witness, DEFAULT_WITNESS_BOX};
use crate::verify::TrialConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocumentError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{path}: {source}")]
    Scalar { path: String, source: FieldError },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Triple(#[from] TripleError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error("unknown gallery entry `{name}`; available: {available}")]
    UnknownGallery { name: String, available: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKindSpec {
    Rational,
    NumberField,
    RationalFunction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AliasSpec {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKindSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    /// Coefficients of the monic minimal polynomial, constant term first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_poly: Option<Vec<String>>,
    /// Decimal approximation of the chosen real root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<AliasSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_sample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanSpec {
    pub rays: Vec<Vec<String>>,
    /// 1-based ray indices.
    pub max_cones: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<Option<Witness>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetSpec {
    pub normal: Vec<String>,
    pub offset: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeSpec {
    pub facets: Vec<FacetSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integer_box: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Search box for witness recovery.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_box: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_samples: Option<usize>,
    /// Parameter values for sign decisions in polytope enumeration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration_samples: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub domain: DomainSpec,
    /// Generator vectors of the quasilattice.
    pub quasilattice: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fan: Option<FanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polytope: Option<PolytopeSpec>,
    /// Witnesses for polytope inputs (fan inputs carry their own).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<Option<Witness>>>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub options: Options,
}

fn is_default(o: &Options) -> bool {
    *o == Options::default()
}

/// Command-line adjustments applied while building a document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Overrides {
    /// (symbol, value) replacing the parameter's default sample.
    pub parameter: Option<(String, BigRational)>,
    pub seed: u64,
}

/// A document turned into exact objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub name: String,
    pub domain: Domain,
    pub polytope: Option<Polytope>,
    pub triple: FundamentalTriple,
    pub probe: ProbeConfig,
    pub trial: TrialConfig,
    pub samples: SampleConfig,
    pub witness_box: i64,
}

fn parse_at(domain: &Domain, text: &str, path: impl FnOnce() -> String) -> Result<Scalar, DocumentError> {
    domain.parse(text).map_err(|source| DocumentError::Scalar { path: path(), source })
}

fn parse_vectors(domain: &Domain, rows: &[Vec<String>], what: &str) -> Result<Vec<Vec<Scalar>>, DocumentError> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter().enumerate().map(|(j, s)| parse_at(domain, s, || format!("{what}[{i}][{j}]"))).collect()
        })
        .collect()
}

fn decimal(text: &str, path: &str) -> Result<BigRational, DocumentError> {
    parse_decimal(text).map_err(|source| DocumentError::Scalar { path: path.into(), source })
}

impl InputDocument {
    pub fn from_json(text: &str) -> Result<InputDocument, DocumentError> {
        serde_json::from_str(text).map_err(|e| DocumentError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn build_domain(&self, overrides: &Overrides) -> Result<Domain, DocumentError> {
        let spec = &self.domain;
        let symbol = || spec.symbol.clone().ok_or_else(|| DocumentError::Invalid("domain.symbol is required".into()));
        let mut domain = match spec.kind {
            DomainKindSpec::Rational => Domain::rational(),
            DomainKindSpec::NumberField => {
                let coeffs = spec
                    .min_poly
                    .as_ref()
                    .ok_or_else(|| DocumentError::Invalid("domain.min_poly is required for a number field".into()))?
                    .iter()
                    .enumerate()
                    .map(|(i, c)| decimal(c, &format!("domain.min_poly[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let embedding = spec
                    .embedding
                    .as_ref()
                    .ok_or_else(|| DocumentError::Invalid("domain.embedding is required for a number field".into()))?;
                Domain::number_field(&symbol()?, QPoly::from_coeffs(coeffs), &decimal(embedding, "domain.embedding")?)?
            }
            DomainKindSpec::RationalFunction => {
                let symbol = symbol()?;
                let mut sample =
                    spec.default_sample.as_deref().map(|s| decimal(s, "domain.default_sample")).transpose()?;
                if let Some((name, value)) = &overrides.parameter {
                    if *name != symbol {
                        return Err(DocumentError::Invalid(format!(
                            "parameter `{name}` does not match the domain parameter `{symbol}`"
                        )));
                    }
                    sample = Some(value.clone());
                }
                Domain::rational_function(&symbol, spec.positive.unwrap_or(true), sample)?
            }
        };
        if overrides.parameter.is_some() && spec.kind != DomainKindSpec::RationalFunction {
            return Err(DocumentError::Invalid("--param applies only to rational-function domains".into()));
        }
        for (i, alias) in spec.aliases.iter().enumerate() {
            domain = domain
                .with_alias(&alias.name, &alias.value)
                .map_err(|source| DocumentError::Scalar { path: format!("domain.aliases[{i}]"), source })?;
        }
        Ok(domain)
    }

    pub fn build(&self, overrides: &Overrides) -> Result<Loaded, DocumentError> {
        let domain = self.build_domain(overrides)?;
        let opts = &self.options;
        let witness_box = opts.witness_box.unwrap_or(DEFAULT_WITNESS_BOX);
        let samples = match &opts.enumeration_samples {
            Some([a, b]) => SampleConfig {
                primary: Some(decimal(a, "options.enumeration_samples[0]")?),
                secondary: Some(decimal(b, "options.enumeration_samples[1]")?),
            },
            None => SampleConfig { primary: domain.default_sample().cloned(), secondary: None },
        };

        let vectors = parse_vectors(&domain, &self.quasilattice, "quasilattice")?;
        let dim = vectors.first().map_or(0, Vec::len);
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(DocumentError::Invalid(
                "quasilattice generators must be nonempty vectors of equal length".into(),
            ));
        }
        let lattice = Quasilattice::from_vectors(&domain, dim, &vectors)?;

        let (polytope, triple) = match (&self.fan, &self.polytope) {
            (Some(fan), None) => {
                let rays = parse_vectors(&domain, &fan.rays, "fan.rays")?;
                let witnesses =
                    fan.witnesses.clone().or_else(|| self.witnesses.clone()).unwrap_or_else(|| vec![None; rays.len()]);
                let fan = Fan::new(dim, rays, fan.max_cones.clone())?;
                (None, FundamentalTriple::new(fan, lattice, witnesses, witness_box)?)
            }
            (None, Some(p)) => {
                let facets = p
                    .facets
                    .iter()
                    .enumerate()
                    .map(|(j, f)| {
                        let normal = f
                            .normal
                            .iter()
                            .enumerate()
                            .map(|(i, s)| parse_at(&domain, s, || format!("polytope.facets[{j}].normal[{i}]")))
                            .collect::<Result<Vec<_>, _>>()?;
                        let offset = parse_at(&domain, &f.offset, || format!("polytope.facets[{j}].offset"))?;
                        Ok(Facet { normal, offset })
                    })
                    .collect::<Result<Vec<_>, DocumentError>>()?;
                let count = facets.len();
                let polytope = Polytope::new(&domain, dim, facets, &samples)?;
                let witnesses = self.witnesses.clone().unwrap_or_else(|| vec![None; count]);
                let triple = polytope.to_triple(lattice, witnesses, witness_box)?;
                (Some(polytope), triple)
            }
            _ => return Err(DocumentError::Invalid("exactly one of `fan` and `polytope` must be present".into())),
        };

        let v = opts.verify.clone().unwrap_or_default();
        let defaults = TrialConfig::default();
        let parameter_sample = domain.default_sample().and_then(|s| s.to_f64());
        let trial = TrialConfig {
            samples: v.samples.unwrap_or(defaults.samples),
            seed: overrides.seed,
            tolerance: v.tolerance.unwrap_or(defaults.tolerance),
            word_length: v.word_length.unwrap_or(defaults.word_length),
            integer_box: v.integer_box.unwrap_or(defaults.integer_box),
            parameter_sample,
        };
        if trial.samples == 0 || trial.tolerance.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(DocumentError::Invalid("options.verify needs samples ≥ 1 and tolerance > 0".into()));
        }
        let probe = ProbeConfig {
            samples: opts.probe_samples.unwrap_or(ProbeConfig::default().samples),
            seed: overrides.seed,
            parameter_sample,
            ..ProbeConfig::default()
        };
        Ok(Loaded {
            name: self.name.clone().unwrap_or_else(|| "input".into()),
            domain,
            polytope,
            triple,
            probe,
            trial,
            samples,
            witness_box,
        })
    }
}

impl Loaded {
    /// Substitutes a rational value for the parameter everywhere.
    pub fn specialize(&self, value: &BigRational) -> Result<Loaded, DocumentError> {
        let rational = Domain::rational();
        let triple = self.triple.specialize(value)?;
        let polytope = match &self.polytope {
            Some(p) => {
                let facets = p
                    .facets()
                    .iter()
                    .map(|f| {
                        Ok(Facet {
                            normal: f
                                .normal
                                .iter()
                                .map(|x| x.specialize(value))
                                .collect::<Result<Vec<_>, FieldError>>()?,
                            offset: f.offset.specialize(value)?,
                        })
                    })
                    .collect::<Result<Vec<_>, FieldError>>()?;
                Some(Polytope::new(&rational, p.dim(), facets, &SampleConfig::default())?)
            }
            None => None,
        };
        if let Some(p) = &polytope {
            let cones: Vec<Vec<usize>> = p.vertices().iter().map(|v| v.facets.clone()).collect();
            if cones != triple.fan().max_cones() {
                return Err(DocumentError::Invalid("specialization changes the combinatorics of the polytope".into()));
            }
        }
        let parameter_sample = value.to_f64();
        Ok(Loaded {
            name: self.name.clone(),
            domain: rational,
            polytope,
            triple,
            probe: ProbeConfig { parameter_sample, ..self.probe.clone() },
            trial: TrialConfig { parameter_sample, ..self.trial.clone() },
            samples: SampleConfig::default(),
            witness_box: self.witness_box,
        })
    }
}

/// The built-in examples.
pub mod gallery {
    use super::{DocumentError, InputDocument};

    pub const NAMES: [&str; 5] = ["quasisphere", "cp2-11a", "hirzebruch", "kite", "dodecahedron"];

    pub fn source(name: &str) -> Result<&'static str, DocumentError> {
        Ok(match name {
            "quasisphere" => include_str!("../gallery/quasisphere.json"),
            "cp2-11a" => include_str!("../gallery/cp2-11a.json"),
            "hirzebruch" => include_str!("../gallery/hirzebruch.json"),
            "kite" => include_str!("../gallery/kite.json"),
            "dodecahedron" => include_str!("../gallery/dodecahedron.json"),
            _ => return Err(DocumentError::UnknownGallery { name: name.into(), available: NAMES.join(", ") }),
        })
    }

    pub fn load(name: &str) -> Result<InputDocument, DocumentError> {
        InputDocument::from_json(source(name)?)
    }
}
