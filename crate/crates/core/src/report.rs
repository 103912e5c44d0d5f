//! Serializable reports and their text rendering.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::atlas::{Atlas, Chart, CocycleSummary, MonomialMap, OrbitCount, RelationSet};
use crate::document::Loaded;
use crate::field::{Domain, DomainKind, Scalar};
use crate::linalg::Mat;
use crate::polytope::Polytope;
use crate::triple::{cone_label, FundamentalTriple, ValidationReport};
use crate::verify::VerificationSummary;

pub const TOOL: &str = "quasifold";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliasInfo {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainInfo {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    /// Minimal polynomial coefficients, constant term first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_poly: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<AliasInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter_sample: Option<String>,
}

impl DomainInfo {
    pub fn of(domain: &Domain) -> DomainInfo {
        let kind = match domain.kind() {
            DomainKind::Rational => "rational",
            DomainKind::NumberField => "number_field",
            DomainKind::RationalFunction => "rational_function",
        };
        DomainInfo {
            kind: kind.into(),
            symbol: (domain.kind() != DomainKind::Rational).then(|| domain.symbol().to_string()),
            min_poly: domain.min_poly().map(|p| p.coeffs().iter().map(ToString::to_string).collect()),
            embedding: domain.embedding(),
            aliases: domain.aliases().map(|(n, v)| AliasInfo { name: n.into(), value: v.canonical_text() }).collect(),
            parameter_sample: domain.default_sample().map(decimal_text),
        }
    }

    pub fn text(&self) -> String {
        match (self.kind.as_str(), &self.symbol) {
            ("number_field", Some(s)) => {
                let mut out = format!("Q({s})");
                if let Some(p) = &self.min_poly {
                    let poly =
                        crate::field::QPoly::from_coeffs(p.iter().map(|c| c.parse().expect("rational text")).collect());
                    let _ = write!(out, ", {s} root of {}", poly_display(&poly, s));
                }
                if let Some(e) = self.embedding {
                    let _ = write!(out, " near {e:.4}");
                }
                for a in &self.aliases {
                    let _ = write!(out, ", {} = {}", a.name, a.value);
                }
                out
            }
            ("rational_function", Some(s)) => {
                let mut out = format!("Q({s}), {s} > 0");
                if let Some(v) = &self.parameter_sample {
                    let _ = write!(out, ", sample {s} = {v}");
                }
                out
            }
            _ => "Q".into(),
        }
    }
}

fn poly_display(p: &crate::field::QPoly, symbol: &str) -> String {
    let d = Domain::rational_function(symbol, false, None).expect("valid symbol");
    let x = d.generator().expect("parameter generator");
    let value = p.coeffs().iter().rev().fold(d.zero(), |acc, c| &(&acc * &x) + &d.from_rational(c.clone()));
    value.canonical_text()
}

/// Exact decimal expansion when the denominator divides a power of ten.
fn decimal_text(q: &BigRational) -> String {
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut scaled = q.clone();
    let mut digits = 0usize;
    while !scaled.is_integer() && digits < 30 {
        scaled *= &ten;
        digits += 1;
    }
    if digits == 0 || !scaled.is_integer() {
        return q.to_string();
    }
    let mut body = scaled.to_integer().abs().to_string();
    if body.len() <= digits {
        body = format!("{}{body}", "0".repeat(digits + 1 - body.len()));
    }
    let (int, frac) = body.split_at(body.len() - digits);
    format!("{}{int}.{frac}", if q.is_negative() { "-" } else { "" })
}

fn texts(m: &Mat) -> Vec<Vec<String>> {
    (0..m.rows()).map(|r| m.row(r).iter().map(Scalar::pretty).collect()).collect()
}

fn vector_texts(v: &[Scalar]) -> Vec<String> {
    v.iter().map(Scalar::pretty).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetRow {
    pub index: usize,
    pub normal: Vec<String>,
    pub offset: String,
}

/// One vertex with its cone and fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRow {
    pub label: String,
    pub vertex: Vec<String>,
    pub fixed_point: String,
    pub cone: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeSection {
    pub facets: Vec<FacetRow>,
    pub rows: Vec<VertexRow>,
}

impl PolytopeSection {
    pub fn of(p: &Polytope, t: &FundamentalTriple) -> PolytopeSection {
        let facets = p
            .facets()
            .iter()
            .enumerate()
            .map(|(j, f)| FacetRow { index: j + 1, normal: vector_texts(&f.normal), offset: f.offset.pretty() })
            .collect();
        let rows = p
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let fixed = crate::atlas::fixed_point(t, &v.facets);
                let parts: Vec<String> = fixed.iter().map(u8::to_string).collect();
                VertexRow {
                    label: format!("σ{}", i + 1),
                    vertex: vector_texts(&v.coordinates),
                    fixed_point: format!("[{}]", parts.join(":")),
                    cone: v.facets.clone(),
                }
            })
            .collect();
        PolytopeSection { facets, rows }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaGenerator {
    /// 1-based quasilattice generator index.
    pub generator: usize,
    pub exponents: Vec<String>,
    /// Integers subtracted from the raw exponents.
    pub integer_parts: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSection {
    pub cone: Vec<usize>,
    pub fixed_point: String,
    pub a_sigma: Vec<Vec<String>>,
    pub a_inv: Vec<Vec<String>>,
    /// Generators of Γ_σ with nonzero reduced exponents.
    pub gamma_generators: Vec<GammaGenerator>,
}

impl ChartSection {
    pub fn of(c: &Chart) -> ChartSection {
        let gamma_generators = c
            .nonzero_gamma_columns()
            .into_iter()
            .map(|l| GammaGenerator {
                generator: l + 1,
                exponents: vector_texts(&c.gamma_exponents.column(l)),
                integer_parts: c.gamma_integer_parts.iter().map(|row| row[l]).collect(),
            })
            .collect();
        ChartSection {
            cone: c.cone.clone(),
            fixed_point: c.fixed_point_text(),
            a_sigma: texts(&c.a_sigma),
            a_inv: texts(&c.a_inv),
            gamma_generators,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionSection {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    pub h: usize,
    /// Disjoint index sets: the map is only asserted on the dense orbit.
    pub extension: bool,
    /// Rows are labelled by `to`, columns by `from`.
    pub exponents: Vec<Vec<String>>,
    pub rendered: String,
}

impl TransitionSection {
    pub fn of(m: &MonomialMap) -> TransitionSection {
        TransitionSection {
            from: m.from_cone.clone(),
            to: m.to_cone.clone(),
            h: m.h,
            extension: m.is_extension(),
            exponents: texts(&m.exponents),
            rendered: m.render(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRow {
    pub index: usize,
    pub coefficients: Vec<String>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationSection {
    pub cone: Vec<usize>,
    pub relations: Vec<RelationRow>,
    pub kernel_vectors: Vec<Vec<String>>,
}

impl RelationSection {
    pub fn of(r: &RelationSet) -> RelationSection {
        RelationSection {
            cone: r.base_cone.clone(),
            relations: r
                .relations
                .iter()
                .map(|rel| RelationRow {
                    index: rel.index,
                    coefficients: vector_texts(&rel.coefficients),
                    text: r.relation_text(rel),
                })
                .collect(),
            kernel_vectors: r.kernel_vectors.iter().map(|v| vector_texts(v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyRow {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub shared: Vec<usize>,
    pub h: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasSection {
    pub charts: Vec<ChartSection>,
    pub transitions: Vec<TransitionSection>,
    pub relations: Vec<RelationSection>,
    pub orbits: Vec<OrbitCount>,
    pub cocycle: CocycleSummary,
    pub adjacency: Vec<AdjacencyRow>,
}

impl AtlasSection {
    pub fn of(atlas: &Atlas, t: &FundamentalTriple) -> AtlasSection {
        let cones = t.fan().max_cones();
        AtlasSection {
            charts: atlas.charts.iter().map(ChartSection::of).collect(),
            transitions: atlas.transitions.iter().map(TransitionSection::of).collect(),
            relations: atlas.relations.iter().map(RelationSection::of).collect(),
            orbits: atlas.orbits.clone(),
            cocycle: atlas.cocycle_check(),
            adjacency: t
                .cone_adjacency()
                .into_iter()
                .map(|a| AdjacencyRow {
                    first: cones[a.first].clone(),
                    second: cones[a.second].clone(),
                    shared: a.shared,
                    h: a.h,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input: String,
    pub seed: u64,
    pub domain: DomainInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polytope: Option<PolytopeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atlas: Option<AtlasSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<TransitionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str, loaded: &Loaded, seed: u64) -> Report {
        Report {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            input: loaded.name.clone(),
            seed,
            domain: DomainInfo::of(&loaded.domain),
            validation: None,
            polytope: None,
            atlas: None,
            transition: None,
            verification: None,
            notes: Vec::new(),
        }
    }

    /// True when no contained section reports a failure.
    pub fn passed(&self) -> bool {
        self.validation.as_ref().is_none_or(ValidationReport::passed)
            && self.atlas.as_ref().is_none_or(|a| a.cocycle.passed())
            && self.verification.as_ref().is_none_or(VerificationSummary::passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Replaces the notes with the standing remarks for the sections present.
    pub fn annotate(&mut self) {
        self.notes.clear();
        if self.atlas.is_some() || self.transition.is_some() {
            self.notes.push(
                "Γ_σ is listed by canonical generator exponents A_σ⁻¹g with integer entries removed; \
                 other generating sets of the same group are equally valid"
                    .into(),
            );
        }
        let extension = self.atlas.as_ref().is_some_and(|a| a.transitions.iter().any(|t| t.extension))
            || self.transition.as_ref().is_some_and(|t| t.extension);
        if extension {
            self.notes.push(
                "transitions between cones with disjoint index sets (h = n) are marked as extensions: valid on the dense orbit"
                    .into(),
            );
        }
        if self.polytope.is_some() {
            self.notes.push(
                "facet offsets fix one polytope among many with the same normal fan; only the fan is used downstream"
                    .into(),
            );
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {}  command: {}  input: {}  seed: {}",
            self.tool, self.version, self.command, self.input, self.seed
        );
        let _ = writeln!(out, "domain: {}", self.domain.text());
        if let Some(v) = &self.validation {
            let _ = writeln!(out, "\nvalidation");
            for c in &v.checks {
                let status = match (c.passed, c.advisory) {
                    (true, _) => "pass",
                    (false, true) => "warn",
                    (false, false) => "FAIL",
                };
                let _ = writeln!(out, "  {:<18} {status}", c.name);
                for d in &c.details {
                    let _ = writeln!(out, "    {d}");
                }
            }
        }
        if let Some(p) = &self.polytope {
            let _ = writeln!(out, "\npolytope");
            for f in &p.facets {
                let _ = writeln!(out, "  X{:<3} = ({})  offset {}", f.index, f.normal.join(", "), f.offset);
            }
            let rows: Vec<[String; 4]> = p
                .rows
                .iter()
                .map(|r| {
                    [r.label.clone(), format!("({})", r.vertex.join(", ")), r.fixed_point.clone(), cone_label(&r.cone)]
                })
                .collect();
            let header = ["σ".to_string(), "vertex".into(), "fixed point".into(), "I_σ".into()];
            write_table(&mut out, &header, &rows);
        }
        if let Some(a) = &self.atlas {
            let _ = writeln!(out, "\ncharts");
            for c in &a.charts {
                let _ = writeln!(out, "  {}  fixed point {}", cone_label(&c.cone), c.fixed_point);
                let _ = writeln!(out, "    A_sigma = {}", matrix_text(&c.a_sigma));
                let _ = writeln!(out, "    A_inv   = {}", matrix_text(&c.a_inv));
                if c.gamma_generators.is_empty() {
                    let _ = writeln!(out, "    Γ trivial");
                }
                for g in &c.gamma_generators {
                    let _ = writeln!(out, "    Γ from g{}: ({})", g.generator, g.exponents.join(", "));
                }
            }
            let _ = writeln!(out, "\ntransitions");
            for t in &a.transitions {
                write_transition(&mut out, t);
            }
            let _ = writeln!(out, "\nrelations");
            for r in &a.relations {
                let _ = writeln!(out, "  {}", cone_label(&r.cone));
                for rel in &r.relations {
                    let _ = writeln!(out, "    {}", rel.text);
                }
            }
            let _ = writeln!(out, "\norbits");
            for o in &a.orbits {
                let _ = writeln!(out, "  cone dim {}  orbit dim {}  count {}", o.cone_dim, o.orbit_dim, o.count);
            }
            let _ = writeln!(
                out,
                "\ncocycle: {} pairs, {} triples, {} violations",
                a.cocycle.pairs_checked,
                a.cocycle.triples_checked,
                a.cocycle.violations.len()
            );
            for v in &a.cocycle.violations {
                let _ = writeln!(out, "  {v}");
            }
            let _ = writeln!(out, "\nadjacency");
            for p in &a.adjacency {
                let _ = writeln!(
                    out,
                    "  {} {}  shared {}  h = {}",
                    cone_label(&p.first),
                    cone_label(&p.second),
                    cone_label(&p.shared),
                    p.h
                );
            }
        }
        if let Some(t) = &self.transition {
            let _ = writeln!(out, "\ntransition");
            write_transition(&mut out, t);
        }
        if let Some(v) = &self.verification {
            let _ = writeln!(out, "\nverification");
            for (name, r) in v.reports() {
                let skipped: usize = r.breakdown.iter().map(|b| b.skipped).sum();
                let _ = writeln!(
                    out,
                    "  {name:<24} {}  trials {}  skipped {}  max deviation {:.3e}  failures {}",
                    if r.passed() { "pass" } else { "FAIL" },
                    r.trials,
                    skipped,
                    r.max_deviation,
                    r.failures.len()
                );
                for f in r.failures.iter().take(5) {
                    let _ = writeln!(
                        out,
                        "    {} trial {} seed {}: {:?} {:.3e}",
                        f.context, f.trial, f.seed, f.kind, f.deviation
                    );
                }
            }
        }
        if !self.notes.is_empty() {
            let _ = writeln!(out, "\nnotes");
            for n in &self.notes {
                let _ = writeln!(out, "  - {n}");
            }
        }
        let _ = writeln!(out, "\nresult: {}", if self.passed() { "pass" } else { "FAIL" });
        out
    }
}

fn matrix_text(rows: &[Vec<String>]) -> String {
    let parts: Vec<String> = rows.iter().map(|r| format!("[{}]", r.join(", "))).collect();
    format!("[{}]", parts.join(", "))
}

fn write_transition(out: &mut String, t: &TransitionSection) {
    let tag = if t.extension { "  (extension: dense orbit)" } else { "" };
    let _ = writeln!(out, "  {} -> {}  {}{tag}", cone_label(&t.from), cone_label(&t.to), t.rendered);
    let _ = writeln!(out, "    E = {}  h = {}", matrix_text(&t.exponents), t.h);
}

fn write_table(out: &mut String, header: &[String; 4], rows: &[[String; 4]]) {
    let mut widths = header.clone().map(|h| h.chars().count());
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    for r in std::iter::once(header).chain(rows) {
        let mut line = String::from(" ");
        for (w, c) in widths.iter().zip(r) {
            let pad = w - c.chars().count();
            let _ = write!(line, " {c}{}", " ".repeat(pad + 1));
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
}

/// Validation, polytope table, atlas and numeric verification in one report.
pub fn full_report(command: &str, loaded: &Loaded) -> Result<Report, crate::triple::TripleError> {
    let t = &loaded.triple;
    let mut report = Report::new(command, loaded, loaded.trial.seed);
    report.validation = Some(t.validate(&loaded.probe));
    report.polytope = loaded.polytope.as_ref().map(|p| PolytopeSection::of(p, t));
    let atlas = Atlas::compile(t)?;
    report.atlas = Some(AtlasSection::of(&atlas, t));
    let numeric = crate::verify::NumericAtlas::new(t, &atlas, loaded.trial.parameter_sample)?;
    report.verification = Some(crate::verify::verify_all(&numeric, &loaded.trial));
    report.annotate();
    Ok(report)
}
