//! The `.nomo` system-file format and the initial-guess mini-language.
//!
//! A system file is UTF-8 text: `#` starts a comment, records are
//! whitespace-separated, indices are 1-based. Layout:
//!
//! ```text
//! nomo 1                                  # format version
//! class e   fermion         2 4           # label kind n_particles n_orbitals
//! class b   boson           2 2
//! emin -2.0                               # optional energy window metadata
//! emax  2.0
//! h 1 2 0.5                               # one-body integral h_pq
//! V 1 2 1 2 0.25                          # two-body integral V_pqrs
//! ```
//!
//! Classes must be declared fermions first (the canonical index order);
//! storing h_pq implies h_qp and V_pqrs implies V_rspq, with conflicting
//! duplicates rejected naming both lines.

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{enumerate_configurations, ClassConstraint, Configuration, ConfigurationBasis};
use crate::hamiltonian::{assemble_hamiltonian, IntegralTable, INTEGRAL_CONFLICT_TOL};
use crate::matrix::{build_matrix, Spectrum};
use crate::particles::{build_indexing, ParticleClassSpec, ParticleKind, SpinOrbitalIndexing};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystemMetadata {
    pub e_min: Option<f64>,
    pub e_max: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SystemFile {
    pub indexing: SpinOrbitalIndexing,
    pub integrals: IntegralTable,
    pub metadata: SystemMetadata,
    /// Number of h/V records after Hermitian deduplication.
    pub n_records: usize,
}

struct Cursor<'a> {
    line_no: usize,
    line: &'a str,
    /// byte offset of the next unread token
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line_no,
            column,
            message: message.into(),
        }
    }

    fn next_token(&mut self) -> Option<(usize, &'a str)> {
        let rest = &self.line[self.pos..];
        let skipped = rest.len() - rest.trim_start().len();
        let start = self.pos + skipped;
        let rest = &self.line[start..];
        if rest.is_empty() {
            return None;
        }
        let end = rest
            .find(char::is_whitespace)
            .map(|i| start + i)
            .unwrap_or(self.line.len());
        self.pos = end;
        Some((start + 1, &self.line[start..end])) // 1-based column
    }

    fn expect_token(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_token()
            .ok_or_else(|| self.error(self.line.len() + 1, format!("expected {what}")))
    }

    fn expect_end(&mut self) -> Result<()> {
        if let Some((col, tok)) = self.next_token() {
            return Err(self.error(col, format!("unexpected trailing token `{tok}`")));
        }
        Ok(())
    }

    fn parse_usize(&mut self, what: &str) -> Result<(usize, usize)> {
        let (col, tok) = self.expect_token(what)?;
        let v = tok
            .parse::<usize>()
            .map_err(|_| self.error(col, format!("{what} must be a non-negative integer, got `{tok}`")))?;
        Ok((col, v))
    }

    fn parse_f64(&mut self, what: &str) -> Result<f64> {
        let (col, tok) = self.expect_token(what)?;
        let v = tok
            .parse::<f64>()
            .map_err(|_| self.error(col, format!("{what} must be a number, got `{tok}`")))?;
        if !v.is_finite() {
            return Err(self.error(col, format!("{what} must be finite, got `{tok}`")));
        }
        Ok(v)
    }
}

/// Parses system-file text into the index space, integral tables and
/// metadata. Errors carry 1-based line and column positions.
pub fn parse_system(text: &str) -> Result<SystemFile> {
    let mut classes: Vec<ParticleClassSpec> = Vec::new();
    let mut metadata = SystemMetadata::default();
    let mut integrals = IntegralTable::new();
    let mut version_seen = false;
    let mut classes_closed = false;
    let mut n_records = 0usize;
    // canonical key -> (value, first line) for conflict messages
    let mut one_lines: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    let mut two_lines: BTreeMap<(usize, usize, usize, usize), (f64, usize)> = BTreeMap::new();

    let mut indexing: Option<SpinOrbitalIndexing> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let mut cur = Cursor {
            line_no: i + 1,
            line,
            pos: 0,
        };
        let (kcol, keyword) = cur.expect_token("a record keyword")?;

        if !version_seen {
            if keyword != "nomo" {
                return Err(cur.error(kcol, "file must start with a `nomo <version>` line"));
            }
            let (vcol, v) = cur.parse_usize("format version")?;
            if v != FORMAT_VERSION as usize {
                return Err(cur.error(vcol, format!("unsupported format version {v}")));
            }
            cur.expect_end()?;
            version_seen = true;
            continue;
        }

        match keyword {
            "class" => {
                if classes_closed {
                    return Err(cur.error(kcol, "class declarations must precede all other records"));
                }
                let (_, label) = cur.expect_token("a class label")?;
                let (kindcol, kind) = cur.expect_token("a particle kind")?;
                let kind = match kind {
                    "fermion" => ParticleKind::Fermion,
                    "boson" => ParticleKind::Boson,
                    "distinguishable" => ParticleKind::Distinguishable,
                    other => {
                        return Err(cur.error(
                            kindcol,
                            format!("unknown particle kind `{other}` (fermion | boson | distinguishable)"),
                        ))
                    }
                };
                let (_, n_particles) = cur.parse_usize("the particle count")?;
                let (ocol, n_orbitals) = cur.parse_usize("the spin-orbital count")?;
                if n_orbitals == 0 {
                    return Err(cur.error(ocol, "a class needs at least one spin orbital"));
                }
                if classes.iter().any(|c| c.label == label) {
                    return Err(cur.error(kcol, format!("duplicate class label `{label}`")));
                }
                cur.expect_end()?;
                classes.push(ParticleClassSpec::new(kind, n_particles, n_orbitals, label));
            }
            "emin" | "emax" => {
                finalize_classes(&mut classes_closed, &classes, &mut indexing, &cur, kcol)?;
                let value = cur.parse_f64("the energy bound")?;
                let slot = if keyword == "emin" {
                    &mut metadata.e_min
                } else {
                    &mut metadata.e_max
                };
                if slot.is_some() {
                    return Err(cur.error(kcol, format!("duplicate `{keyword}` record")));
                }
                *slot = Some(value);
                cur.expect_end()?;
            }
            "h" => {
                finalize_classes(&mut classes_closed, &classes, &mut indexing, &cur, kcol)?;
                let total = indexing.as_ref().expect("set by finalize").total();
                let (_, p) = parse_index(&mut cur, "p", total)?;
                let (_, q) = parse_index(&mut cur, "q", total)?;
                let value = cur.parse_f64("the integral value")?;
                cur.expect_end()?;
                let key = if p <= q { (p, q) } else { (q, p) };
                match one_lines.get(&key) {
                    Some(&(old, old_line)) if (old - value).abs() > INTEGRAL_CONFLICT_TOL => {
                        return Err(cur.error(
                            kcol,
                            format!(
                                "h({p},{q}) = {value} conflicts with h = {old} on line {old_line}"
                            ),
                        ));
                    }
                    Some(_) => {}
                    None => {
                        one_lines.insert(key, (value, cur.line_no));
                        integrals.set_one_body(p, q, value)?;
                        n_records += 1;
                    }
                }
            }
            "V" | "v" => {
                finalize_classes(&mut classes_closed, &classes, &mut indexing, &cur, kcol)?;
                let total = indexing.as_ref().expect("set by finalize").total();
                let (_, p) = parse_index(&mut cur, "p", total)?;
                let (_, q) = parse_index(&mut cur, "q", total)?;
                let (_, r) = parse_index(&mut cur, "r", total)?;
                let (_, s) = parse_index(&mut cur, "s", total)?;
                let value = cur.parse_f64("the integral value")?;
                cur.expect_end()?;
                let key = std::cmp::min((p, q, r, s), (r, s, p, q));
                match two_lines.get(&key) {
                    Some(&(old, old_line)) if (old - value).abs() > INTEGRAL_CONFLICT_TOL => {
                        return Err(cur.error(
                            kcol,
                            format!(
                                "V({p},{q},{r},{s}) = {value} conflicts with V = {old} on line {old_line}"
                            ),
                        ));
                    }
                    Some(_) => {}
                    None => {
                        two_lines.insert(key, (value, cur.line_no));
                        integrals.set_two_body(p, q, r, s, value)?;
                        n_records += 1;
                    }
                }
            }
            other => {
                return Err(cur.error(kcol, format!("unknown record keyword `{other}`")));
            }
        }
    }

    if !version_seen {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty file: expected a `nomo <version>` line".into(),
        });
    }
    if indexing.is_none() {
        let cur = Cursor {
            line_no: text.lines().count().max(1),
            line: "",
            pos: 0,
        };
        finalize_classes(&mut classes_closed, &classes, &mut indexing, &cur, 1)?;
    }
    let indexing = indexing.expect("finalized above");
    if let (Some(lo), Some(hi)) = (metadata.e_min, metadata.e_max) {
        if lo >= hi {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                column: 1,
                message: format!("emin {lo} must be below emax {hi}"),
            });
        }
    }
    Ok(SystemFile {
        indexing,
        integrals,
        metadata,
        n_records,
    })
}

fn parse_index(cur: &mut Cursor<'_>, what: &str, total: usize) -> Result<(usize, usize)> {
    let (col, v) = cur.parse_usize(&format!("index {what}"))?;
    if v < 1 || v > total {
        return Err(cur.error(
            col,
            format!("index {what} = {v} outside 1..={total}"),
        ));
    }
    Ok((col, v))
}

fn finalize_classes(
    closed: &mut bool,
    classes: &[ParticleClassSpec],
    indexing: &mut Option<SpinOrbitalIndexing>,
    cur: &Cursor<'_>,
    col: usize,
) -> Result<()> {
    if *closed {
        return Ok(());
    }
    if classes.is_empty() {
        return Err(cur.error(col, "at least one class must be declared first"));
    }
    let built = build_indexing(classes).map_err(|e| cur.error(col, e.to_string()))?;
    let declared: Vec<&str> = classes.iter().map(|c| c.label.as_str()).collect();
    let canonical: Vec<&str> = built.classes().iter().map(|c| c.label.as_str()).collect();
    if declared != canonical {
        return Err(cur.error(
            col,
            "classes must be declared in canonical order (all fermion classes first)",
        ));
    }
    *indexing = Some(built);
    *closed = true;
    Ok(())
}

impl SystemFile {
    /// Fixed-particle-number constraints per class, with the S_z = 0 filter
    /// switched on for the named classes.
    pub fn constraints(&self, sz_zero_labels: &[String]) -> Result<Vec<ClassConstraint>> {
        for label in sz_zero_labels {
            let k = self
                .indexing
                .class_by_label(label)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown class `{label}`")))?;
            let class = &self.indexing.classes()[k];
            if class.kind != ParticleKind::Fermion {
                return Err(Error::InvalidArgument(format!(
                    "the S_z = 0 filter applies to fermion classes; `{label}` is {}",
                    class.kind
                )));
            }
        }
        Ok(self
            .indexing
            .classes()
            .iter()
            .map(|c| ClassConstraint {
                n_particles: c.n_particles,
                sz_zero: sz_zero_labels.iter().any(|l| l == &c.label),
            })
            .collect())
    }

    pub fn build_basis(&self, sz_zero_labels: &[String]) -> Result<ConfigurationBasis> {
        let constraints = self.constraints(sz_zero_labels)?;
        enumerate_configurations(&self.indexing, Some(&constraints))
    }

    /// Dense Hamiltonian matrix over `basis`.
    pub fn dense_matrix(&self, basis: &ConfigurationBasis) -> Result<DMatrix<f64>> {
        let h = assemble_hamiltonian(&self.integrals, &self.indexing)?;
        Ok(build_matrix(&h, basis)?.to_dense())
    }
}

/// Materializes a guess specification as a normalized vector over the
/// configuration basis.
pub fn build_guess(
    spec: &GuessSpec,
    basis: &ConfigurationBasis,
    spectrum: &Spectrum,
) -> Result<DVector<f64>> {
    match spec {
        GuessSpec::Ground => Ok(spectrum.eigenvector(0)),
        GuessSpec::Excited(k) => {
            if *k >= spectrum.eigenvalues.len() {
                return Err(Error::InvalidArgument(format!(
                    "excited:{k} out of range: only {} states",
                    spectrum.eigenvalues.len()
                )));
            }
            Ok(spectrum.eigenvector(*k))
        }
        GuessSpec::Determinant(occ) => {
            let config = Configuration::new(occ.clone());
            let i = basis.position(&config).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "configuration {config} is not in the {}-state basis",
                    basis.len()
                ))
            })?;
            let mut v = DVector::zeros(basis.len());
            v[i] = 1.0;
            Ok(v)
        }
        GuessSpec::File(path) => {
            let text = std::fs::read_to_string(path)?;
            let mut amps = Vec::new();
            for tok in text.split_whitespace() {
                let v = tok.parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!("amplitude `{tok}` is not a number"))
                })?;
                amps.push(v);
            }
            if amps.len() != basis.len() {
                return Err(Error::InvalidArgument(format!(
                    "amplitude vector has {} entries, basis has {}",
                    amps.len(),
                    basis.len()
                )));
            }
            let v = DVector::from_vec(amps);
            let norm = v.norm();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidArgument(format!(
                    "amplitude vector norm {norm} deviates from 1 by more than 1e-6"
                )));
            }
            Ok(v / norm)
        }
    }
}

/// Initial-guess mini-language:
/// `ground` | `excited:K` | `det:OCCSTRING` | `file:PATH`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuessSpec {
    /// Lowest eigenstate (useful for analytic checks, overlap 1).
    Ground,
    /// K-th excited eigenstate (K >= 1).
    Excited(usize),
    /// A single configuration given as one occupation digit per spin
    /// orbital, e.g. `det:1100`.
    Determinant(Vec<u8>),
    /// Whitespace-separated amplitude vector over the configuration basis.
    File(PathBuf),
}

pub fn parse_guess(text: &str) -> Result<GuessSpec> {
    let bad = |message: String| Error::Parse {
        line: 1,
        column: 1,
        message,
    };
    if text == "ground" {
        return Ok(GuessSpec::Ground);
    }
    if let Some(rest) = text.strip_prefix("excited:") {
        let k = rest
            .parse::<usize>()
            .map_err(|_| bad(format!("excitation level must be an integer, got `{rest}`")))?;
        if k == 0 {
            return Err(bad("excited:0 is the ground state; use `ground`".into()));
        }
        return Ok(GuessSpec::Excited(k));
    }
    if let Some(rest) = text.strip_prefix("det:") {
        if rest.is_empty() {
            return Err(bad("det: needs one occupation digit per spin orbital".into()));
        }
        let mut occ = Vec::with_capacity(rest.len());
        for c in rest.chars() {
            let d = c
                .to_digit(10)
                .ok_or_else(|| bad(format!("occupation `{c}` is not a digit")))?;
            occ.push(d as u8);
        }
        return Ok(GuessSpec::Determinant(occ));
    }
    if let Some(rest) = text.strip_prefix("file:") {
        if rest.is_empty() {
            return Err(bad("file: needs a path".into()));
        }
        return Ok(GuessSpec::File(PathBuf::from(rest)));
    }
    Err(bad(format!(
        "unknown guess `{text}` (ground | excited:K | det:OCCSTRING | file:PATH)"
    )))
}
