//! Particle classes and the global spin-orbital index space.
//!
//! A system is described by an ordered list of particle classes (electrons,
//! each kind of nucleus, ...). Every class owns a contiguous block of global
//! spin-orbital indices; fermionic classes always come first so that the
//! class-local sign strings of the fermionic mapping never cross a bosonic
//! block.

use crate::error::{Error, Result};

/// Exchange statistics of a particle class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParticleKind {
    Fermion,
    Boson,
    /// A single distinguishable particle; occupation numbers are 0 or 1.
    Distinguishable,
}

impl ParticleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParticleKind::Fermion => "fermion",
            ParticleKind::Boson => "boson",
            ParticleKind::Distinguishable => "distinguishable",
        }
    }
}

impl std::fmt::Display for ParticleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One kind of particle: statistics, particle count n_k and the number of
/// spin orbitals N_k spanned by its one-particle basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParticleClassSpec {
    pub kind: ParticleKind,
    pub n_particles: usize,
    pub n_spinorbitals: usize,
    pub label: String,
}

impl ParticleClassSpec {
    pub fn new(
        kind: ParticleKind,
        n_particles: usize,
        n_spinorbitals: usize,
        label: impl Into<String>,
    ) -> Self {
        ParticleClassSpec {
            kind,
            n_particles,
            n_spinorbitals,
            label: label.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_spinorbitals == 0 {
            return Err(Error::InvalidClass {
                label: self.label.clone(),
                reason: "class must have at least one spin orbital".into(),
            });
        }
        match self.kind {
            ParticleKind::Distinguishable if self.n_particles != 1 => Err(Error::InvalidClass {
                label: self.label.clone(),
                reason: format!(
                    "distinguishable classes must have exactly one particle, got {}",
                    self.n_particles
                ),
            }),
            ParticleKind::Fermion if self.n_particles > self.n_spinorbitals => {
                Err(Error::InvalidClass {
                    label: self.label.clone(),
                    reason: format!(
                        "{} fermions cannot occupy {} spin orbitals",
                        self.n_particles, self.n_spinorbitals
                    ),
                })
            }
            _ => Ok(()),
        }
    }

    /// Maximum occupation number of a single spin orbital of this class.
    pub fn max_occupation(&self) -> usize {
        match self.kind {
            ParticleKind::Fermion | ParticleKind::Distinguishable => 1,
            ParticleKind::Boson => self.n_particles,
        }
    }
}

/// The global index space: classes in canonical order (fermions first),
/// their 1-based starting indices I_k and the total N_T.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinOrbitalIndexing {
    classes: Vec<ParticleClassSpec>,
    starts: Vec<usize>,
    total: usize,
}

/// Reorders the classes fermions-first (stable within each statistics group)
/// and computes the starting indices I_k and total N_T.
pub fn build_indexing(classes: &[ParticleClassSpec]) -> Result<SpinOrbitalIndexing> {
    if classes.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one particle class is required".into(),
        ));
    }
    for c in classes {
        c.validate()?;
    }
    let mut ordered: Vec<ParticleClassSpec> = Vec::with_capacity(classes.len());
    ordered.extend(
        classes
            .iter()
            .filter(|c| c.kind == ParticleKind::Fermion)
            .cloned(),
    );
    ordered.extend(
        classes
            .iter()
            .filter(|c| c.kind != ParticleKind::Fermion)
            .cloned(),
    );

    let mut starts = Vec::with_capacity(ordered.len());
    let mut next = 1usize;
    for c in &ordered {
        starts.push(next);
        next += c.n_spinorbitals;
    }
    Ok(SpinOrbitalIndexing {
        classes: ordered,
        starts,
        total: next - 1,
    })
}

impl SpinOrbitalIndexing {
    pub fn classes(&self) -> &[ParticleClassSpec] {
        &self.classes
    }

    /// 1-based starting index I_k of each class block.
    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    /// Total number of spin orbitals N_T.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Class owning the global 1-based spin-orbital index `p`.
    pub fn class_of(&self, p: usize) -> Result<usize> {
        if p == 0 || p > self.total {
            return Err(Error::IndexOutOfRange {
                index: p,
                total: self.total,
            });
        }
        // starts is ascending; find the last start <= p
        let k = self
            .starts
            .partition_point(|&s| s <= p)
            .checked_sub(1)
            .expect("p >= 1 and starts[0] == 1");
        Ok(k)
    }

    /// Local 0-based offset of `p` within its class block.
    pub fn local_index(&self, p: usize) -> Result<(usize, usize)> {
        let k = self.class_of(p)?;
        Ok((k, p - self.starts[k]))
    }

    pub fn class_by_label(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.label == label)
    }

    /// Maximum occupation of the global spin orbital `p`.
    pub fn max_occupation(&self, p: usize) -> Result<usize> {
        Ok(self.classes[self.class_of(p)?].max_occupation())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fermion(n: usize, orbs: usize) -> ParticleClassSpec {
        ParticleClassSpec::new(ParticleKind::Fermion, n, orbs, "e")
    }

    #[test]
    fn electrons_plus_distinguishable_proton() {
        let idx = build_indexing(&[
            fermion(2, 2),
            ParticleClassSpec::new(ParticleKind::Distinguishable, 1, 4, "p"),
        ])
        .unwrap();
        assert_eq!(idx.starts(), &[1, 3]);
        assert_eq!(idx.total(), 6);
    }

    #[test]
    fn single_boson_class() {
        let idx = build_indexing(&[ParticleClassSpec::new(ParticleKind::Boson, 3, 2, "b")]).unwrap();
        assert_eq!(idx.starts(), &[1]);
        assert_eq!(idx.total(), 2);
    }

    #[test]
    fn fermions_reordered_first() {
        // Boson listed first on input; fermions must come out first.
        let idx = build_indexing(&[
            ParticleClassSpec::new(ParticleKind::Boson, 1, 2, "b"),
            ParticleClassSpec::new(ParticleKind::Fermion, 1, 3, "f"),
        ])
        .unwrap();
        assert_eq!(idx.classes()[0].kind, ParticleKind::Fermion);
        assert_eq!(idx.starts(), &[1, 4]);
        assert_eq!(idx.total(), 5);
    }

    #[test]
    fn rejects_bad_classes() {
        assert!(build_indexing(&[ParticleClassSpec::new(
            ParticleKind::Distinguishable,
            2,
            4,
            "d"
        )])
        .is_err());
        assert!(build_indexing(&[fermion(3, 2)]).is_err());
        assert!(build_indexing(&[]).is_err());
    }

    #[test]
    fn class_lookup() {
        let idx = build_indexing(&[
            fermion(2, 2),
            ParticleClassSpec::new(ParticleKind::Distinguishable, 1, 4, "p"),
        ])
        .unwrap();
        assert_eq!(idx.class_of(1).unwrap(), 0);
        assert_eq!(idx.class_of(2).unwrap(), 0);
        assert_eq!(idx.class_of(3).unwrap(), 1);
        assert_eq!(idx.class_of(6).unwrap(), 1);
        assert!(idx.class_of(7).is_err());
        assert!(idx.class_of(0).is_err());
        assert_eq!(idx.local_index(5).unwrap(), (1, 2));
    }
}
