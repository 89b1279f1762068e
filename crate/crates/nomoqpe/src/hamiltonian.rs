//! Second-quantized Hamiltonians over the global spin-orbital index space.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fock::LadderOp;
use crate::particles::SpinOrbitalIndexing;

pub const INTEGRAL_CONFLICT_TOL: f64 = 1e-12;

/// One- and two-body integral tables, keyed by 1-based global indices and
/// stored under canonical keys so that h_pq = h_qp and V_pqrs = V_rspq hold by
/// construction.
#[derive(Debug, Clone, Default)]
pub struct IntegralTable {
    one_body: BTreeMap<(usize, usize), f64>,
    two_body: BTreeMap<(usize, usize, usize, usize), f64>,
}

fn canonical_one(p: usize, q: usize) -> (usize, usize) {
    if p <= q {
        (p, q)
    } else {
        (q, p)
    }
}

fn canonical_two(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    // V_pqrs = V_rspq: pick the lexicographically smaller of the two.
    std::cmp::min((p, q, r, s), (r, s, p, q))
}

impl IntegralTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores h_pq (and implicitly h_qp). Conflicting re-insertions are
    /// rejected; consistent duplicates are accepted.
    pub fn set_one_body(&mut self, p: usize, q: usize, value: f64) -> Result<()> {
        let key = canonical_one(p, q);
        if let Some(&old) = self.one_body.get(&key) {
            if (old - value).abs() > INTEGRAL_CONFLICT_TOL {
                return Err(Error::IntegralConflict(format!(
                    "h({p},{q}) = {value} conflicts with previously stored {old}"
                )));
            }
            return Ok(());
        }
        self.one_body.insert(key, value);
        Ok(())
    }

    /// Stores V_pqrs (and implicitly V_rspq).
    pub fn set_two_body(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) -> Result<()> {
        let key = canonical_two(p, q, r, s);
        if let Some(&old) = self.two_body.get(&key) {
            if (old - value).abs() > INTEGRAL_CONFLICT_TOL {
                return Err(Error::IntegralConflict(format!(
                    "V({p},{q},{r},{s}) = {value} conflicts with previously stored {old}"
                )));
            }
            return Ok(());
        }
        self.two_body.insert(key, value);
        Ok(())
    }

    pub fn one_body(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.one_body.iter().map(|(&(p, q), &v)| (p, q, v))
    }

    pub fn two_body(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        self.two_body
            .iter()
            .map(|(&(p, q, r, s), &v)| (p, q, r, s, v))
    }

    pub fn n_entries(&self) -> usize {
        self.one_body.len() + self.two_body.len()
    }

    fn max_index(&self) -> usize {
        let one = self.one_body.keys().map(|&(p, q)| p.max(q)).max();
        let two = self
            .two_body
            .keys()
            .map(|&(p, q, r, s)| p.max(q).max(r).max(s))
            .max();
        one.into_iter().chain(two).max().unwrap_or(0)
    }

    fn min_index(&self) -> usize {
        let one = self.one_body.keys().map(|&(p, q)| p.min(q)).min();
        let two = self
            .two_body
            .keys()
            .map(|&(p, q, r, s)| p.min(q).min(r).min(s))
            .min();
        one.into_iter().chain(two).min().unwrap_or(1)
    }
}

/// One ladder string with its coefficient, applied right-to-left.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderString {
    pub coefficient: f64,
    pub ops: Vec<(LadderOp, usize)>,
}

/// One Hermitian Trotter term: the operator string of a stored integral entry
/// plus its Hermitian mirror when the two differ.
#[derive(Debug, Clone)]
pub struct HamiltonianTerm {
    pub strings: Vec<LadderString>,
}

/// A second-quantized Hamiltonian as an ordered list of Hermitian terms.
#[derive(Debug, Clone)]
pub struct SecondQuantizedHamiltonian {
    pub indexing: SpinOrbitalIndexing,
    pub terms: Vec<HamiltonianTerm>,
}

impl SecondQuantizedHamiltonian {
    /// Term count L used by the Trotter product.
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }
}

/// Expands the integral table into the term list
/// sum h_pq a+_p a_q + 1/2 sum V_pqrs a+_p a+_q a_s a_r,
/// grouping each canonical entry with its Hermitian mirror into one term.
pub fn assemble_hamiltonian(
    integrals: &IntegralTable,
    indexing: &SpinOrbitalIndexing,
) -> Result<SecondQuantizedHamiltonian> {
    let total = indexing.total();
    if integrals.max_index() > total {
        return Err(Error::IndexOutOfRange {
            index: integrals.max_index(),
            total,
        });
    }
    if integrals.n_entries() > 0 && integrals.min_index() == 0 {
        return Err(Error::IndexOutOfRange { index: 0, total });
    }

    let mut terms = Vec::new();
    for (p, q, h) in integrals.one_body() {
        let mut strings = vec![LadderString {
            coefficient: h,
            ops: vec![(LadderOp::Create, p), (LadderOp::Annihilate, q)],
        }];
        if p != q {
            strings.push(LadderString {
                coefficient: h,
                ops: vec![(LadderOp::Create, q), (LadderOp::Annihilate, p)],
            });
        }
        terms.push(HamiltonianTerm { strings });
    }
    for (p, q, r, s, v) in integrals.two_body() {
        // Literal ordering a+_p a+_q a_s a_r with the 1/2 prefactor.
        let mut strings = vec![LadderString {
            coefficient: 0.5 * v,
            ops: vec![
                (LadderOp::Create, p),
                (LadderOp::Create, q),
                (LadderOp::Annihilate, s),
                (LadderOp::Annihilate, r),
            ],
        }];
        if (p, q, r, s) != (r, s, p, q) {
            strings.push(LadderString {
                coefficient: 0.5 * v,
                ops: vec![
                    (LadderOp::Create, r),
                    (LadderOp::Create, s),
                    (LadderOp::Annihilate, q),
                    (LadderOp::Annihilate, p),
                ],
            });
        }
        terms.push(HamiltonianTerm { strings });
    }
    Ok(SecondQuantizedHamiltonian {
        indexing: indexing.clone(),
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::{build_indexing, ParticleClassSpec, ParticleKind};

    #[test]
    fn empty_tables_give_zero_terms() {
        let idx =
            build_indexing(&[ParticleClassSpec::new(ParticleKind::Fermion, 1, 2, "e")]).unwrap();
        let h = assemble_hamiltonian(&IntegralTable::new(), &idx).unwrap();
        assert_eq!(h.n_terms(), 0);
    }

    #[test]
    fn number_operator_single_term() {
        let idx =
            build_indexing(&[ParticleClassSpec::new(ParticleKind::Fermion, 1, 1, "e")]).unwrap();
        let mut t = IntegralTable::new();
        t.set_one_body(1, 1, -1.0).unwrap();
        let h = assemble_hamiltonian(&t, &idx).unwrap();
        assert_eq!(h.n_terms(), 1);
        assert_eq!(h.terms[0].strings.len(), 1);
    }

    #[test]
    fn hermitian_completion_and_conflict() {
        let mut t = IntegralTable::new();
        t.set_one_body(1, 2, 0.5).unwrap();
        // consistent mirror is fine
        t.set_one_body(2, 1, 0.5).unwrap();
        // conflicting mirror is not
        assert!(t.set_one_body(2, 1, 0.4).is_err());
        assert_eq!(t.n_entries(), 1);
    }

    #[test]
    fn two_body_mirror_symmetry() {
        let mut t = IntegralTable::new();
        t.set_two_body(1, 2, 3, 4, 0.25).unwrap();
        t.set_two_body(3, 4, 1, 2, 0.25).unwrap();
        assert!(t.set_two_body(3, 4, 1, 2, 0.3).is_err());
        assert_eq!(t.n_entries(), 1);
    }

    #[test]
    fn out_of_range_index_rejected() {
        let idx =
            build_indexing(&[ParticleClassSpec::new(ParticleKind::Fermion, 1, 2, "e")]).unwrap();
        let mut t = IntegralTable::new();
        t.set_one_body(1, 3, 0.1).unwrap();
        assert!(assemble_hamiltonian(&t, &idx).is_err());
    }
}
