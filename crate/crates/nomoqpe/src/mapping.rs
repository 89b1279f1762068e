//! Qubit encodings of ladder operators and Hamiltonians.
//!
//! Conventions fixed once for the whole crate:
//!
//! * Qubit basis: |0> = unoccupied, |1> = occupied. sigma_minus is the matrix
//!   taking |0> to |1>, so creation maps to sigma_minus.
//! * Qubit order is little-endian in the global orbital order: the qubits of
//!   the first orbital of the first class are the lowest, and within a
//!   materialized matrix qubit 0 is the least significant index bit.
//! * Each spin orbital owns a contiguous qubit group ("site"); every mapped
//!   operator factors as a tensor product of per-site matrices, which is what
//!   [`QubitOperator`] stores.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::Configuration;
use crate::hamiltonian::SecondQuantizedHamiltonian;
use crate::matrix::max_abs;
use crate::particles::{ParticleKind, SpinOrbitalIndexing};

/// Default refusal threshold for materializing a full 2^n matrix.
pub const DEFAULT_QUBIT_CAP: usize = 22;

/// Per-class encoding choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    JordanWigner,
    DirectBoson,
    CompactBoson,
    DistinguishableOneQubit,
    /// Reserved; construction returns a "not implemented" error.
    BravyiKitaev,
}

impl Encoding {
    pub fn as_str(&self) -> &'static str {
        match self {
            Encoding::JordanWigner => "jordan-wigner",
            Encoding::DirectBoson => "direct-boson",
            Encoding::CompactBoson => "compact-boson",
            Encoding::DistinguishableOneQubit => "one-qubit",
            Encoding::BravyiKitaev => "bravyi-kitaev",
        }
    }
}

/// Qubit assignment for every spin orbital.
#[derive(Debug, Clone)]
pub struct QubitLayout {
    indexing: SpinOrbitalIndexing,
    encodings: Vec<Encoding>,
    /// Half-open qubit range per global orbital (0-based orbital index).
    ranges: Vec<std::ops::Range<usize>>,
    total_qubits: usize,
}

fn qubits_per_orbital(encoding: Encoding, n_particles: usize) -> usize {
    match encoding {
        Encoding::JordanWigner | Encoding::DistinguishableOneQubit => 1,
        Encoding::DirectBoson => n_particles + 1,
        Encoding::CompactBoson => ((n_particles + 1) as f64).log2().ceil() as usize,
        Encoding::BravyiKitaev => 1,
    }
}

/// Assigns qubits left to right in the global orbital order.
pub fn layout_qubits(
    indexing: &SpinOrbitalIndexing,
    choices: &[Encoding],
) -> Result<QubitLayout> {
    if choices.len() != indexing.classes().len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} encoding choices, got {}",
            indexing.classes().len(),
            choices.len()
        )));
    }
    for (class, &choice) in indexing.classes().iter().zip(choices) {
        let ok = matches!(
            (class.kind, choice),
            (ParticleKind::Fermion, Encoding::JordanWigner)
                | (ParticleKind::Boson, Encoding::DirectBoson)
                | (ParticleKind::Boson, Encoding::CompactBoson)
                | (ParticleKind::Distinguishable, Encoding::DistinguishableOneQubit)
        );
        if choice == Encoding::BravyiKitaev {
            return Err(Error::NotImplemented("the Bravyi-Kitaev transformation"));
        }
        if !ok {
            return Err(Error::EncodingMismatch {
                encoding: choice.as_str().into(),
                kind: class.kind.as_str().into(),
                label: class.label.clone(),
            });
        }
    }

    let mut ranges = Vec::with_capacity(indexing.total());
    let mut next = 0usize;
    for (class, &choice) in indexing.classes().iter().zip(choices) {
        let width = qubits_per_orbital(choice, class.n_particles).max(1);
        for _ in 0..class.n_spinorbitals {
            ranges.push(next..next + width);
            next += width;
        }
    }
    Ok(QubitLayout {
        indexing: indexing.clone(),
        encodings: choices.to_vec(),
        ranges,
        total_qubits: next,
    })
}

impl QubitLayout {
    pub fn total_qubits(&self) -> usize {
        self.total_qubits
    }

    pub fn indexing(&self) -> &SpinOrbitalIndexing {
        &self.indexing
    }

    pub fn encoding_of_class(&self, k: usize) -> Encoding {
        self.encodings[k]
    }

    /// Qubit range of the 1-based global orbital `p`.
    pub fn qubit_range(&self, p: usize) -> &std::ops::Range<usize> {
        &self.ranges[p - 1]
    }

    /// Dimension of the qubit group of orbital `p` (2^width).
    fn site_dim(&self, p: usize) -> usize {
        1 << (self.ranges[p - 1].len())
    }

    fn site_dims(&self) -> Vec<usize> {
        (1..=self.indexing.total()).map(|p| self.site_dim(p)).collect()
    }

    /// Basis-state index of an occupation number within its orbital's group.
    fn encode_site(&self, p: usize, f: usize) -> Result<usize> {
        let k = self.indexing.class_of(p)?;
        Ok(match self.encodings[k] {
            Encoding::JordanWigner | Encoding::DistinguishableOneQubit => f,
            Encoding::DirectBoson => 1 << f,
            Encoding::CompactBoson => f,
            Encoding::BravyiKitaev => unreachable!("layout construction rejects Bravyi-Kitaev"),
        })
    }

    fn decode_site(&self, p: usize, state: usize) -> Option<usize> {
        let k = self.indexing.class_of(p).ok()?;
        let n_max = self.indexing.classes()[k].max_occupation();
        match self.encodings[k] {
            Encoding::JordanWigner | Encoding::DistinguishableOneQubit => {
                (state <= 1).then_some(state)
            }
            Encoding::DirectBoson => {
                (state.count_ones() == 1).then(|| state.trailing_zeros() as usize)
            }
            Encoding::CompactBoson => (state <= n_max).then_some(state),
            Encoding::BravyiKitaev => None,
        }
    }

    /// Computational-basis index of the encoded configuration.
    pub fn encode(&self, c: &Configuration) -> Result<usize> {
        if c.len() != self.indexing.total() {
            return Err(Error::InvalidArgument(
                "configuration length does not match the layout".into(),
            ));
        }
        let mut index = 0usize;
        let mut stride = 1usize;
        for p in 1..=self.indexing.total() {
            index += self.encode_site(p, c.occ(p) as usize)? * stride;
            stride *= self.site_dim(p);
        }
        Ok(index)
    }

    /// Inverse of [`encode`]: `None` when the basis state is unphysical.
    pub fn decode(&self, mut index: usize) -> Option<Configuration> {
        let mut occupations = Vec::with_capacity(self.indexing.total());
        for p in 1..=self.indexing.total() {
            let dim = self.site_dim(p);
            let f = self.decode_site(p, index % dim)?;
            occupations.push(f as u8);
            index /= dim;
        }
        (index == 0).then(|| Configuration::new(occupations))
    }
}

/// A weighted sum of tensor products of per-site matrices.
#[derive(Debug, Clone)]
pub struct QubitOperator {
    site_dims: Vec<usize>,
    /// Each term: coefficient plus sparse site -> matrix factors (identity on
    /// absent sites). Site keys are 0-based orbital indices.
    terms: Vec<(Complex64, BTreeMap<usize, DMatrix<Complex64>>)>,
}

fn sigma_minus() -> DMatrix<Complex64> {
    // takes |0> to |1> in the fixed basis
    DMatrix::from_row_slice(2, 2, &[0.0.into(), 0.0.into(), 1.0.into(), 0.0.into()])
}

fn sigma_plus() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 0.0.into(), 0.0.into()])
}

fn sigma_z() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into()])
}

impl QubitOperator {
    pub fn zero(layout: &QubitLayout) -> Self {
        QubitOperator {
            site_dims: layout.site_dims(),
            terms: Vec::new(),
        }
    }

    fn single_term(layout: &QubitLayout, factors: BTreeMap<usize, DMatrix<Complex64>>) -> Self {
        QubitOperator {
            site_dims: layout.site_dims(),
            terms: vec![(Complex64::new(1.0, 0.0), factors)],
        }
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn scale(&mut self, factor: Complex64) {
        for (c, _) in &mut self.terms {
            *c *= factor;
        }
    }

    pub fn add(&mut self, other: &QubitOperator) {
        assert_eq!(self.site_dims, other.site_dims, "layout mismatch");
        self.terms.extend(other.terms.iter().cloned());
    }

    /// Operator product: factors multiply sitewise because every factor acts
    /// on a whole orbital group.
    pub fn multiply(&self, other: &QubitOperator) -> QubitOperator {
        assert_eq!(self.site_dims, other.site_dims, "layout mismatch");
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ca, fa) in &self.terms {
            for (cb, fb) in &other.terms {
                let mut factors = fa.clone();
                for (site, mb) in fb {
                    factors
                        .entry(*site)
                        .and_modify(|ma| *ma = &*ma * mb)
                        .or_insert_with(|| mb.clone());
                }
                terms.push((ca * cb, factors));
            }
        }
        QubitOperator {
            site_dims: self.site_dims.clone(),
            terms,
        }
    }

    pub fn total_dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    fn total_qubits(&self) -> usize {
        self.site_dims
            .iter()
            .map(|d| d.trailing_zeros() as usize)
            .sum()
    }

    /// Materializes the full 2^total_qubits matrix.
    pub fn materialize(&self) -> Result<DMatrix<Complex64>> {
        self.materialize_with_cap(DEFAULT_QUBIT_CAP)
    }

    pub fn materialize_with_cap(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        let qubits = self.total_qubits();
        if qubits > cap {
            return Err(Error::QubitCapExceeded { qubits, cap });
        }
        let dim = self.total_dim();
        let mut out = DMatrix::<Complex64>::zeros(dim, dim);
        for (coeff, factors) in &self.terms {
            // kron with site 0 least significant
            let mut acc = DMatrix::<Complex64>::identity(1, 1);
            for (site, &site_dim) in self.site_dims.iter().enumerate() {
                let factor = factors
                    .get(&site)
                    .cloned()
                    .unwrap_or_else(|| DMatrix::identity(site_dim, site_dim));
                acc = factor.kronecker(&acc);
            }
            out += acc * *coeff;
        }
        Ok(out)
    }

    /// Real part of the materialized matrix, requiring the imaginary part to
    /// vanish to 1e-12.
    pub fn materialize_real(&self) -> Result<DMatrix<f64>> {
        let m = self.materialize()?;
        let imag_max = m.iter().fold(0.0f64, |acc, v| acc.max(v.im.abs()));
        if imag_max > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "materialized matrix has imaginary entries up to {imag_max:.3e}"
            )));
        }
        Ok(m.map(|v| v.re))
    }
}

/// Maps one ladder operator onto the qubit register.
pub fn map_ladder(
    op: crate::fock::LadderOp,
    p: usize,
    layout: &QubitLayout,
) -> Result<QubitOperator> {
    use crate::fock::LadderOp;
    let (k, _) = layout.indexing.local_index(p)?;
    let class = &layout.indexing.classes()[k];
    let n_max = class.max_occupation();
    let mut factors = BTreeMap::new();
    match layout.encodings[k] {
        Encoding::JordanWigner => {
            let start = layout.indexing.starts()[k];
            for q in start..p {
                factors.insert(q - 1, sigma_z());
            }
            let target = match op {
                LadderOp::Create => sigma_minus(),
                LadderOp::Annihilate => sigma_plus(),
            };
            factors.insert(p - 1, target);
        }
        Encoding::DistinguishableOneQubit => {
            let target = match op {
                LadderOp::Create => sigma_minus(),
                LadderOp::Annihilate => sigma_plus(),
            };
            factors.insert(p - 1, target);
        }
        Encoding::DirectBoson => {
            // sum_j sqrt(j+1) sigma_{+-}^j (x) sigma_{-+}^{j+1} over the
            // orbital's n_k + 1 qubits; each summand moves the one-hot mark.
            let dim = layout.site_dim(p);
            let mut m = DMatrix::<Complex64>::zeros(dim, dim);
            for j in 0..n_max {
                let amp = ((j + 1) as f64).sqrt();
                let (from, to) = match op {
                    LadderOp::Create => (1usize << j, 1usize << (j + 1)),
                    LadderOp::Annihilate => (1usize << (j + 1), 1usize << j),
                };
                // entries only between one-hot states; all other basis states
                // of the group are annihilated by the sigma pair elsewhere
                m[(to, from)] += Complex64::new(amp, 0.0);
            }
            factors.insert(p - 1, m);
        }
        Encoding::CompactBoson => {
            // binary encoding: |j +- 1><j| summed, identity on the padding
            // states j > n_k
            let dim = layout.site_dim(p);
            let mut m = DMatrix::<Complex64>::zeros(dim, dim);
            for j in 0..n_max {
                let amp = ((j + 1) as f64).sqrt();
                let (from, to) = match op {
                    LadderOp::Create => (j, j + 1),
                    LadderOp::Annihilate => (j + 1, j),
                };
                m[(to, from)] += Complex64::new(amp, 0.0);
            }
            factors.insert(p - 1, m);
        }
        Encoding::BravyiKitaev => {
            return Err(Error::NotImplemented("the Bravyi-Kitaev transformation"))
        }
    }
    Ok(QubitOperator::single_term(layout, factors))
}

/// Maps a whole second-quantized Hamiltonian term by term.
pub fn map_hamiltonian(
    hamiltonian: &SecondQuantizedHamiltonian,
    layout: &QubitLayout,
) -> Result<QubitOperator> {
    if hamiltonian.indexing != layout.indexing {
        return Err(Error::InvalidArgument(
            "Hamiltonian and layout use different indexings".into(),
        ));
    }
    let mut out = QubitOperator::zero(layout);
    for term in &hamiltonian.terms {
        for string in &term.strings {
            let mut product: Option<QubitOperator> = None;
            // strings apply right-to-left; operator product left-to-right
            for &(op, p) in &string.ops {
                let mapped = map_ladder(op, p, layout)?;
                product = Some(match product {
                    None => mapped,
                    Some(acc) => acc.multiply(&mapped),
                });
            }
            let mut mapped = product.expect("non-empty ladder string");
            mapped.scale(Complex64::new(string.coefficient, 0.0));
            out.add(&mapped);
        }
    }
    Ok(out)
}

/// Restriction of a materialized operator to the encoded images of a
/// configuration basis (rows/columns ordered as the basis).
pub fn restrict_to_encoded(
    matrix: &DMatrix<f64>,
    layout: &QubitLayout,
    basis: &crate::fock::ConfigurationBasis,
) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(basis.len(), basis.len());
    let encoded: Vec<usize> = basis
        .configurations()
        .iter()
        .map(|c| layout.encode(c))
        .collect::<Result<_>>()?;
    for (i, &ei) in encoded.iter().enumerate() {
        for (j, &ej) in encoded.iter().enumerate() {
            out[(i, j)] = matrix[(ei, ej)];
        }
    }
    Ok(out)
}

/// Max-norm of the commutator [P, M] where P projects onto the encoded
/// physical subspace (all occupation tuples within their truncations).
pub fn physical_projector_commutator(layout: &QubitLayout, matrix: &DMatrix<f64>) -> f64 {
    let dim = matrix.nrows();
    let mut proj = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        if layout.decode(i).is_some() {
            proj[(i, i)] = 1.0;
        }
    }
    max_abs(&(&proj * matrix - matrix * proj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::LadderOp;
    use crate::particles::{build_indexing, ParticleClassSpec};

    fn layout_for(kind: ParticleKind, n: usize, orbs: usize, enc: Encoding) -> QubitLayout {
        let idx = build_indexing(&[ParticleClassSpec::new(kind, n, orbs, "c")]).unwrap();
        layout_qubits(&idx, &[enc]).unwrap()
    }

    #[test]
    fn qubit_counts() {
        assert_eq!(
            layout_for(ParticleKind::Fermion, 2, 4, Encoding::JordanWigner).total_qubits(),
            4
        );
        assert_eq!(
            layout_for(ParticleKind::Boson, 3, 2, Encoding::DirectBoson).total_qubits(),
            8
        );
        assert_eq!(
            layout_for(ParticleKind::Boson, 3, 2, Encoding::CompactBoson).total_qubits(),
            4
        );
        let idx = build_indexing(&[
            ParticleClassSpec::new(ParticleKind::Fermion, 1, 2, "e"),
            ParticleClassSpec::new(ParticleKind::Boson, 2, 1, "b"),
        ])
        .unwrap();
        let layout = layout_qubits(&idx, &[Encoding::JordanWigner, Encoding::DirectBoson]).unwrap();
        assert_eq!(layout.total_qubits(), 5);
    }

    #[test]
    fn encoding_mismatch_rejected() {
        let idx =
            build_indexing(&[ParticleClassSpec::new(ParticleKind::Fermion, 1, 2, "e")]).unwrap();
        assert!(layout_qubits(&idx, &[Encoding::DirectBoson]).is_err());
        assert!(matches!(
            layout_qubits(&idx, &[Encoding::BravyiKitaev]),
            Err(Error::NotImplemented(_))
        ));
    }

    #[test]
    fn jw_create_single_orbital_is_sigma_minus() {
        let layout = layout_for(ParticleKind::Fermion, 1, 1, Encoding::JordanWigner);
        let m = map_ladder(LadderOp::Create, 1, &layout)
            .unwrap()
            .materialize_real()
            .unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]));
    }

    #[test]
    fn direct_boson_create_moves_one_hot() {
        let layout = layout_for(ParticleKind::Boson, 2, 1, Encoding::DirectBoson);
        let m = map_ladder(LadderOp::Create, 1, &layout)
            .unwrap()
            .materialize_real()
            .unwrap();
        let enc = |f: u8| {
            layout
                .encode(&Configuration::new(vec![f]))
                .unwrap()
        };
        assert_eq!(m[(enc(1), enc(0))], 1.0);
        assert!((m[(enc(2), enc(1))] - 2f64.sqrt()).abs() < 1e-15);
        // nothing above truncation
        assert_eq!(m.column(enc(2)).iter().map(|v| v.abs()).sum::<f64>(), 0.0);
    }

    #[test]
    fn compact_boson_create_matrix_entries() {
        let layout = layout_for(ParticleKind::Boson, 3, 1, Encoding::CompactBoson);
        let m = map_ladder(LadderOp::Create, 1, &layout)
            .unwrap()
            .materialize_real()
            .unwrap();
        assert_eq!(m.nrows(), 4);
        let mut expected = DMatrix::zeros(4, 4);
        expected[(1, 0)] = 1.0;
        expected[(2, 1)] = 2f64.sqrt();
        expected[(3, 2)] = 3f64.sqrt();
        assert!(max_abs(&(m - expected)) < 1e-15);
    }

    #[test]
    fn distinguishable_annihilate_is_sigma_plus() {
        let layout =
            layout_for(ParticleKind::Distinguishable, 1, 1, Encoding::DistinguishableOneQubit);
        let m = map_ladder(LadderOp::Annihilate, 1, &layout)
            .unwrap()
            .materialize_real()
            .unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn encode_decode_roundtrip_all_encodings() {
        for enc in [Encoding::DirectBoson, Encoding::CompactBoson] {
            let layout = layout_for(ParticleKind::Boson, 3, 2, enc);
            for f1 in 0..=3u8 {
                for f2 in 0..=3u8 {
                    let c = Configuration::new(vec![f1, f2]);
                    let i = layout.encode(&c).unwrap();
                    assert_eq!(layout.decode(i).as_ref(), Some(&c), "{enc:?} {f1} {f2}");
                }
            }
        }
        let layout = layout_for(ParticleKind::Fermion, 2, 3, Encoding::JordanWigner);
        for bits in 0..8u8 {
            let c = Configuration::new(vec![bits & 1, (bits >> 1) & 1, (bits >> 2) & 1]);
            assert_eq!(layout.decode(layout.encode(&c).unwrap()).unwrap(), c);
        }
    }

    #[test]
    fn materialization_cap() {
        let layout = layout_for(ParticleKind::Fermion, 1, 4, Encoding::JordanWigner);
        let op = map_ladder(LadderOp::Create, 1, &layout).unwrap();
        assert!(matches!(
            op.materialize_with_cap(3),
            Err(Error::QubitCapExceeded { .. })
        ));
    }
}
