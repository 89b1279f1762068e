//! Dense/sparse Hermitian matrices in the configuration basis and the exact
//! diagonalization oracle used throughout for verification.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{apply_ladder, ConfigurationBasis, WeightedConfiguration};
use crate::hamiltonian::SecondQuantizedHamiltonian;

/// Above this dimension build_matrix stores sorted coordinates instead of a
/// dense array.
pub const DEFAULT_DENSE_CAP: usize = 4096;

pub const INPUT_HERMITICITY_TOL: f64 = 1e-10;
pub const SYMMETRIZED_TOL: f64 = 1e-12;

/// A real symmetric matrix, dense at desk scale and coordinate-sparse above
/// the configured cap.
#[derive(Debug, Clone)]
pub enum SymmetricMatrix {
    Dense(DMatrix<f64>),
    /// Sorted (row, col, value) triplets, upper and lower entries both present.
    Coo {
        dim: usize,
        entries: Vec<(usize, usize, f64)>,
    },
}

impl SymmetricMatrix {
    pub fn dim(&self) -> usize {
        match self {
            SymmetricMatrix::Dense(m) => m.nrows(),
            SymmetricMatrix::Coo { dim, .. } => *dim,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SymmetricMatrix::Dense(m) => m.clone(),
            SymmetricMatrix::Coo { dim, entries } => {
                let mut m = DMatrix::zeros(*dim, *dim);
                for &(i, j, v) in entries {
                    m[(i, j)] += v;
                }
                m
            }
        }
    }
}

/// Builds <basis_i| H |basis_j> by applying each term's ladder string
/// right-to-left, symmetrizing at the end.
///
/// The raw accumulation must already be symmetric to within 1e-12; the stored
/// matrix is the exactly symmetric average.
pub fn build_matrix(
    hamiltonian: &SecondQuantizedHamiltonian,
    basis: &ConfigurationBasis,
) -> Result<SymmetricMatrix> {
    build_matrix_with_cap(hamiltonian, basis, DEFAULT_DENSE_CAP)
}

pub fn build_matrix_with_cap(
    hamiltonian: &SecondQuantizedHamiltonian,
    basis: &ConfigurationBasis,
    dense_cap: usize,
) -> Result<SymmetricMatrix> {
    let dim = basis.len();
    let mut dense = DMatrix::<f64>::zeros(dim, dim);
    for (j, config) in basis.configurations().iter().enumerate() {
        for term in &hamiltonian.terms {
            for string in &term.strings {
                let mut coeff = string.coefficient;
                let mut current = config.clone();
                let mut alive = true;
                for &(op, p) in string.ops.iter().rev() {
                    match apply_ladder(op, p, &current, &hamiltonian.indexing)? {
                        WeightedConfiguration::Zero => {
                            alive = false;
                            break;
                        }
                        WeightedConfiguration::Scaled {
                            coefficient,
                            configuration,
                        } => {
                            coeff *= coefficient;
                            current = configuration;
                        }
                    }
                }
                if alive {
                    if let Some(i) = basis.position(&current) {
                        dense[(i, j)] += coeff;
                    }
                    // Configurations leaving the fixed-number basis cannot
                    // occur for particle-conserving terms; dropping them is a
                    // projection onto the basis span.
                }
            }
        }
    }

    let asymmetry = max_abs(&(dense.clone() - dense.transpose()));
    if asymmetry > SYMMETRIZED_TOL {
        return Err(Error::NotHermitian {
            asymmetry,
            tolerance: SYMMETRIZED_TOL,
        });
    }
    let sym = (&dense + dense.transpose()) * 0.5;
    if dim <= dense_cap {
        Ok(SymmetricMatrix::Dense(sym))
    } else {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for j in 0..dim {
            for i in 0..dim {
                let v = sym[(i, j)];
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        Ok(SymmetricMatrix::Coo { dim, entries })
    }
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending with
/// orthonormal eigenvectors in the columns of the returned matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn eigenvector(&self, i: usize) -> DVector<f64> {
        self.eigenvectors.column(i).into_owned()
    }
}

/// Diagonalizes a Hermitian-within-1e-10 real matrix.
///
/// The reconstruction residual ||M - Q L Q^T||_max is checked against 1e-9.
pub fn exact_spectrum(matrix: &DMatrix<f64>) -> Result<Spectrum> {
    let asymmetry = max_abs(&(matrix - matrix.transpose()));
    if asymmetry > INPUT_HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            asymmetry,
            tolerance: INPUT_HERMITICITY_TOL,
        });
    }
    let sym = (matrix + matrix.transpose()) * 0.5;
    let eig = sym.clone().symmetric_eigen();

    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(sym.nrows(), sym.ncols());
    for (col, &i) in order.iter().enumerate() {
        eigenvectors.set_column(col, &eig.eigenvectors.column(i));
    }

    let lambda = DMatrix::from_diagonal(&DVector::from_vec(eigenvalues.clone()));
    let residual = max_abs(&(&sym - &eigenvectors * lambda * eigenvectors.transpose()));
    if residual > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "eigendecomposition residual {residual:.3e} exceeds 1e-9"
        )));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_configurations;
    use crate::hamiltonian::{assemble_hamiltonian, IntegralTable};
    use crate::particles::{build_indexing, ParticleClassSpec, ParticleKind};

    #[test]
    fn zero_hamiltonian_zero_matrix() {
        let idx =
            build_indexing(&[ParticleClassSpec::new(ParticleKind::Fermion, 1, 2, "e")]).unwrap();
        let basis = enumerate_configurations(&idx, None).unwrap();
        let h = assemble_hamiltonian(&IntegralTable::new(), &idx).unwrap();
        let m = build_matrix(&h, &basis).unwrap().to_dense();
        assert_eq!(max_abs(&m), 0.0);
    }

    #[test]
    fn fermion_number_operator_diagonal() {
        let idx =
            build_indexing(&[ParticleClassSpec::new(ParticleKind::Fermion, 1, 1, "e")]).unwrap();
        let mut t = IntegralTable::new();
        t.set_one_body(1, 1, -1.0).unwrap();
        let h = assemble_hamiltonian(&t, &idx).unwrap();
        // basis over both occupation sectors: enumerate n=0 and n=1 by hand
        use crate::fock::ClassConstraint;
        let empty = enumerate_configurations(
            &idx,
            Some(&[ClassConstraint {
                n_particles: 0,
                sz_zero: false,
            }]),
        )
        .unwrap();
        let filled = enumerate_configurations(&idx, None).unwrap();
        let m0 = build_matrix(&h, &empty).unwrap().to_dense();
        let m1 = build_matrix(&h, &filled).unwrap().to_dense();
        assert_eq!(m0[(0, 0)], 0.0);
        assert_eq!(m1[(0, 0)], -1.0);
    }

    #[test]
    fn boson_number_operator_diagonal() {
        let idx =
            build_indexing(&[ParticleClassSpec::new(ParticleKind::Boson, 2, 1, "b")]).unwrap();
        let mut t = IntegralTable::new();
        let h11 = 0.7;
        t.set_one_body(1, 1, h11).unwrap();
        let h = assemble_hamiltonian(&t, &idx).unwrap();
        // All occupations 0..=2 of the single mode.
        use crate::fock::ClassConstraint;
        for n in 0..=2usize {
            let basis = enumerate_configurations(
                &idx,
                Some(&[ClassConstraint {
                    n_particles: n,
                    sz_zero: false,
                }]),
            )
            .unwrap();
            let m = build_matrix(&h, &basis).unwrap().to_dense();
            assert!((m[(0, 0)] - n as f64 * h11).abs() < 1e-14);
        }
    }

    #[test]
    fn spectrum_diag_and_pauli_x() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -1.0]);
        let s = exact_spectrum(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![-1.0, 0.0]);

        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let s = exact_spectrum(&x).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(exact_spectrum(&m).is_err());
    }

    #[test]
    fn coo_roundtrip_above_cap() {
        let idx =
            build_indexing(&[ParticleClassSpec::new(ParticleKind::Fermion, 2, 4, "e")]).unwrap();
        let basis = enumerate_configurations(&idx, None).unwrap();
        let mut t = IntegralTable::new();
        t.set_one_body(1, 2, 0.3).unwrap();
        t.set_one_body(1, 1, -0.5).unwrap();
        let h = assemble_hamiltonian(&t, &idx).unwrap();
        let dense = build_matrix_with_cap(&h, &basis, usize::MAX).unwrap().to_dense();
        let coo = build_matrix_with_cap(&h, &basis, 0).unwrap();
        assert!(matches!(coo, SymmetricMatrix::Coo { .. }));
        assert_eq!(coo.to_dense(), dense);
    }
}
