//! Exact and Trotterized propagators U = e^{i tau H}.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::exact_spectrum;

pub const UNITARITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Trotter(usize),
}

/// A unitary propagator together with the time scale it was built for.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub unitary: DMatrix<Complex64>,
    pub tau: f64,
    pub provenance: Provenance,
}

impl Propagator {
    fn checked(unitary: DMatrix<Complex64>, tau: f64, provenance: Provenance) -> Result<Self> {
        let dim = unitary.nrows();
        let residual = &unitary * unitary.adjoint() - DMatrix::<Complex64>::identity(dim, dim);
        let max = residual.iter().fold(0.0f64, |acc, v| acc.max(v.norm()));
        if max > UNITARITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "propagator unitarity residual {max:.3e} exceeds {UNITARITY_TOL:.0e}"
            )));
        }
        Ok(Propagator {
            unitary,
            tau,
            provenance,
        })
    }
}

/// U = Q e^{i tau Lambda} Q^T from the exact spectrum of `matrix`.
pub fn exact_propagator(matrix: &DMatrix<f64>, tau: f64) -> Result<Propagator> {
    let spectrum = exact_spectrum(matrix)?;
    let dim = matrix.nrows();
    let mut phases = DMatrix::<Complex64>::zeros(dim, dim);
    for (i, &e) in spectrum.eigenvalues.iter().enumerate() {
        phases[(i, i)] = Complex64::from_polar(1.0, tau * e);
    }
    let q = spectrum.eigenvectors.map(|v| Complex64::new(v, 0.0));
    let unitary = &q * phases * q.adjoint();
    Propagator::checked(unitary, tau, Provenance::Exact)
}

/// First-order Trotter product (prod_X e^{i h_X tau/N})^N in term-list order.
pub fn trotter_propagator(terms: &[DMatrix<f64>], tau: f64, n_steps: usize) -> Result<Propagator> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("Trotter step count must be positive".into()));
    }
    let dim = terms
        .first()
        .map(|m| m.nrows())
        .ok_or_else(|| Error::InvalidArgument("Trotter product needs at least one term".into()))?;
    if terms.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
        return Err(Error::InvalidArgument("Trotter terms must share one dimension".into()));
    }

    let mut step = DMatrix::<Complex64>::identity(dim, dim);
    for term in terms {
        let factor = exact_propagator(term, tau / n_steps as f64)?;
        step = step * factor.unitary;
    }
    let mut unitary = DMatrix::<Complex64>::identity(dim, dim);
    for _ in 0..n_steps {
        unitary = &unitary * &step;
    }
    Propagator::checked(unitary, tau, Provenance::Trotter(n_steps))
}

/// Spectral-norm distance between the Trotter product and the exact
/// propagator of the summed generator.
pub fn trotter_error(terms: &[DMatrix<f64>], tau: f64, n_steps: usize) -> Result<f64> {
    let trotter = trotter_propagator(terms, tau, n_steps)?;
    let dim = terms[0].nrows();
    let sum = terms
        .iter()
        .fold(DMatrix::<f64>::zeros(dim, dim), |acc, m| acc + m);
    let exact = exact_propagator(&sum, tau)?;
    Ok(spectral_norm(&(trotter.unitary - exact.unitary)))
}

/// Largest singular value, computed from the Hermitian square.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    let gram = m.adjoint() * m;
    // gram is Hermitian PSD with real entries possible complex; diagonalize
    // its real representation via the symmetric eigensolver on [Re -Im; Im Re]
    let n = gram.nrows();
    let mut real = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = gram[(i, j)];
            real[(i, j)] = v.re;
            real[(i + n, j + n)] = v.re;
            real[(i, j + n)] = -v.im;
            real[(i + n, j)] = v.im;
        }
    }
    let eig = real.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v))
        .max(0.0)
        .sqrt()
}
