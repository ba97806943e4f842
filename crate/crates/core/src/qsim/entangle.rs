//! Entanglement measures: entanglement entropy for pure states and the
//! concurrence-based closed form of the entanglement of formation for
//! two-qubit mixed states.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{partial_trace, DensityMatrix, StateVector};
use crate::{Error, Result};

fn to_nalgebra(rho: &DensityMatrix) -> DMatrix<Complex64> {
    let dim = rho.dim();
    DMatrix::from_fn(dim, dim, |r, c| rho.at(r, c))
}

/// Eigenvalues of a Hermitian density-like matrix, descending.
fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let sym = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = sym.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}

/// Binary entropy in bits with the `0 log 0 = 0` convention.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// Entanglement entropy of a pure state across the bipartition
/// `(keep, rest)`, in bits: the von Neumann entropy of the reduced state.
pub fn entanglement_entropy(psi: &StateVector, keep: &[usize]) -> Result<f64> {
    if keep.is_empty() || keep.len() >= psi.n_qubits() {
        return Err(Error::InvalidArgument("bipartition must be proper".into()));
    }
    let reduced = partial_trace(&psi.density_matrix(), keep)?;
    let vals = hermitian_eigenvalues(&to_nalgebra(&reduced));
    Ok(vals
        .iter()
        .filter(|&&v| v > 1e-12)
        .map(|&v| -v * v.log2())
        .sum())
}

/// Wootters concurrence of a two-qubit density matrix:
/// `max(0, l1 - l2 - l3 - l4)` over the decreasing square-rooted eigenvalues
/// of `rho (sy x sy) rho* (sy x sy)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.n_qubits() != 2 {
        return Err(Error::InvalidArgument(
            "concurrence needs a two-qubit state".into(),
        ));
    }
    let m = to_nalgebra(rho);
    // sigma_y (x) sigma_y has entries +-1 on the anti-diagonal.
    let syy = DMatrix::from_fn(4, 4, |r, c| {
        if r + c == 3 {
            let sign = if r == 1 || r == 2 { -1.0 } else { 1.0 };
            Complex64::new(sign, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let rho_tilde = &syy * m.map(|v| v.conj()) * &syy;
    // Eigenvalues of rho * rho_tilde equal those of the Hermitian matrix
    // sqrt(rho) rho_tilde sqrt(rho).
    let eig = m.clone().symmetric_eigen();
    let sqrt_vals = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0)),
    );
    let sqrt_rho = &eig.eigenvectors * sqrt_vals * eig.eigenvectors.adjoint();
    let hermitian = &sqrt_rho * rho_tilde * &sqrt_rho;
    let raw = hermitian_eigenvalues(&hermitian);
    // The square root amplifies eigensolver noise (1e-16 becomes 1e-8), so
    // eigenvalues indistinguishable from zero are flushed before it.
    let floor = raw[0].abs().max(1.0) * 1e-12;
    let mut lambdas: Vec<f64> = raw
        .iter()
        .map(|&v| if v < floor { 0.0 } else { v.sqrt() })
        .collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Entanglement of formation of a two-qubit state via the concurrence
/// closed form `s((1 + sqrt(1 - C^2)) / 2)`.
pub fn entanglement_of_formation(rho: &DensityMatrix) -> Result<f64> {
    let c = concurrence(rho)?;
    Ok(binary_entropy((1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0))
}
