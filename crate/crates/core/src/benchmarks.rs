//! Full-digital reference designs and the hybrid no-PLS baseline.

use nalgebra::{Cholesky, SymmetricEigen};

use crate::beamforming::{CodebookPair, LinkNoise, TransmitConfig};
use crate::linalg::{hermitian_part, orthonormalize_columns, svd_sorted};
use crate::secure_design::{design_from_initial_channel, DesignResult};
use crate::{CMatrix, Error, Result, C64};

/// Unconstrained precoder (`N_tx × N_s`) and combiner (`N_rx × N_s`).
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalBeamformer {
    pub precoder: CMatrix,
    pub combiner: CMatrix,
}

fn scale_to_power(f: CMatrix, target: f64) -> Result<CMatrix> {
    let norm = f.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroPrecoder);
    }
    Ok(f * C64::from(target.sqrt() / norm))
}

fn top_left_singular_vectors(m: &CMatrix, count: usize) -> CMatrix {
    let (u, _, _) = svd_sorted(m);
    u.columns(0, count).into_owned()
}

/// Eigenbeamforming on Bob's channel with equal power per stream; ignores Eve.
pub fn full_digital_no_pls(h_bob: &CMatrix, tx: &TransmitConfig) -> Result<DigitalBeamformer> {
    let ns = tx.num_streams();
    if ns > h_bob.nrows().min(h_bob.ncols()) {
        return Err(Error::InvalidParameter(format!(
            "{ns} streams exceed the rank capacity of a {:?} channel",
            h_bob.shape()
        )));
    }
    let (u, _, v) = svd_sorted(h_bob);
    Ok(DigitalBeamformer {
        precoder: scale_to_power(v.columns(0, ns).into_owned(), ns as f64)?,
        combiner: u.columns(0, ns).into_owned(),
    })
}

/// Dominant generalized eigenpairs of the Hermitian pencil `(A, B)` with
/// `B` positive definite, eigenvalues in decreasing order.
///
/// Reduces to the standard problem `L⁻¹ A L⁻ᴴ y = λ y` with `B = L Lᴴ` and
/// maps back through `x = L⁻ᴴ y`.
pub fn generalized_eigen(a: &CMatrix, b: &CMatrix, count: usize) -> Result<(Vec<f64>, CMatrix)> {
    let n = a.nrows();
    if a.shape() != (n, n) || b.shape() != (n, n) || count > n {
        return Err(Error::DimensionMismatch(format!(
            "pencil {:?}/{:?}, {count} eigenpairs requested",
            a.shape(),
            b.shape()
        )));
    }
    let chol = Cholesky::new(hermitian_part(b))
        .ok_or_else(|| Error::PencilSolverFailure("second pencil matrix is not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::PencilSolverFailure("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or_else(|| Error::PencilSolverFailure("singular Cholesky factor".into()))?;
    let eig = SymmetricEigen::new(hermitian_part(&c));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values: Vec<f64> = order[..count].iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = CMatrix::from_columns(
        &order[..count]
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    let vectors = l
        .adjoint()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::PencilSolverFailure("singular Cholesky factor".into()))?;
    Ok((values, vectors))
}

/// Secure full-digital benchmark. Precoder columns are the `N_s` dominant
/// generalized eigenvectors of
/// `(I + P/(N_s σ_b²)·H_bᴴH_b, I + P/(N_s σ_e²)·H_eᴴH_e)`, orthonormalized
/// in order and scaled to `‖F‖_F² = N_s`. The combiner is the top `N_s` left
/// singular vectors of `H_b F`.
pub fn full_digital_ged(
    h_bob: &CMatrix,
    h_eve: &CMatrix,
    tx: &TransmitConfig,
    noise_b: LinkNoise,
    noise_e: LinkNoise,
) -> Result<DigitalBeamformer> {
    let ns = tx.num_streams();
    let na = h_bob.ncols();
    if h_eve.ncols() != na {
        return Err(Error::DimensionMismatch(format!(
            "Bob channel {:?} and Eve channel {:?} differ in transmit antennas",
            h_bob.shape(),
            h_eve.shape()
        )));
    }
    if ns > na || ns > h_bob.nrows() {
        return Err(Error::InvalidParameter(format!("{ns} streams exceed array dimensions")));
    }
    let per_stream = tx.total_power() / ns as f64;
    let eye = CMatrix::identity(na, na);
    let a = &eye + h_bob.adjoint() * h_bob * C64::from(per_stream / noise_b.variance());
    let b = &eye + h_eve.adjoint() * h_eve * C64::from(per_stream / noise_e.variance());
    let (_, vectors) = generalized_eigen(&a, &b, ns)?;
    let basis = orthonormalize_columns(&vectors);
    if basis.ncols() != ns {
        return Err(Error::PencilSolverFailure("generalized eigenvectors are linearly dependent".into()));
    }
    let precoder = scale_to_power(basis, ns as f64)?;
    let combiner = top_left_singular_vectors(&(h_bob * &precoder), ns);
    Ok(DigitalBeamformer { precoder, combiner })
}

/// Hybrid design without any secrecy effort: successive beam selection
/// directly on `H_b`.
pub fn hybrid_no_pls(h_bob: &CMatrix, codebooks: &CodebookPair, tx: &TransmitConfig) -> Result<DesignResult> {
    design_from_initial_channel(h_bob, h_bob, codebooks, tx)
}
