//! Small dense complex linear-algebra helpers on top of `nalgebra` (SVD via `faer`).

use faer::c64;
use nalgebra::Cholesky;

use crate::{CMatrix, C64};

/// Singular triplets whose singular values exceed a relative threshold.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// Left singular vectors, one column per retained singular value.
    pub u: CMatrix,
    /// Retained singular values in decreasing order.
    pub singular_values: Vec<f64>,
    /// Right singular vectors, one column per retained singular value.
    pub v: CMatrix,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `U_t Σ_t V_t^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }
}

/// Thin SVD with singular values sorted in decreasing order.
///
/// Returns `(U, σ, V)` with `matrix = U diag(σ) V^H`; `U` is `m × k` and `V`
/// is `n × k` for `k = min(m, n)`.
pub fn svd_sorted(matrix: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    // nalgebra 0.35's complex SVD loses accuracy on rank-deficient inputs,
    // which is exactly what sparse mmWave channels are; faer's is reliable.
    let (m, n) = matrix.shape();
    let k = m.min(n);
    if k == 0 {
        return (CMatrix::zeros(m, 0), Vec::new(), CMatrix::zeros(n, 0));
    }
    let a = faer::Mat::<c64>::from_fn(m, n, |i, j| {
        let z = matrix[(i, j)];
        c64::new(z.re, z.im)
    });
    let svd = a.thin_svd().expect("SVD iteration converges on finite input");
    let (fu, fv, fs) = (svd.U(), svd.V(), svd.S());
    let u = CMatrix::from_fn(m, k, |i, j| {
        let z = fu[(i, j)];
        C64::new(z.re, z.im)
    });
    let v = CMatrix::from_fn(n, k, |i, j| {
        let z = fv[(i, j)];
        C64::new(z.re, z.im)
    });
    let sigma = (0..k).map(|i| fs[i].re).collect();
    (u, sigma, v)
}

/// Keeps singular values above `rank_tolerance · σ_max`.
///
/// A zero matrix yields an empty decomposition (zero columns).
pub fn truncated_svd(matrix: &CMatrix, rank_tolerance: f64) -> TruncatedSvd {
    let (nrows, ncols) = matrix.shape();
    if nrows == 0 || ncols == 0 {
        return TruncatedSvd {
            u: CMatrix::zeros(nrows, 0),
            singular_values: Vec::new(),
            v: CMatrix::zeros(ncols, 0),
        };
    }
    let (u, sigma, v) = svd_sorted(matrix);
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let keep = if sigma_max > 0.0 {
        sigma
            .iter()
            .take_while(|&&s| s > rank_tolerance * sigma_max)
            .count()
    } else {
        0
    };
    TruncatedSvd {
        u: u.columns(0, keep).into_owned(),
        singular_values: sigma[..keep].to_vec(),
        v: v.columns(0, keep).into_owned(),
    }
}

/// Natural log-determinant of a Hermitian positive-definite matrix.
///
/// Returns `None` if the Cholesky factorization fails or a pivot falls below
/// `1e-14` relative to the largest one.
pub fn ln_det_hpd(matrix: &CMatrix) -> Option<f64> {
    let chol = Cholesky::new(hermitian_part(matrix))?;
    let l = chol.l_dirty();
    let diag: Vec<f64> = (0..l.nrows()).map(|i| l[(i, i)].re).collect();
    let max = diag.iter().copied().fold(0.0_f64, f64::max);
    if diag.iter().any(|&d| !(d > 0.0) || d * d < 1e-14 * max * max) {
        return None;
    }
    Some(2.0 * diag.iter().map(|d| d.ln()).sum::<f64>())
}

/// `log₂ det(I + scale · A A^H)`, evaluated on the smaller Gram matrix.
pub fn log2_det_identity_plus_gram(a: &CMatrix, scale: f64) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 || scale == 0.0 {
        return 0.0;
    }
    let gram = if a.ncols() <= a.nrows() {
        a.adjoint() * a
    } else {
        a * a.adjoint()
    };
    let n = gram.nrows();
    let m = CMatrix::identity(n, n) + gram * C64::from(scale);
    let ln_det = ln_det_hpd(&m).expect("I + PSD matrix is positive definite");
    (ln_det / std::f64::consts::LN_2).max(0.0)
}

/// `(M + M^H) / 2`.
pub fn hermitian_part(matrix: &CMatrix) -> CMatrix {
    (matrix + matrix.adjoint()) * C64::from(0.5)
}

/// Orthogonal projector onto the complement of the column span of an
/// orthonormal basis: `I − B B^H`.
pub fn complement_projector(basis: &CMatrix) -> CMatrix {
    let n = basis.nrows();
    CMatrix::identity(n, n) - basis * basis.adjoint()
}

/// Orthonormalizes the columns of `matrix` in order with two passes of
/// classical Gram–Schmidt. Columns whose residual falls below `1e-12` are
/// dropped.
pub fn orthonormalize_columns(matrix: &CMatrix) -> CMatrix {
    let mut basis: Vec<crate::CVector> = Vec::with_capacity(matrix.ncols());
    for col in matrix.column_iter() {
        let mut r = col.into_owned();
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.dotc(&r);
                r -= b * coeff;
            }
        }
        let norm = r.norm();
        if norm > 1e-12 {
            basis.push(r / C64::from(norm));
        }
    }
    if basis.is_empty() {
        CMatrix::zeros(matrix.nrows(), 0)
    } else {
        CMatrix::from_columns(&basis)
    }
}
