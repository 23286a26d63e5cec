#![allow(dead_code)]

use mmwave_secure::beamforming::{build_codebook, CodebookPair};
use mmwave_secure::channel::{complex_gaussian, UlaGeometry};
use mmwave_secure::harness::{draw_trial, ExperimentConfig};
use mmwave_secure::{CMatrix, CVector, C64};
use rand::Rng;

pub fn ula(n: usize) -> UlaGeometry {
    UlaGeometry::half_wavelength(n).unwrap()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    let v = CVector::from_fn(n, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v / C64::from(norm)
}

pub fn codebooks(tx: usize, rx: usize, bits: u32) -> CodebookPair {
    CodebookPair {
        precoder: build_codebook(ula(tx), bits).unwrap(),
        combiner: build_codebook(ula(rx), bits).unwrap(),
    }
}

/// Scatterer-sharing channel pair `(H_b, H_e)` with `n` antennas everywhere.
pub fn channel_pair(n: usize, seed: u64, trial: u64) -> (CMatrix, CMatrix) {
    let cfg = ExperimentConfig {
        tx_antennas: n,
        bob_antennas: n,
        eve_antennas: n,
        seed,
        ..ExperimentConfig::default()
    };
    let t = draw_trial(&cfg, trial).unwrap();
    (t.h_bob, t.h_eve)
}

/// One-sided exact sign test: probability of at least `wins` successes in
/// `wins + losses` fair coin flips. Ties are dropped by the caller.
pub fn sign_test_p_value(wins: usize, losses: usize) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    let ln_half_n = n as f64 * 0.5f64.ln();
    let mut ln_choose = 0.0; // ln C(n, 0)
    let mut tail = 0.0;
    for k in 0..=n {
        if k > 0 {
            ln_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        if k >= wins {
            tail += (ln_choose + ln_half_n).exp();
        }
    }
    tail.min(1.0)
}

/// Largest principal angle between the column spans of two matrices with
/// orthonormal columns.
pub fn max_principal_angle(a: &CMatrix, b: &CMatrix) -> f64 {
    let residual = b - a * (a.adjoint() * b);
    // largest singular value via the Gram eigenvalues (resolves angles down to ~1e-8)
    let eig = nalgebra::SymmetricEigen::new(residual.adjoint() * &residual);
    let top = eig.eigenvalues.iter().copied().fold(0.0_f64, f64::max);
    top.sqrt().min(1.0).asin()
}

/// Orthonormal basis of the column span, from the input's own columns.
pub fn column_basis(m: &CMatrix) -> CMatrix {
    let qr = m.clone().qr();
    qr.q()
}
