//! Codebooks, hybrid precoder/combiner containers and link metrics.

use std::f64::consts::{LN_2, TAU};

use serde::{Deserialize, Serialize};

use crate::channel::{array_response, UlaGeometry};
use crate::linalg::{ln_det_hpd, log2_det_identity_plus_gram};
use crate::{CMatrix, CVector, Error, Result, C64};

pub use crate::linalg::{truncated_svd, TruncatedSvd};

/// Steering codebook of `2^B` array responses at angles `2π(k+1)/2^B`,
/// `k = 0..2^B`. Entries are stored as matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogCodebook {
    geometry: UlaGeometry,
    bits: u32,
    vectors: CMatrix,
}

/// Builds the `bits`-bit steering codebook for `geometry`.
pub fn build_codebook(geometry: UlaGeometry, bits: u32) -> Result<AnalogCodebook> {
    if bits == 0 || bits > 24 {
        return Err(Error::InvalidParameter(format!(
            "codebook bits must be in 1..=24, got {bits}"
        )));
    }
    let size = 1usize << bits;
    let columns: Vec<CVector> = (0..size)
        .map(|k| array_response(&geometry, codebook_angle(bits, k)))
        .collect();
    Ok(AnalogCodebook {
        geometry,
        bits,
        vectors: CMatrix::from_columns(&columns),
    })
}

fn codebook_angle(bits: u32, k: usize) -> f64 {
    TAU * (k + 1) as f64 / (1u64 << bits) as f64
}

impl AnalogCodebook {
    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn geometry(&self) -> UlaGeometry {
        self.geometry
    }

    /// Quantized angle of entry `index`.
    pub fn angle(&self, index: usize) -> f64 {
        codebook_angle(self.bits, index)
    }

    pub fn vector(&self, index: usize) -> CVector {
        self.vectors.column(index).into_owned()
    }

    /// All entries as columns of an `N × 2^B` matrix.
    pub fn matrix(&self) -> &CMatrix {
        &self.vectors
    }

    /// Matrix whose columns are the given entries, in order.
    pub fn gather(&self, indices: &[usize]) -> CMatrix {
        let cols: Vec<CVector> = indices.iter().map(|&i| self.vector(i)).collect();
        if cols.is_empty() {
            CMatrix::zeros(self.vectors.nrows(), 0)
        } else {
            CMatrix::from_columns(&cols)
        }
    }
}

/// Precoder and combiner codebooks used by the hybrid designs.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookPair {
    pub precoder: AnalogCodebook,
    pub combiner: AnalogCodebook,
}

/// `F = F_RF F_BB` with codebook provenance for every analog column.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridPrecoder {
    pub analog: CMatrix,
    pub analog_indices: Vec<usize>,
    pub digital: CMatrix,
}

impl HybridPrecoder {
    pub fn full(&self) -> CMatrix {
        &self.analog * &self.digital
    }

    /// `‖F_RF F_BB‖_F²`.
    pub fn power(&self) -> f64 {
        self.full().norm_squared()
    }

    pub fn num_streams(&self) -> usize {
        self.digital.ncols()
    }
}

/// `W = W_RF W_BB` with codebook provenance for every analog column.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridCombiner {
    pub analog: CMatrix,
    pub analog_indices: Vec<usize>,
    pub digital: CMatrix,
}

impl HybridCombiner {
    pub fn full(&self) -> CMatrix {
        &self.analog * &self.digital
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkNoise {
    variance: f64,
}

impl LinkNoise {
    pub fn new(variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive, got {variance}"
            )));
        }
        Ok(Self { variance })
    }

    pub fn unit() -> Self {
        Self { variance: 1.0 }
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

/// Total power `P`, data streams `N_s` and RF chains `N_RF`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmitConfig {
    total_power: f64,
    num_streams: usize,
    num_rf_chains: usize,
}

impl TransmitConfig {
    pub fn new(total_power: f64, num_streams: usize, num_rf_chains: usize) -> Result<Self> {
        if !(total_power > 0.0) || !total_power.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "total power must be positive, got {total_power}"
            )));
        }
        if num_streams == 0 || num_streams > num_rf_chains {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= streams ({num_streams}) <= RF chains ({num_rf_chains})"
            )));
        }
        Ok(Self {
            total_power,
            num_streams,
            num_rf_chains,
        })
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn num_streams(&self) -> usize {
        self.num_streams
    }

    pub fn num_rf_chains(&self) -> usize {
        self.num_rf_chains
    }

    /// Same streams and RF chains at a different total power.
    pub fn with_power(&self, total_power: f64) -> Result<Self> {
        Self::new(total_power, self.num_streams, self.num_rf_chains)
    }
}

/// Rate of a linearly precoded and combined link:
/// `log₂ det(I + (P/N_s) R_n⁻¹ (W^H H F)(W^H H F)^H)` with
/// `R_n = σ² W^H W`.
///
/// `precoder` is the full `N_tx × N_s` matrix and `combiner` the full
/// `N_rx × N_s` matrix. The determinant ratio is evaluated through two
/// Cholesky factorizations, `det(R_n + M) / det(R_n)`.
pub fn link_rate(
    channel: &CMatrix,
    precoder: &CMatrix,
    combiner: &CMatrix,
    noise: LinkNoise,
    power: f64,
    num_streams: usize,
) -> Result<f64> {
    check_link_dims(channel, precoder, combiner)?;
    let a = combiner.adjoint() * channel * precoder;
    let noise_cov = combiner.adjoint() * combiner * C64::from(noise.variance);
    rate_from_projected(&a, &noise_cov, power, num_streams)
}

/// `log₂ det(I + (P/N_s) R⁻¹ A A^H)` for an already-combined channel `A` and
/// post-combining interference-plus-noise covariance `R`.
pub(crate) fn rate_from_projected(
    projected: &CMatrix,
    noise_cov: &CMatrix,
    power: f64,
    num_streams: usize,
) -> Result<f64> {
    let ln_det_noise = ln_det_hpd(noise_cov).ok_or(Error::SingularNoiseCovariance)?;
    if power == 0.0 {
        return Ok(0.0);
    }
    let signal = projected * projected.adjoint() * C64::from(power / num_streams as f64);
    let ln_det_total = ln_det_hpd(&(noise_cov + signal)).ok_or(Error::SingularNoiseCovariance)?;
    Ok(((ln_det_total - ln_det_noise) / LN_2).max(0.0))
}

fn check_link_dims(channel: &CMatrix, precoder: &CMatrix, combiner: &CMatrix) -> Result<()> {
    if precoder.nrows() != channel.ncols() || combiner.nrows() != channel.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "channel {:?}, precoder {:?}, combiner {:?}",
            channel.shape(),
            precoder.shape(),
            combiner.shape()
        )));
    }
    Ok(())
}

/// Achievable rate with hybrid precoder and combiner at the configured power.
pub fn mutual_info_rate(
    channel: &CMatrix,
    precoder: &HybridPrecoder,
    combiner: &HybridCombiner,
    noise: LinkNoise,
    tx: &TransmitConfig,
) -> Result<f64> {
    link_rate(
        channel,
        &precoder.full(),
        &combiner.full(),
        noise,
        tx.total_power(),
        tx.num_streams(),
    )
}

/// Combiner-independent capacity of Eve's link for a given precoder,
/// `log₂ det(I + (P/(N_s σ²)) H F F^H H^H)`. Upper-bounds the rate Eve gets
/// with any combiner.
pub fn eve_rate_upper_bound(
    channel_e: &CMatrix,
    precoder: &CMatrix,
    noise_e: LinkNoise,
    tx: &TransmitConfig,
) -> Result<f64> {
    if precoder.nrows() != channel_e.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "channel {:?}, precoder {:?}",
            channel_e.shape(),
            precoder.shape()
        )));
    }
    let hf = channel_e * precoder;
    let scale = tx.total_power() / (tx.num_streams() as f64 * noise_e.variance());
    Ok(log2_det_identity_plus_gram(&hf, scale))
}

/// `[R_b − R_e]^+`.
pub fn secrecy_rate(rate_bob: f64, rate_eve: f64) -> f64 {
    (rate_bob - rate_eve).max(0.0)
}

/// Rescales the digital precoder so that `‖F_RF F_BB‖_F² = target`.
pub fn normalize_digital(precoder: &HybridPrecoder, target: f64) -> Result<HybridPrecoder> {
    let norm = precoder.full().norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroPrecoder);
    }
    let scale = target.sqrt() / norm;
    Ok(HybridPrecoder {
        analog: precoder.analog.clone(),
        analog_indices: precoder.analog_indices.clone(),
        digital: &precoder.digital * C64::from(scale),
    })
}
