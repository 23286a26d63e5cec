//! Artificial-noise hybrid design when Eve's channel is unknown.
//!
//! The beam pairs and baseband stage come from the unprojected hybrid
//! design. Alice spends the least power `P_s` that keeps Bob at the QoS
//! target and radiates the rest as artificial noise through the right
//! singular vectors of the effective channel that Bob's baseband combiner
//! does not see:
//!
//! `x = F_RF (√P_s F_BB s + √P_AN F_BB,w w)`.
//!
//! `F_RF F_BB,w` has unit Frobenius norm and `w` is white with unit power per
//! dimension, so the radiated AN covariance is
//! `P_AN · F_RF F_BB,w F_BB,wᴴ F_RF^H` with trace exactly `P_AN`.

use crate::beamforming::{rate_from_projected, CodebookPair, LinkNoise, TransmitConfig};
use crate::linalg::{log2_det_identity_plus_gram, svd_sorted};
use crate::secure_design::{design_from_initial_channel, DesignResult};
use crate::{CMatrix, Error, Result, C64};

/// Relative bracket width at which the power bisection stops.
pub const BISECTION_REL_TOL: f64 = 1e-6;
/// Iteration cap for the power bisection.
pub const MAX_BISECTION_ITERS: usize = 200;

/// Minimum signal power meeting a QoS target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosPower {
    pub power: f64,
    /// `false` when even `power_cap` misses the target; `power` is then the cap.
    pub feasible: bool,
}

/// Upper bound on `R_b(P_s) − R_γ` after bisection stops at relative
/// bracket width `rel_tol`.
///
/// `d R_b / d ln P ≤ N_s / ln 2`, so a bracket `[lo, hi]` with
/// `hi − lo ≤ rel_tol·hi` moves the rate by at most `N_s·ln(hi/lo)/ln 2`.
pub fn qos_rate_slack(num_streams: usize, rel_tol: f64) -> f64 {
    num_streams as f64 * (-(1.0 - rel_tol).ln()) / std::f64::consts::LN_2
}

/// Bob's rate as a function of signal power for a fixed design.
struct BobLink {
    projected: CMatrix,
    noise_cov: CMatrix,
    num_streams: usize,
}

impl BobLink {
    fn new(h_bob: &CMatrix, design: &DesignResult, noise: LinkNoise) -> Result<Self> {
        let w = design.combiner.full();
        let f = design.precoder.full();
        if h_bob.shape() != (w.nrows(), f.nrows()) {
            return Err(Error::DimensionMismatch(format!(
                "channel {:?} against precoder {:?} and combiner {:?}",
                h_bob.shape(),
                f.shape(),
                w.shape()
            )));
        }
        Ok(Self {
            projected: w.adjoint() * h_bob * &f,
            noise_cov: w.adjoint() * &w * C64::from(noise.variance()),
            num_streams: f.ncols(),
        })
    }

    fn rate(&self, power: f64) -> Result<f64> {
        rate_from_projected(&self.projected, &self.noise_cov, power, self.num_streams)
    }
}

/// Smallest `P_s ∈ [0, power_cap]` with `R_b(P_s) ≥ qos`, by bisection on the
/// monotone rate curve. Returns the upper end of the final bracket so the
/// target is always met when feasible.
pub fn min_power_for_qos(
    h_bob: &CMatrix,
    design: &DesignResult,
    noise: LinkNoise,
    qos: f64,
    power_cap: f64,
    tolerance: f64,
) -> Result<QosPower> {
    if !(qos >= 0.0) || !(tolerance > 0.0) || !(power_cap >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "qos {qos}, power cap {power_cap}, tolerance {tolerance}"
        )));
    }
    let link = BobLink::new(h_bob, design, noise)?;
    if qos == 0.0 {
        return Ok(QosPower { power: 0.0, feasible: true });
    }
    if link.rate(power_cap)? < qos {
        return Ok(QosPower { power: power_cap, feasible: false });
    }
    let (mut lo, mut hi) = (0.0_f64, power_cap);
    for _ in 0..MAX_BISECTION_ITERS {
        if hi - lo <= tolerance * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if link.rate(mid)? >= qos {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(QosPower { power: hi, feasible: true })
}

/// AN baseband precoder `V̄(:, N_s+1..N_RF)` of the effective channel,
/// scaled so that `‖F_RF F_BB,w‖_F = 1`.
pub fn an_precoder(effective_channel: &CMatrix, analog: &CMatrix, tx: &TransmitConfig) -> Result<CMatrix> {
    let (ns, n_rf) = (tx.num_streams(), tx.num_rf_chains());
    if ns >= n_rf {
        return Err(Error::NoAnDimensions { streams: ns, rf_chains: n_rf });
    }
    if effective_channel.shape() != (n_rf, n_rf) || analog.ncols() != n_rf {
        return Err(Error::DimensionMismatch(format!(
            "effective channel {:?}, analog precoder {:?}, {n_rf} RF chains",
            effective_channel.shape(),
            analog.shape()
        )));
    }
    let (_, _, v) = svd_sorted(effective_channel);
    let raw = v.columns(ns, n_rf - ns).into_owned();
    let norm = (analog * &raw).norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroPrecoder);
    }
    Ok(raw / C64::from(norm))
}

/// Output of the artificial-noise design.
#[derive(Debug, Clone)]
pub struct AnDesignResult {
    /// Hybrid design run without Eve projection.
    pub base: DesignResult,
    /// `F_BB,w`, `N_RF × (N_RF − N_s)`.
    pub an_digital_precoder: CMatrix,
    pub signal_power: f64,
    pub an_power: f64,
    pub qos_threshold: f64,
    pub feasible: bool,
}

impl AnDesignResult {
    /// `F_RF F_BB,w`.
    pub fn an_precoder_full(&self) -> CMatrix {
        &self.base.precoder.analog * &self.an_digital_precoder
    }

    pub fn an_dimensions(&self) -> usize {
        self.an_digital_precoder.ncols()
    }

    pub fn num_streams(&self) -> usize {
        self.base.precoder.num_streams()
    }

    /// Transmit covariance of the AN, `P_AN · F_RF F_BB,w F_BB,wᴴ F_RF^H`.
    pub fn an_covariance(&self) -> CMatrix {
        let g = self.an_precoder_full();
        &g * g.adjoint() * C64::from(self.an_power)
    }
}

/// Full AN design: hybrid design on `H_b`, minimum QoS power, residual power
/// to AN, AN precoder in Bob's combined null space.
pub fn design_unknown_csi(
    h_bob: &CMatrix,
    codebooks: &CodebookPair,
    tx: &TransmitConfig,
    noise_b: LinkNoise,
    qos: f64,
) -> Result<AnDesignResult> {
    if tx.num_streams() >= tx.num_rf_chains() {
        return Err(Error::NoAnDimensions {
            streams: tx.num_streams(),
            rf_chains: tx.num_rf_chains(),
        });
    }
    let base = design_from_initial_channel(h_bob, h_bob, codebooks, tx)?;
    an_design_from_base(h_bob, base, tx, noise_b, qos)
}

/// Power split and AN precoder on top of an existing unprojected hybrid
/// design. Lets a QoS sweep reuse one beam selection across targets.
pub fn an_design_from_base(
    h_bob: &CMatrix,
    base: DesignResult,
    tx: &TransmitConfig,
    noise_b: LinkNoise,
    qos: f64,
) -> Result<AnDesignResult> {
    let qos_power = min_power_for_qos(h_bob, &base, noise_b, qos, tx.total_power(), BISECTION_REL_TOL)?;
    let an_digital_precoder = an_precoder(&base.effective_channel, &base.precoder.analog, tx)?;
    Ok(AnDesignResult {
        an_digital_precoder,
        signal_power: qos_power.power,
        an_power: (tx.total_power() - qos_power.power).max(0.0),
        qos_threshold: qos,
        feasible: qos_power.feasible,
        base,
    })
}

/// Bob's rate from the full data-plus-AN signal after his hybrid combiner.
/// AN enters the post-combining covariance as Gaussian interference.
pub fn bob_rate_with_an(h_bob: &CMatrix, design: &AnDesignResult, noise_b: LinkNoise) -> Result<f64> {
    let w = design.base.combiner.full();
    let projected = w.adjoint() * h_bob * design.base.precoder.full();
    let jam = w.adjoint() * h_bob * design.an_precoder_full();
    let noise_cov = w.adjoint() * &w * C64::from(noise_b.variance())
        + &jam * jam.adjoint() * C64::from(design.an_power);
    rate_from_projected(&projected, &noise_cov, design.signal_power, design.num_streams())
}

/// Eve's rate with an optimal receiver, treating AN as Gaussian noise:
/// `log₂ det(I + (P_s/N_s) Q⁻¹ H_e F F^H H_e^H)` with
/// `Q = σ_e² I + P_AN · H_e F_RF F_BB,w F_BB,w^H F_RF^H H_e^H`.
pub fn eve_rate_with_an(h_eve: &CMatrix, design: &AnDesignResult, noise_e: LinkNoise) -> Result<f64> {
    let f = design.base.precoder.full();
    if h_eve.ncols() != f.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "Eve channel {:?} against precoder {:?}",
            h_eve.shape(),
            f.shape()
        )));
    }
    // log det(Q + S) − log det(Q), both as I + (1/σ²)·(stacked)(stacked)^H
    let data = h_eve * f * C64::from((design.signal_power / design.num_streams() as f64).sqrt());
    let jam = h_eve * design.an_precoder_full() * C64::from(design.an_power.sqrt());
    let mut stacked = CMatrix::zeros(h_eve.nrows(), data.ncols() + jam.ncols());
    stacked.columns_mut(0, data.ncols()).copy_from(&data);
    stacked.columns_mut(data.ncols(), jam.ncols()).copy_from(&jam);
    let inv_var = 1.0 / noise_e.variance();
    let total = log2_det_identity_plus_gram(&stacked, inv_var);
    let interference = log2_det_identity_plus_gram(&jam, inv_var);
    Ok((total - interference).max(0.0))
}
