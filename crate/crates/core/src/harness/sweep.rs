use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Algorithm, ExperimentConfig, ExperimentKind, HarnessError, SecrecyResult, XKind};
use crate::an_design::{an_design_from_base, bob_rate_with_an, eve_rate_with_an};
use crate::beamforming::{
    build_codebook, eve_rate_upper_bound, link_rate, mutual_info_rate, secrecy_rate, CodebookPair, LinkNoise,
    TransmitConfig,
};
use crate::benchmarks::{full_digital_ged, full_digital_no_pls, hybrid_no_pls};
use crate::channel::{draw_scatterer_pool, realize_channel, PathCountRange, Receiver, ScattererPool, UlaGeometry};
use crate::secure_design::{design_known_csi, DesignResult};
use crate::{CMatrix, Result};

/// Channels shared by every algorithm within one trial.
#[derive(Debug, Clone)]
pub struct Trial {
    pub trial_id: u64,
    pub pool: ScattererPool,
    pub h_bob: CMatrix,
    pub h_eve: CMatrix,
}

/// `P = 10^(SNR/10) · σ²`.
pub fn snr_db_to_power(snr_db: f64, noise_variance: f64) -> f64 {
    10f64.powf(snr_db / 10.0) * noise_variance
}

/// RNG stream for one trial: ChaCha keyed by the seed, stream id = trial id.
fn trial_rng(seed: u64, trial_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_id);
    rng
}

struct Setup {
    tx_geometry: UlaGeometry,
    bob_geometry: UlaGeometry,
    eve_geometry: UlaGeometry,
    codebooks: CodebookPair,
    noise_b: LinkNoise,
    noise_e: LinkNoise,
}

impl Setup {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        let d = config.element_spacing;
        let tx_geometry = UlaGeometry::new(config.tx_antennas, d)?;
        let bob_geometry = UlaGeometry::new(config.bob_antennas, d)?;
        Ok(Self {
            tx_geometry,
            bob_geometry,
            eve_geometry: UlaGeometry::new(config.eve_antennas, d)?,
            codebooks: CodebookPair {
                precoder: build_codebook(tx_geometry, config.codebook_bits)?,
                combiner: build_codebook(bob_geometry, config.codebook_bits)?,
            },
            noise_b: LinkNoise::new(config.noise_variance_bob)?,
            noise_e: LinkNoise::new(config.noise_variance_eve)?,
        })
    }
}

/// Draws the scatterer pool and both channels for `trial_id`.
pub fn draw_trial(config: &ExperimentConfig, trial_id: u64) -> Result<Trial> {
    let setup = Setup::new(config)?;
    draw_trial_with(config, &setup, trial_id)
}

fn draw_trial_with(config: &ExperimentConfig, setup: &Setup, trial_id: u64) -> Result<Trial> {
    let mut rng = trial_rng(config.seed, trial_id);
    let [lo, hi] = config.path_count_range;
    let pool = draw_scatterer_pool(&mut rng, config.pool_size, PathCountRange::new(lo, hi)?)?;
    let h_bob = realize_channel(
        &pool,
        Receiver::Bob,
        setup.tx_geometry,
        setup.bob_geometry,
        config.path_loss_bob,
        &mut rng,
    )?
    .matrix;
    let h_eve = realize_channel(
        &pool,
        Receiver::Eve,
        setup.tx_geometry,
        setup.eve_geometry,
        config.path_loss_eve,
        &mut rng,
    )?
    .matrix;
    Ok(Trial {
        trial_id,
        pool,
        h_bob,
        h_eve,
    })
}

fn validated(config: &ExperimentConfig, kind: ExperimentKind) -> std::result::Result<Setup, HarnessError> {
    config.validate(kind)?;
    Setup::new(config).map_err(|source| HarnessError::Simulation { trial_id: 0, source })
}

fn run_trials<F>(config: &ExperimentConfig, setup: &Setup, per_trial: F) -> std::result::Result<Vec<SecrecyResult>, HarnessError>
where
    F: Fn(&Trial) -> Result<Vec<SecrecyResult>> + Sync,
{
    let chunks: Vec<Vec<SecrecyResult>> = (0..config.num_trials)
        .into_par_iter()
        .map(|trial_id| {
            draw_trial_with(config, setup, trial_id)
                .and_then(|trial| per_trial(&trial))
                .map_err(|source| HarnessError::Simulation { trial_id, source })
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut rows: Vec<SecrecyResult> = chunks.into_iter().flatten().collect();
    super::sort_results(&mut rows);
    Ok(rows)
}

fn result(trial_id: u64, algorithm: Algorithm, x_kind: XKind, x_value: f64, rate_bob: f64, rate_eve: f64, infeasible: bool) -> SecrecyResult {
    SecrecyResult {
        trial_id,
        algorithm,
        x_kind,
        x_value,
        rate_bob,
        rate_eve,
        secrecy_rate: secrecy_rate(rate_bob, rate_eve),
        infeasible,
    }
}

/// Hybrid designs that do not depend on power, computed once per trial.
struct HybridDesigns {
    known: Option<DesignResult>,
    no_pls: Option<DesignResult>,
    base_for_an: Option<DesignResult>,
}

impl HybridDesigns {
    fn new(config: &ExperimentConfig, setup: &Setup, trial: &Trial) -> Result<Self> {
        let tx = TransmitConfig::new(1.0, config.streams, config.rf_chains)?;
        let has = |a| config.algorithms.contains(&a);
        let no_pls = if has(Algorithm::HybridNoPls) || has(Algorithm::UnknownCsiAn) {
            Some(hybrid_no_pls(&trial.h_bob, &setup.codebooks, &tx)?)
        } else {
            None
        };
        Ok(Self {
            known: if has(Algorithm::KnownCsi) {
                Some(design_known_csi(&trial.h_bob, &trial.h_eve, &setup.codebooks, &tx)?)
            } else {
                None
            },
            base_for_an: no_pls.clone(),
            no_pls,
        })
    }
}

/// Rates `(R_b, R_e, infeasible)` of one algorithm on one trial at total
/// power `tx.total_power()`.
fn evaluate(
    algorithm: Algorithm,
    trial: &Trial,
    designs: &HybridDesigns,
    setup: &Setup,
    tx: &TransmitConfig,
    an_qos: f64,
) -> Result<(f64, f64, bool)> {
    let (hb, he) = (&trial.h_bob, &trial.h_eve);
    let hybrid = |d: &DesignResult| -> Result<(f64, f64, bool)> {
        let rb = mutual_info_rate(hb, &d.precoder, &d.combiner, setup.noise_b, tx)?;
        let re = eve_rate_upper_bound(he, &d.precoder.full(), setup.noise_e, tx)?;
        Ok((rb, re, false))
    };
    match algorithm {
        Algorithm::KnownCsi => hybrid(designs.known.as_ref().expect("designed when selected")),
        Algorithm::HybridNoPls => hybrid(designs.no_pls.as_ref().expect("designed when selected")),
        Algorithm::UnknownCsiAn => {
            let base = designs.base_for_an.clone().expect("designed when selected");
            let an = an_design_from_base(hb, base, tx, setup.noise_b, an_qos)?;
            let rb = bob_rate_with_an(hb, &an, setup.noise_b)?;
            let re = eve_rate_with_an(he, &an, setup.noise_e)?;
            Ok((rb, re, !an.feasible))
        }
        Algorithm::FullDigitalGed | Algorithm::FullDigitalNoPls => {
            let bf = if algorithm == Algorithm::FullDigitalGed {
                full_digital_ged(hb, he, tx, setup.noise_b, setup.noise_e)?
            } else {
                full_digital_no_pls(hb, tx)?
            };
            let rb = link_rate(hb, &bf.precoder, &bf.combiner, setup.noise_b, tx.total_power(), tx.num_streams())?;
            let re = eve_rate_upper_bound(he, &bf.precoder, setup.noise_e, tx)?;
            Ok((rb, re, false))
        }
    }
}

/// Secrecy rate versus SNR: one row per (trial, SNR point, algorithm).
pub fn run_snr_sweep(config: &ExperimentConfig) -> std::result::Result<Vec<SecrecyResult>, HarnessError> {
    let setup = validated(config, ExperimentKind::SnrSweep)?;
    run_trials(config, &setup, |trial| snr_rows(config, &setup, trial))
}

/// The SNR-sweep rows of a single, possibly hand-built, trial.
pub fn evaluate_snr_trial(config: &ExperimentConfig, trial: &Trial) -> Result<Vec<SecrecyResult>> {
    let setup = Setup::new(config)?;
    let mut rows = snr_rows(config, &setup, trial)?;
    super::sort_results(&mut rows);
    Ok(rows)
}

fn snr_rows(config: &ExperimentConfig, setup: &Setup, trial: &Trial) -> Result<Vec<SecrecyResult>> {
    let designs = HybridDesigns::new(config, setup, trial)?;
    let mut rows = Vec::with_capacity(config.snr_grid_db.len() * config.algorithms.len());
    for &snr in &config.snr_grid_db {
        let power = snr_db_to_power(snr, config.noise_variance_bob);
        let tx = TransmitConfig::new(power, config.streams, config.rf_chains)?;
        for &alg in &config.algorithms {
            let (rb, re, infeasible) = evaluate(alg, trial, &designs, setup, &tx, config.an_qos)?;
            rows.push(result(trial.trial_id, alg, XKind::SnrDb, snr, rb, re, infeasible));
        }
    }
    Ok(rows)
}

/// Spectral efficiency versus QoS target at fixed total power. The AN design
/// is rerun per target; other selected algorithms do not depend on the target
/// and report their full-power rates at every grid point.
pub fn run_qos_sweep(config: &ExperimentConfig) -> std::result::Result<Vec<SecrecyResult>, HarnessError> {
    let setup = validated(config, ExperimentKind::QosSweep)?;
    let power = snr_db_to_power(config.qos_snr_db, config.noise_variance_bob);
    run_trials(config, &setup, |trial| {
        let designs = HybridDesigns::new(config, &setup, trial)?;
        let tx = TransmitConfig::new(power, config.streams, config.rf_chains)?;
        let mut fixed = Vec::new();
        for &alg in config.algorithms.iter().filter(|&&a| a != Algorithm::UnknownCsiAn) {
            fixed.push((alg, evaluate(alg, trial, &designs, &setup, &tx, 0.0)?));
        }
        let mut rows = Vec::with_capacity(config.qos_grid.len() * config.algorithms.len());
        for &qos in &config.qos_grid {
            let (rb, re, infeasible) = evaluate(Algorithm::UnknownCsiAn, trial, &designs, &setup, &tx, qos)?;
            rows.push(result(trial.trial_id, Algorithm::UnknownCsiAn, XKind::Qos, qos, rb, re, infeasible));
            for &(alg, (rb, re, inf)) in &fixed {
                rows.push(result(trial.trial_id, alg, XKind::Qos, qos, rb, re, inf));
            }
        }
        Ok(rows)
    })
}
