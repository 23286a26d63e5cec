//! Joint hybrid precoder/combiner design when Eve's channel is known.
//!
//! Pipeline:
//! 1. project Bob's channel onto the orthogonal complement of Eve's
//!    transmit-side row space,
//! 2. pick `N_RF` codebook beam pairs one at a time, each maximizing
//!    `|w^H H_i f|` on a channel deflated by the previously chosen pairs,
//! 3. take the SVD of the effective channel `W_RF^H H_b F_RF` for the
//!    baseband precoder and combiner,
//! 4. scale the baseband precoder to `‖F_RF F_BB‖_F² = N_s`.

use crate::beamforming::{normalize_digital, AnalogCodebook, CodebookPair, HybridCombiner, HybridPrecoder, TransmitConfig};
use crate::linalg::{svd_sorted, truncated_svd};
use crate::{CMatrix, CVector, Error, LinkSide, Result, C64};

/// Relative singular-value threshold used to truncate Eve's channel.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Relative gap below which two beam-pair gains are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Gram–Schmidt residuals below this norm are treated as linearly dependent.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Successive-selection state: the deflated channel and the orthonormal
/// components of the beams chosen so far.
#[derive(Debug, Clone)]
pub struct DeflationState {
    pub current_channel: CMatrix,
    pub tx_components: Vec<CVector>,
    pub rx_components: Vec<CVector>,
}

impl DeflationState {
    pub fn new(initial_channel: CMatrix) -> Self {
        Self {
            current_channel: initial_channel,
            tx_components: Vec::new(),
            rx_components: Vec::new(),
        }
    }

    /// Adds the selected beams and returns the deflated state
    /// `H_{i+1} = (I − q q^H) H_i (I − p p^H)`.
    pub fn deflate(&self, f_star: &CVector, w_star: &CVector) -> Result<Self> {
        deflate(self, f_star, w_star)
    }

    /// `[p_1 … p_k]`.
    pub fn tx_basis(&self) -> CMatrix {
        stack(&self.tx_components, self.current_channel.ncols())
    }

    /// `[q_1 … q_k]`.
    pub fn rx_basis(&self) -> CMatrix {
        stack(&self.rx_components, self.current_channel.nrows())
    }
}

fn stack(vectors: &[CVector], rows: usize) -> CMatrix {
    if vectors.is_empty() {
        CMatrix::zeros(rows, 0)
    } else {
        CMatrix::from_columns(vectors)
    }
}

/// Orthonormal component of `v` against `basis`. The first component is the
/// vector itself; later ones are Gram–Schmidt residuals, reorthogonalized
/// once.
fn orthonormal_component(basis: &[CVector], v: &CVector, side: LinkSide) -> Result<CVector> {
    if basis.is_empty() {
        return Ok(v.clone());
    }
    let mut r = v.clone();
    for pass in 0..2 {
        for b in basis {
            let coeff = b.dotc(&r);
            r -= b * coeff;
        }
        if pass == 0 && r.norm() < RESIDUAL_TOLERANCE {
            return Err(Error::DegenerateResidual { side });
        }
    }
    let norm = r.norm();
    if norm < RESIDUAL_TOLERANCE {
        return Err(Error::DegenerateResidual { side });
    }
    Ok(r / C64::from(norm))
}

/// One Gram–Schmidt/deflation step for the selected precoder and combiner
/// beams.
pub fn deflate(state: &DeflationState, f_star: &CVector, w_star: &CVector) -> Result<DeflationState> {
    let h = &state.current_channel;
    if f_star.len() != h.ncols() || w_star.len() != h.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "channel {:?}, precoder beam {}, combiner beam {}",
            h.shape(),
            f_star.len(),
            w_star.len()
        )));
    }
    let p = orthonormal_component(&state.tx_components, f_star, LinkSide::Transmit)?;
    let q = orthonormal_component(&state.rx_components, w_star, LinkSide::Receive)?;

    // (I − q q^H) H (I − p p^H) without forming the projectors
    let mut next = h - &q * (q.adjoint() * h);
    let hp = &next * &p;
    next -= hp * p.adjoint();

    let mut tx_components = state.tx_components.clone();
    tx_components.push(p);
    let mut rx_components = state.rx_components.clone();
    rx_components.push(q);
    Ok(DeflationState {
        current_channel: next,
        tx_components,
        rx_components,
    })
}

/// Orthonormal basis `Ṽ_e` of Eve's transmit-side row space.
pub fn eve_row_space(h_eve: &CMatrix, rank_tolerance: f64) -> CMatrix {
    truncated_svd(h_eve, rank_tolerance).v
}

/// `H_1 = H_b (I − Ṽ_e Ṽ_e^H)`: removes every departure direction Eve's
/// channel responds to.
pub fn eve_nullspace_projection(h_bob: &CMatrix, h_eve: &CMatrix, rank_tolerance: f64) -> Result<CMatrix> {
    if h_bob.ncols() != h_eve.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Bob channel {:?} and Eve channel {:?} differ in transmit antennas",
            h_bob.shape(),
            h_eve.shape()
        )));
    }
    let v = eve_row_space(h_eve, rank_tolerance);
    if v.ncols() == 0 {
        return Ok(h_bob.clone());
    }
    Ok(h_bob - (h_bob * &v) * v.adjoint())
}

/// A selected (precoder, combiner) codebook pair. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPair {
    pub precoder_index: usize,
    pub combiner_index: usize,
    pub gain: f64,
}

/// `arg max_{w ∈ W, f ∈ F} |w^H H f|`, ties broken by the lowest
/// `(combiner_index, precoder_index)`.
pub fn select_beam_pair(channel: &CMatrix, precoder_codebook: &AnalogCodebook, combiner_codebook: &AnalogCodebook) -> BeamPair {
    select_beam_pair_excluding(channel, precoder_codebook, combiner_codebook, &[], &[])
        .expect("nonempty codebooks always yield a pair")
}

/// Like [`select_beam_pair`] but skips the flagged codebook entries. Returns
/// `None` when every entry of either codebook is excluded.
pub fn select_beam_pair_excluding(
    channel: &CMatrix,
    precoder_codebook: &AnalogCodebook,
    combiner_codebook: &AnalogCodebook,
    excluded_precoders: &[bool],
    excluded_combiners: &[bool],
) -> Option<BeamPair> {
    let gains = combiner_codebook.matrix().adjoint() * (channel * precoder_codebook.matrix());
    let skip = |mask: &[bool], i: usize| mask.get(i).copied().unwrap_or(false);
    let mut best: Option<BeamPair> = None;
    for w in 0..gains.nrows() {
        if skip(excluded_combiners, w) {
            continue;
        }
        for f in 0..gains.ncols() {
            if skip(excluded_precoders, f) {
                continue;
            }
            let g = gains[(w, f)].norm();
            // gains equal up to rounding count as ties and keep the earlier pair
            if best.is_none_or(|b| g > b.gain * (1.0 + TIE_TOLERANCE)) {
                best = Some(BeamPair {
                    precoder_index: f,
                    combiner_index: w,
                    gain: g,
                });
            }
        }
    }
    best
}

/// SVD baseband stage: `F_BB = V̄(:, 1..N_s)`, `W_BB = Ū(:, 1..N_s)`.
pub fn digital_stage(effective_channel: &CMatrix, tx: &TransmitConfig) -> Result<(CMatrix, CMatrix)> {
    let n_rf = tx.num_rf_chains();
    if effective_channel.shape() != (n_rf, n_rf) {
        return Err(Error::DimensionMismatch(format!(
            "effective channel {:?} is not {n_rf}×{n_rf}",
            effective_channel.shape()
        )));
    }
    let (u, _, v) = svd_sorted(effective_channel);
    let ns = tx.num_streams();
    Ok((v.columns(0, ns).into_owned(), u.columns(0, ns).into_owned()))
}

/// Output of the hybrid design.
#[derive(Debug, Clone)]
pub struct DesignResult {
    pub precoder: HybridPrecoder,
    pub combiner: HybridCombiner,
    /// `W_RF^H H_b F_RF`, `N_RF × N_RF`.
    pub effective_channel: CMatrix,
    /// Per RF chain, in selection order.
    pub selected: Vec<BeamPair>,
    /// Orthonormal transmit components `[p_1 … p_NRF]`.
    pub tx_components: CMatrix,
    /// Orthonormal receive components `[q_1 … q_NRF]`.
    pub rx_components: CMatrix,
    /// Set when a selected beam had to be excluded because it was linearly
    /// dependent on earlier ones.
    pub fallback_used: bool,
}

/// Runs successive selection, the SVD digital stage and power normalization
/// starting from `initial_channel` (`H_1`). The effective channel is always
/// formed with the unprojected `h_bob`.
pub fn design_from_initial_channel(
    initial_channel: &CMatrix,
    h_bob: &CMatrix,
    codebooks: &CodebookPair,
    tx: &TransmitConfig,
) -> Result<DesignResult> {
    let (fcb, wcb) = (&codebooks.precoder, &codebooks.combiner);
    if initial_channel.shape() != h_bob.shape()
        || h_bob.ncols() != fcb.geometry().num_antennas()
        || h_bob.nrows() != wcb.geometry().num_antennas()
    {
        return Err(Error::DimensionMismatch(format!(
            "channel {:?}, precoder codebook {} antennas, combiner codebook {} antennas",
            h_bob.shape(),
            fcb.geometry().num_antennas(),
            wcb.geometry().num_antennas()
        )));
    }

    let mut state = DeflationState::new(initial_channel.clone());
    let mut selected = Vec::with_capacity(tx.num_rf_chains());
    let mut fallback_used = false;
    for _ in 0..tx.num_rf_chains() {
        let mut excluded_f = vec![false; fcb.len()];
        let mut excluded_w = vec![false; wcb.len()];
        loop {
            let pair = select_beam_pair_excluding(&state.current_channel, fcb, wcb, &excluded_f, &excluded_w)
                .ok_or(Error::CodebookExhausted)?;
            let f = fcb.vector(pair.precoder_index);
            let w = wcb.vector(pair.combiner_index);
            match state.deflate(&f, &w) {
                Ok(next) => {
                    state = next;
                    selected.push(pair);
                    break;
                }
                Err(Error::DegenerateResidual { side }) => {
                    fallback_used = true;
                    match side {
                        LinkSide::Transmit => excluded_f[pair.precoder_index] = true,
                        LinkSide::Receive => excluded_w[pair.combiner_index] = true,
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    let f_idx: Vec<usize> = selected.iter().map(|p| p.precoder_index).collect();
    let w_idx: Vec<usize> = selected.iter().map(|p| p.combiner_index).collect();
    let f_rf = fcb.gather(&f_idx);
    let w_rf = wcb.gather(&w_idx);
    let effective_channel = w_rf.adjoint() * h_bob * &f_rf;
    let (f_bb, w_bb) = digital_stage(&effective_channel, tx)?;

    let precoder = normalize_digital(
        &HybridPrecoder {
            analog: f_rf,
            analog_indices: f_idx,
            digital: f_bb,
        },
        tx.num_streams() as f64,
    )?;
    let combiner = HybridCombiner {
        analog: w_rf,
        analog_indices: w_idx,
        digital: w_bb,
    };
    Ok(DesignResult {
        precoder,
        combiner,
        effective_channel,
        selected,
        tx_components: state.tx_basis(),
        rx_components: state.rx_basis(),
        fallback_used,
    })
}

/// Full design with Eve's channel known: Eve null-space projection followed
/// by [`design_from_initial_channel`].
pub fn design_known_csi(
    h_bob: &CMatrix,
    h_eve: &CMatrix,
    codebooks: &CodebookPair,
    tx: &TransmitConfig,
) -> Result<DesignResult> {
    let h1 = eve_nullspace_projection(h_bob, h_eve, RANK_TOLERANCE)?;
    design_from_initial_channel(&h1, h_bob, codebooks, tx)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::beamforming::build_codebook;
    use crate::channel::{complex_gaussian, UlaGeometry};

    fn ula(n: usize) -> UlaGeometry {
        UlaGeometry::half_wavelength(n).unwrap()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| complex_gaussian(rng))
    }

    #[test]
    fn zero_eve_channel_leaves_bob_untouched() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let hb = random_matrix(&mut rng, 4, 6);
        let h1 = eve_nullspace_projection(&hb, &CMatrix::zeros(3, 6), RANK_TOLERANCE).unwrap();
        assert_eq!(h1, hb);
    }

    #[test]
    fn identical_channels_project_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let hb = random_matrix(&mut rng, 3, 8);
        let h1 = eve_nullspace_projection(&hb, &hb, RANK_TOLERANCE).unwrap();
        assert!(h1.norm() <= 1e-9 * hb.norm());
    }

    #[test]
    fn orthogonal_departures_are_untouched() {
        // With N = 4 at half-wavelength spacing, sin φ = 0 and sin φ = 0.5
        // give phase steps 0 and π/2, whose responses are orthogonal.
        let g = ula(4);
        let phi_b = 0.0;
        let phi_e = (0.5_f64).asin();
        let ab = crate::channel::array_response(&g, phi_b);
        let ae = crate::channel::array_response(&g, phi_e);
        assert!(ab.dotc(&ae).norm() < 1e-12);
        let hb = crate::channel::ChannelRealization::from_paths(g, g, 1.0, vec![C64::new(0.8, 0.3)], vec![phi_b], vec![1.0])
            .unwrap()
            .matrix;
        let he = crate::channel::ChannelRealization::from_paths(g, g, 1.0, vec![C64::new(-0.4, 1.1)], vec![phi_e], vec![2.0])
            .unwrap()
            .matrix;
        let h1 = eve_nullspace_projection(&hb, &he, RANK_TOLERANCE).unwrap();
        assert!((h1 - &hb).norm() <= 1e-9 * hb.norm());
    }

    #[test]
    fn projection_rejects_mismatched_transmitters() {
        let r = eve_nullspace_projection(&CMatrix::zeros(2, 4), &CMatrix::zeros(2, 5), RANK_TOLERANCE);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn aligned_rank_one_channel_selects_its_beams() {
        let fcb = build_codebook(ula(4), 3).unwrap();
        let wcb = build_codebook(ula(6), 3).unwrap();
        let (m, k) = (5, 2);
        let h = wcb.vector(k) * fcb.vector(m).adjoint() * C64::from(2.5);
        let pair = select_beam_pair(&h, &fcb, &wcb);
        // f_m and w_k are unit-norm so the gain is exactly c; other entries
        // can only tie, and the lowest combiner index wins ties.
        assert!((pair.gain - 2.5).abs() < 1e-12);
        let g = wcb.vector(pair.combiner_index).dotc(&(&h * fcb.vector(pair.precoder_index))).norm();
        assert!((g - 2.5).abs() < 1e-12);
    }

    #[test]
    fn zero_channel_picks_first_pair() {
        let fcb = build_codebook(ula(4), 2).unwrap();
        let wcb = build_codebook(ula(4), 2).unwrap();
        let pair = select_beam_pair(&CMatrix::zeros(4, 4), &fcb, &wcb);
        assert_eq!((pair.precoder_index, pair.combiner_index, pair.gain), (0, 0, 0.0));
    }

    #[test]
    fn first_deflation_uses_raw_beams() {
        let fcb = build_codebook(ula(4), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_matrix(&mut rng, 4, 4);
        let s = DeflationState::new(h).deflate(&fcb.vector(3), &fcb.vector(6)).unwrap();
        assert_eq!(s.tx_components[0], fcb.vector(3));
        assert_eq!(s.rx_components[0], fcb.vector(6));
        let p = &s.tx_components[0];
        let q = &s.rx_components[0];
        assert!((q.adjoint() * &s.current_channel).norm() <= 1e-10);
        assert!((&s.current_channel * p).norm() <= 1e-10);
    }

    #[test]
    fn orthogonal_beam_is_kept_as_is() {
        let g = ula(4);
        let e0 = crate::channel::array_response(&g, 0.0);
        let e1 = crate::channel::array_response(&g, (0.5_f64).asin());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = DeflationState::new(random_matrix(&mut rng, 4, 4)).deflate(&e0, &e0).unwrap();
        let s = s.deflate(&e1, &e1).unwrap();
        assert!((&s.tx_components[1] - &e1).norm() < 1e-12);
    }

    #[test]
    fn repeated_beam_is_degenerate() {
        let g = ula(4);
        let e0 = crate::channel::array_response(&g, 0.3);
        let e1 = crate::channel::array_response(&g, 1.3);
        let s = DeflationState::new(CMatrix::identity(4, 4)).deflate(&e0, &e0).unwrap();
        assert_eq!(s.deflate(&e0, &e1).unwrap_err(), Error::DegenerateResidual { side: LinkSide::Transmit });
        assert_eq!(s.deflate(&e1, &e0).unwrap_err(), Error::DegenerateResidual { side: LinkSide::Receive });
    }

    #[test]
    fn identity_effective_channel_gives_identity_columns() {
        let tx = TransmitConfig::new(1.0, 2, 3).unwrap();
        let (fbb, wbb) = digital_stage(&CMatrix::identity(3, 3), &tx).unwrap();
        assert_eq!(fbb.shape(), (3, 2));
        // W^H I F must be the identity on the selected streams up to phases.
        let d = wbb.adjoint() * &fbb;
        assert!((d - CMatrix::identity(2, 2)).norm() < 1e-12);
        assert!((fbb.adjoint() * &fbb - CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn diagonal_effective_channel_selects_dominant_coordinates() {
        let tx = TransmitConfig::new(1.0, 2, 4).unwrap();
        let h = CMatrix::from_diagonal(&CVector::from_vec(
            [1.0, 4.0, 0.5, 2.0].iter().map(|&x| C64::from(x)).collect(),
        ));
        let (fbb, wbb) = digital_stage(&h, &tx).unwrap();
        for (col, coord) in [(0, 1), (1, 3)] {
            assert!((fbb[(coord, col)].norm() - 1.0).abs() < 1e-12);
            assert!((wbb[(coord, col)].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_rf_chain_design_is_one_selection() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let hb = random_matrix(&mut rng, 4, 4);
        let cbs = CodebookPair {
            precoder: build_codebook(ula(4), 3).unwrap(),
            combiner: build_codebook(ula(4), 3).unwrap(),
        };
        let tx = TransmitConfig::new(1.0, 1, 1).unwrap();
        let d = design_from_initial_channel(&hb, &hb, &cbs, &tx).unwrap();
        let pair = select_beam_pair(&hb, &cbs.precoder, &cbs.combiner);
        assert_eq!(d.selected, vec![pair]);
        assert!((d.precoder.power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_eve_matches_unprojected_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let hb = random_matrix(&mut rng, 8, 8);
        let cbs = CodebookPair {
            precoder: build_codebook(ula(8), 3).unwrap(),
            combiner: build_codebook(ula(8), 3).unwrap(),
        };
        let tx = TransmitConfig::new(1.0, 2, 2).unwrap();
        let a = design_known_csi(&hb, &CMatrix::zeros(8, 8), &cbs, &tx).unwrap();
        let b = design_from_initial_channel(&hb, &hb, &cbs, &tx).unwrap();
        assert_eq!(a.selected, b.selected);
        assert_eq!(a.precoder, b.precoder);
        assert_eq!(a.combiner, b.combiner);
    }

    #[test]
    fn fully_blocked_channel_falls_back_to_distinct_beams() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let hb = random_matrix(&mut rng, 4, 4);
        let cbs = CodebookPair {
            precoder: build_codebook(ula(4), 3).unwrap(),
            combiner: build_codebook(ula(4), 3).unwrap(),
        };
        let tx = TransmitConfig::new(1.0, 2, 2).unwrap();
        // Exactly zero H_1: every gain ties, so stream 2 re-picks pair (0, 0).
        let d = design_from_initial_channel(&CMatrix::zeros(4, 4), &hb, &cbs, &tx).unwrap();
        assert_eq!(d.selected.len(), 2);
        assert!(d.fallback_used);
        assert_ne!(d.selected[0].precoder_index, d.selected[1].precoder_index);
        assert_ne!(d.selected[0].combiner_index, d.selected[1].combiner_index);
        let p = &d.tx_components;
        assert!((p.adjoint() * p - CMatrix::identity(2, 2)).norm() < 1e-8);
    }
}
