//! Scatterer-sharing limited-scattering channel model with ULA arrays.
//!
//! A common pool of scatterers is drawn once; Bob and Eve each pick a random
//! subset as their propagation paths. A scatterer fixes a single angle of
//! departure at Alice, so any scatterer selected by both receivers leaks the
//! same transmit direction to Eve. Angles of arrival are drawn per receiver.

use std::f64::consts::TAU;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, CVector, Error, Result, C64};

/// Uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaGeometry {
    num_antennas: usize,
    spacing: f64,
}

impl UlaGeometry {
    /// Array with `num_antennas` elements spaced `spacing` wavelengths apart.
    pub fn new(num_antennas: usize, spacing: f64) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::InvalidParameter("array needs at least one antenna".into()));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "element spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self { num_antennas, spacing })
    }

    /// Half-wavelength array.
    pub fn half_wavelength(num_antennas: usize) -> Result<Self> {
        Self::new(num_antennas, 0.5)
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    /// Element spacing over wavelength, `d/λ`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

/// Unit-norm ULA response: element `k` is `exp(j·2π·(d/λ)·k·sin θ) / √N`.
pub fn array_response(geometry: &UlaGeometry, angle: f64) -> CVector {
    let n = geometry.num_antennas;
    let scale = 1.0 / (n as f64).sqrt();
    let step = TAU * geometry.spacing * angle.sin();
    CVector::from_iterator(n, (0..n).map(|k| C64::from_polar(scale, step * k as f64)))
}

/// One physical scatterer. The departure angle at Alice is shared by every
/// receiver that uses it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub aod_at_alice: f64,
    pub aoa_at_bob: f64,
    pub aoa_at_eve: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Receiver {
    Bob,
    Eve,
}

/// Inclusive range of path counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCountRange {
    pub min: usize,
    pub max: usize,
}

impl PathCountRange {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min == 0 || min > max {
            return Err(Error::InvalidRange(format!(
                "path count range [{min}, {max}] must be nonempty and start at 1 or more"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, n: usize) -> bool {
        (self.min..=self.max).contains(&n)
    }
}

/// Scatterer pool plus the paths each receiver selected from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererPool {
    pub scatterers: Vec<Scatterer>,
    pub bob_path_indices: Vec<usize>,
    pub eve_path_indices: Vec<usize>,
}

impl ScattererPool {
    pub fn path_indices(&self, receiver: Receiver) -> &[usize] {
        match receiver {
            Receiver::Bob => &self.bob_path_indices,
            Receiver::Eve => &self.eve_path_indices,
        }
    }

    /// Pool indices used by both receivers.
    pub fn shared_indices(&self) -> Vec<usize> {
        self.bob_path_indices
            .iter()
            .copied()
            .filter(|i| self.eve_path_indices.contains(i))
            .collect()
    }
}

/// Draws `pool_size` scatterers with i.i.d. uniform angles on `[0, 2π)`, then
/// independent uniformly random path subsets for Bob and Eve whose sizes are
/// uniform over `path_counts`.
pub fn draw_scatterer_pool<R: Rng + ?Sized>(
    rng: &mut R,
    pool_size: usize,
    path_counts: PathCountRange,
) -> Result<ScattererPool> {
    PathCountRange::new(path_counts.min, path_counts.max)?;
    if pool_size < path_counts.max {
        return Err(Error::InvalidRange(format!(
            "pool of {pool_size} scatterers cannot supply up to {} paths",
            path_counts.max
        )));
    }
    let scatterers = (0..pool_size)
        .map(|_| Scatterer {
            aod_at_alice: rng.random::<f64>() * TAU,
            aoa_at_bob: rng.random::<f64>() * TAU,
            aoa_at_eve: rng.random::<f64>() * TAU,
        })
        .collect();
    let pick = |rng: &mut R| {
        let count = rng.random_range(path_counts.min..=path_counts.max);
        let mut idx = index::sample(rng, pool_size, count).into_vec();
        idx.sort_unstable();
        idx
    };
    let bob_path_indices = pick(rng);
    let eve_path_indices = pick(rng);
    Ok(ScattererPool {
        scatterers,
        bob_path_indices,
        eve_path_indices,
    })
}

/// A channel matrix together with the path parameters that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub matrix: CMatrix,
    pub path_gains: Vec<C64>,
    pub aods: Vec<f64>,
    pub aoas: Vec<f64>,
    pub path_loss: f64,
    pub tx_geometry: UlaGeometry,
    pub rx_geometry: UlaGeometry,
}

impl ChannelRealization {
    /// Assembles `√(N_tx·N_rx/ρ) Σ_l α_l a_rx(θ_l) a_tx(φ_l)^H`.
    pub fn from_paths(
        tx_geometry: UlaGeometry,
        rx_geometry: UlaGeometry,
        path_loss: f64,
        path_gains: Vec<C64>,
        aods: Vec<f64>,
        aoas: Vec<f64>,
    ) -> Result<Self> {
        if path_gains.is_empty() {
            return Err(Error::EmptyPathSet);
        }
        if aods.len() != path_gains.len() || aoas.len() != path_gains.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} gains, {} AoDs, {} AoAs",
                path_gains.len(),
                aods.len(),
                aoas.len()
            )));
        }
        if !(path_loss > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "path loss must be positive, got {path_loss}"
            )));
        }
        let matrix = assemble(&tx_geometry, &rx_geometry, path_loss, &path_gains, &aods, &aoas);
        Ok(Self {
            matrix,
            path_gains,
            aods,
            aoas,
            path_loss,
            tx_geometry,
            rx_geometry,
        })
    }

    pub fn num_paths(&self) -> usize {
        self.path_gains.len()
    }

    /// Rebuilds the matrix from the stored path parameters.
    pub fn reconstruct(&self) -> CMatrix {
        assemble(
            &self.tx_geometry,
            &self.rx_geometry,
            self.path_loss,
            &self.path_gains,
            &self.aods,
            &self.aoas,
        )
    }
}

fn assemble(
    tx: &UlaGeometry,
    rx: &UlaGeometry,
    path_loss: f64,
    gains: &[C64],
    aods: &[f64],
    aoas: &[f64],
) -> CMatrix {
    let scale = ((tx.num_antennas * rx.num_antennas) as f64 / path_loss).sqrt();
    let mut h = CMatrix::zeros(rx.num_antennas, tx.num_antennas);
    for ((&alpha, &aod), &aoa) in gains.iter().zip(aods).zip(aoas) {
        let a_rx = array_response(rx, aoa);
        let a_tx = array_response(tx, aod);
        h += (a_rx * C64::from(scale) * alpha) * a_tx.adjoint();
    }
    h
}

/// Draws i.i.d. `CN(0, 1)` path gains and assembles the receiver's channel
/// from its selected scatterers.
pub fn realize_channel<R: Rng + ?Sized>(
    pool: &ScattererPool,
    receiver: Receiver,
    tx_geometry: UlaGeometry,
    rx_geometry: UlaGeometry,
    path_loss: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let indices = pool.path_indices(receiver);
    if indices.is_empty() {
        return Err(Error::EmptyPathSet);
    }
    let mut gains = Vec::with_capacity(indices.len());
    let mut aods = Vec::with_capacity(indices.len());
    let mut aoas = Vec::with_capacity(indices.len());
    for &i in indices {
        let s = pool.scatterers.get(i).ok_or_else(|| {
            Error::InvalidRange(format!("path index {i} outside pool of {}", pool.scatterers.len()))
        })?;
        gains.push(complex_gaussian(rng));
        aods.push(s.aod_at_alice);
        aoas.push(match receiver {
            Receiver::Bob => s.aoa_at_bob,
            Receiver::Eve => s.aoa_at_eve,
        });
    }
    ChannelRealization::from_paths(tx_geometry, rx_geometry, path_loss, gains, aods, aoas)
}

/// One `CN(0, 1)` sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn ula(n: usize) -> UlaGeometry {
        UlaGeometry::half_wavelength(n).unwrap()
    }

    fn approx_vec(a: &CVector, expect: &[f64]) {
        assert_eq!(a.len(), expect.len());
        for (x, &e) in a.iter().zip(expect) {
            assert!((x - C64::from(e)).norm() < 1e-12, "{x} vs {e}");
        }
    }

    #[test]
    fn broadside_response_is_flat() {
        approx_vec(&array_response(&ula(4), 0.0), &[0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn single_element_response_is_one() {
        approx_vec(&array_response(&ula(1), 1.234), &[1.0]);
    }

    #[test]
    fn endfire_response_alternates() {
        approx_vec(&array_response(&ula(4), FRAC_PI_2), &[0.5, -0.5, 0.5, -0.5]);
    }

    #[test]
    fn geometry_rejects_bad_inputs() {
        assert!(UlaGeometry::new(0, 0.5).is_err());
        assert!(UlaGeometry::new(4, 0.0).is_err());
        assert!(UlaGeometry::new(4, -1.0).is_err());
    }

    #[test]
    fn pool_sizes_follow_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let range = PathCountRange::new(3, 8).unwrap();
        for _ in 0..50 {
            let pool = draw_scatterer_pool(&mut rng, 20, range).unwrap();
            assert_eq!(pool.scatterers.len(), 20);
            assert!(range.contains(pool.bob_path_indices.len()));
            assert!(range.contains(pool.eve_path_indices.len()));
            for s in &pool.scatterers {
                for a in [s.aod_at_alice, s.aoa_at_bob, s.aoa_at_eve] {
                    assert!((0.0..TAU).contains(&a));
                }
            }
        }
    }

    #[test]
    fn single_scatterer_is_shared() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pool = draw_scatterer_pool(&mut rng, 1, PathCountRange::new(1, 1).unwrap()).unwrap();
        assert_eq!(pool.shared_indices(), vec![0]);
        let hb = realize_channel(&pool, Receiver::Bob, ula(4), ula(4), 1.0, &mut rng).unwrap();
        let he = realize_channel(&pool, Receiver::Eve, ula(4), ula(3), 1.0, &mut rng).unwrap();
        assert_eq!(hb.aods, he.aods);
    }

    #[test]
    fn pool_is_deterministic_under_seed() {
        let range = PathCountRange::new(3, 8).unwrap();
        let a = draw_scatterer_pool(&mut ChaCha8Rng::seed_from_u64(42), 20, range).unwrap();
        let b = draw_scatterer_pool(&mut ChaCha8Rng::seed_from_u64(42), 20, range).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pool_smaller_than_max_paths_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = draw_scatterer_pool(&mut rng, 5, PathCountRange::new(3, 8).unwrap());
        assert!(matches!(err, Err(Error::InvalidRange(_))));
        assert!(PathCountRange::new(4, 3).is_err());
    }

    #[test]
    fn empty_path_set_is_rejected() {
        let pool = ScattererPool {
            scatterers: vec![Scatterer { aod_at_alice: 0.0, aoa_at_bob: 0.0, aoa_at_eve: 0.0 }],
            bob_path_indices: vec![0],
            eve_path_indices: vec![],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = realize_channel(&pool, Receiver::Eve, ula(2), ula(2), 1.0, &mut rng);
        assert_eq!(err.unwrap_err(), Error::EmptyPathSet);
    }

    #[test]
    fn scalar_single_path_channel_is_one() {
        let h = ChannelRealization::from_paths(ula(1), ula(1), 1.0, vec![C64::from(1.0)], vec![0.3], vec![2.1])
            .unwrap();
        assert!((h.matrix[(0, 0)] - C64::from(1.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_gain_path_contributes_nothing() {
        let one = ChannelRealization::from_paths(ula(4), ula(3), 1.0, vec![C64::new(0.3, -1.2)], vec![0.7], vec![PI / 3.0])
            .unwrap();
        let two = ChannelRealization::from_paths(
            ula(4),
            ula(3),
            1.0,
            vec![C64::new(0.3, -1.2), C64::from(0.0)],
            vec![0.7, 2.0],
            vec![PI / 3.0, 5.0],
        )
        .unwrap();
        assert!((one.matrix - two.matrix).norm() < 1e-12);
    }

    #[test]
    fn broadside_four_by_four_is_all_ones() {
        // √(16/1) · (½·1)(½·1)^H per entry, assembled element by element.
        let h = ChannelRealization::from_paths(ula(4), ula(4), 1.0, vec![C64::from(1.0)], vec![0.0], vec![0.0])
            .unwrap();
        let expected = CMatrix::from_fn(4, 4, |_, _| C64::from((16.0_f64).sqrt() * 0.5 * 0.5));
        assert!((h.matrix - expected).norm() < 1e-12);
    }
}
