//! RSS and angular-domain fingerprints, and the similarity coefficients used
//! to score a hypothesised fingerprint against an observed one.
//!
//! The AOA coefficient is `(1/sqrt(M)) * sum_m cos(Theta[:, m], Theta_hat[:, m])`.
//! With nonnegative inputs every cosine lies in `[0, 1]`, so the coefficient
//! lies in `[0, sqrt(M)]`; a perfect match scores `sqrt(M)`, not 1.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sysmodel::{ChannelSet, Layout, SystemConfig};

/// Floor applied to the RSS dissimilarity before dividing in the joint coefficient.
pub const JOINT_EPSILON: f64 = 1e-6;

/// Relative RSS error treated as an exact match.
pub const RSS_EXACT_TOLERANCE: f64 = 1e-12;

/// Coherence blocks averaged per angular power matrix.
pub const DEFAULT_BLOCKS: usize = 100;

/// Per-UE fingerprint: RSS over APs and the `L x M` angular power matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub rss: Array1<f64>,
    pub angular_power: Array2<f64>,
}

/// `p_k tau_p ||h||^2`.
pub fn rss_measured(h: ArrayView1<Complex64>, power: f64, tau: usize) -> f64 {
    power * tau as f64 * h.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Channel-hardened RSS, `L p_k tau_p beta`.
pub fn rss_hardened(beta: f64, power: f64, tau: usize, antennas: usize) -> f64 {
    antennas as f64 * power * tau as f64 * beta
}

/// `[F]_{i,j} = exp(-j 2 pi i j / L)` with zero-based indices.
pub fn dft_matrix(size: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((size, size), |(i, j)| {
        Complex64::from_polar(1.0, -2.0 * PI * ((i * j) % size) as f64 / size as f64)
    })
}

/// Beamspace response `g = F h_hat`.
pub fn angular_response(h_hat: ArrayView1<Complex64>, dft: &Array2<Complex64>) -> Array1<Complex64> {
    dft.dot(&h_hat)
}

/// Stacks the beamspace responses of one UE over all APs into `G_k` (`L x M`).
pub fn angular_response_matrix(estimates: &[ArrayView1<Complex64>], dft: &Array2<Complex64>) -> Array2<Complex64> {
    let mut g = Array2::zeros((dft.nrows(), estimates.len()));
    for (m, h) in estimates.iter().enumerate() {
        g.column_mut(m).assign(&angular_response(*h, dft));
    }
    g
}

/// Entrywise sample mean of `|G|^2` over realisations.
pub fn angular_power_matrix(samples: &[Array2<Complex64>]) -> Result<Array2<f64>> {
    let first = samples.first().ok_or(Error::EmptySamples(
        "angular_power_matrix needs at least one realisation",
    ))?;
    let mut acc = Array2::<f64>::zeros(first.raw_dim());
    for g in samples {
        if g.raw_dim() != first.raw_dim() {
            return Err(Error::DimensionMismatch {
                context: "angular_power_matrix sample",
                expected: first.len(),
                got: g.len(),
            });
        }
        acc.zip_mut_with(g, |a, z| *a += z.norm_sqr());
    }
    acc /= samples.len() as f64;
    Ok(acc)
}

fn column_cosine(a: ArrayView1<f64>, b: ArrayView1<f64>, column: usize) -> Result<f64> {
    let na = a.dot(&a).sqrt();
    let nb = b.dot(&b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateFingerprint { column });
    }
    Ok(a.dot(&b) / (na * nb))
}

/// AOA similarity between two angular power matrices of equal shape.
pub fn aoa_similarity(theta: ArrayView2<f64>, theta_hat: ArrayView2<f64>) -> Result<f64> {
    if theta.dim() != theta_hat.dim() {
        return Err(Error::DimensionMismatch {
            context: "aoa_similarity",
            expected: theta.len(),
            got: theta_hat.len(),
        });
    }
    let m_count = theta.ncols();
    let mut sum = 0.0;
    for m in 0..m_count {
        sum += column_cosine(theta.column(m), theta_hat.column(m), m)?;
    }
    Ok(sum / (m_count as f64).sqrt())
}

fn rss_error(psi: &Array1<f64>, psi_hat: &Array1<f64>) -> f64 {
    psi.iter()
        .zip(psi_hat.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Normalised RSS dissimilarity of every UE: `||Psi_k - Psi_hat_k|| / max_i ||Psi_i - Psi_hat_i||`.
///
/// Returns zeros when every error is zero, or below [`RSS_EXACT_TOLERANCE`]
/// relative to the largest fingerprint norm (floating-point round-off of an
/// exact match).
pub fn rss_similarity_all(psi_all: &[Array1<f64>], psi_hat_all: &[Array1<f64>]) -> Vec<f64> {
    assert_eq!(psi_all.len(), psi_hat_all.len());
    let errors: Vec<f64> = psi_all.iter().zip(psi_hat_all).map(|(a, b)| rss_error(a, b)).collect();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let norm = psi_all
        .iter()
        .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if worst == 0.0 || worst <= RSS_EXACT_TOLERANCE * norm {
        return vec![0.0; errors.len()];
    }
    errors.into_iter().map(|e| e / worst).collect()
}

/// Normalised RSS dissimilarity of UE `k` within the context of all UEs.
pub fn rss_similarity_normalized(psi_all: &[Array1<f64>], psi_hat_all: &[Array1<f64>], k: usize) -> f64 {
    rss_similarity_all(psi_all, psi_hat_all)[k]
}

/// Joint coefficient from its parts, `xi_a / max(xi_r, JOINT_EPSILON)`.
pub fn joint_from_parts(aoa: f64, rss_normalized: f64) -> f64 {
    aoa / rss_normalized.max(JOINT_EPSILON)
}

/// Joint AOA/RSS similarity of UE `k`.
pub fn joint_similarity(
    theta_k: ArrayView2<f64>,
    theta_hat_k: ArrayView2<f64>,
    psi_all: &[Array1<f64>],
    psi_hat_all: &[Array1<f64>],
    k: usize,
) -> Result<f64> {
    let aoa = aoa_similarity(theta_k, theta_hat_k)?;
    Ok(joint_from_parts(
        aoa,
        rss_similarity_normalized(psi_all, psi_hat_all, k),
    ))
}

/// Observed fingerprints of every UE in a layout.
///
/// RSS is the channel-hardened value (shadowing included); the angular power
/// matrix averages `|F h_hat|^2` over `blocks` independent coherence blocks.
pub fn extract_fingerprints<R: Rng + ?Sized>(
    layout: &Layout,
    config: &SystemConfig,
    blocks: usize,
    rng: &mut R,
) -> Result<Vec<Fingerprint>> {
    if blocks == 0 {
        return Err(Error::EmptySamples("fingerprint extraction needs at least one block"));
    }
    let (m_count, k_count, l_count) = (layout.num_aps(), layout.num_ues(), config.antennas_per_ap);
    let dft = dft_matrix(l_count);
    let mut theta = vec![Array2::<f64>::zeros((l_count, m_count)); k_count];
    for _ in 0..blocks {
        let set = ChannelSet::draw(layout, config, rng)?;
        for (k, acc) in theta.iter_mut().enumerate() {
            for m in 0..m_count {
                let g = angular_response(set.estimate(m, k).view(), &dft);
                for (a, z) in acc.column_mut(m).iter_mut().zip(g.iter()) {
                    *a += z.norm_sqr();
                }
            }
        }
    }
    let scale = 1.0 / blocks as f64;
    Ok(theta
        .into_iter()
        .enumerate()
        .map(|(k, mut angular_power)| {
            angular_power *= scale;
            let rss = Array1::from_iter((0..m_count).map(|m| {
                rss_hardened(
                    layout.link(m, k).large_scale,
                    config.ue_tx_power,
                    config.pilot_length,
                    l_count,
                )
            }));
            Fingerprint { rss, angular_power }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::steering_vector;
    use ndarray::array;

    #[test]
    fn rss_basics() {
        let zero = Array1::<Complex64>::zeros(4);
        assert_eq!(rss_measured(zero.view(), 1.0, 1), 0.0);
        let a = steering_vector(0.4, 8, 0.5);
        assert!((rss_measured(a.view(), 1.0, 1) - 8.0).abs() < 1e-12);
        assert_eq!(rss_hardened(2.0, 1.0, 1, 8), 16.0);
        assert_eq!(rss_hardened(2.0, 0.5, 2, 16), 2.0 * rss_hardened(2.0, 0.5, 2, 8));
        assert_eq!(rss_hardened(0.0, 1.0, 1, 8), 0.0);
    }

    #[test]
    fn small_dft_matrices() {
        assert_eq!(dft_matrix(1)[(0, 0)], Complex64::new(1.0, 0.0));
        let f = dft_matrix(2);
        let want = [[1.0, 1.0], [1.0, -1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((f[(i, j)] - Complex64::new(want[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn dft_is_scaled_unitary() {
        let f = dft_matrix(8);
        let fh = f.t().mapv(|z| z.conj());
        let prod = f.dot(&fh);
        for ((i, j), z) in prod.indexed_iter() {
            let want = if i == j { 8.0 } else { 0.0 };
            assert!((z - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn first_basis_vector_maps_to_ones() {
        let f = dft_matrix(5);
        let mut e1 = Array1::<Complex64>::zeros(5);
        e1[0] = Complex64::new(1.0, 0.0);
        let g = angular_response(e1.view(), &f);
        assert!(g.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn single_sample_power_matrix() {
        let g = array![[Complex64::new(1.0, 2.0)], [Complex64::new(0.0, -3.0)]];
        let theta = angular_power_matrix(std::slice::from_ref(&g)).unwrap();
        assert_eq!(theta, array![[5.0], [9.0]]);
        assert!(matches!(angular_power_matrix(&[]), Err(Error::EmptySamples(_))));
    }

    #[test]
    fn aoa_similarity_cases() {
        let theta = array![[1.0, 0.5, 0.0], [2.0, 0.5, 3.0]];
        let s = aoa_similarity(theta.view(), theta.view()).unwrap();
        assert!((s - 3f64.sqrt()).abs() < 1e-12);
        let a = array![[1.0], [0.0]];
        let b = array![[0.0], [2.0]];
        assert_eq!(aoa_similarity(a.view(), b.view()).unwrap(), 0.0);
        let z = array![[0.0], [0.0]];
        assert!(matches!(
            aoa_similarity(a.view(), z.view()),
            Err(Error::DegenerateFingerprint { column: 0 })
        ));
    }

    #[test]
    fn rss_normalization_cases() {
        let psi = vec![array![0.0, 0.0], array![0.0, 0.0]];
        let hat = vec![array![3.0, 0.0], array![0.0, 4.0]];
        assert_eq!(rss_similarity_all(&psi, &hat), vec![0.75, 1.0]);
        assert_eq!(rss_similarity_all(&psi, &psi), vec![0.0, 0.0]);
    }

    #[test]
    fn joint_guard() {
        assert_eq!(joint_from_parts(0.5, 0.25), 2.0);
        assert_eq!(joint_from_parts(2f64.sqrt(), 0.0), 2f64.sqrt() / JOINT_EPSILON);
    }
}
