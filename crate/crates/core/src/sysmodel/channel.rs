use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Layout, LinkGeometry, SystemConfig};
use crate::error::{Error, Result};

/// Circularly-symmetric complex Gaussian sample with the given variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// ULA response: entry `n` is `exp(-j 2 pi n ratio cos(theta))`.
pub fn steering_vector(theta: f64, antennas: usize, spacing_ratio: f64) -> Array1<Complex64> {
    let phase = -2.0 * PI * spacing_ratio * theta.cos();
    Array1::from_iter((0..antennas).map(|n| Complex64::from_polar(1.0, phase * n as f64)))
}

/// `sqrt(beta / N) * sum_n alpha_n a(theta_n)` for explicit path gains and angles.
pub fn channel_from_paths(
    beta: f64,
    paths: &[(Complex64, f64)],
    antennas: usize,
    spacing_ratio: f64,
) -> Array1<Complex64> {
    let mut h = Array1::<Complex64>::zeros(antennas);
    for &(alpha, theta) in paths {
        h.scaled_add(alpha, &steering_vector(theta, antennas, spacing_ratio));
    }
    let scale = (beta / paths.len().max(1) as f64).sqrt();
    h.mapv_inplace(|z| z * scale);
    h
}

/// Draws one multipath channel realisation for a link.
///
/// Path gains are i.i.d. CN(0, 1); path angles are the nominal AOA plus a
/// uniform offset within half the angular spread on either side.
pub fn draw_channel<R: Rng + ?Sized>(link: &LinkGeometry, config: &SystemConfig, rng: &mut R) -> Array1<Complex64> {
    let half_spread = config.angular_spread_deg.to_radians() / 2.0;
    let paths: Vec<(Complex64, f64)> = (0..config.num_paths)
        .map(|_| {
            let alpha = complex_normal(rng, 1.0);
            let offset = if half_spread > 0.0 {
                rng.random_range(-half_spread..=half_spread)
            } else {
                0.0
            };
            (alpha, link.nominal_aoa + offset)
        })
        .collect();
    channel_from_paths(
        link.large_scale,
        &paths,
        config.antennas_per_ap,
        config.antenna_spacing_ratio,
    )
}

/// Orthogonal pilot book: column `k` is the `k`-th DFT basis vector of length `tau`,
/// so every pilot has squared norm `tau`.
pub fn pilot_matrix(tau: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((tau, tau), |(t, k)| {
        Complex64::from_polar(1.0, -2.0 * PI * (t * k) as f64 / tau as f64)
    })
}

/// Received pilot block at every AP.
///
/// `channels` is AP-major (`m * K + k`); returns one `L x tau` block per AP:
/// `Y_m = sum_i sqrt(p_i) h_mi phi_i^T + N_m`.
pub fn pilot_receive<R: Rng + ?Sized>(
    channels: &[Array1<Complex64>],
    powers: &[f64],
    pilots: &Array2<Complex64>,
    noise_power: f64,
    rng: &mut R,
) -> Result<Vec<Array2<Complex64>>> {
    let k_count = powers.len();
    if pilots.ncols() != k_count {
        return Err(Error::DimensionMismatch {
            context: "pilot_receive pilots",
            expected: k_count,
            got: pilots.ncols(),
        });
    }
    if k_count == 0 || !channels.len().is_multiple_of(k_count) {
        return Err(Error::DimensionMismatch {
            context: "pilot_receive channels",
            expected: k_count,
            got: channels.len(),
        });
    }
    let tau = pilots.nrows();
    let m_count = channels.len() / k_count;
    let mut blocks = Vec::with_capacity(m_count);
    for m in 0..m_count {
        let antennas = channels[m * k_count].len();
        let mut y = Array2::<Complex64>::zeros((antennas, tau));
        for (i, &p) in powers.iter().enumerate() {
            let h = &channels[m * k_count + i];
            let amp = p.sqrt();
            for ((l, t), v) in y.indexed_iter_mut() {
                *v += h[l] * pilots[(t, i)] * amp;
            }
        }
        if noise_power > 0.0 {
            y.mapv_inplace(|v| v + complex_normal(rng, noise_power));
        }
        blocks.push(y);
    }
    Ok(blocks)
}

/// Despreads UE `k`'s pilot and applies the LS estimator:
/// `y = Y phi_k^* / sqrt(tau)`, `h_hat = y / sqrt(p_k tau)`.
pub fn despread_and_ls(
    received: &Array2<Complex64>,
    pilot: ArrayView1<Complex64>,
    power: f64,
    tau: usize,
) -> Result<Array1<Complex64>> {
    let energy = power * tau as f64;
    if energy <= 0.0 {
        return Err(Error::DegenerateConfig(format!(
            "LS estimation needs p_k * tau_p > 0, got {energy}"
        )));
    }
    if pilot.len() != received.ncols() {
        return Err(Error::DimensionMismatch {
            context: "despread_and_ls pilot",
            expected: received.ncols(),
            got: pilot.len(),
        });
    }
    let conj = pilot.mapv(|z| z.conj());
    let despread = received.dot(&conj) / Complex64::new((tau as f64).sqrt(), 0.0);
    Ok(despread / Complex64::new(energy.sqrt(), 0.0))
}

/// True and LS-estimated channels for every link of a layout, AP-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub num_ues: usize,
    pub true_channels: Vec<Array1<Complex64>>,
    pub estimated_channels: Vec<Array1<Complex64>>,
}

impl ChannelSet {
    /// One coherence block: draw channels, transmit pilots, estimate.
    pub fn draw<R: Rng + ?Sized>(layout: &Layout, config: &SystemConfig, rng: &mut R) -> Result<Self> {
        let k_count = layout.num_ues();
        if config.pilot_length != k_count {
            return Err(Error::config("pilot_length", "K = tau_p is required"));
        }
        let true_channels: Vec<_> = layout
            .links()
            .iter()
            .map(|link| draw_channel(link, config, rng))
            .collect();
        let pilots = pilot_matrix(config.pilot_length);
        let powers = vec![config.ue_tx_power; k_count];
        let blocks = pilot_receive(&true_channels, &powers, &pilots, config.noise_power, rng)?;
        let mut estimated_channels = Vec::with_capacity(true_channels.len());
        for y in &blocks {
            for k in 0..k_count {
                estimated_channels.push(despread_and_ls(
                    y,
                    pilots.column(k),
                    config.ue_tx_power,
                    config.pilot_length,
                )?);
            }
        }
        Ok(ChannelSet {
            num_ues: k_count,
            true_channels,
            estimated_channels,
        })
    }

    pub fn true_channel(&self, m: usize, k: usize) -> &Array1<Complex64> {
        &self.true_channels[m * self.num_ues + k]
    }

    pub fn estimate(&self, m: usize, k: usize) -> &Array1<Complex64> {
        &self.estimated_channels[m * self.num_ues + k]
    }
}
