//! Position arithmetic: RMSE, polar estimates, fusion of per-AP candidates
//! and the noiseless forward fingerprint model used to score hypotheses.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::{dft_matrix, rss_hardened};
use crate::sysmodel::{
    large_scale_fading, steering_vector, wrap_coord, wrap_delta, Layout, LinkGeometry, Point, SystemConfig,
};

/// One AP's polar estimate of one UE: horizontal distance and azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Polar {
    pub distance: f64,
    pub angle: f64,
}

/// Per-AP polar estimates (AP-major, `m * K + k`) and the fused UE positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionEstimate {
    pub num_ues: usize,
    pub polar: Vec<Polar>,
    pub fused: Vec<Point>,
}

impl PositionEstimate {
    pub fn polar_at(&self, m: usize, k: usize) -> Polar {
        self.polar[m * self.num_ues + k]
    }
}

/// Root mean squared positioning error under wrap-around distances.
pub fn rmse(actual: &[Point], estimated: &[Point], area_side: f64) -> Result<f64> {
    if actual.len() != estimated.len() || actual.is_empty() {
        return Err(Error::DimensionMismatch {
            context: "rmse",
            expected: actual.len(),
            got: estimated.len(),
        });
    }
    let sum: f64 = actual
        .iter()
        .zip(estimated)
        .map(|(&a, &e)| {
            let (dx, dy) = wrap_delta(a, e, area_side);
            dx * dx + dy * dy
        })
        .sum();
    Ok((sum / actual.len() as f64).sqrt())
}

/// `ap + d (cos theta, sin theta)`, folded into the service area.
pub fn polar_to_position(ap: Point, distance: f64, angle: f64, area_side: f64) -> Point {
    Point::new(
        wrap_coord(ap.x + distance * angle.cos(), area_side),
        wrap_coord(ap.y + distance * angle.sin(), area_side),
    )
}

fn circular_mean(values: impl Iterator<Item = (f64, f64)>, area_side: f64) -> Option<f64> {
    let (mut c, mut s) = (0.0, 0.0);
    for (v, w) in values {
        let phase = 2.0 * PI * v / area_side;
        c += w * phase.cos();
        s += w * phase.sin();
    }
    if c.hypot(s) < 1e-12 {
        return None;
    }
    Some(wrap_coord(s.atan2(c) * area_side / (2.0 * PI), area_side))
}

/// Weighted wrap-aware centroid: a circular mean per axis.
///
/// If the weighted resultant vanishes on an axis (antipodal candidates), the
/// heaviest candidate's coordinate is used for that axis.
pub fn fuse_estimates(candidates: &[Point], weights: &[f64], area_side: f64) -> Result<Point> {
    if candidates.len() != weights.len() || candidates.is_empty() {
        return Err(Error::DimensionMismatch {
            context: "fuse_estimates",
            expected: candidates.len(),
            got: weights.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::ZeroWeights);
    }
    let heaviest = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| candidates[i])
        .expect("nonempty");
    let norm = |w: &f64| w / total;
    let x = circular_mean(candidates.iter().zip(weights).map(|(p, w)| (p.x, norm(w))), area_side).unwrap_or(heaviest.x);
    let y = circular_mean(candidates.iter().zip(weights).map(|(p, w)| (p.y, norm(w))), area_side).unwrap_or(heaviest.y);
    Ok(Point::new(x, y))
}

/// Shadowing-free link geometry from every AP to a hypothesised position.
fn hypothesis_links(hypothesis: Point, layout: &Layout, config: &SystemConfig) -> Vec<LinkGeometry> {
    layout
        .ap_positions
        .iter()
        .map(|&ap| LinkGeometry::between(ap, hypothesis, 0.0, config))
        .collect()
}

/// Hardened RSS each AP would observe from a UE at `hypothesis`, without shadowing.
pub fn forward_rss(hypothesis: Point, layout: &Layout, config: &SystemConfig) -> Array1<f64> {
    Array1::from_iter(layout.ap_positions.iter().map(|&ap| {
        let (dx, dy) = wrap_delta(ap, hypothesis, config.area_side);
        let d3 = dx.hypot(dy).hypot(config.ap_ue_height_diff);
        rss_hardened(
            large_scale_fading(d3, 0.0),
            config.ue_tx_power,
            config.pilot_length,
            config.antennas_per_ap,
        )
    }))
}

/// Single-path beamspace signature at `hypothesis`: column `m` is
/// `beta p tau |F a(theta_m)|^2`.
pub fn forward_aoa(hypothesis: Point, layout: &Layout, config: &SystemConfig) -> Array2<f64> {
    let dft = dft_matrix(config.antennas_per_ap);
    forward_aoa_with(&dft, hypothesis, layout, config)
}

/// [`forward_aoa`] with a precomputed DFT matrix.
pub fn forward_aoa_with(
    dft: &Array2<num_complex::Complex64>,
    hypothesis: Point,
    layout: &Layout,
    config: &SystemConfig,
) -> Array2<f64> {
    let l_count = config.antennas_per_ap;
    let links = hypothesis_links(hypothesis, layout, config);
    let mut theta = Array2::zeros((l_count, links.len()));
    for (m, link) in links.iter().enumerate() {
        let scale = link.large_scale * config.pilot_energy();
        let g = dft.dot(&steering_vector(
            link.nominal_aoa,
            l_count,
            config.antenna_spacing_ratio,
        ));
        for (t, z) in theta.column_mut(m).iter_mut().zip(g.iter()) {
            *t = scale * z.norm_sqr();
        }
    }
    theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::wrap_distance;

    const SIDE: f64 = 100.0;

    #[test]
    fn rmse_cases() {
        let a = vec![Point::new(1.0, 1.0), Point::new(20.0, 30.0)];
        assert_eq!(rmse(&a, &a, SIDE).unwrap(), 0.0);
        let one = rmse(&[Point::new(0.0, 0.0)], &[Point::new(3.0, 4.0)], SIDE).unwrap();
        assert!((one - 5.0).abs() < 1e-12);
        let two = rmse(
            &[Point::new(10.0, 10.0), Point::new(10.0, 10.0)],
            &[Point::new(10.0, 10.0), Point::new(13.0, 14.0)],
            SIDE,
        )
        .unwrap();
        assert!((two - (12.5f64).sqrt()).abs() < 1e-12);
        assert!(rmse(&a, &a[..1], SIDE).is_err());
    }

    #[test]
    fn polar_cases() {
        let p = polar_to_position(Point::new(0.0, 0.0), 5.0, 0.0, SIDE);
        assert!((p.x - 5.0).abs() < 1e-12 && p.y.abs() < 1e-12);
        let ap = Point::new(42.0, 17.0);
        assert_eq!(polar_to_position(ap, 0.0, 1.2, SIDE), ap);
        let w = polar_to_position(Point::new(98.0, 0.0), 5.0, 0.0, SIDE);
        assert!((w.x - 3.0).abs() < 1e-12 && w.y.abs() < 1e-12);
    }

    #[test]
    fn fusion_cases() {
        let p = Point::new(12.0, 80.0);
        let f = fuse_estimates(&[p, p, p], &[1.0, 2.0, 0.5], SIDE).unwrap();
        assert!((f.x - p.x).abs() < 1e-9 && (f.y - p.y).abs() < 1e-9);
        let f = fuse_estimates(&[Point::new(0.0, 0.0), Point::new(10.0, 0.0)], &[1.0, 1.0], SIDE).unwrap();
        assert!((f.x - 5.0).abs() < 1e-9 && f.y.abs() < 1e-9);
        let f = fuse_estimates(&[Point::new(30.0, 40.0), Point::new(70.0, 5.0)], &[1.0, 0.0], SIDE).unwrap();
        assert!((f.x - 30.0).abs() < 1e-9 && (f.y - 40.0).abs() < 1e-9);
        assert!(matches!(fuse_estimates(&[p], &[0.0], SIDE), Err(Error::ZeroWeights)));
    }

    #[test]
    fn fusion_across_the_seam() {
        let f = fuse_estimates(&[Point::new(98.0, 50.0), Point::new(4.0, 50.0)], &[1.0, 1.0], SIDE).unwrap();
        assert!((f.x - 1.0).abs() < 1e-9, "{f:?}");
    }

    fn layout() -> (SystemConfig, Layout) {
        let config = SystemConfig {
            shadow_std_db: 0.0,
            ..SystemConfig::desk()
        };
        let aps = vec![
            Point::new(10.0, 10.0),
            Point::new(60.0, 20.0),
            Point::new(30.0, 70.0),
            Point::new(85.0, 85.0),
        ];
        let ues = vec![Point::new(40.0, 40.0)];
        let layout = Layout::from_positions(&config, aps, ues, &[0.0; 4]);
        (config, layout)
    }

    #[test]
    fn forward_rss_matches_hardened_truth() {
        let (config, layout) = layout();
        let psi = forward_rss(layout.ue_positions[0], &layout, &config);
        for m in 0..4 {
            let want = rss_hardened(layout.link(m, 0).large_scale, config.ue_tx_power, 4, 4);
            assert_eq!(psi[m], want);
        }
    }

    #[test]
    fn forward_rss_decreases_with_distance() {
        let config = SystemConfig::desk();
        let aps = vec![Point::new(10.0, 10.0), Point::new(14.0, 10.0)];
        let layout = Layout::from_positions(&config, aps, vec![Point::new(0.0, 0.0)], &[0.0; 2]);
        let near = forward_rss(Point::new(12.0, 15.0), &layout, &config);
        let far = forward_rss(Point::new(12.0, 35.0), &layout, &config);
        assert!(near.iter().zip(far.iter()).all(|(n, f)| f < n));
    }

    #[test]
    fn forward_rss_depends_on_distance_only() {
        let (config, layout) = layout();
        let ap = layout.ap_positions[0];
        let a = forward_rss(Point::new(ap.x + 7.0, ap.y), &layout, &config);
        let b = forward_rss(Point::new(ap.x, ap.y - 7.0), &layout, &config);
        assert!((a[0] - b[0]).abs() <= 1e-15 * a[0]);
    }

    #[test]
    fn forward_aoa_broadside_column() {
        let (config, layout) = layout();
        let ap = layout.ap_positions[1];
        let hyp = Point::new(ap.x, ap.y + 12.0);
        let theta = forward_aoa(hyp, &layout, &config);
        let beta = large_scale_fading(12f64.hypot(10.0), 0.0);
        let scale = beta * config.pilot_energy();
        assert!((theta[(0, 1)] - 16.0 * scale).abs() < 1e-9 * scale);
        for l in 1..4 {
            assert!(theta[(l, 1)] < 1e-20 * scale);
        }
        assert_eq!(theta, forward_aoa(hyp, &layout, &config));
        for m in 0..4 {
            let d3 = wrap_distance(layout.ap_positions[m], hyp, SIDE).hypot(10.0);
            let scale = large_scale_fading(d3, 0.0) * config.pilot_energy();
            let energy: f64 = theta.column(m).sum();
            assert!((energy - 4.0 * 4.0 * scale).abs() < 1e-9 * energy);
        }
    }
}
