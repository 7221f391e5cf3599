use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SystemConfig;

/// Planar coordinate in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Folds a coordinate into `[0, side)`.
pub fn wrap_coord(v: f64, side: f64) -> f64 {
    let w = v.rem_euclid(side);
    if w >= side {
        0.0
    } else {
        w
    }
}

/// Folds an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Signed minimum-image displacement from `from` to `to` on the torus.
pub fn wrap_delta(from: Point, to: Point, side: f64) -> (f64, f64) {
    let fold = |d: f64| d - side * (d / side).round();
    (fold(to.x - from.x), fold(to.y - from.y))
}

/// Horizontal distance under the wrap-around rule.
pub fn wrap_distance(p: Point, q: Point, side: f64) -> f64 {
    let (dx, dy) = wrap_delta(p, q, side);
    dx.hypot(dy)
}

/// Log-distance path loss with log-normal shadowing, as a linear gain.
///
/// `beta_dB = -30.5 - 36.7 log10(d) + shadow_db`.
pub fn large_scale_fading(distance_3d: f64, shadow_db: f64) -> f64 {
    let db = -30.5 - 36.7 * distance_3d.log10() + shadow_db;
    10f64.powf(db / 10.0)
}

/// Geometry of one AP-UE link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub horizontal_distance: f64,
    pub distance_3d: f64,
    /// Azimuth of the UE seen from the AP, measured from the array axis (x axis).
    pub nominal_aoa: f64,
    pub shadow_db: f64,
    pub large_scale: f64,
}

impl LinkGeometry {
    /// Geometry for a UE (or hypothesis) at `ue` seen from `ap`.
    pub fn between(ap: Point, ue: Point, shadow_db: f64, config: &SystemConfig) -> Self {
        let (dx, dy) = wrap_delta(ap, ue, config.area_side);
        let horizontal_distance = dx.hypot(dy);
        let distance_3d = horizontal_distance.hypot(config.ap_ue_height_diff);
        LinkGeometry {
            horizontal_distance,
            distance_3d,
            nominal_aoa: wrap_angle(dy.atan2(dx)),
            shadow_db,
            large_scale: large_scale_fading(distance_3d, shadow_db),
        }
    }
}

/// AP and UE placement plus the per-link geometry, stored AP-major (`m * K + k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub ap_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    links: Vec<LinkGeometry>,
}

impl Layout {
    /// Builds a layout from explicit positions and per-link shadowing (`m * K + k`).
    pub fn from_positions(
        config: &SystemConfig,
        ap_positions: Vec<Point>,
        ue_positions: Vec<Point>,
        shadow_db: &[f64],
    ) -> Self {
        let k_count = ue_positions.len();
        assert_eq!(shadow_db.len(), ap_positions.len() * k_count);
        let links = ap_positions
            .iter()
            .enumerate()
            .flat_map(|(m, &ap)| ue_positions.iter().enumerate().map(move |(k, &ue)| (m, k, ap, ue)))
            .map(|(m, k, ap, ue)| LinkGeometry::between(ap, ue, shadow_db[m * k_count + k], config))
            .collect();
        Layout {
            ap_positions,
            ue_positions,
            links,
        }
    }

    pub fn num_aps(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn num_ues(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn link(&self, m: usize, k: usize) -> &LinkGeometry {
        &self.links[m * self.num_ues() + k]
    }

    pub fn links(&self) -> &[LinkGeometry] {
        &self.links
    }
}

/// Draws i.i.d. uniform AP and UE positions and per-link shadowing.
pub fn generate_layout<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Layout {
    let side = config.area_side;
    let uniform_point = |rng: &mut R| {
        Point::new(
            wrap_coord(rng.random::<f64>() * side, side),
            wrap_coord(rng.random::<f64>() * side, side),
        )
    };
    let aps: Vec<Point> = (0..config.num_aps).map(|_| uniform_point(rng)).collect();
    let ues: Vec<Point> = (0..config.num_ues).map(|_| uniform_point(rng)).collect();
    let shadow: Vec<f64> = if config.shadow_std_db > 0.0 {
        let normal = Normal::new(0.0, config.shadow_std_db).expect("validated shadow std");
        (0..aps.len() * ues.len()).map(|_| normal.sample(rng)).collect()
    } else {
        vec![0.0; aps.len() * ues.len()]
    };
    Layout::from_positions(config, aps, ues, &shadow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> SystemConfig {
        SystemConfig::default()
    }

    #[test]
    fn wrap_distance_cases() {
        let o = Point::new(0.0, 0.0);
        assert_eq!(wrap_distance(o, Point::new(50.0, 0.0), 100.0), 50.0);
        assert!((wrap_distance(o, Point::new(99.0, 0.0), 100.0) - 1.0).abs() < 1e-12);
        let p = Point::new(10.0, 10.0);
        assert_eq!(wrap_distance(p, p, 100.0), 0.0);
    }

    #[test]
    fn corner_link_wraps() {
        let layout = Layout::from_positions(&cfg(), vec![Point::new(0.0, 0.0)], vec![Point::new(99.0, 99.0)], &[0.0]);
        let link = layout.link(0, 0);
        assert!((link.horizontal_distance - 2f64.sqrt()).abs() < 1e-12);
        assert!((link.distance_3d.powi(2) - (2.0 + 100.0)).abs() < 1e-9);
        // Displacement (-1, -1) points into the third quadrant.
        assert!((link.nominal_aoa + 3.0 * PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn fading_formula() {
        assert!((large_scale_fading(1.0, 0.0) - 10f64.powf(-3.05)).abs() < 1e-18);
        let ratio = large_scale_fading(40.0, 0.0) / large_scale_fading(20.0, 0.0);
        assert!((ratio - 2f64.powf(-3.67)).abs() < 1e-12);
        let shadowed = large_scale_fading(30.0, 10.0) / large_scale_fading(30.0, 0.0);
        assert!((shadowed - 10.0).abs() < 1e-12);
    }

    #[test]
    fn layout_is_seeded_and_in_area() {
        let config = cfg();
        let a = generate_layout(&config, &mut ChaCha8Rng::seed_from_u64(3));
        let b = generate_layout(&config, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        assert_eq!(a.num_aps(), 36);
        assert_eq!(a.num_ues(), 6);
        for p in a.ap_positions.iter().chain(&a.ue_positions) {
            assert!((0.0..100.0).contains(&p.x) && (0.0..100.0).contains(&p.y));
        }
        for link in a.links() {
            assert!(link.large_scale > 0.0);
            let lhs = link.distance_3d.powi(2);
            let rhs = link.horizontal_distance.powi(2) + 100.0;
            assert!((lhs - rhs).abs() < 1e-9 * rhs);
        }
    }

    #[test]
    fn angle_wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }
}
