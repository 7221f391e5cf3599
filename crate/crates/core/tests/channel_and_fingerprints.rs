mod common;

use cfloc::fingerprint::{
    aoa_similarity, extract_fingerprints, joint_similarity, rss_hardened, rss_similarity_all, JOINT_EPSILON,
};
use cfloc::locate::{forward_aoa, forward_rss, fuse_estimates, polar_to_position, rmse};
use cfloc::sysmodel::{
    despread_and_ls, generate_layout, large_scale_fading, pilot_matrix, pilot_receive, steering_vector, wrap_distance,
    Layout,
};
use cfloc::{seeded_rng, Point, SystemConfig};
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn path_loss_matches_db_formula() {
    for (d, shadow) in [(10.0, 0.0), (14.142, 3.5), (70.7, -4.0), (1.0, 0.0)] {
        let db = -30.5 - 36.7 * f64::log10(d) + shadow;
        let oracle = 10f64.powf(db / 10.0);
        assert!(common::rel_err(large_scale_fading(d, shadow), oracle) < 1e-12);
    }
}

#[test]
fn pilots_are_orthogonal_with_norm_tau() {
    for tau in 1..=8 {
        let p = pilot_matrix(tau);
        for i in 0..tau {
            for j in 0..tau {
                let dot: Complex64 = (0..tau).map(|t| p[(t, i)].conj() * p[(t, j)]).sum();
                let expected = if i == j { tau as f64 } else { 0.0 };
                assert!(
                    (dot - Complex64::new(expected, 0.0)).norm() < 1e-9,
                    "tau {tau} ({i},{j})"
                );
            }
        }
    }
}

#[test]
fn noiseless_ls_recovers_every_channel() {
    let mut rng = seeded_rng(1);
    let (m, k, l) = (3, 4, 5);
    let h: Vec<Array1<Complex64>> = (0..m * k)
        .map(|_| Array1::from_iter((0..l).map(|_| cfloc::sysmodel::complex_normal(&mut rng, 1.0))))
        .collect();
    let pilots = pilot_matrix(k);
    let y = pilot_receive(&h, &vec![0.3; k], &pilots, 0.0, &mut rng).unwrap();
    for ap in 0..m {
        for ue in 0..k {
            let est = despread_and_ls(&y[ap], pilots.column(ue), 0.3, k).unwrap();
            for (a, b) in est.iter().zip(h[ap * k + ue].iter()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn steering_vector_is_all_ones_at_broadside() {
    let a = steering_vector(std::f64::consts::FRAC_PI_2, 8, 0.5);
    for z in a.iter() {
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn layout_links_match_torus_geometry() {
    let cfg = SystemConfig::desk();
    let layout = generate_layout(&cfg, &mut seeded_rng(2));
    for (m, &ap) in layout.ap_positions.iter().enumerate() {
        for (k, &ue) in layout.ue_positions.iter().enumerate() {
            let link = layout.link(m, k);
            let d = common::torus_distance(ap, ue, cfg.area_side);
            assert!((link.horizontal_distance - d).abs() < 1e-9);
            assert!((link.distance_3d - d.hypot(cfg.ap_ue_height_diff)).abs() < 1e-9);
            let back = polar_to_position(ap, link.horizontal_distance, link.nominal_aoa, cfg.area_side);
            assert!(common::torus_distance(back, ue, cfg.area_side) < 1e-9);
        }
    }
}

#[test]
fn unshadowed_rss_fingerprint_equals_forward_model() {
    let cfg = SystemConfig {
        shadow_std_db: 0.0,
        ..SystemConfig::desk()
    };
    let mut rng = seeded_rng(3);
    let layout = generate_layout(&cfg, &mut rng);
    let fps = extract_fingerprints(&layout, &cfg, 5, &mut rng).unwrap();
    for (k, fp) in fps.iter().enumerate() {
        let fwd = forward_rss(layout.ue_positions[k], &layout, &cfg);
        for (a, b) in fp.rss.iter().zip(fwd.iter()) {
            assert!(common::rel_err(*a, *b) < 1e-12);
        }
        for m in 0..layout.num_aps() {
            let beta = layout.link(m, k).large_scale;
            let oracle = cfg.antennas_per_ap as f64 * cfg.ue_tx_power * cfg.pilot_length as f64 * beta;
            assert!(common::rel_err(fp.rss[m], oracle) < 1e-12);
            assert_eq!(
                fp.rss[m],
                rss_hardened(beta, cfg.ue_tx_power, cfg.pilot_length, cfg.antennas_per_ap)
            );
        }
    }
}

#[test]
fn angular_fingerprint_peaks_near_forward_model() {
    let cfg = SystemConfig {
        shadow_std_db: 0.0,
        angular_spread_deg: 0.0,
        ..SystemConfig::desk()
    };
    let mut rng = seeded_rng(4);
    let layout = generate_layout(&cfg, &mut rng);
    let fps = extract_fingerprints(&layout, &cfg, 200, &mut rng).unwrap();
    for (k, fp) in fps.iter().enumerate() {
        let fwd = forward_aoa(layout.ue_positions[k], &layout, &cfg);
        let sim = aoa_similarity(fp.angular_power.view(), fwd.view()).unwrap();
        let ceiling = (layout.num_aps() as f64).sqrt();
        assert!(sim > 0.95 * ceiling, "ue {k}: {sim} vs {ceiling}");
    }
}

#[test]
fn joint_similarity_engages_guard_for_exact_rss() {
    let theta = Array2::from_shape_fn((4, 3), |(i, j)| 1.0 + (i * 3 + j) as f64);
    let psi = vec![Array1::from(vec![1.0, 2.0, 3.0]), Array1::from(vec![4.0, 5.0, 6.0])];
    let v = joint_similarity(theta.view(), theta.view(), &psi, &psi, 0).unwrap();
    assert!(common::rel_err(v, 3f64.sqrt() / JOINT_EPSILON) < 1e-12);
}

fn small_matrix(l: usize, m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(1e-6..10.0f64, l), m)
}

fn to_array(cols: &[Vec<f64>]) -> Array2<f64> {
    Array2::from_shape_fn((cols[0].len(), cols.len()), |(i, j)| cols[j][i])
}

proptest! {
    #[test]
    fn wrap_distance_is_a_bounded_symmetric_metric(
        ax in 0.0..100.0f64, ay in 0.0..100.0f64, bx in 0.0..100.0f64, by in 0.0..100.0f64,
    ) {
        let (a, b) = (Point::new(ax, ay), Point::new(bx, by));
        let d = wrap_distance(a, b, 100.0);
        prop_assert!((d - wrap_distance(b, a, 100.0)).abs() < 1e-12);
        prop_assert!(d <= 50.0 * 2f64.sqrt() + 1e-9);
        prop_assert!((d - common::torus_distance(a, b, 100.0)).abs() < 1e-9);
    }

    #[test]
    fn aoa_similarity_is_bounded_and_column_scale_invariant(
        (a, b, scale) in (2usize..6, 2usize..6).prop_flat_map(|(l, m)| (small_matrix(l, m), small_matrix(l, m), 0.1..10.0f64))
    ) {
        let ceiling = (a.len() as f64).sqrt();
        let s = aoa_similarity(to_array(&a).view(), to_array(&b).view()).unwrap();
        prop_assert!(s <= ceiling + 1e-12 && s >= -ceiling - 1e-12);
        prop_assert!(common::rel_err(s, common::aoa_similarity(&a, &b)) < 1e-10);
        let self_sim = aoa_similarity(to_array(&a).view(), to_array(&a).view()).unwrap();
        prop_assert!((self_sim - ceiling).abs() < 1e-10);
        let scaled: Vec<Vec<f64>> = b.iter().map(|c| c.iter().map(|v| v * scale).collect()).collect();
        let s2 = aoa_similarity(to_array(&a).view(), to_array(&scaled).view()).unwrap();
        prop_assert!((s - s2).abs() < 1e-10);
    }

    #[test]
    fn normalized_rss_lies_in_unit_interval_with_max_one(
        (psi, psi_hat) in (2usize..6, 2usize..8).prop_flat_map(|(k, m)| (small_matrix(m, k), small_matrix(m, k)))
    ) {
        let a: Vec<Array1<f64>> = psi.iter().map(|v| Array1::from(v.clone())).collect();
        let b: Vec<Array1<f64>> = psi_hat.iter().map(|v| Array1::from(v.clone())).collect();
        let r = rss_similarity_all(&a, &b);
        prop_assert!(r.iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert!((r.iter().copied().fold(0.0, f64::max) - 1.0).abs() < 1e-12);
        for (k, &v) in r.iter().enumerate() {
            prop_assert!(common::rel_err(v, common::rss_normalized(&psi, &psi_hat, k)) < 1e-10);
        }
    }

    #[test]
    fn rmse_matches_oracle(
        pts in prop::collection::vec((0.0..100.0f64, 0.0..100.0f64, 0.0..100.0f64, 0.0..100.0f64), 1..8)
    ) {
        let a: Vec<Point> = pts.iter().map(|p| Point::new(p.0, p.1)).collect();
        let b: Vec<Point> = pts.iter().map(|p| Point::new(p.2, p.3)).collect();
        let r = rmse(&a, &b, 100.0).unwrap();
        prop_assert!(common::rel_err(r, common::rmse(&a, &b, 100.0)) < 1e-12);
    }

    #[test]
    fn fused_estimate_stays_inside_a_tight_cluster(
        cx in 0.0..100.0f64, cy in 0.0..100.0f64,
        offsets in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, 0.01..1.0f64), 1..6),
    ) {
        let side = 100.0;
        let pts: Vec<Point> = offsets
            .iter()
            .map(|o| Point::new((cx + o.0).rem_euclid(side), (cy + o.1).rem_euclid(side)))
            .collect();
        let w: Vec<f64> = offsets.iter().map(|o| o.2).collect();
        let f = fuse_estimates(&pts, &w, side).unwrap();
        let (dx, dy) = (common::torus_delta(cx, f.x, side), common::torus_delta(cy, f.y, side));
        let lo_x = offsets.iter().map(|o| o.0).fold(f64::INFINITY, f64::min);
        let hi_x = offsets.iter().map(|o| o.0).fold(f64::NEG_INFINITY, f64::max);
        let lo_y = offsets.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
        let hi_y = offsets.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(dx >= lo_x - 1e-9 && dx <= hi_x + 1e-9);
        prop_assert!(dy >= lo_y - 1e-9 && dy <= hi_y + 1e-9);
    }

    #[test]
    fn polar_round_trip_lands_on_target(
        ax in 0.0..100.0f64, ay in 0.0..100.0f64, ux in 0.0..100.0f64, uy in 0.0..100.0f64,
    ) {
        let cfg = SystemConfig::desk();
        let layout = Layout::from_positions(&cfg, vec![Point::new(ax, ay)], vec![Point::new(ux, uy)], &[0.0]);
        let link = layout.link(0, 0);
        let p = polar_to_position(Point::new(ax, ay), link.horizontal_distance, link.nominal_aoa, 100.0);
        prop_assert!(common::torus_distance(p, Point::new(ux, uy), 100.0) < 1e-9);
    }
}
