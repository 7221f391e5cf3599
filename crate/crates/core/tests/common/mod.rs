//! Independent reference computations used by the integration tests.
//!
//! Everything here is written from the formulas with plain loops and never
//! calls the crate's own numerical helpers.

#![allow(dead_code)]

use cfloc::approx::AgentNet;
use cfloc::Point;
use num_complex::Complex64;
use rand::Rng;

/// Shortest displacement on a torus of side `side`.
pub fn torus_delta(a: f64, b: f64, side: f64) -> f64 {
    let mut d = (b - a) % side;
    if d > side / 2.0 {
        d -= side;
    } else if d < -side / 2.0 {
        d += side;
    }
    d
}

pub fn torus_distance(p: Point, q: Point, side: f64) -> f64 {
    torus_delta(p.x, q.x, side).hypot(torus_delta(p.y, q.y, side))
}

/// `sqrt(mean_k d(p_k, q_k)^2)` under wrap-around.
pub fn rmse(actual: &[Point], est: &[Point], side: f64) -> f64 {
    let s: f64 = actual
        .iter()
        .zip(est)
        .map(|(&a, &b)| torus_distance(a, b, side).powi(2))
        .sum();
    (s / actual.len() as f64).sqrt()
}

/// Measured RSS `p tau sum_l |h_l|^2`.
pub fn rss(h: &[Complex64], power: f64, tau: usize) -> f64 {
    let mut s = 0.0;
    for z in h {
        s += z.re * z.re + z.im * z.im;
    }
    power * tau as f64 * s
}

/// `(1/sqrt(M)) sum_m cos(theta_m, theta_hat_m)` over columns given as `[m][l]`.
pub fn aoa_similarity(theta: &[Vec<f64>], theta_hat: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (a, b) in theta.iter().zip(theta_hat) {
        let mut dot = 0.0;
        let mut na = 0.0;
        let mut nb = 0.0;
        for (x, y) in a.iter().zip(b) {
            dot += x * y;
            na += x * x;
            nb += y * y;
        }
        total += dot / (na.sqrt() * nb.sqrt());
    }
    total / (theta.len() as f64).sqrt()
}

/// `||psi_k - psi_hat_k|| / max_i ||psi_i - psi_hat_i||`.
pub fn rss_normalized(psi: &[Vec<f64>], psi_hat: &[Vec<f64>], k: usize) -> f64 {
    let err = |i: usize| -> f64 {
        let mut s = 0.0;
        for (a, b) in psi[i].iter().zip(&psi_hat[i]) {
            s += (a - b) * (a - b);
        }
        s.sqrt()
    };
    let mut worst: f64 = 0.0;
    for i in 0..psi.len() {
        worst = worst.max(err(i));
    }
    err(k) / worst
}

/// `xi_a / max(xi_r, eps)`.
pub fn joint(aoa: f64, rss_norm: f64, eps: f64) -> f64 {
    if rss_norm < eps {
        aoa / eps
    } else {
        aoa / rss_norm
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Relative error with a floor on the denominator, for gradient checks.
pub fn grad_rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Central finite differences of `f` with respect to `net`'s flat parameters.
pub fn fd_params(net: &AgentNet, h: f64, f: impl Fn(&AgentNet) -> f64) -> Vec<f64> {
    let base = net.flat_params();
    let mut probe = net.clone();
    let mut out = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + h;
        probe.set_flat_params(&p).unwrap();
        let up = f(&probe);
        p[i] = base[i] - h;
        probe.set_flat_params(&p).unwrap();
        let down = f(&probe);
        out.push((up - down) / (2.0 * h));
    }
    out
}

/// Central finite differences of `f` with respect to a vector argument.
pub fn fd_vec(x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut p = x.to_vec();
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn uniform_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Mean over `layouts` draws of the RMSE between `ues` uniform points and
/// independent uniform guesses, on a wrap-around square.
pub fn random_pair_rmse<R: Rng>(rng: &mut R, layouts: usize, ues: usize, side: f64) -> f64 {
    let mut total = 0.0;
    for _ in 0..layouts {
        let mut s = 0.0;
        for _ in 0..ues {
            let a = Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side);
            let b = Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side);
            s += torus_distance(a, b, side).powi(2);
        }
        total += (s / ues as f64).sqrt();
    }
    total / layouts as f64
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Spearman rank correlation of two equal-length samples without ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let ranks = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    };
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}
