//! Reference-grid fingerprint matching.
//!
//! Every lattice point carries the noiseless forward-model fingerprint. A UE
//! is located by ranking points by similarity to its observed fingerprint and
//! taking the similarity-weighted (wrap-aware) centroid of the best few.

use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::container::{write_file, Decoder, Encoder};
use crate::error::{Error, Result};
use crate::fingerprint::{aoa_similarity, dft_matrix, joint_from_parts, Fingerprint};
use crate::locate::{forward_aoa_with, forward_rss, fuse_estimates, rmse};
use crate::sysmodel::{Layout, Point, SystemConfig};

pub const DEFAULT_NEIGHBORS: usize = 3;

/// Which part of the fingerprint drives the ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchCriterion {
    #[default]
    Joint,
    RssOnly,
    AoaOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceGrid {
    pub spacing: f64,
    pub per_axis: usize,
    pub points: Vec<Point>,
    pub rss: Vec<Array1<f64>>,
    pub angular_power: Vec<Array2<f64>>,
}

/// Points per axis for spacing `eta` over `[0, side)`.
pub fn points_per_axis(side: f64, eta: f64) -> usize {
    // Guard against 100 / 0.1 = 1000.0000000000001 style round-off.
    let n = side / eta;
    let r = n.round();
    if (n - r).abs() < 1e-9 * r.max(1.0) {
        r as usize
    } else {
        n.ceil() as usize
    }
}

/// Lattice `(i eta, j eta)` with forward-model fingerprints, row-major in `j`.
pub fn build_grid(eta: f64, layout: &Layout, config: &SystemConfig) -> Result<ReferenceGrid> {
    if !(eta > 0.0 && eta <= config.area_side) {
        return Err(Error::config("grid_spacing", "must lie in (0, area_side]"));
    }
    let n = points_per_axis(config.area_side, eta);
    let points: Vec<Point> = (0..n)
        .flat_map(|i| (0..n).map(move |j| Point::new(i as f64 * eta, j as f64 * eta)))
        .collect();
    let dft = dft_matrix(config.antennas_per_ap);
    let (rss, angular_power) = points
        .par_iter()
        .map(|&p| {
            (
                forward_rss(p, layout, config),
                forward_aoa_with(&dft, p, layout, config),
            )
        })
        .unzip();
    Ok(ReferenceGrid {
        spacing: eta,
        per_axis: n,
        points,
        rss,
        angular_power,
    })
}

impl ReferenceGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Similarity of `observed` to every grid point under `criterion`.
    ///
    /// The RSS part is `||Psi - Psi(p)||` normalised by its maximum over the grid.
    pub fn scores(&self, observed: &Fingerprint, criterion: MatchCriterion) -> Result<Vec<f64>> {
        let errors: Vec<f64> = self
            .rss
            .par_iter()
            .map(|r| {
                r.iter()
                    .zip(observed.rss.iter())
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let worst = errors.iter().copied().fold(0.0, f64::max);
        let normalized = |e: f64| if worst > 0.0 { e / worst } else { 0.0 };
        match criterion {
            MatchCriterion::RssOnly => Ok(errors.iter().map(|&e| 1.0 - normalized(e)).collect()),
            MatchCriterion::AoaOnly => self
                .angular_power
                .par_iter()
                .map(|t| aoa_similarity(observed.angular_power.view(), t.view()))
                .collect(),
            MatchCriterion::Joint => self
                .angular_power
                .par_iter()
                .zip(errors.par_iter())
                .map(|(t, &e)| {
                    let aoa = aoa_similarity(observed.angular_power.view(), t.view())?;
                    Ok(joint_from_parts(aoa, normalized(e)))
                })
                .collect(),
        }
    }

    /// Similarity-weighted centroid of the `neighbors` best-scoring points.
    pub fn locate(&self, observed: &Fingerprint, criterion: MatchCriterion, neighbors: usize) -> Result<Point> {
        if neighbors == 0 {
            return Err(Error::config("neighbors", "must be at least 1"));
        }
        let scores = self.scores(observed, criterion)?;
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        order.truncate(neighbors.min(order.len()));
        let cands: Vec<Point> = order.iter().map(|&i| self.points[i]).collect();
        let weights: Vec<f64> = order.iter().map(|&i| scores[i].max(0.0)).collect();
        if weights.iter().sum::<f64>() > 0.0 {
            fuse_estimates(&cands, &weights, self.spacing * self.per_axis as f64)
        } else {
            Ok(cands[0])
        }
    }
}

/// Locates every UE of a scene and returns the RMSE.
pub fn baseline_rmse(
    grid: &ReferenceGrid,
    layout: &Layout,
    fingerprints: &[Fingerprint],
    config: &SystemConfig,
    criterion: MatchCriterion,
    neighbors: usize,
) -> Result<f64> {
    let est = fingerprints
        .iter()
        .map(|fp| grid.locate(fp, criterion, neighbors))
        .collect::<Result<Vec<_>>>()?;
    rmse(&layout.ue_positions, &est, config.area_side)
}

/// On-disk grid cache keyed by layout, spacing and system configuration.
#[derive(Debug, Clone)]
pub struct GridCache {
    dir: PathBuf,
}

impl GridCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        GridCache { dir: dir.into() }
    }

    pub fn path_for(&self, eta: f64, layout: &Layout, config: &SystemConfig) -> PathBuf {
        let key = crate::content_hash(&(layout, eta, config));
        self.dir.join(format!("grid-{}.bin", &key[..16]))
    }

    /// Loads the grid if cached, otherwise builds and stores it.
    pub fn get_or_build(&self, eta: f64, layout: &Layout, config: &SystemConfig) -> Result<ReferenceGrid> {
        let path = self.path_for(eta, layout, config);
        if path.is_file() {
            return read_grid(&path);
        }
        let grid = build_grid(eta, layout, config)?;
        write_grid(&path, &grid)?;
        Ok(grid)
    }
}

fn write_grid(path: &Path, grid: &ReferenceGrid) -> Result<()> {
    let mut e = Encoder::new();
    e.f64(grid.spacing);
    e.u64(grid.per_axis as u64);
    let (l, m) = grid.angular_power.first().map_or((0, 0), |t| t.dim());
    e.u64(l as u64);
    e.u64(m as u64);
    for ((p, r), t) in grid.points.iter().zip(&grid.rss).zip(&grid.angular_power) {
        e.f64(p.x);
        e.f64(p.y);
        r.iter().for_each(|v| e.f64(*v));
        t.iter().for_each(|v| e.f64(*v));
    }
    write_file(path, &e.finish())
}

fn read_grid(path: &Path) -> Result<ReferenceGrid> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut d = Decoder::new(&bytes, path)?;
    let spacing = d.f64()?;
    let per_axis = d.u64()? as usize;
    let l = d.u64()? as usize;
    let m = d.u64()? as usize;
    let count = per_axis * per_axis;
    let mut points = Vec::with_capacity(count);
    let mut rss = Vec::with_capacity(count);
    let mut angular_power = Vec::with_capacity(count);
    for _ in 0..count {
        points.push(Point::new(d.f64()?, d.f64()?));
        rss.push((0..m).map(|_| d.f64()).collect::<Result<Array1<f64>>>()?);
        let flat = (0..l * m).map(|_| d.f64()).collect::<Result<Vec<f64>>>()?;
        angular_power.push(Array2::from_shape_vec((l, m), flat).expect("sized"));
    }
    d.finish()?;
    Ok(ReferenceGrid {
        spacing,
        per_axis,
        points,
        rss,
        angular_power,
    })
}
