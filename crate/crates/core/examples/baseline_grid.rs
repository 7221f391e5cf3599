//! Reference-grid fingerprint matching at two lattice spacings, with an
//! on-disk grid cache.

use cfloc::baseline::{baseline_rmse, GridCache, MatchCriterion, DEFAULT_NEIGHBORS};
use cfloc::fingerprint::extract_fingerprints;
use cfloc::sysmodel::generate_layout;
use cfloc::{seeded_rng, SystemConfig};

fn main() -> cfloc::Result<()> {
    let cfg = SystemConfig {
        shadow_std_db: 0.0,
        ..SystemConfig::desk()
    };
    let mut rng = seeded_rng(5);
    let layout = generate_layout(&cfg, &mut rng);
    let fps = extract_fingerprints(&layout, &cfg, 50, &mut rng)?;
    let cache = GridCache::new(std::env::temp_dir().join("cfloc-grid-cache"));
    for eta in [1.0, 5.0] {
        let grid = cache.get_or_build(eta, &layout, &cfg)?;
        for criterion in [MatchCriterion::Joint, MatchCriterion::RssOnly, MatchCriterion::AoaOnly] {
            let r = baseline_rmse(&grid, &layout, &fps, &cfg, criterion, DEFAULT_NEIGHBORS)?;
            println!("eta {eta} m ({} points), {criterion:?}: RMSE {r:.2} m", grid.len());
        }
    }
    Ok(())
}
