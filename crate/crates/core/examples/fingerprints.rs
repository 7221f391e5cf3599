//! Extracts RSS and angular-power fingerprints and scores hypotheses with the
//! AOA, RSS and joint similarity coefficients.

use cfloc::fingerprint::{aoa_similarity, extract_fingerprints, joint_from_parts, rss_similarity_all};
use cfloc::locate::{forward_aoa, forward_rss};
use cfloc::sysmodel::generate_layout;
use cfloc::{seeded_rng, Point, SystemConfig};

fn main() -> cfloc::Result<()> {
    let cfg = SystemConfig::desk();
    let mut rng = seeded_rng(2);
    let layout = generate_layout(&cfg, &mut rng);
    let fps = extract_fingerprints(&layout, &cfg, 100, &mut rng)?;

    let shifted: Vec<Point> = layout
        .ue_positions
        .iter()
        .map(|p| Point::new((p.x + 15.0) % 100.0, p.y))
        .collect();
    for (label, points) in [("true positions", &layout.ue_positions), ("15 m off", &shifted)] {
        let psi: Vec<_> = fps.iter().map(|f| f.rss.clone()).collect();
        let psi_hat: Vec<_> = points.iter().map(|&p| forward_rss(p, &layout, &cfg)).collect();
        let rss = rss_similarity_all(&psi, &psi_hat);
        println!("{label}:");
        for (k, &p) in points.iter().enumerate() {
            let aoa = aoa_similarity(fps[k].angular_power.view(), forward_aoa(p, &layout, &cfg).view())?;
            println!(
                "  UE {k}: aoa {aoa:.3}  rss {:.3}  joint {:.3}",
                rss[k],
                joint_from_parts(aoa, rss[k])
            );
        }
    }
    Ok(())
}
