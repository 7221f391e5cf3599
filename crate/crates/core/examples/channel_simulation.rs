//! Draws a layout, synthesizes multipath channels, and checks channel
//! hardening and the LS estimation error against their expected values.

use cfloc::sysmodel::{generate_layout, ChannelSet};
use cfloc::{seeded_rng, SystemConfig};

fn main() -> cfloc::Result<()> {
    let cfg = SystemConfig::default();
    let mut rng = seeded_rng(1);
    let layout = generate_layout(&cfg, &mut rng);
    println!(
        "{} APs, {} UEs, {} antennas per AP",
        layout.num_aps(),
        layout.num_ues(),
        cfg.antennas_per_ap
    );

    let link = layout.link(0, 0);
    println!(
        "AP 0 -> UE 0: {:.1} m horizontal, AOA {:.3} rad, beta {:.2} dB",
        link.horizontal_distance,
        link.nominal_aoa,
        10.0 * link.large_scale.log10()
    );

    let blocks = 2000;
    let (mut gain, mut err) = (0.0, 0.0);
    for _ in 0..blocks {
        let set = ChannelSet::draw(&layout, &cfg, &mut rng)?;
        let (h, h_hat) = (set.true_channel(0, 0), set.estimate(0, 0));
        gain += h.iter().map(|z| z.norm_sqr()).sum::<f64>();
        err += h.iter().zip(h_hat.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
    }
    let l = cfg.antennas_per_ap as f64;
    println!(
        "mean ||h||^2 / (L beta) = {:.3}",
        gain / blocks as f64 / (l * link.large_scale)
    );
    let expected = cfg.noise_power / (cfg.ue_tx_power * cfg.pilot_length as f64);
    println!(
        "LS error variance / expected = {:.3}",
        err / blocks as f64 / l / expected
    );
    Ok(())
}
