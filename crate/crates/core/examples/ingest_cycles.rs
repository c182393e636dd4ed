//! Split a cyclic tensile record into cycles, recover the main loading
//! envelope and smooth a noisy copy of it.
//!
//! ```text
//! cargo run -p morphsim --example ingest_cycles
//! ```

use morphsim::dma::{extract_main_loading_curve, segment_cycles, smooth_pspline, DmaCurve, SmootherConfig};
use morphsim::reference;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Rebuild a four-cycle record: load to each peak, unload, reload.
    let loading = reference::pla_loading();
    let mut pts = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for (_, un) in reference::pla_unloading() {
        let peak = un.first().unwrap();
        pts.extend(loading.points().filter(|p| p.0 > prev && p.0 < peak.0));
        pts.extend(un.points());
        let mut back: Vec<_> = un.points().collect();
        back.reverse();
        pts.extend(back.into_iter().skip(1).take(un.len() - 2));
        prev = peak.0;
    }
    let raw = DmaCurve::from_points(&pts);
    let cycles = segment_cycles(&raw)?;
    println!("{} raw points, {} cycles", raw.len(), cycles.len());
    for (i, s) in cycles.peak_stresses.iter().enumerate() {
        println!("  cycle {}: peak {:.3} MPa", i + 1, s);
    }
    let envelope = extract_main_loading_curve(&cycles)?;
    println!("main loading envelope: {} points up to {:.3} MPa", envelope.len(), envelope.max_stress());

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noisy: Vec<(f64, f64)> = envelope
        .points()
        .enumerate()
        .map(|(i, (e, s))| if i == 0 { (e, s) } else { (e, s + rng.random_range(-0.004..0.004)) })
        .collect();
    let smooth = smooth_pspline(&DmaCurve::from_points(&noisy), &SmootherConfig::default())?;
    let rms = (envelope
        .stress
        .iter()
        .zip(&smooth.stress)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / envelope.len() as f64)
        .sqrt();
    println!("GCV-smoothed noisy envelope: rms {:.5} MPa from the clean curve", rms);
    Ok(())
}
