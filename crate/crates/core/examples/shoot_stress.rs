//! Identify the residual stress of a print from measured end distances of
//! triggered test units.
//!
//! ```text
//! cargo run -p morphsim --example shoot_stress
//! ```

use morphsim::grid::MaterialSet;
use morphsim::material::MaterialCard;
use morphsim::shooter::{shoot_residual_stress, ShooterConfig, TriggeringObservation};
use morphsim::unit::{end_distance, unit_shape, ShapeOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let card = MaterialCard::pla();
    let mut cards = MaterialSet::new();
    cards.insert("PLA".into(), card.clone());

    // Pretend the print carries 0.15 MPa and measure three units, each off
    // by a few tenths of a millimetre.
    let truth = 0.15;
    let offsets = [0.12, -0.08, 0.05];
    let mut obs = Vec::new();
    for (ratio, off) in [0.5, 0.75, 1.0].into_iter().zip(offsets) {
        let spec = TriggeringObservation::new(ratio, 50.0).unit_spec("PLA", truth);
        let d = end_distance(&unit_shape(&spec, &cards, &ShapeOptions::default())?);
        println!("ratio {ratio:.2}: measured {:.3} mm", d + off);
        obs.push(TriggeringObservation::new(ratio, d + off));
    }

    let r = shoot_residual_stress(&obs, &card, &ShooterConfig::default())?;
    println!("\nsigma0 = {:.5} MPa (true {truth}) after {} trials", r.sigma0, r.iterations);
    println!("largest mismatch {:.3} mm, converged {}", r.residual, r.converged);
    for t in r.history.iter().take(5) {
        println!("  trial {:.5} MPa -> {:?}", t.sigma0, t.simulated.iter().map(|d| format!("{d:.2}")).collect::<Vec<_>>());
    }
    Ok(())
}
