//! Calibrate a PLA material card from the bundled loading, unloading and
//! frequency-sweep tables.
//!
//! ```text
//! cargo run -p morphsim --example calibrate_card
//! ```

use morphsim::material::{calibrate, CalibrationInput, DEFAULT_DENSITY};
use morphsim::reference;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (card, report) = calibrate(CalibrationInput {
        name: "PLA".into(),
        loading: reference::pla_loading(),
        unloading: reference::pla_unloading(),
        sweep: Some(reference::pla_sweep()),
        alpha_t: 9.17e-4,
        poisson: 0.419,
        density: DEFAULT_DENSITY,
        prony_terms: 8,
    })?;

    println!("plasticity table (yield stress MPa, plastic strain):");
    for row in &card.plasticity.as_ref().unwrap().rows {
        println!("  {:.3}  {:.6}", row.yield_stress, row.plastic_strain);
    }
    for sigma0 in [0.079, 0.132, 0.17, 0.203] {
        println!("recoverable strain at {sigma0:.3} MPa: {:.6}", card.recoverable_strain(sigma0)?);
    }
    if let Some(rms) = report.damage_rms_mpa {
        println!("Ogden-Roxburgh damage fit rms {rms:.5} MPa");
    }
    println!("viscoelastic {}", if report.viscoelastic_enabled { "enabled" } else { "disabled" });
    println!("card JSON is {} bytes", card.to_json().len());
    Ok(())
}
