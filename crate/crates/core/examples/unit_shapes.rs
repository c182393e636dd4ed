//! Closed-form bent shape of a single bending unit across actuator ratios.
//! A PLA/PLA unit softens uniformly in the long-term regime and keeps its
//! shape; a PLA/CF-PLA unit does not.
//!
//! ```text
//! cargo run -p morphsim --example unit_shapes
//! ```

use morphsim::grid::{BendingUnitSpec, MaterialSet};
use morphsim::material::{MaterialCard, StiffnessRegime};
use morphsim::unit::{end_distance, unit_shape, ShapeOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cards = MaterialSet::new();
    cards.insert("PLA".into(), MaterialCard::pla());
    cards.insert("CFPLA".into(), MaterialCard::cfpla());

    println!("ratio  PLA/PLA  PLA/CFPLA inst  PLA/CFPLA long  (end distance, mm)");
    for ratio in [0.25, 0.5, 0.75, 1.0] {
        let mut row = format!("{ratio:5.2}");
        for (constraint, regime) in [
            ("PLA", StiffnessRegime::Instantaneous),
            ("CFPLA", StiffnessRegime::Instantaneous),
            ("CFPLA", StiffnessRegime::LongTerm),
        ] {
            let spec = BendingUnitSpec::standard("PLA", constraint, ratio, 0.203);
            let opts = ShapeOptions {
                regime,
                ..ShapeOptions::default()
            };
            row.push_str(&format!("  {:14.3}", end_distance(&unit_shape(&spec, &cards, &opts)?)));
        }
        println!("{row}");
    }

    let spec = BendingUnitSpec::standard("PLA", "PLA", 1.0, 0.203);
    let shape = unit_shape(&spec, &cards, &ShapeOptions::default())?;
    println!("\nfull-ratio unit: {} arcs", shape.arcs.len());
    for a in &shape.arcs {
        println!("  length {:7.3} mm, curvature {:+.5} 1/mm", a.arc_length, a.curvature);
    }
    Ok(())
}
