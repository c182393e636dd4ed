//! Fit Prony series to the PLA and CF-PLA frequency sweeps and decide
//! whether viscoelasticity matters for each.
//!
//! ```text
//! cargo run -p morphsim --example prony_dominance
//! ```

use morphsim::material::{check_viscoelastic_dominance, fit_prony};
use morphsim::reference;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (name, sweep) in [("PLA", reference::pla_sweep()), ("CFPLA", reference::cfpla_sweep())] {
        let (f, td) = sweep.max_tan_delta().unwrap();
        println!(
            "{name}: max tan delta {td:.4} at {f} Hz, viscoelastic {}",
            if check_viscoelastic_dominance(&sweep) { "on" } else { "off" }
        );
        for n in [1, 2, 4, 8] {
            let fit = fit_prony(&sweep, n)?;
            println!(
                "  {n} terms: E_inf {:8.2} MPa, storage rms {:5.2}%, loss rms {:5.2}%",
                fit.series.e_infinity,
                100.0 * fit.storage_rel_rms,
                100.0 * fit.loss_rel_rms
            );
        }
    }
    Ok(())
}
