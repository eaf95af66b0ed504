//! Two-fold and four-fold fringes against the input phase, and the
//! conditional phase shift between them.

use std::f64::consts::{PI, TAU};

use nsgate::distinguish::Overlap;
use nsgate::experiments::{fit_phase_shift, linspace, sweep_phase, visibility, ExperimentConfig};

fn main() -> nsgate::Result<()> {
    let thetas = linspace(0.0, TAU, 25);
    for eta in [1.0, 0.8, 0.0] {
        let cfg = ExperimentConfig {
            background: 0.002,
            ..ExperimentConfig::default()
        };
        let table = sweep_phase(&thetas, Overlap::new(eta)?, &cfg)?;
        let fit = fit_phase_shift(&table)?;
        println!(
            "eta = {eta:.1}: shift = {:.4} pi, four-fold visibility = {:.3}",
            fit.shift / PI,
            visibility(&fit.fourfold)?
        );
    }

    let table = sweep_phase(&thetas, Overlap::FULL, &ExperimentConfig::default())?;
    println!("\n{:>8} {:>10} {:>10}", "theta/pi", "twofold", "fourfold");
    for row in table.rows().iter().step_by(3) {
        println!("{:>8.3} {:>10.6} {:>10.6}", row.x / PI, row.values[0], row.values[1]);
    }
    Ok(())
}
