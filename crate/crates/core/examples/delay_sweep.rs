//! Four-fold rate against pump delay: the sign shift enhances the theta = 0
//! rate and suppresses the theta = pi rate as the ancilla becomes
//! indistinguishable.

use std::f64::consts::PI;

use nsgate::distinguish::{overlap_from_delay, OverlapParams};
use nsgate::experiments::{linspace, sweep_delay, ExperimentConfig, PhaseSetting};

fn main() -> nsgate::Result<()> {
    let cfg = ExperimentConfig::default();
    let delays = linspace(-300.0, 300.0, 13);
    let zero = sweep_delay(PhaseSetting::new(0.0)?, &delays, &cfg)?;
    let pi = sweep_delay(PhaseSetting::new(PI)?, &delays, &cfg)?;

    println!("{:>9} {:>7} {:>10} {:>10}", "delay/fs", "eta", "theta=0", "theta=pi");
    for (a, b) in zero.rows().iter().zip(pi.rows()) {
        let eta = overlap_from_delay(OverlapParams {
            delay: a.x,
            tau_coh: cfg.tau_coh,
        })?;
        println!(
            "{:>9.1} {:>7.4} {:>10.6} {:>10.6}",
            a.x,
            eta.value(),
            a.values[0],
            b.values[0]
        );
    }
    Ok(())
}
