//! Two-photon interference dip of the |1V;1H> input with the half-wave
//! plate at zero; the dip depth equals the squared peak overlap.

use nsgate::distinguish::Overlap;
use nsgate::experiments::{dip_visibility, linspace, sweep_hom, ExperimentConfig};

fn main() -> nsgate::Result<()> {
    let delays = linspace(-400.0, 400.0, 33);
    for eta_max in [1.0, 0.943, 0.8] {
        let table = sweep_hom(&delays, Overlap::new(eta_max)?, &ExperimentConfig::hom())?;
        let values = table.column("fourfold").expect("fourfold column");
        println!(
            "eta_max = {eta_max:.3}: visibility {:.4}, P(0) = {:.6}, P(edge) = {:.6}",
            dip_visibility(&values)?,
            values[values.len() / 2],
            values[0]
        );
    }
    Ok(())
}
