//! Heralded sign flip on two-photon inputs, closed form against simulation.
//!
//! Run with `cargo run --example ns_sign_shift`.

use nsgate::elements::Reflectivity;
use nsgate::evolve::{ns_amplitude_pol, ns_pipeline, ns_pipeline_amplitude};

fn main() -> nsgate::Result<()> {
    let settings = [
        ("50/50", Reflectivity::HALF, Reflectivity::HALF),
        ("KLM", Reflectivity::klm_vertical(), Reflectivity::klm_horizontal()),
    ];
    for (name, r_v, r_h) in settings {
        println!("{name}: R_V = {:.6}, R_H = {:.6}", r_v.value(), r_h.value());
        for (m, n) in [(2, 0), (1, 1), (0, 2)] {
            let result = ns_pipeline(m, n, r_v, r_h)?;
            let amp = ns_pipeline_amplitude(m, n, r_v, r_h)?;
            println!(
                "  |{m}V;{n}H>  closed form {:+.9}  simulated {:+.9}  herald probability {:.6}",
                ns_amplitude_pol(m, n, r_v, r_h),
                amp.re,
                result.probability,
            );
        }
    }
    Ok(())
}
