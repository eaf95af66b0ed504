//! Building a heralded circuit by hand: a beam splitter with a single
//! ancilla photon, post-selected on one click in the ancilla output.

use nsgate::elements::{beam_splitter, embed_into, Reflectivity};
use nsgate::evolve::{herald, transform, HeraldCondition, HeraldSpec};
use nsgate::fock::{ModeLabel, ModeRegistry, PureState};

fn main() -> nsgate::Result<()> {
    let (signal, ancilla) = (ModeLabel::h(1), ModeLabel::h(2));
    let registry = ModeRegistry::new([signal, ancilla])?.shared();

    for r in [0.5, 2.0 / 3.0, 0.75] {
        let r = Reflectivity::new(r)?;
        let u = embed_into(&beam_splitter(r), &[signal, ancilla], &registry)?;
        let spec = HeraldSpec::new().group([ancilla], HeraldCondition::Exactly(1))?;
        println!("R = {:.4}", r.value());
        for n in 0..=3 {
            let input = PureState::basis(registry.clone(), &[(signal, n), (ancilla, 1)])?;
            let result = herald(&transform(&u, &input)?, &spec)?;
            println!("  n = {n}: herald probability {:.6}", result.probability);
            for branch in &result.branches {
                println!("    {}", branch.state);
            }
        }
    }
    Ok(())
}
