//! Multi-photon evolution through a random interferometer, computed with
//! Ryser permanents and with a direct creation-operator expansion.

use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nsgate::elements::random_unitary;
use nsgate::evolve::{transform, transform_oracle};
use nsgate::fock::{ModeLabel, ModeRegistry, PureState};

fn main() -> nsgate::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let labels: Vec<ModeLabel> = (1..=5).map(ModeLabel::h).collect();
    let registry = ModeRegistry::new(labels.clone())?.shared();
    let input = PureState::basis(registry, &[(labels[0], 2), (labels[1], 1), (labels[3], 2)])?;
    let u = random_unitary(labels.len(), &mut rng);

    let t = Instant::now();
    let fast = transform(&u, &input)?;
    let t_fast = t.elapsed();
    let t = Instant::now();
    let slow = transform_oracle(&u, &input)?;
    let t_slow = t.elapsed();

    let worst = fast
        .iter()
        .map(|(occ, a)| (a - slow.amplitude(occ)).norm())
        .fold(0.0, f64::max);
    println!("input {input}");
    println!(
        "{} output patterns, total probability {:.12}",
        fast.support_size(),
        fast.norm_sqr()
    );
    println!("max |permanent - expansion| = {worst:.2e}");
    println!("permanent {t_fast:?}, expansion {t_slow:?}");

    let mut top: Vec<(String, Complex64)> = fast.iter().map(|(o, a)| (format!("{:?}", o.counts()), *a)).collect();
    top.sort_by(|a, b| b.1.norm_sqr().total_cmp(&a.1.norm_sqr()));
    for (occ, a) in top.iter().take(5) {
        println!("  {occ}  p = {:.6}", a.norm_sqr());
    }
    Ok(())
}
