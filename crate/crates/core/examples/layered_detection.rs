//! Detect one noisy channel use of a 3-unit layered constellation with the
//! beam-search detector and compare against exhaustive search.

use lmimo_mbm::detect::{detect_exhaustive, detect_layered_traced, DetectorConfig};
use lmimo_mbm::model::{eb_n0_to_n0, transmit, ChannelParams, LayeredConstellation};
use lmimo_mbm::rng;

fn main() -> lmimo_mbm::Result<()> {
    let (units, bits, dims) = (3, 5, 6);
    let c = LayeredConstellation::generate(units, bits, dims, 2024)?;
    println!(
        "{} points from {} stored constituents in {} dimensions",
        c.cardinality(),
        c.stored_vectors(),
        c.dims()
    );

    let m = c.random_message(&mut rng::stream(1, &[rng::domain::TRIAL]));
    let n0 = eb_n0_to_n0(2.0, units, 1.0, c.rate_bits());
    let r = transmit(&c.point(&m)?, &ChannelParams::new(n0, 1.0), 7);

    let cfg = DetectorConfig::standard(units, 2, 8, 0);
    let (layered, trace) = detect_layered_traced(&r, &c, &cfg)?;
    let exhaustive = detect_exhaustive(&r, &c)?;
    println!("sent      {:?}", m.0);
    println!("layered   {:?}  d^2 = {:.4}  ({} candidates)", layered.message.0, layered.distance_squared, layered.candidates_examined);
    println!("exhaustive {:?} d^2 = {:.4}  ({} candidates)", exhaustive.message.0, exhaustive.distance_squared, exhaustive.candidates_examined);
    for (order, steps) in cfg.permutations.iter().zip(&trace) {
        let steps: Vec<String> = steps.iter().map(|d| format!("{d:.3}")).collect();
        println!("ordering {order:?}: {}", steps.join(" -> "));
    }
    Ok(())
}
