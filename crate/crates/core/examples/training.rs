//! Learn a layered constellation from pilots and show the estimation error
//! shrinking with pilot quality.

use lmimo_mbm::model::LayeredConstellation;
use lmimo_mbm::train::{pilot_count, train, TrainingScheme};

fn main() -> lmimo_mbm::Result<()> {
    let truth = LayeredConstellation::generate(4, 4, 8, 3)?;
    println!("pilot transmissions per training round: {}", pilot_count(4, 4, 1));
    for pilot_n0 in [0.1, 0.01, 0.001] {
        let trained = train(&truth, TrainingScheme::Hadamard, pilot_n0, 1, 11)?;
        let mut err = 0.0;
        let mut count = 0;
        for u in 0..truth.num_units() {
            for j in 0..truth.table_size() {
                err += trained.constellation.constituent_vector(u, j).distance_squared(&truth.constituent_vector(u, j));
                count += 1;
            }
        }
        println!("pilot N0 {pilot_n0:<6}: mean squared error per constituent {:.3e}", err / count as f64);
    }
    Ok(())
}
