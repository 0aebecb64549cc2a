//! Pairwise error probability of random constellations and its high-SNR
//! asymptote, for a few error-position counts.

use lmimo_mbm::analysis::{pairwise_error_asymptotic, pairwise_error_closed_form, ErrorModelParams};

fn main() {
    let dims = 1;
    println!("snr_db  delta  closed       asymptote");
    for delta in 1..=3 {
        for db in [0.0, 10.0, 20.0, 30.0] {
            let p = ErrorModelParams::new(10f64.powf(db / 10.0), dims, delta, 0);
            println!(
                "{db:>6}  {delta:>5}  {:.4e}   {:.4e}",
                pairwise_error_closed_form(&p),
                pairwise_error_asymptotic(&p)
            );
        }
    }
}
