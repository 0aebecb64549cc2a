//! Mutual information of random 256-point scalar constellations next to
//! 256-QAM at the same SNR.

use lmimo_mbm::analysis::{mutual_information_mc, qam_constellation, random_gaussian_points};
use lmimo_mbm::rng;

fn main() {
    let snr = 10f64.powf(22.0 / 10.0);
    let qam = mutual_information_mc(&qam_constellation(256), snr, 8000, 1);
    println!("256-QAM: {:.3} +/- {:.3} bits", qam.bits, qam.stderr);
    let mut rates: Vec<f64> = (0..40u64)
        .map(|r| {
            let points = random_gaussian_points(&mut rng::stream(1, &[rng::domain::CONSTELLATION, r]), 256, 1);
            mutual_information_mc(&points, snr, 2000, r).bits
        })
        .collect();
    rates.sort_by(f64::total_cmp);
    println!(
        "random: min {:.3}, median {:.3}, max {:.3} bits over {} realizations",
        rates[0],
        rates[rates.len() / 2],
        rates[rates.len() - 1],
        rates.len()
    );
}
