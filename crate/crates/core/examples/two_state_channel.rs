//! A two-state channel carrying one selection bit plus one BPSK bit.
//!
//! The receiver sees a 4-PAM constellation with unit minimum distance while
//! the transmitter spends one unit of energy per symbol.

use lmimo_mbm::detect::detect_exhaustive;
use lmimo_mbm::model::{LayeredConstellation, MessageVector, SbmAlphabet, SbmSymbolVector};
use lmimo_mbm::ComplexVector;

fn main() -> lmimo_mbm::Result<()> {
    // One unit, two channel states with gains 0.5 and 1.5.
    let states = LayeredConstellation::from_real_tables(&[&[0.5, 1.5]])?;
    let mut points = Vec::new();
    for state in 0..2u32 {
        for b in 0..2u32 {
            let symbol = SbmSymbolVector::from_symbols(SbmAlphabet::Bpsk, &[b])?;
            let p = states.map_to_point(&MessageVector(vec![state]), &symbol)?;
            println!("state {state}, bit {b} -> {:+.1}", p[0].re);
            points.push(p[0].re);
        }
    }
    points.sort_by(f64::total_cmp);
    let dmin = points.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    println!("received constellation {points:?}, d_min = {dmin}");

    // Nearest state for a noisy observation of the 1.5 gain.
    let r = ComplexVector::real_scalar(1.3);
    let found = detect_exhaustive(&r, &states)?;
    println!("r = 1.3 decodes to state {}", found.message.0[0]);
    Ok(())
}
