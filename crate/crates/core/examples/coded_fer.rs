//! Reed-Solomon over GF(16) on a 16-point constellation: frame error rate
//! against the binomial-tail prediction from the measured symbol error rate.

use lmimo_mbm::analysis::binomial_tail;
use lmimo_mbm::engine::{run_coded_sweep, ConstellationMode, ConstellationSpec, DetectorKind, FecSpec, StoppingRule, SweepSpec};
use lmimo_mbm::fec::RsCode;

fn main() -> lmimo_mbm::Result<()> {
    let code = RsCode::new(4, 15, 11)?;
    println!("RS({}, {}) over GF(16), d_min = {}, t = {}", code.length(), code.dimension(), code.min_distance(), code.t());

    let spec = SweepSpec {
        constellation: ConstellationSpec::new(1, 4, 4),
        detector: DetectorKind::Exhaustive,
        eb_n0_grid: vec![-2.0, 0.0, 2.0],
        stopping: StoppingRule { max_trials: 1_000_000, min_errors: 50, max_wall_seconds_per_point: 30.0 },
        mode: ConstellationMode::FixedSingle,
        fec: Some(FecSpec { field_bits: 4, length: 15, dimension: 11 }),
        training: None,
        energy: 1.0,
        seed: 6,
    };
    println!("ebn0_db  ser         fer         binomial_tail");
    for p in run_coded_sweep(&spec)? {
        println!("{:>7}  {:.3e}   {:.3e}   {:.3e}", p.eb_n0_db, p.ser, p.fer, binomial_tail(15, code.t(), p.ser));
    }
    Ok(())
}
