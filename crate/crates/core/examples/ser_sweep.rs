//! Uncoded symbol error rate of a small layered link, printed as CSV.

use lmimo_mbm::cli::csv::write_curve_csv;
use lmimo_mbm::detect::DetectorConfig;
use lmimo_mbm::engine::{run_uncoded_sweep, ConstellationMode, ConstellationSpec, DetectorKind, StoppingRule, SweepSpec};

fn main() -> lmimo_mbm::Result<()> {
    let spec = SweepSpec {
        constellation: ConstellationSpec::new(2, 4, 4),
        detector: DetectorKind::Layered(DetectorConfig::standard(2, 2, 8, 0)),
        eb_n0_grid: vec![-2.0, 0.0, 2.0, 4.0],
        stopping: StoppingRule { max_trials: 200_000, min_errors: 100, max_wall_seconds_per_point: 20.0 },
        mode: ConstellationMode::RedrawPerBatch { batch: 1000 },
        fec: None,
        training: None,
        energy: 1.0,
        seed: 1,
    };
    print!("{}", write_curve_csv(&run_uncoded_sweep(&spec)?));
    Ok(())
}
