//! Running a validation suite and reading its report.

use genea::stats::suites::{run_suite, Suite, SuiteConfig};
use genea::BranchingParams;

fn main() -> genea::Result<()> {
    let config = SuiteConfig {
        params: BranchingParams::new(1.0, 1.0)?,
        reps: Some(2000),
    };
    let report = run_suite(Suite::SamplerEquality, &config, 1)?;
    print!("{}", report.table());
    let worst = report
        .tests
        .iter()
        .max_by(|a, b| (a.statistic / a.threshold).total_cmp(&(b.statistic / b.threshold)))
        .expect("nonempty");
    println!("closest to failing: {}", worst.name);
    Ok(())
}
