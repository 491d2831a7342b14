//! Average overages of every heuristic on the bundled 10x10 benchmark set,
//! before and after critical-arc refinement.
//!
//! cargo run --release --example jsplib_table

use jobshop::bench::{bundled_instances, bundled_optima, run_suite, BenchConfig, OptimaSource};

fn main() -> jobshop::Result<()> {
    let heuristics = ["sb", "sb-re", "dd:200", "dd:400", "mwr", "mor", "spt"]
        .iter()
        .map(|h| h.parse().expect("known heuristic"))
        .collect();
    let report = run_suite(&BenchConfig {
        instances: bundled_instances(),
        heuristics,
        refine: true,
        optima: OptimaSource::Registry(bundled_optima()),
        ..BenchConfig::default()
    })?;
    for s in report.summary() {
        println!(
            "{:<12} {:>7.3}s {:>6.1}% {:>6.1}%",
            s.heuristic,
            s.mean_seconds,
            s.mean_overage.unwrap_or(f64::NAN),
            s.mean_refined_overage.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
