//! Self-approach of traces for kappa = 2 and kappa = 6: the fraction of
//! traces that come back within epsilon of an earlier piece of themselves.
//!
//! ```text
//! cargo run --release --example phases [traces]
//! ```

use slitsle::experiments::{phase_experiment, PhaseOptions};
use slitsle::geometry::CircularSlitDisk;
use slitsle::sde::SdeConfig;

fn main() -> slitsle::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(40, |s| s.parse().expect("trace count"));
    let config = SdeConfig { dt: 5e-4, t_max: 0.5, seed: 5, ..Default::default() };
    let opts = PhaseOptions { n_traces: n, samples: 1000, ..Default::default() };
    let report = phase_experiment(&CircularSlitDisk::disk(), &config, &opts)?;
    for key in ["kappa_2", "kappa_6", "separation"] {
        println!("{key}: {}", report.summary[key]);
    }
    for c in &report.checks {
        println!("check {} = {:.3} (needs {} = {}): {}", c.name, c.value, c.threshold, report.parameters[&c.threshold], if c.passed { "pass" } else { "fail" });
    }
    Ok(())
}
