//! Where does the trace first come near a slit? Compare the stopped tip
//! angles with those of the same process in the disk, where the slit is
//! just a marked set.
//!
//! ```text
//! cargo run --release --example locality [kappa] [paths]
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use slitsle::experiments::{locality_experiment, LocalityOptions};
use slitsle::geometry::make_domain;
use slitsle::sde::SdeConfig;

fn main() -> slitsle::Result<()> {
    let mut args = std::env::args().skip(1);
    let kappa: f64 = args.next().map_or(6.0, |s| s.parse().expect("kappa"));
    let n: usize = args.next().map_or(30, |s| s.parse().expect("path count"));
    let domain = make_domain(&[(0.5, 0.0, FRAC_PI_2)])?;
    let config = SdeConfig { kappa, dt: 2e-3, t_max: 3.0, seed: 1, theta0: FRAC_PI_4, ..Default::default() };
    let report = locality_experiment(&domain, &config, &LocalityOptions { n_paths: n, ..Default::default() })?;
    println!("{}", serde_json::to_string_pretty(&report.summary).expect("summary serializes"));
    Ok(())
}
