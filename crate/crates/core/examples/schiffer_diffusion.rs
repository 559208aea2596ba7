//! Simulate the driving process on a 2-connected domain, then a small
//! parallel batch in the disk where theta(t) is Brownian motion with
//! variance kappa t.
//!
//! ```text
//! cargo run --release --example schiffer_diffusion
//! ```

use slitsle::experiments::mean_and_variance;
use slitsle::geometry::{make_domain, CircularSlitDisk};
use slitsle::sde::{batch_map, simulate_driving, SdeConfig};

fn main() -> slitsle::Result<()> {
    let domain = make_domain(&[(0.6, 1.0, 2.0)])?;
    let config = SdeConfig { kappa: 4.0, dt: 2e-3, t_max: 0.1, seed: 11, ..Default::default() };
    let run = simulate_driving(&domain, 0.0, &config)?;
    let p = &run.path;
    println!("status {:?}, {} steps (grid {}), max |Re bracket| {:.1e}", run.status, p.steps(), (config.t_max / config.dt).round(), run.max_re_bracket);
    for k in (0..=p.steps()).step_by(p.steps().max(10) / 10) {
        let s = p.domains[k].slits()[0];
        println!("  t = {:.3}  theta = {:+.4}  m = {:.5}  start = {:.4}  arc = {:.4}", p.times[k], p.theta[k], s.m, s.theta_start, s.arc_length);
    }

    let disk = SdeConfig { kappa: 2.0, seed: 3, ..config };
    let finals: Vec<f64> = batch_map(&CircularSlitDisk::disk(), &disk, 400, |_, r| {
        let r = r.expect("disk paths do not fail");
        *r.path.theta.last().unwrap()
    });
    let (_, var) = mean_and_variance(&finals);
    println!("disk, kappa 2: Var(theta(0.1)) / 0.1 = {:.3} over {} paths", var / 0.1, finals.len());
    Ok(())
}
