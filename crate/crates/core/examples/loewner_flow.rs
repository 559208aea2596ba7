//! Run the Komatu-Loewner flow for a prescribed driving function, sample the
//! trace and check that forward and reverse flows invert each other.
//!
//! ```text
//! cargo run --release --example loewner_flow
//! ```

use num_complex::Complex64;
use slitsle::geometry::make_domain;
use slitsle::loewner::{advance_points, compute_trace, reverse_point, DrivingPath, FlowOptions, FlowPoint};
use slitsle::schiffer::Resolution;

fn main() -> slitsle::Result<()> {
    let domain = make_domain(&[(0.5, 1.0, 1.5)])?;
    let dt = 5e-3;
    let times: Vec<f64> = (0..=60).map(|k| k as f64 * dt).collect();
    let theta: Vec<f64> = times.iter().map(|t| 0.3 * (5.0 * t).sin()).collect();
    let path = DrivingPath::from_driving(domain, &times, &theta, &Resolution::default(), 1e-3)?;
    println!("{} steps to t = {}, status {:?}", path.steps(), path.t_end(), path.status);
    let last = path.domains.last().unwrap().slits()[0];
    println!("slit at t_end: m = {:.6}, arc {:.6}", last.m, last.arc_length);

    let opts = FlowOptions::default();
    let samples: Vec<f64> = (0..=6).map(|k| path.t_end() * k as f64 / 6.0).collect();
    let trace = compute_trace(&path, &samples, &opts)?;
    print!("{}", trace.to_csv());

    let z0 = Complex64::new(-0.2, -0.3);
    let mut p = [FlowPoint::new(z0)];
    advance_points(&mut p, &path, 0.0, path.t_end(), &opts)?;
    let back = reverse_point(&path, path.t_end(), p[0].z, &opts)?;
    println!("g_t({z0}) = {:.6}, pulled back error {:.1e}", p[0].z, (back - z0).norm());
    Ok(())
}
