//! Recover the driving function of a polyline: each vertex is hit by the
//! trace of the computed path.
//!
//! ```text
//! cargo run --release --example encode_curve
//! ```

use num_complex::Complex64;
use slitsle::geometry::make_domain;
use slitsle::loewner::{compute_trace, drive_from_arc, FlowOptions};
use slitsle::schiffer::Resolution;

fn main() -> slitsle::Result<()> {
    let domain = make_domain(&[(0.4, 2.0, 1.0)])?;
    let arc = [
        Complex64::from_polar(1.0, 0.0),
        Complex64::new(0.9, 0.05),
        Complex64::new(0.8, 0.0),
        Complex64::new(0.7, -0.08),
    ];
    let opts = FlowOptions::default();
    let path = drive_from_arc(&domain, &arc, 1e-6, &Resolution::default(), &opts)?;
    println!("{} steps, capacity time {:.6}", path.steps(), path.t_end());
    for (t, th) in path.times.iter().zip(&path.theta) {
        println!("  t = {t:.6}  theta = {th:+.6}");
    }
    let tr = compute_trace(&path, &[path.t_end()], &opts)?;
    println!("tip {:.6} vs last vertex {:.6}", tr.points[0], arc[3]);
    Ok(())
}
