//! Build a circular slit disk, inspect it and discretize its boundary.
//!
//! ```text
//! cargo run --example domains
//! ```

use num_complex::Complex64;
use slitsle::geometry::{discretize, make_domain, CircularSlitDisk};

fn main() -> slitsle::Result<()> {
    // (radius, start angle, arc length) per slit.
    let domain = make_domain(&[(0.5, 0.0, 1.2), (0.7, 3.0, 0.8)])?;
    println!("connectivity {}", domain.connectivity());
    for (j, s) in domain.slits().iter().enumerate() {
        println!(
            "slit {}: m = {}, angles [{:.3}, {:.3}], tips {:.4} / {:.4}",
            j + 1,
            s.m,
            s.theta_start,
            s.theta_end(),
            s.start_tip(),
            s.end_tip()
        );
    }

    let w = Complex64::new(0.0, 0.45);
    println!("distance from {w} to the slits: {:.4}", domain.distance_to_slits(w));
    println!("distance from {w} to the boundary: {:.4}", domain.distance_to_boundary(w));

    let mesh = discretize(&domain, 128, 32)?;
    println!("mesh: {} nodes ({} on the circle)", mesh.node_count(), mesh.n_circle);

    let text = domain.to_json();
    println!("{text}");
    assert_eq!(CircularSlitDisk::from_json(&text)?, domain);

    // Overlapping radii are rejected.
    match make_domain(&[(0.5, 0.0, 1.0), (0.5002, 2.0, 1.0)]) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
