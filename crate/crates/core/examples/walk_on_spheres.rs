//! Estimate harmonic measures by walk on spheres and compare with the
//! boundary solver.
//!
//! ```text
//! cargo run --release --example walk_on_spheres [walks]
//! ```

use num_complex::Complex64;
use slitsle::experiments::mc_harmonic_measure_oracle;
use slitsle::geometry::{discretize, make_domain};
use slitsle::potential::{LayerSolver, SolverOptions};

fn main() -> slitsle::Result<()> {
    let walks: usize = std::env::args().nth(1).map_or(20_000, |s| s.parse().expect("walk count"));
    let domain = make_domain(&[(0.45, 0.5, 2.5), (0.75, 3.5, 1.5)])?;
    let omega = LayerSolver::new(&discretize(&domain, 256, 64)?, SolverOptions::default())?.harmonic_measures()?;
    for w in [Complex64::new(0.0, 0.0), Complex64::new(-0.6, 0.2)] {
        let mc = mc_harmonic_measure_oracle(&domain, w, walks, 17);
        println!("at {w}: {} walks, {} truncated", mc.n_walks, mc.truncated);
        for j in 0..domain.slit_count() {
            let exact = omega.values(w)[j];
            let (f, se) = (mc.frequencies[j + 1], mc.std_errors[j + 1]);
            println!("  slit {}: solver {exact:.5}, walks {f:.5} +- {se:.5} ({:+.2} s.e.)", j + 1, (f - exact) / se);
        }
    }
    Ok(())
}
