//! Compare the boundary-integral Green function and harmonic measure with a
//! finite-volume solution on a polar grid.
//!
//! ```text
//! cargo run --release --example fd_oracle [grid_h]
//! ```

use num_complex::Complex64;
use slitsle::experiments::{fd_green_oracle, fd_harmonic_measures};
use slitsle::geometry::{discretize, make_domain};
use slitsle::potential::{LayerSolver, SolverOptions};

fn main() -> slitsle::Result<()> {
    let h: f64 = std::env::args().nth(1).map_or(1.0 / 200.0, |s| s.parse().expect("grid spacing"));
    let domain = make_domain(&[(0.5, 0.0, 2.0), (0.8, 3.0, 1.5)])?;
    let solver = LayerSolver::new(&discretize(&domain, 256, 64)?, SolverOptions::default())?;
    let pole = Complex64::new(-0.3, -0.2);
    let green = solver.green(pole)?;
    let omega = solver.harmonic_measures()?;

    let fd_green = fd_green_oracle(&domain, pole, h)?;
    let fd_omega = fd_harmonic_measures(&domain, h)?;
    println!("grid h = {h}, {} x {} cells", fd_green.harmonic.grid.rings(), fd_green.harmonic.grid.n_angles);
    println!("{:>18} {:>12} {:>12} {:>10}", "point", "layer", "grid", "diff");
    for w in [Complex64::new(0.0, 0.0), Complex64::new(0.2, 0.6), Complex64::new(-0.6, 0.1), Complex64::new(0.1, -0.7)] {
        let (a, b) = (green.real(w), fd_green.value(w));
        println!("{:>18} {a:>12.6} {b:>12.6} {:>10.1e}   G", format!("{w:.2}"), (a - b).abs());
        for j in 0..domain.slit_count() {
            let (a, b) = (omega.slits[j].value(w), fd_omega[j].value(w));
            println!("{:>18} {a:>12.6} {b:>12.6} {:>10.1e}   omega_{}", "", (a - b).abs(), j + 1);
        }
    }
    Ok(())
}
