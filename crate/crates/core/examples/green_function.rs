//! Green function, harmonic measures and the Loewner kernel from one
//! boundary solver factorization.
//!
//! ```text
//! cargo run --release --example green_function
//! ```

use num_complex::Complex64;
use slitsle::geometry::{discretize, make_domain};
use slitsle::potential::{period_matrix, LayerSolver, SolverOptions};

fn main() -> slitsle::Result<()> {
    let domain = make_domain(&[(0.6, -0.4, 1.8)])?;
    let mesh = discretize(&domain, 256, 64)?;
    let solver = LayerSolver::new(&mesh, SolverOptions::default())?;
    println!("condition estimate {:.2e}", solver.condition());

    let pole = Complex64::new(-0.2, 0.1);
    let green = solver.green(pole)?;
    for w in [Complex64::new(0.0, 0.0), Complex64::new(0.3, -0.4), Complex64::new(-0.5, 0.5)] {
        println!("G({w}, {pole}) = {:.8}", green.real(w));
    }
    // Zero on both boundary components.
    let s = &domain.slits()[0];
    println!("on the slit: {:.1e}", green.real(s.point(0.3)));
    println!("on the circle: {:.1e}", green.real(Complex64::from_polar(1.0, 2.0)));

    let omega = solver.harmonic_measures()?;
    let w = Complex64::new(0.1, 0.2);
    println!("omega_slit({w}) = {:.6}, omega_circle = {:.6}", omega.values(w)[0], omega.circle.value(w));
    println!("period matrix {}", period_matrix(&omega));

    let gamma = Complex64::from_polar(1.0, 2.5);
    let kernel = solver.loewner_kernel(gamma)?;
    println!("Loewner kernel at 0: {:.8}", kernel.value(Complex64::new(0.0, 0.0)));
    println!("periods around the slit: {:?}", kernel.periods());
    Ok(())
}
