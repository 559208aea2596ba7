//! Solve the potential problems of one moduli state and print the
//! identities that tie them together: lambda = 2 pi P^-1 omega(0), V(0) = 1,
//! a purely imaginary drift bracket and Re V = mu_j on slit j.
//!
//! ```text
//! cargo run --release --example identities
//! ```

use slitsle::geometry::{make_domain, ModuliState};
use slitsle::schiffer::{IdentityReport, Resolution};

fn main() -> slitsle::Result<()> {
    let domain = make_domain(&[(0.4, 0.5, 1.5), (0.75, 2.5, 2.0)])?;
    let state = ModuliState::new(0.0, 0.3, domain);
    let r = IdentityReport::compute(&state, &Resolution::default())?;

    println!("omega(0)      {:?}", r.omega_at_origin);
    println!("P             {:?}", r.period_matrix);
    println!("lambda        {:?}", r.lambda);
    let ln_m: Vec<f64> = state.domain.slits().iter().map(|s| -s.m.ln()).collect();
    println!("-ln m         {ln_m:?}");
    println!("rel. error    {:.2e}", r.lambda_rel_error);
    println!("V(0)          {:?}", r.v_at_origin);
    println!("bracket       {:?}", r.bracket);
    println!("mu            {:?}", r.mu);
    println!("Re V - mu     {:?}", r.slit_re_deviation);
    println!("dtheta/dt     {:?}", r.dtheta_start);
    println!("darc/dt       {:?}", r.darc);
    println!("residual      {:.2e}", r.max_residual);
    Ok(())
}
