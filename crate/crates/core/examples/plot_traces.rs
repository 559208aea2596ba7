//! Simulate a few traces and draw them with the domain as SVG.
//!
//! ```text
//! cargo run --release --example plot_traces > traces.svg
//! ```

use slitsle::experiments::{render_svg, uniform_samples, SvgOptions};
use slitsle::geometry::make_domain;
use slitsle::loewner::{compute_trace, FlowOptions};
use slitsle::sde::{simulate_stream, SdeConfig};

fn main() -> slitsle::Result<()> {
    let domain = make_domain(&[(0.55, 1.0, 2.2), (0.8, 4.0, 1.2)])?;
    let config = SdeConfig { kappa: 3.0, dt: 2e-3, t_max: 0.3, seed: 8, ..Default::default() };
    let mut traces = Vec::new();
    for stream in 0..3 {
        let run = simulate_stream(&domain, 0.0, &config, stream)?;
        let times = uniform_samples(config.t_max, 150, run.path.t_end());
        traces.push(compute_trace(&run.path, &times, &FlowOptions::default())?.points);
    }
    print!("{}", render_svg(&domain, &traces, &SvgOptions::default()));
    Ok(())
}
