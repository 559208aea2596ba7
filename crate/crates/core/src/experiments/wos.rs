//! Walk-on-spheres estimate of harmonic measure.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::CircularSlitDisk;

/// Walks stop once they are this close to the boundary.
pub const SHELL: f64 = 1e-6;
const MAX_JUMPS: usize = 100_000;

/// Hit frequencies per boundary component: index 0 is the unit circle,
/// index `j` is slit `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub n_walks: usize,
    pub frequencies: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Walks that exceeded the jump limit; they are assigned to the nearest component.
    pub truncated: usize,
}

pub fn mc_harmonic_measure_oracle(domain: &CircularSlitDisk, w: Complex64, n_walks: usize, seed: u64) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; domain.slit_count() + 1];
    let mut truncated = 0;
    for _ in 0..n_walks {
        let mut z = w;
        let mut jumps = 0;
        let hit = loop {
            let (d, c) = nearest(domain, z);
            if d < SHELL || jumps == MAX_JUMPS {
                truncated += usize::from(d >= SHELL);
                break c;
            }
            let a: f64 = rng.random::<f64>() * TAU;
            z += Complex64::from_polar(d, a);
            jumps += 1;
        };
        counts[hit] += 1;
    }
    let n = n_walks.max(1) as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let std_errors = frequencies.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    McEstimate {
        n_walks,
        frequencies,
        std_errors,
        truncated,
    }
}

fn nearest(domain: &CircularSlitDisk, z: Complex64) -> (f64, usize) {
    let mut best = (1.0 - z.norm(), 0);
    for (j, s) in domain.slits().iter().enumerate() {
        let d = s.distance(z);
        if d < best.0 {
            best = (d, j + 1);
        }
    }
    best
}
