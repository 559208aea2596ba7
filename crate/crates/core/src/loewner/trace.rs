use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flow::{reverse_point, PointStatus};
use super::{DrivingPath, FlowOptions};
use crate::error::{Error, Result};

/// Sampled curve in the initial domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub times: Vec<f64>,
    pub points: Vec<Complex64>,
    pub status: Vec<PointStatus>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the first point flagged as a slit collision.
    pub fn first_collision(&self) -> Option<usize> {
        self.status.iter().position(|s| *s == PointStatus::SlitCollision)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im,status\n");
        for ((t, z), s) in self.times.iter().zip(&self.points).zip(&self.status) {
            writeln!(out, "{t:.12e},{:.12e},{:.12e},{}", z.re, z.im, s.as_str()).unwrap();
        }
        out
    }
}

/// Trace points `g_s^{-1}((1 - eps_lift) gamma(s))` for each sample time `s`.
///
/// Sample times must be nondecreasing. A slit collision flag sticks to all
/// later samples; points back within `eps_swallow` of the unit circle away
/// from the starting point are flagged as swallowed.
pub fn compute_trace(path: &DrivingPath, sample_times: &[f64], opts: &FlowOptions) -> Result<Trace> {
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("sample times must be nondecreasing".into()));
    }
    if let Some(&s) = sample_times
        .iter()
        .find(|&&s| !(s >= 0.0 && s <= path.t_end()))
    {
        return Err(Error::SampleOutOfRange(s));
    }
    if path.steps() > 0 && !path.has_fields() {
        return Err(Error::Precondition("driving path has no cached fields".into()));
    }
    let domain = &path.domains[0];
    let start = path.gamma(0);
    let points = sample_times
        .par_iter()
        .map(|&s| {
            let g = Complex64::from_polar(1.0 - opts.eps_lift, path.theta_at(s));
            reverse_point(path, s, g, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut status = Vec::with_capacity(points.len());
    let mut collided = false;
    for &z in &points {
        collided |= domain.distance_to_slits(z) < opts.eps_slit;
        status.push(if collided {
            PointStatus::SlitCollision
        } else if 1.0 - z.norm() < opts.eps_swallow && (z - start).norm() > 10.0 * opts.eps_swallow {
            PointStatus::Swallowed
        } else {
            PointStatus::Alive
        });
    }
    Ok(Trace {
        times: sample_times.to_vec(),
        points,
        status,
    })
}
