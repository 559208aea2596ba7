use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DrivingPath, FlowOptions};
use crate::error::{Error, Result};
use crate::geometry::CircularSlitDisk;
use crate::schiffer::TotalField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Alive,
    Swallowed,
    SlitCollision,
}

impl PointStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointStatus::Alive => "alive",
            PointStatus::Swallowed => "swallowed",
            PointStatus::SlitCollision => "slit_collision",
        }
    }
}

/// A point carried by the forward flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowPoint {
    /// Starting point in the initial domain.
    pub z0: Complex64,
    /// Current image `g_t(z0)`.
    pub z: Complex64,
    pub status: PointStatus,
    /// Time at which the status last changed.
    pub t_event: Option<f64>,
}

impl FlowPoint {
    pub fn new(z0: Complex64) -> Self {
        FlowPoint {
            z0,
            z: z0,
            status: PointStatus::Alive,
            t_event: None,
        }
    }
}

/// The field on one step: linearly interpolated singularity plus the frozen regular part.
pub(crate) struct Segment<'a> {
    field: &'a TotalField,
    t0: f64,
    t1: f64,
    th0: f64,
    th1: f64,
}

impl<'a> Segment<'a> {
    pub fn new(path: &'a DrivingPath, k: usize) -> Self {
        Segment {
            field: path.field(k),
            t0: path.times[k],
            t1: path.times[k + 1],
            th0: path.theta[k],
            th1: path.theta[k + 1],
        }
    }

    fn rate(&self) -> f64 {
        (self.th1 - self.th0) / (self.t1 - self.t0)
    }

    pub fn gamma(&self, u: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.th0 + self.rate() * (u - self.t0))
    }

    /// `dz/du = z V(z; u)`.
    fn velocity(&self, z: Complex64, u: f64) -> Complex64 {
        let g = self.gamma(u);
        z * ((g + z) / (g - z) + self.field.regular(z))
    }
}

pub(crate) enum Watch<'a> {
    Forward(&'a CircularSlitDisk),
    Reverse,
}

/// Integrate from `ua` to `ub` within one segment. Returns the end point and
/// the first event, if any (the integration stops there).
pub(crate) fn integrate(
    seg: &Segment,
    mut z: Complex64,
    ua: f64,
    ub: f64,
    opts: &FlowOptions,
    watch: &Watch,
) -> Result<(Complex64, Option<(PointStatus, f64)>)> {
    let dir = if ub >= ua { 1.0 } else { -1.0 };
    let rate = seg.rate().abs();
    let floor = (1e-3 * opts.eps_lift * opts.eps_lift).min(1e-12);
    let mut u = ua;
    while (ub - u) * dir > 0.0 {
        let d = (z - seg.gamma(u)).norm();
        let rem = (ub - u).abs();
        let mut h = rem.min(opts.step_factor * d * d);
        if rate > 0.0 {
            h = h.min(0.25 * d / rate);
        }
        if !(h >= floor.min(rem)) {
            return Err(Error::StepUnderflow(u));
        }
        let last = h >= rem;
        let hs = dir * h;
        let k1 = seg.velocity(z, u);
        let k2 = seg.velocity(z + 0.5 * hs * k1, u + 0.5 * hs);
        let k3 = seg.velocity(z + 0.5 * hs * k2, u + 0.5 * hs);
        let k4 = seg.velocity(z + hs * k3, u + hs);
        z += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        u = if last { ub } else { u + hs };
        match watch {
            Watch::Forward(domain) => {
                if !z.re.is_finite() || (z - seg.gamma(u)).norm() < opts.eps_swallow {
                    return Ok((z, Some((PointStatus::Swallowed, u))));
                }
                if domain.distance_to_slits(z) < opts.eps_slit {
                    return Ok((z, Some((PointStatus::SlitCollision, u))));
                }
            }
            Watch::Reverse => {
                if !z.re.is_finite() || !z.im.is_finite() || z.norm() > 1.0 + 1e-3 {
                    return Err(Error::ReverseBlowup(u));
                }
            }
        }
    }
    Ok((z, None))
}

/// Advance alive points by the forward flow over `[t0, t1]`.
///
/// Swallowed and slit-colliding points are frozen with their event time;
/// flags never clear.
pub fn advance_points(
    points: &mut [FlowPoint],
    path: &DrivingPath,
    t0: f64,
    t1: f64,
    opts: &FlowOptions,
) -> Result<()> {
    if !(t0 <= t1) || t1 > path.t_end() || t0 < 0.0 {
        return Err(Error::SampleOutOfRange(t1));
    }
    if t0 == t1 {
        return Ok(());
    }
    let k0 = path.step_index(t0)?;
    let k1 = path.step_index(t1)?;
    for k in k0..=k1 {
        let seg = Segment::new(path, k);
        let ua = t0.max(path.times[k]);
        let ub = t1.min(path.times[k + 1]);
        if ub <= ua {
            continue;
        }
        let watch = Watch::Forward(&path.domains[k]);
        for p in points.iter_mut().filter(|p| p.status == PointStatus::Alive) {
            let (z, event) = integrate(&seg, p.z, ua, ub, opts, &watch)?;
            p.z = z;
            if let Some((status, t)) = event {
                p.status = status;
                p.t_event = Some(t);
            }
        }
    }
    Ok(())
}

/// Pull `z` (a point of the domain at time `s`) back to the initial domain.
pub fn reverse_point(path: &DrivingPath, s: f64, z: Complex64, opts: &FlowOptions) -> Result<Complex64> {
    if s == 0.0 {
        return Ok(z);
    }
    let mut k = path.step_index(s)?;
    let mut z = z;
    let mut u = s;
    loop {
        let seg = Segment::new(path, k);
        let (next, _) = integrate(&seg, z, u, path.times[k], opts, &Watch::Reverse)?;
        z = next;
        u = path.times[k];
        if k == 0 {
            break;
        }
        k -= 1;
    }
    debug_assert_eq!(u, 0.0);
    Ok(z)
}
