//! The radial Komatu-Loewner flow: driving paths, forward hull flow, trace
//! extraction and encoding of arcs as driving paths.

mod encode;
mod flow;
mod trace;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CircularSlitDisk, ModuliState};
use crate::schiffer::{moduli_flow, step_domain, PotentialBundle, Resolution, TotalField};

pub use encode::{drive_from_arc, drive_from_arc_partial};
pub use flow::{advance_points, reverse_point, FlowPoint, PointStatus};
pub use trace::{compute_trace, Trace};

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerances of the hull flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub eps_swallow: f64,
    pub eps_lift: f64,
    pub eps_slit: f64,
    /// Substeps are bounded by `step_factor * |g - gamma|^2`.
    pub step_factor: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            eps_swallow: 1e-3,
            eps_lift: 1e-6,
            eps_slit: 1e-3,
            step_factor: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Completed,
    TauReached,
    SlitCollision,
    /// An arc collapsed or two slits met before any radius reached 1.
    Degenerate,
    /// Halted by a caller-supplied stopping rule.
    Stopped,
}

/// Total field `V` at time `t` for `gamma` at the driving point.
pub fn total_field<'a>(state: &ModuliState, bundle: &'a PotentialBundle) -> Result<&'a TotalField> {
    if state.state_hash() != bundle.state_hash {
        return Err(Error::Precondition("bundle does not match state".into()));
    }
    Ok(&bundle.field)
}

/// Discretized driving function together with the domains it generates.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "PathJson", try_from = "PathJson")]
pub struct DrivingPath {
    pub times: Vec<f64>,
    pub theta: Vec<f64>,
    pub domains: Vec<CircularSlitDisk>,
    pub status: PathStatus,
    /// Regular part of the field for each step, frozen at the step start.
    fields: Vec<Option<Arc<TotalField>>>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct PathJson {
    schema_version: u32,
    times: Vec<f64>,
    theta: Vec<f64>,
    m: Vec<Vec<f64>>,
    theta_start: Vec<Vec<f64>>,
    arc_length: Vec<Vec<f64>>,
    status: PathStatus,
    #[serde(rename = "T")]
    t_end: f64,
}

impl DrivingPath {
    pub fn new(domain: CircularSlitDisk, theta0: f64) -> Self {
        DrivingPath {
            times: vec![0.0],
            theta: vec![theta0],
            domains: vec![domain],
            status: PathStatus::Completed,
            fields: Vec::new(),
        }
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("path has a first sample")
    }

    pub fn state(&self, k: usize) -> ModuliState {
        ModuliState::new(self.times[k], self.theta[k], self.domains[k].clone())
    }

    /// Append a sample; `field` is the total field of the state at the start of the step.
    pub fn push(&mut self, t: f64, theta: f64, domain: CircularSlitDisk, field: Option<Arc<TotalField>>) {
        assert!(t > self.t_end(), "times must increase");
        self.times.push(t);
        self.theta.push(theta);
        self.domains.push(domain);
        self.fields.push(field);
    }

    /// Drop every sample after index `k`.
    pub fn truncate(&mut self, k: usize) {
        self.times.truncate(k + 1);
        self.theta.truncate(k + 1);
        self.domains.truncate(k + 1);
        self.fields.truncate(k);
    }

    pub fn has_fields(&self) -> bool {
        self.fields.len() == self.steps() && self.fields.iter().all(Option::is_some)
    }

    /// Recompute missing step fields from the stored states.
    pub fn ensure_fields(&mut self, res: &Resolution) -> Result<()> {
        self.fields.resize(self.steps(), None);
        for k in 0..self.steps() {
            if self.fields[k].is_none() {
                if self.domains[k].slit_count() == 0 {
                    self.fields[k] = Some(Arc::new(TotalField::disk(self.gamma(k))));
                } else {
                    let b = PotentialBundle::new(&self.state(k), res)?;
                    self.fields[k] = Some(Arc::new(b.field));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn field(&self, k: usize) -> &TotalField {
        self.fields[k]
            .as_deref()
            .expect("step fields are computed before flowing")
    }

    pub fn gamma(&self, k: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.theta[k])
    }

    /// Step containing `u`: `times[k] <= u <= times[k + 1]`.
    pub fn step_index(&self, u: f64) -> Result<usize> {
        if !(u >= 0.0 && u <= self.t_end()) || self.steps() == 0 {
            return Err(Error::SampleOutOfRange(u));
        }
        let k = self.times.partition_point(|&t| t <= u);
        Ok(k.saturating_sub(1).min(self.steps() - 1))
    }

    /// Linearly interpolated driving angle.
    pub fn theta_at(&self, u: f64) -> f64 {
        match self.step_index(u) {
            Ok(k) => {
                let (t0, t1) = (self.times[k], self.times[k + 1]);
                let lam = (u - t0) / (t1 - t0);
                self.theta[k] + lam * (self.theta[k + 1] - self.theta[k])
            }
            Err(_) => self.theta[0],
        }
    }

    /// Build a path from a prescribed driving function; moduli follow the
    /// Schiffer flow with one potential solve per step.
    pub fn from_driving(
        domain: CircularSlitDisk,
        times: &[f64],
        theta: &[f64],
        res: &Resolution,
        stop_delta: f64,
    ) -> Result<Self> {
        if times.len() != theta.len() || times.is_empty() || times[0] != 0.0 {
            return Err(Error::Precondition("times must start at 0 and match theta".into()));
        }
        let mut path = DrivingPath::new(domain, theta[0]);
        for k in 0..times.len() - 1 {
            let dt = times[k + 1] - times[k];
            if !(dt > 0.0) {
                return Err(Error::Precondition("times must increase".into()));
            }
            let state = path.state(k);
            let (next, field) = if state.domain.slit_count() == 0 {
                (state.domain.clone(), TotalField::disk(state.gamma()))
            } else {
                let b = PotentialBundle::new(&state, res)?;
                let vel = moduli_flow(&state, &b)?;
                match step_domain(&state.domain, &vel, dt) {
                    Ok(d) => (d, b.field),
                    Err(Error::DegenerateDomain(_)) => {
                        path.status = PathStatus::Degenerate;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            };
            let reached = next.slits().iter().any(|s| 1.0 - s.m < stop_delta);
            path.push(times[k + 1], theta[k + 1], next, Some(Arc::new(field)));
            if reached {
                path.status = PathStatus::TauReached;
                break;
            }
        }
        Ok(path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("path serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl From<DrivingPath> for PathJson {
    fn from(p: DrivingPath) -> Self {
        let n = p.domains[0].slit_count();
        let column = |f: &dyn Fn(&crate::geometry::Slit) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|j| p.domains.iter().map(|d| f(&d.slits()[j])).collect())
                .collect()
        };
        PathJson {
            schema_version: SCHEMA_VERSION,
            m: column(&|s| s.m),
            theta_start: column(&|s| s.theta_start),
            arc_length: column(&|s| s.arc_length),
            status: p.status,
            t_end: p.t_end(),
            times: p.times,
            theta: p.theta,
        }
    }
}

impl TryFrom<PathJson> for DrivingPath {
    type Error = Error;

    fn try_from(d: PathJson) -> Result<Self> {
        let n = d.m.len();
        if d.theta.len() != d.times.len() || d.times.is_empty() {
            return Err(Error::Serde("times and theta lengths differ".into()));
        }
        if d.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Serde("times must increase".into()));
        }
        let columns = [&d.m, &d.theta_start, &d.arc_length];
        if d.theta_start.len() != n || d.arc_length.len() != n
            || columns.iter().any(|c| c.iter().any(|v| v.len() != d.times.len()))
        {
            return Err(Error::Serde("moduli arrays do not match times".into()));
        }
        let mut domains = Vec::with_capacity(d.times.len());
        for k in 0..d.times.len() {
            let triples: Vec<(f64, f64, f64)> = (0..n)
                .map(|j| (d.m[j][k], d.theta_start[j][k], d.arc_length[j][k]))
                .collect();
            domains.push(crate::geometry::make_domain(&triples)?);
        }
        Ok(DrivingPath {
            times: d.times,
            theta: d.theta,
            domains,
            status: d.status,
            fields: Vec::new(),
        })
    }
}
