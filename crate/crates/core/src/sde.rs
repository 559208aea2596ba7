//! The Schiffer diffusion: Euler-Maruyama for the driving angle coupled to
//! the moduli flow, one potential solve per step. Steps are split when the
//! frozen moduli velocities would move a tip or radius too far.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CircularSlitDisk, ModuliState};
use crate::loewner::{DrivingPath, PathStatus, SCHEMA_VERSION};
use crate::schiffer::{moduli_flow, step_domain, ModuliVelocity, PotentialBundle, Resolution, TotalField};

pub const MAX_DT: f64 = 1e-2;
pub const KAPPA_WARN: f64 = 16.0;
/// Largest tolerated `|Re bracket|`.
pub const DRIFT_REAL_TOL: f64 = 1e-4;
/// Smallest adaptive substep, relative to `dt`.
const MIN_SUBSTEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdeConfig {
    pub kappa: f64,
    pub dt: f64,
    pub t_max: f64,
    pub seed: u64,
    /// Stop once some `1 - m_j` falls below this.
    pub stop_delta: f64,
    pub theta0: f64,
    pub resolution: Resolution,
}

impl Default for SdeConfig {
    fn default() -> Self {
        SdeConfig {
            kappa: 2.0,
            dt: 1e-3,
            t_max: 0.1,
            seed: 0,
            stop_delta: 1e-3,
            theta0: 0.0,
            resolution: Resolution::default(),
        }
    }
}

impl SdeConfig {
    /// Check the configuration; returns warnings for accepted but unusual values.
    pub fn validate(&self) -> Result<Vec<String>> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return bad("kappa must be a finite nonnegative number");
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return bad("dt must lie in (0, 1e-2]");
        }
        if !(self.t_max.is_finite() && self.dt <= self.t_max) {
            return bad("t_max must be finite and at least dt");
        }
        if !(self.stop_delta > 0.0 && self.stop_delta < 1.0) {
            return bad("stop_delta must lie in (0, 1)");
        }
        if !self.theta0.is_finite() {
            return bad("theta0 must be finite");
        }
        let mut warnings = Vec::new();
        if self.kappa > KAPPA_WARN {
            warnings.push(format!("kappa = {} exceeds {KAPPA_WARN}", self.kappa));
        }
        Ok(warnings)
    }

    fn step_times(&self) -> Vec<f64> {
        let n = (self.t_max / self.dt - 1e-9).ceil() as usize;
        (0..=n).map(|k| (k as f64 * self.dt).min(self.t_max)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngProvenance {
    pub algorithm: String,
    pub seed: u64,
    pub stream: u64,
}

/// One simulated path with its configuration and stopping data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub config: SdeConfig,
    pub path: DrivingPath,
    /// Set iff the path stopped with `tau_reached`.
    pub tau: Option<f64>,
    pub status: PathStatus,
    pub rng: RngProvenance,
    /// Largest `|Re bracket|` seen along the path.
    pub max_re_bracket: f64,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: RunRecord = serde_json::from_str(text)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Serde(format!("unsupported schema_version {}", r.schema_version)));
        }
        Ok(r)
    }
}

/// Driving-angle drift `Im(l(gamma) + sum_j R_j(gamma) mu_j)` and the real part
/// of the bracket, which must vanish.
pub fn drift(field: &TotalField) -> (f64, f64) {
    let b = field.bracket();
    (b.im, b.re)
}

/// One Euler-Maruyama step of the driving angle with the moduli advanced by
/// the frozen flow. `dw` is an `N(0, dt)` increment.
pub fn schiffer_step(
    state: &ModuliState,
    bundle: &PotentialBundle,
    dt: f64,
    dw: f64,
    kappa: f64,
) -> Result<ModuliState> {
    let (a, vel) = velocities(state, bundle)?;
    advance(state, vel.as_ref(), a, dt, dw, kappa)
}

/// Drift and moduli velocity of a state, after the realness check.
fn velocities(state: &ModuliState, bundle: &PotentialBundle) -> Result<(f64, Option<ModuliVelocity>)> {
    if state.state_hash() != bundle.state_hash {
        return Err(Error::Precondition("bundle does not match state".into()));
    }
    let (a, re) = drift(&bundle.field);
    if re.abs() > DRIFT_REAL_TOL {
        return Err(Error::DriftNotReal(re));
    }
    if state.domain.slit_count() == 0 {
        return Ok((a, None));
    }
    Ok((a, Some(moduli_flow(state, bundle)?)))
}

fn advance(
    state: &ModuliState,
    vel: Option<&ModuliVelocity>,
    a: f64,
    dt: f64,
    dw: f64,
    kappa: f64,
) -> Result<ModuliState> {
    let domain = match vel {
        Some(v) => step_domain(&state.domain, v, dt)?,
        None => state.domain.clone(),
    };
    Ok(ModuliState::new(
        state.t + dt,
        state.gamma_angle + a * dt + kappa.sqrt() * dw,
        domain,
    ))
}

/// Fraction of the local length scale a tip, radius or driving point may move in one substep.
const MOVE_FRACTION: f64 = 0.2;

/// Longest substep over which frozen velocities stay trustworthy.
///
/// Near-boundary slits and slits close to the driving point make the moduli
/// flow stiff; tips then move at speeds of order one over their distance to
/// the driving point.
pub fn substep_limit(state: &ModuliState, vel: &ModuliVelocity, drift: f64) -> f64 {
    let gamma = state.gamma();
    let mut h = f64::INFINITY;
    let mut gap = f64::INFINITY;
    for (j, s) in state.domain.slits().iter().enumerate() {
        let tips = [s.start_tip(), s.end_tip()];
        let near = tips.iter().map(|p| (p - gamma).norm()).fold(s.arc_length, f64::min);
        let speeds = [vel.dtheta_start[j], vel.dtheta_start[j] + vel.darc[j]];
        for v in speeds {
            h = h.min(MOVE_FRACTION * near / v.abs());
        }
        h = h.min(MOVE_FRACTION * s.arc_length / vel.darc[j].abs());
        if vel.dlnm[j] > 0.0 {
            h = h.min(MOVE_FRACTION * (1.0 - s.m) / vel.dlnm[j]);
        }
        gap = gap.min(s.distance(gamma));
    }
    h.min(MOVE_FRACTION * gap / drift.abs())
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Simulate one path using RNG stream 0.
pub fn simulate_driving(domain: &CircularSlitDisk, theta0: f64, config: &SdeConfig) -> Result<RunRecord> {
    simulate_stream(domain, theta0, config, 0)
}

/// Simulate one path using the given RNG stream of `config.seed`.
pub fn simulate_stream(
    domain: &CircularSlitDisk,
    theta0: f64,
    config: &SdeConfig,
    stream: u64,
) -> Result<RunRecord> {
    simulate_until(domain, theta0, config, stream, &mut |_| Ok(false))
}

/// As [`simulate_stream`], but `stop` is consulted after every grid step and
/// the run ends with [`PathStatus::Stopped`] once it returns `true`.
pub fn simulate_until(
    domain: &CircularSlitDisk,
    theta0: f64,
    config: &SdeConfig,
    stream: u64,
    stop: &mut dyn FnMut(&DrivingPath) -> Result<bool>,
) -> Result<RunRecord> {
    let warnings = config.validate()?;
    let clock = Instant::now();
    let mut rng = rng_for(config.seed, stream);
    let times = config.step_times();
    let mut path = DrivingPath::new(domain.clone(), theta0);
    let mut tau = None;
    let mut max_re = 0.0f64;
    'grid: for k in 0..times.len() - 1 {
        let (ta, tb) = (times[k], times[k + 1]);
        let z: f64 = StandardNormal.sample(&mut rng);
        let dw = (tb - ta).sqrt() * z;
        let mut u = ta;
        while u < tb {
            let state = path.state(path.steps());
            let (next, field) = if state.domain.slit_count() == 0 {
                let field = TotalField::disk(state.gamma());
                (advance(&state, None, 0.0, tb - u, dw * (tb - u) / (tb - ta), config.kappa)?, field)
            } else {
                let bundle = PotentialBundle::new(&state, &config.resolution)?;
                max_re = max_re.max(drift(&bundle.field).1.abs());
                let (a, vel) = velocities(&state, &bundle)?;
                let vel = vel.expect("slit domain has moduli velocities");
                let h = substep_limit(&state, &vel, a).min(tb - u);
                if !(h >= MIN_SUBSTEP * (tb - ta)) {
                    return Err(Error::StepUnderflow(u));
                }
                match advance(&state, Some(&vel), a, h, dw * h / (tb - ta), config.kappa) {
                    Ok(next) => (next, bundle.field),
                    Err(Error::DegenerateDomain(_)) => {
                        path.status = PathStatus::Degenerate;
                        break 'grid;
                    }
                    Err(e) => return Err(e),
                }
            };
            u = if tb - next.t <= 1e-12 * tb { tb } else { next.t };
            let reached = next.domain.slits().iter().any(|s| 1.0 - s.m < config.stop_delta);
            path.push(u, next.gamma_angle, next.domain, Some(Arc::new(field)));
            if reached {
                path.status = PathStatus::TauReached;
                tau = Some(u);
                break 'grid;
            }
        }
        if stop(&path)? {
            path.status = PathStatus::Stopped;
            break;
        }
    }
    Ok(RunRecord {
        schema_version: SCHEMA_VERSION,
        config: SdeConfig { theta0, ..*config },
        status: path.status,
        path,
        tau,
        rng: RngProvenance {
            algorithm: "ChaCha8".into(),
            seed: config.seed,
            stream,
        },
        max_re_bracket: max_re,
        warnings,
        wall_seconds: clock.elapsed().as_secs_f64(),
    })
}

/// Simulate `n_paths` independent paths; path `i` uses stream `i`. Failures
/// are kept in place and do not stop the batch.
pub fn batch_simulate(domain: &CircularSlitDisk, config: &SdeConfig, n_paths: usize) -> Vec<Result<RunRecord>> {
    batch_map(domain, config, n_paths, |_, r| r)
}

/// Simulate paths in parallel and reduce each one with `f` inside the worker,
/// so large ensembles never hold every path at once. Output is in path order.
pub fn batch_map<T, F>(domain: &CircularSlitDisk, config: &SdeConfig, n_paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, Result<RunRecord>) -> T + Sync,
{
    (0..n_paths)
        .into_par_iter()
        .map(|i| f(i, simulate_stream(domain, config.theta0, config, i as u64)))
        .collect()
}

/// Run `f` on a rayon pool with `jobs` threads (0 means the default pool).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_domain;

    fn quick(kappa: f64, t_max: f64, seed: u64) -> SdeConfig {
        SdeConfig {
            kappa,
            dt: 1e-2,
            t_max,
            seed,
            ..SdeConfig::default()
        }
    }

    #[test]
    fn config_checks() {
        assert!(quick(-1.0, 0.1, 0).validate().is_err());
        assert!(SdeConfig { dt: 0.02, ..quick(2.0, 0.1, 0) }.validate().is_err());
        assert!(quick(2.0, 0.001, 0).validate().is_err());
        assert_eq!(quick(20.0, 0.1, 0).validate().unwrap().len(), 1);
        assert!(quick(16.0, 0.1, 0).validate().unwrap().is_empty());
    }

    #[test]
    fn disk_is_plain_brownian_driving() {
        let cfg = quick(0.0, 0.2, 3);
        let r = simulate_driving(&CircularSlitDisk::disk(), 0.7, &cfg).unwrap();
        assert!(r.path.theta.iter().all(|&t| t == 0.7));
        assert_eq!(r.status, PathStatus::Completed);
        assert_eq!(r.tau, None);
        assert!((r.path.t_end() - 0.2).abs() < 1e-15);

        let cfg = quick(4.0, 0.1, 3);
        let r = simulate_driving(&CircularSlitDisk::disk(), 0.0, &cfg).unwrap();
        let mut rng = rng_for(3, 0);
        let mut theta = 0.0;
        for k in 0..10 {
            let z: f64 = StandardNormal.sample(&mut rng);
            theta += 2.0 * 0.1 * z;
            assert!((r.path.theta[k + 1] - theta).abs() < 1e-12);
        }
    }

    #[test]
    fn bracket_is_imaginary_on_slit_domain() {
        let d = make_domain(&[(0.5, 0.0, std::f64::consts::FRAC_PI_2)]).unwrap();
        for theta in [0.3, 2.0, 4.5] {
            let state = ModuliState::new(0.0, theta, d.clone());
            let b = PotentialBundle::new(&state, &Resolution::default()).unwrap();
            assert!(drift(&b.field).1.abs() < 1e-6);
        }
    }

    #[test]
    fn near_unit_slit_reaches_tau() {
        let d = make_domain(&[(0.995, 0.0, 0.3)]).unwrap();
        let cfg = SdeConfig {
            kappa: 0.0,
            dt: 1e-2,
            t_max: 1.0,
            ..SdeConfig::default()
        };
        let r = simulate_driving(&d, 0.5, &cfg).unwrap();
        assert_eq!(r.status, PathStatus::TauReached);
        let tau = r.tau.unwrap();
        assert!(tau < 1.0);
        let m: Vec<f64> = r.path.domains.iter().map(|d| d.slits()[0].m).collect();
        assert!(m.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn seeded_runs_repeat_and_ignore_pool_size() {
        let d = make_domain(&[(0.5, 1.0, 1.0)]).unwrap();
        let cfg = quick(3.0, 0.05, 11);
        let a = with_jobs(1, || batch_simulate(&d, &cfg, 4)).unwrap();
        let b = with_jobs(3, || batch_simulate(&d, &cfg, 4)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.as_ref().unwrap().to_json(), y.as_ref().unwrap().to_json());
        }
        assert_ne!(a[0].as_ref().unwrap().path.theta, a[1].as_ref().unwrap().path.theta);
        let back = RunRecord::from_json(&a[2].as_ref().unwrap().to_json()).unwrap();
        assert_eq!(back.to_json(), a[2].as_ref().unwrap().to_json());
    }
}
