use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use super::flow::{integrate, reverse_point, Segment, Watch};
use super::{DrivingPath, FlowOptions};
use crate::error::{Error, Result};
use crate::geometry::CircularSlitDisk;
use crate::schiffer::{moduli_flow, step_domain, PotentialBundle, Resolution, TotalField};

const MAX_VERTICES: usize = 200;
const NEWTON_ITERS: usize = 30;

/// Encode a polyline starting on the unit circle as a driving path whose
/// trace passes through every vertex.
///
/// On failure the error names the offending vertex; [`drive_from_arc_partial`]
/// also returns the path built so far.
pub fn drive_from_arc(
    domain: &CircularSlitDisk,
    arc: &[Complex64],
    tol: f64,
    res: &Resolution,
    opts: &FlowOptions,
) -> Result<DrivingPath> {
    let (path, outcome) = drive_from_arc_partial(domain, arc, tol, res, opts);
    outcome.map(|_| path)
}

pub fn drive_from_arc_partial(
    domain: &CircularSlitDisk,
    arc: &[Complex64],
    tol: f64,
    res: &Resolution,
    opts: &FlowOptions,
) -> (DrivingPath, Result<()>) {
    let theta0 = arc.first().map(|z| z.arg()).unwrap_or(0.0);
    let mut path = DrivingPath::new(domain.clone(), theta0);
    let fail = |vertex: usize, reason: &str| Error::NoConvergence {
        vertex,
        reason: reason.to_string(),
    };
    if arc.len() < 2 || arc.len() > MAX_VERTICES {
        return (path, Err(fail(0, "need between 2 and 200 vertices")));
    }
    if (arc[0].norm() - 1.0).abs() > 1e-9 {
        return (path, Err(fail(0, "first vertex is not on the unit circle")));
    }
    for (k, z) in arc.iter().enumerate().skip(1) {
        if z.norm() >= 1.0 || z.norm() < opts.eps_slit {
            return (path, Err(fail(k, "vertex outside the domain or at the origin")));
        }
        if domain.distance_to_slits(*z) < opts.eps_slit {
            return (path, Err(fail(k, "vertex within eps_slit of a slit")));
        }
    }
    for k in 1..arc.len() {
        if let Err(e) = extend_to_vertex(&mut path, arc[k], tol, res, opts) {
            let reason = match e {
                Error::NoConvergence { reason, .. } => reason,
                other => other.to_string(),
            };
            return (path, Err(fail(k, &reason)));
        }
    }
    (path, Ok(()))
}

/// Image of `z` under the forward flow up to the end of `path`.
fn forward_image(path: &DrivingPath, z: Complex64, opts: &FlowOptions) -> Result<Complex64> {
    let loose = FlowOptions {
        eps_swallow: 0.0,
        eps_slit: 0.0,
        ..*opts
    };
    let mut z = z;
    for k in 0..path.steps() {
        let seg = Segment::new(path, k);
        let watch = Watch::Forward(&path.domains[k]);
        let (next, event) = integrate(&seg, z, path.times[k], path.times[k + 1], &loose, &watch)?;
        if event.is_some() {
            return Err(Error::NoConvergence {
                vertex: 0,
                reason: "vertex is swallowed by the current hull".into(),
            });
        }
        z = next;
    }
    Ok(z)
}

fn extend_to_vertex(
    path: &mut DrivingPath,
    target: Complex64,
    tol: f64,
    res: &Resolution,
    opts: &FlowOptions,
) -> Result<()> {
    let k = path.steps();
    let t = path.t_end();
    let theta = path.theta[k];
    let state = path.state(k);
    let (field, vel) = if state.domain.slit_count() == 0 {
        (TotalField::disk(state.gamma()), None)
    } else {
        let b = PotentialBundle::new(&state, res)?;
        let vel = moduli_flow(&state, &b)?;
        (b.field, Some(vel))
    };
    let field = Arc::new(field);
    let w = forward_image(path, target, opts)?;

    // Candidate path with one more step; only the last segment depends on the unknowns.
    let candidate = |dt: f64, dth: f64| -> DrivingPath {
        let mut p = path.clone();
        p.push(t + dt, theta + dth, state.domain.clone(), Some(field.clone()));
        p
    };
    let lift = |dth: f64| Complex64::from_polar(1.0 - opts.eps_lift, theta + dth);
    let one_step = |x: Vector2<f64>| -> Result<Complex64> {
        let p = candidate(x[0], x[1]);
        let seg = Segment::new(&p, k);
        Ok(integrate(&seg, lift(x[1]), t + x[0], t, opts, &Watch::Reverse)?.0 - w)
    };
    let full = |x: Vector2<f64>| -> Result<Complex64> {
        let p = candidate(x[0], x[1]);
        Ok(reverse_point(&p, t + x[0], lift(x[1]), opts)? - target)
    };

    let r = w.norm().clamp(1e-6, 1.0 - 1e-9);
    let mut x = Vector2::new(((1.0 + r) * (1.0 + r) / (4.0 * r)).ln(), (w / path.gamma(k)).arg());
    x = newton(&one_step, x, 1e-2 * tol)?;
    if full(x)?.norm() > tol {
        x = newton(&full, x, tol)?;
    }
    let next = match vel {
        Some(v) => step_domain(&state.domain, &v, x[0])?,
        None => state.domain.clone(),
    };
    path.push(t + x[0], theta + x[1], next, Some(field));
    Ok(())
}

fn newton(f: &dyn Fn(Vector2<f64>) -> Result<Complex64>, mut x: Vector2<f64>, tol: f64) -> Result<Vector2<f64>> {
    let no = |reason: &str| Error::NoConvergence {
        vertex: 0,
        reason: reason.into(),
    };
    let mut r = f(x)?;
    for _ in 0..NEWTON_ITERS {
        if r.norm() <= tol {
            return Ok(x);
        }
        let ht = 1e-7 * x[0].abs().max(1e-6);
        let hth = 1e-7;
        let dt = (f(x + Vector2::new(ht, 0.0))? - r) / ht;
        let dth = (f(x + Vector2::new(0.0, hth))? - r) / hth;
        let j = Matrix2::new(dt.re, dth.re, dt.im, dth.im);
        let step = j
            .lu()
            .solve(&Vector2::new(-r.re, -r.im))
            .ok_or_else(|| no("singular Jacobian"))?;
        // Damped update keeping the time increment positive.
        let mut lam = 1.0;
        loop {
            let trial = x + lam * step;
            if trial[0] > 0.0 {
                if let Ok(rt) = f(trial) {
                    if rt.norm() < r.norm() || lam < 1e-3 {
                        x = trial;
                        r = rt;
                        break;
                    }
                }
            }
            lam *= 0.5;
            if lam < 1e-6 {
                return Err(no("line search failed"));
            }
        }
    }
    if r.norm() <= tol {
        Ok(x)
    } else {
        Err(no(&format!("residual {:.3e} after {NEWTON_ITERS} iterations", r.norm())))
    }
}
