//! Finite-volume Laplace oracle on a polar grid.
//!
//! Rings are uniform in radius except that the ring nearest to each slit
//! radius is moved onto it; slit nodes are Dirichlet nodes imposed through a
//! capacitance system solved by conjugate gradients, with the slit-free
//! operator inverted by FFT in angle and tridiagonal solves in radius.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::geometry::CircularSlitDisk;

const CG_TOL: f64 = 1e-11;
const CG_MAX_ITERS: usize = 5000;

#[derive(Debug, Clone)]
pub struct PolarGrid {
    /// `radii[0] = 0`, `radii[n] = 1`.
    pub radii: Vec<f64>,
    pub n_angles: usize,
    /// Ring index of each slit.
    pub slit_rings: Vec<usize>,
}

impl PolarGrid {
    pub fn new(domain: &CircularSlitDisk, h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 1e-2) {
            return Err(Error::GridTooCoarse(h));
        }
        Self::build(domain, h)
    }

    fn build(domain: &CircularSlitDisk, h: f64) -> Result<Self> {
        let n = (1.0 / h).round() as usize;
        let mut radii: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let mut slit_rings = Vec::new();
        for s in domain.slits() {
            let i = (s.m * n as f64).round() as usize;
            if i == 0 || i >= n || slit_rings.contains(&i) {
                return Err(Error::Precondition(format!("slit radius {} cannot be resolved at h = {h}", s.m)));
            }
            radii[i] = s.m;
            slit_rings.push(i);
        }
        let n_angles = ((TAU / h) / 8.0).ceil() as usize * 8;
        Ok(PolarGrid {
            radii,
            n_angles,
            slit_rings,
        })
    }

    pub fn rings(&self) -> usize {
        self.radii.len() - 1
    }

    pub fn dtheta(&self) -> f64 {
        TAU / self.n_angles as f64
    }

    pub fn angle(&self, k: usize) -> f64 {
        k as f64 * self.dtheta()
    }
}

/// Slit-free operator: rows are area-weighted, so the matrix is symmetric.
struct FastPolar {
    grid: PolarGrid,
    /// Coupling between rings `i` and `i + 1`; `radial[0]` couples the centre.
    radial: Vec<f64>,
    angular: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl FastPolar {
    fn new(grid: PolarGrid) -> Self {
        let n = grid.rings();
        let dth = grid.dtheta();
        let r = &grid.radii;
        let mut radial = vec![0.0; n];
        radial[0] = dth / 2.0;
        for i in 1..n {
            radial[i] = 0.5 * (r[i] + r[i + 1]) * dth / (r[i + 1] - r[i]);
        }
        let mut angular = vec![0.0; n];
        for i in 1..n {
            angular[i] = 0.5 * (r[i + 1] - r[i - 1]) / (r[i] * dth);
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(grid.n_angles);
        let ifft = planner.plan_fft_inverse(grid.n_angles);
        FastPolar {
            grid,
            radial,
            angular,
            fft,
            ifft,
        }
    }

    /// Solve `L u = b` with zero values on the outer ring. Layout: entry 0 is
    /// the centre, then rings `1..n` with `n_angles` entries each.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.grid.rings();
        let m = self.grid.n_angles;
        let mut hat = vec![Complex64::new(0.0, 0.0); (n - 1) * m];
        for i in 1..n {
            let row = &mut hat[(i - 1) * m..i * m];
            for (k, v) in row.iter_mut().enumerate() {
                *v = Complex64::new(b[1 + (i - 1) * m + k], 0.0);
            }
            self.fft.process(row);
        }
        let mut u_center = 0.0;
        let mut diag = vec![0.0; n];
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        for q in 0..m {
            let s = 2.0 - 2.0 * (TAU * q as f64 / m as f64).cos();
            // Unknowns: index 0 is the centre (mode 0 only), 1..n the rings.
            for i in 1..n {
                diag[i] = -self.radial[i] - self.radial[i - 1] - self.angular[i] * s;
                rhs[i] = hat[(i - 1) * m + q];
            }
            let start = if q == 0 {
                diag[0] = -self.radial[0];
                rhs[0] = Complex64::new(b[0], 0.0);
                0
            } else {
                1
            };
            thomas(&self.radial, &mut diag, &mut rhs, start);
            if q == 0 {
                u_center = rhs[0].re / m as f64;
            }
            for i in 1..n {
                hat[(i - 1) * m + q] = rhs[i];
            }
        }
        let mut u = vec![0.0; b.len()];
        u[0] = u_center;
        for i in 1..n {
            let row = &mut hat[(i - 1) * m..i * m];
            self.ifft.process(row);
            for (k, v) in row.iter().enumerate() {
                u[1 + (i - 1) * m + k] = v.re / m as f64;
            }
        }
        u
    }
}

/// Symmetric tridiagonal solve on `start..diag.len()` with off-diagonals `off[i]`
/// between `i` and `i + 1`. The solution overwrites `rhs`.
fn thomas(off: &[f64], diag: &mut [f64], rhs: &mut [Complex64], start: usize) {
    let n = diag.len();
    for i in start + 1..n {
        let w = off[i - 1] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] = rhs[i] - rhs[i - 1] * w;
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (start..n - 1).rev() {
        rhs[i] = (rhs[i] - rhs[i + 1] * off[i]) / diag[i];
    }
}

/// Grid function solving a Dirichlet problem, with bilinear interpolation.
#[derive(Debug, Clone)]
pub struct FdSolution {
    pub grid: PolarGrid,
    /// Centre, then rings `1..=n` (the last ring holds the circle data).
    pub values: Vec<f64>,
    pub cg_iterations: usize,
}

impl FdSolution {
    fn at(&self, i: usize, k: usize) -> f64 {
        if i == 0 {
            self.values[0]
        } else {
            let m = self.grid.n_angles;
            self.values[1 + (i - 1) * m + k % m]
        }
    }

    pub fn value(&self, w: Complex64) -> f64 {
        let r = w.norm().min(1.0);
        let radii = &self.grid.radii;
        let i = radii.partition_point(|&x| x <= r).clamp(1, radii.len() - 1) - 1;
        let t = (r - radii[i]) / (radii[i + 1] - radii[i]);
        let a = w.arg().rem_euclid(TAU) / self.grid.dtheta();
        let k = a.floor() as usize;
        let s = a - k as f64;
        let ring = |i: usize| (1.0 - s) * self.at(i, k) + s * self.at(i, k + 1);
        (1.0 - t) * ring(i) + t * ring(i + 1)
    }

    /// Inner normal derivative on the unit circle by a second order one-sided difference.
    pub fn inner_normal_derivative(&self, theta: f64) -> f64 {
        let n = self.grid.rings();
        let r = &self.grid.radii;
        let (h1, h2) = (r[n] - r[n - 1], r[n] - r[n - 2]);
        let f = |i: usize| self.value(Complex64::from_polar(r[i], theta));
        // Quadratic through the last three rings, differentiated at r = 1.
        let (u0, u1, u2) = (f(n), f(n - 1), f(n - 2));
        let d1 = (u0 - u1) / h1;
        let d2 = (u1 - u2) / (h2 - h1);
        let slope = d1 + (d1 - d2) * h1 / h2;
        -slope
    }
}

/// Solve the Laplace equation with data `circle(theta)` on the unit circle and
/// `slit(j, w)` on slit `j`.
pub fn fd_dirichlet(
    domain: &CircularSlitDisk,
    grid_h: f64,
    circle: &dyn Fn(f64) -> f64,
    slit: &dyn Fn(usize, Complex64) -> f64,
) -> Result<FdSolution> {
    let grid = PolarGrid::new(domain, grid_h)?;
    let n = grid.rings();
    let m = grid.n_angles;
    let op = FastPolar::new(grid.clone());
    let len = 1 + (n - 1) * m;
    let index = |i: usize, k: usize| 1 + (i - 1) * m + k;

    let mut b = vec![0.0; len];
    for k in 0..m {
        b[index(n - 1, k)] -= op.radial[n - 1] * circle(grid.angle(k));
    }
    let mut nodes = Vec::new();
    let mut targets = Vec::new();
    for (j, (&i, s)) in grid.slit_rings.iter().zip(domain.slits()).enumerate() {
        for k in 0..m {
            let th = grid.angle(k);
            if s.contains_angle(th) {
                nodes.push(index(i, k));
                targets.push(slit(j, Complex64::from_polar(s.m, th)));
            }
        }
    }
    let base = op.solve(&b);
    let mut cg_iterations = 0;
    let mut u = base.clone();
    if !nodes.is_empty() {
        // Capacitance system -C sigma = -(g - u_base) with C = P L^{-1} P^T negative definite.
        let apply = |sigma: &[f64]| -> Vec<f64> {
            let mut rhs = vec![0.0; len];
            for (&p, &s) in nodes.iter().zip(sigma) {
                rhs[p] = s;
            }
            let x = op.solve(&rhs);
            nodes.iter().map(|&p| -x[p]).collect()
        };
        let rhs: Vec<f64> = nodes.iter().zip(&targets).map(|(&p, g)| base[p] - g).collect();
        let (sigma, iters) = conjugate_gradient(&apply, &rhs)?;
        cg_iterations = iters;
        for (&p, &s) in nodes.iter().zip(&sigma) {
            b[p] += s;
        }
        u = op.solve(&b);
    }
    let mut values = u;
    values.extend((0..m).map(|k| circle(grid.angle(k))));
    Ok(FdSolution {
        grid,
        values,
        cg_iterations,
    })
}

fn conjugate_gradient(apply: &dyn Fn(&[f64]) -> Vec<f64>, b: &[f64]) -> Result<(Vec<f64>, usize)> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let stop = CG_TOL * CG_TOL * rr.max(f64::MIN_POSITIVE);
    for it in 0..CG_MAX_ITERS {
        if rr <= stop {
            return Ok((x, it));
        }
        let ap = apply(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::Precondition("capacitance iteration did not converge".into()))
}

/// Green's function with pole `pole`: `-ln|w - pole|` plus a grid harmonic part.
#[derive(Debug, Clone)]
pub struct FdGreen {
    pub pole: Complex64,
    pub harmonic: FdSolution,
}

impl FdGreen {
    pub fn value(&self, w: Complex64) -> f64 {
        -(w - self.pole).norm().ln() + self.harmonic.value(w)
    }
}

/// Finite-volume Green's function of the domain.
pub fn fd_green_oracle(domain: &CircularSlitDisk, pole: Complex64, grid_h: f64) -> Result<FdGreen> {
    if pole.norm() >= 1.0 - 2.0 * grid_h || domain.distance_to_slits(pole) < 2.0 * grid_h {
        return Err(Error::Precondition(format!("pole within two cells of the boundary at h = {grid_h}")));
    }
    let log = |w: Complex64| (w - pole).norm().ln();
    let harmonic = fd_dirichlet(
        domain,
        grid_h,
        &|th| log(Complex64::from_polar(1.0, th)),
        &|_, w| log(w),
    )?;
    Ok(FdGreen { pole, harmonic })
}

/// Finite-volume harmonic measures of the slits.
pub fn fd_harmonic_measures(domain: &CircularSlitDisk, grid_h: f64) -> Result<Vec<FdSolution>> {
    (0..domain.slit_count())
        .map(|j| fd_dirichlet(domain, grid_h, &|_| 0.0, &|k, _| if k == j { 1.0 } else { 0.0 }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_domain;

    #[test]
    fn disk_green_matches_closed_form_with_second_order() {
        let d = CircularSlitDisk::disk();
        let p = Complex64::new(0.3, 0.0);
        let exact = |w: Complex64| -((w - p) / (1.0 - p.conj() * w)).norm().ln();
        let probes = [Complex64::new(-0.4, 0.2), Complex64::new(0.1, -0.55), Complex64::new(0.62, 0.31)];
        let err = |h: f64| {
            let g = fd_green_oracle(&d, p, h).unwrap();
            probes.iter().map(|&w| (g.value(w) - exact(w)).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(1.0 / 100.0), err(1.0 / 200.0));
        assert!(e2 < 5e-3);
        assert!((e1 / e2).log2() >= 1.8, "{e1} {e2}");
    }

    #[test]
    fn fast_solver_inverts_the_operator() {
        let d = CircularSlitDisk::disk();
        let grid = PolarGrid::build(&d, 1.0 / 40.0).unwrap();
        let op = FastPolar::new(grid);
        let n = op.grid.rings();
        let m = op.grid.n_angles;
        let u: Vec<f64> = (0..1 + (n - 1) * m).map(|i| ((i * 7919) % 101) as f64 / 101.0).collect();
        // Apply L directly.
        let at = |i: usize, k: usize| if i == 0 { u[0] } else if i == n { 0.0 } else { u[1 + (i - 1) * m + k % m] };
        let mut b = vec![0.0; u.len()];
        b[0] = (0..m).map(|k| op.radial[0] * (at(1, k) - u[0])).sum();
        for i in 1..n {
            for k in 0..m {
                let c = at(i, k);
                b[1 + (i - 1) * m + k] = op.radial[i] * (at(i + 1, k) - c)
                    + op.radial[i - 1] * (if i == 1 { u[0] } else { at(i - 1, k) } - c)
                    + op.angular[i] * (at(i, k + 1) - 2.0 * c + at(i, k + m - 1));
            }
        }
        let back = op.solve(&b);
        let err = back.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn slit_nodes_hold_their_data() {
        let d = make_domain(&[(0.5, 0.0, std::f64::consts::FRAC_PI_2)]).unwrap();
        let w = fd_harmonic_measures(&d, 1.0 / 100.0).unwrap();
        assert!((w[0].value(Complex64::from_polar(0.5, 0.7)) - 1.0).abs() < 1e-9);
        let c = w[0].value(Complex64::new(0.0, 0.0));
        assert!(c > 0.0 && c < 1.0);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let d = CircularSlitDisk::disk();
        assert!(matches!(
            fd_green_oracle(&d, Complex64::new(0.1, 0.0), 0.05),
            Err(Error::GridTooCoarse(_))
        ));
    }
}
