//! Single-layer log potentials on one circular arc.
//!
//! The arc is `zeta(s) = m e^{i(phi_c + alpha s)}`, `s` in `[-1, 1]`, carrying
//! the density `rho(s) / sqrt(1 - s^2)` with `rho = sum a_n T_n`. The kernel is
//! the disk Green kernel `log(w - zeta) - log(1 - conj(zeta) w)`, whose real
//! part vanishes on the unit circle.
//!
//! Close to the arc the logarithmic singularity is integrated in closed form
//! in the variable `x` defined by `w = m e^{i(phi_c + alpha x)}`; the remaining
//! smooth part goes through Gauss-Chebyshev quadrature.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::geometry::Slit;

/// Below this Bernstein-ellipse parameter the near-field formulas are used.
const NEAR_Z: f64 = 1.4;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Gauss-Chebyshev rule for `int f(s) / sqrt(1 - s^2) ds`.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub angles: Vec<f64>,
    pub weight: f64,
}

impl Quadrature {
    pub fn new(q: usize) -> Self {
        let angles: Vec<f64> = (1..=q)
            .map(|i| (2 * i - 1) as f64 * PI / (2 * q) as f64)
            .collect();
        Quadrature {
            nodes: angles.iter().map(|t| t.cos()).collect(),
            angles,
            weight: PI / q as f64,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Row-major `T_n(s_q)` for `n < count`.
    pub fn chebyshev_table(&self, count: usize) -> Vec<f64> {
        let mut t = Vec::with_capacity(self.len() * count);
        for &a in &self.angles {
            t.extend((0..count).map(|n| (n as f64 * a).cos()));
        }
        t
    }

    /// Values of `sum a_n T_n` at the nodes.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        self.angles
            .iter()
            .map(|&a| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(n, c)| c * (n as f64 * a).cos())
                    .sum()
            })
            .collect()
    }
}

/// `int T_n(s) log(x - s) / sqrt(1 - s^2) ds` for `n < count` (principal log).
pub fn log_moments(x: Complex64, count: usize) -> Vec<Complex64> {
    let s = (x - 1.0).sqrt() * (x + 1.0).sqrt();
    let z = x + s;
    let zinv = 1.0 / z;
    let mut out = Vec::with_capacity(count);
    out.push(PI * (z * 0.5).ln());
    let mut p = zinv;
    for n in 1..count {
        out.push(-PI / n as f64 * p);
        p *= zinv;
    }
    out
}

/// Derivatives in `x` of [`log_moments`].
pub fn log_moment_derivatives(x: Complex64, count: usize) -> Vec<Complex64> {
    let s = (x - 1.0).sqrt() * (x + 1.0).sqrt();
    let z = x + s;
    let zinv = 1.0 / z;
    let mut out = Vec::with_capacity(count);
    let mut p = PI / s;
    for _ in 0..count {
        out.push(p);
        p *= zinv;
    }
    out
}

fn bernstein(x: Complex64) -> f64 {
    (x + (x - 1.0).sqrt() * (x + 1.0).sqrt()).norm()
}

/// `log E(y)` with `E(y) = (e^{iy} - 1) / (iy)`.
fn log_e(y: Complex64) -> Complex64 {
    let z = y * 0.5;
    let rest = if z.norm() < 0.1 {
        let z2 = z * z;
        -z2 * (1.0 / 6.0
            + z2 * (1.0 / 180.0 + z2 * (1.0 / 2835.0 + z2 * (1.0 / 37800.0 + z2 / 467775.0))))
    } else {
        (z.sin() / z).ln()
    };
    I * z + rest
}

/// `E'(y) / E(y)`.
fn dlog_e(y: Complex64) -> Complex64 {
    let z = y * 0.5;
    let d = if z.norm() < 0.1 {
        let z2 = z * z;
        -z * (1.0 / 3.0
            + z2 * (1.0 / 45.0 + z2 * (2.0 / 945.0 + z2 * (1.0 / 4725.0 + z2 * 2.0 / 93555.0))))
    } else {
        z.cos() / z.sin() - 1.0 / z
    };
    0.5 * (I + d)
}

/// Principal argument, with the negative real axis mapped to `+pi`.
fn arg_upper(z: Complex64) -> f64 {
    if z.im == 0.0 && z.re < 0.0 {
        PI
    } else {
        z.im.atan2(z.re)
    }
}

fn turn(p: Complex64, wp: Complex64, w: Complex64, q: Complex64, inside: bool) -> f64 {
    let c = ((q - p).conj() * wp).im;
    let re = ((w - q) * wp.conj()).re;
    let t = c.atan2(re);
    if inside && c.is_sign_negative() {
        t + TAU
    } else {
        t
    }
}

/// Geometry of one slit together with its quadrature points.
#[derive(Debug, Clone)]
pub struct ArcLayer {
    pub m: f64,
    pub phi_c: f64,
    pub alpha: f64,
    ln_m: f64,
    start_tip: Complex64,
    points: Vec<Complex64>,
    /// Near-field imaginary offsets, `arg(w - zeta_q) - arg(x - s_q) - Im log E`
    /// for `w` right of the cut.
    near_args: Vec<f64>,
    /// `conj(zeta_q)`.
    conj_points: Vec<Complex64>,
}

/// Location of an evaluation point relative to an arc.
struct Located {
    x: Option<Complex64>,
    x_img: Option<Complex64>,
}

impl ArcLayer {
    pub fn new(slit: &Slit, quad: &Quadrature) -> Self {
        let points: Vec<Complex64> = quad.nodes.iter().map(|&s| slit.point(s)).collect();
        let mut layer = ArcLayer {
            m: slit.m,
            phi_c: slit.center_angle(),
            alpha: slit.half_angle(),
            ln_m: slit.m.ln(),
            start_tip: slit.start_tip(),
            conj_points: points.iter().map(|z| z.conj()).collect(),
            points,
            near_args: Vec::new(),
        };
        // Calibrate the 2 pi offsets at a well conditioned point inside the slit circle.
        let x_ref = Complex64::new(0.0, 0.2);
        let w_ref = layer.m * (I * (layer.phi_c + layer.alpha * x_ref)).exp();
        let args: Vec<f64> = layer.branch_args(w_ref).collect();
        layer.near_args = quad
            .nodes
            .iter()
            .zip(args)
            .map(|(&s, arg)| {
                let smooth = layer.phi_c + layer.alpha * s + FRAC_PI_2;
                let local = arg_upper(x_ref - s) + log_e(layer.alpha * (x_ref - s)).im;
                smooth + TAU * ((arg - smooth - local) / TAU).round()
            })
            .collect();
        layer
    }

    fn locate(&self, w: Complex64) -> Located {
        let r = w.norm();
        if r == 0.0 {
            return Located {
                x: None,
                x_img: None,
            };
        }
        let mut psi = w.arg() - self.phi_c;
        psi -= TAU * (psi / TAU).round();
        let lr = r.ln();
        let re = psi / self.alpha;
        // Adding 0.0 turns -0.0 into +0.0 so points on the arc line take the inner side.
        let x = Complex64::new(re, -(lr - self.ln_m) / self.alpha + 0.0);
        let x_img = Complex64::new(re, -(lr + self.ln_m) / self.alpha + 0.0);
        Located {
            x: (bernstein(x) < NEAR_Z).then_some(x),
            x_img: (bernstein(x_img) < NEAR_Z).then_some(x_img),
        }
    }

    /// Continuous branch of `arg(w - zeta_q)`, cut along the outward radial
    /// ray from the start tip.
    fn branch_args(&self, w: Complex64) -> impl Iterator<Item = f64> + '_ {
        let p = self.start_tip;
        let wp = w - p;
        let base = arg_upper(wp / -p) + (self.phi_c - self.alpha + PI);
        let inside = w.norm() < self.m;
        self.points.iter().map(move |&q| base + turn(p, wp, w, q, inside))
    }

    /// `arg(w - q)` for a point `q` on the arc, on the same branch as the layer.
    pub(crate) fn branch_arg(&self, w: Complex64, q: Complex64) -> f64 {
        let p = self.start_tip;
        let wp = w - p;
        arg_upper(wp / -p) + (self.phi_c - self.alpha + PI) + turn(p, wp, w, q, w.norm() < self.m)
    }

    /// Real parts of the basis potentials with densities `T_n / sqrt(1 - s^2)`, `n < count`.
    pub fn basis_real(&self, w: Complex64, quad: &Quadrature, table: &[f64], count: usize) -> Vec<f64> {
        let loc = self.locate(w);
        let mut out = vec![0.0; count];
        let mut g = vec![0.0; quad.len()];
        match loc.x {
            Some(x) => {
                for (n, v) in log_moments(x, count).into_iter().enumerate() {
                    out[n] += v.re;
                }
                let c = (self.m * self.alpha).ln();
                for (q, &s) in quad.nodes.iter().enumerate() {
                    g[q] = c + log_e(self.alpha * (x - s)).re;
                }
            }
            None => {
                for (q, &z) in self.points.iter().enumerate() {
                    g[q] = (w - z).norm().ln();
                }
            }
        }
        match loc.x_img {
            Some(x) => {
                for (n, v) in log_moments(x, count).into_iter().enumerate() {
                    out[n] -= v.re;
                }
                let c = self.alpha.ln();
                for (q, &s) in quad.nodes.iter().enumerate() {
                    g[q] -= c + log_e(self.alpha * (x - s)).re;
                }
            }
            None => {
                for (q, &zc) in self.conj_points.iter().enumerate() {
                    g[q] -= (1.0 - zc * w).norm().ln();
                }
            }
        }
        for (q, gq) in g.iter().enumerate() {
            let row = &table[q * count..(q + 1) * count];
            let f = quad.weight * gq;
            for n in 0..count {
                out[n] += f * row[n];
            }
        }
        out
    }

    /// Analytic completion of the layer with coefficients `coeffs`.
    ///
    /// `rho` holds the density at the quadrature nodes. The imaginary part is
    /// the branch cut along the outward ray from the start tip.
    pub fn value(&self, w: Complex64, coeffs: &[f64], rho: &[f64], quad: &Quadrature) -> Complex64 {
        let loc = self.locate(w);
        let mut total = Complex64::new(0.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        match loc.x {
            Some(x) => {
                for (a, v) in coeffs.iter().zip(log_moments(x, coeffs.len())) {
                    total += a * v;
                }
                let c = (self.m * self.alpha).ln();
                // Left of the cut the principal arg(x - s) has wrapped by -2 pi.
                let wrap = if x.re < -1.0 && x.im < 0.0 { TAU } else { 0.0 };
                for ((&s, &r), &off) in quad.nodes.iter().zip(rho).zip(&self.near_args) {
                    let le = log_e(self.alpha * (x - s));
                    acc += r * Complex64::new(c + le.re, off + le.im + wrap);
                }
            }
            None => {
                for ((&z, &r), arg) in self.points.iter().zip(rho).zip(self.branch_args(w)) {
                    acc += r * Complex64::new((w - z).norm().ln(), arg);
                }
            }
        }
        match loc.x_img {
            Some(x) => {
                for (a, v) in coeffs.iter().zip(log_moments(x, coeffs.len())) {
                    total -= a * v;
                }
                let c = self.alpha.ln();
                for ((&s, &r), &zc) in quad.nodes.iter().zip(rho).zip(&self.conj_points) {
                    let h = Complex64::new(
                        c + log_e(self.alpha * (x - s)).re,
                        (1.0 - zc * w).arg() - arg_upper(x - s),
                    );
                    acc -= r * h;
                }
            }
            None => {
                for (&zc, &r) in self.conj_points.iter().zip(rho) {
                    acc -= r * (1.0 - zc * w).ln();
                }
            }
        }
        total + quad.weight * acc
    }

    /// Complex derivative of [`ArcLayer::value`].
    pub fn derivative(&self, w: Complex64, coeffs: &[f64], rho: &[f64], quad: &Quadrature) -> Complex64 {
        let loc = self.locate(w);
        let mut total = Complex64::new(0.0, 0.0);
        let dx = -I / (self.alpha * w);
        match loc.x {
            Some(x) => {
                let mut inner = Complex64::new(0.0, 0.0);
                for (a, v) in coeffs.iter().zip(log_moment_derivatives(x, coeffs.len())) {
                    inner += a * v;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for (&s, &r) in quad.nodes.iter().zip(rho) {
                    acc += r * dlog_e(self.alpha * (x - s));
                }
                total += dx * (inner + quad.weight * self.alpha * acc);
            }
            None => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&z, &r) in self.points.iter().zip(rho) {
                    acc += r / (w - z);
                }
                total += quad.weight * acc;
            }
        }
        match loc.x_img {
            Some(x) => {
                let mut inner = Complex64::new(0.0, 0.0);
                for (a, v) in coeffs.iter().zip(log_moment_derivatives(x, coeffs.len())) {
                    inner += a * v;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for (&s, &r) in quad.nodes.iter().zip(rho) {
                    acc += r * dlog_e(self.alpha * (x - s));
                }
                total -= dx * (inner + quad.weight * self.alpha * acc);
            }
            None => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&zc, &r) in self.conj_points.iter().zip(rho) {
                    acc += r * zc / (1.0 - zc * w);
                }
                total += quad.weight * acc;
            }
        }
        total
    }
}
