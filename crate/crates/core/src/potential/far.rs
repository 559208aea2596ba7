//! Multipole form of the slit layers, for fast evaluation away from the slits.
//!
//! Each slit is cut into pieces of equal length in the Chebyshev angle
//! `s = cos t`. A piece carries a local multipole series about an arc point,
//! valid outside twice its radius; the pieces' logarithms are telescoped so
//! that their cuts lie on chords next to the slit, and the remaining total
//! mass uses the layer's own branch. The image part `-log(1 - conj(zeta) w)`
//! is a Taylor series about 0. An additive constant is fitted against direct
//! evaluation and cross-checked at further reference points.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::arc::ArcLayer;
use super::solver::PotentialSolution;

/// Terms per piece; pieces are used at distance at least twice their radius.
const PIECE_TERMS: usize = 48;
const MAX_PIECES: usize = 64;
const MAX_IMAGE_TERMS: usize = 800;
/// Largest piece radius, also bounded by a fraction of the gap to the circle.
const PIECE_RADIUS: f64 = 0.06;
const CHECK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Piece {
    centre: Complex64,
    radius: f64,
    /// Coefficients of `(w - centre)^{-j}`, `j = 1..`.
    coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone)]
struct SlitExpansion {
    pieces: Vec<Piece>,
    /// Mass of pieces `r..`, for the telescoped logarithms (index 0 is the total).
    tails: Vec<f64>,
    /// Taylor coefficients of the image part, constant term first.
    image: Vec<Complex64>,
    offset: Complex64,
}

/// Expansions for every slit of one solution; slits where the expansion is
/// not set up are evaluated directly.
#[derive(Debug, Clone)]
pub struct FarField {
    slits: Vec<Option<SlitExpansion>>,
}

impl FarField {
    pub fn new(sol: &PotentialSolution) -> Self {
        let slits = (0..sol.domain().slit_count())
            .map(|k| SlitExpansion::build(sol, k))
            .collect();
        FarField { slits }
    }

    /// Number of slits with an expansion.
    pub fn expanded(&self) -> usize {
        self.slits.iter().filter(|s| s.is_some()).count()
    }

    /// Value of layer `k` at `w`, or `None` when `w` is too close to the slit.
    pub(crate) fn layer_value(&self, k: usize, layer: &ArcLayer, w: Complex64) -> Option<Complex64> {
        self.slits[k].as_ref()?.eval(layer, w)
    }
}

/// Density `sum a_n T_n(s)` by Clenshaw's recurrence.
fn density(coeffs: &[f64], s: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for a in coeffs.iter().skip(1).rev() {
        (b1, b2) = (2.0 * s * b1 - b2 + a, b1);
    }
    s * b1 - b2 + coeffs.first().copied().unwrap_or(0.0)
}

fn arc_point(layer: &ArcLayer, s: f64) -> Complex64 {
    Complex64::from_polar(layer.m, layer.phi_c + layer.alpha * s)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

impl SlitExpansion {
    fn build(sol: &PotentialSolution, k: usize) -> Option<Self> {
        let layer = sol.layer(k);
        let coeffs = &sol.densities()[k];
        let (m, alpha) = (layer.m, layer.alpha);
        let target = PIECE_RADIUS.min(0.3 * (1.0 - m));
        let n_pieces = ((m * alpha * PI / (2.0 * target)).ceil() as usize).max(2);
        let n_image = ((1e-16f64).ln() / (1.001 * m).ln()).ceil() as usize + 1;
        if n_pieces > MAX_PIECES || n_image > MAX_IMAGE_TERMS {
            return None;
        }

        let n_gl = 40 + 2 * coeffs.len() / n_pieces;
        let rule = gauss_legendre(n_gl);
        let mut pieces = Vec::with_capacity(n_pieces);
        let mut masses = Vec::with_capacity(n_pieces);
        for p in 0..n_pieces {
            let (ta, tb) = (PI * p as f64 / n_pieces as f64, PI * (p + 1) as f64 / n_pieces as f64);
            let centre = arc_point(layer, (0.5 * (ta + tb)).cos());
            let radius = (arc_point(layer, ta.cos()) - centre)
                .norm()
                .max((arc_point(layer, tb.cos()) - centre).norm());
            let mut sums = vec![Complex64::new(0.0, 0.0); PIECE_TERMS];
            let mut mass = 0.0;
            for &(x, wt) in &rule {
                let t = ta + 0.5 * (tb - ta) * (x + 1.0);
                let f = density(coeffs, t.cos()) * wt * 0.5 * (tb - ta);
                mass += f;
                let d = arc_point(layer, t.cos()) - centre;
                let mut pw = Complex64::new(f, 0.0);
                for s in sums.iter_mut() {
                    pw *= d;
                    *s += pw;
                }
            }
            let coeffs = sums
                .into_iter()
                .enumerate()
                .map(|(j, s)| -s / (j + 1) as f64)
                .collect();
            pieces.push(Piece { centre, radius, coeffs });
            masses.push(mass);
        }
        if pieces.iter().any(|p| p.centre.norm() + 2.0 * p.radius >= 1.0) {
            return None;
        }
        let mut tails = masses.clone();
        for r in (0..n_pieces - 1).rev() {
            tails[r] += tails[r + 1];
        }

        // -log(1 - conj(zeta) w) = sum_j (conj(zeta) w)^j / j, integrated by the
        // midpoint rule in t, exact for the trigonometric degree involved.
        let n_mid = 2 * (coeffs.len() + (n_image as f64 * alpha) as usize) + 64;
        let mut image = vec![Complex64::new(0.0, 0.0); n_image];
        for i in 0..n_mid {
            let t = PI * (i as f64 + 0.5) / n_mid as f64;
            let f = density(coeffs, t.cos()) * PI / n_mid as f64;
            let zc = arc_point(layer, t.cos()).conj();
            let mut pw = Complex64::new(f, 0.0);
            for c in image.iter_mut().skip(1) {
                pw *= zc;
                *c += pw;
            }
        }
        for (j, c) in image.iter_mut().enumerate().skip(1) {
            *c /= j as f64;
        }

        let mut exp = SlitExpansion {
            pieces,
            tails,
            image,
            offset: Complex64::new(0.0, 0.0),
        };
        let phi = layer.phi_c;
        let refs: Vec<Complex64> = [0.0, 0.5 * m, 0.5 * (1.0 + m)]
            .iter()
            .flat_map(|&r| [PI, 0.5 * PI, -0.5 * PI, 0.0].map(|a| Complex64::from_polar(r, phi + a)))
            .filter(|&w| exp.covers(w))
            .collect();
        if refs.len() < 3 {
            return None;
        }
        exp.offset = sol.layer_value(k, refs[0]) - exp.raw(layer, refs[0]);
        for &w in &refs[1..] {
            let direct = sol.layer_value(k, w);
            if (exp.raw(layer, w) + exp.offset - direct).norm() > CHECK_TOL * direct.norm().max(1.0) {
                return None;
            }
        }
        Some(exp)
    }

    fn covers(&self, w: Complex64) -> bool {
        self.pieces.iter().all(|p| (w - p.centre).norm_sqr() > 4.0 * p.radius * p.radius)
    }

    fn raw(&self, layer: &ArcLayer, w: Complex64) -> Complex64 {
        let first = self.pieces[0].centre;
        let mut v = self.tails[0] * Complex64::new((w - first).norm().ln(), layer.branch_arg(w, first));
        for r in 1..self.pieces.len() {
            let ratio = (w - self.pieces[r].centre) / (w - self.pieces[r - 1].centre);
            v += self.tails[r] * ratio.ln();
        }
        for p in &self.pieces {
            let t = 1.0 / (w - p.centre);
            let q = p.radius * t.norm();
            let n = ((-37.0 / q.ln()).ceil() as usize).min(p.coeffs.len());
            let mut s = Complex64::new(0.0, 0.0);
            for c in p.coeffs[..n].iter().rev() {
                s = (s + c) * t;
            }
            v += s;
        }
        let mut s = Complex64::new(0.0, 0.0);
        for c in self.image.iter().rev() {
            s = s * w + c;
        }
        v + s
    }

    fn eval(&self, layer: &ArcLayer, w: Complex64) -> Option<Complex64> {
        self.covers(w).then(|| self.raw(layer, w) + self.offset)
    }
}
