//! Green function, harmonic measures, period matrix and the Loewner kernel.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::solver::{LayerSolver, PotentialSolution};
use crate::error::{Error, Result};

/// Singular part of an [`AnalyticKernel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Singular {
    None,
    /// `(gamma + w) / (gamma - w)` for a point `gamma` of the unit circle.
    Poisson(Complex64),
    /// `log(1 - conj(p) w) - log(w - p)`.
    Green(Complex64),
}

impl Singular {
    pub fn eval(&self, w: Complex64) -> Complex64 {
        match *self {
            Singular::None => Complex64::new(0.0, 0.0),
            Singular::Poisson(g) => (g + w) / (g - w),
            Singular::Green(p) => (1.0 - p.conj() * w).ln() - (w - p).ln(),
        }
    }

    pub fn derivative(&self, w: Complex64) -> Complex64 {
        match *self {
            Singular::None => Complex64::new(0.0, 0.0),
            Singular::Poisson(g) => 2.0 * g / ((g - w) * (g - w)),
            Singular::Green(p) => -p.conj() / (1.0 - p.conj() * w) - 1.0 / (w - p),
        }
    }
}

/// Singular part plus a solved corrector, with `Im(value at 0) = 0`.
#[derive(Debug, Clone)]
pub struct AnalyticKernel {
    pub singular: Singular,
    pub corrector: PotentialSolution,
    pub shift: f64,
}

impl AnalyticKernel {
    pub fn new(singular: Singular, corrector: PotentialSolution) -> Self {
        let at0 = match singular {
            Singular::Green(p) if p.norm() == 0.0 => Complex64::new(0.0, 0.0),
            s => s.eval(Complex64::new(0.0, 0.0)),
        };
        let shift = at0.im + corrector.complete(Complex64::new(0.0, 0.0)).im;
        AnalyticKernel {
            singular,
            corrector,
            shift,
        }
    }

    pub fn value(&self, w: Complex64) -> Complex64 {
        self.singular.eval(w) + self.regular(w)
    }

    /// Corrector part only (normalized).
    pub fn regular(&self, w: Complex64) -> Complex64 {
        self.corrector.complete(w) - Complex64::new(0.0, self.shift)
    }

    pub fn real(&self, w: Complex64) -> f64 {
        self.value(w).re
    }

    pub fn derivative(&self, w: Complex64) -> Complex64 {
        self.singular.derivative(w) + self.corrector.derivative(w)
    }

    /// Periods of the imaginary part around each slit (counterclockwise loops).
    pub fn periods(&self) -> Vec<f64> {
        self.corrector.periods()
    }
}

fn check_gamma(solver: &LayerSolver, gamma: Complex64) -> Result<()> {
    if !gamma.norm().is_finite() || (gamma.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::GammaOnSlit(format!("{gamma}")));
    }
    let _ = solver;
    Ok(())
}

/// Harmonic measures of the slits and of the unit circle.
#[derive(Debug, Clone)]
pub struct HarmonicMeasures {
    pub slits: Vec<PotentialSolution>,
    pub circle: PotentialSolution,
}

impl HarmonicMeasures {
    pub fn len(&self) -> usize {
        self.slits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slits.is_empty()
    }

    pub fn values(&self, w: Complex64) -> Vec<f64> {
        self.slits.iter().map(|s| s.value(w)).collect()
    }
}

impl LayerSolver {
    /// Green function with pole `pole`; the real part of the returned kernel is `G(., pole)`.
    pub fn green(&self, pole: Complex64) -> Result<AnalyticKernel> {
        let d = self.domain().distance_to_boundary(pole);
        if !(d >= 1e-3) || pole.norm() >= 1.0 {
            return Err(Error::PoleTooCloseToBoundary(format!("{pole}")));
        }
        let sing = Singular::Green(pole);
        let corr = self.solve(&|_, w| -sing.eval(w).re, "green")?;
        Ok(AnalyticKernel::new(sing, corr))
    }

    pub fn harmonic_measures(&self) -> Result<HarmonicMeasures> {
        let n = self.domain().slit_count();
        let slits = (0..n)
            .map(|j| {
                self.solve(&move |k, _| if k == j { 1.0 } else { 0.0 }, &format!("omega_{}", j + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut circle = PotentialSolution::combine(
            &slits.iter().map(|s| (-1.0, s)).collect::<Vec<_>>(),
            "omega_circle",
        );
        circle = PotentialSolution::new(
            self.domain().clone(),
            vec![Complex64::new(1.0, 0.0)],
            if n == 0 { Vec::new() } else { circle.densities().to_vec() },
            circle.residual(),
            "omega_circle",
        );
        Ok(HarmonicMeasures { slits, circle })
    }

    /// The Komatu-Loewner kernel at the boundary point `gamma`.
    pub fn loewner_kernel(&self, gamma: Complex64) -> Result<AnalyticKernel> {
        check_gamma(self, gamma)?;
        let sing = Singular::Poisson(gamma);
        let corr = self.solve(&|_, w| -sing.eval(w).re, "loewner")?;
        Ok(AnalyticKernel::new(sing, corr))
    }
}

/// Period matrix `p_jk`: flux of `omega_j` into slit `k`.
pub fn period_matrix(measures: &HarmonicMeasures) -> DMatrix<f64> {
    let n = measures.len();
    DMatrix::from_fn(n, n, |j, k| -TAU * measures.slits[j].masses()[k])
}

/// Regular part of the Loewner kernel at `gamma` itself.
pub fn regularized_l(kernel: &AnalyticKernel) -> Complex64 {
    match kernel.singular {
        Singular::Poisson(g) => kernel.regular(g),
        _ => Complex64::new(0.0, 0.0),
    }
}

/// `R_j(w) = omega_j + i (conjugate)`, normalized by `Im R_j(0) = 0`.
pub fn r_vector(measures: &HarmonicMeasures, w: Complex64) -> Vec<Complex64> {
    measures
        .slits
        .iter()
        .map(|s| s.complete(w) - Complex64::new(0.0, s.complete(Complex64::new(0.0, 0.0)).im))
        .collect()
}

/// Inner normal derivatives `d omega_j / d nu` at the circle point `gamma`.
pub fn omega_normal_at(measures: &HarmonicMeasures, gamma: Complex64) -> Vec<f64> {
    measures
        .slits
        .iter()
        .map(|s| -(gamma * s.derivative(gamma)).re)
        .collect()
}

/// `lambda_j = -ln m_j`, the values of `-ln|u|` on the slits.
pub fn log_radii(measures: &HarmonicMeasures) -> Vec<f64> {
    measures.circle.domain().slits().iter().map(|s| -s.m.ln()).collect()
}
