//! Moduli velocities: radii from the Schiffer variation, slit endpoints from
//! the boundary flow of the total field.

use std::f64::consts::{PI, TAU};
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{discretize, normalize_angle, CircularSlitDisk, ModuliState, Slit};
use crate::potential::{
    omega_normal_at, period_matrix, FarField, r_vector, regularized_l, AnalyticKernel, HarmonicMeasures,
    LayerSolver, PotentialSolution, Singular, SolverOptions,
};

/// Mesh and solver resolution for bundles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_circle: usize,
    pub n_slit: usize,
    pub solver: SolverOptions,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            n_circle: 256,
            n_slit: 64,
            solver: SolverOptions::default(),
        }
    }
}

/// Offsets (in arc parameter) beyond a tip used to cross-check tip values.
const TIP_OFFSETS: (f64, f64) = (0.005, 0.01);
const TIP_GAP: f64 = 1e-10;

/// The single-valued total field `V = K + sum_j R_j mu_j`.
#[derive(Debug, Clone)]
pub struct TotalField {
    kernel: AnalyticKernel,
    /// Built on first use by [`TotalField::regular`].
    far: OnceLock<FarField>,
}

impl TotalField {
    /// The field of the unit disk, `(gamma + w) / (gamma - w)`.
    pub fn disk(gamma: Complex64) -> Self {
        let corrector =
            PotentialSolution::new(CircularSlitDisk::disk(), Vec::new(), Vec::new(), 0.0, "disk");
        TotalField::new(AnalyticKernel::new(Singular::Poisson(gamma), corrector))
    }

    fn new(kernel: AnalyticKernel) -> Self {
        TotalField {
            kernel,
            far: OnceLock::new(),
        }
    }

    pub fn value(&self, w: Complex64) -> Complex64 {
        self.kernel.value(w)
    }

    /// `V` minus the disk term `(gamma + w) / (gamma - w)`; away from the
    /// slits the layers are summed as multipole series.
    pub fn regular(&self, w: Complex64) -> Complex64 {
        let corrector = &self.kernel.corrector;
        let far = self.far.get_or_init(|| FarField::new(corrector));
        corrector.complete_with(far, w) - Complex64::new(0.0, self.kernel.shift)
    }

    pub fn derivative(&self, w: Complex64) -> Complex64 {
        self.kernel.derivative(w)
    }

    pub fn gamma(&self) -> Complex64 {
        match self.kernel.singular {
            Singular::Poisson(g) => g,
            _ => unreachable!("total field has a Poisson singularity"),
        }
    }

    /// Combined layer potential of the regular part.
    pub fn corrector(&self) -> &PotentialSolution {
        &self.kernel.corrector
    }

    /// Periods of `Im V` around the slits; zero up to solver error.
    pub fn periods(&self) -> Vec<f64> {
        self.kernel.periods()
    }

    /// The bracket of the driving-angle drift, `l(gamma) + sum_j R_j(gamma) mu_j`.
    pub fn bracket(&self) -> Complex64 {
        self.kernel.regular(self.gamma())
    }
}

/// Every potential-theoretic object of one moduli state.
#[derive(Debug, Clone)]
pub struct PotentialBundle {
    pub state: ModuliState,
    pub state_hash: u64,
    pub solver: Arc<LayerSolver>,
    pub measures: HarmonicMeasures,
    pub period: DMatrix<f64>,
    pub kernel: AnalyticKernel,
    pub l: Complex64,
    pub omega_normal: Vec<f64>,
    pub mu: Vec<f64>,
    pub field: TotalField,
}

impl PotentialBundle {
    pub fn new(state: &ModuliState, res: &Resolution) -> Result<Self> {
        let mesh = discretize(&state.domain, res.n_circle, res.n_slit)?;
        let solver = Arc::new(LayerSolver::new(&mesh, res.solver)?);
        let gamma = state.gamma();
        let measures = solver.harmonic_measures()?;
        let period = period_matrix(&measures);
        let kernel = solver.loewner_kernel(gamma)?;
        let l = regularized_l(&kernel);
        let omega_normal = omega_normal_at(&measures, gamma);
        let mu = schiffer_mu(&period, &omega_normal)?;
        let mut terms = vec![(1.0, &kernel.corrector)];
        terms.extend(mu.iter().copied().zip(measures.slits.iter()));
        let corrector = PotentialSolution::combine(&terms, "total_field");
        let field = TotalField::new(AnalyticKernel::new(Singular::Poisson(gamma), corrector));
        Ok(PotentialBundle {
            state: state.clone(),
            state_hash: state.state_hash(),
            solver,
            measures,
            period,
            kernel,
            l,
            omega_normal,
            mu,
            field,
        })
    }

    pub fn r_vector(&self, w: Complex64) -> Vec<Complex64> {
        r_vector(&self.measures, w)
    }
}

fn schiffer_mu(period: &DMatrix<f64>, omega_normal: &[f64]) -> Result<Vec<f64>> {
    let n = omega_normal.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let rhs = DVector::from_column_slice(omega_normal) * (2.0 * PI);
    let sol = period
        .clone()
        .cholesky()
        .map(|c| c.solve(&rhs))
        .or_else(|| period.clone().lu().solve(&rhs))
        .ok_or(Error::SingularPeriodMatrix)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularPeriodMatrix);
    }
    Ok(sol.iter().copied().collect())
}

/// `d ln m_j / dt`.
pub fn radii_velocity(bundle: &PotentialBundle) -> Vec<f64> {
    bundle.mu.clone()
}

fn tip_point(m: f64, phi_c: f64, alpha: f64, x: f64) -> Complex64 {
    Complex64::from_polar(m, phi_c + alpha * x)
}

/// Angular velocities of the start tips and of the arc lengths.
pub fn endpoint_velocity(bundle: &PotentialBundle) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut dstart = Vec::new();
    let mut darc = Vec::new();
    let others: Vec<(usize, &Slit)> = bundle.state.domain.slits().iter().enumerate().collect();
    for (j, slit) in bundle.state.domain.slits().iter().enumerate() {
        let (m, c, a) = (slit.m, slit.center_angle(), slit.half_angle());
        let mut tip = [0.0; 2];
        for (k, sign) in [-1.0, 1.0].into_iter().enumerate() {
            let im = |d: f64| bundle.field.value(tip_point(m, c, a, sign * (1.0 + d))).im;
            let direct = im(TIP_GAP);
            // Shrink the offsets to the local length scale at the tip.
            let p = tip_point(m, c, a, sign);
            let near = others
                .iter()
                .filter(|(k, _)| *k != j)
                .map(|(_, o)| o.distance(p))
                .fold((p - bundle.state.gamma()).norm().min(1.0 - m), f64::min);
            let scale = (0.005 * near / (m * a) / TIP_OFFSETS.0).min(1.0);
            let extrap = 2.0 * im(scale * TIP_OFFSETS.0) - im(scale * TIP_OFFSETS.1);
            let gap = (extrap - direct).abs();
            if !direct.is_finite() || gap > 1e-3 * direct.abs().max(1.0) {
                return Err(Error::ExtrapolationDiverged { slit: j, gap });
            }
            tip[k] = direct;
        }
        dstart.push(tip[0]);
        darc.push(tip[1] - tip[0]);
    }
    Ok((dstart, darc))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuliVelocity {
    pub dlnm: Vec<f64>,
    pub dtheta_start: Vec<f64>,
    pub darc: Vec<f64>,
}

pub fn moduli_flow(state: &ModuliState, bundle: &PotentialBundle) -> Result<ModuliVelocity> {
    if state.state_hash() != bundle.state_hash {
        return Err(Error::Precondition("bundle does not match state".into()));
    }
    let (dtheta_start, darc) = endpoint_velocity(bundle)?;
    Ok(ModuliVelocity {
        dlnm: radii_velocity(bundle),
        dtheta_start,
        darc,
    })
}

/// Smallest admissible arc length and distance `1 - m` before a domain counts as degenerate.
pub const MIN_ARC: f64 = 1e-3;

/// Advance slit parameters with frozen velocities over `dt`.
///
/// Radii move as `m e^{mu dt}`, endpoints linearly. Errors with
/// [`Error::DegenerateDomain`] when an arc collapses or wraps, a radius leaves
/// `(0, 1)`, or two radii come closer than the separation threshold.
pub fn step_domain(domain: &CircularSlitDisk, vel: &ModuliVelocity, dt: f64) -> Result<CircularSlitDisk> {
    let slits: Vec<Slit> = domain
        .slits()
        .iter()
        .enumerate()
        .map(|(j, s)| Slit {
            m: s.m * (vel.dlnm[j] * dt).exp(),
            theta_start: normalize_angle(s.theta_start + vel.dtheta_start[j] * dt),
            arc_length: s.arc_length + vel.darc[j] * dt,
        })
        .collect();
    for (j, s) in slits.iter().enumerate() {
        if !(s.arc_length >= MIN_ARC && s.arc_length <= TAU - MIN_ARC) {
            return Err(Error::DegenerateDomain(format!(
                "slit {} arc length {:.3e}",
                j + 1,
                s.arc_length
            )));
        }
        if !(s.m > 0.0 && s.m < 1.0) {
            return Err(Error::DegenerateDomain(format!("slit {} radius {}", j + 1, s.m)));
        }
    }
    CircularSlitDisk::from_slits(slits).map_err(|e| Error::DegenerateDomain(e.to_string()))
}

/// Identity checks for one moduli state, as reported by the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub schema_version: u32,
    pub domain: CircularSlitDisk,
    pub gamma_angle: f64,
    pub omega_at_origin: Vec<f64>,
    pub period_matrix: Vec<Vec<f64>>,
    /// `2 pi P^{-1} omega(0)`, to be compared with `-ln m_j`.
    pub lambda: Vec<f64>,
    pub lambda_rel_error: f64,
    pub v_at_origin: (f64, f64),
    pub bracket: (f64, f64),
    pub mu: Vec<f64>,
    pub dtheta_start: Vec<f64>,
    pub darc: Vec<f64>,
    /// Largest relative deviation of `Re V` from `mu_j` along each slit.
    pub slit_re_deviation: Vec<f64>,
    pub max_residual: f64,
}

impl IdentityReport {
    pub fn compute(state: &ModuliState, res: &Resolution) -> Result<Self> {
        let b = PotentialBundle::new(state, res)?;
        let vel = moduli_flow(state, &b)?;
        let n = b.mu.len();
        let om = b.measures.values(Complex64::new(0.0, 0.0));
        let lambda: Vec<f64> = if n == 0 {
            Vec::new()
        } else {
            let x = b
                .period
                .clone()
                .lu()
                .solve(&DVector::from_column_slice(&om))
                .ok_or(Error::SingularPeriodMatrix)?;
            x.iter().map(|v| TAU * v).collect()
        };
        let slits = state.domain.slits();
        let lambda_rel_error = lambda
            .iter()
            .zip(slits)
            .map(|(l, s)| (l + s.m.ln()).abs() / s.m.ln().abs())
            .fold(0.0, f64::max);
        let slit_re_deviation = slits
            .iter()
            .zip(&b.mu)
            .map(|(s, mu)| {
                (0..=32)
                    .map(|i| (b.field.value(s.point(-0.9 + 1.8 * i as f64 / 32.0)).re - mu).abs() / mu.abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let mut max_residual = b.kernel.corrector.residual();
        for w in &b.measures.slits {
            max_residual = max_residual.max(w.residual());
        }
        let v0 = b.field.value(Complex64::new(0.0, 0.0));
        let br = b.field.bracket();
        Ok(IdentityReport {
            schema_version: crate::loewner::SCHEMA_VERSION,
            domain: state.domain.clone(),
            gamma_angle: state.gamma_angle,
            omega_at_origin: om,
            period_matrix: (0..n).map(|j| (0..n).map(|k| b.period[(j, k)]).collect()).collect(),
            lambda,
            lambda_rel_error,
            v_at_origin: (v0.re, v0.im),
            bracket: (br.re, br.im),
            mu: b.mu.clone(),
            dtheta_start: vel.dtheta_start,
            darc: vel.darc,
            slit_re_deviation,
            max_residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_domain;

    fn bundle(slits: &[(f64, f64, f64)], theta: f64) -> PotentialBundle {
        let state = ModuliState::new(0.0, theta, make_domain(slits).unwrap());
        PotentialBundle::new(&state, &Resolution::default()).unwrap()
    }

    #[test]
    fn disk_is_empty() {
        let b = bundle(&[], 0.3);
        let v = moduli_flow(&b.state, &b).unwrap();
        assert!(v.dlnm.is_empty() && v.dtheta_start.is_empty() && v.darc.is_empty());
        let w = Complex64::new(0.2, 0.1);
        let g = b.state.gamma();
        assert!((b.field.value(w) - (g + w) / (g - w)).norm() < 1e-15);
    }

    #[test]
    fn normalization_and_growth() {
        let b = bundle(&[(0.5, 0.0, PI / 2.0)], 0.0);
        assert!(b.mu[0] > 0.0);
        let v0 = b.field.value(Complex64::new(0.0, 0.0));
        assert!((v0 - 1.0).norm() < 1e-6, "{v0}");
        assert!(b.field.periods()[0].abs() < 1e-8);
    }

    #[test]
    fn real_part_on_slit_is_mu() {
        let b = bundle(&[(0.5, 0.0, PI / 2.0), (0.75, 2.5, 1.0)], 1.0);
        for (k, slit) in b.state.domain.slits().iter().enumerate() {
            for i in 0..=16 {
                let s = -0.8 + 0.1 * i as f64;
                let re = b.field.value(slit.point(s)).re;
                assert!((re - b.mu[k]).abs() < 1e-3 * b.mu[k].abs(), "{re} vs {}", b.mu[k]);
            }
        }
        assert!(b.field.bracket().re.abs() < 1e-10);
    }

    #[test]
    fn mirror_symmetric_tips() {
        let b = bundle(&[(0.5, -0.6, 1.2)], 0.0);
        let (ds, da) = endpoint_velocity(&b).unwrap();
        let end = ds[0] + da[0];
        assert!((ds[0] + end).abs() < 1e-4, "{} {}", ds[0], end);
    }

    #[test]
    fn identity_survives_a_flow_step() {
        let b = bundle(&[(0.5, 0.0, PI / 2.0)], 0.3);
        let v = moduli_flow(&b.state, &b).unwrap();
        let d = step_domain(&b.state.domain, &v, 1e-3).unwrap();
        let b2 = PotentialBundle::new(&ModuliState::new(1e-3, 0.3, d), &Resolution::default()).unwrap();
        let om = b2.measures.values(Complex64::new(0.0, 0.0));
        let lam = 2.0 * PI * om[0] / b2.period[(0, 0)];
        let m = b2.state.domain.slits()[0].m;
        assert!((lam + m.ln()).abs() < 1e-4 * m.ln().abs());
        assert!(m > 0.5);
    }

    #[test]
    fn degenerate_steps_rejected() {
        let d = make_domain(&[(0.999, 0.0, 1.0)]).unwrap();
        let v = ModuliVelocity {
            dlnm: vec![10.0],
            dtheta_start: vec![0.0],
            darc: vec![0.0],
        };
        assert!(matches!(step_domain(&d, &v, 0.01), Err(Error::DegenerateDomain(_))));
    }

    #[test]
    fn loop_continuation_returns() {
        let b = bundle(&[(0.5, 0.0, PI / 2.0)], 2.0);
        let c = Complex64::from_polar(0.5, PI / 4.0);
        let n = 2000;
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let t = TAU * (k as f64 + 0.5) / n as f64;
            let e = Complex64::from_polar(1.0, t);
            let rot = Complex64::from_polar(1.0, PI / 4.0 + PI / 2.0);
            let w = c + Complex64::new(0.48 * e.re, 0.3 * e.im) * rot;
            let dw = Complex64::new(-0.48 * e.im, 0.3 * e.re) * rot * (TAU / n as f64);
            total += b.field.derivative(w) * dw;
        }
        assert!(total.norm() < 1e-6, "{total}");
    }
}
