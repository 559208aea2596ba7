//! Least-squares collocation for Dirichlet problems on circular slit disks.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::arc::{ArcLayer, Quadrature};
use super::far::FarField;
use crate::error::{Error, Result};
use crate::geometry::{chebyshev_points, BoundaryMesh, CircularSlitDisk};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Degree of the power series about 0.
    pub degree: usize,
    /// Chebyshev coefficients per slit at the base level.
    pub coeffs: usize,
    /// Boundary residual tolerance, relative to `max(1, max |data|)`.
    pub tol: f64,
    /// Upper limit for adaptive refinement of the coefficient count.
    pub max_coeffs: usize,
    pub cond_limit: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            degree: 64,
            coeffs: 24,
            tol: 1e-8,
            max_coeffs: 192,
            cond_limit: 1e14,
        }
    }
}

fn quadrature_size(coeffs: usize) -> usize {
    (2 * coeffs + 16).max(48)
}

/// Arc layers and quadrature for a fixed coefficient count.
#[derive(Debug)]
pub(crate) struct LayerSet {
    pub quad: Quadrature,
    pub layers: Vec<ArcLayer>,
    pub table: Vec<f64>,
    pub count: usize,
}

impl LayerSet {
    pub fn new(domain: &CircularSlitDisk, count: usize) -> Self {
        let quad = Quadrature::new(quadrature_size(count));
        LayerSet {
            layers: domain.slits().iter().map(|s| ArcLayer::new(s, &quad)).collect(),
            table: quad.chebyshev_table(count),
            quad,
            count,
        }
    }

    /// Rows of basis values (real parts) at `points`.
    fn matrix(&self, points: &[Complex64]) -> DMatrix<f64> {
        let cols = self.count * self.layers.len();
        let mut a = DMatrix::zeros(points.len(), cols);
        for (i, &w) in points.iter().enumerate() {
            for (k, layer) in self.layers.iter().enumerate() {
                let row = layer.basis_real(w, &self.quad, &self.table, self.count);
                for (n, v) in row.into_iter().enumerate() {
                    a[(i, k * self.count + n)] = v;
                }
            }
        }
        a
    }
}

/// A solved potential: power series plus slit layers.
#[derive(Debug, Clone)]
pub struct PotentialSolution {
    domain: CircularSlitDisk,
    series: Vec<Complex64>,
    densities: Vec<Vec<f64>>,
    residual: f64,
    tag: String,
    eval: Arc<Evaluator>,
}

#[derive(Debug)]
struct Evaluator {
    set: LayerSet,
    rho: Vec<Vec<f64>>,
}

impl Evaluator {
    fn new(domain: &CircularSlitDisk, densities: &[Vec<f64>]) -> Self {
        let count = densities.iter().map(Vec::len).max().unwrap_or(0).max(1);
        let set = LayerSet::new(domain, count);
        let rho = densities.iter().map(|d| set.quad.synthesize(d)).collect();
        Evaluator { set, rho }
    }
}

#[derive(Serialize, Deserialize)]
struct SolutionDump {
    schema_version: u32,
    tag: String,
    domain: CircularSlitDisk,
    series_re: Vec<f64>,
    series_im: Vec<f64>,
    densities: Vec<Vec<f64>>,
    periods: Vec<f64>,
    residual: f64,
}

impl PotentialSolution {
    pub fn new(
        domain: CircularSlitDisk,
        series: Vec<Complex64>,
        densities: Vec<Vec<f64>>,
        residual: f64,
        tag: impl Into<String>,
    ) -> Self {
        let eval = Arc::new(Evaluator::new(&domain, &densities));
        PotentialSolution {
            domain,
            series,
            densities,
            residual,
            tag: tag.into(),
            eval,
        }
    }

    pub fn domain(&self) -> &CircularSlitDisk {
        &self.domain
    }

    pub fn series_coeffs(&self) -> &[Complex64] {
        &self.series
    }

    pub fn densities(&self) -> &[Vec<f64>] {
        &self.densities
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Total density mass per slit.
    pub fn masses(&self) -> Vec<f64> {
        self.densities
            .iter()
            .map(|d| std::f64::consts::PI * d.first().copied().unwrap_or(0.0))
            .collect()
    }

    /// Increase of the imaginary part of [`PotentialSolution::complete`] along a
    /// counterclockwise loop around each slit.
    pub fn periods(&self) -> Vec<f64> {
        self.masses()
            .into_iter()
            .map(|m| std::f64::consts::TAU * m)
            .collect()
    }

    /// Analytic function whose real part is the potential.
    ///
    /// The imaginary part is the principal branch: each slit carries a cut
    /// along the outward radial ray from its start tip.
    pub fn complete(&self, w: Complex64) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        for c in self.series.iter().rev() {
            v = v * w + c;
        }
        let set = &self.eval.set;
        for (k, layer) in set.layers.iter().enumerate() {
            v += layer.value(w, &self.densities[k], &self.eval.rho[k], &set.quad);
        }
        v
    }

    /// [`PotentialSolution::complete`] using multipole expansions where they apply.
    pub fn complete_with(&self, far: &FarField, w: Complex64) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        for c in self.series.iter().rev() {
            v = v * w + c;
        }
        let set = &self.eval.set;
        for (k, layer) in set.layers.iter().enumerate() {
            v += far
                .layer_value(k, layer, w)
                .unwrap_or_else(|| layer.value(w, &self.densities[k], &self.eval.rho[k], &set.quad));
        }
        v
    }

    pub(crate) fn layer(&self, k: usize) -> &ArcLayer {
        &self.eval.set.layers[k]
    }

    pub(crate) fn layer_value(&self, k: usize, w: Complex64) -> Complex64 {
        let set = &self.eval.set;
        set.layers[k].value(w, &self.densities[k], &self.eval.rho[k], &set.quad)
    }

    pub fn value(&self, w: Complex64) -> f64 {
        self.complete(w).re
    }

    /// Complex derivative of [`PotentialSolution::complete`], equal to `u_x - i u_y`.
    pub fn derivative(&self, w: Complex64) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        for (k, c) in self.series.iter().enumerate().skip(1).rev() {
            v = v * w + c * k as f64;
        }
        let set = &self.eval.set;
        for (k, layer) in set.layers.iter().enumerate() {
            v += layer.derivative(w, &self.densities[k], &self.eval.rho[k], &set.quad);
        }
        v
    }

    pub fn gradient(&self, w: Complex64) -> [f64; 2] {
        let d = self.derivative(w);
        [d.re, -d.im]
    }

    /// `sum_i c_i u_i` over solutions on the same domain.
    pub fn combine(terms: &[(f64, &PotentialSolution)], tag: impl Into<String>) -> Self {
        let domain = terms
            .first()
            .map(|(_, s)| s.domain.clone())
            .unwrap_or_default();
        let nser = terms.iter().map(|(_, s)| s.series.len()).max().unwrap_or(0);
        let mut series = vec![Complex64::new(0.0, 0.0); nser];
        let mut densities = vec![Vec::new(); domain.slit_count()];
        let mut residual = 0.0;
        for (c, s) in terms {
            for (k, v) in s.series.iter().enumerate() {
                series[k] += c * v;
            }
            for (k, d) in s.densities.iter().enumerate() {
                if densities[k].len() < d.len() {
                    densities[k].resize(d.len(), 0.0);
                }
                for (n, v) in d.iter().enumerate() {
                    densities[k][n] += c * v;
                }
            }
            residual += c.abs() * s.residual;
        }
        PotentialSolution::new(domain, series, densities, residual, tag)
    }

    pub fn to_json(&self) -> String {
        let dump = SolutionDump {
            schema_version: SCHEMA_VERSION,
            tag: self.tag.clone(),
            domain: self.domain.clone(),
            series_re: self.series.iter().map(|c| c.re).collect(),
            series_im: self.series.iter().map(|c| c.im).collect(),
            densities: self.densities.clone(),
            periods: self.periods(),
            residual: self.residual,
        };
        serde_json::to_string_pretty(&dump).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: SolutionDump = serde_json::from_str(text)?;
        let series = d
            .series_re
            .iter()
            .zip(&d.series_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Ok(PotentialSolution::new(d.domain, series, d.densities, d.residual, d.tag))
    }
}

/// Factored collocation system for layer-only problems (zero data on the circle).
#[derive(Debug)]
struct LayerSystem {
    set: LayerSet,
    points: Vec<Complex64>,
    svd: SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    scale: DVector<f64>,
    /// Basis values at the mesh nodes, for residual checks.
    check: DMatrix<f64>,
    cond: f64,
}

impl LayerSystem {
    fn build(domain: &CircularSlitDisk, count: usize, params: &[f64], mesh_points: &[Complex64]) -> Self {
        let set = LayerSet::new(domain, count);
        let points: Vec<Complex64> = domain
            .slits()
            .iter()
            .flat_map(|s| params.iter().map(move |&p| s.point(p)))
            .collect();
        let mut a = set.matrix(&points);
        let check = if points == mesh_points {
            a.clone()
        } else {
            set.matrix(mesh_points)
        };
        let scale = DVector::from_iterator(
            a.ncols(),
            a.column_iter().map(|c| {
                let n = c.norm();
                if n > 0.0 {
                    1.0 / n
                } else {
                    1.0
                }
            }),
        );
        for (j, mut col) in a.column_iter_mut().enumerate() {
            col *= scale[j];
        }
        let svd = SVD::new(a, true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        LayerSystem {
            set,
            points,
            svd,
            scale,
            check,
            cond,
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let eps = self.svd.singular_values.max() * 1e-15;
        let y = self.svd.solve(rhs, eps).expect("svd has u and v");
        y.component_mul(&self.scale)
    }
}

/// Collocation solver for one domain; factorizations are computed once and
/// reused for every right-hand side.
#[derive(Debug)]
pub struct LayerSolver {
    mesh: BoundaryMesh,
    opts: SolverOptions,
    mesh_points: Vec<Complex64>,
    levels: Vec<OnceLock<LayerSystem>>,
    base_count: usize,
}

impl LayerSolver {
    pub fn new(mesh: &BoundaryMesh, opts: SolverOptions) -> Result<Self> {
        if !(opts.tol > 0.0) || opts.coeffs < 2 {
            return Err(Error::InvalidConfig("solver options".into()));
        }
        let base_count = opts.coeffs.min(3 * mesh.n_slit / 8).max(4);
        let mut n_levels = 1;
        let mut c = base_count;
        while 2 * c <= opts.max_coeffs {
            c *= 2;
            n_levels += 1;
        }
        let mesh_points: Vec<Complex64> = mesh.slit_nodes.iter().flatten().copied().collect();
        let solver = LayerSolver {
            mesh: mesh.clone(),
            opts,
            mesh_points,
            levels: (0..n_levels).map(|_| OnceLock::new()).collect(),
            base_count,
        };
        if !solver.mesh_points.is_empty() {
            solver.level(0)?;
        }
        Ok(solver)
    }

    pub fn mesh(&self) -> &BoundaryMesh {
        &self.mesh
    }

    pub fn domain(&self) -> &CircularSlitDisk {
        &self.mesh.domain
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    /// Condition estimate of the base collocation system.
    pub fn condition(&self) -> f64 {
        self.levels[0].get().map(|s| s.cond).unwrap_or(f64::NAN)
    }

    fn level(&self, k: usize) -> Result<&LayerSystem> {
        let sys = self.levels[k].get_or_init(|| {
            let count = self.base_count << k;
            let params = if k == 0 {
                self.mesh.slit_params.clone()
            } else {
                chebyshev_points((8 * count / 3).max(self.mesh.n_slit))
            };
            LayerSystem::build(&self.mesh.domain, count, &params, &self.mesh_points)
        });
        if sys.cond > self.opts.cond_limit {
            return Err(Error::IllConditioned(sys.cond));
        }
        Ok(sys)
    }

    /// Solve for a layer potential with data `f(j, w)` on slit `j` and zero on the circle.
    pub fn solve(&self, f: &dyn Fn(usize, Complex64) -> f64, tag: &str) -> Result<PotentialSolution> {
        let n = self.domain().slit_count();
        if n == 0 {
            return Ok(PotentialSolution::new(self.domain().clone(), Vec::new(), Vec::new(), 0.0, tag));
        }
        let mesh_data: Vec<f64> = self
            .mesh
            .slit_nodes
            .iter()
            .enumerate()
            .flat_map(|(j, nodes)| nodes.iter().map(move |&w| f(j, w)))
            .collect();
        if mesh_data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData);
        }
        let scale = mesh_data.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let tol = self.opts.tol * scale;
        let mut last = f64::INFINITY;
        for k in 0..self.levels.len() {
            let sys = self.level(k)?;
            let per = sys.points.len() / n;
            let rhs = DVector::from_iterator(
                sys.points.len(),
                sys.points.iter().enumerate().map(|(i, &w)| f(i / per, w)),
            );
            let x = sys.solve(&rhs);
            let fit = &sys.check * &x;
            let residual = fit
                .iter()
                .zip(&mesh_data)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if residual <= tol {
                let densities = (0..n)
                    .map(|j| x.rows(j * sys.set.count, sys.set.count).iter().copied().collect())
                    .collect();
                return Ok(PotentialSolution::new(
                    self.domain().clone(),
                    Vec::new(),
                    densities,
                    residual,
                    tag,
                ));
            }
            last = residual;
        }
        Err(Error::ResidualTooLarge {
            residual: last,
            tolerance: tol,
        })
    }

    /// Solve with per-node data (circle nodes first, then slit by slit).
    ///
    /// Circle data is fitted by the truncated Fourier series; slit data minus
    /// that series is fitted by the layers at the mesh nodes.
    pub fn solve_nodal(&self, data: &[f64], tag: &str) -> Result<PotentialSolution> {
        let mesh = &self.mesh;
        if data.len() != mesh.node_count() {
            return Err(Error::DataMismatch {
                expected: mesh.node_count(),
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData);
        }
        let nc = mesh.n_circle;
        let degree = self.opts.degree.min(nc / 2 - 1);
        let mut series = Vec::with_capacity(degree + 1);
        for k in 0..=degree {
            let mut c = Complex64::new(0.0, 0.0);
            for (j, &z) in mesh.circle_nodes.iter().enumerate() {
                c += data[j] * z.powu(k as u32).conj();
            }
            let f = if k == 0 { 1.0 } else { 2.0 };
            series.push(c * (f / nc as f64));
        }
        let horner = |w: Complex64| {
            series
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c)
                .re
        };
        let n = mesh.domain.slit_count();
        let mut densities = Vec::new();
        let mut residual = mesh
            .circle_nodes
            .iter()
            .zip(data)
            .map(|(&z, d)| (horner(z) - d).abs())
            .fold(0.0, f64::max);
        if n > 0 {
            let sys = self.level(0)?;
            let rhs = DVector::from_iterator(
                self.mesh_points.len(),
                self.mesh_points
                    .iter()
                    .zip(&data[nc..])
                    .map(|(&w, d)| d - horner(w)),
            );
            let x = if sys.points == self.mesh_points {
                sys.solve(&rhs)
            } else {
                unreachable!("base level collocates at mesh nodes")
            };
            let fit = &sys.check * &x;
            residual = fit
                .iter()
                .zip(rhs.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(residual, f64::max);
            densities = (0..n)
                .map(|j| x.rows(j * sys.set.count, sys.set.count).iter().copied().collect())
                .collect();
        }
        let scale = data.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if residual > self.opts.tol * scale {
            return Err(Error::ResidualTooLarge {
                residual,
                tolerance: self.opts.tol * scale,
            });
        }
        Ok(PotentialSolution::new(mesh.domain.clone(), series, densities, residual, tag))
    }
}

/// Solve the Dirichlet problem with per-node boundary data.
pub fn solve_dirichlet(mesh: &BoundaryMesh, data: &[f64]) -> Result<PotentialSolution> {
    LayerSolver::new(mesh, SolverOptions::default())?.solve_nodal(data, "dirichlet")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{discretize, make_domain};
    use std::f64::consts::PI;

    fn mesh2() -> BoundaryMesh {
        discretize(&make_domain(&[(0.5, 0.0, PI / 2.0)]).unwrap(), 256, 64).unwrap()
    }

    #[test]
    fn constant_data() {
        let mesh = mesh2();
        let s = solve_dirichlet(&mesh, &vec![1.0; mesh.node_count()]).unwrap();
        assert!((s.series_coeffs()[0].re - 1.0).abs() < 1e-14);
        assert!(s.densities()[0].iter().all(|a| a.abs() < 1e-12));
        assert!((s.value(Complex64::new(0.1, 0.3)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn real_part_of_w() {
        let mesh = mesh2();
        let s = solve_dirichlet(&mesh, &mesh.sample(|w| w.re)).unwrap();
        assert!(s.densities()[0].iter().all(|a| a.abs() < 1e-12));
        for w in [Complex64::new(0.3, 0.1), Complex64::new(-0.5, 0.6)] {
            assert!((s.value(w) - w.re).abs() < 1e-12);
        }
    }

    #[test]
    fn data_length_checked() {
        let mesh = mesh2();
        assert!(matches!(
            solve_dirichlet(&mesh, &[1.0, 2.0]),
            Err(Error::DataMismatch { .. })
        ));
        let mut d = vec![0.0; mesh.node_count()];
        d[3] = f64::NAN;
        assert!(matches!(solve_dirichlet(&mesh, &d), Err(Error::NonFiniteData)));
    }

    #[test]
    fn slit_indicator_meets_tolerance_and_is_harmonic() {
        let mesh = mesh2();
        let solver = LayerSolver::new(&mesh, SolverOptions::default()).unwrap();
        let s = solver.solve(&|_, _| 1.0, "omega").unwrap();
        assert!(s.residual() < 1e-8);
        // Five-point Laplacian at interior probes.
        let h = 1e-3;
        for w in [Complex64::new(0.2, 0.1), Complex64::new(-0.4, 0.4), Complex64::new(0.7, 0.2)] {
            let lap = s.value(w + h) + s.value(w - h) + s.value(w + Complex64::i() * h)
                + s.value(w - Complex64::i() * h)
                - 4.0 * s.value(w);
            assert!(lap.abs() / (h * h) < 1e-4, "{lap}");
            let v = s.value(w);
            assert!(v > 0.0 && v < 1.0);
        }
    }

    #[test]
    fn json_roundtrip() {
        let mesh = mesh2();
        let solver = LayerSolver::new(&mesh, SolverOptions::default()).unwrap();
        let s = solver.solve(&|_, _| 1.0, "omega").unwrap();
        let back = PotentialSolution::from_json(&s.to_json()).unwrap();
        let w = Complex64::new(0.1, -0.3);
        assert_eq!(back.value(w), s.value(w));
    }
}
