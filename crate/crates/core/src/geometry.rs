//! Circular slit disks, moduli states and boundary meshes.
//!
//! A standard domain is the unit disk with `n - 1` concentric circular arcs
//! removed. Slit `j` is the arc `|z| = m_j`, `theta_start <= arg z <=
//! theta_start + arc_length`. The outer boundary is the unit circle and is not
//! stored.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::{PI, TAU};
use std::hash::{Hash, Hasher};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimal radial separation between two slits.
pub const RADIUS_SEPARATION: f64 = 1e-3;

/// Wrap an angle into `[0, 2pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slit {
    pub m: f64,
    pub theta_start: f64,
    pub arc_length: f64,
}

impl Slit {
    pub fn new(m: f64, theta_start: f64, arc_length: f64) -> Result<Self> {
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::RadiusOutOfRange(m));
        }
        if !(arc_length > 0.0 && arc_length < TAU) {
            return Err(Error::BadArcLength(arc_length));
        }
        if !theta_start.is_finite() {
            return Err(Error::BadArcLength(theta_start));
        }
        Ok(Slit {
            m,
            theta_start: normalize_angle(theta_start),
            arc_length,
        })
    }

    pub fn theta_end(&self) -> f64 {
        self.theta_start + self.arc_length
    }

    pub fn center_angle(&self) -> f64 {
        self.theta_start + 0.5 * self.arc_length
    }

    pub fn half_angle(&self) -> f64 {
        0.5 * self.arc_length
    }

    /// Point of the arc at parameter `s` in `[-1, 1]`.
    pub fn point(&self, s: f64) -> Complex64 {
        Complex64::from_polar(self.m, self.center_angle() + self.half_angle() * s)
    }

    pub fn start_tip(&self) -> Complex64 {
        self.point(-1.0)
    }

    pub fn end_tip(&self) -> Complex64 {
        self.point(1.0)
    }

    /// Angular offset of `theta` from the start of the arc, in `[0, 2pi)`.
    fn offset(&self, theta: f64) -> f64 {
        normalize_angle(theta - self.theta_start)
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        self.offset(theta) <= self.arc_length
    }

    /// Euclidean distance from `w` to the arc.
    pub fn distance(&self, w: Complex64) -> f64 {
        let r = w.norm();
        if r > 0.0 && self.contains_angle(w.arg()) {
            (r - self.m).abs()
        } else if r == 0.0 {
            self.m
        } else {
            (w - self.start_tip()).norm().min((w - self.end_tip()).norm())
        }
    }
}

/// Unit disk minus concentric circular slits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(try_from = "RawDomain", into = "RawDomain")]
pub struct CircularSlitDisk {
    slits: Vec<Slit>,
}

#[derive(Serialize, Deserialize)]
struct RawDomain {
    slits: Vec<Slit>,
}

impl TryFrom<RawDomain> for CircularSlitDisk {
    type Error = Error;
    fn try_from(raw: RawDomain) -> Result<Self> {
        CircularSlitDisk::from_slits(raw.slits)
    }
}

impl From<CircularSlitDisk> for RawDomain {
    fn from(d: CircularSlitDisk) -> Self {
        RawDomain { slits: d.slits }
    }
}

impl CircularSlitDisk {
    pub fn disk() -> Self {
        CircularSlitDisk { slits: Vec::new() }
    }

    pub fn from_slits(slits: Vec<Slit>) -> Result<Self> {
        let slits = slits
            .into_iter()
            .map(|s| Slit::new(s.m, s.theta_start, s.arc_length))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..slits.len() {
            for j in (i + 1)..slits.len() {
                if (slits[i].m - slits[j].m).abs() < RADIUS_SEPARATION {
                    return Err(Error::RadiiTooClose(
                        slits[i].m,
                        slits[j].m,
                        RADIUS_SEPARATION,
                    ));
                }
            }
        }
        Ok(CircularSlitDisk { slits })
    }

    pub fn slits(&self) -> &[Slit] {
        &self.slits
    }

    pub fn slit_count(&self) -> usize {
        self.slits.len()
    }

    /// Connectivity `n = 1 + number of slits`.
    pub fn connectivity(&self) -> usize {
        1 + self.slits.len()
    }

    /// Distance from `w` to the nearest slit (infinite when there is none).
    pub fn distance_to_slits(&self, w: Complex64) -> f64 {
        self.slits
            .iter()
            .map(|s| s.distance(w))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `w` to the whole boundary.
    pub fn distance_to_boundary(&self, w: Complex64) -> f64 {
        (1.0 - w.norm()).min(self.distance_to_slits(w))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("domain serializes")
    }
}

/// Build and validate a standard domain from `(m, theta_start, arc_length)` triples.
pub fn make_domain(slits: &[(f64, f64, f64)]) -> Result<CircularSlitDisk> {
    CircularSlitDisk::from_slits(
        slits
            .iter()
            .map(|&(m, theta_start, arc_length)| Slit {
                m,
                theta_start,
                arc_length,
            })
            .collect(),
    )
}

/// Time, driving angle and slit parameters.
///
/// The marked boundary point is `e^{i gamma_angle}`; rotations are not
/// quotiented out, so the state has `3(n-1) + 2` real coordinates including
/// time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuliState {
    pub t: f64,
    pub gamma_angle: f64,
    pub domain: CircularSlitDisk,
}

impl ModuliState {
    pub fn new(t: f64, gamma_angle: f64, domain: CircularSlitDisk) -> Self {
        ModuliState {
            t,
            gamma_angle,
            domain,
        }
    }

    pub fn gamma(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.gamma_angle)
    }

    pub fn pack(&self) -> Vec<f64> {
        pack_moduli(self)
    }

    /// Hash of the exact bit patterns of every coordinate.
    pub fn state_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for x in self.pack() {
            x.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

pub fn pack_moduli(state: &ModuliState) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 + 3 * state.domain.slit_count());
    v.push(state.t);
    v.push(state.gamma_angle);
    for s in state.domain.slits() {
        v.extend_from_slice(&[s.m, s.theta_start, s.arc_length]);
    }
    v
}

/// Inverse of [`pack_moduli`] for a domain of connectivity `n`.
pub fn unpack_moduli(v: &[f64], n: usize) -> Result<ModuliState> {
    let expected = 3 * n.saturating_sub(1) + 2;
    if n == 0 || v.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: v.len(),
        });
    }
    let slits = v[2..]
        .chunks_exact(3)
        .map(|c| Slit {
            m: c[0],
            theta_start: c[1],
            arc_length: c[2],
        })
        .collect();
    Ok(ModuliState {
        t: v[0],
        gamma_angle: v[1],
        domain: CircularSlitDisk::from_slits(slits)?,
    })
}

/// Boundary nodes, quadrature weights and inner normals.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    pub domain: CircularSlitDisk,
    pub n_circle: usize,
    pub n_slit: usize,
    pub circle_nodes: Vec<Complex64>,
    pub circle_weights: Vec<f64>,
    pub circle_normals: Vec<Complex64>,
    /// Chebyshev parameters `s_i` in (-1, 1), shared by every slit.
    pub slit_params: Vec<f64>,
    pub slit_nodes: Vec<Vec<Complex64>>,
    /// Arc-length weights of the endpoint-weighted rule.
    pub slit_weights: Vec<Vec<f64>>,
    /// Normal pointing toward the origin; the opposite side uses its negative.
    pub slit_normals: Vec<Vec<Complex64>>,
}

impl BoundaryMesh {
    pub fn node_count(&self) -> usize {
        self.n_circle + self.n_slit * self.domain.slit_count()
    }

    /// All nodes, circle first, then slit by slit.
    pub fn nodes(&self) -> Vec<Complex64> {
        let mut out = self.circle_nodes.clone();
        for s in &self.slit_nodes {
            out.extend_from_slice(s);
        }
        out
    }

    /// Per-node data from a function of the node position.
    pub fn sample(&self, f: impl Fn(Complex64) -> f64) -> Vec<f64> {
        self.nodes().into_iter().map(f).collect()
    }

    /// Data equal to `circle` on the unit circle and `slit[j]` on slit `j`.
    pub fn piecewise_constant(&self, circle: f64, slit: &[f64]) -> Vec<f64> {
        let mut out = vec![circle; self.n_circle];
        for (j, _) in self.slit_nodes.iter().enumerate() {
            out.extend(std::iter::repeat_n(slit[j], self.n_slit));
        }
        out
    }
}

/// Chebyshev points of the first kind, `cos((2i - 1) pi / 2n)`, in decreasing order.
pub fn chebyshev_points(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| ((2 * i - 1) as f64 * PI / (2 * n) as f64).cos())
        .collect()
}

pub fn discretize(domain: &CircularSlitDisk, n_circle: usize, n_slit: usize) -> Result<BoundaryMesh> {
    if n_circle < 32 || n_circle % 4 != 0 {
        return Err(Error::ResolutionTooLow(format!(
            "circle nodes {n_circle} (need >= 32 and a multiple of 4)"
        )));
    }
    if n_slit < 16 {
        return Err(Error::ResolutionTooLow(format!(
            "slit nodes {n_slit} (need >= 16)"
        )));
    }
    let h = TAU / n_circle as f64;
    let circle_nodes: Vec<Complex64> = (0..n_circle)
        .map(|k| Complex64::from_polar(1.0, h * k as f64))
        .collect();
    let circle_normals = circle_nodes.iter().map(|&u| -u).collect();
    let slit_params = chebyshev_points(n_slit);
    let mut slit_nodes = Vec::new();
    let mut slit_weights = Vec::new();
    let mut slit_normals = Vec::new();
    for slit in domain.slits() {
        let nodes: Vec<Complex64> = slit_params.iter().map(|&s| slit.point(s)).collect();
        let scale = slit.m * slit.half_angle() * PI / n_slit as f64;
        slit_weights.push(
            slit_params
                .iter()
                .map(|&s| scale * (1.0 - s * s).sqrt())
                .collect(),
        );
        slit_normals.push(nodes.iter().map(|&z| -z / z.norm()).collect());
        slit_nodes.push(nodes);
    }
    Ok(BoundaryMesh {
        domain: domain.clone(),
        n_circle,
        n_slit,
        circle_nodes,
        circle_weights: vec![h; n_circle],
        circle_normals,
        slit_params,
        slit_nodes,
        slit_weights,
        slit_normals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_slit_list_is_the_disk() {
        let d = make_domain(&[]).unwrap();
        assert_eq!(d.connectivity(), 1);
    }

    #[test]
    fn single_slit_domain() {
        let d = make_domain(&[(0.5, 0.0, PI / 2.0)]).unwrap();
        assert_eq!(d.connectivity(), 2);
        assert!((d.slits()[0].end_tip() - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn equal_radii_rejected() {
        let e = make_domain(&[(0.5, 0.0, PI), (0.5, 1.5 * PI, PI / 4.0)]).unwrap_err();
        assert!(matches!(e, Error::RadiiTooClose(..)));
    }

    #[test]
    fn bad_slits_rejected() {
        assert!(matches!(
            make_domain(&[(1.0, 0.0, 1.0)]),
            Err(Error::RadiusOutOfRange(_))
        ));
        assert!(matches!(
            make_domain(&[(0.5, 0.0, TAU)]),
            Err(Error::BadArcLength(_))
        ));
        assert!(matches!(
            make_domain(&[(0.5, 0.0, 0.0)]),
            Err(Error::BadArcLength(_))
        ));
    }

    #[test]
    fn theta_start_is_normalized() {
        let d = make_domain(&[(0.5, -0.5, 1.0)]).unwrap();
        assert!((d.slits()[0].theta_start - (TAU - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn mesh_resolution_checked() {
        let d = CircularSlitDisk::disk();
        assert!(matches!(discretize(&d, 16, 16), Err(Error::ResolutionTooLow(_))));
        assert!(matches!(discretize(&d, 34, 16), Err(Error::ResolutionTooLow(_))));
        assert!(matches!(discretize(&d, 32, 8), Err(Error::ResolutionTooLow(_))));
    }

    #[test]
    fn circle_nodes_are_equispaced() {
        let mesh = discretize(&CircularSlitDisk::disk(), 32, 16).unwrap();
        for (k, z) in mesh.circle_nodes.iter().enumerate() {
            assert!((z.arg().rem_euclid(TAU) - TAU * k as f64 / 32.0).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_weights_sum_to_two_pi() {
        let d = make_domain(&[(0.5, 0.0, PI / 2.0)]).unwrap();
        let mesh = discretize(&d, 128, 32).unwrap();
        let total: f64 = mesh.circle_weights.iter().sum();
        assert!((total - TAU).abs() < 1e-12);
        // The endpoint-weighted rule integrates arc length exactly.
        let arc: f64 = mesh.slit_weights[0].iter().sum();
        assert!((arc - 0.5 * PI / 2.0).abs() < 1e-3);
    }

    #[test]
    fn slit_nodes_on_their_circle_and_tips_excluded() {
        let d = make_domain(&[(0.3, 1.0, 2.0), (0.7, 4.0, 1.0)]).unwrap();
        let mesh = discretize(&d, 64, 16).unwrap();
        for (j, nodes) in mesh.slit_nodes.iter().enumerate() {
            let slit = d.slits()[j];
            for z in nodes {
                assert!((z.norm() - slit.m).abs() < 1e-14);
                assert!((z - slit.start_tip()).norm() > 1e-6);
                assert!((z - slit.end_tip()).norm() > 1e-6);
            }
        }
    }

    #[test]
    fn discretize_is_deterministic() {
        let d = make_domain(&[(0.3, 1.0, 2.0)]).unwrap();
        assert_eq!(discretize(&d, 64, 16).unwrap(), discretize(&d, 64, 16).unwrap());
    }

    #[test]
    fn pack_of_disk_state() {
        let s = ModuliState::new(0.0, 0.0, CircularSlitDisk::disk());
        assert_eq!(s.pack(), vec![0.0, 0.0]);
        assert!(matches!(
            unpack_moduli(&[0.0, 0.0, 1.0], 1),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn domain_json_roundtrip() {
        let text = r#"{"slits":[{"m":0.5,"theta_start":0.0,"arc_length":1.5707963}]}"#;
        let d = CircularSlitDisk::from_json(text).unwrap();
        assert_eq!(d.slits()[0].m, 0.5);
        assert_eq!(CircularSlitDisk::from_json(&d.to_json()).unwrap(), d);
        assert!(CircularSlitDisk::from_json(r#"{"slits":[{"m":1.5,"theta_start":0,"arc_length":1}]}"#).is_err());
    }

    #[test]
    fn slit_distance() {
        let s = Slit::new(0.5, 0.0, PI / 2.0).unwrap();
        assert!((s.distance(Complex64::from_polar(0.6, 0.3)) - 0.1).abs() < 1e-12);
        assert!((s.distance(Complex64::new(0.5, -0.1)) - 0.1).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn pack_unpack_roundtrip(
            t in 0.0..5.0f64,
            theta in -10.0..10.0f64,
            m1 in 0.05..0.45f64,
            m2 in 0.55..0.95f64,
            a1 in 0.01..6.0f64,
            a2 in 0.01..6.0f64,
            s1 in 0.0..6.28f64,
            s2 in 0.0..6.28f64,
        ) {
            let d = make_domain(&[(m1, s1, a1), (m2, s2, a2)]).unwrap();
            let state = ModuliState::new(t, theta, d);
            let back = unpack_moduli(&state.pack(), 3).unwrap();
            prop_assert_eq!(back, state);
        }
    }
}
