//! Self-approach statistic for the simple-curve phase transition.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::ExperimentReport;
use super::stats::Proportion;
use crate::error::{Error, Result};
use crate::geometry::CircularSlitDisk;
use crate::loewner::{compute_trace, FlowOptions, Trace};
use crate::sde::{simulate_stream, SdeConfig};

/// Pairs at most this far apart in sample index are never compared.
pub const MIN_INDEX_GAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleCurveStatistic {
    /// Per trace: minimum distance over compared pairs, or `None` when the
    /// trace was censored to too few points.
    pub min_distances: Vec<Option<f64>>,
    /// Compared pairs have index gap above this.
    pub index_gap: usize,
    /// Traces cut at a slit collision.
    pub censored: usize,
    pub epsilon: f64,
    pub fraction: Proportion,
}

/// Minimum distance between polyline segments `[p_i, p_{i+1}]` and
/// `[p_j, p_{j+1}]` with `j - (i + 1) > gap`, so the nearest endpoints of a
/// compared pair are more than `gap` samples apart.
pub fn self_approach(points: &[Complex64], gap: usize) -> Option<f64> {
    let n = points.len();
    if n <= gap + 3 {
        return None;
    }
    let mut best = f64::INFINITY;
    for i in 0..n - gap - 3 {
        let (a, b) = (points[i], points[i + 1]);
        for j in i + gap + 2..n - 1 {
            best = best.min(segment_distance(a, b, points[j], points[j + 1]));
        }
    }
    Some(best)
}

fn point_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len = ab.norm_sqr();
    let s = if len > 0.0 { ((p - a) * ab.conj()).re / len } else { 0.0 };
    (p - (a + ab * s.clamp(0.0, 1.0))).norm()
}

fn segment_distance(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> f64 {
    let cross = |u: Complex64, v: Complex64| (u.conj() * v).im;
    let (ab, cd) = (b - a, d - c);
    let (s1, s2) = (cross(ab, c - a), cross(ab, d - a));
    let (s3, s4) = (cross(cd, a - c), cross(cd, b - c));
    if s1 * s2 < 0.0 && s3 * s4 < 0.0 {
        return 0.0;
    }
    point_segment(a, c, d)
        .min(point_segment(b, c, d))
        .min(point_segment(c, a, b))
        .min(point_segment(d, a, b))
}

/// Fraction of traces whose self-approach distance falls below `epsilon`.
///
/// Compared pairs are more than [`MIN_INDEX_GAP`] samples and more than
/// `min_time_gap` apart in parameter. Traces are cut at their first slit collision.
pub fn simple_curve_statistic(traces: &[Trace], epsilon: f64, min_time_gap: f64) -> Result<SimpleCurveStatistic> {
    if traces.is_empty() {
        return Err(Error::TooFewSamples("no traces".into()));
    }
    for t in traces {
        if t.len() <= MIN_INDEX_GAP + 3 {
            return Err(Error::TooFewSamples(format!("trace with {} points", t.len())));
        }
        let h = t.times[1] - t.times[0];
        if t.times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1e-300)) {
            return Err(Error::Precondition("trace samples are not uniformly spaced".into()));
        }
    }
    let h = traces[0].times[1] - traces[0].times[0];
    let index_gap = MIN_INDEX_GAP.max((min_time_gap / h).round() as usize);
    let mut censored = 0;
    let min_distances: Vec<Option<f64>> = traces
        .iter()
        .map(|t| {
            let end = t.first_collision().unwrap_or(t.len());
            censored += usize::from(end < t.len());
            self_approach(&t.points[..end], index_gap)
        })
        .collect();
    let usable = min_distances.iter().flatten().count();
    let hits = min_distances.iter().flatten().filter(|&&d| d < epsilon).count();
    Ok(SimpleCurveStatistic {
        min_distances,
        index_gap,
        censored,
        epsilon,
        fraction: Proportion::new(hits, usable, 0.95),
    })
}

/// Uniform sample times `k * t_max / n` that lie within the path.
pub fn uniform_samples(t_max: f64, n: usize, t_end: f64) -> Vec<f64> {
    (0..=n)
        .map(|k| t_max * k as f64 / n as f64)
        .take_while(|&s| s <= t_end * (1.0 + 1e-12))
        .map(|s| s.min(t_end))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseOptions {
    pub kappas: (f64, f64),
    pub n_traces: usize,
    pub samples: usize,
    pub epsilon: f64,
    /// Compared sample pairs are at least this far apart in time.
    pub min_time_gap: f64,
    /// Required lead of the self-approach fraction of the larger kappa.
    pub min_separation: f64,
    pub flow: FlowOptions,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        PhaseOptions {
            kappas: (2.0, 6.0),
            n_traces: 200,
            samples: 500,
            epsilon: 1e-2,
            min_time_gap: 0.05,
            min_separation: 0.3,
            flow: FlowOptions::default(),
        }
    }
}

/// Simulate traces for each kappa in `opts.kappas` and compare self-approach fractions.
/// `config.kappa` is ignored; paths use streams `0..n_traces` for each kappa.
pub fn phase_experiment(domain: &CircularSlitDisk, config: &SdeConfig, opts: &PhaseOptions) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("phases");
    report.param("domain", domain);
    report.param("sde", config);
    report.param("options", opts);
    report.param("min_separation", opts.min_separation);
    let mut fractions = Vec::new();
    for kappa in [opts.kappas.0, opts.kappas.1] {
        let cfg = SdeConfig { kappa, ..*config };
        cfg.validate()?;
        let results: Vec<Result<Trace>> = (0..opts.n_traces)
            .into_par_iter()
            .map(|i| {
                let run = simulate_stream(domain, cfg.theta0, &cfg, i as u64)?;
                let times = uniform_samples(cfg.t_max, opts.samples, run.path.t_end());
                compute_trace(&run.path, &times, &opts.flow)
            })
            .collect();
        let failures: Vec<String> = results.iter().filter_map(|r| r.as_ref().err().map(|e| e.to_string())).collect();
        let traces: Vec<Trace> = results
            .into_iter()
            .filter_map(|r| r.ok())
            .filter(|t| t.len() > MIN_INDEX_GAP + 3)
            .collect();
        let stat = simple_curve_statistic(&traces, opts.epsilon, opts.min_time_gap)?;
        report.records.push(json!({
            "kappa": kappa,
            "min_distances": stat.min_distances,
            "failures": failures,
        }));
        report.summarize(
            &format!("kappa_{kappa}"),
            json!({
                "fraction": stat.fraction,
                "censored": stat.censored,
                "index_gap": stat.index_gap,
                "failed": failures.len(),
                "traces": traces.len(),
            }),
        );
        fractions.push(stat.fraction.estimate);
    }
    let lead = fractions[1] - fractions[0];
    report.summarize("separation", lead);
    report.check("separation", lead, "min_separation", lead > opts.min_separation);
    Ok(report)
}
