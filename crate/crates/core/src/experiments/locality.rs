//! Locality comparison between the slit domain and the disk.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::ExperimentReport;
use super::stats::{ks_two_sample, Proportion};
use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, CircularSlitDisk};
use crate::loewner::{compute_trace, FlowOptions};
use crate::sde::{simulate_until, SdeConfig};

/// Disk paths use streams offset by this amount.
const DISK_STREAM_OFFSET: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Tip entered the slit neighbourhood.
    Slit,
    /// Tip entered the inner disk.
    Inner,
    /// The driving process ended first (time limit, stopping time or degeneration).
    PathEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppedTip {
    pub t: f64,
    pub angle: f64,
    pub radius: f64,
    pub reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityOptions {
    pub n_paths: usize,
    /// Width of the slit neighbourhood that stops a trace.
    pub stop_distance: f64,
    /// Traces also stop on entering `|z| <= inner_radius`.
    pub inner_radius: f64,
    /// Grid steps between tip checks.
    pub check_every: usize,
    /// Reported: fraction of stopped angles inside this arc `(start, length)`.
    pub target_arc: (f64, f64),
    pub significance: f64,
    pub flow: FlowOptions,
}

impl Default for LocalityOptions {
    fn default() -> Self {
        LocalityOptions {
            n_paths: 1000,
            stop_distance: 2e-2,
            inner_radius: 0.25,
            check_every: 1,
            target_arc: (0.0, PI / 2.0),
            significance: 0.05,
            flow: FlowOptions::default(),
        }
    }
}

/// Run one path and return the tip at the stopping time. The stopping set is
/// always measured against the slits of `slits`, whatever domain drives the path.
pub fn stopped_tip(
    domain: &CircularSlitDisk,
    slits: &CircularSlitDisk,
    config: &SdeConfig,
    stream: u64,
    opts: &LocalityOptions,
) -> Result<StoppedTip> {
    let mut hit: Option<StoppedTip> = None;
    let mut steps = 0usize;
    let probe = |path: &crate::loewner::DrivingPath| -> Result<Option<StoppedTip>> {
        let t = path.t_end();
        let tip = compute_trace(path, &[t], &opts.flow)?.points[0];
        let reason = if slits.distance_to_slits(tip) < opts.stop_distance {
            Some(StopReason::Slit)
        } else if tip.norm() <= opts.inner_radius {
            Some(StopReason::Inner)
        } else {
            None
        };
        Ok(reason.map(|reason| StoppedTip {
            t,
            angle: tip.arg(),
            radius: tip.norm(),
            reason,
        }))
    };
    let run = simulate_until(domain, config.theta0, config, stream, &mut |path| {
        steps += 1;
        if steps % opts.check_every.max(1) != 0 {
            return Ok(false);
        }
        hit = probe(path)?;
        Ok(hit.is_some())
    })?;
    if let Some(h) = hit {
        return Ok(h);
    }
    Ok(probe(&run.path)?.unwrap_or_else(|| {
        let t = run.path.t_end();
        let tip = compute_trace(&run.path, &[t], &opts.flow).map(|tr| tr.points[0]);
        let tip = tip.unwrap_or_default();
        StoppedTip {
            t,
            angle: tip.arg(),
            radius: tip.norm(),
            reason: StopReason::PathEnd,
        }
    }))
}

fn in_arc(angle: f64, arc: (f64, f64)) -> bool {
    normalize_angle(angle - arc.0) <= arc.1
}

/// Compare stopped tip angles of traces driven in `domain` against disk traces
/// that ignore the slits. Streams `0..n_paths` drive the slit domain.
pub fn locality_experiment(domain: &CircularSlitDisk, config: &SdeConfig, opts: &LocalityOptions) -> Result<ExperimentReport> {
    if domain.slit_count() == 0 {
        return Err(Error::Precondition("locality needs a domain with at least one slit".into()));
    }
    config.validate()?;
    let disk = CircularSlitDisk::disk();
    let run = |d: &CircularSlitDisk, offset: u64| -> Vec<Result<StoppedTip>> {
        (0..opts.n_paths as u64)
            .into_par_iter()
            .map(|i| stopped_tip(d, domain, config, offset + i, opts))
            .collect()
    };
    let a = run(domain, 0);
    let b = run(&disk, DISK_STREAM_OFFSET);

    let mut report = ExperimentReport::new("locality");
    report.param("domain", domain);
    report.param("sde", config);
    report.param("options", opts);
    report.param("significance", opts.significance);
    let mut angles = Vec::new();
    for (label, side) in [("slit_domain", &a), ("disk", &b)] {
        let ok: Vec<StoppedTip> = side.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
        let failures: Vec<String> = side.iter().filter_map(|r| r.as_ref().err().map(|e| e.to_string())).collect();
        let count = |r: StopReason| ok.iter().filter(|s| s.reason == r).count();
        let in_target = ok.iter().filter(|s| in_arc(s.angle, opts.target_arc)).count();
        report.summarize(
            label,
            json!({
                "paths": side.len(),
                "failed": failures.len(),
                "stopped_at_slit": count(StopReason::Slit),
                "stopped_inside": count(StopReason::Inner),
                "path_end": count(StopReason::PathEnd),
                "target_arc_fraction": Proportion::new(in_target, ok.len(), 0.95),
            }),
        );
        report.records.push(json!({ "ensemble": label, "tips": ok, "failures": failures }));
        angles.push(ok.iter().map(|s| s.angle).collect::<Vec<f64>>());
    }
    let ks = ks_two_sample(&angles[0], &angles[1])?;
    report.summarize("ks", ks);
    report.check("ks_p_value", ks.p_value, "significance", ks.p_value >= opts.significance);
    Ok(report)
}
