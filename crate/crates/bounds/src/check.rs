use masim_core::Metrics;
use masim_protocols::{Family, ProtocolSpec, RunResult};
use serde::{Deserialize, Serialize};

use crate::{Bound, BoundFamily, BoundSpec, BoundsError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Within,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricCheck {
    pub measured: usize,
    pub bound: Bound,
    pub verdict: Verdict,
    /// `measured / (c * upper + a)`; 0 when the limit is 0 and nothing was measured.
    pub margin: f64,
}

impl MetricCheck {
    fn new(measured: usize, bound: &Bound) -> Self {
        let x = measured as f64;
        let limit = bound.upper_limit();
        let margin = if limit > 0.0 {
            x / limit
        } else if measured == 0 {
            0.0
        } else {
            f64::INFINITY
        };
        let verdict = if bound.admits(x) { Verdict::Within } else { Verdict::Violated };
        MetricCheck { measured, bound: bound.clone(), verdict, margin }
    }

    pub fn within(&self) -> bool {
        self.verdict == Verdict::Within
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub spec: BoundSpec,
    pub protocol: ProtocolSpec,
    pub measured: Metrics,
    pub size: MetricCheck,
    pub depth: MetricCheck,
    pub comm: MetricCheck,
    /// `size <= width * (depth + 1)`.
    pub depth_size_inequality: bool,
}

impl BoundReport {
    pub fn all_within(&self) -> bool {
        self.size.within() && self.depth.within() && self.comm.within() && self.depth_size_inequality
    }

    /// Names of the failed checks.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, c) in [("size", &self.size), ("depth", &self.depth), ("comm", &self.comm)] {
            if !c.within() {
                out.push(name);
            }
        }
        if !self.depth_size_inequality {
            out.push("depth-size");
        }
        out
    }
}

/// The bound family a protocol run is measured against, if any.
pub fn bound_family(spec: &ProtocolSpec) -> Option<BoundFamily> {
    match spec.family {
        Family::RecallBroadcast if spec.theory_variant => Some(BoundFamily::Recall),
        Family::PrefixSum => Some(BoundFamily::StateTracking),
        Family::IterativeQuery => Some(BoundFamily::KHop),
        _ => None,
    }
}

/// Checks a run's metrics against `spec`.
pub fn check(run: &RunResult, spec: &BoundSpec) -> Result<BoundReport, BoundsError> {
    check_metrics(&run.spec, &run.metrics, spec)
}

/// As [`check`], for metrics measured elsewhere.
pub fn check_metrics(protocol: &ProtocolSpec, measured: &Metrics, spec: &BoundSpec) -> Result<BoundReport, BoundsError> {
    if bound_family(protocol) != Some(spec.family) {
        return Err(BoundsError::FamilyMismatch { protocol: protocol.to_string(), family: spec.family });
    }
    if protocol.width != spec.params.w {
        return Err(BoundsError::FamilyMismatch { protocol: protocol.to_string(), family: spec.family });
    }
    Ok(BoundReport {
        spec: spec.clone(),
        protocol: *protocol,
        measured: *measured,
        size: MetricCheck::new(measured.size, &spec.size),
        depth: MetricCheck::new(measured.depth, &spec.depth),
        comm: MetricCheck::new(measured.comm_budget, &spec.comm),
        depth_size_inequality: measured.satisfies_depth_size_inequality(),
    })
}
