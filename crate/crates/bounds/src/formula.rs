use std::fmt;
use std::str::FromStr;

use masim_tasks::TaskKind;
use serde::{Deserialize, Serialize};

use crate::BoundsError;

/// Task family as it appears in the bound table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundFamily {
    Recall,
    StateTracking,
    KHop,
}

impl BoundFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundFamily::Recall => "recall",
            BoundFamily::StateTracking => "state-tracking",
            BoundFamily::KHop => "khop",
        }
    }
}

impl From<TaskKind> for BoundFamily {
    fn from(kind: TaskKind) -> Self {
        match kind {
            TaskKind::Recall => BoundFamily::Recall,
            TaskKind::Parity | TaskKind::S5 => BoundFamily::StateTracking,
            TaskKind::KHop => BoundFamily::KHop,
        }
    }
}

impl fmt::Display for BoundFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundFamily {
    type Err = BoundsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "recall" => Ok(BoundFamily::Recall),
            "state-tracking" | "parity" | "s5" => Ok(BoundFamily::StateTracking),
            "khop" | "k-hop" => Ok(BoundFamily::KHop),
            other => Err(BoundsError::UnknownFamily(other.to_string())),
        }
    }
}

/// Multiplicative constant `c >= 1` and additive slack `a >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub c: f64,
    pub a: f64,
}

impl Slack {
    pub const EXACT: Slack = Slack { c: 1.0, a: 0.0 };

    pub fn new(c: f64, a: f64) -> Result<Self, BoundsError> {
        if !(c >= 1.0 && a >= 0.0 && c.is_finite() && a.is_finite()) {
            return Err(BoundsError::InvalidParams(format!("need c >= 1 and a >= 0, got c={c}, a={a}")));
        }
        Ok(Slack { c, a })
    }
}

impl Default for Slack {
    fn default() -> Self {
        Slack::EXACT
    }
}

/// Slack applied to each metric. The formulas already carry the concrete
/// constants of the role programs, so the defaults are exact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub size: Slack,
    pub depth: Slack,
    pub comm: Slack,
}

/// How a bound is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// `O(.)`: upper side only.
    Upper,
    /// `Θ(.)`: both sides.
    Tight,
}

/// One closed-form bound evaluated at concrete parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub kind: Kind,
    /// Human-readable form of the upper formula.
    pub expr: String,
    pub upper: f64,
    /// Lower formula, present for tight bounds.
    pub lower: Option<f64>,
    pub slack: Slack,
}

impl Bound {
    fn upper(expr: impl Into<String>, upper: f64, slack: Slack) -> Self {
        Bound { kind: Kind::Upper, expr: expr.into(), upper, lower: None, slack }
    }

    fn tight(expr: impl Into<String>, lower: f64, upper: f64, slack: Slack) -> Self {
        Bound { kind: Kind::Tight, expr: expr.into(), upper, lower: Some(lower), slack }
    }

    /// `c * upper + a`.
    pub fn upper_limit(&self) -> f64 {
        self.slack.c * self.upper + self.slack.a
    }

    /// `lower / c - a`, or `None` for one-sided bounds.
    pub fn lower_limit(&self) -> Option<f64> {
        self.lower.map(|l| l / self.slack.c - self.slack.a)
    }

    pub fn admits(&self, measured: f64) -> bool {
        measured <= self.upper_limit() && self.lower_limit().is_none_or(|l| measured >= l)
    }
}

/// Parameters a bound is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    pub w: usize,
    pub k: usize,
    pub b: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub family: BoundFamily,
    pub params: BoundParams,
    pub size: Bound,
    pub depth: Bound,
    pub comm: Bound,
}

/// Smallest `r` with `b^r >= w`.
pub fn ceil_log(b: usize, w: usize) -> usize {
    let mut r = 0;
    let mut reach = 1usize;
    while reach < w {
        reach = reach.saturating_mul(b);
        r += 1;
    }
    r
}

/// Bound formulas for one family at default constants.
///
/// * recall (broadcast, answering worker only): size in `[w, 2w+4]`,
///   depth in `[1, 4]`, comm exactly `[w > 1]`.
/// * state tracking (prefix sum): size in `[N, N + ceil(w(b+4)/2) + b ceil(log_b w)]`,
///   depth in `[ceil(N/w) - 1, ceil(N/w) + b ceil(log_b w) + 2]`, comm exactly `w - 1`.
/// * k-hop (iterative query): size at most `w(2k+2)`, depth at most `3k+2`,
///   comm exactly `2k` for `w > 1` and 0 otherwise.
pub fn table1_bounds(family: BoundFamily, n: usize, w: usize, k: usize, b: usize) -> Result<BoundSpec, BoundsError> {
    table1_bounds_with(family, BoundParams { n, w, k, b }, BoundConstants::default())
}

pub fn table1_bounds_with(
    family: BoundFamily,
    params: BoundParams,
    constants: BoundConstants,
) -> Result<BoundSpec, BoundsError> {
    let BoundParams { n, w, k, b } = params;
    let bad = |m: String| Err(BoundsError::InvalidParams(m));
    if n == 0 || w == 0 {
        return bad(format!("need N >= 1 and w >= 1, got N={n}, w={w}"));
    }
    let f = |x: usize| x as f64;
    let (size, depth, comm) = match family {
        BoundFamily::Recall => {
            let comm = f(usize::from(w > 1));
            (
                Bound::tight("2w+4", f(w), f(2 * w + 4), constants.size),
                Bound::tight("4", 1.0, 4.0, constants.depth),
                Bound::tight("[w>1]", comm, comm, constants.comm),
            )
        }
        BoundFamily::StateTracking => {
            if w > n {
                return bad(format!("width {w} exceeds input length {n}"));
            }
            if b < 2 && w > 1 {
                return bad(format!("branching factor must be at least 2, got {b}"));
            }
            let rounds = if w > 1 { ceil_log(b, w) } else { 0 };
            let per = n.div_ceil(w);
            (
                Bound::tight(
                    "N+ceil(w(b+4)/2)+b*ceil(log_b w)",
                    f(n),
                    f(n + (w * (b + 4)).div_ceil(2) + b * rounds),
                    constants.size,
                ),
                Bound::tight("ceil(N/w)+b*ceil(log_b w)+2", f(per.saturating_sub(1)), f(per + b * rounds + 2), constants.depth),
                Bound::tight("w-1", f(w - 1), f(w - 1), constants.comm),
            )
        }
        BoundFamily::KHop => {
            if k == 0 {
                return bad("k-hop bounds need k >= 1".into());
            }
            let comm = if w > 1 { f(2 * k) } else { 0.0 };
            (
                Bound::upper("w(2k+2)", f(w * (2 * k + 2)), constants.size),
                Bound::upper("3k+2", f(3 * k + 2), constants.depth),
                Bound::tight("2k[w>1]", comm, comm, constants.comm),
            )
        }
    };
    Ok(BoundSpec { family, params, size, depth, comm })
}
