//! Closed-form expected-distance bounds and the resulting competitive ratio.
//!
//! With `d = r^(k + delta)`, the analysis splits the execution at round
//! `alpha = k/2 + i*`, the first round whose sweep is long enough for any
//! adjacent pair to meet. Before it (stage 1) every round is charged in full;
//! from it on (stage 2) a round succeeds with probability `(2^n - 2) / 2^n`
//! and success forces rendezvous in the following round.
//!
//! Lengths below are reported as coefficients of `r^k`; at `delta = 0` that is
//! the coefficient of `d`, where the ratio is worst.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the truncated tail of the stage-2 series.
pub const SERIES_TAIL_TOLERANCE: f64 = 1e-12;

/// Number of robots, or the `n -> infinity` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    Finite(u32),
    Unbounded,
}

impl fmt::Display for Population {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Population::Finite(n) => write!(f, "{n}"),
            Population::Unbounded => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Population {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "unbounded" => Ok(Population::Unbounded),
            other => other
                .parse::<u32>()
                .map(Population::Finite)
                .map_err(|_| Error::Domain(format!("not a robot count: {s:?}"))),
        }
    }
}

impl Population {
    /// Probability that nobody meets in a round: all coins equal, `2 / 2^n`.
    fn all_same_probability(self) -> f64 {
        match self {
            Population::Finite(n) => 0.5f64.powi(n as i32 - 1),
            Population::Unbounded => 0.0,
        }
    }
}

fn check_r(r: f64) -> Result<()> {
    if !r.is_finite() || r <= 1.0 {
        return Err(Error::InvalidRadius(r));
    }
    Ok(())
}

/// `1 + ceil(|log_{r^2}(r^2 - 1)|)`.
///
/// The logarithm is snapped to the nearest integer when within `1e-9` of it,
/// so that `r = sqrt(2)` (where it is exactly 0) is not pushed to the next
/// step by rounding in `r * r`.
pub fn i_star(r: f64) -> Result<u32> {
    check_r(r)?;
    let r2 = r * r;
    let x = ((r2 - 1.0).ln() / r2.ln()).abs();
    let steps = if (x - x.round()).abs() <= 1e-9 {
        x.round()
    } else {
        x.ceil()
    };
    Ok(1 + steps as u32)
}

/// `k/2 + i*`; may be a half-integer.
pub fn alpha(k: u32, r: f64) -> Result<f64> {
    Ok(k as f64 / 2.0 + i_star(r)? as f64)
}

/// Probability that at least one adjacent single pair meets in a round where
/// every pair can reach its meeting point: `(2^n - 2) / 2^n`.
pub fn p_meet(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("p_meet needs n >= 2, got {n}")));
    }
    Ok(1.0 - Population::Finite(n).all_same_probability())
}

fn p_meet_pop(pop: Population) -> Result<f64> {
    match pop {
        Population::Finite(n) => p_meet(n),
        Population::Unbounded => Ok(1.0),
    }
}

/// Probability that the algorithm is still running in round `i`: 1 before
/// `alpha`, then `(2 / 2^n)^(i - alpha + 1)`.
pub fn p_active(i: f64, alpha: f64, pop: Population) -> f64 {
    if i < alpha {
        1.0
    } else {
        pop.all_same_probability().powf(i - alpha + 1.0)
    }
}

/// `f(2i+1) + 2 f(2i) + f(2i-1) = r^(2i) (r + 2 + 1/r)`: the longest round.
fn round_distance_bound(r: f64, i: f64) -> f64 {
    r.powf(2.0 * i) * (r + 2.0 + 1.0 / r)
}

/// Rounds `i` and `i + 1` back to back: `r^(2i) (r^3 + 2r^2 + 2r + 1/r + 2)`.
fn successful_round_distance_bound(r: f64, i: f64) -> f64 {
    round_distance_bound(r, i) + round_distance_bound(r, i + 1.0)
}

/// Expected distance before round `alpha`:
/// `r^(k + 2 i*) (r + 2 + 1/r) / (r^2 - 1)`.
pub fn stage1_bound(r: f64, k: u32) -> Result<f64> {
    let istar = i_star(r)?;
    Ok(r.powi((k + 2 * istar) as i32) * (r + 2.0 + 1.0 / r) / (r * r - 1.0))
}

/// Three-robot closed form of the stage-2 bound:
/// `r^(k + 2 i*) (0.75 r^3 + 1.5 r^2 + 1.75 r + 1/r + 2) / (4 - r^2)`.
pub fn stage2_closed_form(r: f64, k: u32) -> Result<f64> {
    let istar = i_star(r)?;
    if r >= 2.0 {
        return Err(Error::Domain(format!(
            "stage-2 series diverges for n = 3 at r = {r}"
        )));
    }
    let num = 0.75 * r.powi(3) + 1.5 * r * r + 1.75 * r + 1.0 / r + 2.0;
    Ok(r.powi((k + 2 * istar) as i32) * num / (4.0 - r * r))
}

/// Stage-2 bound for any population, summed term by term:
/// `sum_{i >= alpha} [E[D | no meet] P[no meet] + E[D | meet] P[meet]] P[active_i]`.
pub fn stage2_series(r: f64, k: u32, pop: Population) -> Result<f64> {
    let alpha = alpha(k, r)?;
    let q = pop.all_same_probability();
    let ratio = q * r * r;
    if ratio >= 1.0 {
        return Err(Error::Domain(format!(
            "stage-2 series diverges: r^2 * 2/2^n = {ratio} >= 1"
        )));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    let p = p_meet_pop(pop)?;
    // Sum with r^k factored out, then scale, so the tail tolerance applies to
    // the coefficient.
    let alpha0 = alpha - k as f64 / 2.0;
    let mut sum = 0.0;
    let mut m = 0u32;
    loop {
        let i = alpha0 + m as f64;
        let term = (round_distance_bound(r, i) * (1.0 - p)
            + successful_round_distance_bound(r, i) * p)
            * p_active(i, alpha0, pop);
        sum += term;
        m += 1;
        // Terms shrink geometrically by `ratio`.
        if term * ratio / (1.0 - ratio) < SERIES_TAIL_TOLERANCE || m > 1_000_000 {
            break;
        }
    }
    Ok(r.powi(k as i32) * sum)
}

/// Stage-2 bound: the closed form for three robots, the series otherwise.
pub fn stage2_bound(r: f64, k: u32, pop: Population) -> Result<f64> {
    match pop {
        Population::Finite(3) => stage2_closed_form(r, k),
        Population::Finite(n) if n < 3 => Err(Error::Domain(format!("need n > 2, got {n}"))),
        _ => stage2_series(r, k, pop),
    }
}

/// Expected distance over the offline cost `d/2`, at the worst offset
/// `delta = 0`.
pub fn competitive_ratio(r: f64, pop: Population) -> Result<f64> {
    Ok(2.0 * (stage1_bound(r, 0)? + stage2_bound(r, 0, pop)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsInput {
    pub r: f64,
    pub n: Population,
    pub k: u32,
    pub delta: f64,
}

impl BoundsInput {
    pub fn new(r: f64, n: Population) -> Self {
        Self {
            r,
            n,
            k: 0,
            delta: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub r: f64,
    pub n: Population,
    pub k: u32,
    pub delta: f64,
    pub d: f64,
    pub i_star: u32,
    pub alpha: f64,
    pub p_meet: f64,
    pub stage1: f64,
    pub stage2: f64,
    pub expected_total: f64,
    /// `r^k * expected_total`: the bound on expected distance for this `d`.
    pub expected_distance: f64,
    pub competitive_ratio: f64,
    pub asymptotic_ratio: f64,
    /// Ratio at the given `delta` rather than the worst case.
    pub ratio_at_delta: f64,
}

pub fn report(input: &BoundsInput) -> Result<BoundsReport> {
    let BoundsInput { r, n, k, delta } = *input;
    check_r(r)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    if let Population::Finite(m) = n {
        if m <= 2 {
            return Err(Error::Domain(format!("need n > 2, got {m}")));
        }
    }
    let stage1 = stage1_bound(r, 0)?;
    let stage2 = stage2_bound(r, 0, n)?;
    let total = stage1 + stage2;
    Ok(BoundsReport {
        r,
        n,
        k,
        delta,
        d: r.powf(k as f64 + delta),
        i_star: i_star(r)?,
        alpha: alpha(k, r)?,
        p_meet: p_meet_pop(n)?,
        stage1,
        stage2,
        expected_total: total,
        expected_distance: r.powi(k as i32) * total,
        competitive_ratio: 2.0 * total,
        asymptotic_ratio: 2.0 * stage1,
        ratio_at_delta: 2.0 * total * r.powf(-delta),
    })
}

impl BoundsReport {
    pub fn to_text(&self) -> String {
        let rows: [(&str, String); 15] = [
            ("r", format!("{}", self.r)),
            ("n", self.n.to_string()),
            ("k", self.k.to_string()),
            ("delta", format!("{}", self.delta)),
            ("d", format!("{:.6}", self.d)),
            ("i_star", self.i_star.to_string()),
            ("alpha", format!("{}", self.alpha)),
            ("p_meet", format!("{:.9}", self.p_meet)),
            ("stage1", format!("{:.6}", self.stage1)),
            ("stage2", format!("{:.6}", self.stage2)),
            ("expected_total", format!("{:.6}", self.expected_total)),
            (
                "expected_distance",
                format!("{:.6}", self.expected_distance),
            ),
            (
                "competitive_ratio",
                format!("{:.6}", self.competitive_ratio),
            ),
            ("asymptotic_ratio", format!("{:.6}", self.asymptotic_ratio)),
            ("ratio_at_delta", format!("{:.6}", self.ratio_at_delta)),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter()
            .map(|(k, v)| format!("{k:<width$}  {v}\n"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint {
    pub r: f64,
    pub i_star: u32,
    pub ratio: f64,
}

/// Where `i*` jumps between two neighbouring grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IStarStep {
    pub r_before: f64,
    pub r_after: f64,
    pub i_star_before: u32,
    pub i_star_after: u32,
}

/// Best grid point within one run of constant `i*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauMinimum {
    pub i_star: u32,
    pub r_lo: f64,
    pub r_hi: f64,
    pub best: LandscapePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub n: Population,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub r_star: f64,
    pub ratio_star: f64,
    pub i_star_at_optimum: u32,
    pub local_minima: Vec<LandscapePoint>,
    pub i_star_steps: Vec<IStarStep>,
    pub plateaus: Vec<PlateauMinimum>,
    pub probe: Option<LandscapePoint>,
    pub landscape: Vec<LandscapePoint>,
}

fn evaluate(r: f64, pop: Population) -> Result<LandscapePoint> {
    Ok(LandscapePoint {
        r,
        i_star: i_star(r)?,
        ratio: competitive_ratio(r, pop)?,
    })
}

/// Grid search of the competitive ratio over `r in [lo, hi]`. The objective
/// is piecewise smooth (it jumps wherever `i*` does), so the report carries
/// every local minimum, every `i*` step and the best point of each plateau
/// alongside the global one. `probe`, if given, is evaluated off-grid too.
pub fn optimize_r(
    lo: f64,
    hi: f64,
    step: f64,
    pop: Population,
    probe: Option<f64>,
) -> Result<OptimizeReport> {
    if !(lo > 1.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "need 1 < lo <= hi, got [{lo}, {hi}]"
        )));
    }
    if step.is_nan() || step <= 0.0 {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let landscape = (0..count)
        .map(|j| {
            let r = ((lo + j as f64 * step) * 1e12).round() / 1e12;
            evaluate(r, pop)
        })
        .collect::<Result<Vec<_>>>()?;

    let best = landscape
        .iter()
        .copied()
        .fold(landscape[0], |a, b| if b.ratio < a.ratio { b } else { a });

    let local_minima = (0..landscape.len())
        .filter(|&j| {
            let here = landscape[j].ratio;
            let left_ok = j == 0 || here < landscape[j - 1].ratio;
            let right_ok = j + 1 == landscape.len() || here < landscape[j + 1].ratio;
            left_ok && right_ok
        })
        .map(|j| landscape[j])
        .collect();

    let i_star_steps = landscape
        .windows(2)
        .filter(|w| w[0].i_star != w[1].i_star)
        .map(|w| IStarStep {
            r_before: w[0].r,
            r_after: w[1].r,
            i_star_before: w[0].i_star,
            i_star_after: w[1].i_star,
        })
        .collect();

    let mut plateaus: Vec<PlateauMinimum> = Vec::new();
    for p in &landscape {
        match plateaus.last_mut() {
            Some(last) if last.i_star == p.i_star => {
                last.r_hi = p.r;
                if p.ratio < last.best.ratio {
                    last.best = *p;
                }
            }
            _ => plateaus.push(PlateauMinimum {
                i_star: p.i_star,
                r_lo: p.r,
                r_hi: p.r,
                best: *p,
            }),
        }
    }

    Ok(OptimizeReport {
        n: pop,
        lo,
        hi,
        step,
        r_star: best.r,
        ratio_star: best.ratio,
        i_star_at_optimum: best.i_star,
        local_minima,
        i_star_steps,
        plateaus,
        probe: probe.map(|r| evaluate(r, pop)).transpose()?,
        landscape,
    })
}
