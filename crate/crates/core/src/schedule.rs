//! Expansion radii and per-round phase geometry.
//!
//! Every robot follows the same geometric sequence `f(-1) = 0`, `f(i) = r^i`.
//! In round `i` a robot first sweeps out to distance `f(2i)` on one side of
//! its origin and then to `f(2i+1)` on the other side. The phase durations
//! are the longest leg either sweep can require, so every robot crosses
//! phase boundaries at the same global time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radii are cached up to this index; beyond it they are extended on demand
/// with the same multiplication chain.
const CACHED_RADII: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    Phase1,
    Phase2,
}

impl Phase {
    pub fn index(self) -> u8 {
        match self {
            Phase::Phase1 => 1,
            Phase::Phase2 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionSchedule {
    r: f64,
    radii: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGeometry {
    pub round: u32,
    pub phase: Phase,
    pub duration: f64,
    pub max_leg: f64,
    pub min_leg: f64,
}

impl ExpansionSchedule {
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r <= 1.0 {
            return Err(Error::InvalidRadius(r));
        }
        let mut radii = Vec::with_capacity(CACHED_RADII);
        let mut f = 1.0;
        for _ in 0..CACHED_RADII {
            radii.push(f);
            f *= r;
        }
        Ok(Self { r, radii })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `f(i)`: 0 for `i = -1`, `r^i` for `i >= 0`.
    pub fn radius(&self, i: i64) -> Result<f64> {
        match i {
            -1 => Ok(0.0),
            i if i < -1 => Err(Error::IndexOutOfDomain(i)),
            i => Ok(self.radius_unchecked(i as usize)),
        }
    }

    fn radius_unchecked(&self, i: usize) -> f64 {
        if let Some(&f) = self.radii.get(i) {
            return f;
        }
        let mut f = *self.radii.last().expect("cache is never empty");
        for _ in self.radii.len() - 1..i {
            f *= self.r;
        }
        f
    }

    /// Infallible `f` for indices the engine and strategy produce (`2i - 1`
    /// with `i >= 0` is always `>= -1`).
    pub(crate) fn f(&self, i: i64) -> f64 {
        self.radius(i).expect("schedule index below -1")
    }

    pub fn phase_duration(&self, round: u32, phase: Phase) -> f64 {
        let i = round as i64;
        match phase {
            Phase::Phase1 => self.f(2 * i) + self.f(2 * i - 1),
            Phase::Phase2 => self.f(2 * i) + self.f(2 * i + 1),
        }
    }

    /// Distance covered by a robot that completes its leg without meeting
    /// anyone. `direction_repeated` is whether the phase-1 direction equals the
    /// previous round's phase-1 direction; it is ignored for phase 2.
    pub fn leg_distance(&self, round: u32, phase: Phase, direction_repeated: bool) -> f64 {
        let i = round as i64;
        match phase {
            Phase::Phase1 if direction_repeated => self.f(2 * i) + self.f(2 * i - 1),
            Phase::Phase1 => self.f(2 * i) - self.f(2 * i - 1),
            Phase::Phase2 => self.f(2 * i) + self.f(2 * i + 1),
        }
    }

    pub fn geometry(&self, round: u32, phase: Phase) -> PhaseGeometry {
        let (max_leg, min_leg) = match phase {
            Phase::Phase1 => (
                self.leg_distance(round, phase, true),
                self.leg_distance(round, phase, false),
            ),
            Phase::Phase2 => {
                let leg = self.leg_distance(round, phase, false);
                (leg, leg)
            }
        };
        PhaseGeometry {
            round,
            phase,
            duration: self.phase_duration(round, phase),
            max_leg,
            min_leg,
        }
    }

    /// Total length of round `i` when the phase-1 direction repeats, the
    /// longer of the two possible itineraries.
    pub fn max_round_distance(&self, round: u32) -> f64 {
        self.phase_duration(round, Phase::Phase1) + self.phase_duration(round, Phase::Phase2)
    }

    /// Whether round `i` satisfies `f(2i+1) >= d + f(2i-1)`: the sweep of the
    /// leftmost robot reaches any meeting locus up to `f(2i-1)` past the
    /// rightmost robot.
    pub fn round_is_feasible(&self, round: u32, d: f64) -> bool {
        let i = round as i64;
        self.f(2 * i + 1) >= d + self.f(2 * i - 1)
    }
}
