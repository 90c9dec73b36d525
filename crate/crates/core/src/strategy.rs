//! Per-robot decision logic.
//!
//! A robot only knows its own odometry, its mode and what it has met so far.
//! Everything here is a function of that local state plus the stimulus (a
//! coin flip at round start, or the mode of a robot it is touching); global
//! positions live in the engine.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::{ExpansionSchedule, Phase};

pub type RobotId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Left => -1.0,
            Direction::Right => 1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    fn slot(self) -> usize {
        match self {
            Direction::Left => 0,
            Direction::Right => 1,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Direction::Left => 'L',
            Direction::Right => 'R',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Single,
    BoundaryT,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyState {
    pub robot_id: RobotId,
    pub mode: Mode,
    pub round: u32,
    pub phase: Phase,
    /// First direction of the current round.
    pub dir1: Option<Direction>,
    /// Deterministic direction, fixed at the first single-single meeting.
    pub dir_d: Option<Direction>,
    /// `[left, right]`
    pub directions_met: [bool; 2],
    pub stuck_to: Option<RobotId>,
    /// Round-0 start position; legs are planned relative to it.
    pub origin: f64,
    pub coins_consumed: u32,
}

/// What a robot senses when it touches another group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Encounter {
    pub other_mode: Mode,
    /// Side on which the other robot lies.
    pub side: Direction,
    /// Robots in both touching groups together.
    pub combined_size: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    WaitUntilPhaseEnd,
    StickToOther,
    CollectOtherAndContinue,
    BecomeInternalAndWait,
    DeclareRendezvous,
    BreakAndWait,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeetingOutcome {
    pub new_mode: Mode,
    pub action: Action,
    pub new_dir_d: Option<Direction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub next: StrategyState,
    pub outcome: MeetingOutcome,
}

impl StrategyState {
    pub fn new(robot_id: RobotId, origin: f64) -> Self {
        Self {
            robot_id,
            mode: Mode::Single,
            round: 0,
            phase: Phase::Phase1,
            dir1: None,
            dir_d: None,
            directions_met: [false; 2],
            stuck_to: None,
            origin,
            coins_consumed: 0,
        }
    }

    pub fn has_met(&self, side: Direction) -> bool {
        self.directions_met[side.slot()]
    }

    fn mark_met(&mut self, side: Direction) {
        self.directions_met[side.slot()] = true;
    }

    /// A free agent moves under its own plan: a non-stuck Single or a
    /// boundary robot.
    pub fn is_free_agent(&self) -> bool {
        self.stuck_to.is_none() && self.mode != Mode::Internal
    }

    /// Round start. Singles toss a coin, boundary robots reuse `dir_d`,
    /// internal and stuck robots stay put (`None`).
    pub fn choose_round_direction(
        &mut self,
        round: u32,
        coins: &mut CoinSource,
    ) -> Option<Direction> {
        self.round = round;
        self.phase = Phase::Phase1;
        if !self.is_free_agent() {
            return None;
        }
        let dir = match self.mode {
            Mode::Single => {
                self.coins_consumed += 1;
                coins.flip(self.robot_id, round)
            }
            Mode::BoundaryT => self.dir_d.expect("boundary robot without dir_d"),
            Mode::Internal => unreachable!(),
        };
        self.dir1 = Some(dir);
        Some(dir)
    }

    /// Outcome of touching another group, following the meeting table of the
    /// algorithm. Internal robots never initiate a meeting.
    pub fn react_to_meeting(&self, enc: &Encounter) -> Result<Reaction> {
        let mut next = self.clone();
        let (action, new_dir_d) = match (self.mode, enc.other_mode) {
            (Mode::Internal, _) => {
                return Err(Error::Contract(format!(
                    "internal robot {} asked to react to a meeting",
                    self.robot_id
                )))
            }
            (Mode::Single, Mode::Single) => {
                // Away from the partner: in phase 1 that is the opposite of
                // dir1, in phase 2 it is dir1 itself.
                let away = enc.side.opposite();
                next.mode = Mode::BoundaryT;
                next.dir_d = Some(away);
                next.mark_met(enc.side);
                (Action::WaitUntilPhaseEnd, Some(away))
            }
            // Meeting an internal robot is unreachable while the invariants
            // hold; a single that does touch one parks with it.
            (Mode::Single, Mode::BoundaryT | Mode::Internal) => {
                next.mark_met(enc.side);
                (Action::StickToOther, None)
            }
            (Mode::BoundaryT, Mode::Single | Mode::Internal) => {
                (Action::CollectOtherAndContinue, None)
            }
            (Mode::BoundaryT, Mode::BoundaryT) => {
                if !self.has_met(enc.side) {
                    next.mark_met(enc.side);
                    next.mode = Mode::Internal;
                    (Action::BecomeInternalAndWait, None)
                } else if enc.combined_size >= enc.n {
                    (Action::DeclareRendezvous, None)
                } else {
                    (Action::BreakAndWait, None)
                }
            }
        };
        Ok(Reaction {
            outcome: MeetingOutcome {
                new_mode: next.mode,
                action,
                new_dir_d,
            },
            next,
        })
    }

    /// Absolute target of the current phase's leg: `origin + dir1 * f(2i)` in
    /// phase 1, `origin - dir1 * f(2i+1)` in phase 2.
    pub fn plan_leg(&self, sched: &ExpansionSchedule, phase: Phase) -> Result<(f64, Direction)> {
        if !self.is_free_agent() {
            return Err(Error::Contract(format!(
                "robot {} has no leg of its own ({:?}, stuck_to {:?})",
                self.robot_id, self.mode, self.stuck_to
            )));
        }
        let dir1 = self.dir1.ok_or_else(|| {
            Error::Contract(format!(
                "robot {} planned before round start",
                self.robot_id
            ))
        })?;
        let i = self.round as i64;
        Ok(match phase {
            Phase::Phase1 => (self.origin + dir1.sign() * sched.f(2 * i), dir1),
            Phase::Phase2 => (
                self.origin - dir1.sign() * sched.f(2 * i + 1),
                dir1.opposite(),
            ),
        })
    }
}

/// Per-robot, per-round coin flips. Heads moves right first, tails left.
#[derive(Debug, Clone)]
pub enum CoinSource {
    Seeded(SeededCoins),
    Script(CoinScript),
}

impl CoinSource {
    pub fn seeded(seed: u64) -> Self {
        CoinSource::Seeded(SeededCoins::new(seed))
    }

    pub fn script(script: CoinScript) -> Self {
        CoinSource::Script(script)
    }

    pub fn flip(&mut self, robot: RobotId, round: u32) -> Direction {
        match self {
            CoinSource::Seeded(s) => s.flip(robot),
            CoinSource::Script(s) => s
                .get(robot, round)
                .unwrap_or_else(|| panic!("script has no flip for robot {robot} round {round}")),
        }
    }

    /// Rounds covered by a script; `None` for an unbounded seeded stream.
    pub fn horizon(&self) -> Option<u32> {
        match self {
            CoinSource::Seeded(_) => None,
            CoinSource::Script(s) => Some(s.rounds() as u32),
        }
    }

    pub fn robots(&self) -> Option<usize> {
        match self {
            CoinSource::Seeded(_) => None,
            CoinSource::Script(s) => Some(s.robots()),
        }
    }
}

/// One ChaCha stream per robot, keyed by the shared seed. A robot's k-th flip
/// is the k-th output of its own stream, so flips do not depend on how the
/// other robots consume theirs.
#[derive(Debug, Clone)]
pub struct SeededCoins {
    seed: u64,
    streams: Vec<ChaCha8Rng>,
}

impl SeededCoins {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            streams: Vec::new(),
        }
    }

    fn flip(&mut self, robot: RobotId) -> Direction {
        while self.streams.len() <= robot {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(self.streams.len() as u64);
            self.streams.push(rng);
        }
        if self.streams[robot].random::<bool>() {
            Direction::Right
        } else {
            Direction::Left
        }
    }
}

/// Text script: one line per robot, one `R`/`L` per round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinScript {
    rows: Vec<Vec<Direction>>,
}

impl CoinScript {
    pub fn new(rows: Vec<Vec<Direction>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Script("no robots".into()));
        }
        let width = rows[0].len();
        if let Some(j) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::Script(format!(
                "line {} has {} flips, expected {width}",
                j + 1,
                rows[j].len()
            )));
        }
        Ok(Self { rows })
    }

    /// Every robot tosses `dir` in every round.
    pub fn uniform(robots: usize, rounds: usize, dir: Direction) -> Self {
        Self {
            rows: vec![vec![dir; rounds]; robots],
        }
    }

    /// Script number `index` of the product space `{L,R}^(robots x rounds)`:
    /// bit `j * rounds + i` set means robot `j` tosses `R` in round `i`.
    pub fn from_index(robots: usize, rounds: usize, index: u64) -> Self {
        let rows = (0..robots)
            .map(|j| {
                (0..rounds)
                    .map(|i| {
                        if index >> (j * rounds + i) & 1 == 1 {
                            Direction::Right
                        } else {
                            Direction::Left
                        }
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .chars()
                .map(|c| match c {
                    'R' => Ok(Direction::Right),
                    'L' => Ok(Direction::Left),
                    other => Err(Error::Script(format!(
                        "line {}: unexpected character {other:?}",
                        lineno + 1
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(rows)
    }

    pub fn robots(&self) -> usize {
        self.rows.len()
    }

    pub fn rounds(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, robot: RobotId, round: u32) -> Option<Direction> {
        self.rows.get(robot)?.get(round as usize).copied()
    }
}

impl fmt::Display for CoinScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let line: String = row.iter().map(|d| d.as_char()).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}
