//! Synchronized-phase, event-driven simulation of all robots.
//!
//! Within a phase every group moves at unit speed toward its leader's leg
//! target or sits still. Between events all motion is linear, so the next
//! contact time between neighbouring groups is solved exactly; the engine
//! jumps from event to event and never samples time on a grid.
//!
//! Robots never cross, so robot ids sorted by initial position stay sorted by
//! current position. A group is therefore always a contiguous id range and
//! only neighbouring groups can touch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::{ExpansionSchedule, Phase};
use crate::strategy::{Action, CoinSource, Direction, Encounter, Mode, RobotId, StrategyState};

pub const DEFAULT_MAX_ROUNDS: u32 = 60;
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub initial_positions: Vec<f64>,
    pub r: f64,
    pub max_rounds: u32,
    pub epsilon: f64,
}

impl WorldConfig {
    pub fn new(initial_positions: Vec<f64>, r: f64) -> Self {
        Self {
            initial_positions,
            r,
            max_rounds: DEFAULT_MAX_ROUNDS,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// `n` robots spaced evenly over `[0, d]`.
    pub fn equidistant(n: usize, d: f64, r: f64) -> Self {
        let step = if n > 1 { d / (n - 1) as f64 } else { 0.0 };
        let mut xs: Vec<f64> = (0..n).map(|j| j as f64 * step).collect();
        if let Some(last) = xs.last_mut() {
            *last = d;
        }
        Self::new(xs, r)
    }

    pub fn with_max_rounds(mut self, max_rounds: u32) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    pub fn n(&self) -> usize {
        self.initial_positions.len()
    }

    /// Distance between the outermost robots.
    pub fn d(&self) -> f64 {
        match (
            self.initial_positions.first(),
            self.initial_positions.last(),
        ) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n <= 2 {
            return Err(Error::Config(format!("need n > 2 robots, got {n}")));
        }
        if self.initial_positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("positions must be finite".into()));
        }
        if self.initial_positions.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config(
                "positions must be sorted left to right".into(),
            ));
        }
        if self.d() <= 0.0 {
            return Err(Error::Config(
                "outermost robots must be apart (d > 0)".into(),
            ));
        }
        if !self.r.is_finite() || self.r <= 1.0 {
            return Err(Error::InvalidRadius(self.r));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be positive".into()));
        }
        Ok(())
    }
}

/// One touching pair inside a meeting event. `left`/`right` are the robots
/// that reacted: the leader of a moving group, or the outermost member of a
/// parked cluster facing the other group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReaction {
    pub left: RobotId,
    pub right: RobotId,
    pub left_mode: Mode,
    pub right_mode: Mode,
    pub left_action: Option<Action>,
    pub right_action: Option<Action>,
}

impl PairReaction {
    pub fn is_single_single(&self) -> bool {
        self.left_mode == Mode::Single
            && self.right_mode == Mode::Single
            && self.left_action == Some(Action::WaitUntilPhaseEnd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetingEvent {
    pub time: f64,
    pub position: f64,
    pub round: u32,
    pub phase: Phase,
    pub participants: Vec<RobotId>,
    pub reactions: Vec<PairReaction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub time: f64,
    pub round: u32,
    pub phase: Phase,
    pub positions: Vec<f64>,
}

/// Per-robot moving and waiting time within one phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub round: u32,
    pub phase: Phase,
    pub duration: f64,
    pub completed: bool,
    pub moved: Vec<f64>,
    pub waited: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotTotals {
    pub id: RobotId,
    pub distance: f64,
    pub wait: f64,
    pub time: f64,
    pub final_mode: Mode,
    pub coins_consumed: u32,
    pub rounds_single: u32,
}

/// Branches the algorithm leaves underspecified; set when a trace exercised
/// them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFlags {
    pub break_and_wait: bool,
    pub contact_with_waiting_group: bool,
    pub single_met_internal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub initial_positions: Vec<f64>,
    pub r: f64,
    pub epsilon: f64,
    pub rendezvous_achieved: bool,
    pub rendezvous_time: Option<f64>,
    pub rendezvous_position: Option<f64>,
    pub rendezvous_round: Option<u32>,
    pub rendezvous_phase: Option<Phase>,
    pub rounds_used: u32,
    pub end_time: f64,
    pub robots: Vec<RobotTotals>,
    pub events: Vec<MeetingEvent>,
    pub waypoints: Vec<Waypoint>,
    pub phases: Vec<PhaseRecord>,
    pub flags: TraceFlags,
}

impl Trace {
    pub fn n(&self) -> usize {
        self.initial_positions.len()
    }

    pub fn d(&self) -> f64 {
        self.initial_positions.last().unwrap_or(&0.0)
            - self.initial_positions.first().unwrap_or(&0.0)
    }

    pub fn max_distance(&self) -> f64 {
        self.robots.iter().map(|r| r.distance).fold(0.0, f64::max)
    }

    /// Largest distance travelled by any robot over the offline optimum `d/2`.
    pub fn distance_ratio(&self) -> f64 {
        self.max_distance() / (self.d() / 2.0)
    }

    /// Rendezvous clock time over `d/2`; `None` if censored.
    pub fn time_ratio(&self) -> Option<f64> {
        self.rendezvous_time.map(|t| t / (self.d() / 2.0))
    }

    /// Rounds in which a single-single meeting happened.
    pub fn single_meeting_rounds(&self) -> Vec<u32> {
        let mut rounds: Vec<u32> = self
            .events
            .iter()
            .filter(|e| e.reactions.iter().any(PairReaction::is_single_single))
            .map(|e| e.round)
            .collect();
        rounds.dedup();
        rounds
    }

    /// First round `i < checkable_rounds - 1` with a single-single meeting in
    /// a round where `f(2i+1) >= d + f(2i-1)` that was not followed by
    /// rendezvous by the end of round `i + 1`.
    pub fn followup_violation(&self, checkable_rounds: u32) -> Option<u32> {
        let sched = ExpansionSchedule::new(self.r).ok()?;
        let d = self.d();
        self.single_meeting_rounds().into_iter().find(|&i| {
            i + 1 < checkable_rounds
                && sched.round_is_feasible(i, d)
                && !matches!(self.rendezvous_round, Some(rr) if rr <= i + 1)
        })
    }

    /// Checks the structural guarantees of a run: robots never cross, every
    /// completed phase is fully accounted as moving plus waiting, meetings
    /// involve contiguous robots, and a rendezvous leaves everyone within
    /// `epsilon` of one point. Returns a description of the first breach.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let tol = 1e-9;
        for w in &self.waypoints {
            if let Some(i) =
                (1..w.positions.len()).find(|&i| w.positions[i - 1] > w.positions[i] + self.epsilon)
            {
                return Err(format!("robots {} and {i} crossed at t={}", i - 1, w.time));
            }
        }
        for p in self.phases.iter().filter(|p| p.completed) {
            for (j, (m, w)) in p.moved.iter().zip(&p.waited).enumerate() {
                if (m + w - p.duration).abs() > tol {
                    return Err(format!(
                        "robot {j} in round {} {:?}: moved {m} + waited {w} != {}",
                        p.round, p.phase, p.duration
                    ));
                }
            }
        }
        for e in &self.events {
            let ok =
                e.participants.len() >= 2 && e.participants.windows(2).all(|w| w[1] == w[0] + 1);
            if !ok {
                return Err(format!(
                    "non-adjacent meeting at t={}: {:?}",
                    e.time, e.participants
                ));
            }
            if e.reactions.iter().any(|r| r.left >= r.right) {
                return Err(format!("misordered pair at t={}", e.time));
            }
        }
        if self.rendezvous_achieved {
            let last = self
                .waypoints
                .last()
                .ok_or("rendezvous without waypoints")?;
            let lo = last.positions.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = last
                .positions
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            if hi - lo > 2.0 * self.epsilon {
                return Err(format!("rendezvous declared with spread {}", hi - lo));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per robot with its totals.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "robot",
            "initial_position",
            "distance",
            "wait",
            "time",
            "final_mode",
            "coins_consumed",
        ])?;
        for (t, x) in self.robots.iter().zip(&self.initial_positions) {
            w.write_record([
                t.id.to_string(),
                x.to_string(),
                t.distance.to_string(),
                t.wait.to_string(),
                t.time.to_string(),
                format!("{:?}", t.final_mode),
                t.coins_consumed.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Linear motion of one group: `position + velocity * t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub position: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coincidence {
    pub time: f64,
    /// Indices `k` such that trajectories `k` and `k + 1` touch at `time`,
    /// ascending.
    pub pairs: Vec<usize>,
}

/// Earliest `t` in `[0, horizon]` at which two neighbouring trajectories
/// (given left to right) close to within `eps`. Pairs touching within `eps`
/// of that time are reported together.
pub fn detect_next_meeting(
    trajectories: &[Trajectory],
    horizon: f64,
    eps: f64,
) -> Option<Coincidence> {
    let mut hits: Vec<(f64, usize)> = Vec::new();
    for (k, w) in trajectories.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let closing = a.velocity - b.velocity;
        if closing <= 0.0 {
            continue;
        }
        let gap = b.position - a.position;
        let t = if gap <= eps { 0.0 } else { gap / closing };
        if t <= horizon + eps {
            hits.push((t, k));
        }
    }
    let first = hits.iter().map(|h| h.0).fold(f64::INFINITY, f64::min);
    if !first.is_finite() {
        return None;
    }
    let pairs = hits
        .iter()
        .filter(|h| h.0 <= first + eps)
        .map(|h| h.1)
        .collect();
    Some(Coincidence {
        time: first.min(horizon.max(0.0)),
        pairs,
    })
}

#[derive(Debug, Clone)]
struct Group {
    lo: RobotId,
    hi: RobotId,
    /// Free agent steering the group; `None` for a parked cluster of
    /// internal (and stuck) robots.
    leader: Option<RobotId>,
    pos: f64,
    target: Option<f64>,
    waiting: bool,
}

impl Group {
    fn size(&self) -> usize {
        self.hi - self.lo + 1
    }

    fn contains(&self, id: RobotId) -> bool {
        (self.lo..=self.hi).contains(&id)
    }
}

#[derive(Debug, Clone, Copy)]
struct Rendezvous {
    time: f64,
    position: f64,
    round: u32,
    phase: Phase,
}

/// Outcome of advancing one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseStatus {
    Continue,
    Rendezvous,
}

pub struct World {
    config: WorldConfig,
    sched: ExpansionSchedule,
    coins: CoinSource,
    time: f64,
    round: u32,
    phase: Phase,
    robots: Vec<StrategyState>,
    groups: Vec<Group>,
    distance: Vec<f64>,
    wait: Vec<f64>,
    rounds_single: Vec<u32>,
    moved_phase: Vec<f64>,
    waited_phase: Vec<f64>,
    events: Vec<MeetingEvent>,
    waypoints: Vec<Waypoint>,
    phases: Vec<PhaseRecord>,
    rendezvous: Option<Rendezvous>,
    flags: TraceFlags,
}

impl World {
    pub fn new(config: WorldConfig, coins: CoinSource) -> Result<Self> {
        config.validate()?;
        if let Some(k) = coins.robots() {
            if k < config.n() {
                return Err(Error::Config(format!(
                    "script has {k} robot lines, configuration has {}",
                    config.n()
                )));
            }
        }
        let sched = ExpansionSchedule::new(config.r)?;
        let n = config.n();
        let robots = config
            .initial_positions
            .iter()
            .enumerate()
            .map(|(j, &x)| StrategyState::new(j, x))
            .collect();
        let groups = config
            .initial_positions
            .iter()
            .enumerate()
            .map(|(j, &x)| Group {
                lo: j,
                hi: j,
                leader: Some(j),
                pos: x,
                target: None,
                waiting: false,
            })
            .collect();
        let mut world = Self {
            config,
            sched,
            coins,
            time: 0.0,
            round: 0,
            phase: Phase::Phase1,
            robots,
            groups,
            distance: vec![0.0; n],
            wait: vec![0.0; n],
            rounds_single: vec![0; n],
            moved_phase: vec![0.0; n],
            waited_phase: vec![0.0; n],
            events: Vec::new(),
            waypoints: Vec::new(),
            phases: Vec::new(),
            rendezvous: None,
            flags: TraceFlags::default(),
        };
        world.initial_contacts()?;
        Ok(world)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn robots(&self) -> &[StrategyState] {
        &self.robots
    }

    pub fn positions(&self) -> Vec<f64> {
        let mut xs = vec![0.0; self.robots.len()];
        for g in &self.groups {
            for x in &mut xs[g.lo..=g.hi] {
                *x = g.pos;
            }
        }
        xs
    }

    /// Robots sharing a starting point are in contact from `t = 0`.
    fn initial_contacts(&mut self) -> Result<()> {
        let eps = self.config.epsilon;
        let boundaries: Vec<RobotId> = self
            .groups
            .windows(2)
            .filter(|w| w[1].pos - w[0].pos <= eps)
            .map(|w| w[0].hi)
            .collect();
        if !boundaries.is_empty() {
            self.resolve_contacts(boundaries)?;
        }
        Ok(())
    }

    fn rounds_available(&self) -> u32 {
        match self.coins.horizon() {
            Some(h) => h.min(self.config.max_rounds),
            None => self.config.max_rounds,
        }
    }

    pub fn is_finished(&self) -> bool {
        self.rendezvous.is_some() || self.round >= self.rounds_available()
    }

    fn velocity(&self, g: &Group) -> f64 {
        match (g.leader, g.target) {
            (Some(_), Some(target))
                if !g.waiting && (target - g.pos).abs() > self.config.epsilon =>
            {
                (target - g.pos).signum()
            }
            _ => 0.0,
        }
    }

    fn record_waypoint(&mut self) {
        let positions = self.positions();
        self.waypoints.push(Waypoint {
            time: self.time,
            round: self.round,
            phase: self.phase,
            positions,
        });
    }

    /// Runs the current phase to its end (or to rendezvous) and moves the
    /// world to the next phase boundary.
    pub fn step_phase(&mut self) -> Result<PhaseStatus> {
        if self.rendezvous.is_some() {
            return Ok(PhaseStatus::Rendezvous);
        }
        let round = self.round;
        let phase = self.phase;
        let duration = self.sched.phase_duration(round, phase);
        let phase_end = self.time + duration;

        for s in &mut self.robots {
            s.round = round;
            s.phase = phase;
        }
        if phase == Phase::Phase1 {
            for g in &self.groups {
                if let Some(l) = g.leader {
                    if self.robots[l].mode == Mode::Single {
                        self.rounds_single[l] += 1;
                    }
                    self.robots[l].choose_round_direction(round, &mut self.coins);
                }
            }
        }
        for k in 0..self.groups.len() {
            self.groups[k].waiting = false;
            self.groups[k].target = match self.groups[k].leader {
                Some(l) => Some(self.robots[l].plan_leg(&self.sched, phase)?.0),
                None => None,
            };
        }
        self.moved_phase.iter_mut().for_each(|x| *x = 0.0);
        self.waited_phase.iter_mut().for_each(|x| *x = 0.0);
        self.record_waypoint();

        let n = self.robots.len();
        let max_events = 64 + 16 * n * n;
        let mut events = 0usize;
        while self.time < phase_end {
            events += 1;
            assert!(
                events <= max_events,
                "event storm in round {round} {phase:?}"
            );

            let remaining = phase_end - self.time;
            let trajectories: Vec<Trajectory> = self
                .groups
                .iter()
                .map(|g| Trajectory {
                    position: g.pos,
                    velocity: self.velocity(g),
                })
                .collect();
            let mut horizon = remaining;
            for (g, tr) in self.groups.iter().zip(&trajectories) {
                if tr.velocity != 0.0 {
                    horizon = horizon.min((g.target.unwrap() - g.pos).abs());
                }
            }
            match detect_next_meeting(&trajectories, horizon, self.config.epsilon) {
                Some(hit) => {
                    self.advance(hit.time.min(remaining), &trajectories, phase_end);
                    let boundaries = hit.pairs.iter().map(|&k| self.groups[k].hi).collect();
                    self.resolve_contacts(boundaries)?;
                    self.record_waypoint();
                    if self.rendezvous.is_some() {
                        self.close_phase(duration, false);
                        return Ok(PhaseStatus::Rendezvous);
                    }
                }
                None => self.advance(horizon, &trajectories, phase_end),
            }
        }
        self.time = phase_end;
        self.close_phase(duration, true);
        self.record_waypoint();
        match phase {
            Phase::Phase1 => self.phase = Phase::Phase2,
            Phase::Phase2 => {
                self.phase = Phase::Phase1;
                self.round += 1;
            }
        }
        Ok(PhaseStatus::Continue)
    }

    fn close_phase(&mut self, duration: f64, completed: bool) {
        self.phases.push(PhaseRecord {
            round: self.round,
            phase: self.phase,
            duration,
            completed,
            moved: self.moved_phase.clone(),
            waited: self.waited_phase.clone(),
        });
    }

    fn advance(&mut self, dt: f64, trajectories: &[Trajectory], phase_end: f64) {
        let dt = dt.max(0.0);
        let eps = self.config.epsilon;
        for (g, tr) in self.groups.iter_mut().zip(trajectories) {
            let members = g.lo..=g.hi;
            if tr.velocity != 0.0 {
                let target = g.target.unwrap();
                g.pos += tr.velocity * dt;
                if (target - g.pos) * tr.velocity <= eps {
                    g.pos = target;
                }
                for j in members {
                    self.distance[j] += dt;
                    self.moved_phase[j] += dt;
                }
            } else {
                for j in members {
                    self.wait[j] += dt;
                    self.waited_phase[j] += dt;
                }
            }
        }
        self.time += dt;
        if phase_end - self.time <= eps * 1e-3 {
            self.time = phase_end;
        }
        debug_assert!(
            self.groups.windows(2).all(|w| w[0].pos <= w[1].pos + eps),
            "robots crossed at t = {}",
            self.time
        );
    }

    fn group_of(&self, id: RobotId) -> usize {
        self.groups
            .iter()
            .position(|g| g.contains(id))
            .expect("every robot belongs to a group")
    }

    fn group_mode(&self, g: &Group) -> Mode {
        match g.leader {
            Some(l) => self.robots[l].mode,
            None => Mode::Internal,
        }
    }

    /// Handles every contact at the current instant: the detected boundaries
    /// first (left to right), then any contact they cascade into.
    fn resolve_contacts(&mut self, mut boundaries: Vec<RobotId>) -> Result<()> {
        boundaries.sort_unstable();
        boundaries.dedup();
        let eps = self.config.epsilon;
        let mut reactions: Vec<(f64, PairReaction, RobotId, RobotId)> = Vec::new();

        for b in boundaries {
            let (gl, gr) = (self.group_of(b), self.group_of(b + 1));
            if gl != gr {
                reactions.push(self.react_pair(gl)?);
            }
        }
        let guard = 4 * self.robots.len() + 8;
        for _ in 0..guard {
            let next = (0..self.groups.len().saturating_sub(1)).find(|&k| {
                let (a, b) = (&self.groups[k], &self.groups[k + 1]);
                b.pos - a.pos <= eps && self.velocity(a) > self.velocity(b)
            });
            match next {
                Some(k) => reactions.push(self.react_pair(k)?),
                None => break,
            }
        }

        // One event per contact location.
        let mut start = 0;
        while start < reactions.len() {
            let pos = reactions[start].0;
            let mut end = start + 1;
            while end < reactions.len() && (reactions[end].0 - pos).abs() <= eps {
                end += 1;
            }
            let lo = reactions[start..end].iter().map(|r| r.2).min().unwrap();
            let hi = reactions[start..end].iter().map(|r| r.3).max().unwrap();
            self.events.push(MeetingEvent {
                time: self.time,
                position: pos,
                round: self.round,
                phase: self.phase,
                participants: (lo..=hi).collect(),
                reactions: reactions[start..end].iter().map(|r| r.1.clone()).collect(),
            });
            start = end;
        }

        if self.rendezvous.is_none() {
            let first = self.groups.first().unwrap().pos;
            let last = self.groups.last().unwrap().pos;
            if last - first <= eps {
                self.rendezvous = Some(Rendezvous {
                    time: self.time,
                    position: first,
                    round: self.round,
                    phase: self.phase,
                });
            }
        }
        Ok(())
    }

    /// Applies the meeting table to groups `k` and `k + 1`. Returns the
    /// contact position, the reaction summary and the participating id range.
    fn react_pair(&mut self, k: usize) -> Result<(f64, PairReaction, RobotId, RobotId)> {
        let eps = self.config.epsilon;
        let n = self.robots.len();
        let (left, right) = (self.groups[k].clone(), self.groups[k + 1].clone());
        let at = 0.5 * (left.pos + right.pos);
        for g in &mut self.groups {
            if (g.pos - at).abs() <= 2.0 * eps {
                g.pos = at;
            }
        }
        if left.waiting || right.waiting {
            self.flags.contact_with_waiting_group = true;
        }
        let left_mode = self.group_mode(&left);
        let right_mode = self.group_mode(&right);
        let combined = left.size() + right.size();

        let react = |this: &Self, g: &Group, other: Mode, side: Direction| -> Result<Option<_>> {
            match g.leader {
                Some(l) => this.robots[l]
                    .react_to_meeting(&Encounter {
                        other_mode: other,
                        side,
                        combined_size: combined,
                        n,
                    })
                    .map(Some),
                None => Ok(None),
            }
        };
        let lr = react(self, &left, right_mode, Direction::Right)?;
        let rr = react(self, &right, left_mode, Direction::Left)?;

        let summary = PairReaction {
            left: left.leader.unwrap_or(left.hi),
            right: right.leader.unwrap_or(right.lo),
            left_mode,
            right_mode,
            left_action: lr.as_ref().map(|r| r.outcome.action),
            right_action: rr.as_ref().map(|r| r.outcome.action),
        };
        if let Some(r) = &lr {
            self.robots[left.leader.unwrap()] = r.next.clone();
        }
        if let Some(r) = &rr {
            self.robots[right.leader.unwrap()] = r.next.clone();
        }

        use Action::*;
        match (summary.left_action, summary.right_action) {
            (Some(WaitUntilPhaseEnd), Some(WaitUntilPhaseEnd)) => {
                self.groups[k].waiting = true;
                self.groups[k + 1].waiting = true;
            }
            (Some(StickToOther), _) => {
                if right_mode == Mode::Internal {
                    self.flags.single_met_internal = true;
                }
                self.merge_into(k, k + 1);
            }
            (_, Some(StickToOther)) => {
                if left_mode == Mode::Internal {
                    self.flags.single_met_internal = true;
                }
                self.merge_into(k + 1, k);
            }
            (Some(CollectOtherAndContinue), None) => self.merge_into(k + 1, k),
            (None, Some(CollectOtherAndContinue)) => self.merge_into(k, k + 1),
            (Some(la), Some(ra)) => {
                // Boundary meets boundary.
                for (idx, a) in [(k, la), (k + 1, ra)] {
                    match a {
                        BecomeInternalAndWait => {
                            self.groups[idx].leader = None;
                            self.groups[idx].target = None;
                        }
                        BreakAndWait => {
                            self.flags.break_and_wait = true;
                            self.groups[idx].waiting = true;
                        }
                        DeclareRendezvous => self.groups[idx].waiting = true,
                        other => {
                            return Err(Error::Contract(format!(
                                "unexpected boundary reaction {other:?}"
                            )))
                        }
                    }
                }
                if la == BecomeInternalAndWait && ra == BecomeInternalAndWait {
                    let host = self.groups[k].hi;
                    self.absorb(k, k + 1, None, host);
                }
            }
            other => {
                return Err(Error::Contract(format!(
                    "no meeting rule for {left_mode:?}/{right_mode:?} -> {other:?}"
                )))
            }
        }
        Ok((at, summary, left.lo, right.hi))
    }

    /// Group `from` joins group `into` (neighbours); `into` keeps its leader
    /// and motion. Every member of `from` sticks to that leader.
    fn merge_into(&mut self, from: usize, into: usize) {
        let leader = self.groups[into].leader;
        let host = leader.unwrap_or(if from < into {
            self.groups[into].lo
        } else {
            self.groups[into].hi
        });
        let (a, b) = if from < into {
            (from, into)
        } else {
            (into, from)
        };
        let keep = self.groups[into].clone();
        self.absorb(a, b, leader, host);
        let g = &mut self.groups[a];
        g.target = keep.target;
        g.waiting = keep.waiting;
    }

    /// Replaces neighbouring groups `a` and `a + 1` with their union.
    fn absorb(&mut self, a: usize, b: usize, leader: Option<RobotId>, host: RobotId) {
        debug_assert_eq!(a + 1, b);
        let right = self.groups.remove(b);
        let g = &mut self.groups[a];
        g.hi = right.hi;
        g.leader = leader;
        let (lo, hi) = (g.lo, g.hi);
        for j in lo..=hi {
            if Some(j) != leader {
                self.robots[j].stuck_to = Some(host);
            }
        }
        if let Some(l) = leader {
            self.robots[l].stuck_to = None;
        }
    }

    pub fn into_trace(self) -> Trace {
        let end_time = self.rendezvous.map(|r| r.time).unwrap_or(self.time);
        let rounds_used = match self.rendezvous {
            Some(r) => r.round + 1,
            None => self.round,
        };
        let robots = self
            .robots
            .iter()
            .enumerate()
            .map(|(j, s)| RobotTotals {
                id: j,
                distance: self.distance[j],
                wait: self.wait[j],
                time: end_time,
                final_mode: s.mode,
                coins_consumed: s.coins_consumed,
                rounds_single: self.rounds_single[j],
            })
            .collect();
        Trace {
            initial_positions: self.config.initial_positions,
            r: self.config.r,
            epsilon: self.config.epsilon,
            rendezvous_achieved: self.rendezvous.is_some(),
            rendezvous_time: self.rendezvous.map(|r| r.time),
            rendezvous_position: self.rendezvous.map(|r| r.position),
            rendezvous_round: self.rendezvous.map(|r| r.round),
            rendezvous_phase: self.rendezvous.map(|r| r.phase),
            rounds_used,
            end_time,
            robots,
            events: self.events,
            waypoints: self.waypoints,
            phases: self.phases,
            flags: self.flags,
        }
    }
}

/// Runs rounds until all robots share a point or the round cap (or the end of
/// a coin script) is reached. Hitting the cap is not an error: the trace
/// reports `rendezvous_achieved = false`.
pub fn run(config: WorldConfig, coins: CoinSource) -> Result<Trace> {
    let mut world = World::new(config, coins)?;
    while !world.is_finished() {
        world.step_phase()?;
    }
    Ok(world.into_trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::CoinScript;

    fn traj(position: f64, velocity: f64) -> Trajectory {
        Trajectory { position, velocity }
    }

    #[test]
    fn head_on_pair_meets_halfway() {
        let hit = detect_next_meeting(&[traj(0.0, 1.0), traj(2.0, -1.0)], 10.0, 1e-9).unwrap();
        assert_eq!(hit.time, 1.0);
        assert_eq!(hit.pairs, vec![0]);
        let hit = detect_next_meeting(&[traj(0.0, 1.0), traj(1.0, -1.0)], 10.0, 1e-9).unwrap();
        assert_eq!(hit.time, 0.5);
    }

    #[test]
    fn out_of_reach_and_parallel_motion_do_not_meet() {
        assert!(detect_next_meeting(&[traj(0.0, 1.0), traj(3.0, 0.0)], 2.0, 1e-9).is_none());
        assert!(detect_next_meeting(&[traj(0.0, 1.0), traj(1.0, 1.0)], 100.0, 1e-9).is_none());
    }

    #[test]
    fn pursuer_closes_on_a_waiting_leader() {
        let hit = detect_next_meeting(&[traj(0.0, 1.0), traj(1.5, 0.0)], 5.0, 1e-9).unwrap();
        assert_eq!(hit.time, 1.5);
    }

    #[test]
    fn simultaneous_contacts_are_reported_together() {
        let ts = [
            traj(0.0, 1.0),
            traj(2.0, -1.0),
            traj(3.0, 1.0),
            traj(5.0, -1.0),
        ];
        let hit = detect_next_meeting(&ts, 10.0, 1e-9).unwrap();
        assert_eq!(hit.time, 1.0);
        assert_eq!(hit.pairs, vec![0, 2]);
    }

    #[test]
    fn only_adjacent_pairs_are_considered() {
        // The outer pair would "meet" at t = 1.5 but the middle robot is in
        // the way at t = 1.
        let ts = [traj(0.0, 1.0), traj(1.0, 0.0), traj(3.0, -1.0)];
        let hit = detect_next_meeting(&ts, 10.0, 1e-9).unwrap();
        assert_eq!(hit.time, 1.0);
        assert_eq!(hit.pairs, vec![0]);
    }

    #[test]
    fn config_validation() {
        assert!(WorldConfig::new(vec![0.0, 1.0], 1.28).validate().is_err());
        assert!(WorldConfig::new(vec![0.0, 2.0, 1.0], 1.28)
            .validate()
            .is_err());
        assert!(WorldConfig::new(vec![1.0, 1.0, 1.0], 1.28)
            .validate()
            .is_err());
        assert!(WorldConfig::new(vec![0.0, 0.5, 1.0], 1.0)
            .validate()
            .is_err());
        assert!(WorldConfig::new(vec![0.0, 0.5, 1.0], 1.28)
            .validate()
            .is_ok());
    }

    #[test]
    fn equidistant_pins_the_ends() {
        let c = WorldConfig::equidistant(4, 75.0, 1.28);
        assert_eq!(c.initial_positions, vec![0.0, 25.0, 50.0, 75.0]);
    }

    #[test]
    fn script_shorter_than_population_is_rejected() {
        let coins = CoinSource::script(CoinScript::parse("R\nL\n").unwrap());
        assert!(World::new(WorldConfig::new(vec![0.0, 0.5, 1.0], 1.28), coins).is_err());
    }
}
