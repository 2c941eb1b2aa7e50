//! Benchmark models: Tiger, and the Hallway2 sensor model and goal metadata.
//!
//! Tiger uses the standard literature parameters (listen accuracy 0.85,
//! listen cost 1, wrong door -100, right door +10, discount 0.95).
//!
//! Hallway2 is loaded from `data/hallway2.POMDP`. The layout and motion
//! noise used to produce that file live in [`hallway2`]; the sensor model
//! here is used to cross-check its observation rows.

use crate::model::{ModelBuilder, PomdpModel};

pub const TIGER_LEFT: usize = 0;
pub const TIGER_RIGHT: usize = 1;

pub const TIGER_LISTEN: usize = 0;
pub const TIGER_OPEN_LEFT: usize = 1;
pub const TIGER_OPEN_RIGHT: usize = 2;

pub const TIGER_HEAR_LEFT: usize = 0;
pub const TIGER_HEAR_RIGHT: usize = 1;

pub const TIGER_LISTEN_ACCURACY: f64 = 0.85;
pub const TIGER_LISTEN_ERROR: f64 = 0.15;

/// The two-door Tiger problem. Opening either door resets the tiger uniformly.
pub fn build_tiger() -> PomdpModel {
    let mut b = ModelBuilder::new(2, 3, 2);
    for s in 0..2 {
        let other = 1 - s;
        b.set_transition(TIGER_LISTEN, s, s, 1.0);
        b.set_observation(TIGER_LISTEN, s, s, TIGER_LISTEN_ACCURACY);
        b.set_observation(TIGER_LISTEN, s, other, TIGER_LISTEN_ERROR);
        for s2 in 0..2 {
            b.set_reward(TIGER_LISTEN, s, s2, -1.0);
            for open in [TIGER_OPEN_LEFT, TIGER_OPEN_RIGHT] {
                b.set_transition(open, s, s2, 0.5);
                b.set_observation(open, s2, s, 0.5);
            }
            // Opening the tiger's door is -100, the other door +10.
            b.set_reward(TIGER_OPEN_LEFT, s, s2, if s == TIGER_LEFT { -100.0 } else { 10.0 });
            b.set_reward(TIGER_OPEN_RIGHT, s, s2, if s == TIGER_RIGHT { -100.0 } else { 10.0 });
        }
    }
    b.discount = 0.95;
    b.labels.states = Some(vec!["tiger-left".into(), "tiger-right".into()]);
    b.labels.actions = Some(vec!["listen".into(), "open-left".into(), "open-right".into()]);
    b.labels.observations = Some(vec!["hear-left".into(), "hear-right".into()]);
    b.build().expect("tiger tables have consistent dimensions")
}

/// Walls adjacent to the agent, relative to its heading.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct WallConfig {
    pub front: bool,
    pub right: bool,
    pub back: bool,
    pub left: bool,
}

impl WallConfig {
    pub fn sides(&self) -> [bool; 4] {
        [self.front, self.right, self.back, self.left]
    }

    pub fn from_sides(sides: [bool; 4]) -> Self {
        WallConfig {
            front: sides[0],
            right: sides[1],
            back: sides[2],
            left: sides[3],
        }
    }

    /// All 16 configurations, indexed like sensor patterns.
    pub fn all() -> impl Iterator<Item = WallConfig> {
        (0..NUM_SENSOR_PATTERNS).map(|k| WallConfig::from_sides(pattern_bits(k)))
    }
}

pub const NUM_SENSOR_PATTERNS: usize = 16;
pub const SENSE_GIVEN_WALL: f64 = 0.9;
pub const SENSE_GIVEN_OPEN: f64 = 0.05;

/// Sides reported as walls by sensor pattern `k`: bit 0 front, 1 right, 2 back, 3 left.
pub fn pattern_bits(k: usize) -> [bool; 4] {
    [k & 1 != 0, k & 2 != 0, k & 4 != 0, k & 8 != 0]
}

/// Human-readable name of a sensor pattern, e.g. `F-B-` for front and back sensed.
pub fn pattern_name(k: usize) -> String {
    pattern_bits(k)
        .iter()
        .zip(['F', 'R', 'B', 'L'])
        .map(|(&on, c)| if on { c } else { '-' })
        .collect()
}

/// Distribution over the 16 sensor patterns given the true walls.
///
/// Each side is sensed independently: 0.9 when a wall is present, 0.05 when
/// it is not.
pub fn sensor_observation_distribution(walls: WallConfig) -> [f64; NUM_SENSOR_PATTERNS] {
    let truth = walls.sides();
    let mut dist = [0.0; NUM_SENSOR_PATTERNS];
    for (k, p) in dist.iter_mut().enumerate() {
        *p = pattern_bits(k)
            .iter()
            .zip(truth)
            .map(|(&sensed, wall)| {
                let p_sense = if wall { SENSE_GIVEN_WALL } else { SENSE_GIVEN_OPEN };
                if sensed {
                    p_sense
                } else {
                    1.0 - p_sense
                }
            })
            .product();
    }
    dist
}

/// 1-based state numbers of the goal square in the Hallway2 layout.
pub const HALLWAY2_GOAL_NUMBERS: [usize; 4] = [69, 70, 71, 72];

/// Internal (0-based) Hallway2 goal states: the four headings of the goal square.
pub fn hallway2_goal_states() -> Vec<usize> {
    HALLWAY2_GOAL_NUMBERS.iter().map(|n| n - 1).collect()
}

pub mod hallway2 {
    //! Hallway2 layout and the generator for the vendored model file.
    //!
    //! 23 free cells on a 7x5 grid, four headings each (up, right, down,
    //! left), giving 92 states numbered `4 * cell + heading`. Observations
    //! are the 16 sensor patterns plus a goal observation emitted
    //! deterministically in the goal square. Entering the goal pays +1;
    //! any action taken in the goal moves the agent to a uniformly random
    //! non-goal state.

    use std::fmt::Write as _;

    use super::{
        hallway2_goal_states, pattern_name, sensor_observation_distribution, WallConfig,
        NUM_SENSOR_PATTERNS,
    };

    pub const NUM_CELLS: usize = 23;
    pub const NUM_STATES: usize = NUM_CELLS * 4;
    pub const NUM_OBSERVATIONS: usize = NUM_SENSOR_PATTERNS + 1;
    pub const GOAL_OBSERVATION: usize = NUM_SENSOR_PATTERNS;
    pub const GOAL_CELL: usize = 17;
    pub const DISCOUNT: f64 = 0.95;

    /// `(row, column)` of each cell, in state-numbering order.
    pub const CELLS: [(i32, i32); NUM_CELLS] = [
        (0, 1), (0, 2), (0, 3), (0, 4), (0, 5),
        (1, 0), (1, 1), (1, 3), (1, 5), (1, 6),
        (2, 1), (2, 3), (2, 5),
        (3, 0), (3, 1), (3, 3), (3, 5), (3, 6),
        (4, 1), (4, 2), (4, 3), (4, 4), (4, 5),
    ];

    pub const ACTIONS: [&str; 5] = ["forward", "turn-left", "turn-right", "turn-around", "stay"];

    /// Heading offsets for up, right, down, left.
    const STEP: [(i32, i32); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];

    /// Body motions an action can produce.
    #[derive(Clone, Copy, Debug, PartialEq, Eq)]
    pub enum Motion {
        Forward,
        TurnLeft,
        TurnRight,
        TurnAround,
        None,
    }

    /// Outcome distribution of each action over motions.
    pub fn motion_noise(action: usize) -> &'static [(Motion, f64)] {
        use Motion::*;
        match action {
            0 => &[(Forward, 0.8), (None, 0.05), (TurnLeft, 0.05), (TurnRight, 0.05), (TurnAround, 0.05)],
            1 => &[(TurnLeft, 0.8), (None, 0.1), (TurnAround, 0.05), (TurnRight, 0.05)],
            2 => &[(TurnRight, 0.8), (None, 0.1), (TurnAround, 0.05), (TurnLeft, 0.05)],
            3 => &[(TurnAround, 0.8), (None, 0.1), (TurnLeft, 0.05), (TurnRight, 0.05)],
            4 => &[(None, 1.0)],
            _ => panic!("hallway2 has 5 actions"),
        }
    }

    pub fn cell_at(row: i32, col: i32) -> Option<usize> {
        CELLS.iter().position(|&c| c == (row, col))
    }

    fn neighbor(cell: usize, heading: usize) -> Option<usize> {
        let (r, c) = CELLS[cell];
        let (dr, dc) = STEP[heading % 4];
        cell_at(r + dr, c + dc)
    }

    /// Walls around `cell` as seen by an agent facing `heading`.
    pub fn walls(cell: usize, heading: usize) -> WallConfig {
        let side = |k: usize| neighbor(cell, heading + k).is_none();
        WallConfig::from_sides([side(0), side(1), side(2), side(3)])
    }

    pub fn state(cell: usize, heading: usize) -> usize {
        4 * cell + heading
    }

    fn apply(cell: usize, heading: usize, motion: Motion) -> usize {
        match motion {
            Motion::Forward => state(neighbor(cell, heading).unwrap_or(cell), heading),
            Motion::TurnLeft => state(cell, (heading + 3) % 4),
            Motion::TurnRight => state(cell, (heading + 1) % 4),
            Motion::TurnAround => state(cell, (heading + 2) % 4),
            Motion::None => state(cell, heading),
        }
    }

    /// Non-goal transition distribution `p(· | s, a)` as sorted `(s', p)` pairs.
    pub fn transition_row(s: usize, action: usize) -> Vec<(usize, f64)> {
        let (cell, heading) = (s / 4, s % 4);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for &(motion, p) in motion_noise(action) {
            let s2 = apply(cell, heading, motion);
            match row.iter_mut().find(|(t, _)| *t == s2) {
                Some(entry) => entry.1 += p,
                None => row.push((s2, p)),
            }
        }
        row.sort_by_key(|&(t, _)| t);
        row
    }

    /// Renders the model in `.POMDP` text form.
    pub fn pomdp_text() -> String {
        let goals = hallway2_goal_states();
        let non_goal: Vec<usize> = (0..NUM_STATES).filter(|s| !goals.contains(s)).collect();
        let mut out = String::new();
        out.push_str(
            "# Hallway2: 23 cells x 4 headings (up, right, down, left); state = 4*cell + heading.\n\
             # Observations: 16 wall-sensor patterns (F/R/B/L relative to heading, sensed\n\
             # with 0.9 given a wall and 0.05 given an opening) plus a deterministic goal\n\
             # observation. Entering the goal square pays +1; acting in the goal restarts\n\
             # the agent uniformly over the 88 non-goal states.\n\
             # Generated by `cargo run -p perseus-core --example gen_hallway2`.\n\n",
        );
        let _ = writeln!(out, "discount: {DISCOUNT}");
        out.push_str("values: reward\n");
        let _ = writeln!(out, "states: {NUM_STATES}");
        let _ = writeln!(out, "actions: {}", ACTIONS.join(" "));
        let obs: Vec<String> = (0..NUM_SENSOR_PATTERNS)
            .map(pattern_name)
            .chain(std::iter::once("goal".to_string()))
            .collect();
        let _ = writeln!(out, "observations: {}", obs.join(" "));
        out.push_str("start: uniform\n\n");

        for (a, name) in ACTIONS.iter().enumerate() {
            for &s in &non_goal {
                for (s2, p) in transition_row(s, a) {
                    let _ = writeln!(out, "T: {name} : {s} : {s2} {}", decimal(p));
                }
            }
            out.push('\n');
        }
        let reset = 1.0 / non_goal.len() as f64;
        for &g in &goals {
            let _ = writeln!(out, "T: * : {g}");
            let row: Vec<String> = (0..NUM_STATES)
                .map(|s| if goals.contains(&s) { "0".into() } else { reset.to_string() })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out.push('\n');

        for s in 0..NUM_STATES {
            if goals.contains(&s) {
                let _ = writeln!(out, "O: * : {s} : goal 1.0");
                continue;
            }
            let dist = sensor_observation_distribution(walls(s / 4, s % 4));
            let row: Vec<String> = dist
                .iter()
                .map(|&p| decimal(p))
                .chain(std::iter::once("0".to_string()))
                .collect();
            let _ = writeln!(out, "O: * : {s}\n{}", row.join(" "));
        }
        out.push('\n');
        for &g in &goals {
            let _ = writeln!(out, "R: * : * : {g} : * 1.0");
        }
        out
    }

    /// Products of the short decimal noise parameters, printed without binary residue.
    fn decimal(p: f64) -> String {
        let s = format!("{p:.12}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}
