//! Robots in grid mazes.
//!
//! A layout is a list of rows. Cell characters:
//!
//! | char | cell |
//! |------|------|
//! | `#` | wall |
//! | `.` | free |
//! | `a`, `b` | free, initial state of the first / second robot |
//! | `C` | free checkpoint, every move from it earns reward 1 |
//! | `S` | free, sensitive: both controllers must agree there |
//! | `G` | goal, absorbing |
//! | `T` | trap, absorbing |
//!
//! Non-wall cells are numbered in row-major order. Two move semantics are
//! offered. In [`Semantics::Slip`] every free cell offers all four
//! directions; a move goes the intended way with probability `1 - slip` and
//! in a uniformly random direction otherwise, and bumping into a wall or the
//! border leaves the robot in place. In [`Semantics::Crash`] a free cell
//! offers only its open directions; a move succeeds with probability
//! `1 - slip - error`, leaves the robot in place with probability `slip`
//! and sends it to an extra absorbing `crash` state with probability
//! `error`. Under partial observability the robot sees only which
//! directions are open, so cells with the same open directions share an
//! observation class.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::generators::Generated;
use crate::model::{Mdp, MdpBuilder};
use crate::textio::parse_spec;

pub const DIRS: [(&str, isize, isize); 4] = [("up", -1, 0), ("down", 1, 0), ("left", 0, -1), ("right", 0, 1)];

pub const SIMPLE: [&str; 3] = ["a....", ".#b#T", "T#G##"];

pub const LARGER: [&str; 5] = ["a.C.b", ".#.#.", "C.S.C", ".#.#.", "C...C"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    Slip,
    Crash,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Maze {
    rows: Vec<Vec<char>>,
    index: Vec<Vec<Option<usize>>>,
    pub cells: Vec<(usize, usize)>,
}

impl Maze {
    pub fn parse(rows: &[&str]) -> Result<Maze, Error> {
        let rows: Vec<Vec<char>> = rows.iter().map(|r| r.chars().collect()).collect();
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Generator("maze rows must be nonempty and of equal length".into()));
        }
        let mut index = vec![vec![None; width]; rows.len()];
        let mut cells = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &ch) in row.iter().enumerate() {
                match ch {
                    '#' => {}
                    '.' | 'a' | 'b' | 'C' | 'S' | 'G' | 'T' => {
                        index[i][j] = Some(cells.len());
                        cells.push((i, j));
                    }
                    _ => return Err(Error::Generator(format!("unknown maze cell `{ch}`"))),
                }
            }
        }
        Ok(Maze { rows, index, cells })
    }

    pub fn kind(&self, s: usize) -> char {
        let (i, j) = self.cells[s];
        self.rows[i][j]
    }

    pub fn is_absorbing(&self, s: usize) -> bool {
        matches!(self.kind(s), 'G' | 'T')
    }

    fn states_of(&self, ch: char) -> Vec<usize> {
        (0..self.cells.len()).filter(|&s| self.kind(s) == ch).collect()
    }

    pub fn initial(&self, ch: char) -> Result<usize, Error> {
        match self.states_of(ch)[..] {
            [s] => Ok(s),
            _ => Err(Error::Generator(format!("the layout needs exactly one `{ch}` cell"))),
        }
    }

    /// Neighbouring cell in direction `d`, if it is not a wall.
    pub fn step(&self, s: usize, d: usize) -> Option<usize> {
        let (i, j) = self.cells[s];
        let (_, di, dj) = DIRS[d];
        let ni = i.checked_add_signed(di)?;
        let nj = j.checked_add_signed(dj)?;
        self.index.get(ni)?.get(nj).copied().flatten()
    }

    /// Open directions of a cell as a bit mask.
    pub fn signature(&self, s: usize) -> u8 {
        (0..4).filter(|&d| self.step(s, d).is_some()).fold(0, |m, d| m | (1 << d))
    }

    /// Observation classes of free cells with at least two members.
    pub fn observation_classes(&self) -> Vec<Vec<usize>> {
        let mut by_sig: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
        for s in (0..self.cells.len()).filter(|&s| !self.is_absorbing(s)) {
            by_sig.entry(self.signature(s)).or_default().push(s);
        }
        by_sig.into_values().filter(|v| v.len() > 1).collect()
    }

    pub fn model(&self, sem: Semantics, slip: f64, error: f64) -> Result<Mdp, Error> {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        if !ok(slip) || !ok(error) || !ok(slip + error) {
            return Err(Error::Generator(format!("invalid slip {slip} or error {error}")));
        }
        let n = self.cells.len();
        let crash = n;
        let mut b = MdpBuilder::new(if sem == Semantics::Crash { n + 1 } else { n });
        for s in 0..n {
            if self.is_absorbing(s) {
                b.action(s, 0, Some("stay".into()))?;
                b.transition(s, 0, s, 1.0)?;
                continue;
            }
            if sem == Semantics::Crash && self.signature(s) == 0 {
                return Err(Error::Generator(format!("free cell {s} has no open direction")));
            }
            for (d, &(name, _, _)) in DIRS.iter().enumerate() {
                let mut succ: BTreeMap<usize, f64> = BTreeMap::new();
                match sem {
                    Semantics::Slip => {
                        *succ.entry(self.step(s, d).unwrap_or(s)).or_default() += 1.0 - slip;
                        for e in 0..4 {
                            *succ.entry(self.step(s, e).unwrap_or(s)).or_default() += slip / 4.0;
                        }
                    }
                    Semantics::Crash => {
                        let Some(t) = self.step(s, d) else { continue };
                        *succ.entry(t).or_default() += 1.0 - slip - error;
                        *succ.entry(s).or_default() += slip;
                        *succ.entry(crash).or_default() += error;
                    }
                }
                b.action(s, d, Some(name.into()))?;
                for (t, p) in succ.into_iter().filter(|&(_, p)| p > 0.0) {
                    b.transition(s, d, t, p)?;
                }
                if sem == Semantics::Crash {
                    b.reward(s, d, if self.kind(s) == 'C' { 1.0 } else { 0.0 })?;
                }
            }
        }
        if sem == Semantics::Crash {
            b.action(crash, 0, Some("stay".into()))?;
            b.transition(crash, 0, crash, 1.0)?;
            b.reward(crash, 0, 0.0)?;
            b.label("crash", &[crash])?;
        }
        for (ch, label) in [('G', "goal"), ('T', "trap")] {
            let st = self.states_of(ch);
            if !st.is_empty() {
                b.label(label, &st)?;
            }
        }
        Ok(b.build()?)
    }
}

/// A random layout. Walls and traps are placed with the given densities;
/// the goal is the bottom-right cell, `a` the top-left one and `b` a random
/// free cell.
pub fn random_layout(height: usize, width: usize, walls: f64, traps: f64, seed: u64) -> Result<Vec<String>, Error> {
    if height * width < 3 {
        return Err(Error::Generator("a random maze needs at least 3 cells".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = vec![vec!['.'; width]; height];
    for row in g.iter_mut() {
        for c in row.iter_mut() {
            let x: f64 = rng.random();
            if x < walls {
                *c = '#';
            } else if x < walls + traps {
                *c = 'T';
            }
        }
    }
    g[0][0] = 'a';
    g[height - 1][width - 1] = 'G';
    let free: Vec<(usize, usize)> = (0..height)
        .flat_map(|i| (0..width).map(move |j| (i, j)))
        .filter(|&p| p != (0, 0) && p != (height - 1, width - 1))
        .collect();
    let (i, j) = free[rng.random_range(0..free.len())];
    g[i][j] = 'b';
    Ok(g.into_iter().map(|r| r.into_iter().collect()).collect())
}

fn set(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

/// Reachability from `a` at least as likely as from `b`.
pub fn sd_spec_text(a: usize, b: usize) -> String {
    format!("exists c :\n  forall x in {{{a}}}[c], forall y in {{{b}}}[c] :\n    P(x, F goal) >= P(y, F goal)\n")
}

fn structure(maze: &Maze, names: &[&str]) -> String {
    let mut parts = Vec::new();
    for s in maze.states_of('S') {
        parts.push(format!("same({s}, {})", set_names(names)));
    }
    for class in maze.observation_classes() {
        for c in names {
            parts.push(format!("obs({}, {c})", set(&class)));
        }
    }
    if parts.is_empty() {
        String::new()
    } else {
        format!("  {} ;\n", parts.join("\n  & "))
    }
}

fn set_names(names: &[&str]) -> String {
    format!("{{{}}}", names.join(", "))
}

fn reward_atoms(lambda: f64, eps: f64) -> String {
    format!("R(x, F crash) = R(y, F crash) ~{eps}\n    & R(x, F crash) >= {lambda}\n    & R(y, F crash) >= {lambda}\n")
}

/// Two robots starting in `a` and `b` must earn the same expected reward.
pub fn noninterference_spec_text(maze: &Maze, lambda: f64, eps: f64) -> Result<String, Error> {
    let (a, b) = (maze.initial('a')?, maze.initial('b')?);
    Ok(format!(
        "exists c1, c2 :\n{}  forall x in {{{a}}}[c1], forall y in {{{b}}}[c2] :\n    {}",
        structure(maze, &["c1", "c2"]),
        reward_atoms(lambda, eps)
    ))
}

/// Two controllers from `a` that an observer of rewards cannot tell apart.
pub fn opacity_spec_text(maze: &Maze, lambda: f64, eps: f64) -> Result<String, Error> {
    let a = maze.initial('a')?;
    Ok(format!(
        "exists c1, c2 :\n{}  forall x in {{{a}}}[c1], forall y in {{{a}}}[c2] :\n    {}",
        structure(maze, &["c1", "c2"]),
        reward_atoms(lambda, eps)
    ))
}

pub fn sd(rows: &[&str], slip: f64) -> Result<Generated, Error> {
    let maze = Maze::parse(rows)?;
    let model = maze.model(Semantics::Slip, slip, 0.0)?;
    if model.label("goal").is_none() {
        return Err(Error::Generator("the layout has no goal".into()));
    }
    let spec = parse_spec(&sd_spec_text(maze.initial('a')?, maze.initial('b')?))?;
    Ok(Generated { model, spec, controllers: Vec::new() })
}

pub fn noninterference(rows: &[&str], slip: f64, error: f64, lambda: f64, eps: f64) -> Result<Generated, Error> {
    let maze = Maze::parse(rows)?;
    let model = maze.model(Semantics::Crash, slip, error)?;
    let spec = parse_spec(&noninterference_spec_text(&maze, lambda, eps)?)?;
    Ok(Generated { model, spec, controllers: Vec::new() })
}

pub fn opacity(rows: &[&str], slip: f64, error: f64, lambda: f64, eps: f64) -> Result<Generated, Error> {
    let maze = Maze::parse(rows)?;
    let model = maze.model(Semantics::Crash, slip, error)?;
    let spec = parse_spec(&opacity_spec_text(&maze, lambda, eps)?)?;
    Ok(Generated { model, spec, controllers: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_layout() {
        let m = Maze::parse(&SIMPLE).unwrap();
        assert_eq!(m.cells.len(), 10);
        assert_eq!(m.initial('a').unwrap(), 0);
        assert_eq!(m.initial('b').unwrap(), 6);
        let g = m.states_of('G')[0];
        let into_goal: Vec<usize> = (0..10).filter(|&s| (0..4).any(|d| m.step(s, d) == Some(g))).collect();
        assert_eq!(into_goal, vec![6]);
    }

    #[test]
    fn slip_rows_are_distributions() {
        let m = Maze::parse(&SIMPLE).unwrap();
        let mdp = m.model(Semantics::Slip, 0.2, 0.0).unwrap();
        let a = mdp.action(0, 0).unwrap();
        let stay = a.successors.iter().find(|&&(t, _)| t == 0).unwrap().1;
        assert!((stay - (0.8 + 0.05 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn crash_menus_follow_open_directions() {
        let m = Maze::parse(&LARGER).unwrap();
        let mdp = m.model(Semantics::Crash, 0.1, 0.05).unwrap();
        for s in 0..m.cells.len() {
            assert_eq!(mdp.actions(s).len() as u32, m.signature(s).count_ones());
        }
        assert_eq!(mdp.label("crash").unwrap(), &[m.cells.len()]);
    }

    #[test]
    fn random_layouts_are_deterministic() {
        let a = random_layout(4, 5, 0.2, 0.1, 7).unwrap();
        assert_eq!(a, random_layout(4, 5, 0.2, 0.1, 7).unwrap());
        assert_eq!(a.iter().map(|r| r.matches('b').count()).sum::<usize>(), 1);
    }
}
