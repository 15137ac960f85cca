//! Rules, configurations, schedules and asynchronous evolution.

mod lattice;
mod rule;
mod schedule;
mod space;

use std::collections::{BTreeSet, HashMap};

pub use lattice::{Boundary, ChangeLog, EventSim, Lattice, Sim};
pub use rule::{nbhd, RuleTable};
pub use schedule::{Schedule, ScheduleSpec, SweepDir};
pub use space::{Background, Configuration, Coord, Window};

use crate::{Error, Result};

/// Cell states are `0..q`.
pub type State = u32;

/// `G_D(c)`: cells in `D` take `f` of their neighborhood in `c`; all reads
/// happen before any write.
pub fn apply_update_set(rule: &RuleTable, c: &Configuration, d: &[Coord]) -> Result<Configuration> {
    c.validate(rule.q())?;
    let mut out = c.clone();
    let mut tuple = vec![0; rule.k()];
    for &i in d {
        for (slot, &o) in tuple.iter_mut().zip(rule.neighborhood()) {
            *slot = c.get(i + o);
        }
        out.set(i, rule.apply(&tuple));
    }
    Ok(out)
}

/// `G(c)(i)`.
pub fn local(rule: &RuleTable, c: &Configuration, i: Coord) -> State {
    let t: Vec<State> = rule.neighborhood().iter().map(|&o| c.get(i + o)).collect();
    rule.apply(&t)
}

/// Frames `c_0 .. c_T` of an asynchronous run restricted to a window.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTime {
    pub window: Window,
    pub base: Configuration,
    pub frames: Vec<Vec<State>>,
    pub provenance: String,
}

impl SpaceTime {
    pub fn len(&self) -> usize {
        self.frames.len()
    }
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
    /// Frame `t` as a full configuration.
    pub fn frame(&self, t: usize) -> Configuration {
        let mut c = self.base.clone();
        for (cell, &s) in self.window.cells().zip(&self.frames[t]) {
            c.set(cell, s);
        }
        c
    }
}

/// Per-cell sequences of value-changing states. Cells outside the recorded
/// window never changed and report their initial value.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateHistory {
    cells: Vec<Coord>,
    index: HashMap<Coord, usize>,
    seqs: Vec<Vec<State>>,
    base: Configuration,
}

impl UpdateHistory {
    pub fn new(cells: Vec<Coord>, seqs: Vec<Vec<State>>, base: Configuration) -> Self {
        let index = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        UpdateHistory { cells, index, seqs, base }
    }

    pub fn from_log(lat: &Lattice, log: ChangeLog, base: &Configuration) -> Self {
        Self::new(lat.cells().to_vec(), log, base.clone())
    }

    pub fn cells(&self) -> &[Coord] {
        &self.cells
    }
    pub fn seqs(&self) -> &[Vec<State>] {
        &self.seqs
    }

    pub fn seq(&self, c: Coord) -> Vec<State> {
        match self.index.get(&c) {
            Some(&i) => self.seqs[i].clone(),
            None => vec![self.base.get(c)],
        }
    }

    /// `h_t(c)` if observed.
    pub fn at(&self, c: Coord, t: usize) -> Option<State> {
        match self.index.get(&c) {
            Some(&i) => self.seqs[i].get(t).copied(),
            None => (t == 0).then(|| self.base.get(c)),
        }
    }

    pub fn depth(&self, c: Coord) -> usize {
        self.index.get(&c).map_or(1, |&i| self.seqs[i].len())
    }

    pub fn max_depth(&self) -> usize {
        self.seqs.iter().map(Vec::len).max().unwrap_or(1)
    }

    /// True iff every cell's sequences agree on their common prefix.
    pub fn agrees_with(&self, other: &UpdateHistory) -> bool {
        self.first_disagreement(other).is_none()
    }

    pub fn first_disagreement(&self, other: &UpdateHistory) -> Option<Coord> {
        let cells: BTreeSet<Coord> = self.cells.iter().chain(other.cells.iter()).copied().collect();
        cells.into_iter().find(|&c| {
            let (a, b) = (self.seq(c), other.seq(c));
            let m = a.len().min(b.len());
            a[..m] != b[..m]
        })
    }

    /// Truncates every sequence to at most `d` entries.
    pub fn truncated(&self, d: usize) -> UpdateHistory {
        let seqs = self.seqs.iter().map(|s| s[..s.len().min(d)].to_vec()).collect();
        Self::new(self.cells.clone(), seqs, self.base.clone())
    }
}

/// Finite `(depth, cell) -> state` template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HaltingPattern {
    entries: Vec<((usize, Coord), State)>,
}

impl HaltingPattern {
    pub fn new(entries: Vec<((usize, Coord), State)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Unsupported("empty halting pattern".into()));
        }
        Ok(HaltingPattern { entries })
    }
    pub fn entries(&self) -> &[((usize, Coord), State)] {
        &self.entries
    }
}

/// Smallest depth offset `d` with `h_{t+d}(i) = s` for every entry. Depth is
/// history depth, not schedule time.
pub fn detect_pattern(h: &UpdateHistory, p: &HaltingPattern) -> Option<usize> {
    (0..h.max_depth()).find(|&d| p.entries.iter().all(|&((t, c), s)| h.at(c, t + d) == Some(s)))
}

fn check_window(c0: &Configuration, lat: &Lattice) -> Result<()> {
    if lat.dim() != c0.dim() {
        return Err(Error::Unsupported(format!("{}D configuration on a {}D rule", c0.dim(), lat.dim())));
    }
    Ok(())
}

/// Runs `T` steps of `spec` on `window` (frozen outside) and returns every frame.
pub fn run_schedule(
    rule: &RuleTable,
    c0: &Configuration,
    spec: &ScheduleSpec,
    window: Window,
    steps: u64,
) -> Result<SpaceTime> {
    let lat = Lattice::new(rule, window, Boundary::Frozen);
    run_on(rule, &lat, c0, spec, steps)
}

/// As `run_schedule` on a prepared lattice (window or torus).
pub fn run_on(
    rule: &RuleTable,
    lat: &Lattice,
    c0: &Configuration,
    spec: &ScheduleSpec,
    steps: u64,
) -> Result<SpaceTime> {
    c0.validate(rule.q())?;
    check_window(c0, lat)?;
    let window = lat.window().ok_or_else(|| Error::Unsupported("space-time needs a rectangular window".into()))?;
    let sched = Schedule::bind(spec, lat.cells())?;
    let mut sim = Sim::new(rule, lat, c0);
    let mut frames = vec![sim.window_states().to_vec()];
    for _ in 0..steps {
        sim.step(&sched);
        frames.push(sim.window_states().to_vec());
    }
    Ok(SpaceTime { window, base: c0.clone(), frames, provenance: spec.label() })
}

/// Update history of a `T`-step run on `window` (frozen outside).
pub fn extract_history(
    rule: &RuleTable,
    c0: &Configuration,
    spec: &ScheduleSpec,
    window: Window,
    steps: u64,
) -> Result<UpdateHistory> {
    let lat = Lattice::new(rule, window, Boundary::Frozen);
    history_on(rule, &lat, c0, spec, steps)
}

pub fn history_on(
    rule: &RuleTable,
    lat: &Lattice,
    c0: &Configuration,
    spec: &ScheduleSpec,
    steps: u64,
) -> Result<UpdateHistory> {
    c0.validate(rule.q())?;
    check_window(c0, lat)?;
    let sched = Schedule::bind(spec, lat.cells())?;
    let mut sim = Sim::new(rule, lat, c0).record();
    sim.run(&sched, steps);
    Ok(UpdateHistory::from_log(lat, sim.into_log().unwrap_or_default(), c0))
}

/// Active cells of `c` near its overrides and periodic core. `tail_active`
/// reports activity in the periodic tail, where it repeats forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveCells {
    pub cells: BTreeSet<Coord>,
    pub tail_active: bool,
}

pub fn active_cells(rule: &RuleTable, c: &Configuration) -> ActiveCells {
    let dim = c.dim();
    let bg = c.background();
    let rad = rule.radius();
    let h = bg.core_half();
    let per = bg.periods();
    let inner = [h[0] + rad, h[1] + rad];
    let reach = [inner[0] + per[0], if dim == 2 { inner[1] + per[1] } else { 0 }];
    let mut boxw = Window::new(Coord(-reach[0], -reach[1]), Coord(reach[0], reach[1]));
    if let Some(s) = c.support() {
        boxw = boxw.union(&s.grow(rad, dim));
    }
    let in_tail = |p: Coord| p.0.abs() > inner[0] || (dim == 2 && p.1.abs() > inner[1]);
    let mut cells = BTreeSet::new();
    let mut tail_active = false;
    for p in boxw.cells() {
        if local(rule, c, p) != c.get(p) {
            let near_override = c.overrides().keys().any(|o| (*o - p).linf() <= rad);
            if in_tail(p) && !near_override {
                tail_active = true;
            }
            cells.insert(p);
        }
    }
    ActiveCells { cells, tail_active }
}

/// Maps `f` over `items` on a rayon pool. `ACAFORGE_THREADS` caps the pool
/// size; results keep the input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    static POOL: std::sync::OnceLock<Option<rayon::ThreadPool>> = std::sync::OnceLock::new();
    let pool = POOL.get_or_init(|| {
        let n: usize = std::env::var("ACAFORGE_THREADS").ok()?.parse().ok()?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()
    });
    match pool {
        Some(p) => p.install(|| items.par_iter().map(&f).collect()),
        None => items.par_iter().map(f).collect(),
    }
}
