use std::collections::{BTreeSet, HashMap};

use super::{Configuration, Coord, RuleTable, Schedule, State, Window};

/// How the neighbors of window cells that fall outside the window are read.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Outside cells keep their configuration value forever (they are never
    /// scheduled). Exact by definition of a windowed schedule.
    Frozen,
    /// The window wraps around: a torus, i.e. an infinite periodic configuration.
    Periodic,
}

/// Dense indexing of a finite set of updatable cells plus the fixed halo they read.
#[derive(Clone, Debug)]
pub struct Lattice {
    dim: usize,
    boundary: Boundary,
    window: Option<Window>,
    cells: Vec<Coord>,
    index: HashMap<Coord, usize>,
    halo: Vec<Coord>,
    k: usize,
    nbr: Vec<u32>,
}

impl Lattice {
    pub fn new(rule: &RuleTable, window: Window, boundary: Boundary) -> Self {
        let cells: Vec<Coord> = window.cells().collect();
        let mut lat = Self::build(rule, cells, boundary, Some(window));
        lat.window = Some(window);
        lat
    }

    /// Arbitrary finite cell set with a frozen halo.
    pub fn from_cells(rule: &RuleTable, cells: Vec<Coord>) -> Self {
        Self::build(rule, cells, Boundary::Frozen, None)
    }

    fn build(rule: &RuleTable, cells: Vec<Coord>, boundary: Boundary, window: Option<Window>) -> Self {
        let index: HashMap<Coord, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let n = cells.len();
        let k = rule.k();
        let mut halo = Vec::new();
        let mut halo_index: HashMap<Coord, usize> = HashMap::new();
        let mut nbr = Vec::with_capacity(n * k);
        for &c in &cells {
            for &o in rule.neighborhood() {
                let mut p = c + o;
                if let (Boundary::Periodic, Some(w)) = (boundary, window) {
                    p = Coord(
                        w.lo.0 + (p.0 - w.lo.0).rem_euclid(w.width()),
                        w.lo.1 + (p.1 - w.lo.1).rem_euclid(w.height()),
                    );
                }
                let slot = match index.get(&p) {
                    Some(&i) => i,
                    None => *halo_index.entry(p).or_insert_with(|| {
                        halo.push(p);
                        n + halo.len() - 1
                    }),
                };
                nbr.push(slot as u32);
            }
        }
        Lattice { dim: rule.dim(), boundary, window, cells, index, halo, k, nbr }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn window(&self) -> Option<Window> {
        self.window
    }
    pub fn cells(&self) -> &[Coord] {
        &self.cells
    }
    pub fn len(&self) -> usize {
        self.cells.len()
    }
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
    pub fn index_of(&self, c: Coord) -> Option<usize> {
        self.index.get(&c).copied()
    }
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.nbr[i * self.k..(i + 1) * self.k]
    }

    /// State vector (window cells followed by the halo) read from `c`.
    pub fn load(&self, c: &Configuration) -> Vec<State> {
        self.cells.iter().chain(self.halo.iter()).map(|&p| c.get(p)).collect()
    }

    /// Writes the window part of `states` over `base`.
    pub fn store(&self, states: &[State], base: &Configuration) -> Configuration {
        let mut out = base.clone();
        for (i, &c) in self.cells.iter().enumerate() {
            out.set(c, states[i]);
        }
        out
    }

    /// For each window cell, the window cells that read it.
    pub fn dependents(&self) -> Vec<Vec<u32>> {
        let n = self.cells.len();
        let mut deps = vec![Vec::new(); n];
        for i in 0..n {
            for &j in self.neighbors(i) {
                let j = j as usize;
                if j < n && !deps[j].contains(&(i as u32)) {
                    deps[j].push(i as u32);
                }
            }
        }
        deps
    }
}

/// Per-cell value-change log.
pub type ChangeLog = Vec<Vec<State>>;

/// Dense simulator: every step evaluates the scheduled cells, reading before writing.
#[derive(Clone, Debug)]
pub struct Sim<'a> {
    rule: &'a RuleTable,
    lat: &'a Lattice,
    states: Vec<State>,
    t: u64,
    log: Option<ChangeLog>,
    scratch: Vec<(usize, State)>,
}

impl<'a> Sim<'a> {
    pub fn new(rule: &'a RuleTable, lat: &'a Lattice, c0: &Configuration) -> Self {
        Self::from_states(rule, lat, lat.load(c0))
    }

    pub fn from_states(rule: &'a RuleTable, lat: &'a Lattice, states: Vec<State>) -> Self {
        Sim { rule, lat, states, t: 0, log: None, scratch: Vec::new() }
    }

    /// Start recording value changes.
    pub fn record(mut self) -> Self {
        self.log = Some(self.states[..self.lat.len()].iter().map(|&s| vec![s]).collect());
        self
    }

    pub fn time(&self) -> u64 {
        self.t
    }
    pub fn states(&self) -> &[State] {
        &self.states
    }
    pub fn window_states(&self) -> &[State] {
        &self.states[..self.lat.len()]
    }
    pub fn lattice(&self) -> &Lattice {
        self.lat
    }
    pub fn log(&self) -> Option<&ChangeLog> {
        self.log.as_ref()
    }
    pub fn into_log(self) -> Option<ChangeLog> {
        self.log
    }

    #[inline]
    pub fn eval(&self, i: usize) -> State {
        let q = self.rule.q() as usize;
        let idx = self.lat.neighbors(i).iter().fold(0usize, |a, &j| a * q + self.states[j as usize] as usize);
        self.rule.table()[idx]
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.eval(i) != self.states[i]
    }

    pub fn active(&self) -> Vec<usize> {
        (0..self.lat.len()).filter(|&i| self.is_active(i)).collect()
    }

    /// Applies `G_D` for the given window indices; returns the changed cells.
    pub fn apply(&mut self, set: &[usize]) -> Vec<(usize, State, State)> {
        self.scratch.clear();
        for &i in set {
            let new = self.eval(i);
            if new != self.states[i] {
                self.scratch.push((i, new));
            }
        }
        let mut changed = Vec::with_capacity(self.scratch.len());
        for &(i, new) in &self.scratch {
            let old = self.states[i];
            self.states[i] = new;
            if let Some(log) = self.log.as_mut() {
                log[i].push(new);
            }
            changed.push((i, old, new));
        }
        changed
    }

    pub fn step(&mut self, sched: &Schedule) -> usize {
        let set = sched.members(self.t);
        let n = self.apply(&set).len();
        self.t += 1;
        n
    }

    pub fn run(&mut self, sched: &Schedule, steps: u64) {
        for _ in 0..steps {
            self.step(sched);
        }
    }
}

/// Event-driven simulator: only active cells are evaluated. Suited to large,
/// mostly quiescent configurations such as circuits.
#[derive(Clone, Debug)]
pub struct EventSim<'a> {
    sim: Sim<'a>,
    deps: Vec<Vec<u32>>,
    active: BTreeSet<u32>,
}

impl<'a> EventSim<'a> {
    pub fn new(rule: &'a RuleTable, lat: &'a Lattice, c0: &Configuration) -> Self {
        let sim = Sim::new(rule, lat, c0);
        let active = sim.active().into_iter().map(|i| i as u32).collect();
        EventSim { deps: lat.dependents(), sim, active }
    }

    pub fn record(mut self) -> Self {
        self.sim = self.sim.record();
        self
    }

    pub fn sim(&self) -> &Sim<'a> {
        &self.sim
    }
    pub fn into_sim(self) -> Sim<'a> {
        self.sim
    }
    pub fn time(&self) -> u64 {
        self.sim.t
    }
    pub fn is_quiescent(&self) -> bool {
        self.active.is_empty()
    }
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().map(|&i| i as usize)
    }

    /// Advances to the next step at which some active cell is scheduled (a
    /// jump for sweeps, one step otherwise) and applies it. Returns the changes.
    pub fn step(&mut self, sched: &Schedule) -> Vec<(usize, State, State)> {
        if self.active.is_empty() {
            self.sim.t += 1;
            return Vec::new();
        }
        if sched.is_sweep() {
            let t = self.sim.t;
            self.sim.t = self.active.iter().map(|&i| sched.next_hit(t, i as usize)).min().unwrap_or(t);
        }
        let t = self.sim.t;
        let set: Vec<usize> =
            self.active.iter().map(|&i| i as usize).filter(|&i| sched.contains(t, i)).collect();
        let changed = self.sim.apply(&set);
        self.sim.t += 1;
        for &(i, _, _) in &changed {
            self.refresh(i);
            for d in 0..self.deps[i].len() {
                let j = self.deps[i][d] as usize;
                self.refresh(j);
            }
        }
        changed
    }

    fn refresh(&mut self, i: usize) {
        if self.sim.is_active(i) {
            self.active.insert(i as u32);
        } else {
            self.active.remove(&(i as u32));
        }
    }
}
