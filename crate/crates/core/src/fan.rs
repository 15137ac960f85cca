//! Flip automata networks and the dual network of an ACA without adjacent
//! active cells.

use std::fmt;
use std::sync::Arc;

use crate::algebra::check_no_adjacent_active;
use crate::engine::{Coord, Lattice, RuleTable, Schedule, ScheduleSpec, State, UpdateHistory};
use crate::{Configuration, Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Indicator {
    TowardLarger,
    TowardSmaller,
}

impl Indicator {
    pub fn flipped(self) -> Self {
        match self {
            Indicator::TowardLarger => Indicator::TowardSmaller,
            Indicator::TowardSmaller => Indicator::TowardLarger,
        }
    }
}

/// `(own state, neighbor states in incident-edge order) -> (new state, flip per incident edge)`.
pub type FlipFn = Arc<dyn Fn(State, &[State]) -> (State, Vec<bool>) + Send + Sync>;

/// Flip function that sets the state to `f(own, neighbors)` and flips every incident edge.
pub fn flip_all(f: impl Fn(State, &[State]) -> State + Send + Sync + 'static) -> FlipFn {
    Arc::new(move |s, nb| (f(s, nb), vec![true; nb.len()]))
}

#[derive(Clone)]
pub struct FlipNetwork {
    states: Vec<State>,
    edges: Vec<(usize, usize, Indicator)>,
    incident: Vec<Vec<usize>>,
    flips: Vec<FlipFn>,
}

impl fmt::Debug for FlipNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

impl PartialEq for FlipNetwork {
    fn eq(&self, o: &Self) -> bool {
        self.states == o.states && self.edges == o.edges
    }
}

impl FlipNetwork {
    /// `n` isolated nodes with the given states and a do-nothing flip function.
    pub fn new(states: Vec<State>) -> Self {
        let n = states.len();
        let keep: FlipFn = Arc::new(|s, nb: &[State]| (s, vec![false; nb.len()]));
        FlipNetwork { states, edges: Vec::new(), incident: vec![Vec::new(); n], flips: vec![keep; n] }
    }

    pub fn add_edge(&mut self, a: usize, b: usize, ind: Indicator) -> Result<usize> {
        let n = self.states.len();
        if a >= n {
            return Err(Error::UnknownNode(a));
        }
        if b >= n {
            return Err(Error::UnknownNode(b));
        }
        if a == b {
            return Err(Error::Unsupported("self loop".into()));
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let id = self.edges.len();
        self.edges.push((lo, hi, ind));
        self.incident[lo].push(id);
        self.incident[hi].push(id);
        Ok(id)
    }

    /// Adds `{a, b}` with its indicator pointing at `toward`.
    pub fn add_edge_toward(&mut self, a: usize, b: usize, toward: usize) -> Result<usize> {
        let ind = if toward == a.max(b) { Indicator::TowardLarger } else { Indicator::TowardSmaller };
        self.add_edge(a, b, ind)
    }

    pub fn set_flip(&mut self, node: usize, f: FlipFn) -> Result<()> {
        *self.flips.get_mut(node).ok_or(Error::UnknownNode(node))? = f;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
    pub fn states(&self) -> &[State] {
        &self.states
    }
    pub fn edges(&self) -> &[(usize, usize, Indicator)] {
        &self.edges
    }
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.incident[node]
    }

    pub fn other(&self, e: usize, node: usize) -> usize {
        let (a, b, _) = self.edges[e];
        if a == node {
            b
        } else {
            a
        }
    }

    pub fn points_to(&self, e: usize) -> usize {
        match self.edges[e] {
            (_, b, Indicator::TowardLarger) => b,
            (a, _, Indicator::TowardSmaller) => a,
        }
    }

    pub fn fan_applicable(&self, node: usize) -> Result<bool> {
        let inc = self.incident.get(node).ok_or(Error::UnknownNode(node))?;
        Ok(inc.iter().all(|&e| self.points_to(e) == node))
    }

    pub fn applicable(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.fan_applicable(v).unwrap_or(false)).collect()
    }

    /// Applies every node of `d` with reads from the pre-state.
    pub fn fan_apply(&self, d: &[usize]) -> Result<FlipNetwork> {
        for &v in d {
            if !self.fan_applicable(v)? {
                return Err(Error::NotApplicable(v));
            }
        }
        let mut out = self.clone();
        out.apply_unchecked(self, d);
        Ok(out)
    }

    fn apply_unchecked(&mut self, pre: &FlipNetwork, d: &[usize]) -> Vec<usize> {
        let mut changed = Vec::new();
        for &v in d {
            let nb: Vec<State> = pre.incident[v].iter().map(|&e| pre.states[pre.other(e, v)]).collect();
            let (s, flips) = (pre.flips[v])(pre.states[v], &nb);
            for (k, &e) in pre.incident[v].iter().enumerate() {
                if flips.get(k).copied().unwrap_or(false) {
                    self.edges[e].2 = pre.edges[e].2.flipped();
                }
            }
            if s != pre.states[v] {
                changed.push(v);
            }
            self.states[v] = s;
        }
        changed
    }

    /// One schedule step: scheduled nodes that are not applicable are skipped.
    pub fn step(&mut self, sched: &Schedule, t: u64) -> Vec<usize> {
        let d: Vec<usize> = sched.members(t).into_iter().filter(|&v| self.fan_applicable(v).unwrap_or(false)).collect();
        let pre = self.clone();
        self.apply_unchecked(&pre, &d)
    }

    /// Node `i` is reported as cell `(i, 0)`.
    pub fn node_cells(&self) -> Vec<Coord> {
        (0..self.len() as i64).map(|i| Coord(i, 0)).collect()
    }

    /// Text dump: one line per node, then one per edge with its arrow.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (i, st) in self.states.iter().enumerate() {
            s.push_str(&format!("node {i} = {st}\n"));
        }
        for &(a, b, ind) in &self.edges {
            let arrow = match ind {
                Indicator::TowardLarger => "->",
                Indicator::TowardSmaller => "<-",
            };
            s.push_str(&format!("edge {a} {arrow} {b}\n"));
        }
        s
    }
}

/// Update history of a FAN run; node `i` is recorded as cell `(i, 0)`.
pub fn fan_history(net: &FlipNetwork, spec: &ScheduleSpec, steps: u64) -> Result<UpdateHistory> {
    let cells = net.node_cells();
    let sched = Schedule::bind(spec, &cells)?;
    let mut net = net.clone();
    let mut seqs: Vec<Vec<State>> = net.states.iter().map(|&s| vec![s]).collect();
    for t in 0..steps {
        for v in net.step(&sched, t) {
            seqs[v].push(net.states[v]);
        }
    }
    let base = Configuration::zeros(1);
    Ok(UpdateHistory::new(cells, seqs, base))
}

/// Five-node example: a center (node 0) joined to four corners (1..4)
/// arranged as a square 1-2 / 3-4. Every node starts in state 1 and, when
/// applied, takes the sum of its closed neighborhood mod 3 and flips all edges.
pub fn five_node_network() -> FlipNetwork {
    let mut net = FlipNetwork::new(vec![1; 5]);
    for k in 1..5 {
        net.add_edge_toward(0, k, 0).expect("valid");
    }
    net.add_edge_toward(1, 2, 1).expect("valid");
    net.add_edge_toward(1, 3, 1).expect("valid");
    net.add_edge_toward(2, 4, 4).expect("valid");
    net.add_edge_toward(3, 4, 4).expect("valid");
    for v in 0..5 {
        net.set_flip(v, flip_all(|s, nb| (s + nb.iter().sum::<State>()) % 3)).expect("valid");
    }
    net
}

/// Node of the tripartite matching graph: a cell state, or a neighbor state to
/// the east or north.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum G3Node {
    S(State),
    E(State),
    N(State),
}

impl fmt::Display for G3Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            G3Node::S(s) => write!(f, "{s}"),
            G3Node::E(s) => write!(f, "{s}^E"),
            G3Node::N(s) => write!(f, "{s}^N"),
        }
    }
}

/// Orientation of every grid edge as a function of its two end states.
///
/// `toward_positive(axis, u, v)` is the indicator on an edge between a cell in
/// state `u` and its east (axis 0) or north (axis 1) neighbor in state `v`:
/// true when it points at the neighbor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualFanAssignment {
    dim: usize,
    q: State,
    table: [Vec<bool>; 2],
    constrained: [Vec<bool>; 2],
}

impl DualFanAssignment {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn q(&self) -> State {
        self.q
    }

    pub fn toward_positive(&self, axis: usize, u: State, v: State) -> bool {
        self.table[axis][(u * self.q + v) as usize]
    }

    /// Whether the entry was forced by an active transition (the rest are defaults).
    pub fn is_constrained(&self, axis: usize, u: State, v: State) -> bool {
        self.constrained[axis][(u * self.q + v) as usize]
    }

    /// Directed edges of G3: `u -> v^X` when the indicator points at the neighbor.
    pub fn g3_edges(&self) -> Vec<(G3Node, G3Node)> {
        let mut out = Vec::new();
        for axis in 0..self.dim {
            for u in 0..self.q {
                for v in 0..self.q {
                    let copy = if axis == 0 { G3Node::E(v) } else { G3Node::N(v) };
                    if self.toward_positive(axis, u, v) {
                        out.push((G3Node::S(u), copy));
                    } else {
                        out.push((copy, G3Node::S(u)));
                    }
                }
            }
        }
        out
    }

    /// No bidirectional edge, and every state node meets every copy node exactly once.
    pub fn check_structure(&self) -> bool {
        let edges = self.g3_edges();
        let bidirectional = edges.iter().any(|&(a, b)| edges.contains(&(b, a)));
        let covered = (0..self.dim).all(|axis| {
            (0..self.q).all(|u| {
                (0..self.q).all(|v| {
                    let copy = if axis == 0 { G3Node::E(v) } else { G3Node::N(v) };
                    edges.iter().filter(|&&(a, b)| (a, b) == (G3Node::S(u), copy) || (a, b) == (copy, G3Node::S(u))).count()
                        == 1
                })
            })
        });
        !bidirectional && covered
    }
}

fn axis_offsets(dim: usize) -> Vec<Coord> {
    if dim == 1 {
        vec![Coord::E]
    } else {
        vec![Coord::E, Coord::N]
    }
}

/// Orients the grid edges so that every active cell has all indicators
/// pointing at it. Unconstrained entries point from the cell toward its
/// east/north neighbor.
pub fn build_dual_fan(rule: &RuleTable) -> Result<DualFanAssignment> {
    let n = rule.neighborhood();
    let want: Vec<Coord> = match rule.dim() {
        1 => vec![Coord::W, Coord::ZERO, Coord::E],
        _ => vec![Coord::ZERO, Coord::N, Coord::E, Coord::S, Coord::W],
    };
    let mut sorted_n = n.to_vec();
    sorted_n.sort();
    let mut sorted_w = want.clone();
    sorted_w.sort();
    if sorted_n != sorted_w {
        return Err(Error::Ineligible("dual FAN needs first neighbors (1D) or von Neumann (2D)".into()));
    }
    if let Some(w) = check_no_adjacent_active(rule).witness() {
        return Err(Error::Ineligible(format!("adjacent active cells: {w}")));
    }
    let q = rule.q();
    let size = (q * q) as usize;
    let mut table = [vec![true; size], vec![true; size]];
    let mut constrained = [vec![false; size], vec![false; size]];
    let pos = |o: Coord| n.iter().position(|&x| x == o).expect("offset present");
    let mut force = |axis: usize, u: State, v: State, toward_pos: bool| -> Result<()> {
        let k = (u * q + v) as usize;
        if constrained[axis][k] && table[axis][k] != toward_pos {
            return Err(Error::Internal(format!("orientation conflict on axis {axis} for ({u}, {v})")));
        }
        constrained[axis][k] = true;
        table[axis][k] = toward_pos;
        Ok(())
    };
    for (t, _) in rule.active_transitions() {
        let a = t[pos(Coord::ZERO)];
        for (axis, &o) in axis_offsets(rule.dim()).iter().enumerate() {
            // Positive neighbor must point back at the center; the negative
            // neighbor must point forward at it.
            force(axis, a, t[pos(o)], false)?;
            force(axis, t[pos(-o)], a, true)?;
        }
    }
    Ok(DualFanAssignment { dim: rule.dim(), q, table, constrained })
}

/// Projects the states of a periodic lattice into a FAN: nodes are window
/// cells in row-major order and edges join east/north neighbors. Each node's
/// flip function applies the rule and flips exactly the edges whose induced
/// orientation changes.
pub fn project(rule: &RuleTable, dual: &DualFanAssignment, lat: &Lattice, states: &[State]) -> Result<FlipNetwork> {
    let w = lat.window().ok_or_else(|| Error::Unsupported("projection needs a window".into()))?;
    if w.width() < 3 || (dual.dim == 2 && w.height() < 3) {
        return Err(Error::Unsupported("projection needs a torus of side at least 3".into()));
    }
    let cells = lat.cells();
    let mut net = FlipNetwork::new(states[..cells.len()].to_vec());
    let wrap = |p: Coord| {
        Coord(w.lo.0 + (p.0 - w.lo.0).rem_euclid(w.width()), w.lo.1 + (p.1 - w.lo.1).rem_euclid(w.height()))
    };
    // Per edge: its axis and the node at the negative end.
    let mut edge_role = Vec::new();
    for (i, &c) in cells.iter().enumerate() {
        for (axis, &o) in axis_offsets(dual.dim).iter().enumerate() {
            let j = lat.index_of(wrap(c + o)).expect("torus neighbor");
            let toward = if dual.toward_positive(axis, states[i], states[j]) { j } else { i };
            net.add_edge_toward(i, j, toward)?;
            edge_role.push((axis, i));
        }
    }
    let roles: Vec<Vec<(usize, bool)>> = (0..cells.len())
        .map(|v| net.incident(v).iter().map(|&e| (edge_role[e].0, edge_role[e].1 == v)).collect())
        .collect();
    let nb_pos: Vec<Coord> = rule.neighborhood().to_vec();
    for v in 0..cells.len() {
        // Map each neighborhood offset to the incident slot holding it.
        let dirs = axis_offsets(dual.dim);
        let slots: Vec<Option<usize>> = nb_pos
            .iter()
            .map(|&o| {
                roles[v].iter().position(|&(axis, lower)| (if lower { dirs[axis] } else { -dirs[axis] }) == o)
            })
            .collect();
        let role = roles[v].clone();
        let rule = rule.clone();
        let dual = dual.clone();
        net.set_flip(
            v,
            Arc::new(move |s, nb: &[State]| {
                let tuple: Vec<State> = slots.iter().map(|slot| slot.map_or(s, |k| nb[k])).collect();
                let new = rule.apply(&tuple);
                let flips = role
                    .iter()
                    .zip(nb)
                    .map(|(&(axis, lower), &other)| {
                        let before =
                            if lower { dual.toward_positive(axis, s, other) } else { dual.toward_positive(axis, other, s) };
                        let after =
                            if lower { dual.toward_positive(axis, new, other) } else { dual.toward_positive(axis, other, new) };
                        before != after
                    })
                    .collect();
                (new, flips)
            }),
        )?;
    }
    Ok(net)
}

/// True when every active cell of the lattice state sees all incident
/// indicators pointing at it.
pub fn active_cells_are_applicable(rule: &RuleTable, dual: &DualFanAssignment, lat: &Lattice, states: &[State]) -> Result<bool> {
    let net = project(rule, dual, lat, states)?;
    let sim = crate::engine::Sim::from_states(rule, lat, states.to_vec());
    Ok(sim.active().into_iter().all(|i| net.fan_applicable(i).unwrap_or(false)))
}

/// Projection of a configuration on a torus window.
pub fn project_config(rule: &RuleTable, dual: &DualFanAssignment, lat: &Lattice, c: &Configuration) -> Result<FlipNetwork> {
    project(rule, dual, lat, &lat.load(c))
}
