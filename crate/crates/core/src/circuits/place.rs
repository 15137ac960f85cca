//! Track compiler: lays a netlist out on the grid as horizontal rails that
//! flow left to right, one operation after another.
//!
//! Rail `s` runs along `y = -PITCH * s`. Operations that change the number
//! of rails shift the rails below them with staggered vertical jogs. Gates
//! with pinned arm states are preceded by a short band in which an input rail
//! may take a bump (one extra state flip) to meet its pin.

use std::collections::{BTreeMap, HashMap};

use super::netlist::{apply, CircuitNetlist, Op};
use super::{gate_pattern, GateKind};
use crate::engine::{Configuration, Coord, State};
use crate::{Error, Result};

pub const PITCH: i64 = 6;
/// Columns between the structures of consecutive operations.
const GAP: i64 = 3;
/// Width of the bump band in front of a pinned gate.
const BAND: i64 = 5;

const COLD: [State; 4] = [1, 1, 1, 2];
const HOT: [State; 4] = [2, 2, 2, 1];

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Dir {
    Up,
    Down,
    Right,
}

fn flip(s: State) -> State {
    3 - s
}

/// A placed gate: center cell, input arms and output arms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacedGate {
    pub kind: GateKind,
    pub center: Coord,
    pub inputs: Vec<Coord>,
    pub outputs: Vec<Coord>,
}

/// Source of an input rail: a 2x2 ring whose orientation decides whether the
/// first wire cell starts active.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blocker {
    pub rail: String,
    /// Top-left, top-right, bottom-left, bottom-right.
    pub cells: [Coord; 4],
}

#[derive(Clone, Debug)]
pub struct PlacedCircuit {
    pub netlist: CircuitNetlist,
    /// Non-zero cells of the quiescent layout (all blockers cold).
    pub cells: BTreeMap<Coord, State>,
    pub gates: Vec<PlacedGate>,
    /// Wire segments in signal order, each from an output arm (or rail start)
    /// to an input arm (or rail end).
    pub wires: Vec<Vec<Coord>>,
    pub blockers: Vec<Blocker>,
    /// Last cell of every final rail.
    pub ends: Vec<(String, Coord)>,
}

struct Rail {
    name: String,
    seg: usize,
    tip: Coord,
    state: State,
}

#[derive(Default)]
struct Canvas {
    cells: BTreeMap<Coord, State>,
    wires: Vec<Vec<Coord>>,
    gates: Vec<PlacedGate>,
    max_x: i64,
}

impl Canvas {
    fn put(&mut self, c: Coord, s: State) -> Result<()> {
        if self.cells.insert(c, s).is_some() {
            return Err(Error::Internal(format!("layout collision at {c}")));
        }
        self.max_x = self.max_x.max(c.0);
        Ok(())
    }

    fn segment(&mut self, name: &str, at: Coord, s: State) -> Result<Rail> {
        self.put(at, s)?;
        self.wires.push(vec![at]);
        Ok(Rail { name: name.into(), seg: self.wires.len() - 1, tip: at, state: s })
    }

    fn step(&mut self, r: &mut Rail, d: Dir) -> Result<()> {
        let (next, s) = match d {
            Dir::Right => (Coord(r.tip.0 + 1, r.tip.1), r.state),
            Dir::Up => (Coord(r.tip.0, r.tip.1 + 1), r.state),
            Dir::Down => (Coord(r.tip.0, r.tip.1 - 1), flip(r.state)),
        };
        self.put(next, s)?;
        self.wires[r.seg].push(next);
        r.tip = next;
        r.state = s;
        Ok(())
    }

    fn steps(&mut self, r: &mut Rail, d: Dir, n: i64) -> Result<()> {
        for _ in 0..n {
            self.step(r, d)?;
        }
        Ok(())
    }

    fn extend_to(&mut self, r: &mut Rail, x: i64) -> Result<()> {
        let n = x - r.tip.0;
        self.steps(r, Dir::Right, n)
    }

    /// Band in front of a pinned gate: from column `x0`, optionally replace
    /// three straight cells by a detour one row up, which flips the state.
    fn band(&mut self, r: &mut Rail, x0: i64, want: State) -> Result<()> {
        self.extend_to(r, x0)?;
        if r.state != want {
            self.step(r, Dir::Up)?;
            self.steps(r, Dir::Right, 2)?;
            self.step(r, Dir::Down)?;
        }
        debug_assert_eq!(r.state, want);
        Ok(())
    }

    /// Moves rails `from..` of `rails` by one pitch, staggered `GAP` columns
    /// apart starting at `x`; `down` jogs bottom-first, up jogs top-first.
    fn jog(&mut self, rails: &mut [Rail], x: i64, down: bool) -> Result<i64> {
        let n = rails.len();
        let mut col = x;
        let order: Vec<usize> = if down { (0..n).rev().collect() } else { (0..n).collect() };
        for i in order {
            let r = &mut rails[i];
            self.extend_to(r, col)?;
            self.steps(r, if down { Dir::Down } else { Dir::Up }, PITCH)?;
            col += GAP;
        }
        Ok(col)
    }

    fn gate(&mut self, kind: GateKind, center: Coord, inputs: Vec<Coord>, outputs: Vec<Coord>) {
        self.gates.push(PlacedGate { kind, center, inputs, outputs });
    }
}

fn slot_y(s: usize) -> i64 {
    -PITCH * s as i64
}

/// Lays out a validated netlist.
pub fn place_and_route(net: &CircuitNetlist) -> Result<PlacedCircuit> {
    net.validate()?;
    let mut cv = Canvas::default();
    let mut rails: Vec<Rail> = Vec::new();
    let mut blockers = Vec::new();
    for (s, name) in net.rails.iter().enumerate() {
        let y = slot_y(s);
        let cells = [Coord(0, y), Coord(1, y), Coord(0, y - 1), Coord(1, y - 1)];
        for (c, &v) in cells.iter().zip(COLD.iter()) {
            cv.put(*c, v)?;
        }
        blockers.push(Blocker { rail: name.clone(), cells });
        rails.push(cv.segment(name, Coord(2, y), 1)?);
    }
    let mut frontier = 2 + GAP;
    let mut stack = net.rails.clone();
    for k in 0..net.ops.len() {
        let slot = apply(&mut stack, &net.ops, k)?;
        let i = slot.upper;
        match &net.ops[k] {
            Op::Fork { copy, .. } => {
                let x = cv.jog(&mut rails[i + 1..], frontier, true)?;
                let r = &mut rails[i];
                cv.extend_to(r, x - 1)?;
                let (y, c) = (r.tip.1, r.state);
                let center = Coord(x, y);
                cv.put(center, c)?;
                let west = r.tip;
                let east = cv.segment(&r.name, Coord(x + 1, y), c)?;
                let mut down = cv.segment(copy, Coord(x, y - 1), flip(c))?;
                let south = down.tip;
                cv.steps(&mut down, Dir::Down, PITCH - 1)?;
                cv.gate(GateKind::Fork, center, vec![west], vec![east.tip, south]);
                rails[i] = east;
                rails.insert(i + 1, down);
            }
            Op::Dual { out, .. } => {
                let x = frontier + BAND;
                let (upper, lower) = two(&mut rails, i);
                cv.extend_to(upper, x - 1)?;
                cv.band(lower, frontier, upper.state)?;
                cv.extend_to(lower, x)?;
                cv.steps(lower, Dir::Up, PITCH - 1)?;
                let (y, c) = (upper.tip.1, upper.state);
                let center = Coord(x, y);
                cv.put(center, c)?;
                let ins = vec![upper.tip, lower.tip];
                let e = cv.segment(out, Coord(x + 1, y), c)?;
                cv.gate(GateKind::Dual, center, ins, vec![e.tip]);
                rails[i] = e;
                rails.remove(i + 1);
                cv.jog(&mut rails[i + 1..], x + GAP, false)?;
            }
            Op::Merge { out, .. } => {
                let x = frontier + BAND;
                let (upper, lower) = two(&mut rails, i);
                cv.band(upper, frontier, 1)?;
                cv.extend_to(upper, x)?;
                cv.steps(upper, Dir::Down, PITCH - 1)?;
                cv.band(lower, frontier, 1)?;
                cv.extend_to(lower, x - 1)?;
                let y = lower.tip.1;
                let center = Coord(x, y);
                cv.put(center, 1)?;
                let ins = vec![lower.tip, upper.tip];
                let mut e = cv.segment(out, Coord(x + 1, y), 1)?;
                let arm = e.tip;
                cv.extend_to(&mut e, x + GAP)?;
                cv.steps(&mut e, Dir::Up, PITCH)?;
                cv.gate(GateKind::Merge, center, ins, vec![arm]);
                rails[i] = e;
                rails.remove(i + 1);
                cv.jog(&mut rails[i + 1..], x + 2 * GAP, false)?;
            }
            Op::Swap { .. } => {
                let x = frontier + BAND;
                let (upper, lower) = two(&mut rails, i);
                cv.band(upper, frontier, 2)?;
                cv.extend_to(upper, x - 1)?;
                cv.band(lower, frontier, 1)?;
                cv.extend_to(lower, x)?;
                cv.steps(lower, Dir::Up, PITCH - 1)?;
                let y = upper.tip.1;
                let center = Coord(x, y);
                let ins = vec![upper.tip, lower.tip];
                // Signal from the left leaves east and drops to the lower slot.
                let mut e = cv.segment(&upper.name, Coord(x + 1, y), 2)?;
                let e_arm = e.tip;
                cv.extend_to(&mut e, x + GAP)?;
                cv.steps(&mut e, Dir::Down, PITCH)?;
                // Signal from below leaves north, loops over and lands on the upper slot.
                let mut n = cv.segment(&lower.name, Coord(x, y + 1), 1)?;
                let n_arm = n.tip;
                cv.steps(&mut n, Dir::Up, 2)?;
                cv.extend_to(&mut n, x + 2 * GAP)?;
                cv.steps(&mut n, Dir::Down, 3)?;
                cv.gate(GateKind::Cross, center, ins, vec![e_arm, n_arm]);
                rails[i] = n;
                rails[i + 1] = e;
            }
        }
        frontier = cv.max_x + GAP;
    }
    for r in &mut rails {
        cv.extend_to(r, frontier)?;
    }
    for (r, s) in rails.iter().zip(&stack) {
        debug_assert_eq!(&r.name, s);
        debug_assert_eq!(r.tip.1, slot_y(stack.iter().position(|x| x == s).unwrap_or(0)));
    }
    let ends = rails.iter().map(|r| (r.name.clone(), r.tip)).collect();
    let placed =
        PlacedCircuit { netlist: net.clone(), cells: cv.cells, gates: cv.gates, wires: cv.wires, blockers, ends };
    if let Err(e) = placed.audit() {
        if std::env::var_os("ACAFORGE_DUMP_LAYOUT").is_some() {
            eprintln!("{}", placed.ascii());
        }
        return Err(e);
    }
    Ok(placed)
}

fn two(rails: &mut [Rail], i: usize) -> (&mut Rail, &mut Rail) {
    let (a, b) = rails.split_at_mut(i + 1);
    (&mut a[i], &mut b[0])
}

/// Von Neumann neighbors in (N, E, S, W) order.
pub(crate) fn around(c: Coord) -> [Coord; 4] {
    [Coord(c.0, c.1 + 1), Coord(c.0 + 1, c.1), Coord(c.0, c.1 - 1), Coord(c.0 - 1, c.1)]
}

impl PlacedCircuit {
    /// Configuration with the listed rails' sources hot.
    pub fn configuration(&self, hot: &[&str]) -> Configuration {
        let mut cells = self.cells.clone();
        for b in &self.blockers {
            if hot.contains(&b.rail.as_str()) {
                for (c, &v) in b.cells.iter().zip(HOT.iter()) {
                    cells.insert(*c, v);
                }
            }
        }
        Configuration::with_overrides(crate::engine::Background::uniform(2, 0), cells)
    }

    /// Cells that can ever change: every non-zero cell plus the CROSS centers.
    pub fn live_cells(&self) -> Vec<Coord> {
        let mut v: Vec<Coord> = self.cells.keys().copied().collect();
        v.extend(self.gates.iter().filter(|g| g.kind == GateKind::Cross).map(|g| g.center));
        v.sort();
        v
    }

    /// Bounding window of the layout.
    pub fn window(&self) -> crate::engine::Window {
        let xs = self.cells.keys().map(|c| c.0);
        let ys = self.cells.keys().map(|c| c.1);
        let (x0, x1) = (xs.clone().min().unwrap_or(0), xs.max().unwrap_or(0));
        let (y0, y1) = (ys.clone().min().unwrap_or(0), ys.max().unwrap_or(0));
        crate::engine::Window::new(Coord(x0, y0), Coord(x1, y1))
    }

    pub fn census(&self) -> BTreeMap<&'static str, usize> {
        let mut m = BTreeMap::new();
        for g in &self.gates {
            *m.entry(g.kind.name()).or_insert(0) += 1;
        }
        m
    }

    /// Structural checks on the emitted grid:
    /// - wires are induced paths;
    /// - distinct structures keep at least two zero cells between them, except
    ///   for arms meeting at a gate center and a source meeting its rail;
    /// - every gate matches its library footprint (up to a global flip for
    ///   FORK and DUAL);
    /// - junction cells are exactly the gate centers.
    pub fn audit(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Routing(m));
        #[derive(Copy, Clone, PartialEq, Eq)]
        enum Owner {
            Wire(usize),
            Gate(usize),
            Source(usize),
        }
        let mut owner: HashMap<Coord, Owner> = HashMap::new();
        for (w, cells) in self.wires.iter().enumerate() {
            for (k, c) in cells.iter().enumerate() {
                owner.insert(*c, Owner::Wire(w));
                for (j, d) in cells.iter().enumerate() {
                    if j > k + 1 && (*c - *d).l1() == 1 {
                        return bad(format!("wire {w} touches itself at {c} and {d}"));
                    }
                }
                if k > 0 && (*c - cells[k - 1]).l1() != 1 {
                    return bad(format!("wire {w} is broken at {c}"));
                }
            }
        }
        let mut gate_of: HashMap<Coord, usize> = HashMap::new();
        for (g, gate) in self.gates.iter().enumerate() {
            owner.insert(gate.center, Owner::Gate(g));
            for a in around(gate.center) {
                gate_of.insert(a, g);
            }
        }
        let rail_start: HashMap<&str, usize> =
            self.wires.iter().enumerate().take(self.blockers.len()).map(|(w, _)| (self.blockers[w].rail.as_str(), w)).collect();
        for (b, bl) in self.blockers.iter().enumerate() {
            for c in bl.cells {
                owner.insert(c, Owner::Source(b));
            }
        }
        // A gate center belongs to the wires that meet at it.
        let incident = |g: usize, w: usize| {
            let gate = &self.gates[g];
            gate.inputs.iter().chain(&gate.outputs).any(|c| owner.get(c) == Some(&Owner::Wire(w)))
        };
        let exempt = |a: Coord, oa: Owner, b: Coord, ob: Owner| -> bool {
            let near_same_gate = |c: Coord, o: Owner| match o {
                Owner::Gate(g) => Some(g),
                _ => gate_of.get(&c).copied(),
            };
            if let (Some(g), Some(h)) = (near_same_gate(a, oa), near_same_gate(b, ob)) {
                if g == h {
                    return true;
                }
            }
            match (oa, ob) {
                (Owner::Gate(g), Owner::Wire(w)) | (Owner::Wire(w), Owner::Gate(g)) => incident(g, w),
                (Owner::Source(s), Owner::Wire(w)) | (Owner::Wire(w), Owner::Source(s)) => {
                    rail_start.get(self.blockers[s].rail.as_str()) == Some(&w)
                }
                _ => false,
            }
        };
        for (&a, &oa) in &owner {
            for dx in -2i64..=2 {
                for dy in -2i64..=2 {
                    if dx.abs() + dy.abs() > 2 || (dx, dy) == (0, 0) {
                        continue;
                    }
                    let b = Coord(a.0 + dx, a.1 + dy);
                    if let Some(&ob) = owner.get(&b) {
                        if ob != oa && !exempt(a, oa, b, ob) {
                            return bad(format!("structures too close at {a} and {b}"));
                        }
                    }
                }
            }
        }
        for gate in &self.gates {
            let p = gate_pattern(gate.kind)?;
            let base = self.cells.get(&gate.center).copied().unwrap_or(0);
            let swap = matches!(gate.kind, GateKind::Fork | GateKind::Dual) && base == 2;
            for (&off, &want) in &p.footprint {
                let have = self.cells.get(&(gate.center + off)).copied().unwrap_or(0);
                let want = if swap && want != 0 { flip(want) } else { want };
                if have != want {
                    return bad(format!("{} at {} differs from its footprint at {}", gate.kind.name(), gate.center, off));
                }
            }
        }
        let centers: HashMap<Coord, GateKind> = self.gates.iter().map(|g| (g.center, g.kind)).collect();
        let nonzero = |c: Coord| self.cells.contains_key(&c);
        let mut candidates: Vec<Coord> = self.cells.keys().copied().collect();
        candidates.extend(self.cells.keys().flat_map(|&c| around(c)));
        for c in candidates {
            let deg = around(c).iter().filter(|&&d| nonzero(d)).count();
            let blocker = matches!(owner.get(&c), Some(Owner::Source(_)));
            if !nonzero(c) {
                if deg == 4 && centers.get(&c) != Some(&GateKind::Cross) {
                    return bad(format!("empty cell {c} is surrounded but is not a CROSS"));
                }
            } else if deg >= 3 && !blocker && !centers.contains_key(&c) {
                return bad(format!("junction at {c} is not a gate"));
            }
        }
        Ok(())
    }
}

impl PlacedCircuit {
    /// Text picture of the cold layout, rows top to bottom.
    pub fn ascii(&self) -> String {
        let w = self.window();
        let mut out = String::new();
        for y in (w.lo.1..=w.hi.1).rev() {
            let row: String = (w.lo.0..=w.hi.0)
                .map(|x| match self.cells.get(&Coord(x, y)) {
                    Some(&s) => char::from_digit(s, 10).unwrap_or('?'),
                    None if self.gates.iter().any(|g| g.center == Coord(x, y)) => '+',
                    None => '.',
                })
                .collect();
            out.push_str(row.trim_end_matches('.'));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::netlist::*;
    use super::*;

    #[test]
    fn single_wire_is_straight() {
        let net = CircuitNetlist::parse("rails a\n").unwrap();
        let p = place_and_route(&net).unwrap();
        assert_eq!(p.wires.len(), 1);
        assert!(p.wires[0].iter().all(|c| c.1 == 0));
        assert_eq!(p.ends[0].0, "a");
    }

    #[test]
    fn library_netlists_place_and_audit() {
        for n in [build_nand_netlist(), build_fanout_netlist(), build_xor_netlist()] {
            let p = place_and_route(&n).unwrap();
            assert_eq!(p.census(), n.census());
        }
    }

    #[test]
    fn audit_rejects_crowding() {
        let mut p = place_and_route(&build_fanout_netlist()).unwrap();
        let c = p.wires[0][3];
        p.cells.insert(Coord(c.0, c.1 - 2), 1);
        p.wires.push(vec![Coord(c.0, c.1 - 2)]);
        assert!(matches!(p.audit(), Err(Error::Routing(_))));
    }
}
