//! Rule X and the dual-rail circuit compiler.
//!
//! Rule X is a flip rule on {0, 1, 2} with the von Neumann neighborhood: 0 is
//! inert background, and between two adjacent non-zero cells a direction
//! indicator points left (or down) when their states are equal and right (or
//! up) when they differ. A non-zero cell flips 1 <-> 2 once every indicator it
//! has points at it. Four added transitions implement MERGE and CROSS.
//!
//! Under the flip rule alone, a wire cell whose only non-zero neighbor is its
//! downstream neighbor is active. That is how a signal leaves a wire's start,
//! and it is also why the output arms of a CROSS are active before any signal
//! reaches the crossing: their other neighbor is the empty center. With
//! `rule_x` every CROSS therefore emits spurious signals. `rule_x_held` adds
//! four entries that keep such cells still, which is enough for CROSS to work.

mod eval;
mod netlist;
mod place;

use std::collections::BTreeMap;

pub use eval::{default_budget, evaluate_circuit, run_placed, standard_schedules, RunReport};
pub use netlist::{
    build_fanout_netlist, build_nand_netlist, build_rule_step_circuit, build_xor_netlist, CircuitNetlist,
    DualRail, NetlistBuilder, Op,
};
pub use place::{place_and_route, Blocker, PlacedCircuit, PlacedGate, PITCH};

use crate::engine::{nbhd, Coord, RuleTable, State};
use crate::{Error, Result};

/// Read in the order (C, N, E, S, W).
fn flip_rule(t: &[State]) -> State {
    let (c, n, e, s, w) = (t[0], t[1], t[2], t[3], t[4]);
    if c == 0 {
        return 0;
    }
    // A neighbor points in when: N or E agrees with us, S or W disagrees.
    let inward = |v: State, agree: bool| v == 0 || (v == c) == agree;
    if inward(n, true) && inward(e, true) && inward(s, false) && inward(w, false) {
        3 - c
    } else {
        c
    }
}

/// The four added transitions, as ((C, N, E, S, W), new center).
pub const ADDED_TRANSITIONS: [([State; 5], State); 4] = [
    // MERGE: a signal from the top, or from the left.
    ([1, 1, 1, 0, 1], 2),
    ([1, 2, 1, 0, 2], 2),
    // CROSS: a signal from the left, or from the bottom.
    ([0, 1, 2, 1, 1], 1),
    ([0, 1, 2, 2, 2], 2),
];

/// Neighborhoods that `rule_x_held` keeps still: a lone equal neighbor to the
/// north or east.
pub const HELD: [[State; 5]; 4] = [[1, 1, 0, 0, 0], [2, 2, 0, 0, 0], [1, 0, 1, 0, 0], [2, 0, 2, 0, 0]];

fn rule_x_local(t: &[State]) -> State {
    ADDED_TRANSITIONS.iter().find(|(k, _)| k[..] == *t).map_or_else(|| flip_rule(t), |&(_, v)| v)
}

/// Three-state von Neumann flip rule with the MERGE and CROSS transitions.
pub fn rule_x() -> RuleTable {
    RuleTable::from_fn(2, 3, nbhd::von_neumann(), rule_x_local).expect("rule X").named("rule-x")
}

/// Rule X with the four `HELD` neighborhoods made inert, so that CROSS output
/// arms wait for the crossing to fill in.
pub fn rule_x_held() -> RuleTable {
    RuleTable::from_fn(2, 3, nbhd::von_neumann(), |t| if HELD.iter().any(|h| h[..] == *t) { t[0] } else { rule_x_local(t) })
        .expect("rule X")
        .named("rule-x-held")
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    WireH,
    WireV,
    Bend,
    Fork,
    Dual,
    Merge,
    Cross,
}

impl GateKind {
    pub const ALL: [GateKind; 7] =
        [GateKind::WireH, GateKind::WireV, GateKind::Bend, GateKind::Fork, GateKind::Dual, GateKind::Merge, GateKind::Cross];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::WireH => "WIRE-H",
            GateKind::WireV => "WIRE-V",
            GateKind::Bend => "BEND",
            GateKind::Fork => "FORK",
            GateKind::Dual => "DUAL",
            GateKind::Merge => "MERGE",
            GateKind::Cross => "CROSS",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unsupported(format!("unknown gate kind {s}")))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Side {
    N,
    E,
    S,
    W,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub name: &'static str,
    pub at: Coord,
    /// The side the wire attaches from.
    pub side: Side,
    pub input: bool,
}

/// A gate footprint relative to its center (or, for wires, its first cell).
/// Zero entries are cells that must stay empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GatePattern {
    pub kind: GateKind,
    pub footprint: BTreeMap<Coord, State>,
    pub ports: Vec<Port>,
}

/// Straight wire of `n` cells, left to right.
pub fn wire_h(n: usize) -> GatePattern {
    let n = n.max(1) as i64;
    GatePattern {
        kind: GateKind::WireH,
        footprint: (0..n).map(|x| (Coord(x, 0), 1)).collect(),
        ports: vec![
            Port { name: "in", at: Coord(0, 0), side: Side::W, input: true },
            Port { name: "out", at: Coord(n - 1, 0), side: Side::E, input: false },
        ],
    }
}

/// Straight wire of `n` cells, bottom to top.
pub fn wire_v(n: usize) -> GatePattern {
    let n = n.max(1) as i64;
    GatePattern {
        kind: GateKind::WireV,
        footprint: (0..n).map(|y| (Coord(0, y), 1)).collect(),
        ports: vec![
            Port { name: "in", at: Coord(0, 0), side: Side::S, input: true },
            Port { name: "out", at: Coord(0, n - 1), side: Side::N, input: false },
        ],
    }
}

/// Library footprints. Gates are centered on (0, 0) and listed with a
/// center in state 1; FORK and DUAL also appear with every state swapped.
pub fn gate_pattern(kind: GateKind) -> Result<GatePattern> {
    let at = |c: [(i64, i64, State); 5]| c.iter().map(|&(x, y, s)| (Coord(x, y), s)).collect();
    let port = |name, x, y, side, input| Port { name, at: Coord(x, y), side, input };
    Ok(match kind {
        GateKind::WireH => wire_h(3),
        GateKind::WireV => wire_v(3),
        GateKind::Bend => GatePattern {
            kind,
            footprint: [(Coord(0, 0), 1), (Coord(1, 0), 1), (Coord(1, 1), 1)].into_iter().collect(),
            ports: vec![port("in", 0, 0, Side::W, true), port("out", 1, 1, Side::N, false)],
        },
        GateKind::Fork => GatePattern {
            kind,
            footprint: at([(0, 0, 1), (-1, 0, 1), (1, 0, 1), (0, -1, 2), (0, 1, 0)]),
            ports: vec![port("in", -1, 0, Side::W, true), port("east", 1, 0, Side::E, false), port("south", 0, -1, Side::S, false)],
        },
        GateKind::Dual => GatePattern {
            kind,
            footprint: at([(0, 0, 1), (-1, 0, 1), (0, -1, 1), (1, 0, 1), (0, 1, 0)]),
            ports: vec![port("west", -1, 0, Side::W, true), port("south", 0, -1, Side::S, true), port("out", 1, 0, Side::E, false)],
        },
        GateKind::Merge => GatePattern {
            kind,
            footprint: at([(0, 0, 1), (-1, 0, 1), (0, 1, 2), (1, 0, 1), (0, -1, 0)]),
            ports: vec![port("west", -1, 0, Side::W, true), port("north", 0, 1, Side::N, true), port("out", 1, 0, Side::E, false)],
        },
        GateKind::Cross => GatePattern {
            kind,
            footprint: at([(0, 0, 0), (-1, 0, 2), (1, 0, 2), (0, 1, 1), (0, -1, 1)]),
            ports: vec![
                port("west", -1, 0, Side::W, true),
                port("south", 0, -1, Side::S, true),
                port("east", 1, 0, Side::E, false),
                port("north", 0, 1, Side::N, false),
            ],
        },
    })
}
