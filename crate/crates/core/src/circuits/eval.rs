//! Running placed circuits under adversarial schedules, with monitors for the
//! gate contracts.

use std::collections::{BTreeMap, HashMap};

use super::place::{around, PlacedCircuit};
use super::GateKind;
use crate::engine::{par_map, EventSim, Lattice, RuleTable, Schedule, ScheduleSpec, SweepDir};
use crate::{Error, Result};

/// Outcome of one run to quiescence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    /// Final rails, by name: whether the rail's last cell flipped.
    pub fired: BTreeMap<String, bool>,
    pub steps: u64,
    /// Monitor findings: simultaneous inputs at MERGE/CROSS, re-fired gates,
    /// cells flipping more than once.
    pub violations: Vec<String>,
}

/// Default budget: 50 scheduler steps per live cell. A sweep step jumps to
/// the next line holding an active cell, so the budget counts those jumps
/// rather than elapsed time.
pub fn default_budget(p: &PlacedCircuit) -> u64 {
    50 * p.live_cells().len() as u64
}

/// The four sweeps followed by `fair` fair-random schedules with seeds
/// `seed..seed + fair`.
pub fn standard_schedules(fair: usize, seed: u64) -> Vec<ScheduleSpec> {
    SweepDir::ALL
        .iter()
        .map(|&d| ScheduleSpec::Sweep(d))
        .chain((0..fair as u64).map(|k| ScheduleSpec::fair_random(seed + k)))
        .collect()
}

/// Runs `rule` on the layout with the named rails' sources hot until no cell
/// is active.
pub fn run_placed(
    rule: &RuleTable,
    p: &PlacedCircuit,
    hot: &[&str],
    spec: &ScheduleSpec,
    budget: Option<u64>,
) -> Result<RunReport> {
    let budget = budget.unwrap_or_else(|| default_budget(p));
    let lat = Lattice::from_cells(rule, p.live_cells());
    let sched = Schedule::bind(spec, lat.cells())?;
    let c0 = p.configuration(hot);
    let mut sim = EventSim::new(rule, &lat, &c0);
    let mut flips = vec![0u32; lat.len()];
    let mut calls = 0u64;
    // No cell of a valid circuit flips more than twice (blocker cells do), so a
    // third flip means the layout oscillates and the run can stop.
    let mut runaway = None;
    while !sim.is_quiescent() && runaway.is_none() {
        if calls >= budget {
            return Err(Error::Timeout(budget));
        }
        calls += 1;
        for (i, _, _) in sim.step(&sched) {
            flips[i] += 1;
            if flips[i] > 2 {
                runaway = Some(lat.cells()[i]);
            }
        }
    }
    let idx = |c| lat.index_of(c).expect("live cell");
    let count = |c| flips[idx(c)];
    // A signal has reached an input arm once the wire cell feeding it flipped;
    // the arm itself may stay stuck after the gate has fired.
    let reached = |g: &super::PlacedGate, arm| {
        around(arm).into_iter().any(|n| n != g.center && p.cells.get(&n).is_some_and(|&v| v != 0) && count(n) > 0)
    };
    let mut violations = Vec::new();
    if let Some(c) = runaway {
        violations.push(format!("cell {c} oscillates; run stopped at step {}", sim.time()));
    }
    for g in &p.gates {
        let name = g.kind.name();
        if matches!(g.kind, GateKind::Merge | GateKind::Cross) && g.inputs.iter().all(|&c| reached(g, c)) {
            violations.push(format!("{name} at {} received signals on both inputs", g.center));
        }
        if count(g.center) > 1 {
            violations.push(format!("{name} at {} fired {} times", g.center, count(g.center)));
        }
    }
    let lookup: HashMap<_, _> = p.gates.iter().map(|g| (g.center, ())).collect();
    for (i, &n) in flips.iter().enumerate() {
        let c = lat.cells()[i];
        if n > 1 && !lookup.contains_key(&c) {
            violations.push(format!("cell {c} flipped {n} times"));
        }
    }
    let fired = p.ends.iter().map(|(name, c)| (name.clone(), count(*c) > 0)).collect();
    Ok(RunReport { fired, steps: sim.time(), violations })
}

/// Evaluates a dual-rail circuit: input `k` drives its true rail when
/// `inputs[k]` holds and its false rail otherwise. Every schedule must run to
/// quiescence cleanly, fire exactly one rail of each output, and agree.
pub fn evaluate_circuit(
    rule: &RuleTable,
    p: &PlacedCircuit,
    inputs: &[bool],
    schedules: &[ScheduleSpec],
) -> Result<Vec<bool>> {
    let net = &p.netlist;
    if inputs.len() != net.inputs.len() {
        return Err(Error::Unsupported(format!("{} inputs given, {} expected", inputs.len(), net.inputs.len())));
    }
    let hot: Vec<&str> =
        net.inputs.iter().zip(inputs).map(|(d, &v)| if v { d.t.as_str() } else { d.f.as_str() }).collect();
    let runs = par_map(schedules, |s| run_placed(rule, p, &hot, s, None).map(|r| (s.label(), r)));
    let mut agreed: Option<(String, Vec<bool>)> = None;
    for run in runs {
        let (label, r) = run?;
        if let Some(v) = r.violations.first() {
            return Err(Error::Integrity(format!("{v} under {label}")));
        }
        let mut out = Vec::with_capacity(net.outputs.len());
        for o in &net.outputs {
            match (r.fired[&o.t], r.fired[&o.f]) {
                (true, false) => out.push(true),
                (false, true) => out.push(false),
                (true, true) => return Err(Error::Integrity(format!("both rails of {} fired under {label}", o.name))),
                (false, false) => return Err(Error::Integrity(format!("no rail of {} fired under {label}", o.name))),
            }
        }
        match &agreed {
            None => agreed = Some((label, out)),
            Some((first, v)) if *v != out => {
                return Err(Error::Integrity(format!("{first} gives {v:?} but {label} gives {out:?}")));
            }
            _ => {}
        }
    }
    agreed.map(|(_, v)| v).ok_or_else(|| Error::Unsupported("no schedules given".into()))
}
