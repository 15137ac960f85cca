use crate::engine::{Lattice, RuleTable, Schedule, ScheduleSpec, Sim, State};
use crate::{Error, Result};

/// One step of the invariant-history map: every cell moved to the next entry
/// of its history, or flagged as not advancing within the budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantStep {
    pub states: Vec<State>,
    pub advanced: Vec<bool>,
}

const CANONICAL_SEEDS: [u64; 4] = [0, 1, 2, 3];

/// First value each cell takes after `states` under a fair schedule, sampled
/// under a canonical schedule and checked against three alternates.
pub fn extract_invariant_step(host: &RuleTable, lat: &Lattice, states: &[State]) -> Result<InvariantStep> {
    let n = lat.len();
    let mut reference: Option<Vec<Option<State>>> = None;
    for seed in CANONICAL_SEEDS {
        let spec = ScheduleSpec::fair_random(seed);
        let sched = Schedule::bind(&spec, lat.cells())?;
        let budget = 8 * sched.fairness_window().unwrap_or(n as u64).max(1) + 64;
        let mut sim = Sim::from_states(host, lat, states.to_vec());
        let mut first: Vec<Option<State>> = vec![None; n];
        let mut left = n;
        let mut t = 0;
        while left > 0 && t < budget {
            let set = sched.members(t);
            for (i, _, new) in sim.apply(&set) {
                if first[i].is_none() {
                    first[i] = Some(new);
                    left -= 1;
                }
            }
            t += 1;
            if sim.active().is_empty() {
                break;
            }
        }
        match &reference {
            None => reference = Some(first),
            Some(r) => {
                if let Some(i) = (0..n).find(|&i| r[i].is_some() && first[i].is_some() && r[i] != first[i]) {
                    return Err(Error::InvarianceViolation {
                        cell: lat.cells()[i],
                        first: vec![states[i], r[i].unwrap()],
                        second: vec![states[i], first[i].unwrap()],
                    });
                }
            }
        }
    }
    let r = reference.unwrap_or_default();
    Ok(InvariantStep {
        states: (0..n).map(|i| r[i].unwrap_or(states[i])).collect(),
        advanced: r.iter().map(Option::is_some).collect(),
    })
}
