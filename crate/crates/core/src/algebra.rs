//! Local algebra of a rule: commutativity, monotonicity and adjacent activity,
//! decided by pairing active transitions over overlapping placements.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::engine::{apply_update_set, local, Configuration, Coord, RuleTable, State};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum WitnessKind {
    Commutativity,
    Monotonicity,
    AdjacentActive,
}

/// A local context exhibiting a violation. Cell `i` sits at the origin and
/// `j` at the placement offset; `context` lists every cell either of them reads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverlapWitness {
    pub kind: WitnessKind,
    pub cells: (Coord, Coord),
    /// For monotonicity: the cell updated first (the other one loses activity).
    pub first: Coord,
    pub context: Vec<(Coord, State)>,
}

impl OverlapWitness {
    pub fn configuration(&self, dim: usize) -> Configuration {
        let mut c = Configuration::zeros(dim);
        for &(p, s) in &self.context {
            c.set(p, s);
        }
        c
    }

    /// Re-derives the violation on a concrete configuration with engine ops.
    pub fn replay(&self, rule: &RuleTable) -> bool {
        let rule = with_center(rule);
        let c = self.configuration(rule.dim());
        let (i, j) = self.cells;
        let active = |c: &Configuration, p: Coord| local(&rule, c, p) != c.get(p);
        if !(active(&c, i) && active(&c, j)) {
            return false;
        }
        match self.kind {
            WitnessKind::AdjacentActive => true,
            WitnessKind::Commutativity => {
                let ij = apply_update_set(&rule, &apply_update_set(&rule, &c, &[j]).unwrap(), &[i]).unwrap();
                let ji = apply_update_set(&rule, &apply_update_set(&rule, &c, &[i]).unwrap(), &[j]).unwrap();
                ij != ji
            }
            WitnessKind::Monotonicity => {
                let other = if self.first == i { j } else { i };
                let after = apply_update_set(&rule, &c, &[self.first]).unwrap();
                local(&rule, &after, other) == c.get(other)
            }
        }
    }
}

impl fmt::Display for OverlapWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            WitnessKind::Commutativity => "commutativity",
            WitnessKind::Monotonicity => "monotonicity",
            WitnessKind::AdjacentActive => "adjacent-active",
        };
        write!(f, "{kind} witness at cells {} and {}; context", self.cells.0, self.cells.1)?;
        for (p, s) in &self.context {
            if p.1 == 0 && self.context.iter().all(|(q, _)| q.1 == 0) {
                write!(f, " {}:{s}", p.0)?;
            } else {
                write!(f, " {p}:{s}")?;
            }
        }
        if self.kind == WitnessKind::Monotonicity {
            write!(f, "; update {} first", self.first)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated(OverlapWitness),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
    pub fn witness(&self) -> Option<&OverlapWitness> {
        match self {
            Verdict::Holds => None,
            Verdict::Violated(w) => Some(w),
        }
    }
}

/// The rule with the zero offset appended if it was missing (the table ignores it).
fn with_center(rule: &RuleTable) -> RuleTable {
    if rule.center().is_some() {
        return rule.clone();
    }
    let mut n = rule.neighborhood().to_vec();
    n.push(Coord::ZERO);
    let k = rule.k();
    RuleTable::from_fn(rule.dim(), rule.q(), n, |t| rule.apply(&t[..k]))
        .expect("extended table")
        .named(rule.name())
}

/// One representative per `{d, -d}` of the non-zero neighbor displacements
/// `(N ∪ -N) \ {0}`: the cells whose updates can interact.
pub fn placements(rule: &RuleTable) -> Vec<Coord> {
    let set: BTreeSet<Coord> = rule
        .neighborhood()
        .iter()
        .flat_map(|&o| [o, -o])
        .filter(|&o| o != Coord::ZERO && o > -o)
        .collect();
    set.into_iter().collect()
}

struct Placement {
    delta: Coord,
    /// Pairs (index in N for i, index in N for j) of shared cells.
    overlap: Vec<(usize, usize)>,
    /// Index of j in i's neighborhood, if i reads j.
    i_reads_j: Option<usize>,
    /// Index of i in j's neighborhood, if j reads i.
    j_reads_i: Option<usize>,
    /// Context cells in witness order: i, j, then the rest by position.
    order: Vec<Coord>,
}

fn placement(rule: &RuleTable, delta: Coord) -> Placement {
    let n = rule.neighborhood();
    let mut overlap = Vec::new();
    for (a, &na) in n.iter().enumerate() {
        for (b, &nb) in n.iter().enumerate() {
            if na == delta + nb {
                overlap.push((a, b));
            }
        }
    }
    let i_reads_j = n.iter().position(|&o| o == delta);
    let j_reads_i = n.iter().position(|&o| o == -delta);
    let rest: BTreeSet<Coord> =
        n.iter().flat_map(|&o| [o, delta + o]).filter(|&p| p != Coord::ZERO && p != delta).collect();
    let mut order = vec![Coord::ZERO, delta];
    order.extend(rest);
    Placement { delta, overlap, i_reads_j, j_reads_i, order }
}

struct Found {
    key: Vec<State>,
    witness: OverlapWitness,
}

fn context(rule: &RuleTable, p: &Placement, ti: &[State], tj: &[State]) -> Vec<State> {
    let n = rule.neighborhood();
    p.order
        .iter()
        .map(|&cell| {
            if let Some(a) = n.iter().position(|&o| o == cell) {
                ti[a]
            } else {
                let b = n.iter().position(|&o| p.delta + o == cell).expect("context cell in a neighborhood");
                tj[b]
            }
        })
        .collect()
}

/// Walks every pair of compatible active transitions over every placement and
/// keeps the smallest violation found by `test`.
fn scan(
    rule: &RuleTable,
    kind: WitnessKind,
    test: impl Fn(&RuleTable, &Placement, (&[State], State), (&[State], State)) -> Option<Coord>,
) -> Verdict {
    let rule = with_center(rule);
    let active = rule.active_transitions();
    let mut best: Option<Found> = None;
    for delta in placements(&rule) {
        let p = placement(&rule, delta);
        let mut groups: HashMap<Vec<State>, Vec<usize>> = HashMap::new();
        for (idx, (t, _)) in active.iter().enumerate() {
            groups.entry(p.overlap.iter().map(|&(_, b)| t[b]).collect()).or_default().push(idx);
        }
        for (ti, ni) in &active {
            let key: Vec<State> = p.overlap.iter().map(|&(a, _)| ti[a]).collect();
            let Some(js) = groups.get(&key) else { continue };
            for &jx in js {
                let (tj, nj) = &active[jx];
                let Some(first) = test(&rule, &p, (ti, *ni), (tj, *nj)) else { continue };
                let ctx = context(&rule, &p, ti, tj);
                if best.as_ref().is_some_and(|b| b.key <= ctx) {
                    continue;
                }
                let witness = OverlapWitness {
                    kind,
                    cells: (Coord::ZERO, delta),
                    first,
                    context: {
                        let mut v: Vec<(Coord, State)> = p.order.iter().copied().zip(ctx.iter().copied()).collect();
                        v.sort();
                        v
                    },
                };
                best = Some(Found { key: ctx, witness });
            }
        }
        if best.is_some() {
            break;
        }
    }
    match best {
        Some(f) => Verdict::Violated(f.witness),
        None => Verdict::Holds,
    }
}

fn with_slot(t: &[State], slot: usize, s: State) -> Vec<State> {
    let mut v = t.to_vec();
    v[slot] = s;
    v
}

/// Both orders of two active neighboring singleton updates agree.
pub fn check_commutativity(rule: &RuleTable) -> Verdict {
    scan(rule, WitnessKind::Commutativity, |r, p, (ti, ni), (tj, nj)| {
        let i_ok = p.i_reads_j.is_none_or(|a| r.apply(&with_slot(ti, a, nj)) == ni);
        let j_ok = p.j_reads_i.is_none_or(|b| r.apply(&with_slot(tj, b, ni)) == nj);
        (!(i_ok && j_ok)).then_some(Coord::ZERO)
    })
}

/// An active cell stays active after any active neighbor is updated.
pub fn check_monotonicity(rule: &RuleTable) -> Verdict {
    scan(rule, WitnessKind::Monotonicity, |r, p, (ti, _), (tj, nj)| {
        let c = r.center().expect("centered rule");
        if let Some(a) = p.i_reads_j {
            if r.apply(&with_slot(ti, a, nj)) == ti[c] {
                return Some(p.delta);
            }
        }
        if let Some(b) = p.j_reads_i {
            let ni = r.apply(ti);
            if r.apply(&with_slot(tj, b, ni)) == tj[c] {
                return Some(Coord::ZERO);
            }
        }
        None
    })
}

/// No two neighboring cells are ever active together.
pub fn check_no_adjacent_active(rule: &RuleTable) -> Verdict {
    scan(rule, WitnessKind::AdjacentActive, |_, _, _, _| Some(Coord::ZERO))
}

/// Verdict line used by the command-line front end.
pub fn summary(rule: &RuleTable) -> (String, Vec<OverlapWitness>) {
    let verdicts = [
        (check_commutativity(rule), "commutative", "not commutative"),
        (check_monotonicity(rule), "monotonic", "not monotonic"),
        (check_no_adjacent_active(rule), "no-adjacent-active", "adjacent-active"),
    ];
    let words: Vec<&str> = verdicts.iter().map(|(v, yes, no)| if v.holds() { *yes } else { *no }).collect();
    let witnesses = verdicts.iter().filter_map(|(v, _, _)| v.witness().cloned()).collect();
    (words.join("; "), witnesses)
}
