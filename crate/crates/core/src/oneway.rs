//! One-way ACAs are no stronger than finite automata: pseudo-fixed-points,
//! the adversarial schedule that pins the input band, and the semi-automaton
//! it induces.

use std::collections::HashMap;
use std::fmt;

use crate::engine::{Background, Configuration, Coord, RuleTable, ScheduleSpec, State};
use crate::{Error, Result};

/// Local rule of a one-way ACA as `f(left, center)`.
fn local(rule: &RuleTable) -> Result<impl Fn(State, State) -> State + '_> {
    let n = rule.neighborhood();
    let (li, ci) = match (n.iter().position(|&o| o == Coord(-1, 0)), n.iter().position(|&o| o == Coord(0, 0))) {
        (Some(l), Some(c)) if rule.dim() == 1 && n.len() == 2 => (l, c),
        _ => return Err(Error::Ineligible("rule is not one-way (-1, 0)".into())),
    };
    Ok(move |l: State, c: State| {
        let mut t = [0; 2];
        t[li] = l;
        t[ci] = c;
        rule.apply(&t)
    })
}

/// First state that repeats in `s, f(q, s), f(q, f(q, s)), ...`, and the
/// number of sequence elements generated to find it (at most `q + 1`).
pub fn pseudo_fixed_point_traced(rule: &RuleTable, q: State, s: State) -> Result<(State, usize)> {
    let f = local(rule)?;
    let mut seen = vec![false; rule.q() as usize];
    let mut x = s;
    let mut n = 1;
    while !seen[x as usize] {
        seen[x as usize] = true;
        x = f(q, x);
        n += 1;
    }
    Ok((x, n))
}

pub fn pseudo_fixed_point(rule: &RuleTable, q: State, s: State) -> Result<State> {
    pseudo_fixed_point_traced(rule, q, s).map(|(x, _)| x)
}

/// `c0 = ... p_L p_L w p_R p_R ...` with `w` on cells `1..=n`, `l = 0` and
/// `r = n + 1`. Cell `l` holds the last letter of `p_L`, cell `r` the first of `p_R`.
#[derive(Clone, Debug)]
pub struct OneWayInstance {
    pub rule: RuleTable,
    pub p_l: Vec<State>,
    pub p_r: Vec<State>,
    pub w: Vec<State>,
    pub l: i64,
    pub r: i64,
}

impl OneWayInstance {
    pub fn new(rule: &RuleTable, p_l: &[State], p_r: &[State], w: &[State]) -> Result<Self> {
        let _ = local(rule)?;
        if p_l.is_empty() || p_r.is_empty() {
            return Err(Error::InvalidConfiguration { cell: Coord(0, 0), state: 0, q: rule.q() });
        }
        for (i, &s) in p_l.iter().chain(p_r).chain(w).enumerate() {
            if s >= rule.q() {
                return Err(Error::InvalidConfiguration { cell: Coord(i as i64, 0), state: s, q: rule.q() });
            }
        }
        Ok(OneWayInstance {
            rule: rule.clone(),
            p_l: p_l.to_vec(),
            p_r: p_r.to_vec(),
            w: w.to_vec(),
            l: 0,
            r: w.len() as i64 + 1,
        })
    }

    /// `c0(j)`.
    pub fn initial(&self, j: i64) -> State {
        let (ml, mr) = (self.p_l.len() as i64, self.p_r.len() as i64);
        if j <= self.l {
            self.p_l[(j - self.l + ml - 1).rem_euclid(ml) as usize]
        } else if j >= self.r {
            self.p_r[(j - self.r).rem_euclid(mr) as usize]
        } else {
            self.w[(j - 1) as usize]
        }
    }

    pub fn configuration(&self) -> Result<Configuration> {
        let (ml, mr) = (self.p_l.len() as i64, self.p_r.len() as i64);
        let per = ml * mr / gcd(ml, mr);
        let bg = Background::from_fn(1, self.r, [per, 1], |c| self.initial(c.0))?;
        let mut c = Configuration::new(bg);
        for j in self.l + 1..self.r {
            c.set(Coord(j, 0), self.initial(j));
        }
        Ok(c)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The left region `{.., l}` updated as a whole stays `|p_L|`-periodic, so it
/// evolves exactly as a cyclic block of `|p_L|` cells ending at cell `l`.
fn left_step(f: &impl Fn(State, State) -> State, block: &[State]) -> Vec<State> {
    let m = block.len();
    (0..m).map(|i| f(block[(i + m - 1) % m], block[i])).collect()
}

/// Value of cell `l` when the left region's orbit first enters its cycle.
/// That value recurs infinitely often under whole-region updates.
pub fn left_region_pfp(inst: &OneWayInstance) -> Result<State> {
    let f = local(&inst.rule)?;
    let mut block: Vec<State> = (inst.l - inst.p_l.len() as i64 + 1..=inst.l).map(|j| inst.initial(j)).collect();
    let mut seen = HashMap::new();
    let mut k = 0usize;
    while !seen.contains_key(&block) {
        seen.insert(block.clone(), k);
        block = left_step(&f, &block);
        k += 1;
    }
    Ok(*block.last().expect("non-empty block"))
}

/// The schedule that repeats: update `{.., l}` until `l` holds `x_l`; update
/// each band cell `l+1 .. r-1` until it holds its pseudo-fixed-point; update
/// `{r, ..}` once. Every "until" loop updates at least once.
///
/// Sets are over the finite window `[l - |p_L| + 1, r + right_width - 1]`.
/// Truncating the right side is exact because nothing reads its right neighbor.
#[derive(Clone, Debug)]
pub struct AdversarialSchedule {
    pub lo: i64,
    pub hi: i64,
    pub prefix: Vec<Vec<Coord>>,
    pub period: Vec<Vec<Coord>>,
    /// `x_l ..= x_{r-1}`.
    pub x: Vec<State>,
    /// Band states `l ..= r-1` after each cycle of the prefix and period.
    pub bands: Vec<Vec<State>>,
    /// Window states at the end of the run.
    pub last: Vec<State>,
}

impl AdversarialSchedule {
    /// The set applied at time `t`.
    pub fn set(&self, t: usize) -> &[Coord] {
        if t < self.prefix.len() {
            &self.prefix[t]
        } else {
            &self.period[(t - self.prefix.len()) % self.period.len()]
        }
    }

    /// The periodic tail as a scripted schedule; fairness is checked on bind.
    pub fn spec(&self) -> ScheduleSpec {
        ScheduleSpec::Scripted { sets: self.period.clone(), fair: true }
    }
}

struct Runner<'a, F> {
    f: F,
    inst: &'a OneWayInstance,
    lo: i64,
    states: Vec<State>,
    cap: usize,
}

impl<F: Fn(State, State) -> State> Runner<'_, F> {
    fn idx(&self, j: i64) -> usize {
        (j - self.lo) as usize
    }

    fn get(&self, j: i64) -> State {
        self.states[self.idx(j)]
    }

    fn update_left(&mut self) {
        let a = self.idx(self.lo);
        let b = self.idx(self.inst.l);
        let next = left_step(&self.f, &self.states[a..=b]);
        self.states[a..=b].copy_from_slice(&next);
    }

    fn update_cell(&mut self, j: i64) {
        let i = self.idx(j);
        self.states[i] = (self.f)(self.states[i - 1], self.states[i]);
    }

    fn update_right(&mut self) {
        let start = self.idx(self.inst.r);
        for i in (start..self.states.len()).rev() {
            self.states[i] = (self.f)(self.states[i - 1], self.states[i]);
        }
    }

    /// One cycle of the schedule; returns the sets applied.
    fn cycle(&mut self, x: &[State]) -> Result<Vec<Vec<Coord>>> {
        let (l, r) = (self.inst.l, self.inst.r);
        let mut sets = Vec::new();
        let left: Vec<Coord> = (self.lo..=l).map(|j| Coord(j, 0)).collect();
        let mut n = 0;
        loop {
            self.update_left();
            sets.push(left.clone());
            n += 1;
            if self.get(l) == x[0] {
                break;
            }
            if n > self.cap {
                return Err(Error::Internal(format!("cell {l} never returned to {}", x[0])));
            }
        }
        for j in l + 1..r {
            let target = x[(j - l) as usize];
            let mut n = 0;
            loop {
                self.update_cell(j);
                sets.push(vec![Coord(j, 0)]);
                n += 1;
                if self.get(j) == target {
                    break;
                }
                if n > self.cap {
                    return Err(Error::Internal(format!("cell {j} never returned to {target}")));
                }
            }
        }
        self.update_right();
        let hi = self.lo + self.states.len() as i64 - 1;
        sets.push((r..=hi).map(|j| Coord(j, 0)).collect());
        Ok(sets)
    }
}

/// Builds the schedule by running it. Cycles are recorded until the left
/// block repeats its state at a cycle boundary (from the second cycle on,
/// band loops have fixed length); the first cycles form the prefix.
pub fn build_adversarial_schedule(inst: &OneWayInstance) -> Result<AdversarialSchedule> {
    let f = local(&inst.rule)?;
    let q = inst.rule.q() as usize;
    let ml = inst.p_l.len();
    let right_width = 2 * inst.p_r.len() as i64;
    let lo = inst.l - ml as i64 + 1;
    let hi = inst.r + right_width - 1;

    let mut x = vec![left_region_pfp(inst)?];
    for j in inst.l + 1..inst.r {
        let prev = *x.last().expect("x_l");
        x.push(pseudo_fixed_point(&inst.rule, prev, inst.initial(j))?);
    }

    // W_L bound on the left loop: q^|p_L| block states, times |p_L| phases.
    let cap = q.saturating_pow(ml as u32).saturating_mul(ml + 1).max(q + 1);
    let mut run = Runner { f, inst, lo, states: (lo..=hi).map(|j| inst.initial(j)).collect(), cap };

    let mut cycles: Vec<Vec<Vec<Coord>>> = Vec::new();
    let mut bands = Vec::new();
    let mut starts: HashMap<Vec<State>, usize> = HashMap::new();
    let left_block = |run: &Runner<_>| run.states[..ml].to_vec();
    let repeat_at = loop {
        if !cycles.is_empty() {
            if let Some(&k) = starts.get(&left_block(&run)) {
                break k;
            }
            starts.insert(left_block(&run), cycles.len());
        }
        cycles.push(run.cycle(&x)?);
        let a = run.idx(inst.l);
        let b = run.idx(inst.r - 1);
        bands.push(run.states[a..=b].to_vec());
    };
    let prefix = cycles[..repeat_at].concat();
    let period = cycles[repeat_at..].concat();
    Ok(AdversarialSchedule { lo, hi, prefix, period, x, bands, last: run.states })
}

/// `B = (S, S ∪ {#}, δ)`; `#` is encoded as symbol `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiAutomaton {
    pub q: State,
    /// `delta[state * (q + 1) + symbol]`.
    pub delta: Vec<State>,
}

impl SemiAutomaton {
    pub fn hash(&self) -> State {
        self.q
    }

    pub fn step(&self, state: State, symbol: State) -> State {
        self.delta[(state * (self.q + 1) + symbol) as usize]
    }

    /// States after each prefix of `w`.
    pub fn trace(&self, start: State, w: &[State]) -> Vec<State> {
        let mut s = start;
        w.iter()
            .map(|&a| {
                s = self.step(s, a);
                s
            })
            .collect()
    }
}

impl fmt::Display for SemiAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "q\\s")?;
        for s in 0..self.q {
            write!(f, " {s:>2}")?;
        }
        writeln!(f, "  #")?;
        for a in 0..self.q {
            write!(f, "{a:>3}")?;
            for s in 0..=self.q {
                write!(f, " {:>2}", self.step(a, s))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// `δ(q, s) = pf(q, s)`; `δ(q, #)` summarizes the right region by the state
/// cell `r` keeps returning to under a constant left input `q`, namely
/// `pf(q, p_R[0])`.
pub fn extract_semiautomaton(rule: &RuleTable, p_r: &[State]) -> Result<SemiAutomaton> {
    let q = rule.q();
    let first = *p_r.first().ok_or_else(|| Error::Unsupported("empty right period".into()))?;
    let mut delta = Vec::with_capacity((q * (q + 1)) as usize);
    for a in 0..q {
        for s in 0..q {
            delta.push(pseudo_fixed_point(rule, a, s)?);
        }
        delta.push(pseudo_fixed_point(rule, a, first)?);
    }
    Ok(SemiAutomaton { q, delta })
}

#[derive(Clone, Debug)]
pub struct WordReport {
    pub w: Vec<State>,
    /// Band `x_{l+1} .. x_{r-1}` observed after the last cycle.
    pub band: Vec<State>,
    /// Automaton trace from `x_l` over `w`.
    pub trace: Vec<State>,
    /// Band held `x_l .. x_{r-1}` after every cycle.
    pub stable: bool,
    pub final_hash: State,
}

impl WordReport {
    pub fn equal(&self) -> bool {
        self.stable && self.band == self.trace
    }
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub automaton: SemiAutomaton,
    pub words: Vec<WordReport>,
}

impl EquivalenceReport {
    pub fn all_equal(&self) -> bool {
        self.words.iter().all(WordReport::equal)
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        for r in &self.words {
            let w: String = r.w.iter().map(|s| s.to_string()).collect();
            let b: String = r.band.iter().map(|s| s.to_string()).collect();
            let verdict = if r.equal() { "equal" } else { "DIFFERENT" };
            writeln!(f, "w={w:<12} band={b:<12} {verdict}")?;
        }
        let n = self.words.iter().filter(|r| r.equal()).count();
        write!(f, "{n}/{} words equal", self.words.len())
    }
}

/// Runs each word under its adversarial schedule and compares the pinned band
/// with the semi-automaton's trace.
pub fn verify_fsm_equivalence(
    rule: &RuleTable,
    p_l: &[State],
    p_r: &[State],
    words: &[Vec<State>],
) -> Result<EquivalenceReport> {
    let automaton = extract_semiautomaton(rule, p_r)?;
    let mut out = Vec::new();
    for w in words {
        let inst = OneWayInstance::new(rule, p_l, p_r, w)?;
        let sched = build_adversarial_schedule(&inst)?;
        let x_l = left_region_pfp(&inst)?;
        let trace = automaton.trace(x_l, w);
        let stable = sched.bands.iter().all(|b| *b == sched.x);
        let last = sched.bands.last().expect("at least one cycle");
        let last_x = *trace.last().unwrap_or(&x_l);
        out.push(WordReport {
            w: w.clone(),
            band: last[1..].to_vec(),
            trace,
            stable,
            final_hash: automaton.step(last_x, automaton.hash()),
        });
    }
    Ok(EquivalenceReport { automaton, words: out })
}
