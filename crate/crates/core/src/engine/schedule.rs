use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Coord;
use crate::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum SweepDir {
    LeftToRight,
    RightToLeft,
    BottomToTop,
    TopToBottom,
}

impl SweepDir {
    pub const ALL: [SweepDir; 4] =
        [SweepDir::LeftToRight, SweepDir::RightToLeft, SweepDir::BottomToTop, SweepDir::TopToBottom];
}

/// Description of an update schedule, independent of any window.
#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleSpec {
    /// Every window cell at every step.
    Synchronous,
    /// Each cell independently with probability `p`.
    Alpha { p: f64, seed: u64 },
    /// Round-robin over a fresh permutation in each window of `window` steps
    /// (default: the number of cells), plus extra cells drawn with probability `extra`.
    FairRandom { seed: u64, window: Option<u64>, extra: f64 },
    /// One line of cells per step (a column or a row; a single cell in 1D).
    Sweep(SweepDir),
    /// Explicit update sets, repeated cyclically. `fair` asks for a fairness check.
    Scripted { sets: Vec<Vec<Coord>>, fair: bool },
}

impl ScheduleSpec {
    pub fn fair_random(seed: u64) -> Self {
        ScheduleSpec::FairRandom { seed, window: None, extra: 0.1 }
    }

    pub fn label(&self) -> String {
        match self {
            ScheduleSpec::Synchronous => "synchronous".into(),
            ScheduleSpec::Alpha { p, seed } => format!("alpha(p={p}, seed={seed})"),
            ScheduleSpec::FairRandom { seed, window, extra } => match window {
                Some(w) => format!("fair-random(seed={seed}, W={w}, extra={extra})"),
                None => format!("fair-random(seed={seed}, extra={extra})"),
            },
            ScheduleSpec::Sweep(d) => format!("sweep({d:?})"),
            ScheduleSpec::Scripted { sets, fair } => format!("scripted({} sets, fair={fair})", sets.len()),
        }
    }
}

/// A schedule bound to the cells of a window (indexed `0..n`).
///
/// Membership is a pure function of `(t, i)`, so dense and event-driven runs
/// see the same update sets.
#[derive(Clone, Debug)]
pub struct Schedule {
    spec: ScheduleSpec,
    n: usize,
    line: Vec<u32>,
    nlines: u64,
    sets: Vec<Vec<usize>>,
    member: Vec<Vec<bool>>,
    rng: ChaCha8Rng,
    w: u64,
}

const RR_STREAM: u64 = u64::MAX;

fn unit(x: u64) -> f64 {
    (x >> 11) as f64 / (1u64 << 53) as f64
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Schedule {
    pub fn bind(spec: &ScheduleSpec, cells: &[Coord]) -> Result<Self> {
        let n = cells.len();
        let seed = match spec {
            ScheduleSpec::Alpha { seed, .. } | ScheduleSpec::FairRandom { seed, .. } => *seed,
            _ => 0,
        };
        let mut s = Schedule {
            spec: spec.clone(),
            n,
            line: Vec::new(),
            nlines: 1,
            sets: Vec::new(),
            member: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            w: n.max(1) as u64,
        };
        match spec {
            ScheduleSpec::Alpha { p, .. } | ScheduleSpec::FairRandom { extra: p, .. }
                if !(0.0..=1.0).contains(p) =>
            {
                return Err(Error::Unsupported(format!("probability {p} outside [0, 1]")));
            }
            ScheduleSpec::FairRandom { window: Some(w), .. } => {
                if *w == 0 {
                    return Err(Error::Unsupported("fairness window must be positive".into()));
                }
                s.w = *w;
            }
            ScheduleSpec::Sweep(dir) => {
                let key = |c: &Coord| match dir {
                    SweepDir::LeftToRight => c.0,
                    SweepDir::RightToLeft => -c.0,
                    SweepDir::BottomToTop => c.1,
                    SweepDir::TopToBottom => -c.1,
                };
                let lo = cells.iter().map(key).min().unwrap_or(0);
                s.line = cells.iter().map(|c| (key(c) - lo) as u32).collect();
                s.nlines = s.line.iter().map(|&l| l as u64 + 1).max().unwrap_or(1);
            }
            ScheduleSpec::Scripted { sets, fair } => {
                let index: std::collections::HashMap<Coord, usize> =
                    cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
                for set in sets {
                    let mut v = Vec::with_capacity(set.len());
                    let mut m = vec![false; n];
                    for c in set {
                        let &i = index
                            .get(c)
                            .ok_or_else(|| Error::Unsupported(format!("scheduled cell {c} outside the window")))?;
                        if !m[i] {
                            m[i] = true;
                            v.push(i);
                        }
                    }
                    v.sort_unstable();
                    s.sets.push(v);
                    s.member.push(m);
                }
                if *fair {
                    if let Some(i) = (0..n).find(|&i| !s.member.iter().any(|m| m[i])) {
                        return Err(Error::FairnessViolation(cells[i]));
                    }
                }
            }
            _ => {}
        }
        Ok(s)
    }

    pub fn spec(&self) -> &ScheduleSpec {
        &self.spec
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of steps after which every cell has been offered an update at
    /// least once (for fair kinds).
    pub fn fairness_window(&self) -> Option<u64> {
        match &self.spec {
            ScheduleSpec::Synchronous => Some(1),
            ScheduleSpec::Alpha { .. } => None,
            ScheduleSpec::FairRandom { .. } => Some(self.w),
            ScheduleSpec::Sweep(_) => Some(self.nlines),
            ScheduleSpec::Scripted { .. } => {
                let covered = (0..self.n).all(|i| self.member.iter().any(|m| m[i]));
                (covered && !self.sets.is_empty()).then_some(self.sets.len() as u64)
            }
        }
    }

    pub fn check_fairness(&self, cells: &[Coord]) -> Result<()> {
        if let ScheduleSpec::Scripted { .. } = self.spec {
            if let Some(i) = (0..self.n).find(|&i| !self.member.iter().any(|m| m[i])) {
                return Err(Error::FairnessViolation(cells[i]));
            }
        }
        if let ScheduleSpec::Alpha { .. } = self.spec {
            if let Some(&c) = cells.first() {
                return Err(Error::FairnessViolation(c));
            }
        }
        Ok(())
    }

    fn rr_params(&self, k: u64) -> (u64, u64) {
        let n = self.n as u64;
        if n <= 1 {
            return (1, 0);
        }
        let mut r = self.rng.clone();
        r.set_stream(RR_STREAM);
        r.set_word_pos(4 * k as u128);
        let mut a = 1 + r.next_u64() % (n - 1);
        while gcd(a, n) != 1 {
            a = a % (n - 1) + 1;
        }
        (a, r.next_u64() % n)
    }

    fn rr_hit(&self, t: u64, i: usize, (a, b): (u64, u64)) -> bool {
        let n = self.n as u64;
        let pi = ((a as u128 * i as u128 + b as u128) % n as u128) as u64;
        pi % self.w == t % self.w
    }

    fn draw(&self, t: u64, i: usize) -> f64 {
        let mut r = self.rng.clone();
        r.set_stream(t);
        r.set_word_pos(2 * i as u128);
        unit(r.next_u64())
    }

    pub fn contains(&self, t: u64, i: usize) -> bool {
        match &self.spec {
            ScheduleSpec::Synchronous => i < self.n,
            ScheduleSpec::Alpha { p, .. } => self.draw(t, i) < *p,
            ScheduleSpec::FairRandom { extra, .. } => {
                self.rr_hit(t, i, self.rr_params(t / self.w)) || (*extra > 0.0 && self.draw(t, i) < *extra)
            }
            ScheduleSpec::Sweep(_) => self.line[i] as u64 == t % self.nlines,
            ScheduleSpec::Scripted { .. } => {
                !self.member.is_empty() && self.member[(t % self.member.len() as u64) as usize][i]
            }
        }
    }

    /// The update set `D_t` as sorted window indices.
    pub fn members(&self, t: u64) -> Vec<usize> {
        match &self.spec {
            ScheduleSpec::Synchronous => (0..self.n).collect(),
            ScheduleSpec::Alpha { p, .. } => self.bernoulli(t, *p, |_| false),
            ScheduleSpec::FairRandom { extra, .. } => {
                let params = self.rr_params(t / self.w);
                self.bernoulli(t, *extra, |i| self.rr_hit(t, i, params))
            }
            ScheduleSpec::Sweep(_) => {
                let l = t % self.nlines;
                (0..self.n).filter(|&i| self.line[i] as u64 == l).collect()
            }
            ScheduleSpec::Scripted { .. } => {
                if self.sets.is_empty() {
                    Vec::new()
                } else {
                    self.sets[(t % self.sets.len() as u64) as usize].clone()
                }
            }
        }
    }

    fn bernoulli(&self, t: u64, p: f64, forced: impl Fn(usize) -> bool) -> Vec<usize> {
        let mut r = self.rng.clone();
        r.set_stream(t);
        r.set_word_pos(0);
        (0..self.n)
            .filter(|&i| {
                let u = unit(r.next_u64());
                forced(i) || (p > 0.0 && u < p)
            })
            .collect()
    }

    /// Smallest `t' >= t` at which cell `i` may be scheduled. Exact for sweeps
    /// and synchronous schedules; for the other kinds it is simply `t`.
    pub fn next_hit(&self, t: u64, i: usize) -> u64 {
        match &self.spec {
            ScheduleSpec::Sweep(_) => {
                let l = self.line[i] as u64;
                let cur = t % self.nlines;
                t + (l + self.nlines - cur) % self.nlines
            }
            _ => t,
        }
    }

    /// Whether every `D_t` is known to be non-random and exact under `next_hit`.
    pub fn is_sweep(&self) -> bool {
        matches!(self.spec, ScheduleSpec::Sweep(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: i64) -> Vec<Coord> {
        (0..n).map(|x| Coord(x, 0)).collect()
    }

    #[test]
    fn fair_random_covers_every_window() {
        let cells = line(37);
        for w in [None, Some(5), Some(60)] {
            let s = Schedule::bind(&ScheduleSpec::FairRandom { seed: 9, window: w, extra: 0.0 }, &cells).unwrap();
            let win = s.fairness_window().unwrap();
            for k in 0..4 {
                let mut seen = vec![false; cells.len()];
                for t in k * win..(k + 1) * win {
                    for i in s.members(t) {
                        seen[i] = true;
                    }
                }
                assert!(seen.iter().all(|&b| b), "window {k} with W={w:?}");
            }
        }
    }

    #[test]
    fn members_agree_with_contains() {
        let cells = line(23);
        for spec in [
            ScheduleSpec::fair_random(3),
            ScheduleSpec::Alpha { p: 0.3, seed: 4 },
            ScheduleSpec::Sweep(SweepDir::RightToLeft),
            ScheduleSpec::Synchronous,
        ] {
            let s = Schedule::bind(&spec, &cells).unwrap();
            for t in 0..50 {
                let m = s.members(t);
                let c: Vec<usize> = (0..cells.len()).filter(|&i| s.contains(t, i)).collect();
                assert_eq!(m, c, "{spec:?} t={t}");
            }
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let cells = line(40);
        let a = Schedule::bind(&ScheduleSpec::fair_random(77), &cells).unwrap();
        let b = Schedule::bind(&ScheduleSpec::fair_random(77), &cells).unwrap();
        let c = Schedule::bind(&ScheduleSpec::fair_random(78), &cells).unwrap();
        let sa: Vec<_> = (0..100).map(|t| a.members(t)).collect();
        let sb: Vec<_> = (0..100).map(|t| b.members(t)).collect();
        let sc: Vec<_> = (0..100).map(|t| c.members(t)).collect();
        assert_eq!(sa, sb);
        assert_ne!(sa, sc);
    }

    #[test]
    fn unfair_script_is_rejected() {
        let cells = line(3);
        let spec = ScheduleSpec::Scripted { sets: vec![vec![Coord(0, 0)], vec![Coord(1, 0)]], fair: true };
        assert_eq!(Schedule::bind(&spec, &cells).unwrap_err(), Error::FairnessViolation(Coord(2, 0)));
        let lax = ScheduleSpec::Scripted { sets: vec![vec![Coord(0, 0)]], fair: false };
        assert!(Schedule::bind(&lax, &cells).is_ok());
    }

    #[test]
    fn sweep_next_hit() {
        let cells = line(5);
        let s = Schedule::bind(&ScheduleSpec::Sweep(SweepDir::LeftToRight), &cells).unwrap();
        assert_eq!(s.next_hit(7, 1), 11);
        assert_eq!(s.next_hit(7, 2), 7);
        assert!(s.contains(11, 1));
    }
}
