use std::fmt;

use super::{Coord, State};
use crate::{Error, Result};

/// Canonical neighborhoods. Two-dimensional orders follow the usual rule-table
/// convention: von Neumann is (C, N, E, S, W), Moore is (C, N, NE, E, SE, S, SW, W, NW).
pub mod nbhd {
    use super::Coord;

    pub fn one_way() -> Vec<Coord> {
        vec![Coord(-1, 0), Coord(0, 0)]
    }
    pub fn first_neighbors() -> Vec<Coord> {
        vec![Coord(-1, 0), Coord(0, 0), Coord(1, 0)]
    }
    pub fn von_neumann() -> Vec<Coord> {
        vec![Coord::ZERO, Coord::N, Coord::E, Coord::S, Coord::W]
    }
    pub fn moore() -> Vec<Coord> {
        vec![
            Coord(0, 0),
            Coord(0, 1),
            Coord(1, 1),
            Coord(1, 0),
            Coord(1, -1),
            Coord(0, -1),
            Coord(-1, -1),
            Coord(-1, 0),
            Coord(-1, 1),
        ]
    }
}

/// A total local rule `f: S^k -> S`.
///
/// The table is indexed mixed-radix with the first neighbor most significant,
/// so for first neighbors `(l, c, r)` the index is `l q^2 + c q + r`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RuleTable {
    dim: usize,
    q: State,
    nbhd: Vec<Coord>,
    table: Vec<State>,
    name: String,
}

impl fmt::Debug for RuleTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RuleTable({}, d={}, q={}, k={})", self.name, self.dim, self.q, self.nbhd.len())
    }
}

impl RuleTable {
    pub fn new(dim: usize, q: State, nbhd: Vec<Coord>, table: Vec<State>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Unsupported(format!("dimension {dim}")));
        }
        if q == 0 {
            return Err(Error::InvalidRule("q must be positive".into()));
        }
        if dim == 1 && nbhd.iter().any(|c| c.1 != 0) {
            return Err(Error::InvalidRule("1D neighborhood with a y offset".into()));
        }
        let mut sorted = nbhd.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != nbhd.len() {
            return Err(Error::InvalidRule("duplicate neighborhood offsets".into()));
        }
        let size = (q as u128).checked_pow(nbhd.len() as u32).filter(|&s| s <= 1 << 28);
        match size {
            Some(s) if s as usize == table.len() => {}
            _ => return Err(Error::InvalidRule(format!("table has {} entries, expected q^k", table.len()))),
        }
        if let Some(&bad) = table.iter().find(|&&s| s >= q) {
            return Err(Error::InvalidRule(format!("table entry {bad} is not below q = {q}")));
        }
        Ok(RuleTable { dim, q, nbhd, table, name: String::from("custom") })
    }

    pub fn from_fn(dim: usize, q: State, nbhd: Vec<Coord>, f: impl Fn(&[State]) -> State) -> Result<Self> {
        let k = nbhd.len();
        let size = (q as usize).checked_pow(k as u32).filter(|&s| s <= 1 << 28);
        let size = size.ok_or_else(|| Error::InvalidRule("table too large".into()))?;
        let mut tuple = vec![0; k];
        let mut table = Vec::with_capacity(size);
        for idx in 0..size {
            decode_into(idx, q, &mut tuple);
            table.push(f(&tuple));
        }
        Self::new(dim, q, nbhd, table)
    }

    /// Elementary rule by Wolfram code: bit `4l + 2c + r` of `code` is `f(l, c, r)`.
    pub fn wolfram(code: u8) -> Self {
        Self::from_fn(1, 2, nbhd::first_neighbors(), |t| ((code >> (4 * t[0] + 2 * t[1] + t[2])) & 1) as State)
            .expect("elementary table")
            .named(format!("W{code}"))
    }

    /// Rule that never changes any cell.
    pub fn identity(dim: usize, q: State, nbhd: Vec<Coord>) -> Result<Self> {
        let c = nbhd
            .iter()
            .position(|&o| o == Coord::ZERO)
            .ok_or_else(|| Error::InvalidRule("identity needs the zero offset".into()))?;
        Ok(Self::from_fn(dim, q, nbhd, |t| t[c])?.named("identity"))
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn q(&self) -> State {
        self.q
    }
    pub fn neighborhood(&self) -> &[Coord] {
        &self.nbhd
    }
    pub fn k(&self) -> usize {
        self.nbhd.len()
    }
    pub fn table(&self) -> &[State] {
        &self.table
    }
    pub fn table_mut(&mut self) -> &mut [State] {
        &mut self.table
    }

    /// Position of the zero offset in the neighborhood.
    pub fn center(&self) -> Option<usize> {
        self.nbhd.iter().position(|&o| o == Coord::ZERO)
    }

    /// Largest |offset| along any axis.
    pub fn radius(&self) -> i64 {
        self.nbhd.iter().map(|c| c.linf()).max().unwrap_or(0)
    }

    pub fn index(&self, tuple: &[State]) -> usize {
        tuple.iter().fold(0usize, |acc, &s| acc * self.q as usize + s as usize)
    }

    pub fn tuple(&self, idx: usize) -> Vec<State> {
        let mut t = vec![0; self.k()];
        decode_into(idx, self.q, &mut t);
        t
    }

    pub fn apply(&self, tuple: &[State]) -> State {
        self.table[self.index(tuple)]
    }

    /// Entries `(tuple, new)` with `new` different from the center value.
    /// Requires the zero offset; returns nothing otherwise.
    pub fn active_transitions(&self) -> Vec<(Vec<State>, State)> {
        let Some(c) = self.center() else { return Vec::new() };
        (0..self.table.len())
            .filter_map(|idx| {
                let t = self.tuple(idx);
                let new = self.table[idx];
                (new != t[c]).then_some((t, new))
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        match self.center() {
            Some(_) => self.active_transitions().is_empty(),
            None => false,
        }
    }
}

pub(crate) fn decode_into(mut idx: usize, q: State, out: &mut [State]) {
    for slot in out.iter_mut().rev() {
        *slot = (idx % q as usize) as State;
        idx /= q as usize;
    }
}
