use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use super::State;
use crate::{Error, Result};

/// A cell of `Z^d` for `d <= 2`. In one dimension the second component is 0.
/// The y axis points north.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coord(pub i64, pub i64);

impl Coord {
    pub const ZERO: Coord = Coord(0, 0);
    pub const N: Coord = Coord(0, 1);
    pub const E: Coord = Coord(1, 0);
    pub const S: Coord = Coord(0, -1);
    pub const W: Coord = Coord(-1, 0);

    pub fn x(self) -> i64 {
        self.0
    }
    pub fn y(self) -> i64 {
        self.1
    }
    pub fn l1(self) -> i64 {
        self.0.abs() + self.1.abs()
    }
    pub fn linf(self) -> i64 {
        self.0.abs().max(self.1.abs())
    }
}

impl Add for Coord {
    type Output = Coord;
    fn add(self, o: Coord) -> Coord {
        Coord(self.0 + o.0, self.1 + o.1)
    }
}

impl Sub for Coord {
    type Output = Coord;
    fn sub(self, o: Coord) -> Coord {
        Coord(self.0 - o.0, self.1 - o.1)
    }
}

impl Neg for Coord {
    type Output = Coord;
    fn neg(self) -> Coord {
        Coord(-self.0, -self.1)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

/// Ultimately periodic background.
///
/// Inside the core box `[-(k+r), k+r]` (per axis) values are stored. Beyond the
/// threshold `k` each axis repeats with period `r`, continuing outward on both
/// sides: for `i_j > k` the value at `i + r e_j` equals the value at `i`, and
/// for `i_j < -k` the value at `i - r e_j` equals the value at `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Background {
    dim: usize,
    k: i64,
    r: [i64; 2],
    side: [i64; 2],
    core: Vec<State>,
}

impl Background {
    pub fn from_fn(dim: usize, k: i64, r: [i64; 2], f: impl Fn(Coord) -> State) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Unsupported(format!("dimension {dim}")));
        }
        if k < 0 || r[0] < 1 || (dim == 2 && r[1] < 1) {
            return Err(Error::InvalidRule("background threshold or period out of range".into()));
        }
        let r = if dim == 1 { [r[0], 1] } else { r };
        let half = [k + r[0], if dim == 2 { k + r[1] } else { 0 }];
        let side = [2 * half[0] + 1, 2 * half[1] + 1];
        let mut core = Vec::with_capacity((side[0] * side[1]) as usize);
        for y in -half[1]..=half[1] {
            for x in -half[0]..=half[0] {
                core.push(f(Coord(x, y)));
            }
        }
        Ok(Background { dim, k, r, side, core })
    }

    pub fn uniform(dim: usize, s: State) -> Self {
        Self::from_fn(dim, 0, [1, 1], |_| s).expect("valid uniform background")
    }

    /// Spatially periodic 1D background `word[x mod |word|]`.
    pub fn periodic_1d(word: &[State]) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::InvalidRule("empty periodic word".into()));
        }
        let p = word.len() as i64;
        Self::from_fn(1, 0, [p, 1], |c| word[c.0.rem_euclid(p) as usize])
    }

    /// Doubly periodic 2D background; `tile[y][x]` with row 0 at y = 0.
    pub fn periodic_2d(tile: &[Vec<State>]) -> Result<Self> {
        let h = tile.len() as i64;
        let w = tile.first().map_or(0, |r| r.len()) as i64;
        if h == 0 || w == 0 || tile.iter().any(|r| r.len() as i64 != w) {
            return Err(Error::InvalidRule("ragged or empty tile".into()));
        }
        Self::from_fn(2, 0, [w, h], |c| tile[c.1.rem_euclid(h) as usize][c.0.rem_euclid(w) as usize])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn threshold(&self) -> i64 {
        self.k
    }
    pub fn periods(&self) -> [i64; 2] {
        self.r
    }

    /// Half-width of the stored core box per axis.
    pub fn core_half(&self) -> [i64; 2] {
        [(self.side[0] - 1) / 2, (self.side[1] - 1) / 2]
    }

    fn fold(v: i64, k: i64, r: i64) -> i64 {
        if v > k {
            k + 1 + (v - k - 1).rem_euclid(r)
        } else if v < -k {
            -k - 1 - (-k - 1 - v).rem_euclid(r)
        } else {
            v
        }
    }

    pub fn get(&self, c: Coord) -> State {
        let x = Self::fold(c.0, self.k, self.r[0]);
        let y = if self.dim == 2 { Self::fold(c.1, self.k, self.r[1]) } else { 0 };
        let h = self.core_half();
        self.core[((y + h[1]) * self.side[0] + (x + h[0])) as usize]
    }

    pub fn max_state(&self) -> State {
        self.core.iter().copied().max().unwrap_or(0)
    }
}

/// Ultimately periodic configuration: background plus a finite, canonical set
/// of overrides. Overrides equal to the background are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    bg: Arc<Background>,
    overrides: BTreeMap<Coord, State>,
}

impl Configuration {
    pub fn new(bg: Background) -> Self {
        Configuration { bg: Arc::new(bg), overrides: BTreeMap::new() }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(Background::uniform(dim, 0))
    }

    /// 1D word on cells `offset..offset+len` over a zero background.
    pub fn from_word(word: &[State], offset: i64) -> Self {
        let mut c = Self::zeros(1);
        for (i, &s) in word.iter().enumerate() {
            c.set(Coord(offset + i as i64, 0), s);
        }
        c
    }

    /// 2D rows listed top to bottom; row 0 sits at `y = top`, column 0 at `x = left`.
    pub fn from_rows(rows: &[Vec<State>], left: i64, top: i64) -> Self {
        let mut c = Self::zeros(2);
        for (r, row) in rows.iter().enumerate() {
            for (x, &s) in row.iter().enumerate() {
                c.set(Coord(left + x as i64, top - r as i64), s);
            }
        }
        c
    }

    pub fn with_overrides(bg: Background, cells: impl IntoIterator<Item = (Coord, State)>) -> Self {
        let mut c = Self::new(bg);
        for (p, s) in cells {
            c.set(p, s);
        }
        c
    }

    pub fn dim(&self) -> usize {
        self.bg.dim
    }
    pub fn background(&self) -> &Background {
        &self.bg
    }
    pub fn overrides(&self) -> &BTreeMap<Coord, State> {
        &self.overrides
    }

    pub fn get(&self, c: Coord) -> State {
        match self.overrides.get(&c) {
            Some(&s) => s,
            None => self.bg.get(c),
        }
    }

    pub fn set(&mut self, c: Coord, s: State) {
        if self.bg.get(c) == s {
            self.overrides.remove(&c);
        } else {
            self.overrides.insert(c, s);
        }
    }

    /// Bounding box of the overrides, if any.
    pub fn support(&self) -> Option<Window> {
        let mut it = self.overrides.keys();
        let first = *it.next()?;
        let (mut lo, mut hi) = (first, first);
        for c in it {
            lo = Coord(lo.0.min(c.0), lo.1.min(c.1));
            hi = Coord(hi.0.max(c.0), hi.1.max(c.1));
        }
        Some(Window { lo, hi })
    }

    pub fn validate(&self, q: State) -> Result<()> {
        for (&cell, &state) in &self.overrides {
            if state >= q {
                return Err(Error::InvalidConfiguration { cell, state, q });
            }
        }
        if self.bg.max_state() >= q {
            return Err(Error::InvalidConfiguration { cell: Coord::ZERO, state: self.bg.max_state(), q });
        }
        Ok(())
    }

    /// States of a rectangular window, rows top to bottom.
    pub fn rows(&self, w: &Window) -> Vec<Vec<State>> {
        (w.lo.1..=w.hi.1)
            .rev()
            .map(|y| (w.lo.0..=w.hi.0).map(|x| self.get(Coord(x, y))).collect())
            .collect()
    }

    /// States of a 1D window.
    pub fn word(&self, lo: i64, hi: i64) -> Vec<State> {
        (lo..=hi).map(|x| self.get(Coord(x, 0))).collect()
    }
}

/// Inclusive rectangle of cells.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub lo: Coord,
    pub hi: Coord,
}

impl Window {
    pub fn new(lo: Coord, hi: Coord) -> Self {
        Window { lo, hi }
    }
    pub fn line(lo: i64, hi: i64) -> Self {
        Window { lo: Coord(lo, 0), hi: Coord(hi, 0) }
    }
    pub fn width(&self) -> i64 {
        self.hi.0 - self.lo.0 + 1
    }
    pub fn height(&self) -> i64 {
        self.hi.1 - self.lo.1 + 1
    }
    pub fn len(&self) -> usize {
        (self.width().max(0) * self.height().max(0)) as usize
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn contains(&self, c: Coord) -> bool {
        c.0 >= self.lo.0 && c.0 <= self.hi.0 && c.1 >= self.lo.1 && c.1 <= self.hi.1
    }
    pub fn grow(&self, by: i64, dim: usize) -> Window {
        let dy = if dim == 2 { by } else { 0 };
        Window { lo: Coord(self.lo.0 - by, self.lo.1 - dy), hi: Coord(self.hi.0 + by, self.hi.1 + dy) }
    }
    pub fn union(&self, o: &Window) -> Window {
        Window {
            lo: Coord(self.lo.0.min(o.lo.0), self.lo.1.min(o.lo.1)),
            hi: Coord(self.hi.0.max(o.hi.0), self.hi.1.max(o.hi.1)),
        }
    }
    /// Row-major cells, bottom row first.
    pub fn cells(&self) -> impl Iterator<Item = Coord> + '_ {
        (self.lo.1..=self.hi.1).flat_map(move |y| (self.lo.0..=self.hi.0).map(move |x| Coord(x, y)))
    }
}
