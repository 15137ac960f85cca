use crate::engine::{Background, Configuration, Coord, RuleTable, State};
use crate::{Error, Result};

/// Deterministic finite automaton over states `0..states` and symbols `0..symbols`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    pub states: State,
    pub symbols: State,
    /// `delta[q * symbols + s]`.
    pub delta: Vec<State>,
    pub start: State,
    pub accepting: Vec<bool>,
}

impl Dfa {
    pub fn new(states: State, symbols: State, delta: Vec<State>, start: State, accepting: Vec<bool>) -> Result<Self> {
        if delta.len() != (states * symbols) as usize || delta.iter().any(|&q| q >= states) || start >= states {
            return Err(Error::InvalidRule("malformed DFA".into()));
        }
        Ok(Dfa { states, symbols, delta, start, accepting })
    }

    pub fn step(&self, q: State, s: State) -> State {
        self.delta[(q * self.symbols + s) as usize]
    }

    pub fn run(&self, w: &[State]) -> State {
        w.iter().fold(self.start, |q, &s| self.step(q, s))
    }

    /// States after each prefix `w[..=i]`.
    pub fn trace(&self, w: &[State]) -> Vec<State> {
        let mut q = self.start;
        w.iter()
            .map(|&s| {
                q = self.step(q, s);
                q
            })
            .collect()
    }
}

/// One-way host running a DFA across its input: a raw symbol cell whose left
/// neighbor is a pair `(q, x)` becomes `(delta(q, s), s)`.
///
/// Pair `(q, x)` with `x` a symbol or the blank `|Σ|` is coded `q (|Σ| + 1) + x`;
/// raw symbols follow the pairs.
#[derive(Clone, Debug)]
pub struct FsmEmbedding {
    pub rule: RuleTable,
    pub dfa: Dfa,
}

impl FsmEmbedding {
    pub fn pair(&self, q: State, x: Option<State>) -> State {
        q * (self.dfa.symbols + 1) + x.unwrap_or(self.dfa.symbols)
    }

    pub fn raw(&self, s: State) -> State {
        self.dfa.states * (self.dfa.symbols + 1) + s
    }

    /// `(q, x)` of a pair state, `None` for a raw symbol.
    pub fn unpair(&self, h: State) -> Option<(State, Option<State>)> {
        let base = self.dfa.symbols + 1;
        (h < self.dfa.states * base).then(|| {
            let x = h % base;
            (h / base, (x < self.dfa.symbols).then_some(x))
        })
    }

    /// `w` on cells `1..=n` over a background of blank pairs in the start state.
    pub fn encode(&self, w: &[State]) -> Configuration {
        let blank = self.pair(self.dfa.start, None);
        let mut c = Configuration::new(Background::uniform(1, blank));
        for (i, &s) in w.iter().enumerate() {
            c.set(Coord(i as i64 + 1, 0), self.raw(s));
        }
        c
    }

    /// Final DFA state read from the limit configuration of a length-`n` input.
    pub fn decode_final(&self, limit: &Configuration, n: usize) -> Option<State> {
        self.unpair(limit.get(Coord(n as i64, 0))).map(|(q, _)| q)
    }
}

pub fn embed_fsm(dfa: &Dfa) -> FsmEmbedding {
    let base = dfa.symbols + 1;
    let pairs = dfa.states * base;
    let q = pairs + dfa.symbols;
    let d = dfa.clone();
    let rule = RuleTable::from_fn(1, q, vec![Coord(-1, 0), Coord(0, 0)], move |t| {
        let (l, c) = (t[0], t[1]);
        if l < pairs && c >= pairs {
            let s = c - pairs;
            d.step(l / base, s) * base + s
        } else {
            c
        }
    })
    .expect("valid table")
    .named("fsm");
    FsmEmbedding { rule, dfa: dfa.clone() }
}
