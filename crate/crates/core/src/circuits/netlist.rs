//! Planar dual-rail netlists as sequences of operations on a stack of rails.
//!
//! Rails are horizontal signal tracks, listed top to bottom. Every operation
//! acts on one rail or on two adjacent rails, so a netlist is planar and
//! feed-forward by construction: signals only ever move left to right.

use std::collections::BTreeMap;
use std::fmt;

use crate::engine::RuleTable;
use crate::{Error, Result};

/// One step of a netlist. Two-rail operations accept their operands in either
/// vertical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    /// Copy `src`; the copy is inserted directly below it.
    Fork { src: String, copy: String },
    /// Fires `out` once both `a` and `b` have fired.
    Dual { a: String, b: String, out: String },
    /// Fires `out` when either input fires; at most one may ever carry a signal.
    Merge { a: String, b: String, out: String },
    /// Exchanges two adjacent rails through a CROSS; at most one may carry a signal.
    Swap { a: String, b: String },
}

impl Op {
    pub fn kind(&self) -> &'static str {
        match self {
            Op::Fork { .. } => "FORK",
            Op::Dual { .. } => "DUAL",
            Op::Merge { .. } => "MERGE",
            Op::Swap { .. } => "CROSS",
        }
    }

    fn defines(&self) -> Option<&str> {
        match self {
            Op::Fork { copy, .. } => Some(copy),
            Op::Dual { out, .. } | Op::Merge { out, .. } => Some(out),
            Op::Swap { .. } => None,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Fork { src, copy } => write!(f, "fork {src} -> {copy}"),
            Op::Dual { a, b, out } => write!(f, "dual {a} {b} -> {out}"),
            Op::Merge { a, b, out } => write!(f, "merge {a} {b} -> {out}"),
            Op::Swap { a, b } => write!(f, "swap {a} {b}"),
        }
    }
}

/// A named dual-rail value: the true rail fires for 1, the false rail for 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualRail {
    pub name: String,
    pub t: String,
    pub f: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitNetlist {
    pub name: String,
    /// Initial rails, top to bottom. Rails not bound to an input never fire.
    pub rails: Vec<String>,
    pub inputs: Vec<DualRail>,
    pub ops: Vec<Op>,
    pub outputs: Vec<DualRail>,
}

/// Where an operation sits on the rail stack: the upper slot it touches.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub(crate) struct Slot {
    pub upper: usize,
    /// For two-rail operations: whether the first operand is the upper one.
    pub first_on_top: bool,
}

fn position(stack: &[String], name: &str, later: &[Op]) -> Result<usize> {
    if let Some(i) = stack.iter().position(|s| s == name) {
        return Ok(i);
    }
    if later.iter().any(|op| op.defines() == Some(name)) {
        return Err(Error::Cyclic);
    }
    Err(Error::Routing(format!("signal {name} is not on a rail")))
}

/// Applies `ops[k]` to the rail stack; `ops[k+1..]` only serve to tell a
/// forward reference (a cycle) from an unknown name.
pub(crate) fn apply(stack: &mut Vec<String>, ops: &[Op], k: usize) -> Result<Slot> {
    let op = &ops[k];
    let later = &ops[k + 1..];
    if let Some(d) = op.defines() {
        if stack.iter().any(|s| s == d) || ops[..k].iter().any(|o| o.defines() == Some(d)) {
            return Err(Error::Routing(format!("signal {d} is defined twice")));
        }
    }
    let pair = |stack: &[String], a: &str, b: &str| -> Result<Slot> {
        let (i, j) = (position(stack, a, later)?, position(stack, b, later)?);
        if i.abs_diff(j) != 1 {
            return Err(Error::Routing(format!("{op}: rails {a} and {b} are not adjacent")));
        }
        Ok(Slot { upper: i.min(j), first_on_top: i < j })
    };
    match op {
        Op::Fork { src, copy } => {
            let i = position(stack, src, later)?;
            stack.insert(i + 1, copy.clone());
            Ok(Slot { upper: i, first_on_top: true })
        }
        Op::Dual { a, b, out } | Op::Merge { a, b, out } => {
            let s = pair(stack, a, b)?;
            stack[s.upper] = out.clone();
            stack.remove(s.upper + 1);
            Ok(s)
        }
        Op::Swap { a, b } => {
            let s = pair(stack, a, b)?;
            stack.swap(s.upper, s.upper + 1);
            Ok(s)
        }
    }
}

impl CircuitNetlist {
    /// Checks names, adjacency and acyclicity; returns the final rail stack.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut stack = self.rails.clone();
        let mut seen = std::collections::BTreeSet::new();
        for r in &self.rails {
            if !seen.insert(r) {
                return Err(Error::Routing(format!("rail {r} listed twice")));
            }
        }
        for i in &self.inputs {
            for r in [&i.t, &i.f] {
                if !self.rails.contains(r) {
                    return Err(Error::Routing(format!("input {} names unknown rail {r}", i.name)));
                }
            }
        }
        for k in 0..self.ops.len() {
            apply(&mut stack, &self.ops, k)?;
        }
        for o in &self.outputs {
            for r in [&o.t, &o.f] {
                if !stack.contains(r) {
                    return Err(Error::Routing(format!("output {} names {r}, which is not a final rail", o.name)));
                }
            }
        }
        Ok(stack)
    }

    /// Gate counts by kind.
    pub fn census(&self) -> BTreeMap<&'static str, usize> {
        let mut m = BTreeMap::new();
        for op in &self.ops {
            *m.entry(op.kind()).or_insert(0) += 1;
        }
        m
    }

    /// Text form; see `parse`.
    pub fn to_text(&self) -> String {
        let mut out = format!("circuit {}\nrails {}\n", self.name, self.rails.join(" "));
        let pairs = |v: &[DualRail]| v.iter().map(|p| format!("{}={},{}", p.name, p.t, p.f)).collect::<Vec<_>>();
        if !self.inputs.is_empty() {
            out += &format!("inputs {}\n", pairs(&self.inputs).join(" "));
        }
        for op in &self.ops {
            out += &format!("{op}\n");
        }
        if !self.outputs.is_empty() {
            out += &format!("outputs {}\n", pairs(&self.outputs).join(" "));
        }
        out
    }

    /// Parses the line format written by `to_text`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut net = CircuitNetlist { name: String::new(), rails: vec![], inputs: vec![], ops: vec![], outputs: vec![] };
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::parse(n + 1, 1, msg.to_string());
            let words: Vec<&str> = line.split_whitespace().collect();
            let arrow = |w: &[&str], args: usize| -> Result<(Vec<String>, String)> {
                if w.len() != args + 3 || w[args + 1] != "->" {
                    return Err(err(&format!("expected '{} {}-> OUT'", w[0], "X ".repeat(args))));
                }
                Ok((w[1..=args].iter().map(|s| s.to_string()).collect(), w[args + 2].to_string()))
            };
            let dual_rails = |w: &[&str]| -> Result<Vec<DualRail>> {
                w.iter()
                    .map(|p| {
                        let (name, rails) = p.split_once('=').ok_or_else(|| err("expected NAME=TRUE,FALSE"))?;
                        let (t, f) = rails.split_once(',').ok_or_else(|| err("expected NAME=TRUE,FALSE"))?;
                        Ok(DualRail { name: name.into(), t: t.into(), f: f.into() })
                    })
                    .collect()
            };
            match words[0] {
                "circuit" => net.name = words[1..].join(" "),
                "rails" => net.rails.extend(words[1..].iter().map(|s| s.to_string())),
                "inputs" => net.inputs.extend(dual_rails(&words[1..])?),
                "outputs" => net.outputs.extend(dual_rails(&words[1..])?),
                "fork" => {
                    let (a, out) = arrow(&words, 1)?;
                    net.ops.push(Op::Fork { src: a[0].clone(), copy: out });
                }
                "dual" | "merge" => {
                    let (a, out) = arrow(&words, 2)?;
                    let (a, b) = (a[0].clone(), a[1].clone());
                    net.ops.push(if words[0] == "dual" { Op::Dual { a, b, out } } else { Op::Merge { a, b, out } });
                }
                "swap" => {
                    if words.len() != 3 {
                        return Err(err("expected 'swap A B'"));
                    }
                    net.ops.push(Op::Swap { a: words[1].into(), b: words[2].into() });
                }
                w => return Err(err(&format!("unknown directive {w}"))),
            }
        }
        net.validate()?;
        Ok(net)
    }
}

/// Builds netlists over named signals, tracking the rail stack as it goes.
#[derive(Clone, Debug)]
pub struct NetlistBuilder {
    net: CircuitNetlist,
    stack: Vec<String>,
    fresh: usize,
}

impl NetlistBuilder {
    pub fn new(name: &str) -> Self {
        NetlistBuilder {
            net: CircuitNetlist { name: name.into(), rails: vec![], inputs: vec![], ops: vec![], outputs: vec![] },
            stack: vec![],
            fresh: 0,
        }
    }

    /// Appends a dual-rail input below the existing rails.
    pub fn input(&mut self, name: &str) -> DualRail {
        let p = DualRail { name: name.into(), t: name.into(), f: format!("~{name}") };
        self.rail(&p.t);
        self.rail(&p.f);
        self.net.inputs.push(p.clone());
        p
    }

    /// Appends a rail that is never driven.
    pub fn rail(&mut self, name: &str) -> String {
        self.net.rails.push(name.into());
        self.stack.push(name.into());
        name.into()
    }

    pub fn stack(&self) -> &[String] {
        &self.stack
    }

    fn fresh(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    fn push(&mut self, op: Op) -> Result<()> {
        self.net.ops.push(op);
        let k = self.net.ops.len() - 1;
        apply(&mut self.stack, &self.net.ops, k).inspect_err(|_| {
            self.net.ops.pop();
        })?;
        Ok(())
    }

    pub fn fork(&mut self, src: &str) -> Result<String> {
        let copy = self.fresh(&format!("{}'", src.trim_end_matches(|c: char| c.is_ascii_digit())));
        self.push(Op::Fork { src: src.into(), copy: copy.clone() })?;
        Ok(copy)
    }

    pub fn dual(&mut self, a: &str, b: &str) -> Result<String> {
        let out = self.fresh("d");
        self.push(Op::Dual { a: a.into(), b: b.into(), out: out.clone() })?;
        Ok(out)
    }

    pub fn merge(&mut self, a: &str, b: &str) -> Result<String> {
        let out = self.fresh("m");
        self.push(Op::Merge { a: a.into(), b: b.into(), out: out.clone() })?;
        Ok(out)
    }

    pub fn swap(&mut self, a: &str, b: &str) -> Result<()> {
        self.push(Op::Swap { a: a.into(), b: b.into() })
    }

    /// Moves `s` up by swapping it with the rail above, `n` times.
    pub fn raise(&mut self, s: &str, n: usize) -> Result<()> {
        for _ in 0..n {
            let i = self.stack.iter().position(|r| r == s).ok_or_else(|| Error::Routing(format!("no rail {s}")))?;
            let above = self.stack[i - 1].clone();
            self.swap(&above, s)?;
        }
        Ok(())
    }

    /// Fan-out of an adjacent pair `[t, f]`: fork both rails, then cross the
    /// inner copies. Produces `[t, f, t', f']`.
    pub fn fanout(&mut self, p: &DualRail) -> Result<(DualRail, DualRail)> {
        let t2 = self.fork(&p.t)?;
        let f2 = self.fork(&p.f)?;
        self.swap(&t2, &p.f)?;
        let copy = DualRail { name: format!("{}'", p.name), t: t2, f: f2 };
        Ok((p.clone(), copy))
    }

    /// The four minterms of two adjacent pairs `[a, ~a, b, ~b]`, returned as
    /// `(name, a, b)` in final rail order.
    pub fn minterms(&mut self, a: &DualRail, b: &DualRail) -> Result<[(String, bool, bool); 4]> {
        let na2 = self.fork(&a.f)?;
        let b2 = self.fork(&b.t)?;
        let nb2 = self.fork(&b.f)?;
        self.swap(&a.t, &a.f)?;
        let a2 = self.fork(&a.t)?;
        // [~a, a, a2, ~a2, b, b2, ~b, ~b2]
        let d1 = self.dual(&na2, &b.t)?; // ~a & b
        self.swap(&a2, &d1)?;
        self.swap(&a.t, &d1)?;
        self.swap(&b2, &b.f)?;
        let d2 = self.dual(&a2, &b.f)?; // a & ~b
        self.swap(&d2, &b2)?;
        let d3 = self.dual(&a.t, &b2)?; // a & b
        self.swap(&d3, &d2)?;
        self.swap(&d1, &d2)?;
        self.swap(&a.f, &d2)?;
        self.swap(&d3, &nb2)?;
        self.swap(&d1, &nb2)?;
        let d4 = self.dual(&a.f, &nb2)?; // ~a & ~b
        Ok([(d2, true, false), (d4, false, false), (d1, false, true), (d3, true, true)])
    }

    /// Dual-rail NAND of adjacent pairs `[a, ~a, b, ~b]`, leaving `[nand, and]`.
    pub fn nand(&mut self, a: &DualRail, b: &DualRail) -> Result<DualRail> {
        let [(d2, ..), (d4, ..), (d1, ..), (d3, ..)] = self.minterms(a, b)?;
        self.swap(&d2, &d4)?;
        let m1 = self.merge(&d2, &d1)?;
        let m2 = self.merge(&d4, &m1)?;
        Ok(DualRail { name: self.fresh("nand"), t: m2, f: d3 })
    }

    pub fn output(&mut self, name: &str, p: &DualRail) {
        self.net.outputs.push(DualRail { name: name.into(), t: p.t.clone(), f: p.f.clone() });
    }

    pub fn finish(self) -> Result<CircuitNetlist> {
        self.net.validate()?;
        Ok(self.net)
    }
}

/// Dual-rail NAND: inputs `A`, `B`; outputs `nand` and `and`.
pub fn build_nand_netlist() -> CircuitNetlist {
    let mut b = NetlistBuilder::new("nand");
    let (x, y) = (b.input("A"), b.input("B"));
    let n = b.nand(&x, &y).expect("nand script");
    b.output("nand", &n);
    b.output("and", &DualRail { name: "and".into(), t: n.f.clone(), f: n.t.clone() });
    b.finish().expect("nand netlist")
}

/// Dual-rail fan-out: input `A`; outputs `A` and `A'`.
pub fn build_fanout_netlist() -> CircuitNetlist {
    let mut b = NetlistBuilder::new("fanout");
    let a = b.input("A");
    let (p, q) = b.fanout(&a).expect("fanout script");
    b.output("A", &p);
    b.output("A'", &q);
    b.finish().expect("fanout netlist")
}

/// XOR from four NANDs and two fan-outs.
pub fn build_xor_netlist() -> CircuitNetlist {
    let mut b = NetlistBuilder::new("xor");
    let (x, y) = (b.input("A"), b.input("B"));
    let script = |b: &mut NetlistBuilder| -> Result<DualRail> {
        let (x1, x2) = b.fanout(&x)?;
        let (y1, y2) = b.fanout(&y)?;
        let n = b.nand(&x2, &y1)?;
        let (n1, n2) = b.fanout(&n)?;
        let p = b.nand(&x1, &n1)?;
        let q = b.nand(&n2, &y2)?;
        b.nand(&p, &q)
    };
    let out = script(&mut b).expect("xor script");
    b.output("xor", &out);
    b.finish().expect("xor netlist")
}

/// One synchronous step of a 2-state first-neighbors rule on inputs `l`, `c`,
/// `r`. The pair `(l, c)` is decoded into four one-hot minterms; each minterm
/// either routes straight to the result class of its constant output, or is
/// split by `r` into two one-hot results. Results are sorted by class and merged.
pub fn build_rule_step_circuit(guest: &RuleTable) -> Result<CircuitNetlist> {
    if guest.q() != 2 || guest.dim() != 1 || guest.neighborhood().len() != 3 {
        return Err(Error::Ineligible("rule-step circuits need a 2-state first-neighbors rule".into()));
    }
    let f = |l: bool, c: bool, r: bool| guest.apply(&[l as u32, c as u32, r as u32]) == 1;
    let mut b = NetlistBuilder::new(&format!("step({})", guest.name()));
    let constant = (0..8).map(|i| f(i & 4 != 0, i & 2 != 0, i & 1 != 0)).collect::<Vec<_>>();
    if constant.iter().all(|&v| v == constant[0]) {
        // Exactly one rail of `l` fires: merge them into the constant's rail.
        let dead = b.rail("never");
        let l = b.input("l");
        b.input("c");
        b.input("r");
        let fired = b.merge(&l.t, &l.f)?;
        let (t, fl) = if constant[0] { (fired, dead) } else { (dead, fired) };
        b.output("out", &DualRail { name: "out".into(), t, f: fl });
        return b.finish();
    }
    let (l, c, r) = (b.input("l"), b.input("c"), b.input("r"));
    let mut rest: Vec<(String, bool, bool)> = b.minterms(&l, &c)?.to_vec();
    let (mut zt, mut zf) = (r.t.clone(), r.f.clone());
    let mut results: Vec<(String, bool)> = Vec::new();
    while let Some((d, lv, cv)) = rest.pop() {
        let (v0, v1) = (f(lv, cv, false), f(lv, cv, true));
        if v0 == v1 {
            b.raise(&d, rest.len())?;
            results.push((d, v0));
            continue;
        }
        let more = rest.iter().any(|&(_, l2, c2)| f(l2, c2, false) != f(l2, c2, true));
        let (zt_use, zf_use) = (zt.clone(), zf.clone());
        if more {
            // [d, r, ~r] -> [d, r, ~r, r', ~r'] keeping a copy for later minterms.
            let t2 = b.fork(&zt)?;
            let f2 = b.fork(&zf)?;
            b.swap(&t2, &zf)?;
            (zt, zf) = (t2, f2);
        }
        let db = b.fork(&d)?;
        let with_r = b.dual(&db, &zt_use)?;
        b.swap(&with_r, &zf_use)?;
        let without_r = b.dual(&d, &zf_use)?;
        b.raise(&without_r, rest.len())?;
        b.raise(&with_r, rest.len())?;
        results.push((without_r, v0));
        results.push((with_r, v1));
    }
    // Results now sit on top in `results` order reversed; sort true ones upward.
    let mut order: Vec<(String, bool)> = b.stack()[..results.len()]
        .iter()
        .map(|s| results.iter().find(|(n, _)| n == s).cloned().expect("result rail"))
        .collect();
    let mut i = 0;
    while i + 1 < order.len() {
        if !order[i].1 && order[i + 1].1 {
            b.swap(&order[i].0, &order[i + 1].0)?;
            order.swap(i, i + 1);
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
    let fold = |b: &mut NetlistBuilder, v: Vec<String>| -> Result<String> {
        let mut it = v.into_iter();
        let mut acc = it.next().expect("non-empty class");
        for n in it {
            acc = b.merge(&acc, &n)?;
        }
        Ok(acc)
    };
    let t = fold(&mut b, order.iter().filter(|r| r.1).map(|r| r.0.clone()).collect())?;
    let fl = fold(&mut b, order.iter().filter(|r| !r.1).map(|r| r.0.clone()).collect())?;
    b.output("out", &DualRail { name: "out".into(), t, f: fl });
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nand_census_and_rails() {
        let n = build_nand_netlist();
        let c = n.census();
        assert_eq!((c["FORK"], c["DUAL"], c["MERGE"]), (4, 4, 2));
        assert_eq!(c["CROSS"], 11);
        assert_eq!(n.validate().unwrap().len(), 2);
    }

    #[test]
    fn text_round_trip() {
        for n in [build_nand_netlist(), build_fanout_netlist(), build_xor_netlist()] {
            assert_eq!(CircuitNetlist::parse(&n.to_text()).unwrap(), n);
        }
    }

    #[test]
    fn forward_references_are_cycles() {
        let text = "rails a b\ndual a c -> d\nfork b -> c\n";
        assert_eq!(CircuitNetlist::parse(text), Err(Error::Cyclic));
        let text = "rails a b c\ndual a c -> d\n";
        assert!(matches!(CircuitNetlist::parse(text), Err(Error::Routing(_))));
    }

    #[test]
    fn rule_step_netlists_validate() {
        for code in [0u8, 255, 110, 150, 30, 90, 184] {
            let n = build_rule_step_circuit(&RuleTable::wolfram(code)).unwrap();
            assert_eq!(n.outputs.len(), 1, "rule {code}");
        }
    }
}
