//! Compilers from synchronous guest rules to asynchronous hosts, and the
//! harness that checks a host's invariant history against the guest.

mod fsm;
mod hosts;
mod invariant;

use std::fmt;

pub use fsm::{embed_fsm, Dfa, FsmEmbedding};
pub use hosts::{
    compile_marching_soldiers, compile_mountain_valley, compile_one_way_packing, compile_shifting_mv,
};
pub use invariant::{extract_invariant_step, InvariantStep};

use crate::engine::{
    Background, Boundary, Configuration, Coord, Lattice, RuleTable, Schedule, ScheduleSpec, Sim, State, Window,
};
use crate::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Construction {
    /// `(prev, cur, timer)` with timers in {1, 2, 3}: `3q^2` states, real time.
    Soldiers,
    /// 2D `(s, t)` with t in {0..3}: `4q` states, real time, 2x2 blocks.
    Mv4q,
    /// 1D `(s, t)` with t in {1, 2, 3}: `3q` states, two guest steps per three history steps.
    Smv3q,
    /// Synchronous one-way host with two guest cells per host cell: `q^2` states.
    Pack2,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::Soldiers => "soldiers",
            Construction::Mv4q => "mv4q",
            Construction::Smv3q => "smv3q",
            Construction::Pack2 => "pack2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "soldiers" | "marching-soldiers" => Ok(Construction::Soldiers),
            "mv4q" | "mountain-valley" => Ok(Construction::Mv4q),
            "smv3q" | "shifting-mv" => Ok(Construction::Smv3q),
            "pack2" | "packing" => Ok(Construction::Pack2),
            _ => Err(Error::Unsupported(format!("construction {s}"))),
        }
    }
}

/// Ties a guest rule to its host: state map, block size, drift and time ratio.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationContract {
    pub construction: Construction,
    pub guest_q: State,
    pub host_q: State,
    /// `psi[a]`: host states that decode to guest state `a`.
    pub psi: Vec<Vec<State>>,
    /// Host cells per guest cell along each axis.
    pub unpack: Vec<i64>,
    /// Host-cell translation per contract application (k guest steps).
    pub translation: Vec<i64>,
    /// k guest steps correspond to l history steps.
    pub k: u32,
    pub l: u32,
    pub drift: String,
}

impl SimulationContract {
    /// Guest states have pairwise disjoint, non-empty images.
    pub fn psi_disjoint(&self) -> bool {
        let mut seen = vec![false; self.host_q as usize];
        for img in &self.psi {
            if img.is_empty() {
                return false;
            }
            for &h in img {
                if std::mem::replace(&mut seen[h as usize], true) {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for SimulationContract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
        writeln!(f, "construction = {}", self.construction.name())?;
        writeln!(f, "guest_states = {}", self.guest_q)?;
        writeln!(f, "host_states = {}", self.host_q)?;
        writeln!(f, "unpack = {}", join(&self.unpack))?;
        writeln!(f, "translation = {}", join(&self.translation))?;
        writeln!(f, "ratio = {}:{}", self.k, self.l)?;
        writeln!(f, "drift = {}", self.drift)
    }
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub host: RuleTable,
    pub contract: SimulationContract,
}

pub fn compile(guest: &RuleTable, c: Construction) -> Result<Compiled> {
    match c {
        Construction::Soldiers => compile_marching_soldiers(guest),
        Construction::Mv4q => compile_mountain_valley(guest),
        Construction::Smv3q => compile_shifting_mv(guest),
        Construction::Pack2 => compile_one_way_packing(guest),
    }
}

/// Host encoding of a single guest cell: `(host offset, host state)` pairs.
fn encode_cell(con: &SimulationContract, at: Coord, s: State) -> Vec<(Coord, State)> {
    match con.construction {
        Construction::Soldiers => vec![(at, hosts::soldier(con.guest_q, s, s, 1))],
        Construction::Mv4q => {
            let b = Coord(2 * at.0, 2 * at.1);
            vec![
                (b, hosts::mv(s, 2)),
                (b + Coord::E, hosts::mv(0, 1)),
                (b + Coord::N, hosts::mv(0, 1)),
                (b + Coord(1, 1), hosts::mv(0, 1)),
            ]
        }
        Construction::Smv3q => {
            let b = Coord(2 * at.0, 0);
            vec![(b, hosts::smv(s, 2)), (b + Coord::E, hosts::smv(s, 1))]
        }
        Construction::Pack2 => Vec::new(),
    }
}

/// Encodes a guest configuration. Periodic guest backgrounds map to periodic
/// host backgrounds with scaled threshold and period.
pub fn encode_guest_config(con: &SimulationContract, guest: &Configuration) -> Result<Configuration> {
    guest.validate(con.guest_q)?;
    let bg = guest.background();
    let dim = bg.dim();
    let m = con.unpack[0];
    let per = bg.periods();
    let (kk, rr) = match con.construction {
        Construction::Pack2 => (bg.threshold() / 2 + 1, per),
        _ => (m * bg.threshold() + m, [m * per[0], m * per[1]]),
    };
    let host_cell = |c: Coord| -> State {
        let div = |v: i64| v.div_euclid(m);
        let g = if dim == 2 { Coord(div(c.0), div(c.1)) } else { Coord(div(c.0), 0) };
        if con.construction == Construction::Pack2 {
            let a = guest.background().get(Coord(2 * c.0, 0));
            let b = guest.background().get(Coord(2 * c.0 + 1, 0));
            return a * con.guest_q + b;
        }
        let s = bg.get(g);
        encode_cell(con, g, s).into_iter().find(|&(p, _)| p == c).map_or(0, |(_, h)| h)
    };
    let hb = Background::from_fn(dim, kk, rr, host_cell)?;
    let mut out = Configuration::new(hb);
    if con.construction == Construction::Pack2 {
        let xs: Vec<i64> = guest.overrides().keys().map(|c| c.0.div_euclid(2)).collect();
        for j in xs {
            let a = guest.get(Coord(2 * j, 0));
            let b = guest.get(Coord(2 * j + 1, 0));
            out.set(Coord(j, 0), a * con.guest_q + b);
        }
    } else {
        for (&c, &s) in guest.overrides() {
            for (p, h) in encode_cell(con, c, s) {
                out.set(p, h);
            }
        }
    }
    Ok(out)
}

/// Guest state held by a host state.
pub fn decode_state(con: &SimulationContract, h: State) -> Option<State> {
    con.psi.iter().position(|img| img.contains(&h)).map(|a| a as State)
}

/// Inverse of `encode_guest_config` on the cells of `guest_window`.
pub fn decode_host_config(con: &SimulationContract, host: &Configuration, guest_window: Window) -> Result<Configuration> {
    let mut out = Configuration::zeros(host.dim());
    for g in guest_window.cells() {
        let s = match con.construction {
            Construction::Soldiers => decode_state(con, host.get(g)),
            Construction::Mv4q => decode_state(con, host.get(Coord(2 * g.0, 2 * g.1))),
            Construction::Smv3q => decode_state(con, host.get(Coord(2 * g.0, 0))),
            Construction::Pack2 => {
                let h = host.get(Coord(g.0.div_euclid(2), 0));
                Some(if g.0.rem_euclid(2) == 0 { h / con.guest_q } else { h % con.guest_q })
            }
        };
        out.set(g, s.ok_or_else(|| Error::Internal(format!("undecodable host state at {g}")))?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub guest_step: usize,
    pub cell: Coord,
    pub expected: State,
    pub got: Option<State>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub schedule: String,
    pub frames_checked: usize,
    pub mismatch: Option<Mismatch>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub runs: Vec<RunReport>,
}

impl VerifyReport {
    pub fn agrees(&self) -> bool {
        !self.runs.is_empty() && self.runs.iter().all(|r| r.mismatch.is_none())
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.runs {
            match &r.mismatch {
                None => writeln!(f, "{}: agree ({} frames)", r.schedule, r.frames_checked)?,
                Some(m) => writeln!(
                    f,
                    "{}: mismatch at guest step {} cell {}: expected {}, got {}",
                    r.schedule,
                    m.guest_step,
                    m.cell,
                    m.expected,
                    m.got.map_or("nothing".to_string(), |s| s.to_string())
                )?,
            }
        }
        let ok = self.runs.iter().filter(|r| r.mismatch.is_none()).count();
        write!(f, "{} of {} schedules agree", ok, self.runs.len())
    }
}

/// Where guest cell `i` at guest step `g` is read: host cell and history depth.
fn locate(con: &SimulationContract, i: Coord, g: usize, host: Window) -> (Coord, usize) {
    let wrap = |c: Coord| {
        Coord(
            host.lo.0 + (c.0 - host.lo.0).rem_euclid(host.width()),
            host.lo.1 + (c.1 - host.lo.1).rem_euclid(host.height()),
        )
    };
    match con.construction {
        Construction::Soldiers => (i, g),
        Construction::Mv4q => (Coord(2 * i.0, 2 * i.1), g),
        Construction::Smv3q => {
            let j = (g / 2) as i64;
            let depth = 3 * (g / 2) + g % 2;
            (wrap(Coord(2 * (i.0 - j), 0)), depth)
        }
        Construction::Pack2 => (wrap(Coord((i.0 + g as i64).div_euclid(2), 0)), g),
    }
}

fn host_window(con: &SimulationContract, guest: Window) -> Window {
    match con.construction {
        Construction::Soldiers => guest,
        Construction::Mv4q => Window::new(
            Coord(2 * guest.lo.0, 2 * guest.lo.1),
            Coord(2 * guest.hi.0 + 1, 2 * guest.hi.1 + 1),
        ),
        Construction::Smv3q => Window::line(2 * guest.lo.0, 2 * guest.hi.0 + 1),
        Construction::Pack2 => Window::line(guest.lo.0.div_euclid(2), guest.hi.0.div_euclid(2)),
    }
}

/// Runs the host on the torus matching `guest_window` under each schedule,
/// decodes guest steps `0..=steps` from the host's update history and compares
/// them with the synchronous guest run on the same torus.
pub fn verify_invariant_simulation(
    guest: &RuleTable,
    compiled: &Compiled,
    c0: &Configuration,
    guest_window: Window,
    schedules: &[ScheduleSpec],
    steps: usize,
) -> Result<VerifyReport> {
    let con = &compiled.contract;
    if con.construction == Construction::Pack2 && guest_window.width() % 2 != 0 {
        return Err(Error::Unsupported("packing needs an even guest width".into()));
    }
    let glat = Lattice::new(guest, guest_window, Boundary::Periodic);
    let mut gsim = Sim::new(guest, &glat, c0);
    let sync = Schedule::bind(&ScheduleSpec::Synchronous, glat.cells())?;
    let mut oracle = vec![gsim.window_states().to_vec()];
    for _ in 0..steps {
        gsim.step(&sync);
        oracle.push(gsim.window_states().to_vec());
    }

    let hw = host_window(con, guest_window);
    let hlat = Lattice::new(&compiled.host, hw, Boundary::Periodic);
    let hc0 = encode_guest_config(con, c0)?;
    let probes: Vec<Vec<(usize, usize)>> = (0..=steps)
        .map(|g| {
            glat.cells()
                .iter()
                .map(|&i| {
                    let (c, d) = locate(con, i, g, hw);
                    (hlat.index_of(c).expect("host cell in window"), d)
                })
                .collect()
        })
        .collect();
    let need: usize = probes.iter().flatten().map(|&(_, d)| d).max().unwrap_or(0) + 1;

    let mut report = VerifyReport::default();
    for spec in schedules {
        let sched = Schedule::bind(spec, hlat.cells())?;
        let window = sched.fairness_window().unwrap_or(hlat.len() as u64);
        let cap = (need as u64 + 2) * window * 8 + 64;
        let log = if con.construction == Construction::Pack2 {
            // The packed host is synchronous and not a flip host, so values can
            // repeat: keep one entry per step instead of a change log.
            let mut sim = Sim::new(&compiled.host, &hlat, &hc0);
            let mut log: Vec<Vec<State>> = sim.window_states().iter().map(|&s| vec![s]).collect();
            let all: Vec<usize> = (0..hlat.len()).collect();
            for _ in 1..need {
                sim.apply(&all);
                for (h, &s) in log.iter_mut().zip(sim.window_states()) {
                    h.push(s);
                }
            }
            log
        } else {
            let mut sim = Sim::new(&compiled.host, &hlat, &hc0).record();
            let deep_enough = |sim: &Sim| {
                let log = sim.log().expect("recording");
                probes.iter().flatten().all(|&(c, d)| log[c].len() > d)
            };
            let mut t = 0;
            while t < cap && !deep_enough(&sim) {
                sim.step(&sched);
                t += 1;
            }
            sim.into_log().expect("recording")
        };
        let mut mismatch = None;
        let mut frames = 0;
        'frames: for (g, row) in probes.iter().enumerate() {
            for (k, &(c, d)) in row.iter().enumerate() {
                let got = log[c].get(d).and_then(|&h| {
                    if con.construction == Construction::Pack2 {
                        let odd = (glat.cells()[k].0 + g as i64).rem_euclid(2) == 1;
                        Some(if odd { h % con.guest_q } else { h / con.guest_q })
                    } else {
                        decode_state(con, h)
                    }
                });
                if got != Some(oracle[g][k]) {
                    mismatch = Some(Mismatch { guest_step: g, cell: glat.cells()[k], expected: oracle[g][k], got });
                    break 'frames;
                }
            }
            frames += 1;
        }
        report.runs.push(RunReport { schedule: spec.label(), frames_checked: frames, mismatch });
    }
    Ok(report)
}

/// Valid-encoding sampler for hosts that embed flip networks: runs the host
/// from `c0` and asserts that no two neighboring cells are ever active together.
pub fn sample_no_adjacent_active(
    host: &RuleTable,
    lat: &Lattice,
    c0: &Configuration,
    spec: &ScheduleSpec,
    steps: u64,
) -> Result<bool> {
    let sched = Schedule::bind(spec, lat.cells())?;
    let mut sim = Sim::new(host, lat, c0);
    for _ in 0..steps {
        let act = sim.active();
        let mut is_act = vec![false; lat.len()];
        for &i in &act {
            is_act[i] = true;
        }
        for &i in &act {
            if lat.neighbors(i).iter().any(|&j| (j as usize) != i && (j as usize) < lat.len() && is_act[j as usize]) {
                return Ok(false);
            }
        }
        sim.step(&sched);
    }
    Ok(true)
}
