//! Plain-text (TOML) experiment manifests and the small spec languages they
//! use for rules, initial configurations, schedules and windows.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toml::{Table, Value};

use super::{decode_pattern, import_rule_table};
use crate::compilers::{compile, Construction, SimulationContract};
use crate::engine::{nbhd, Configuration, Coord, RuleTable, ScheduleSpec, State, SweepDir, Window};
use crate::{Error, Result};

fn bad(msg: impl Into<String>) -> Error {
    Error::Unsupported(msg.into())
}

/// Rule specs:
/// - `110`: elementary rule by Wolfram code;
/// - `rule-x`, `rule-x-held`: the 3-state von Neumann circuit rule, literal
///   or with idle CROSS outputs held;
/// - `parity2d`, `majority2d`: 2-state von Neumann guests;
/// - `xor1w`, `identity1w`: one-way rules;
/// - `soldiers(G)`, `mv4q(G)`, `smv3q(G)`, `pack2(G)`: compiled hosts of guest `G`;
/// - `table:PATH`: a rule-table file.
pub fn parse_rule_spec(spec: &str) -> Result<RuleTable> {
    let spec = spec.trim();
    if let Ok(code) = spec.parse::<u8>() {
        return Ok(RuleTable::wolfram(code));
    }
    if let Some(path) = spec.strip_prefix("table:") {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("reading {path}: {e}")))?;
        return import_rule_table(&text);
    }
    if let Some((con, rest)) = spec.split_once('(') {
        let inner = rest.strip_suffix(')').ok_or_else(|| bad(format!("unbalanced rule spec {spec}")))?;
        let con = Construction::parse(con)?;
        return Ok(compile(&parse_rule_spec(inner)?, con)?.host);
    }
    match spec {
        "rule-x" => Ok(crate::circuits::rule_x()),
        "rule-x-held" => Ok(crate::circuits::rule_x_held()),
        "parity2d" => Ok(RuleTable::from_fn(2, 2, nbhd::von_neumann(), |t| t.iter().sum::<State>() % 2)?.named(spec)),
        "majority2d" => {
            Ok(RuleTable::from_fn(2, 2, nbhd::von_neumann(), |t| (t.iter().sum::<State>() >= 3) as State)?.named(spec))
        }
        "xor1w" => Ok(RuleTable::from_fn(1, 2, nbhd::one_way(), |t| t[0] ^ t[1])?.named(spec)),
        "identity1w" => Ok(RuleTable::identity(1, 2, nbhd::one_way())?.named(spec)),
        _ => Err(bad(format!("unknown rule spec {spec}"))),
    }
}

/// Schedule specs: `sync`, `alpha:P:SEED`, `fair:SEED[:WINDOW[:EXTRA]]`,
/// `sweep:lr|rl|bt|tb`.
pub fn parse_schedule_spec(spec: &str) -> Result<ScheduleSpec> {
    let parts: Vec<&str> = spec.trim().split(':').collect();
    let num = |s: &str| s.parse::<u64>().map_err(|_| bad(format!("bad number {s} in {spec}")));
    let real = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number {s} in {spec}")));
    match parts.as_slice() {
        ["sync"] | ["synchronous"] => Ok(ScheduleSpec::Synchronous),
        ["alpha", p, seed] => Ok(ScheduleSpec::Alpha { p: real(p)?, seed: num(seed)? }),
        ["fair", seed] => Ok(ScheduleSpec::fair_random(num(seed)?)),
        ["fair", seed, w] => Ok(ScheduleSpec::FairRandom { seed: num(seed)?, window: Some(num(w)?), extra: 0.1 }),
        ["fair", seed, w, e] => Ok(ScheduleSpec::FairRandom { seed: num(seed)?, window: Some(num(w)?), extra: real(e)? }),
        ["sweep", d] => Ok(ScheduleSpec::Sweep(match *d {
            "lr" => SweepDir::LeftToRight,
            "rl" => SweepDir::RightToLeft,
            "bt" => SweepDir::BottomToTop,
            "tb" => SweepDir::TopToBottom,
            _ => return Err(bad(format!("sweep direction {d}"))),
        })),
        _ => Err(bad(format!("unknown schedule spec {spec}"))),
    }
}

/// `LO..HI` (1D) or `X0,Y0..X1,Y1` (2D), inclusive.
pub fn parse_window(spec: &str) -> Result<Window> {
    let (a, b) = spec.split_once("..").ok_or_else(|| bad(format!("window {spec} needs '..'")))?;
    let point = |s: &str| -> Result<Coord> {
        let v: Vec<i64> =
            s.split(',').map(|x| x.trim().parse().map_err(|_| bad(format!("bad window {spec}")))).collect::<Result<_>>()?;
        match v.as_slice() {
            [x] => Ok(Coord(*x, 0)),
            [x, y] => Ok(Coord(*x, *y)),
            _ => Err(bad(format!("bad window {spec}"))),
        }
    };
    let (lo, hi) = (point(a)?, point(b)?);
    if lo.0 > hi.0 || lo.1 > hi.1 {
        return Err(bad(format!("empty window {spec}")));
    }
    Ok(Window::new(lo, hi))
}

/// Initial configuration specs:
/// - `word:0110[@OFFSET]`: 1D word (one digit per cell);
/// - `single[:STATE]`: one non-zero cell at the origin;
/// - `random:N:SEED[:Q]`: random 1D word on cells `0..N`;
/// - `random2d:W:H:SEED[:Q]`: random 2D block with its top-left at `(0, H-1)`;
/// - `rle:PATH[@X,Y]`: pattern file, top-left at `(X, Y)` (default origin).
pub fn parse_config_spec(spec: &str, dim: usize, q: State) -> Result<Configuration> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let num = |s: &str| s.parse::<u64>().map_err(|_| bad(format!("bad number {s} in {spec}")));
    match kind {
        "word" => {
            let (w, off) = rest.split_once('@').unwrap_or((rest, "0"));
            let word: Vec<State> =
                w.chars().map(|c| c.to_digit(36).ok_or_else(|| bad(format!("bad cell {c}")))).collect::<Result<_>>()?;
            let off = off.parse().map_err(|_| bad(format!("bad offset {off}")))?;
            Ok(Configuration::from_word(&word, off))
        }
        "single" => {
            let s = if rest.is_empty() { 1 } else { num(rest)? as State };
            let mut c = Configuration::zeros(dim);
            c.set(Coord(0, 0), s);
            Ok(c)
        }
        "random" | "random2d" => {
            let p: Vec<&str> = rest.split(':').collect();
            let (w, h, seed, qq) = match (kind, p.as_slice()) {
                ("random", [n, s]) => (num(n)?, 1, num(s)?, q as u64),
                ("random", [n, s, qq]) => (num(n)?, 1, num(s)?, num(qq)?),
                ("random2d", [w, h, s]) => (num(w)?, num(h)?, num(s)?, q as u64),
                ("random2d", [w, h, s, qq]) => (num(w)?, num(h)?, num(s)?, num(qq)?),
                _ => return Err(bad(format!("bad random spec {spec}"))),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<State>> =
                (0..h).map(|_| (0..w).map(|_| rng.random_range(0..qq.max(1)) as State).collect()).collect();
            if kind == "random" {
                Ok(Configuration::from_word(&rows[0], 0))
            } else {
                Ok(Configuration::from_rows(&rows, 0, h as i64 - 1))
            }
        }
        "rle" => {
            let (path, at) = rest.split_once('@').unwrap_or((rest, "0,0"));
            let text = std::fs::read_to_string(path).map_err(|e| bad(format!("reading {path}: {e}")))?;
            let at = parse_window(&format!("{at}..{at}"))?.lo;
            decode_pattern(&text)?.to_config(dim, at)
        }
        _ => Err(bad(format!("unknown configuration spec {spec}"))),
    }
}

/// Where a run writes its artifacts. Unset outputs are skipped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outputs {
    pub spacetime: Option<String>,
    pub history: Option<String>,
    pub render: Option<String>,
    pub pattern: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentManifest {
    pub rule: String,
    pub init: String,
    pub window: String,
    pub schedule: String,
    pub steps: u64,
    pub outputs: Outputs,
}

fn get_str(t: &Table, k: &str) -> Result<Option<String>> {
    match t.get(k) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(Value::Integer(i)) => Ok(Some(i.to_string())),
        Some(v) => Err(bad(format!("{k} should be a string, found {v}"))),
    }
}

fn toml_err(e: toml::de::Error) -> Error {
    let msg = e.message().to_string();
    Error::parse(0, 0, msg)
}

impl ExperimentManifest {
    pub fn parse(text: &str) -> Result<Self> {
        let t: Table = text.parse().map_err(toml_err)?;
        let need = |k: &str| get_str(&t, k)?.ok_or_else(|| bad(format!("manifest needs '{k}'")));
        let steps = match t.get("steps") {
            Some(Value::Integer(n)) if *n >= 0 => *n as u64,
            None => return Err(bad("manifest needs 'steps'")),
            Some(v) => return Err(bad(format!("steps should be a non-negative integer, found {v}"))),
        };
        let outputs = match t.get("outputs") {
            Some(Value::Table(o)) => Outputs {
                spacetime: get_str(o, "spacetime")?,
                history: get_str(o, "history")?,
                render: get_str(o, "render")?,
                pattern: get_str(o, "pattern")?,
            },
            None => Outputs::default(),
            Some(_) => return Err(bad("outputs should be a table")),
        };
        Ok(ExperimentManifest {
            rule: need("rule")?,
            init: need("init")?,
            window: need("window")?,
            schedule: get_str(&t, "schedule")?.unwrap_or_else(|| "sync".into()),
            steps,
            outputs,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("reading {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut t = Table::new();
        t.insert("rule".into(), Value::String(self.rule.clone()));
        t.insert("init".into(), Value::String(self.init.clone()));
        t.insert("window".into(), Value::String(self.window.clone()));
        t.insert("schedule".into(), Value::String(self.schedule.clone()));
        t.insert("steps".into(), Value::Integer(self.steps as i64));
        let mut o = Table::new();
        for (k, v) in [
            ("spacetime", &self.outputs.spacetime),
            ("history", &self.outputs.history),
            ("render", &self.outputs.render),
            ("pattern", &self.outputs.pattern),
        ] {
            if let Some(v) = v {
                o.insert(k.into(), Value::String(v.clone()));
            }
        }
        if !o.is_empty() {
            t.insert("outputs".into(), Value::Table(o));
        }
        t.to_string()
    }
}

/// Versioned record of a compilation: enough to recompile the host and to
/// check that a stored host table still matches.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractManifest {
    pub version: u32,
    pub guest: String,
    pub construction: Construction,
    pub host_states: State,
    pub host_table: Option<String>,
    pub contract_text: String,
}

impl ContractManifest {
    pub const VERSION: u32 = 1;

    pub fn new(guest: &str, contract: &SimulationContract, host_table: Option<String>) -> Self {
        ContractManifest {
            version: Self::VERSION,
            guest: guest.to_string(),
            construction: contract.construction,
            host_states: contract.host_q,
            host_table,
            contract_text: contract.to_string(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "version = {}", self.version);
        let _ = writeln!(out, "guest = {:?}", self.guest);
        let _ = writeln!(out, "construction = {:?}", self.construction.name());
        let _ = writeln!(out, "host_states = {}", self.host_states);
        if let Some(p) = &self.host_table {
            let _ = writeln!(out, "host_table = {p:?}");
        }
        let _ = writeln!(out, "\n[contract]");
        for line in self.contract_text.lines() {
            if let Some((k, v)) = line.split_once(" = ") {
                let _ = writeln!(out, "{} = {:?}", k.trim().replace(' ', "_"), v.trim());
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t: Table = text.parse().map_err(toml_err)?;
        let version = match t.get("version") {
            Some(Value::Integer(v)) => *v as u32,
            _ => return Err(bad("contract manifest needs 'version'")),
        };
        if version != Self::VERSION {
            return Err(bad(format!("contract manifest version {version}")));
        }
        let guest = get_str(&t, "guest")?.ok_or_else(|| bad("contract manifest needs 'guest'"))?;
        let construction =
            Construction::parse(&get_str(&t, "construction")?.ok_or_else(|| bad("contract manifest needs 'construction'"))?)?;
        let host_states = match t.get("host_states") {
            Some(Value::Integer(v)) => *v as State,
            _ => return Err(bad("contract manifest needs 'host_states'")),
        };
        let contract_text = match t.get("contract") {
            Some(Value::Table(c)) => {
                c.iter().map(|(k, v)| format!("{k} = {}\n", v.as_str().unwrap_or_default())).collect()
            }
            _ => String::new(),
        };
        Ok(ContractManifest { version, guest, construction, host_states, host_table: get_str(&t, "host_table")?, contract_text })
    }
}
