//! `acaforge`: command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acaforge::algebra;
use acaforge::circuits::{
    build_fanout_netlist, build_nand_netlist, build_rule_step_circuit, build_xor_netlist, evaluate_circuit,
    place_and_route, standard_schedules, CircuitNetlist,
};
use acaforge::compilers::{compile, verify_invariant_simulation, Construction};
use acaforge::engine::{extract_history, run_schedule};
use acaforge::io::{
    encode_pattern, export_rule_table, import_rule_table, parse_config_spec, parse_rule_spec, parse_schedule_spec,
    parse_window, render_history_text, render_spacetime_text, write_png, ContractManifest, ExperimentManifest,
    Outputs, Pattern,
};
use acaforge::oneway::{build_adversarial_schedule, pseudo_fixed_point, verify_fsm_equivalence, OneWayInstance};
use acaforge::{Error, Result, ScheduleSpec, State};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "acaforge", version, about = "Asynchronous cellular automata toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Flags shared by commands that pick a schedule.
#[derive(Args, Clone, Default)]
struct ScheduleFlags {
    /// Schedule spec: sync, fair:SEED, alpha:P:SEED, sweep:lr|rl|bt|tb.
    #[arg(long)]
    schedule: Option<String>,
    /// Seed for fair or alpha schedules.
    #[arg(long)]
    seed: Option<u64>,
    /// Update probability: selects an alpha schedule.
    #[arg(long)]
    alpha: Option<f64>,
}

impl ScheduleFlags {
    fn resolve(&self, fallback: &str) -> Result<ScheduleSpec> {
        if let Some(p) = self.alpha {
            return Ok(ScheduleSpec::Alpha { p, seed: self.seed.unwrap_or(0) });
        }
        match (&self.schedule, self.seed) {
            (Some(s), _) => parse_schedule_spec(s),
            (None, Some(seed)) => Ok(ScheduleSpec::fair_random(seed)),
            (None, None) => parse_schedule_spec(fallback),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment from a manifest and/or flags.
    Run {
        manifest: Option<PathBuf>,
        #[arg(long)]
        rule: Option<String>,
        /// Initial configuration: word:0110, single, random:N:SEED, rle:PATH.
        #[arg(long)]
        init: Option<String>,
        /// LO..HI or X0,Y0..X1,Y1.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long)]
        steps: Option<u64>,
        #[command(flatten)]
        sched: ScheduleFlags,
        /// Directory for spacetime.txt, history.txt and spacetime.png.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Commutativity, monotonicity and adjacent-activity verdicts for a rule.
    Check { rule: String },
    /// Compile a guest rule into an asynchronous host.
    Compile {
        guest: String,
        /// soldiers, mv4q, smv3q or pack2 (or marching-soldiers, mountain-valley, shifting-mv, packing).
        construction: String,
        /// Manifest path; the host table is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a compiled host against synchronous runs of its guest.
    Verify {
        manifest: PathBuf,
        #[arg(long, default_value_t = 10)]
        schedules: usize,
        /// Guest steps.
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long)]
        init: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Pseudo-fixed points and the finite-automaton equivalence of a one-way rule.
    Oneway {
        rule: String,
        /// Left periodic word, e.g. 0 or 01.
        #[arg(long, default_value = "0")]
        pl: String,
        #[arg(long, default_value = "0")]
        pr: String,
        /// Comma-separated input words.
        #[arg(long, default_value = "1,10,0110")]
        words: String,
    },
    /// Place a dual-rail circuit in rule X and evaluate it.
    Circuit {
        /// nand, fanout, xor, step(RULE), or a netlist file.
        netlist: String,
        /// One T or F per circuit input.
        #[arg(long)]
        inputs: String,
        /// Total schedules: four sweeps, the rest fair-random.
        #[arg(long, default_value_t = 100)]
        schedules: usize,
        #[arg(long, default_value = "rule-x")]
        rule: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the placed configuration as an RLE pattern.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a rule table (`table RULE`), a placed circuit (`pattern NETLIST`)
    /// or a netlist (`netlist NETLIST`).
    Export { kind: String, what: String, path: PathBuf },
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Unsupported(msg.into())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| bad(format!("writing {}: {e}", path.display())))
}

fn words(spec: &str) -> Result<Vec<Vec<State>>> {
    spec.split(',')
        .map(|w| {
            w.trim().chars().map(|c| c.to_digit(10).ok_or_else(|| bad(format!("bad symbol {c} in {w}")))).collect()
        })
        .collect()
}

fn netlist(spec: &str) -> Result<CircuitNetlist> {
    match spec {
        "nand" => Ok(build_nand_netlist()),
        "fanout" => Ok(build_fanout_netlist()),
        "xor" => Ok(build_xor_netlist()),
        _ => {
            if let Some(inner) = spec.strip_prefix("step(").and_then(|s| s.strip_suffix(')')) {
                return build_rule_step_circuit(&parse_rule_spec(inner)?);
            }
            let text = fs::read_to_string(spec).map_err(|e| bad(format!("reading {spec}: {e}")))?;
            CircuitNetlist::parse(&text)
        }
    }
}

fn cmd_run(
    manifest: Option<PathBuf>,
    rule: Option<String>,
    init: Option<String>,
    window: Option<String>,
    steps: Option<u64>,
    sched: ScheduleFlags,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut m = match manifest {
        Some(p) => ExperimentManifest::load(&p)?,
        None => ExperimentManifest {
            rule: String::new(),
            init: "single".into(),
            window: String::new(),
            schedule: "sync".into(),
            steps: 20,
            outputs: Outputs::default(),
        },
    };
    m.rule = rule.unwrap_or(m.rule);
    m.init = init.unwrap_or(m.init);
    m.window = window.unwrap_or(m.window);
    m.steps = steps.unwrap_or(m.steps);
    if m.rule.is_empty() || m.window.is_empty() {
        return Err(bad("run needs a rule and a window"));
    }
    let spec = sched.resolve(&m.schedule)?;
    if let Some(dir) = &out {
        fs::create_dir_all(dir).map_err(|e| bad(format!("creating {}: {e}", dir.display())))?;
        let at = |f: &str| Some(dir.join(f).to_string_lossy().into_owned());
        m.outputs = Outputs { spacetime: at("spacetime.txt"), history: at("history.txt"), render: at("spacetime.png"), pattern: None };
    }
    let r = parse_rule_spec(&m.rule)?;
    let w = parse_window(&m.window)?;
    let c0 = parse_config_spec(&m.init, r.dim(), r.q())?;
    let st = run_schedule(&r, &c0, &spec, w, m.steps)?;
    let o = &m.outputs;
    if o.spacetime.is_none() && o.history.is_none() && o.render.is_none() {
        print!("{}", render_spacetime_text(&st));
        return Ok(());
    }
    if let Some(p) = &o.spacetime {
        write(Path::new(p), &render_spacetime_text(&st))?;
    }
    if let Some(p) = &o.history {
        let h = extract_history(&r, &c0, &spec, w, m.steps)?;
        write(Path::new(p), &render_history_text(&h))?;
    }
    if let Some(p) = &o.render {
        write_png(&st, 4, Path::new(p))?;
    }
    println!("{} steps of {} under {}", m.steps, r.name(), spec.label());
    Ok(())
}

fn cmd_compile(guest: &str, construction: &str, out: Option<PathBuf>) -> Result<()> {
    let g = parse_rule_spec(guest)?;
    let c = compile(&g, Construction::parse(construction)?)?;
    let table = export_rule_table(&c.host)?;
    let (m, table_path) = match &out {
        Some(p) => {
            let tp = p.with_extension("table");
            let name = tp.file_name().map(|n| n.to_string_lossy().into_owned());
            (ContractManifest::new(guest, &c.contract, name), Some(tp))
        }
        None => (ContractManifest::new(guest, &c.contract, None), None),
    };
    match (&out, &table_path) {
        (Some(p), Some(tp)) => {
            write(p, &m.to_text())?;
            write(tp, &table)?;
            println!("{}-state host written to {} and {}", c.host.q(), p.display(), tp.display());
        }
        _ => print!("{}", m.to_text()),
    }
    Ok(())
}

fn cmd_verify(
    path: &Path,
    schedules: usize,
    steps: usize,
    window: Option<String>,
    init: Option<String>,
    seed: u64,
) -> Result<bool> {
    let text = fs::read_to_string(path).map_err(|e| bad(format!("reading {}: {e}", path.display())))?;
    let m = ContractManifest::parse(&text)?;
    let guest = parse_rule_spec(&m.guest)?;
    let c = compile(&guest, m.construction)?;
    if c.host.q() != m.host_states {
        return Err(Error::Integrity(format!("manifest says {} host states, compiler gives {}", m.host_states, c.host.q())));
    }
    if let Some(t) = &m.host_table {
        let tp = path.parent().unwrap_or(Path::new(".")).join(t);
        let stored = import_rule_table(&fs::read_to_string(&tp).map_err(|e| bad(format!("reading {}: {e}", tp.display())))?)?;
        if stored.table() != c.host.table() {
            return Err(Error::Integrity(format!("{} does not match the compiled host", tp.display())));
        }
    }
    let (dw, di) = if guest.dim() == 2 {
        ("0,0..15,15".to_string(), format!("random2d:16:16:{seed}"))
    } else {
        ("0..63".to_string(), format!("random:64:{seed}"))
    };
    let w = parse_window(&window.unwrap_or(dw))?;
    let c0 = parse_config_spec(&init.unwrap_or(di), guest.dim(), guest.q())?;
    let specs: Vec<ScheduleSpec> = (0..schedules as u64).map(|k| ScheduleSpec::fair_random(seed + k)).collect();
    let report = verify_invariant_simulation(&guest, &c, &c0, w, &specs, steps)?;
    println!("{report}");
    Ok(report.agrees())
}

fn cmd_oneway(rule: &str, pl: &str, pr: &str, ws: &str) -> Result<bool> {
    let r = parse_rule_spec(rule)?;
    let (pl, pr) = (&words(pl)?[0], &words(pr)?[0]);
    let ws = words(ws)?;
    println!("pf(q, s):");
    print!("q\\s");
    for s in 0..r.q() {
        print!(" {s}");
    }
    println!();
    for q in 0..r.q() {
        print!("{q}  ");
        for s in 0..r.q() {
            print!(" {}", pseudo_fixed_point(&r, q, s)?);
        }
        println!();
    }
    for w in &ws {
        let sched = build_adversarial_schedule(&OneWayInstance::new(&r, pl, pr, w)?)?;
        let x: String = sched.x.iter().map(|s| s.to_string()).collect();
        let w: String = w.iter().map(|s| s.to_string()).collect();
        println!("x({w}) = {x}");
    }
    let report = verify_fsm_equivalence(&r, pl, pr, &ws)?;
    println!("{}", report.automaton);
    println!("{report}");
    Ok(report.all_equal())
}

fn tf(b: bool) -> char {
    if b { 'T' } else { 'F' }
}

fn cmd_circuit(spec: &str, inputs: &str, schedules: usize, rule: &str, seed: u64, out: Option<PathBuf>) -> Result<()> {
    let net = netlist(spec)?;
    let p = place_and_route(&net)?;
    let bits: Vec<bool> = inputs
        .chars()
        .map(|c| match c {
            'T' | 't' | '1' => Ok(true),
            'F' | 'f' | '0' => Ok(false),
            _ => Err(bad(format!("input {c} is not T or F"))),
        })
        .collect::<Result<_>>()?;
    if let Some(path) = &out {
        let hot: Vec<&str> =
            net.inputs.iter().zip(&bits).map(|(d, &v)| if v { d.t.as_str() } else { d.f.as_str() }).collect();
        let pat = Pattern::from_config(&p.configuration(&hot), &p.window(), Some(rule.to_string()));
        write(path, &encode_pattern(&pat))?;
    }
    let r = parse_rule_spec(rule)?;
    let specs = if schedules >= 4 {
        standard_schedules(schedules - 4, seed)
    } else {
        (0..schedules as u64).map(|k| ScheduleSpec::fair_random(seed + k)).collect()
    };
    let outs = evaluate_circuit(&r, &p, &bits, &specs).map_err(|e| {
        if r.name() == "rule-x" && net.census().contains_key("CROSS") {
            bad(format!("{e}\nnote: CROSS output arms fire spontaneously under rule-x; try --rule rule-x-held"))
        } else {
            e
        }
    })?;
    let first = outs.first().ok_or_else(|| bad(format!("{} has no outputs", net.name)))?;
    println!("output: {} (unanimous across {} schedules)", tf(*first), specs.len());
    if outs.len() > 1 {
        let all: Vec<String> = net.outputs.iter().zip(&outs).map(|(o, &v)| format!("{}={}", o.name, tf(v))).collect();
        println!("outputs: {}", all.join(" "));
    }
    Ok(())
}

fn cmd_export(kind: &str, what: &str, path: &Path) -> Result<()> {
    let text = match kind {
        "table" => export_rule_table(&parse_rule_spec(what)?)?,
        "netlist" => netlist(what)?.to_text(),
        "pattern" => {
            let p = place_and_route(&netlist(what)?)?;
            encode_pattern(&Pattern::from_config(&p.configuration(&[]), &p.window(), Some("rule-x".into())))
        }
        _ => return Err(bad(format!("unknown export kind {kind}; use table, netlist or pattern"))),
    };
    write(path, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run { manifest, rule, init, window, steps, sched, out } => {
            cmd_run(manifest, rule, init, window, steps, sched, out).map(|_| true)
        }
        Cmd::Check { rule } => parse_rule_spec(&rule).map(|r| {
            let (line, witnesses) = algebra::summary(&r);
            println!("{line}");
            for w in witnesses {
                println!("  {w}");
            }
            true
        }),
        Cmd::Compile { guest, construction, out } => cmd_compile(&guest, &construction, out).map(|_| true),
        Cmd::Verify { manifest, schedules, steps, window, init, seed } => {
            cmd_verify(&manifest, schedules, steps, window, init, seed)
        }
        Cmd::Oneway { rule, pl, pr, words } => cmd_oneway(&rule, &pl, &pr, &words),
        Cmd::Circuit { netlist, inputs, schedules, rule, seed, out } => {
            cmd_circuit(&netlist, &inputs, schedules, &rule, seed, out).map(|_| true)
        }
        Cmd::Export { kind, what, path } => cmd_export(&kind, &what, &path).map(|_| true),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
