//! Byte-exact round trips over the checked-in corpus in `tests/golden`.
//! `ACAFORGE_REGEN_GOLDEN=1 cargo test --test golden` rewrites the corpus.

use std::fs;
use std::path::PathBuf;

use acaforge::circuits::{build_fanout_netlist, build_nand_netlist, build_rule_step_circuit, build_xor_netlist, place_and_route};
use acaforge::io::{decode_pattern, encode_pattern, export_rule_table, import_rule_table, parse_rule_spec, Pattern};
use acaforge::RuleTable;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn corpus() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for spec in ["rule-x", "rule-x-held", "110", "150", "212", "xor1w", "identity1w", "soldiers(150)", "smv3q(110)", "pack2(150)", "mv4q(parity2d)"] {
        let name = spec.replace(['(', ')'], "_").trim_end_matches('_').to_string();
        out.push((format!("{name}.table"), export_rule_table(&parse_rule_spec(spec).unwrap()).unwrap()));
    }
    let nets = [
        ("nand", build_nand_netlist(), vec!["A", "B"]),
        ("fanout", build_fanout_netlist(), vec!["~A"]),
        ("xor", build_xor_netlist(), vec![]),
        ("step110", build_rule_step_circuit(&RuleTable::wolfram(110)).unwrap(), vec![]),
    ];
    for (name, net, hot) in nets {
        let p = place_and_route(&net).unwrap();
        let mut pat = Pattern::from_config(&p.configuration(&hot), &p.window(), Some("rule-x".into()));
        pat.comments.push(format!("N {name}"));
        out.push((format!("{name}.rle"), encode_pattern(&pat)));
    }
    let wide: Vec<Vec<u32>> = vec![(0..32).collect(), vec![], (0..32).rev().collect()];
    out.push(("states32.rle".into(), encode_pattern(&Pattern::new(wide, None))));
    let sparse = vec![vec![], vec![0, 0, 1, 1, 1], vec![], vec![], vec![2, 0, 0, 0, 0, 0, 3], vec![]];
    out.push(("sparse.rle".into(), encode_pattern(&Pattern::new(sparse, Some("W110".into())))));
    out.push(("empty.rle".into(), encode_pattern(&Pattern::new(vec![], None))));
    out
}

#[test]
fn corpus_round_trips() {
    if std::env::var_os("ACAFORGE_REGEN_GOLDEN").is_some() {
        fs::create_dir_all(dir()).unwrap();
        for (name, text) in corpus() {
            fs::write(dir().join(name), text).unwrap();
        }
    }
    let mut seen = 0;
    for entry in fs::read_dir(dir()).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let back = match path.extension().and_then(|e| e.to_str()) {
            Some("rle") => encode_pattern(&decode_pattern(&text).unwrap()),
            Some("table") => export_rule_table(&import_rule_table(&text).unwrap()).unwrap(),
            _ => continue,
        };
        assert_eq!(back, text, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 15, "corpus has {seen} files");
}

#[test]
fn corpus_matches_current_encoders() {
    for (name, text) in corpus() {
        let stored = fs::read_to_string(dir().join(&name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(stored, text, "{name} is stale; regenerate the corpus");
    }
}

#[test]
fn imported_tables_reproduce_rules() {
    for spec in ["rule-x", "soldiers(150)", "110", "xor1w"] {
        let r = parse_rule_spec(spec).unwrap();
        let back = import_rule_table(&export_rule_table(&r).unwrap()).unwrap();
        assert_eq!(back.table(), r.table(), "{spec}");
        assert_eq!(back.neighborhood(), r.neighborhood(), "{spec}");
    }
}

#[test]
fn nand_placement_round_trips() {
    let p = place_and_route(&build_nand_netlist()).unwrap();
    let w = p.window();
    let c = p.configuration(&[]);
    let pat = Pattern::from_config(&c, &w, Some("rule-x".into()));
    let back = decode_pattern(&encode_pattern(&pat)).unwrap().to_config(2, acaforge::Coord(w.lo.0, w.hi.1)).unwrap();
    for cell in w.cells() {
        assert_eq!(back.get(cell), c.get(cell), "{cell}");
    }
}
