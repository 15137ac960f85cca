use acaforge::circuits::*;
use acaforge::engine::RuleTable;
use acaforge::Error;

fn single(text: &str) -> PlacedCircuit {
    place_and_route(&CircuitNetlist::parse(text).unwrap()).unwrap()
}

/// Fired rails under every schedule, checked to be clean and unanimous.
fn fired(rule: &RuleTable, p: &PlacedCircuit, hot: &[&str]) -> Vec<(String, bool)> {
    let mut first = None;
    for s in standard_schedules(100, 0) {
        let r = run_placed(rule, p, hot, &s, None).unwrap();
        assert!(r.violations.is_empty(), "{hot:?} under {}: {:?}", s.label(), r.violations);
        let v: Vec<_> = r.fired.into_iter().collect();
        match &first {
            None => first = Some(v),
            Some(f) => assert_eq!(f, &v, "{hot:?} under {}", s.label()),
        }
    }
    first.unwrap()
}

fn on(v: &[(String, bool)]) -> Vec<&str> {
    v.iter().filter(|(_, b)| *b).map(|(n, _)| n.as_str()).collect()
}

#[test]
fn gate_contracts() {
    let r = rule_x_held();
    let p = single("rails a\nfork a -> b\n");
    assert!(on(&fired(&r, &p, &[])).is_empty());
    assert_eq!(on(&fired(&r, &p, &["a"])), ["a", "b"]);

    let p = single("rails a b\ndual a b -> c\n");
    assert!(on(&fired(&r, &p, &["a"])).is_empty());
    assert!(on(&fired(&r, &p, &["b"])).is_empty());
    assert_eq!(on(&fired(&r, &p, &["a", "b"])), ["c"]);

    let p = single("rails a b\nmerge a b -> c\n");
    assert!(on(&fired(&r, &p, &[])).is_empty());
    assert_eq!(on(&fired(&r, &p, &["a"])), ["c"]);
    assert_eq!(on(&fired(&r, &p, &["b"])), ["c"]);

    let p = single("rails a b\nswap a b\n");
    assert!(on(&fired(&r, &p, &[])).is_empty());
    assert_eq!(on(&fired(&r, &p, &["a"])), ["a"]);
    assert_eq!(on(&fired(&r, &p, &["b"])), ["b"]);
}

#[test]
fn literal_rule_x_cross_fires_spontaneously() {
    let p = single("rails a b\nswap a b\n");
    let res = run_placed(&rule_x(), &p, &["a"], &acaforge::ScheduleSpec::fair_random(0), None);
    assert!(match res {
        Err(Error::Timeout(_)) => true,
        Ok(r) => !r.violations.is_empty() || r.fired.values().all(|&b| b),
        _ => false,
    });
    assert!(evaluate_circuit(&rule_x(), &place_and_route(&build_nand_netlist()).unwrap(), &[true, true], &standard_schedules(2, 0)).is_err());
}

#[test]
fn merge_both_inputs_is_flagged() {
    let p = single("rails a b\nmerge a b -> c\n");
    let r = run_placed(&rule_x_held(), &p, &["a", "b"], &acaforge::ScheduleSpec::fair_random(3), None).unwrap();
    assert!(r.violations.iter().any(|v| v.contains("both inputs")));
}

#[test]
fn nand_truth_table() {
    let p = place_and_route(&build_nand_netlist()).unwrap();
    let s = standard_schedules(100, 7);
    for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
        let out = evaluate_circuit(&rule_x_held(), &p, &[a, b], &s).unwrap();
        assert_eq!(out[0], !(a && b), "nand {a} {b}");
    }
}

#[test]
fn fanout_and_xor() {
    let r = rule_x_held();
    let s = standard_schedules(20, 11);
    let p = place_and_route(&build_fanout_netlist()).unwrap();
    for a in [false, true] {
        assert!(evaluate_circuit(&r, &p, &[a], &s).unwrap().iter().all(|&o| o == a));
    }
    let p = place_and_route(&build_xor_netlist()).unwrap();
    for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
        assert_eq!(evaluate_circuit(&r, &p, &[a, b], &s).unwrap()[0], a ^ b);
    }
}

#[test]
fn rule_step_circuits_match_tables() {
    let r = rule_x_held();
    let s = standard_schedules(8, 5);
    for w in [110u8, 150, 0, 255] {
        let t = acaforge::engine::RuleTable::wolfram(w);
        let p = place_and_route(&build_rule_step_circuit(&t).unwrap()).unwrap();
        for k in 0..8u8 {
            let (l, c, rr) = (k & 4 != 0, k & 2 != 0, k & 1 != 0);
            let out = evaluate_circuit(&r, &p, &[l, c, rr], &s).unwrap();
            assert_eq!(out[0], (w >> k) & 1 == 1, "rule {w} neighborhood {k:03b}");
        }
    }
}

#[test]
fn blockers_emit_one_pulse() {
    let p = single("rails a\n");
    let r = rule_x_held();
    for s in standard_schedules(20, 0) {
        let cold = run_placed(&r, &p, &[], &s, None).unwrap();
        assert_eq!(cold.steps, 0, "a cold source is quiescent");
        let hot = run_placed(&r, &p, &["a"], &s, None).unwrap();
        assert!(hot.violations.is_empty() && hot.fired["a"], "{:?}", hot.violations);
    }
}
