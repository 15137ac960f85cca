use acaforge::compilers::*;
use acaforge::engine::{nbhd, Boundary, Lattice};
use acaforge::{Configuration, Coord, RuleTable, ScheduleSpec, State, SweepDir, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_word(seed: u64, n: usize, q: State) -> Vec<State> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| r.random_range(0..q)).collect()
}

fn fair(n: u64) -> Vec<ScheduleSpec> {
    (0..n).map(ScheduleSpec::fair_random).collect()
}

fn parity2d() -> RuleTable {
    RuleTable::from_fn(2, 2, nbhd::von_neumann(), |t| t.iter().sum::<State>() % 2).unwrap()
}

#[test]
fn soldiers_agree_for_several_guests() {
    for (code, seed) in [(150u8, 1u64), (110, 2), (30, 3)] {
        let g = RuleTable::wolfram(code);
        let c = compile_marching_soldiers(&g).unwrap();
        let c0 = Configuration::from_word(&random_word(seed, 32, 2), 0);
        let mut scheds = fair(10);
        scheds.push(ScheduleSpec::Synchronous);
        let rep = verify_invariant_simulation(&g, &c, &c0, Window::line(0, 31), &scheds, 24).unwrap();
        assert!(rep.agrees(), "rule {code}: {rep}");
    }
}

#[test]
fn smv_agrees_for_several_guests() {
    for (code, seed) in [(110u8, 4u64), (150, 5), (54, 6)] {
        let g = RuleTable::wolfram(code);
        let c = compile_shifting_mv(&g).unwrap();
        let c0 = Configuration::from_word(&random_word(seed, 32, 2), 0);
        let mut scheds = fair(10);
        scheds.push(ScheduleSpec::Sweep(SweepDir::RightToLeft));
        let rep = verify_invariant_simulation(&g, &c, &c0, Window::line(0, 31), &scheds, 20).unwrap();
        assert!(rep.agrees(), "rule {code}: {rep}");
    }
}

#[test]
fn smv_three_state_guest() {
    let g = RuleTable::from_fn(1, 3, nbhd::first_neighbors(), |t| (t[0] + 2 * t[1] + t[2] * t[2]) % 3).unwrap();
    let c = compile_shifting_mv(&g).unwrap();
    assert_eq!(c.host.q(), 9);
    let c0 = Configuration::from_word(&random_word(7, 32, 3), 0);
    let rep = verify_invariant_simulation(&g, &c, &c0, Window::line(0, 31), &fair(10), 16).unwrap();
    assert!(rep.agrees(), "{rep}");
}

#[test]
fn mv_agrees_for_several_guests() {
    let majority = RuleTable::from_fn(2, 2, nbhd::von_neumann(), |t| (t.iter().sum::<State>() >= 3) as State).unwrap();
    let cyclic = RuleTable::from_fn(2, 3, nbhd::von_neumann(), |t| (t[0] + t[1] + 2 * t[4]) % 3).unwrap();
    for (g, seed) in [(parity2d(), 8u64), (majority, 9), (cyclic, 10)] {
        let c = compile_mountain_valley(&g).unwrap();
        let rows: Vec<Vec<State>> = (0..8).map(|r| random_word(seed * 100 + r, 8, g.q())).collect();
        let c0 = Configuration::from_rows(&rows, 0, 7);
        let rep = verify_invariant_simulation(&g, &c, &c0, Window::new(Coord(0, 0), Coord(7, 7)), &fair(10), 6).unwrap();
        assert!(rep.agrees(), "{}: {rep}", g.name());
    }
}

#[test]
fn packing_agrees() {
    for (code, seed) in [(150u8, 11u64), (110, 12), (90, 13)] {
        let g = RuleTable::wolfram(code);
        let c = compile_one_way_packing(&g).unwrap();
        let c0 = Configuration::from_word(&random_word(seed, 32, 2), 0);
        let rep =
            verify_invariant_simulation(&g, &c, &c0, Window::line(0, 31), &[ScheduleSpec::Synchronous], 20).unwrap();
        assert!(rep.agrees(), "rule {code}: {rep}");
    }
}

#[test]
fn corrupted_host_is_caught() {
    let g = RuleTable::wolfram(150);
    let mut c = compile_marching_soldiers(&g).unwrap();
    let table = c.host.table_mut();
    let idx = table.iter().enumerate().position(|(i, &v)| v != i as State % 12).unwrap();
    table[idx] = (table[idx] + 3) % 12;
    let c0 = Configuration::from_word(&random_word(14, 32, 2), 0);
    let rep = verify_invariant_simulation(&g, &c, &c0, Window::line(0, 31), &[ScheduleSpec::Synchronous], 30).unwrap();
    assert!(!rep.agrees());
}

#[test]
fn encoding_round_trip() {
    let g = RuleTable::wolfram(110);
    for con in [Construction::Soldiers, Construction::Smv3q, Construction::Pack2] {
        let c = compile(&g, con).unwrap();
        for seed in 0..5 {
            let word = random_word(seed, 12, 2);
            let c0 = Configuration::from_word(&word, 0);
            let h = encode_guest_config(&c.contract, &c0).unwrap();
            let back = decode_host_config(&c.contract, &h, Window::line(-4, 15)).unwrap();
            assert_eq!(back.word(-4, 15), c0.word(-4, 15), "{con:?}");
        }
        assert!(c.contract.psi_disjoint());
    }
    let c = compile_mountain_valley(&parity2d()).unwrap();
    let rows = vec![vec![1, 0, 1], vec![0, 0, 1]];
    let c0 = Configuration::from_rows(&rows, 0, 1);
    let h = encode_guest_config(&c.contract, &c0).unwrap();
    let w = Window::new(Coord(-1, -1), Coord(3, 2));
    assert_eq!(decode_host_config(&c.contract, &h, w).unwrap().rows(&w), c0.rows(&w));
}

#[test]
fn invariant_step_examples() {
    // Mountain-valley: every E cell's first move takes its timer from 2 to 0,
    // its second from 0 to 2. Cells with only O neighbors never move.
    let g = parity2d();
    let c = compile_mountain_valley(&g).unwrap();
    let rows: Vec<Vec<State>> = (0..4).map(|r| random_word(20 + r, 4, 2)).collect();
    let c0 = encode_guest_config(&c.contract, &Configuration::from_rows(&rows, 0, 3)).unwrap();
    let lat = Lattice::new(&c.host, Window::new(Coord(0, 0), Coord(7, 7)), Boundary::Periodic);
    let s0 = lat.load(&c0);
    let h1 = extract_invariant_step(&c.host, &lat, &s0).unwrap();
    let h2 = extract_invariant_step(&c.host, &lat, &h1.states).unwrap();
    for (i, cell) in lat.cells().iter().enumerate() {
        let even = cell.0 % 2 == 0 && cell.1 % 2 == 0;
        let odd_odd = cell.0 % 2 == 1 && cell.1 % 2 == 1;
        if even {
            assert_eq!(h1.states[i] % 4, 0);
            assert_eq!(h2.states[i] % 4, 2);
            assert!(h1.advanced[i] && h2.advanced[i]);
        }
        if odd_odd {
            assert!(!h1.advanced[i] && !h2.advanced[i]);
        }
    }

    // Soldiers with level timers: the invariant step is the synchronous step.
    let g = RuleTable::wolfram(150);
    let c = compile_marching_soldiers(&g).unwrap();
    let c0 = encode_guest_config(&c.contract, &Configuration::from_word(&random_word(30, 16, 2), 0)).unwrap();
    let lat = Lattice::new(&c.host, Window::line(0, 15), Boundary::Periodic);
    let s0 = lat.load(&c0);
    let h = extract_invariant_step(&c.host, &lat, &s0).unwrap();
    let mut sim = acaforge::engine::Sim::from_states(&c.host, &lat, s0);
    let all: Vec<usize> = (0..16).collect();
    sim.apply(&all);
    assert_eq!(h.states, sim.window_states());

    // Fixed point: nothing advances.
    let id = RuleTable::identity(1, 2, nbhd::first_neighbors()).unwrap();
    let lat = Lattice::new(&id, Window::line(0, 7), Boundary::Periodic);
    let h = extract_invariant_step(&id, &lat, &[0, 1, 0, 1, 1, 0, 0, 1]).unwrap();
    assert!(h.advanced.iter().all(|&a| !a));
}

#[test]
fn flip_hosts_never_have_adjacent_active_cells() {
    let g = RuleTable::wolfram(110);
    let c = compile_shifting_mv(&g).unwrap();
    let c0 = encode_guest_config(&c.contract, &Configuration::from_word(&random_word(40, 24, 2), 0)).unwrap();
    let lat = Lattice::new(&c.host, Window::line(0, 47), Boundary::Periodic);
    for seed in 0..5 {
        assert!(sample_no_adjacent_active(&c.host, &lat, &c0, &ScheduleSpec::fair_random(seed), 3000).unwrap());
    }
    let c = compile_mountain_valley(&parity2d()).unwrap();
    let rows: Vec<Vec<State>> = (0..6).map(|r| random_word(50 + r, 6, 2)).collect();
    let c0 = encode_guest_config(&c.contract, &Configuration::from_rows(&rows, 0, 5)).unwrap();
    let lat = Lattice::new(&c.host, Window::new(Coord(0, 0), Coord(11, 11)), Boundary::Periodic);
    for seed in 0..3 {
        assert!(sample_no_adjacent_active(&c.host, &lat, &c0, &ScheduleSpec::fair_random(seed), 3000).unwrap());
    }
}

#[test]
fn fsm_embedding_matches_dfa() {
    let mut r = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let states = r.random_range(1..5);
        let symbols = r.random_range(1..4);
        let delta = (0..states * symbols).map(|_| r.random_range(0..states)).collect();
        let dfa = Dfa::new(states, symbols, delta, 0, vec![false; states as usize]).unwrap();
        let e = embed_fsm(&dfa);
        let n = r.random_range(0..=10);
        let w: Vec<State> = (0..n).map(|_| r.random_range(0..symbols)).collect();
        let c0 = e.encode(&w);
        let win = Window::line(0, n as i64 + 1);
        let st = acaforge::engine::run_schedule(&e.rule, &c0, &ScheduleSpec::fair_random(r.random()), win, 40 * (n as u64 + 2))
            .unwrap();
        let last = st.frame(st.len() - 1);
        assert_eq!(e.decode_final(&last, n), Some(dfa.run(&w)));
    }
}
