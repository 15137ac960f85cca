use super::{Compiled, Construction, SimulationContract};
use crate::engine::{nbhd, Coord, RuleTable, State};
use crate::{Error, Result};

/// `(prev, cur, timer)` with `timer` in 1..=3, timer least significant.
pub(crate) fn soldier(q: State, prev: State, cur: State, t: State) -> State {
    (prev * q + cur) * 3 + (t - 1)
}

fn unsoldier(q: State, h: State) -> (State, State, State) {
    let t = h % 3 + 1;
    let pc = h / 3;
    (pc / q, pc % q, t)
}

/// `(s, t)` with `t` in 0..4.
pub(crate) fn mv(s: State, t: State) -> State {
    s * 4 + t
}

/// `(s, t)` with `t` in 1..=3.
pub(crate) fn smv(s: State, t: State) -> State {
    s * 3 + (t - 1)
}

fn next3(t: State) -> State {
    t % 3 + 1
}

/// Real-time host: each cell carries its previous and current guest value and
/// a timer mod 3. A cell moves when every neighbor is level with it or one
/// step ahead, reading `cur` from level neighbors and `prev` from those ahead.
pub fn compile_marching_soldiers(guest: &RuleTable) -> Result<Compiled> {
    let n = guest.neighborhood();
    if guest.dim() != 1 || n.iter().any(|&o| !n.contains(&-o)) || guest.center().is_none() {
        return Err(Error::Ineligible("marching soldiers need a symmetric 1D neighborhood with a center".into()));
    }
    let q = guest.q();
    let c = guest.center().expect("checked");
    let host = RuleTable::from_fn(1, 3 * q * q, n.to_vec(), |t| {
        let cells: Vec<(State, State, State)> = t.iter().map(|&h| unsoldier(q, h)).collect();
        let (_, cur, t0) = cells[c];
        let mut view = Vec::with_capacity(cells.len());
        for (k, &(p, v, tk)) in cells.iter().enumerate() {
            if k == c || tk == t0 {
                view.push(v);
            } else if tk == next3(t0) {
                view.push(p);
            } else {
                return t[c];
            }
        }
        soldier(q, cur, guest.apply(&view), next3(t0))
    })?
    .named(format!("soldiers({})", guest.name()));
    let psi = (0..q)
        .map(|a| {
            let mut img = Vec::new();
            for p in 0..q {
                for t in 1..=3 {
                    img.push(soldier(q, p, a, t));
                }
            }
            img
        })
        .collect();
    let contract = SimulationContract {
        construction: Construction::Soldiers,
        guest_q: q,
        host_q: 3 * q * q,
        psi,
        unpack: vec![1],
        translation: vec![0],
        k: 1,
        l: 1,
        drift: "none".into(),
    };
    Ok(Compiled { host, contract })
}

/// Real-time 2D host on 2x2 blocks. E cells (even, even) hold guest values;
/// O cells between two E cells hold the sum of their E neighbors so that each
/// E cell can recover its neighbors as differences. Timers run mod 4: E cells
/// on even timers, O cells on odd ones, each move adding 2.
pub fn compile_mountain_valley(guest: &RuleTable) -> Result<Compiled> {
    if guest.dim() != 2 || guest.neighborhood() != nbhd::von_neumann().as_slice() {
        return Err(Error::Ineligible("mountain-valley needs a 2D von Neumann guest in (C, N, E, S, W) order".into()));
    }
    let q = guest.q();
    let host = RuleTable::from_fn(2, 4 * q, nbhd::von_neumann(), |t| {
        let (s, tc) = (t[0] / 4, t[0] % 4);
        let nb: Vec<(State, State)> = t[1..].iter().map(|&h| (h / 4, h % 4)).collect();
        if tc % 2 == 0 {
            if nb.iter().all(|&(_, tn)| tn == (tc + 1) % 4) {
                let mut view = vec![s];
                view.extend(nb.iter().map(|&(o, _)| (o + q - s) % q));
                return mv(guest.apply(&view), (tc + 2) % 4);
            }
        } else {
            let waiting = nb.iter().any(|&(_, tn)| (tn + 1) % 4 == tc);
            let evens: Vec<State> = nb.iter().filter(|&&(_, tn)| tn % 2 == 0).map(|&(o, _)| o).collect();
            if !waiting && !evens.is_empty() {
                return mv(evens.iter().sum::<State>() % q, (tc + 2) % 4);
            }
        }
        t[0]
    })?
    .named(format!("mv4q({})", guest.name()));
    let psi = (0..q).map(|a| (0..4).map(|t| mv(a, t)).collect()).collect();
    let contract = SimulationContract {
        construction: Construction::Mv4q,
        guest_q: q,
        host_q: 4 * q,
        psi,
        unpack: vec![2, 2],
        translation: vec![0, 0],
        k: 1,
        l: 1,
        drift: "none".into(),
    };
    Ok(Compiled { host, contract })
}

/// 1D host with three timer stages that drifts left by one guest cell every
/// two guest steps:
/// `(a,2)(b,1)(c,2) -> (a+c, 3)`,
/// `(a,3)(b,2)(c,3) -> (f(a-b, b, c-b), 1)`,
/// `(a,1)(b,3)(c,1) -> (c, 2)`.
pub fn compile_shifting_mv(guest: &RuleTable) -> Result<Compiled> {
    if guest.dim() != 1 || guest.neighborhood() != nbhd::first_neighbors().as_slice() {
        return Err(Error::Ineligible("shifting mountain-valley needs a first-neighbors guest".into()));
    }
    let q = guest.q();
    let host = RuleTable::from_fn(1, 3 * q, nbhd::first_neighbors(), |t| {
        let (a, ta) = (t[0] / 3, t[0] % 3 + 1);
        let (b, tb) = (t[1] / 3, t[1] % 3 + 1);
        let (c, tc) = (t[2] / 3, t[2] % 3 + 1);
        match (ta, tb, tc) {
            (2, 1, 2) => smv((a + c) % q, 3),
            (3, 2, 3) => smv(guest.apply(&[(a + q - b) % q, b, (c + q - b) % q]), 1),
            (1, 3, 1) => smv(c, 2),
            _ => t[1],
        }
    })?
    .named(format!("smv3q({})", guest.name()));
    let psi = (0..q).map(|a| (1..=3).map(|t| smv(a, t)).collect()).collect();
    let contract = SimulationContract {
        construction: Construction::Smv3q,
        guest_q: q,
        host_q: 3 * q,
        psi,
        unpack: vec![2],
        translation: vec![-2],
        k: 2,
        l: 3,
        drift: "left, 2 host cells per 3 history steps".into(),
    };
    Ok(Compiled { host, contract })
}

/// Synchronous one-way host packing guest cells `(2j, 2j+1)` into host cell
/// `j`: `f'((a, b), (c, d)) = (f(a, b, c), f(b, c, d))`. After `t` steps host
/// cell `j` holds guest cells `2j - t` and `2j - t + 1`.
pub fn compile_one_way_packing(guest: &RuleTable) -> Result<Compiled> {
    if guest.dim() != 1 || guest.neighborhood() != nbhd::first_neighbors().as_slice() {
        return Err(Error::Ineligible("packing needs a first-neighbors guest".into()));
    }
    let q = guest.q();
    let host = RuleTable::from_fn(1, q * q, vec![Coord(-1, 0), Coord(0, 0)], |t| {
        let (a, b) = (t[0] / q, t[0] % q);
        let (c, d) = (t[1] / q, t[1] % q);
        guest.apply(&[a, b, c]) * q + guest.apply(&[b, c, d])
    })?
    .named(format!("pack2({})", guest.name()));
    let contract = SimulationContract {
        construction: Construction::Pack2,
        guest_q: q,
        host_q: q * q,
        psi: (0..q).map(|a| vec![a]).collect(),
        unpack: vec![2],
        translation: vec![1],
        k: 1,
        l: 1,
        drift: "right, one guest cell (half a host cell) per step".into(),
    };
    Ok(Compiled { host, contract })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_counts() {
        let r150 = RuleTable::wolfram(150);
        assert_eq!(compile_marching_soldiers(&r150).unwrap().host.q(), 12);
        assert_eq!(compile_shifting_mv(&RuleTable::wolfram(110)).unwrap().host.q(), 6);
        assert_eq!(compile_one_way_packing(&r150).unwrap().host.q(), 4);
        let parity = RuleTable::from_fn(2, 2, nbhd::von_neumann(), |t| t.iter().sum::<State>() % 2).unwrap();
        assert_eq!(compile_mountain_valley(&parity).unwrap().host.q(), 8);
        let one = RuleTable::identity(1, 1, nbhd::first_neighbors()).unwrap();
        assert_eq!(compile_marching_soldiers(&one).unwrap().host.q(), 3);
    }

    #[test]
    fn soldier_center_computes_xor() {
        // Level neighbors with cur values 1 and 0 around a cell with cur 1.
        let r = compile_marching_soldiers(&RuleTable::wolfram(150)).unwrap().host;
        let t = [soldier(2, 0, 1, 2), soldier(2, 1, 1, 2), soldier(2, 1, 0, 2)];
        assert_eq!(unsoldier(2, r.apply(&t)), (1, 0, 3));
        // A neighbor one step behind blocks the move.
        let blocked = [soldier(2, 0, 1, 1), soldier(2, 1, 1, 2), soldier(2, 1, 0, 2)];
        assert_eq!(r.apply(&blocked), blocked[1]);
    }

    #[test]
    fn smv_first_stage() {
        let r = compile_shifting_mv(&RuleTable::wolfram(110)).unwrap().host;
        assert_eq!(r.apply(&[smv(1, 2), smv(0, 1), smv(1, 2)]), smv(0, 3));
    }

    #[test]
    fn packed_rule150_cell() {
        let r = compile_one_way_packing(&RuleTable::wolfram(150)).unwrap().host;
        // f'((1,0),(0,1)) = (f(1,0,0), f(0,0,1)) = (1,1).
        assert_eq!(r.apply(&[2, 1]), 3);
    }

    #[test]
    fn rejects_wrong_neighborhoods() {
        let ow = RuleTable::identity(1, 2, nbhd::one_way()).unwrap();
        assert!(compile_marching_soldiers(&ow).is_err());
        assert!(compile_shifting_mv(&ow).is_err());
        assert!(compile_mountain_valley(&RuleTable::wolfram(110)).is_err());
    }
}
