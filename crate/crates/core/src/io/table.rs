//! `@RULE`/`@TABLE` rule files with `symmetries:none`. Unlisted neighborhoods
//! leave the cell unchanged, so only non-identity transitions are written.
//!
//! Column order follows the target convention: von Neumann `C,N,E,S,W`,
//! Moore `C,N,NE,E,SE,S,SW,W,NW`, one-dimensional `C,W,E`, then the new
//! state. Other neighborhoods use the `offsets` extension, which lists the
//! columns explicitly as `x,y` pairs separated by `;`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::engine::{nbhd, Coord, RuleTable, State};
use crate::{Error, Result};

/// Target neighborhood name and, for each file column, the index into the
/// rule's own neighborhood tuple.
fn layout(rule: &RuleTable) -> (String, Vec<usize>) {
    let n = rule.neighborhood();
    let pos = |order: &[Coord]| -> Option<Vec<usize>> {
        if order.len() != n.len() {
            return None;
        }
        order.iter().map(|o| n.iter().position(|p| p == o)).collect()
    };
    let named: [(&str, Vec<Coord>, usize); 3] = [
        ("vonNeumann", nbhd::von_neumann(), 2),
        ("Moore", nbhd::moore(), 2),
        ("oneDimensional", vec![Coord(0, 0), Coord(-1, 0), Coord(1, 0)], 1),
    ];
    for (name, order, dim) in named {
        if rule.dim() == dim {
            if let Some(cols) = pos(&order) {
                return (name.into(), cols);
            }
        }
    }
    let offs: Vec<String> = n.iter().map(|c| format!("{},{}", c.0, c.1)).collect();
    (format!("offsets({})", offs.join(";")), (0..n.len()).collect())
}

fn sanitize(name: &str) -> String {
    let s: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    if s.is_empty() {
        "rule".into()
    } else {
        s
    }
}

pub fn export_rule_table(rule: &RuleTable) -> Result<String> {
    let (hood, cols) = layout(rule);
    if rule.dim() == 1 && rule.neighborhood().iter().any(|c| c.1 != 0) {
        return Err(Error::Unsupported("1D rule with y offsets".into()));
    }
    let mut out = String::new();
    let _ = writeln!(out, "@RULE {}\n", sanitize(rule.name()));
    let _ = writeln!(out, "@TABLE");
    let _ = writeln!(out, "n_states:{}", rule.q());
    let _ = writeln!(out, "neighborhood:{hood}");
    let _ = writeln!(out, "symmetries:none");
    if rule.dim() == 1 && hood.starts_with("offsets") {
        let _ = writeln!(out, "dimension:1");
    }
    let _ = writeln!(out, "# unlisted neighborhoods keep their state");
    for (tuple, new) in rule.active_transitions() {
        let fields: Vec<String> = cols.iter().map(|&i| tuple[i].to_string()).collect();
        let _ = writeln!(out, "{},{new}", fields.join(","));
    }
    Ok(out)
}

fn parse_offsets(spec: &str, line: usize) -> Result<Vec<Coord>> {
    let inner = spec
        .strip_prefix("offsets(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::parse(line, 1, format!("unknown neighborhood {spec}")))?;
    inner
        .split(';')
        .map(|p| {
            let (x, y) = p.split_once(',').ok_or_else(|| Error::parse(line, 1, "offset needs x,y"))?;
            let x = x.trim().parse().map_err(|_| Error::parse(line, 1, "bad offset"))?;
            let y = y.trim().parse().map_err(|_| Error::parse(line, 1, "bad offset"))?;
            Ok(Coord(x, y))
        })
        .collect()
}

/// One cell of a transition line: a literal state or a variable.
#[derive(Clone, Debug)]
enum Field {
    State(State),
    Var(String),
}

/// Reads a table written by [`export_rule_table`] or a hand-written table in
/// the same dialect, including `var` declarations. Later lines never override
/// earlier ones, as in the usual first-match semantics.
pub fn import_rule_table(text: &str) -> Result<RuleTable> {
    let mut name = String::from("imported");
    let mut q: Option<State> = None;
    let mut hood: Option<(usize, Vec<Coord>, Vec<usize>)> = None;
    let mut dim_override = None;
    let mut vars: HashMap<String, Vec<State>> = HashMap::new();
    let mut lines: Vec<(usize, Vec<Field>)> = Vec::new();
    let mut in_table = false;

    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(n) = line.strip_prefix("@RULE") {
            name = n.trim().to_string();
            continue;
        }
        if line.starts_with('@') {
            in_table = line == "@TABLE";
            continue;
        }
        if !in_table {
            continue;
        }
        if let Some((k, v)) = line.split_once(':') {
            let v = v.trim();
            match k.trim() {
                "n_states" => q = Some(v.parse().map_err(|_| Error::parse(ln, 1, "bad n_states"))?),
                "neighborhood" => {
                    let (dim, order) = match v {
                        "vonNeumann" => (2, nbhd::von_neumann()),
                        "Moore" => (2, nbhd::moore()),
                        "oneDimensional" => (1, vec![Coord(0, 0), Coord(-1, 0), Coord(1, 0)]),
                        _ => {
                            let o = parse_offsets(v, ln)?;
                            let dim = if o.iter().all(|c| c.1 == 0) { 1 } else { 2 };
                            (dim, o)
                        }
                    };
                    // Internal neighborhood keeps the canonical constructor order.
                    let internal = match v {
                        "oneDimensional" => nbhd::first_neighbors(),
                        _ => order.clone(),
                    };
                    let cols = order.iter().map(|o| internal.iter().position(|p| p == o).expect("same set")).collect();
                    hood = Some((dim, internal, cols));
                }
                "symmetries" if v == "none" => {}
                "symmetries" => return Err(Error::Unsupported(format!("symmetries:{v}"))),
                "dimension" => dim_override = Some(v.parse().map_err(|_| Error::parse(ln, 1, "bad dimension"))?),
                other => return Err(Error::parse(ln, 1, format!("unknown key {other}"))),
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("var ") {
            let (vn, set) = rest.split_once('=').ok_or_else(|| Error::parse(ln, 1, "var needs '='"))?;
            let set = set.trim().trim_start_matches('{').trim_end_matches('}');
            let mut vals = Vec::new();
            for item in set.split(',') {
                let item = item.trim();
                match item.parse::<State>() {
                    Ok(s) => vals.push(s),
                    Err(_) => vals.extend(
                        vars.get(item).ok_or_else(|| Error::parse(ln, 1, format!("unknown variable {item}")))?.clone(),
                    ),
                }
            }
            vars.insert(vn.trim().to_string(), vals);
            continue;
        }
        let fields: Vec<Field> = if line.contains(',') {
            line.split(',')
                .map(|f| {
                    let f = f.trim();
                    f.parse().map(Field::State).unwrap_or_else(|_| Field::Var(f.to_string()))
                })
                .collect()
        } else {
            line.chars()
                .map(|c| c.to_digit(10).map(Field::State).ok_or_else(|| Error::parse(ln, 1, format!("bad state '{c}'"))))
                .collect::<Result<_>>()?
        };
        lines.push((ln, fields));
    }

    let q = q.ok_or_else(|| Error::parse(1, 1, "missing n_states"))?;
    let (mut dim, order, cols) = hood.ok_or_else(|| Error::parse(1, 1, "missing neighborhood"))?;
    if let Some(d) = dim_override {
        dim = d;
    }
    let k = order.len();
    let mut table = RuleTable::identity(dim, q, order.clone())
        .or_else(|_| RuleTable::new(dim, q, order.clone(), vec![0; (q as usize).pow(k as u32)]))?
        .table()
        .to_vec();
    let has_center = order.contains(&Coord(0, 0));
    let mut set = vec![false; table.len()];
    let probe = RuleTable::new(dim, q, order.clone(), vec![0; table.len()])?;

    for (ln, fields) in lines {
        if fields.len() != k + 1 {
            return Err(Error::parse(ln, 1, format!("expected {} fields, found {}", k + 1, fields.len())));
        }
        let names: Vec<&String> = {
            let mut v: Vec<&String> = Vec::new();
            for f in &fields {
                if let Field::Var(n) = f {
                    if !v.contains(&n) {
                        v.push(n);
                    }
                }
            }
            v
        };
        let domains: Vec<&Vec<State>> = names
            .iter()
            .map(|n| vars.get(*n).ok_or_else(|| Error::parse(ln, 1, format!("unknown variable {n}"))))
            .collect::<Result<_>>()?;
        let mut pick = vec![0usize; names.len()];
        loop {
            let val = |f: &Field| match f {
                Field::State(s) => *s,
                Field::Var(n) => {
                    let i = names.iter().position(|m| *m == n).expect("collected");
                    domains[i][pick[i]]
                }
            };
            let mut tuple = vec![0; k];
            for (c, f) in fields[..k].iter().enumerate() {
                tuple[cols[c]] = val(f);
            }
            let new = val(&fields[k]);
            if tuple.iter().chain([&new]).any(|&s| s >= q) {
                return Err(Error::parse(ln, 1, format!("state out of range for n_states {q}")));
            }
            let idx = probe.index(&tuple);
            if !set[idx] {
                table[idx] = new;
                set[idx] = true;
            }
            // Odometer over the variable bindings.
            let mut d = 0;
            loop {
                if d == pick.len() {
                    break;
                }
                pick[d] += 1;
                if pick[d] < domains[d].len() {
                    break;
                }
                pick[d] = 0;
                d += 1;
            }
            if d == pick.len() {
                break;
            }
        }
    }
    if !has_center && set.iter().any(|&s| !s) {
        return Err(Error::Unsupported("neighborhood without a center needs every transition listed".into()));
    }
    Ok(RuleTable::new(dim, q, order, table)?.named(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_no_transitions() {
        let id = RuleTable::identity(2, 3, nbhd::von_neumann()).unwrap();
        let t = export_rule_table(&id).unwrap();
        assert!(t.lines().all(|l| l.starts_with('@') || l.starts_with('#') || l.contains(':') || l.is_empty()));
    }

    #[test]
    fn elementary_rules_round_trip() {
        for code in [30u8, 110, 150, 212] {
            let r = RuleTable::wolfram(code);
            let text = export_rule_table(&r).unwrap();
            assert!(text.contains("neighborhood:oneDimensional"));
            let back = import_rule_table(&text).unwrap();
            assert_eq!(back.table(), r.table());
            assert_eq!(back.neighborhood(), r.neighborhood());
        }
    }

    #[test]
    fn one_dimensional_column_order() {
        // Rule 2 only fires on (l, c, r) = (0, 0, 1): columns C,W,E read 0,0,1.
        let t = export_rule_table(&RuleTable::wolfram(2)).unwrap();
        assert!(t.lines().any(|l| l == "0,0,1,1"));
    }

    #[test]
    fn variables_expand_with_shared_bindings() {
        let text = "@RULE v\n@TABLE\nn_states:2\nneighborhood:oneDimensional\nsymmetries:none\n\
                    var a={0,1}\n0,a,a,1\n";
        let r = import_rule_table(text).unwrap();
        // W,C,E order internally: (0,0,0) and (1,0,1) fire.
        assert_eq!(r.apply(&[0, 0, 0]), 1);
        assert_eq!(r.apply(&[1, 0, 1]), 1);
        assert_eq!(r.apply(&[1, 0, 0]), 0);
    }

    #[test]
    fn custom_offsets_round_trip() {
        let r = RuleTable::from_fn(1, 3, nbhd::one_way(), |t| (t[0] + t[1]) % 3).unwrap().named("ow sum");
        let text = export_rule_table(&r).unwrap();
        assert!(text.contains("neighborhood:offsets(-1,0;0,0)"));
        let back = import_rule_table(&text).unwrap();
        assert_eq!(back.table(), r.table());
        assert_eq!(back.dim(), 1);
        assert_eq!(back.name(), "ow_sum");
    }

    #[test]
    fn rejects_symmetries() {
        let text = "@TABLE\nn_states:2\nneighborhood:Moore\nsymmetries:rotate4\n";
        assert!(import_rule_table(text).is_err());
    }
}
