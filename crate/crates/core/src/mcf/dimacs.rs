//! DIMACS min-cost-flow text format.
//!
//! ```text
//! c comment
//! p min <nodes> <arcs>
//! n <id> <supply>
//! a <tail> <head> <low> <cap> <cost>
//! ```
//!
//! Node ids are 1-based. Lower bounds must be zero. Unbounded arcs are
//! written with their effective capacity.

use std::fmt::Write as _;

use super::{Capacity, FlowNetwork};
use crate::error::{Error, Result};

pub fn write_dimacs(net: &FlowNetwork) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "c min-cost flow network");
    let _ = writeln!(out, "p min {} {}", net.num_nodes(), net.num_arcs());
    for (v, &b) in net.supplies().iter().enumerate() {
        if b != 0 {
            let _ = writeln!(out, "n {} {}", v + 1, b);
        }
    }
    for (id, a) in net.arcs().iter().enumerate() {
        let cap = match a.capacity {
            Capacity::Finite(c) => c,
            Capacity::Unbounded => net.effective_capacity(id),
        };
        let _ = writeln!(out, "a {} {} 0 {} {}", a.tail + 1, a.head + 1, cap, a.cost);
    }
    out
}

pub fn read_dimacs(text: &str) -> Result<FlowNetwork> {
    let err = |line: usize, message: String| Error::Parse {
        context: "dimacs".into(),
        line: line as u64,
        message,
    };
    let mut net: Option<FlowNetwork> = None;
    let mut declared_arcs = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let Some((&kind, rest)) = fields.split_first() else {
            continue;
        };
        let int = |s: &str| -> Result<i64> {
            s.parse::<i64>()
                .map_err(|e| err(lineno, format!("bad integer {s:?}: {e}")))
        };
        match kind {
            "c" => {}
            "p" => {
                if rest.len() != 3 || rest[0] != "min" {
                    return Err(err(lineno, "expected `p min <nodes> <arcs>`".into()));
                }
                if net.is_some() {
                    return Err(err(lineno, "duplicate problem line".into()));
                }
                let nodes = int(rest[1])?;
                declared_arcs = int(rest[2])? as usize;
                net = Some(FlowNetwork::with_nodes(vec![0; nodes.max(0) as usize]));
            }
            "n" | "a" => {
                let Some(net) = net.as_mut() else {
                    return Err(err(lineno, "descriptor before problem line".into()));
                };
                let node = |s: &str| -> Result<usize> {
                    let id = int(s)?;
                    if id < 1 || id as usize > net.num_nodes() {
                        return Err(err(lineno, format!("node {id} out of range")));
                    }
                    Ok(id as usize - 1)
                };
                if kind == "n" {
                    if rest.len() != 2 {
                        return Err(err(lineno, "expected `n <id> <supply>`".into()));
                    }
                    let v = node(rest[0])?;
                    let b = int(rest[1])?;
                    net.set_supply(v, b);
                } else {
                    if rest.len() != 5 {
                        return Err(err(lineno, "expected `a <tail> <head> <low> <cap> <cost>`".into()));
                    }
                    let (u, v) = (node(rest[0])?, node(rest[1])?);
                    if int(rest[2])? != 0 {
                        return Err(err(lineno, "nonzero lower bounds are not supported".into()));
                    }
                    let cap = int(rest[3])?;
                    let cost: f64 = rest[4]
                        .parse()
                        .map_err(|e| err(lineno, format!("bad cost {:?}: {e}", rest[4])))?;
                    if u == v {
                        return Err(err(lineno, "self-loop".into()));
                    }
                    net.add_arc(u, v, cap, cost);
                }
            }
            other => return Err(err(lineno, format!("unknown descriptor {other:?}"))),
        }
    }
    let net = net.ok_or_else(|| err(0, "missing problem line".into()))?;
    if net.num_arcs() != declared_arcs {
        return Err(err(
            0,
            format!("declared {declared_arcs} arcs, found {}", net.num_arcs()),
        ));
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcf::solve_min_cost_flow;

    #[test]
    fn round_trip_preserves_optimum() {
        let mut net = FlowNetwork::with_nodes(vec![2, 0, -2]);
        net.add_arc(0, 1, 1, 1.5);
        net.add_arc(1, 2, Capacity::Unbounded, 0.25);
        net.add_arc(0, 2, 2, 4.0);
        let text = write_dimacs(&net);
        assert!(text.contains("p min 3 3"));
        let back = read_dimacs(&text).unwrap();
        assert_eq!(back.supplies(), net.supplies());
        assert_eq!(back.arc(1).capacity, Capacity::Finite(2));
        let a = solve_min_cost_flow(&net).unwrap();
        let b = solve_min_cost_flow(&back).unwrap();
        assert_eq!(a.flow, b.flow);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn rejects_lower_bounds_and_bad_nodes() {
        let text = "p min 2 1\nn 1 1\nn 2 -1\na 1 2 1 3 1.0\n";
        assert!(matches!(read_dimacs(text), Err(Error::Parse { line: 4, .. })));
        let text = "p min 2 1\na 1 3 0 3 1.0\n";
        assert!(matches!(read_dimacs(text), Err(Error::Parse { line: 2, .. })));
        assert!(read_dimacs("c nothing\n").is_err());
    }
}
