use std::collections::VecDeque;
use std::fmt;

use super::{Capacity, FlowNetwork, FlowSolution, COST_TOL};

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateFailure {
    Shape,
    CapacityBound { arc: usize },
    Conservation { node: usize, excess: i64 },
    NegativeCycle,
}

impl fmt::Display for CertificateFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertificateFailure::Shape => write!(f, "flow vector does not match the network"),
            CertificateFailure::CapacityBound { arc } => write!(f, "arc {arc} outside [0, capacity]"),
            CertificateFailure::Conservation { node, excess } => {
                write!(f, "node {node} violates conservation by {excess}")
            }
            CertificateFailure::NegativeCycle => {
                write!(f, "residual network has a negative-cost cycle")
            }
        }
    }
}

/// `true` iff the flow is feasible and optimal.
pub fn check_certificate(net: &FlowNetwork, sol: &FlowSolution) -> bool {
    diagnose_certificate(net, sol).is_ok()
}

/// Feasibility plus an optimality test that ignores the returned potentials:
/// the residual network is scanned for a negative cycle using raw costs.
pub fn diagnose_certificate(net: &FlowNetwork, sol: &FlowSolution) -> Result<(), CertificateFailure> {
    if sol.flow.len() != net.num_arcs() {
        return Err(CertificateFailure::Shape);
    }
    let mut excess = net.supplies().to_vec();
    for (id, (a, &f)) in net.arcs().iter().zip(&sol.flow).enumerate() {
        let within = match a.capacity {
            Capacity::Finite(c) => (0..=c).contains(&f),
            Capacity::Unbounded => f >= 0,
        };
        if !within {
            return Err(CertificateFailure::CapacityBound { arc: id });
        }
        excess[a.tail] -= f;
        excess[a.head] += f;
    }
    if let Some((node, &e)) = excess.iter().enumerate().find(|(_, &e)| e != 0) {
        return Err(CertificateFailure::Conservation { node, excess: e });
    }
    if residual_has_negative_cycle(net, &sol.flow) {
        return Err(CertificateFailure::NegativeCycle);
    }
    Ok(())
}

fn residual_arcs(net: &FlowNetwork, flow: &[i64]) -> Vec<Vec<(usize, f64)>> {
    let mut out = vec![Vec::new(); net.num_nodes()];
    for (a, &f) in net.arcs().iter().zip(flow) {
        let room = match a.capacity {
            Capacity::Finite(c) => f < c,
            Capacity::Unbounded => true,
        };
        if room {
            out[a.tail].push((a.head, a.cost));
        }
        if f > 0 {
            out[a.head].push((a.tail, -a.cost));
        }
    }
    out
}

fn residual_has_negative_cycle(net: &FlowNetwork, flow: &[i64]) -> bool {
    let n = net.num_nodes();
    let adj = residual_arcs(net, flow);
    let mut dist = vec![0.0f64; n];
    // Edge count of the current shortest path; n or more means a cycle.
    let mut hops = vec![0usize; n];
    let mut queued = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).collect();
    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        for &(v, c) in &adj[u] {
            if dist[u] + c < dist[v] - COST_TOL {
                dist[v] = dist[u] + c;
                hops[v] = hops[u] + 1;
                if hops[v] >= n {
                    return true;
                }
                if !queued[v] {
                    queued[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    false
}

/// Complementary slackness: no residual arc has negative reduced cost
/// under the solution's potentials.
pub fn potentials_certify(net: &FlowNetwork, sol: &FlowSolution) -> bool {
    if sol.potentials.len() != net.num_nodes() || sol.flow.len() != net.num_arcs() {
        return false;
    }
    let pot = &sol.potentials;
    net.arcs().iter().zip(&sol.flow).all(|(a, &f)| {
        let reduced = a.cost + pot[a.tail] - pot[a.head];
        let room = match a.capacity {
            Capacity::Finite(c) => f < c,
            Capacity::Unbounded => true,
        };
        (!room || reduced >= -COST_TOL) && (f <= 0 || reduced <= COST_TOL)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcf::solve_min_cost_flow;

    fn parallel() -> FlowNetwork {
        let mut net = FlowNetwork::with_nodes(vec![1, -1]);
        net.add_arc(0, 1, 1, 1.0);
        net.add_arc(0, 1, 1, 3.0);
        net
    }

    #[test]
    fn solver_output_certifies() {
        let net = parallel();
        let sol = solve_min_cost_flow(&net).unwrap();
        assert!(check_certificate(&net, &sol));
        assert!(potentials_certify(&net, &sol));
    }

    #[test]
    fn expensive_routing_has_negative_cycle() {
        let net = parallel();
        let sol = FlowSolution {
            flow: vec![0, 1],
            objective: 3.0,
            potentials: vec![0.0, 0.0],
        };
        assert_eq!(
            diagnose_certificate(&net, &sol),
            Err(CertificateFailure::NegativeCycle)
        );
        assert!(!potentials_certify(&net, &sol));
    }

    #[test]
    fn conservation_violation() {
        let mut net = FlowNetwork::with_nodes(vec![1, 0, -1]);
        net.add_arc(0, 1, 1, 1.0);
        net.add_arc(1, 2, 1, 1.0);
        let sol = FlowSolution {
            flow: vec![1, 0],
            objective: 1.0,
            potentials: vec![0.0; 3],
        };
        assert!(matches!(
            diagnose_certificate(&net, &sol),
            Err(CertificateFailure::Conservation { node: 1, excess: 1 })
        ));
    }

    #[test]
    fn capacity_violation() {
        let net = parallel();
        let sol = FlowSolution {
            flow: vec![2, -1],
            objective: 0.0,
            potentials: vec![0.0; 2],
        };
        assert!(!check_certificate(&net, &sol));
    }
}
