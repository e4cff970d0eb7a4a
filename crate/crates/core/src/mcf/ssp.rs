use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Capacity, FlowError, FlowNetwork, FlowSolution, COST_TOL};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct HeapItem {
    dist: f64,
    node: u32,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    // min-heap on (dist, node)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Residual graph in CSR form. Edge `e` and `e ^ 1` are mutual reverses.
struct Residual {
    to: Vec<u32>,
    cap: Vec<i64>,
    cost: Vec<f64>,
    first: Vec<u32>,
    adj: Vec<u32>,
}

impl Residual {
    fn new(num_nodes: usize, edges: &[(usize, usize, i64, f64)]) -> Self {
        let mut to = Vec::with_capacity(edges.len() * 2);
        let mut cap = Vec::with_capacity(edges.len() * 2);
        let mut cost = Vec::with_capacity(edges.len() * 2);
        let mut degree = vec![0u32; num_nodes + 1];
        for &(u, v, c, w) in edges {
            to.extend([v as u32, u as u32]);
            cap.extend([c, 0]);
            cost.extend([w, -w]);
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut first = vec![0u32; num_nodes + 1];
        for i in 0..num_nodes {
            first[i + 1] = first[i] + degree[i];
        }
        let mut fill = first.clone();
        let mut adj = vec![0u32; to.len()];
        for (i, &(u, v, _, _)) in edges.iter().enumerate() {
            adj[fill[u] as usize] = (2 * i) as u32;
            fill[u] += 1;
            adj[fill[v] as usize] = (2 * i + 1) as u32;
            fill[v] += 1;
        }
        Residual {
            to,
            cap,
            cost,
            first,
            adj,
        }
    }

    fn out_edges(&self, u: usize) -> &[u32] {
        &self.adj[self.first[u] as usize..self.first[u + 1] as usize]
    }

    fn push(&mut self, e: usize, amount: i64) {
        self.cap[e] -= amount;
        self.cap[e ^ 1] += amount;
    }
}

/// Returns a minimum-cost flow that meets every supply and demand.
///
/// Arc flows are integral. Ties between optimal flows are broken by arc
/// insertion order and node index, so repeated calls give identical flows.
pub fn solve_min_cost_flow(net: &FlowNetwork) -> Result<FlowSolution, FlowError> {
    net.check_well_formed()?;
    let n = net.num_nodes();
    let inf_cap = net.unbounded_cap();

    if has_unbounded_negative_cycle(net) {
        return Err(FlowError::Unbounded);
    }

    // Negative-cost arcs start saturated so every residual arc has
    // non-negative cost and zero potentials are valid.
    let mut balance = net.supplies().to_vec();
    let mut edges = Vec::with_capacity(net.num_arcs() + n);
    let mut preset = vec![0i64; net.num_arcs()];
    for (i, a) in net.arcs().iter().enumerate() {
        let cap = match a.capacity {
            Capacity::Finite(c) => c,
            Capacity::Unbounded => inf_cap,
        };
        if a.cost < 0.0 {
            preset[i] = cap;
            balance[a.tail] -= cap;
            balance[a.head] += cap;
        }
        edges.push((a.tail, a.head, cap, a.cost));
    }
    let (src, snk) = (n, n + 1);
    let mut required = 0i64;
    for (v, &b) in balance.iter().enumerate() {
        match b.cmp(&0) {
            Ordering::Greater => {
                edges.push((src, v, b, 0.0));
                required += b;
            }
            Ordering::Less => edges.push((v, snk, -b, 0.0)),
            Ordering::Equal => {}
        }
    }

    let mut g = Residual::new(n + 2, &edges);
    for (i, &f) in preset.iter().enumerate() {
        if f > 0 {
            g.push(2 * i, f);
        }
    }

    let total = n + 2;
    let mut pot = vec![0.0f64; total];
    let mut dist = vec![f64::INFINITY; total];
    let mut done = vec![false; total];
    let mut parent = vec![NONE; total];
    let mut heap = BinaryHeap::new();
    let mut routed = 0i64;

    while routed < required {
        dist.fill(f64::INFINITY);
        done.fill(false);
        parent.fill(NONE);
        heap.clear();
        dist[src] = 0.0;
        heap.push(HeapItem {
            dist: 0.0,
            node: src as u32,
        });
        while let Some(HeapItem { dist: d, node }) = heap.pop() {
            let u = node as usize;
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == snk {
                break;
            }
            for &e in g.out_edges(u) {
                let e = e as usize;
                if g.cap[e] <= 0 {
                    continue;
                }
                let v = g.to[e] as usize;
                if done[v] {
                    continue;
                }
                let reduced = (g.cost[e] + pot[u] - pot[v]).max(0.0);
                let nd = d + reduced;
                if nd < dist[v] {
                    dist[v] = nd;
                    parent[v] = e as u32;
                    heap.push(HeapItem {
                        dist: nd,
                        node: v as u32,
                    });
                }
            }
        }
        if !done[snk] {
            return Err(FlowError::Infeasible {
                routed: net.total_supply() - (required - routed),
                required: net.total_supply(),
            });
        }

        // Nodes not settled before the sink are at distance >= dist[snk].
        let cutoff = dist[snk];
        for v in 0..total {
            pot[v] += if done[v] { dist[v] } else { cutoff };
        }

        let mut bottleneck = required - routed;
        let mut v = snk;
        while v != src {
            let e = parent[v] as usize;
            bottleneck = bottleneck.min(g.cap[e]);
            v = g.to[e ^ 1] as usize;
        }
        let mut v = snk;
        while v != src {
            let e = parent[v] as usize;
            g.push(e, bottleneck);
            v = g.to[e ^ 1] as usize;
        }
        routed += bottleneck;
    }

    let flow: Vec<i64> = (0..net.num_arcs()).map(|i| g.cap[2 * i + 1]).collect();
    let objective = net.cost_of(&flow);
    pot.truncate(n);
    Ok(FlowSolution {
        flow,
        objective,
        potentials: pot,
    })
}

/// Bellman-Ford over unbounded arcs only: a negative cycle there has no
/// capacity limit.
fn has_unbounded_negative_cycle(net: &FlowNetwork) -> bool {
    let arcs: Vec<_> = net
        .arcs()
        .iter()
        .filter(|a| a.capacity == Capacity::Unbounded)
        .collect();
    if !arcs.iter().any(|a| a.cost < 0.0) {
        return false;
    }
    let mut dist = vec![0.0f64; net.num_nodes()];
    for _ in 0..=net.num_nodes() {
        let mut changed = false;
        for a in &arcs {
            if dist[a.tail] + a.cost < dist[a.head] - COST_TOL {
                dist[a.head] = dist[a.tail] + a.cost;
                changed = true;
            }
        }
        if !changed {
            return false;
        }
    }
    true
}
