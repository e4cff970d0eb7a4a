#![allow(dead_code)]

use carbonflow::datagen::ScenarioRng;
use carbonflow::mcf::{Capacity, FlowNetwork};

/// Random small network with integer costs in `0..=9` and capacities `0..=4`.
/// Supplies come from a random feasible flow unless `balanced_only` is false
/// and the coin says otherwise.
pub fn random_network(seed: u64) -> FlowNetwork {
    let mut rng = ScenarioRng::new(seed);
    let n = rng.inclusive(2, 12) as usize;
    let m = rng.inclusive(1, 25) as usize;
    let mut supplies = vec![0i64; n];
    let mut arcs = Vec::new();
    while arcs.len() < m {
        let (a, b) = (rng.below(n as u64) as usize, rng.below(n as u64) as usize);
        if a == b {
            continue;
        }
        let cap = rng.below(5) as i64;
        let cost = rng.below(10) as f64;
        let f = rng.inclusive(0, cap as u64) as i64;
        supplies[a] += f;
        supplies[b] -= f;
        arcs.push((a, b, cap, cost));
    }
    if rng.below(5) == 0 {
        // Perturb into a possibly infeasible but balanced instance.
        let (a, b) = (rng.below(n as u64) as usize, rng.below(n as u64) as usize);
        let k = rng.inclusive(1, 3) as i64;
        supplies[a] += k;
        supplies[b] -= k;
    }
    network(supplies, &arcs)
}

pub fn network(supplies: Vec<i64>, arcs: &[(usize, usize, i64, f64)]) -> FlowNetwork {
    let mut net = FlowNetwork::with_nodes(supplies);
    for &(a, b, cap, cost) in arcs {
        net.add_arc(a, b, Capacity::Finite(cap), cost);
    }
    net
}

/// Minimum cost over all integral feasible flows, by branch and bound.
/// Requires finite capacities and non-negative costs. `None` if infeasible.
pub fn exhaustive_min_cost(net: &FlowNetwork) -> Option<f64> {
    let n = net.num_nodes();
    let mut order: Vec<usize> = (0..net.num_arcs()).collect();
    order.sort_by_key(|&a| net.arc(a).tail.max(net.arc(a).head));
    let cap: Vec<i64> = order
        .iter()
        .map(|&a| match net.arc(a).capacity {
            Capacity::Finite(c) => c,
            Capacity::Unbounded => panic!("exhaustive search needs finite capacities"),
        })
        .collect();
    assert!(net.arcs().iter().all(|a| a.cost >= 0.0));

    // Remaining inbound and outbound capacity per node from position i on.
    let mut rem_in = vec![vec![0i64; n]; order.len() + 1];
    let mut rem_out = vec![vec![0i64; n]; order.len() + 1];
    for i in (0..order.len()).rev() {
        rem_in[i] = rem_in[i + 1].clone();
        rem_out[i] = rem_out[i + 1].clone();
        let arc = net.arc(order[i]);
        rem_in[i][arc.head] += cap[i];
        rem_out[i][arc.tail] += cap[i];
    }

    struct Search<'a> {
        net: &'a FlowNetwork,
        order: &'a [usize],
        cap: &'a [i64],
        rem_in: &'a [Vec<i64>],
        rem_out: &'a [Vec<i64>],
        excess: Vec<i64>,
        best: Option<f64>,
    }

    impl Search<'_> {
        fn go(&mut self, i: usize, cost: f64) {
            if self.best.is_some_and(|b| cost >= b) {
                return;
            }
            // Final excess e must be reachable: e = future_out - future_in.
            for v in 0..self.excess.len() {
                let e = self.excess[v];
                if e > self.rem_out[i][v] || -e > self.rem_in[i][v] {
                    return;
                }
            }
            if i == self.order.len() {
                self.best = Some(cost);
                return;
            }
            let arc = self.net.arc(self.order[i]);
            for f in 0..=self.cap[i] {
                self.excess[arc.tail] -= f;
                self.excess[arc.head] += f;
                self.go(i + 1, cost + arc.cost * f as f64);
                self.excess[arc.tail] += f;
                self.excess[arc.head] -= f;
            }
        }
    }

    let mut search = Search {
        net,
        order: &order,
        cap: &cap,
        rem_in: &rem_in,
        rem_out: &rem_out,
        excess: net.supplies().to_vec(),
        best: None,
    };
    search.go(0, 0.0);
    search.best
}
