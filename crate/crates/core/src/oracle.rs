//! Brute-force optimum for small instances.
//!
//! Every complete task placement is enumerated. For a fixed placement the
//! remaining choices (grid, renewable and battery energy) form a pure
//! transportation problem with fixed per-server demands, which is solved as
//! a min-cost flow with no task nodes. The minimum over placements is the
//! exact optimum of the integer program, so comparing it with the
//! task-node reformulation checks that reformulation independently.

use std::collections::HashMap;

use crate::datagen::ScenarioRng;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mcf::{self, Capacity, FlowError, FlowNetwork, NodeId};
use crate::model::{off_diagonal, Placement, Scenario, SolutionVars, Task};
use crate::reformulate::{self, OffloadCi, Scheme};

pub const DEFAULT_LIMIT: u128 = 1_000_000;

/// Per task, its feasible placements ordered by site then slot.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentEnumeration {
    pub choices: Vec<Vec<Placement>>,
}

impl AssignmentEnumeration {
    pub fn new(sc: &Scenario, scheme: Scheme) -> Self {
        let choices = sc
            .tasks
            .iter()
            .map(|tk| {
                let mut sites: Vec<usize> = if scheme.offloading {
                    tk.candidates.clone()
                } else {
                    vec![tk.home_site]
                };
                sites.retain(|s| tk.candidates.contains(s));
                sites.sort_unstable();
                sites.dedup();
                sites
                    .into_iter()
                    .flat_map(|site| tk.window().map(move |slot| Placement { site, slot }))
                    .collect()
            })
            .collect();
        AssignmentEnumeration { choices }
    }

    pub fn size(&self) -> u128 {
        self.choices
            .iter()
            .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
            .unwrap_or(u128::MAX)
    }

    /// Complete assignments in lexicographic order, last task fastest.
    pub fn iter(&self) -> Odometer<'_> {
        Odometer::new(&self.choices)
    }
}

pub struct Odometer<'a> {
    choices: &'a [Vec<Placement>],
    digits: Vec<usize>,
    exhausted: bool,
}

impl<'a> Odometer<'a> {
    fn new(choices: &'a [Vec<Placement>]) -> Self {
        Odometer {
            choices,
            digits: vec![0; choices.len()],
            exhausted: choices.iter().any(Vec::is_empty),
        }
    }
}

impl Iterator for Odometer<'_> {
    type Item = Vec<Placement>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.exhausted {
            return None;
        }
        let current = self
            .digits
            .iter()
            .zip(self.choices)
            .map(|(&d, c)| c[d])
            .collect();
        self.exhausted = true;
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.choices[i].len() {
                self.exhausted = false;
                break;
            }
            self.digits[i] = 0;
        }
        Some(current)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptimum {
    pub total: f64,
    pub assignment: Vec<Placement>,
    /// Energy decisions realizing `total` for `assignment`.
    pub vars: SolutionVars,
}

/// Exact optimum by enumeration; `Ok(None)` when no placement is feasible.
pub fn brute_force_optimum(
    sc: &Scenario,
    scheme: Scheme,
    offload_ci: OffloadCi,
    limit: u128,
    exec: Execution,
) -> Result<Option<OracleOptimum>> {
    sc.ensure_valid()?;
    let space = AssignmentEnumeration::new(sc, scheme);
    let count = space.size();
    if count > limit {
        return Err(Error::EnumerationLimit { count, limit });
    }
    if count == 0 {
        return Ok(None);
    }

    // Chunks fix the first task's placement; within a chunk the order is the
    // global lexicographic order, so the first strict minimum is chunk-independent.
    let chunks: Vec<Option<Placement>> = match space.choices.first() {
        Some(first) => first.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let best_per_chunk = exec.map(&chunks, |head| -> Result<Option<(f64, Vec<Placement>)>> {
        let tail = if head.is_some() {
            &space.choices[1..]
        } else {
            &space.choices[..]
        };
        let mut memo: HashMap<Vec<u32>, Option<f64>> = HashMap::new();
        let mut best: Option<(f64, Vec<Placement>)> = None;
        for rest in Odometer::new(tail) {
            let assignment: Vec<Placement> = head.iter().copied().chain(rest).collect();
            let load = load_matrix(sc, &assignment);
            if load.iter().any(|&k| k as i64 > sc.server_cap) {
                continue;
            }
            let energy = match memo.get(&load) {
                Some(&e) => e,
                None => {
                    let e = energy_subproblem(sc, scheme, &load)?.map(|(cost, _)| cost);
                    memo.insert(load, e);
                    e
                }
            };
            let Some(energy) = energy else { continue };
            let total = energy + offload_cost(sc, &assignment, offload_ci);
            if best.as_ref().is_none_or(|(b, _)| total < *b) {
                best = Some((total, assignment));
            }
        }
        Ok(best)
    });

    let mut best: Option<(f64, Vec<Placement>)> = None;
    for chunk in best_per_chunk {
        if let Some((total, assignment)) = chunk? {
            if best.as_ref().is_none_or(|(b, _)| total < *b) {
                best = Some((total, assignment));
            }
        }
    }
    let Some((total, assignment)) = best else {
        return Ok(None);
    };
    let load = load_matrix(sc, &assignment);
    let (_, mut vars) = energy_subproblem(sc, scheme, &load)?
        .ok_or_else(|| Error::Internal("best placement lost its energy plan".into()))?;
    vars.assignment = assignment.clone();
    Ok(Some(OracleOptimum {
        total,
        assignment,
        vars,
    }))
}

fn load_matrix(sc: &Scenario, assignment: &[Placement]) -> Vec<u32> {
    let mut load = vec![0u32; sc.num_sites * sc.num_slots];
    for p in assignment {
        load[p.site * sc.num_slots + p.slot] += 1;
    }
    load
}

fn offload_cost(sc: &Scenario, assignment: &[Placement], offload_ci: OffloadCi) -> f64 {
    sc.tasks
        .iter()
        .zip(assignment)
        .map(|(tk, p)| offload_ci.unit_cost(sc, tk.home_site, p.site, p.slot))
        .sum()
}

/// Cheapest energy plan serving a fixed load per server-slot, or `None`
/// when none exists. The returned vars have an empty assignment.
fn energy_subproblem(
    sc: &Scenario,
    scheme: Scheme,
    load: &[u32],
) -> Result<Option<(f64, SolutionVars)>> {
    let (s_n, t_n) = (sc.num_sites, sc.num_slots);
    let demand: i64 = load.iter().map(|&k| k as i64).sum();
    let mut net = FlowNetwork::new();
    let grid = net.add_node(demand);
    let sink = net.add_node(-(sc.total_renewable() + sc.total_initial_battery()));
    let id = |s: usize, t: usize| s * t_n + t;
    let mut theta: Vec<NodeId> = Vec::with_capacity(s_n * t_n);
    let mut bat_in = Vec::with_capacity(s_n * t_n);
    let mut bat_out = Vec::with_capacity(s_n * t_n);
    let mut server = Vec::with_capacity(s_n * t_n);
    for s in 0..s_n {
        for t in 0..t_n {
            theta.push(net.add_node(sc.renewable[s][t]));
            bat_in.push(net.add_node(if t == 0 { sc.initial_battery[s] } else { 0 }));
            bat_out.push(net.add_node(0));
            server.push(net.add_node(-(load[id(s, t)] as i64)));
        }
    }

    let inf = Capacity::Unbounded;
    let mut x = vec![vec![0; t_n]; s_n];
    let mut z = x.clone();
    let mut u = x.clone();
    let mut v = x.clone();
    let mut carry = x.clone();
    let mut shares = Vec::new();
    for s in 0..s_n {
        for t in 0..t_n {
            let k = id(s, t);
            x[s][t] = net.add_arc(grid, server[k], inf, sc.ci[s][t]);
            u[s][t] = net.add_arc(grid, bat_in[k], inf, sc.ci[s][t]);
            z[s][t] = net.add_arc(theta[k], server[k], inf, 0.0);
            v[s][t] = net.add_arc(theta[k], bat_in[k], inf, 0.0);
            net.add_arc(theta[k], sink, inf, 0.0);
            net.add_arc(bat_in[k], bat_out[k], sc.battery_cap, 0.0);
            carry[s][t] = if t + 1 < t_n {
                net.add_arc(bat_out[k], bat_in[id(s, t + 1)], inf, 0.0)
            } else if sc.total_initial_battery() > 0 {
                net.add_arc(bat_out[k], sink, inf, 0.0)
            } else {
                usize::MAX
            };
            for b in 0..s_n {
                if scheme.sharing || b == s {
                    let arc = net.add_arc(bat_out[id(b, t)], server[k], inf, sc.beta[b][s] * sc.ci[s][t]);
                    shares.push((s, b, t, arc));
                }
            }
        }
    }
    net.add_arc(grid, sink, inf, 0.0);

    let sol = match mcf::solve_min_cost_flow(&net) {
        Ok(sol) => sol,
        Err(FlowError::Infeasible { .. }) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let f = |a: usize| if a == usize::MAX { 0.0 } else { sol.flow[a] as f64 };
    let mut vars = SolutionVars::zeros(s_n, t_n, Vec::new());
    for s in 0..s_n {
        for t in 0..t_n {
            vars.x[s][t] = f(x[s][t]);
            vars.z[s][t] = f(z[s][t]);
            vars.u[s][t] = f(u[s][t]);
            vars.v[s][t] = f(v[s][t]);
            vars.w[s][t] = f(carry[s][t]);
        }
    }
    for (s, b, t, arc) in shares {
        vars.y[s][b][t] = f(arc);
    }
    Ok(Some((sol.objective, vars)))
}

/// Random desk-size instance: two sites, three slots, up to four tasks.
pub fn random_small_scenario(seed: u64) -> Scenario {
    let mut rng = ScenarioRng::new(seed);
    let (s_n, t_n) = (2usize, 3usize);
    let ci = (0..s_n)
        .map(|_| (0..t_n).map(|_| 10.0 + 590.0 * rng.unit()).collect())
        .collect();
    let renewable = (0..s_n)
        .map(|_| (0..t_n).map(|_| rng.below(3) as i64).collect())
        .collect();
    let battery_cap = rng.below(3) as i64;
    let server_cap = rng.inclusive(1, 2) as i64;
    let initial_battery = (0..s_n)
        .map(|_| {
            if rng.below(4) == 0 {
                rng.inclusive(0, battery_cap as u64) as i64
            } else {
                0
            }
        })
        .collect();
    let num_tasks = rng.below(5) as usize;
    let tasks = (0..num_tasks)
        .map(|n| {
            let o = rng.below(t_n as u64) as usize;
            let d = rng.inclusive(o as u64, t_n as u64 - 1) as usize;
            let home = rng.below(s_n as u64) as usize;
            // Non-empty candidate subset as a bitmask.
            let mask = rng.inclusive(1, (1 << s_n) - 1);
            Task {
                id: n + 1,
                origin_slot: o,
                deadline_slot: d,
                home_site: home,
                candidates: (0..s_n).filter(|s| mask >> s & 1 == 1).collect(),
            }
        })
        .collect();
    let mut alpha = off_diagonal(s_n, 0.0);
    let mut beta = off_diagonal(s_n, 0.0);
    for i in 0..s_n {
        for j in 0..s_n {
            if i != j {
                alpha[i][j] = 0.5 * rng.unit();
                beta[i][j] = 0.5 * rng.unit();
            }
        }
    }
    Scenario {
        num_sites: s_n,
        num_slots: t_n,
        tasks,
        ci,
        renewable,
        alpha,
        beta,
        battery_cap,
        server_cap,
        initial_battery,
    }
}

/// One oracle-vs-flow comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceCase {
    pub seed: u64,
    pub scheme: Scheme,
    /// `None` when infeasible.
    pub flow_total: Option<f64>,
    pub oracle_total: Option<f64>,
}

impl EquivalenceCase {
    pub fn agrees(&self, rel_tol: f64) -> bool {
        match (self.flow_total, self.oracle_total) {
            (None, None) => true,
            (Some(a), Some(b)) => (a - b).abs() <= rel_tol * a.abs().max(b.abs()).max(1.0),
            _ => false,
        }
    }
}

/// Solves `instances` random small scenarios under all four schemes with
/// both the flow reformulation and the oracle.
pub fn oracle_equivalence(
    instances: usize,
    base_seed: u64,
    offload_ci: OffloadCi,
    exec: Execution,
) -> Result<Vec<EquivalenceCase>> {
    let seeds: Vec<u64> = (0..instances as u64).map(|i| base_seed.wrapping_add(i)).collect();
    let per_seed = exec.map(&seeds, |&seed| -> Result<Vec<EquivalenceCase>> {
        let sc = random_small_scenario(seed);
        Scheme::ALL
            .iter()
            .map(|&scheme| {
                let flow_total = match reformulate::solve_scheme(&sc, scheme, offload_ci) {
                    Ok(sol) => Some(sol.breakdown.total),
                    Err(Error::Infeasible(_)) => None,
                    Err(e) => return Err(e),
                };
                let oracle_total = brute_force_optimum(&sc, scheme, offload_ci, DEFAULT_LIMIT, Execution::Sequential)?
                    .map(|o| o.total);
                Ok(EquivalenceCase {
                    seed,
                    scheme,
                    flow_total,
                    oracle_total,
                })
            })
            .collect()
    });
    let mut out = Vec::new();
    for cases in per_seed {
        out.extend(cases?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::verify_constraints;
    use crate::reformulate::cf_breakdown;

    fn task(home: usize, candidates: Vec<usize>) -> Task {
        Task {
            id: 1,
            origin_slot: 0,
            deadline_slot: 0,
            home_site: home,
            candidates,
        }
    }

    fn run(sc: &Scenario, scheme: Scheme) -> Option<OracleOptimum> {
        brute_force_optimum(sc, scheme, OffloadCi::Destination, DEFAULT_LIMIT, Execution::Sequential).unwrap()
    }

    #[test]
    fn single_grid_task() {
        let mut sc = Scenario::empty(1, 1);
        sc.ci[0][0] = 110.0;
        sc.server_cap = 1;
        sc.tasks.push(task(0, vec![0]));
        let best = run(&sc, Scheme::S1).unwrap();
        assert_eq!(best.total, 110.0);
        assert_eq!(best.assignment, vec![Placement { site: 0, slot: 0 }]);
    }

    #[test]
    fn offloading_pair() {
        let mut sc = Scenario::empty(2, 1);
        sc.ci = vec![vec![593.0], vec![24.0]];
        sc.broadcast_alpha(0.1);
        sc.server_cap = 1;
        sc.tasks.push(task(0, vec![0, 1]));
        let s1 = run(&sc, Scheme::S1).unwrap();
        assert!((s1.total - 26.4).abs() < 1e-9);
        assert_eq!(s1.assignment[0].site, 1);
        assert_eq!(run(&sc, Scheme::S4).unwrap().total, 593.0);
    }

    #[test]
    fn no_tasks() {
        let mut sc = Scenario::empty(2, 2);
        sc.renewable[0][1] = 2;
        let best = run(&sc, Scheme::S1).unwrap();
        assert_eq!(best.total, 0.0);
        assert!(best.assignment.is_empty());
    }

    #[test]
    fn limit_is_enforced() {
        let mut sc = Scenario::empty(2, 3);
        for _ in 0..4 {
            sc.tasks.push(Task {
                deadline_slot: 2,
                ..task(0, vec![0, 1])
            });
        }
        let err = brute_force_optimum(&sc, Scheme::S1, OffloadCi::Destination, 100, Execution::Sequential)
            .unwrap_err();
        assert!(matches!(err, Error::EnumerationLimit { count: 1296, limit: 100 }));
    }

    #[test]
    fn infeasible_when_capacity_short() {
        let mut sc = Scenario::empty(1, 1);
        sc.server_cap = 1;
        sc.tasks.push(task(0, vec![0]));
        sc.tasks.push(task(0, vec![0]));
        assert_eq!(run(&sc, Scheme::S1), None);
    }

    #[test]
    fn enumeration_order_is_lexicographic() {
        let mut sc = Scenario::empty(2, 2);
        sc.tasks.push(Task {
            deadline_slot: 1,
            ..task(0, vec![1, 0])
        });
        let space = AssignmentEnumeration::new(&sc, Scheme::S1);
        let firsts: Vec<Placement> = space.iter().map(|a| a[0]).collect();
        let mut sorted = firsts.clone();
        sorted.sort();
        assert_eq!(firsts, sorted);
        assert_eq!(space.size(), 4);
        assert_eq!(AssignmentEnumeration::new(&sc, Scheme::S3).size(), 2);
    }

    #[test]
    fn best_assignment_reprices_to_total() {
        for seed in 0..20 {
            let sc = random_small_scenario(seed);
            for scheme in Scheme::ALL {
                if let Some(best) = run(&sc, scheme) {
                    let priced = cf_breakdown(&sc, &best.vars, OffloadCi::Destination);
                    assert!((priced.total - best.total).abs() <= 1e-9 * best.total.max(1.0));
                    assert!(verify_constraints(&sc, &best.vars).unwrap().is_ok());
                }
            }
        }
    }

    #[test]
    fn parallel_and_sequential_agree() {
        for seed in 0..10 {
            let sc = random_small_scenario(seed);
            let a = brute_force_optimum(&sc, Scheme::S1, OffloadCi::Destination, DEFAULT_LIMIT, Execution::Sequential);
            let b = brute_force_optimum(&sc, Scheme::S1, OffloadCi::Destination, DEFAULT_LIMIT, Execution::Parallel);
            assert_eq!(a.unwrap(), b.unwrap());
        }
    }
}
