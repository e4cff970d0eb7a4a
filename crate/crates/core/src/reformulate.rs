//! Time-expanded flow graph for the carbon-footprint program.
//!
//! Per slot `t` and site `s` the graph holds a renewable source θ, a battery
//! pair κ→ρ and a server pair λ→ε. A single grid node δ feeds every battery
//! and server, a surplus node μ absorbs unused grid and renewable energy, and
//! one demand node τ per task pulls a unit of energy out of exactly one
//! server-slot inside its window. Arc costs carry carbon intensity, so the
//! min-cost flow value is the minimal total carbon footprint.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::mcf::{self, ArcId, Capacity, FlowError, FlowNetwork, FlowSolution, NodeId};
use crate::model::{CfBreakdown, Placement, Scenario, SolutionVars};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scheme {
    pub offloading: bool,
    pub sharing: bool,
}

impl Scheme {
    /// Offloading and battery sharing.
    pub const S1: Scheme = Scheme {
        offloading: true,
        sharing: true,
    };
    /// Offloading only; each battery powers its own server.
    pub const S2: Scheme = Scheme {
        offloading: true,
        sharing: false,
    };
    /// Sharing only; tasks stay on their home server.
    pub const S3: Scheme = Scheme {
        offloading: false,
        sharing: true,
    };
    pub const S4: Scheme = Scheme {
        offloading: false,
        sharing: false,
    };
    pub const ALL: [Scheme; 4] = [Scheme::S1, Scheme::S2, Scheme::S3, Scheme::S4];

    pub fn name(self) -> &'static str {
        match (self.offloading, self.sharing) {
            (true, true) => "S1",
            (true, false) => "S2",
            (false, true) => "S3",
            (false, false) => "S4",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Scheme::S1),
            "S2" => Ok(Scheme::S2),
            "S3" => Ok(Scheme::S3),
            "S4" => Ok(Scheme::S4),
            _ => Err(Error::Config(format!("unknown scheme {s:?} (expected s1..s4)"))),
        }
    }
}

/// Which grid's carbon intensity prices the energy spent offloading a task.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum OffloadCi {
    /// The executing site's grid.
    #[default]
    Destination,
    /// The task's home grid.
    Origin,
}

impl OffloadCi {
    pub fn name(self) -> &'static str {
        match self {
            OffloadCi::Destination => "destination",
            OffloadCi::Origin => "origin",
        }
    }

    pub fn unit_cost(self, sc: &Scenario, home: usize, site: usize, slot: usize) -> f64 {
        let grid = match self {
            OffloadCi::Destination => site,
            OffloadCi::Origin => home,
        };
        sc.alpha[home][site] * sc.ci[grid][slot]
    }
}

impl FromStr for OffloadCi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "destination" => Ok(OffloadCi::Destination),
            "origin" => Ok(OffloadCi::Origin),
            _ => Err(Error::Config(format!(
                "unknown offload-ci {s:?} (expected destination|origin)"
            ))),
        }
    }
}

/// A battery-to-server sharing arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShareArc {
    pub battery: usize,
    pub server: usize,
    pub slot: usize,
    pub arc: ArcId,
}

/// Node and arc ids of a built graph, keyed by what they model.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphIndex {
    pub grid: NodeId,
    pub surplus: NodeId,
    /// θ `[s][t]`.
    pub renewable: Vec<Vec<NodeId>>,
    /// κ `[s][t]`.
    pub battery_in: Vec<Vec<NodeId>>,
    /// ρ `[s][t]`.
    pub battery_out: Vec<Vec<NodeId>>,
    /// λ `[s][t]`.
    pub server_in: Vec<Vec<NodeId>>,
    /// ε `[s][t]`.
    pub server_out: Vec<Vec<NodeId>>,
    pub task: Vec<NodeId>,

    pub z: Vec<Vec<ArcId>>,
    pub v: Vec<Vec<ArcId>>,
    pub renewable_surplus: Vec<Vec<ArcId>>,
    pub x: Vec<Vec<ArcId>>,
    pub u: Vec<Vec<ArcId>>,
    pub grid_surplus: ArcId,
    pub battery: Vec<Vec<ArcId>>,
    pub share: Vec<ShareArc>,
    /// ρ `[s][t]` → κ `[s][t+1]`, for `t < T-1`.
    pub carry: Vec<Vec<ArcId>>,
    pub server: Vec<Vec<ArcId>>,
    /// Per task, one arc per allowed placement.
    pub task_arcs: Vec<Vec<(Placement, ArcId)>>,
    /// Outlet ρ `[s][T]` → μ; present only when some battery starts charged.
    pub terminal: Vec<ArcId>,
}

fn grid_of(s_n: usize, t_n: usize) -> Vec<Vec<usize>> {
    vec![vec![0; t_n]; s_n]
}

/// Builds the flow network for `scheme`.
///
/// Supplies: δ gets N, θ `[s][t]` gets R, κ `[s][0]` gets the initial battery
/// level, every τ demands one unit and μ demands the rest. Without an
/// initial charge the batteries have no outlet after the last slot, so
/// extracted final battery levels are zero.
pub fn build_graph(
    sc: &Scenario,
    scheme: Scheme,
    offload_ci: OffloadCi,
) -> Result<(FlowNetwork, GraphIndex)> {
    sc.ensure_valid()?;
    let (s_n, t_n, n_tasks) = (sc.num_sites, sc.num_slots, sc.num_tasks());
    let mut net = FlowNetwork::new();

    let grid = net.add_node(n_tasks as i64);
    let surplus = net.add_node(-(sc.total_renewable() + sc.total_initial_battery()));
    let mut theta = grid_of(s_n, t_n);
    let mut kappa = grid_of(s_n, t_n);
    let mut rho = grid_of(s_n, t_n);
    let mut lambda = grid_of(s_n, t_n);
    let mut eps = grid_of(s_n, t_n);
    for t in 0..t_n {
        for s in 0..s_n {
            theta[s][t] = net.add_node(sc.renewable[s][t]);
            kappa[s][t] = net.add_node(if t == 0 { sc.initial_battery[s] } else { 0 });
            rho[s][t] = net.add_node(0);
            lambda[s][t] = net.add_node(0);
            eps[s][t] = net.add_node(0);
        }
    }
    let task: Vec<NodeId> = (0..n_tasks).map(|_| net.add_node(-1)).collect();

    let inf = Capacity::Unbounded;
    let per_slot = |net: &mut FlowNetwork, f: &dyn Fn(usize, usize) -> (NodeId, NodeId, Capacity, f64)| {
        let mut ids = grid_of(s_n, t_n);
        for t in 0..t_n {
            for s in 0..s_n {
                let (a, b, cap, cost) = f(s, t);
                ids[s][t] = net.add_arc(a, b, cap, cost);
            }
        }
        ids
    };
    let z = per_slot(&mut net, &|s, t| (theta[s][t], lambda[s][t], inf, 0.0));
    let v = per_slot(&mut net, &|s, t| (theta[s][t], kappa[s][t], inf, 0.0));
    let renewable_surplus = per_slot(&mut net, &|s, t| (theta[s][t], surplus, inf, 0.0));
    let x = per_slot(&mut net, &|s, t| (grid, lambda[s][t], inf, sc.ci[s][t]));
    let u = per_slot(&mut net, &|s, t| (grid, kappa[s][t], inf, sc.ci[s][t]));
    let grid_surplus = net.add_arc(grid, surplus, inf, 0.0);
    let battery = per_slot(&mut net, &|s, t| {
        (kappa[s][t], rho[s][t], Capacity::Finite(sc.battery_cap), 0.0)
    });

    let mut share = Vec::new();
    for t in 0..t_n {
        for s in 0..s_n {
            for b in 0..s_n {
                if b != s && !scheme.sharing {
                    continue;
                }
                let arc = net.add_arc(rho[b][t], lambda[s][t], inf, sc.beta[b][s] * sc.ci[s][t]);
                share.push(ShareArc {
                    battery: b,
                    server: s,
                    slot: t,
                    arc,
                });
            }
        }
    }

    let mut carry = vec![Vec::new(); s_n];
    for t in 0..t_n.saturating_sub(1) {
        for (s, row) in carry.iter_mut().enumerate() {
            row.push(net.add_arc(rho[s][t], kappa[s][t + 1], inf, 0.0));
        }
    }

    let server = per_slot(&mut net, &|s, t| {
        (lambda[s][t], eps[s][t], Capacity::Finite(sc.server_cap), 0.0)
    });

    let mut task_arcs = Vec::with_capacity(n_tasks);
    for (n, tk) in sc.tasks.iter().enumerate() {
        let mut arcs = Vec::new();
        for s in tk.allowed_sites(scheme.offloading) {
            for t in tk.window() {
                let cost = offload_ci.unit_cost(sc, tk.home_site, s, t);
                let arc = net.add_arc(eps[s][t], task[n], 1, cost);
                arcs.push((Placement { site: s, slot: t }, arc));
            }
        }
        task_arcs.push(arcs);
    }

    let terminal = if sc.total_initial_battery() > 0 && t_n > 0 {
        (0..s_n)
            .map(|s| net.add_arc(rho[s][t_n - 1], surplus, inf, 0.0))
            .collect()
    } else {
        Vec::new()
    };

    debug_assert_eq!(net.imbalance(), 0);
    let index = GraphIndex {
        grid,
        surplus,
        renewable: theta,
        battery_in: kappa,
        battery_out: rho,
        server_in: lambda,
        server_out: eps,
        task,
        z,
        v,
        renewable_surplus,
        x,
        u,
        grid_surplus,
        battery,
        share,
        carry,
        server,
        task_arcs,
        terminal,
    };
    Ok((net, index))
}

/// Maps an integral optimal flow back to the program's variables.
pub fn extract_solution(sc: &Scenario, index: &GraphIndex, flow: &FlowSolution) -> Result<SolutionVars> {
    let f = |a: ArcId| flow.flow[a] as f64;
    let (s_n, t_n) = (sc.num_sites, sc.num_slots);

    let mut assignment = Vec::with_capacity(index.task_arcs.len());
    for (n, arcs) in index.task_arcs.iter().enumerate() {
        let mut chosen = None;
        for &(p, a) in arcs {
            match flow.flow[a] {
                0 => {}
                1 if chosen.is_none() => chosen = Some(p),
                other => {
                    return Err(Error::Internal(format!(
                        "task {n}: flow {other} on placement ({}, {}) breaks integrality",
                        p.site + 1,
                        p.slot + 1
                    )))
                }
            }
        }
        assignment.push(
            chosen.ok_or_else(|| Error::Internal(format!("task {n} receives no flow")))?,
        );
    }

    let mut vars = SolutionVars::zeros(s_n, t_n, assignment);
    for s in 0..s_n {
        for t in 0..t_n {
            vars.x[s][t] = f(index.x[s][t]);
            vars.z[s][t] = f(index.z[s][t]);
            vars.u[s][t] = f(index.u[s][t]);
            vars.v[s][t] = f(index.v[s][t]);
            vars.w[s][t] = if t + 1 < t_n {
                f(index.carry[s][t])
            } else {
                index.terminal.get(s).map_or(0.0, |&a| f(a))
            };
        }
    }
    for sh in &index.share {
        vars.y[sh.server][sh.battery][sh.slot] = f(sh.arc);
    }
    Ok(vars)
}

/// Carbon footprint of a set of decisions, split by source.
pub fn cf_breakdown(sc: &Scenario, vars: &SolutionVars, offload_ci: OffloadCi) -> CfBreakdown {
    let (s_n, t_n) = (sc.num_sites, sc.num_slots);
    let mut grid = 0.0;
    let mut battery = 0.0;
    let mut loss = 0.0;
    for s in 0..s_n {
        for t in 0..t_n {
            grid += sc.ci[s][t] * vars.x[s][t];
            battery += sc.ci[s][t] * vars.u[s][t];
            for b in 0..s_n {
                loss += sc.beta[b][s] * sc.ci[s][t] * vars.y[s][b][t];
            }
        }
    }
    let offload = sc
        .tasks
        .iter()
        .zip(&vars.assignment)
        .map(|(tk, p)| offload_ci.unit_cost(sc, tk.home_site, p.site, p.slot))
        .sum();
    CfBreakdown::new(grid, battery, offload, loss)
}

/// Why a scenario admits no schedule: more task-units than reachable
/// server-slot capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Infeasibility {
    pub demanded: usize,
    pub reachable: usize,
    /// Tasks left unserved by a maximum assignment.
    pub unserved: Vec<usize>,
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let plural = |k: usize| if k == 1 { "" } else { "s" };
        write!(
            f,
            "{} task-unit{} demanded, {} unit{} of (site,slot) capacity reachable",
            self.demanded,
            plural(self.demanded),
            self.reachable,
            plural(self.reachable)
        )?;
        if !self.unserved.is_empty() {
            let ids: Vec<String> = self.unserved.iter().map(|n| (n + 1).to_string()).collect();
            write!(f, "; unserved tasks: {}", ids.join(", "))?;
        }
        Ok(())
    }
}

/// Maximum number of tasks that fit into server-slot capacity, found as a
/// min-cost flow where leaving a task unserved costs one.
pub fn diagnose_infeasibility(sc: &Scenario, scheme: Scheme) -> Result<Infeasibility> {
    let (s_n, t_n, n_tasks) = (sc.num_sites, sc.num_slots, sc.num_tasks());
    let mut net = FlowNetwork::new();
    let src = net.add_node(n_tasks as i64);
    let snk = net.add_node(-(n_tasks as i64));
    let slots: Vec<NodeId> = (0..s_n * t_n).map(|_| net.add_node(0)).collect();
    let tasks: Vec<NodeId> = (0..n_tasks).map(|_| net.add_node(0)).collect();
    for &slot in &slots {
        net.add_arc(src, slot, sc.server_cap, 0.0);
    }
    for (n, tk) in sc.tasks.iter().enumerate() {
        for s in tk.allowed_sites(scheme.offloading) {
            for t in tk.window() {
                net.add_arc(slots[s * t_n + t], tasks[n], 1, 0.0);
            }
        }
    }
    let served_arcs: Vec<ArcId> = tasks.iter().map(|&v| net.add_arc(v, snk, 1, 0.0)).collect();
    net.add_arc(src, snk, Capacity::Unbounded, 1.0);
    let sol = mcf::solve_min_cost_flow(&net)?;
    let unserved: Vec<usize> = served_arcs
        .iter()
        .enumerate()
        .filter(|(_, &a)| sol.flow[a] == 0)
        .map(|(n, _)| n)
        .collect();
    Ok(Infeasibility {
        demanded: n_tasks,
        reachable: n_tasks - unserved.len(),
        unserved,
    })
}

/// Everything produced by one optimal solve.
#[derive(Debug, Clone)]
pub struct SchemeSolution {
    pub scheme: Scheme,
    pub offload_ci: OffloadCi,
    pub vars: SolutionVars,
    pub breakdown: CfBreakdown,
    /// Min-cost flow value; equals `breakdown.total` up to rounding.
    pub objective: f64,
    pub runtime: Duration,
    pub network: FlowNetwork,
    pub index: GraphIndex,
    pub flow: FlowSolution,
}

/// Globally optimal schedule for `scheme`: build, solve, extract, price.
pub fn solve_scheme(sc: &Scenario, scheme: Scheme, offload_ci: OffloadCi) -> Result<SchemeSolution> {
    let start = Instant::now();
    let (network, index) = build_graph(sc, scheme, offload_ci)?;
    let flow = match mcf::solve_min_cost_flow(&network) {
        Ok(flow) => flow,
        Err(FlowError::Infeasible { .. }) => {
            return Err(Error::Infeasible(diagnose_infeasibility(sc, scheme)?));
        }
        Err(e) => return Err(e.into()),
    };
    let vars = extract_solution(sc, &index, &flow)?;
    let breakdown = cf_breakdown(sc, &vars, offload_ci);
    let runtime = start.elapsed();
    Ok(SchemeSolution {
        scheme,
        offload_ci,
        vars,
        breakdown,
        objective: flow.objective,
        runtime,
        network,
        index,
        flow,
    })
}
