//! Single-commodity minimum-cost flow.
//!
//! Supplies and capacities are integers and costs are reals. The solver is
//! successive shortest paths with node potentials, so it returns an integral
//! optimal flow together with the potentials that certify optimality.

mod certificate;
pub mod dimacs;
mod ssp;

use std::fmt;

pub use certificate::{check_certificate, diagnose_certificate, potentials_certify, CertificateFailure};
pub use ssp::solve_min_cost_flow;

/// Tolerance on cost comparisons.
pub const COST_TOL: f64 = 1e-9;

pub type NodeId = usize;
pub type ArcId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capacity {
    Finite(i64),
    /// No upper bound. Treated as the largest amount any flow could place on
    /// the arc, see [`FlowNetwork::effective_capacity`].
    Unbounded,
}

impl From<i64> for Capacity {
    fn from(c: i64) -> Self {
        Capacity::Finite(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
    pub capacity: Capacity,
    pub cost: f64,
}

/// Directed network with signed node supplies (positive = supply, negative = demand).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowNetwork {
    supplies: Vec<i64>,
    arcs: Vec<Arc>,
}

impl FlowNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_nodes(supplies: Vec<i64>) -> Self {
        FlowNetwork {
            supplies,
            arcs: Vec::new(),
        }
    }

    pub fn add_node(&mut self, supply: i64) -> NodeId {
        self.supplies.push(supply);
        self.supplies.len() - 1
    }

    pub fn set_supply(&mut self, node: NodeId, supply: i64) {
        self.supplies[node] = supply;
    }

    /// Appends an arc; ids are assigned in insertion order.
    ///
    /// Panics on self-loops or endpoints outside the node range.
    pub fn add_arc(
        &mut self,
        tail: NodeId,
        head: NodeId,
        capacity: impl Into<Capacity>,
        cost: f64,
    ) -> ArcId {
        assert!(tail != head, "self-loop at node {tail}");
        assert!(
            tail < self.supplies.len() && head < self.supplies.len(),
            "arc ({tail}, {head}) outside {} nodes",
            self.supplies.len()
        );
        self.arcs.push(Arc {
            tail,
            head,
            capacity: capacity.into(),
            cost,
        });
        self.arcs.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.supplies.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn supplies(&self) -> &[i64] {
        &self.supplies
    }

    pub fn supply(&self, node: NodeId) -> i64 {
        self.supplies[node]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id]
    }

    /// Sum of positive supplies.
    pub fn total_supply(&self) -> i64 {
        self.supplies.iter().filter(|&&b| b > 0).sum()
    }

    pub fn imbalance(&self) -> i64 {
        self.supplies.iter().sum()
    }

    /// Capacity used for unbounded arcs. With non-negative costs some optimum
    /// never carries more than the total supply on one arc; negative costs
    /// allow cycles, each bounded by some finite arc on it.
    pub fn unbounded_cap(&self) -> i64 {
        let mut cap = self.total_supply();
        if self.arcs.iter().any(|a| a.cost < 0.0) {
            cap += self
                .arcs
                .iter()
                .filter_map(|a| match a.capacity {
                    Capacity::Finite(c) => Some(c.max(0)),
                    Capacity::Unbounded => None,
                })
                .sum::<i64>();
        }
        cap
    }

    pub fn effective_capacity(&self, id: ArcId) -> i64 {
        match self.arcs[id].capacity {
            Capacity::Finite(c) => c,
            Capacity::Unbounded => self.unbounded_cap(),
        }
    }

    /// Objective of a given arc flow.
    pub fn cost_of(&self, flow: &[i64]) -> f64 {
        self.arcs
            .iter()
            .zip(flow)
            .map(|(a, &f)| a.cost * f as f64)
            .sum()
    }

    pub(crate) fn check_well_formed(&self) -> Result<(), FlowError> {
        if self.imbalance() != 0 {
            return Err(FlowError::Unbalanced {
                imbalance: self.imbalance(),
            });
        }
        for (id, a) in self.arcs.iter().enumerate() {
            if !a.cost.is_finite() {
                return Err(FlowError::InvalidNetwork(format!("arc {id} has non-finite cost")));
            }
            if let Capacity::Finite(c) = a.capacity {
                if c < 0 {
                    return Err(FlowError::InvalidNetwork(format!("arc {id} has negative capacity")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    /// Flow per arc, in arc insertion order.
    pub flow: Vec<i64>,
    pub objective: f64,
    /// Node potentials; `cost + pot[tail] - pot[head] >= 0` on every residual arc.
    pub potentials: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("supplies sum to {imbalance}, not zero")]
    Unbalanced { imbalance: i64 },
    #[error("no feasible flow: routed {routed} of {required} supply units")]
    Infeasible { routed: i64, required: i64 },
    #[error("objective unbounded below (negative-cost cycle of unbounded arcs)")]
    Unbounded,
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
}

impl fmt::Display for FlowNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "network with {} nodes, {} arcs", self.num_nodes(), self.num_arcs())
    }
}
