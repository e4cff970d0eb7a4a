//! Carbon-footprint minimization for edge computing networks.
//!
//! Tasks may be scheduled inside their time windows and offloaded between
//! sites; batteries are charged from the grid or local renewables and can
//! power servers at other sites through a battery management system. The
//! joint problem is an integer program, but it maps exactly onto a
//! single-commodity minimum-cost flow over a time-expanded graph, so the
//! global optimum is found in polynomial time.
//!
//! Layout:
//! - [`model`]: problem instance, decision variables and the constraint verifier.
//! - [`mcf`]: successive-shortest-path min-cost-flow solver with an optimality certificate.
//! - [`reformulate`]: graph construction, solution extraction and carbon accounting.
//! - [`oracle`]: brute-force enumeration of task placements for small instances.
//! - [`datagen`]: carbon-intensity tables and seeded scenario generation.
//! - [`sweep`]: capacity sweeps over schemes and seeds.
//! - [`format`]: JSON scenario/solution files.

pub mod datagen;
pub mod error;
pub mod exec;
pub mod format;
pub mod mcf;
pub mod model;
pub mod oracle;
pub mod reformulate;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{CfBreakdown, Placement, Scenario, SolutionVars, Task};
pub use reformulate::{solve_scheme, OffloadCi, Scheme, SchemeSolution};
