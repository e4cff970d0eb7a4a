//! JSON scenario and solution files. Site, slot and task positions are
//! 1-based in files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcf::{self, FlowSolution};
use crate::model::{off_diagonal, verify_constraints, ConstraintReport, Placement, Scenario, SolutionVars, Task};
use crate::reformulate::{build_graph, cf_breakdown, OffloadCi, Scheme, SchemeSolution};

/// A square matrix, or a scalar applied to every off-diagonal entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrMatrix {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

impl ScalarOrMatrix {
    fn expand(&self, n: usize) -> Vec<Vec<f64>> {
        match self {
            ScalarOrMatrix::Scalar(v) => off_diagonal(n, *v),
            ScalarOrMatrix::Matrix(m) => m.clone(),
        }
    }

    /// Collapses to a scalar when every off-diagonal entry is equal.
    fn compact(m: &[Vec<f64>]) -> Self {
        let mut off = m
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, &v)| v));
        let first = off.next();
        let diag_zero = m.iter().enumerate().all(|(i, r)| r.get(i) == Some(&0.0));
        match first {
            Some(v) if diag_zero && off.all(|w| w == v) => ScalarOrMatrix::Scalar(v),
            None if diag_zero => ScalarOrMatrix::Scalar(0.0),
            _ => ScalarOrMatrix::Matrix(m.to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub id: usize,
    pub origin_slot: usize,
    pub deadline_slot: usize,
    pub home_site: usize,
    pub candidates: Vec<usize>,
}

/// How a scenario was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMeta {
    pub seed: u64,
    pub regions: Vec<String>,
    /// First and last renewable slot, inclusive.
    pub daytime_slots: (usize, usize),
    pub slot_alignment: String,
    pub trials: u32,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub num_sites: usize,
    pub num_slots: usize,
    pub ci: Vec<Vec<f64>>,
    pub renewable: Vec<Vec<f64>>,
    pub alpha: ScalarOrMatrix,
    pub beta: ScalarOrMatrix,
    pub battery_cap: f64,
    pub server_cap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_battery: Option<Vec<f64>>,
    pub tasks: Vec<TaskRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorMeta>,
}

fn integral(field: &str, v: f64) -> Result<i64> {
    if v.is_finite() && v.fract() == 0.0 {
        Ok(v as i64)
    } else {
        Err(Error::InvalidScenario(format!("{field} = {v} is not an integer number of energy units")))
    }
}

fn one_based(field: &str, v: usize) -> Result<usize> {
    v.checked_sub(1)
        .ok_or_else(|| Error::InvalidScenario(format!("{field} is 0; indices are 1-based")))
}

impl ScenarioFile {
    pub fn from_scenario(sc: &Scenario, generator: Option<GeneratorMeta>) -> Self {
        let all_zero = sc.initial_battery.iter().all(|&w| w == 0);
        ScenarioFile {
            num_sites: sc.num_sites,
            num_slots: sc.num_slots,
            ci: sc.ci.clone(),
            renewable: sc
                .renewable
                .iter()
                .map(|r| r.iter().map(|&v| v as f64).collect())
                .collect(),
            alpha: ScalarOrMatrix::compact(&sc.alpha),
            beta: ScalarOrMatrix::compact(&sc.beta),
            battery_cap: sc.battery_cap as f64,
            server_cap: sc.server_cap as f64,
            initial_battery: (!all_zero)
                .then(|| sc.initial_battery.iter().map(|&v| v as f64).collect()),
            tasks: sc
                .tasks
                .iter()
                .map(|t| TaskRecord {
                    id: t.id,
                    origin_slot: t.origin_slot + 1,
                    deadline_slot: t.deadline_slot + 1,
                    home_site: t.home_site + 1,
                    candidates: t.candidates.iter().map(|c| c + 1).collect(),
                })
                .collect(),
            generator,
        }
    }

    /// Converts to the in-memory model; the result still needs validation.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let renewable = self
            .renewable
            .iter()
            .enumerate()
            .map(|(s, row)| {
                row.iter()
                    .enumerate()
                    .map(|(t, &v)| integral(&format!("renewable[{}][{}]", s + 1, t + 1), v))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let initial_battery = match &self.initial_battery {
            Some(v) => v
                .iter()
                .enumerate()
                .map(|(s, &w)| integral(&format!("initial_battery[{}]", s + 1), w))
                .collect::<Result<Vec<_>>>()?,
            None => vec![0; self.num_sites],
        };
        let tasks = self
            .tasks
            .iter()
            .map(|t| {
                Ok(Task {
                    id: t.id,
                    origin_slot: one_based("origin_slot", t.origin_slot)?,
                    deadline_slot: one_based("deadline_slot", t.deadline_slot)?,
                    home_site: one_based("home_site", t.home_site)?,
                    candidates: t
                        .candidates
                        .iter()
                        .map(|&c| one_based("candidate", c))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Scenario {
            num_sites: self.num_sites,
            num_slots: self.num_slots,
            tasks,
            ci: self.ci.clone(),
            renewable,
            alpha: self.alpha.expand(self.num_sites),
            beta: self.beta.expand(self.num_sites),
            battery_cap: integral("battery_cap", self.battery_cap)?,
            server_cap: integral("server_cap", self.server_cap)?,
            initial_battery,
        })
    }
}

pub fn read_scenario(path: impl AsRef<Path>) -> Result<(Scenario, ScenarioFile)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
    let sc = file.to_scenario()?;
    sc.ensure_valid()?;
    Ok((sc, file))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRecord {
    pub grid: f64,
    pub battery: f64,
    pub offload: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub task: usize,
    pub site: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub scheme: String,
    pub offload_ci: String,
    pub feasible: bool,
    #[serde(default)]
    pub objective: Option<f64>,
    #[serde(default)]
    pub breakdown: Option<BreakdownRecord>,
    #[serde(default)]
    pub assignments: Vec<AssignmentRecord>,
    #[serde(default)]
    pub x: Vec<Vec<f64>>,
    /// `y[s][s'][t]`: battery `s'` to server `s`.
    #[serde(default)]
    pub y: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub z: Vec<Vec<f64>>,
    #[serde(default)]
    pub u: Vec<Vec<f64>>,
    #[serde(default)]
    pub v: Vec<Vec<f64>>,
    #[serde(default)]
    pub w: Vec<Vec<f64>>,
    pub runtime_ms: f64,
    /// Arc flows of the solved network, in arc order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infeasibility: Option<String>,
}

impl SolutionFile {
    pub fn from_solution(sc: &Scenario, sol: &SchemeSolution) -> Self {
        let b = sol.breakdown;
        SolutionFile {
            scheme: sol.scheme.name().into(),
            offload_ci: sol.offload_ci.name().into(),
            feasible: true,
            objective: Some(b.total),
            breakdown: Some(BreakdownRecord {
                grid: b.grid,
                battery: b.battery,
                offload: b.offload,
                loss: b.loss,
            }),
            assignments: sc
                .tasks
                .iter()
                .zip(&sol.vars.assignment)
                .map(|(t, p)| AssignmentRecord {
                    task: t.id,
                    site: p.site + 1,
                    slot: p.slot + 1,
                })
                .collect(),
            x: sol.vars.x.clone(),
            y: sol.vars.y.clone(),
            z: sol.vars.z.clone(),
            u: sol.vars.u.clone(),
            v: sol.vars.v.clone(),
            w: sol.vars.w.clone(),
            runtime_ms: sol.runtime.as_secs_f64() * 1e3,
            flow: Some(sol.flow.flow.clone()),
            infeasibility: None,
        }
    }

    pub fn infeasible(scheme: Scheme, offload_ci: OffloadCi, reason: String, runtime_ms: f64) -> Self {
        SolutionFile {
            scheme: scheme.name().into(),
            offload_ci: offload_ci.name().into(),
            feasible: false,
            objective: None,
            breakdown: None,
            assignments: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            z: Vec::new(),
            u: Vec::new(),
            v: Vec::new(),
            w: Vec::new(),
            runtime_ms,
            flow: None,
            infeasibility: Some(reason),
        }
    }

    pub fn to_vars(&self) -> Result<SolutionVars> {
        let assignment = self
            .assignments
            .iter()
            .map(|a| {
                Ok(Placement {
                    site: one_based("assignment site", a.site).map_err(|e| Error::Shape(e.to_string()))?,
                    slot: one_based("assignment slot", a.slot).map_err(|e| Error::Shape(e.to_string()))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SolutionVars {
            assignment,
            x: self.x.clone(),
            y: self.y.clone(),
            z: self.z.clone(),
            u: self.u.clone(),
            v: self.v.clone(),
            w: self.w.clone(),
        })
    }
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<SolutionFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| json_error(path, e))
}

fn json_error(path: &Path, e: serde_json::Error) -> Error {
    Error::Parse {
        context: path.display().to_string(),
        line: e.line() as u64,
        message: e.to_string(),
    }
}

/// Outcome of checking a solution file against its scenario.
#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub constraints: ConstraintReport,
    pub problems: Vec<String>,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        self.constraints.is_ok() && self.problems.is_empty()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Checks constraints, re-prices the stated objective and breakdown, and
/// when arc flows are present, the flow's optimality certificate.
pub fn verify_solution(sc: &Scenario, file: &SolutionFile) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    if !file.feasible {
        report.problems.push("solution is marked infeasible".into());
        return Ok(report);
    }
    let scheme: Scheme = file.scheme.parse()?;
    let offload_ci: OffloadCi = file.offload_ci.parse()?;
    let vars = file.to_vars()?;

    for (task, rec) in sc.tasks.iter().zip(&file.assignments) {
        if task.id != rec.task {
            report
                .problems
                .push(format!("assignment for task {} listed where task {} belongs", rec.task, task.id));
        }
    }
    for (task, p) in sc.tasks.iter().zip(&vars.assignment) {
        if !task.allowed_sites(scheme.offloading).contains(&p.site) && task.candidates.contains(&p.site) {
            report.problems.push(format!(
                "task {} offloaded to site {} although {} disables offloading",
                task.id,
                p.site + 1,
                scheme
            ));
        }
    }
    if !scheme.sharing {
        for (s, from) in vars.y.iter().enumerate() {
            for (b, row) in from.iter().enumerate() {
                if b != s && row.iter().any(|&e| e != 0.0) {
                    report
                        .problems
                        .push(format!("battery {} powers server {} although {} disables sharing", b + 1, s + 1, scheme));
                }
            }
        }
    }

    report.constraints = verify_constraints(sc, &vars)?;
    if vars
        .assignment
        .iter()
        .any(|p| p.site >= sc.num_sites || p.slot >= sc.num_slots)
    {
        return Ok(report);
    }
    let priced = cf_breakdown(sc, &vars, offload_ci);
    match file.objective {
        Some(obj) if close(obj, priced.total) => {}
        Some(obj) => report
            .problems
            .push(format!("objective {obj} does not re-price: recomputed total is {}", priced.total)),
        None => report.problems.push("objective missing".into()),
    }
    if let Some(b) = file.breakdown {
        let pairs = [
            ("grid", b.grid, priced.grid),
            ("battery", b.battery, priced.battery),
            ("offload", b.offload, priced.offload),
            ("loss", b.loss, priced.loss),
        ];
        for (name, stated, actual) in pairs {
            if !close(stated, actual) {
                report
                    .problems
                    .push(format!("breakdown {name} {stated} does not re-price: recomputed {actual}"));
            }
        }
    }

    if let Some(flow) = &file.flow {
        let (net, _) = build_graph(sc, scheme, offload_ci)?;
        let sol = FlowSolution {
            flow: flow.clone(),
            objective: net.cost_of(flow),
            potentials: Vec::new(),
        };
        match mcf::diagnose_certificate(&net, &sol) {
            Ok(()) => {
                if !close(sol.objective, priced.total) {
                    report.problems.push(format!(
                        "flow objective {} differs from the variables' CF {}",
                        sol.objective, priced.total
                    ));
                }
            }
            Err(e) => report.problems.push(format!("flow certificate: {e}")),
        }
    }
    Ok(report)
}
