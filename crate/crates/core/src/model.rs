//! Problem instance, decision variables and the constraint verifier.
//!
//! All indices are 0-based in memory. Energy is measured in units of the
//! energy one task needs, so renewable availability, capacities and initial
//! battery levels are integers.

use std::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance on equality constraints.
pub const EQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: usize,
    /// Slot in which the task is generated.
    pub origin_slot: usize,
    /// Last slot in which the task may be completed.
    pub deadline_slot: usize,
    pub home_site: usize,
    /// Sites allowed to execute the task.
    pub candidates: Vec<usize>,
}

impl Task {
    pub fn window(&self) -> std::ops::RangeInclusive<usize> {
        self.origin_slot..=self.deadline_slot
    }

    /// Sites this task may run on. Without offloading only the home site
    /// remains, and only if it is itself a candidate.
    pub fn allowed_sites(&self, offloading: bool) -> Vec<usize> {
        let mut sites: Vec<usize> = if offloading {
            self.candidates.clone()
        } else {
            self.candidates
                .iter()
                .copied()
                .filter(|&s| s == self.home_site)
                .collect()
        };
        sites.sort_unstable();
        sites.dedup();
        sites
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub num_sites: usize,
    pub num_slots: usize,
    pub tasks: Vec<Task>,
    /// Grid carbon intensity `[site][slot]`, gCO2eq/kWh.
    pub ci: Vec<Vec<f64>>,
    /// Renewable energy available `[site][slot]`.
    pub renewable: Vec<Vec<i64>>,
    /// Energy to move one task from site `[from]` to site `[to]`.
    pub alpha: Vec<Vec<f64>>,
    /// Loss per unit shared from battery `[from]` to server `[to]`.
    pub beta: Vec<Vec<f64>>,
    pub battery_cap: i64,
    pub server_cap: i64,
    pub initial_battery: Vec<i64>,
}

impl Scenario {
    /// An instance with no tasks, zero data and zero capacities.
    pub fn empty(num_sites: usize, num_slots: usize) -> Self {
        Scenario {
            num_sites,
            num_slots,
            tasks: Vec::new(),
            ci: vec![vec![0.0; num_slots]; num_sites],
            renewable: vec![vec![0; num_slots]; num_sites],
            alpha: vec![vec![0.0; num_sites]; num_sites],
            beta: vec![vec![0.0; num_sites]; num_sites],
            battery_cap: 0,
            server_cap: 0,
            initial_battery: vec![0; num_sites],
        }
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn total_renewable(&self) -> i64 {
        self.renewable.iter().flatten().sum()
    }

    pub fn total_initial_battery(&self) -> i64 {
        self.initial_battery.iter().sum()
    }

    /// Sets every off-diagonal entry of `alpha` to `value`.
    pub fn broadcast_alpha(&mut self, value: f64) {
        self.alpha = off_diagonal(self.num_sites, value);
    }

    pub fn broadcast_beta(&mut self, value: f64) {
        self.beta = off_diagonal(self.num_sites, value);
    }

    pub fn with_capacities(&self, battery_cap: i64, server_cap: i64) -> Self {
        let mut out = self.clone();
        out.battery_cap = battery_cap;
        out.server_cap = server_cap;
        out
    }

    pub fn validate(&self) -> ValidationReport {
        validate_scenario(self)
    }

    /// Returns `Err` carrying every violation when the scenario is invalid.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidScenario(report.to_string()))
        }
    }
}

pub(crate) fn off_diagonal(n: usize, value: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { value }).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioIssue {
    Shape {
        field: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    NegativeOrNonFinite {
        field: &'static str,
        row: usize,
        col: usize,
    },
    NonzeroDiagonal {
        field: &'static str,
        site: usize,
    },
    NegativeCapacity {
        field: &'static str,
    },
    InitialBatteryOutOfRange {
        site: usize,
    },
    SlotOutOfRange {
        task: usize,
    },
    DeadlineBeforeOrigin {
        task: usize,
    },
    HomeSiteOutOfRange {
        task: usize,
    },
    EmptyCandidates {
        task: usize,
    },
    CandidateOutOfRange {
        task: usize,
        site: usize,
    },
}

impl fmt::Display for ScenarioIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScenarioIssue::*;
        match self {
            Shape {
                field,
                expected,
                found,
            } => write!(
                f,
                "{field}: expected shape {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            NegativeOrNonFinite { field, row, col } => {
                write!(f, "{field}[{}][{}] is negative or not finite", row + 1, col + 1)
            }
            NonzeroDiagonal { field, site } => {
                let what = if *field == "beta" {
                    "nonzero self-loss"
                } else {
                    "nonzero self-transfer"
                };
                write!(f, "{what}: {field}[{0}][{0}] must be zero", site + 1)
            }
            NegativeCapacity { field } => write!(f, "{field} is negative"),
            InitialBatteryOutOfRange { site } => write!(
                f,
                "initial_battery[{}] is outside [0, battery_cap]",
                site + 1
            ),
            SlotOutOfRange { task } => write!(f, "task {task}: slot outside the horizon"),
            DeadlineBeforeOrigin { task } => write!(f, "task {task}: deadline before origin"),
            HomeSiteOutOfRange { task } => write!(f, "task {task}: home site out of range"),
            EmptyCandidates { task } => write!(f, "task {task}: empty candidate set"),
            CandidateOutOfRange { task, site } => {
                write!(f, "task {task}: candidate site {} out of range", site + 1)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ScenarioIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.issues.iter().map(|i| i.to_string()).collect();
        f.write_str(&msgs.join("; "))
    }
}

fn matrix_shape<T>(m: &[Vec<T>]) -> Option<(usize, usize)> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    m.iter().all(|r| r.len() == cols).then_some((rows, cols))
}

pub fn validate_scenario(sc: &Scenario) -> ValidationReport {
    let mut issues = Vec::new();
    let (s_n, t_n) = (sc.num_sites, sc.num_slots);

    let mut check_real = |field: &'static str, m: &[Vec<f64>], expected: (usize, usize)| {
        match matrix_shape(m) {
            Some(shape) if shape == expected || (expected.0 == 0 && m.is_empty()) => {}
            found => issues.push(ScenarioIssue::Shape {
                field,
                expected,
                found: found.unwrap_or((m.len(), usize::MAX)),
            }),
        }
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    issues.push(ScenarioIssue::NegativeOrNonFinite { field, row: i, col: j });
                }
            }
        }
    };
    check_real("ci", &sc.ci, (s_n, t_n));
    check_real("alpha", &sc.alpha, (s_n, s_n));
    check_real("beta", &sc.beta, (s_n, s_n));

    match matrix_shape(&sc.renewable) {
        Some(shape) if shape == (s_n, t_n) || (s_n == 0 && sc.renewable.is_empty()) => {}
        found => issues.push(ScenarioIssue::Shape {
            field: "renewable",
            expected: (s_n, t_n),
            found: found.unwrap_or((sc.renewable.len(), usize::MAX)),
        }),
    }
    for (i, row) in sc.renewable.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v < 0 {
                issues.push(ScenarioIssue::NegativeOrNonFinite {
                    field: "renewable",
                    row: i,
                    col: j,
                });
            }
        }
    }

    for (field, m) in [("alpha", &sc.alpha), ("beta", &sc.beta)] {
        for (s, row) in m.iter().enumerate() {
            if row.get(s).is_some_and(|&d| d != 0.0) {
                issues.push(ScenarioIssue::NonzeroDiagonal { field, site: s });
            }
        }
    }

    if sc.battery_cap < 0 {
        issues.push(ScenarioIssue::NegativeCapacity {
            field: "battery_cap",
        });
    }
    if sc.server_cap < 0 {
        issues.push(ScenarioIssue::NegativeCapacity { field: "server_cap" });
    }
    if sc.initial_battery.len() != s_n {
        issues.push(ScenarioIssue::Shape {
            field: "initial_battery",
            expected: (s_n, 1),
            found: (sc.initial_battery.len(), 1),
        });
    }
    for (s, &w0) in sc.initial_battery.iter().enumerate() {
        if w0 < 0 || w0 > sc.battery_cap {
            issues.push(ScenarioIssue::InitialBatteryOutOfRange { site: s });
        }
    }

    for (n, task) in sc.tasks.iter().enumerate() {
        if task.origin_slot >= t_n || task.deadline_slot >= t_n {
            issues.push(ScenarioIssue::SlotOutOfRange { task: n });
        }
        if task.deadline_slot < task.origin_slot {
            issues.push(ScenarioIssue::DeadlineBeforeOrigin { task: n });
        }
        if task.home_site >= s_n {
            issues.push(ScenarioIssue::HomeSiteOutOfRange { task: n });
        }
        if task.candidates.is_empty() {
            issues.push(ScenarioIssue::EmptyCandidates { task: n });
        }
        for &c in &task.candidates {
            if c >= s_n {
                issues.push(ScenarioIssue::CandidateOutOfRange { task: n, site: c });
            }
        }
    }

    ValidationReport { issues }
}

/// Where and when a task is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Placement {
    pub site: usize,
    pub slot: usize,
}

/// The decision variables of the integer program.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionVars {
    pub assignment: Vec<Placement>,
    /// Grid to server `[s][t]`.
    pub x: Vec<Vec<f64>>,
    /// Battery `s'` to server `s`, indexed `[s][s'][t]`.
    pub y: Vec<Vec<Vec<f64>>>,
    /// Renewable to server `[s][t]`.
    pub z: Vec<Vec<f64>>,
    /// Grid to battery `[s][t]`.
    pub u: Vec<Vec<f64>>,
    /// Renewable to battery `[s][t]`.
    pub v: Vec<Vec<f64>>,
    /// Battery level at the end of slot `[s][t]`.
    pub w: Vec<Vec<f64>>,
}

impl SolutionVars {
    pub fn zeros(num_sites: usize, num_slots: usize, assignment: Vec<Placement>) -> Self {
        let grid = vec![vec![0.0; num_slots]; num_sites];
        SolutionVars {
            assignment,
            x: grid.clone(),
            y: vec![grid.clone(); num_sites],
            z: grid.clone(),
            u: grid.clone(),
            v: grid.clone(),
            w: grid,
        }
    }

    /// Energy battery `s` sends to all servers during slot `t`.
    pub fn battery_outflow(&self, s: usize, t: usize) -> f64 {
        self.y.iter().map(|to| to[s][t]).sum()
    }

    /// Energy server `s` draws from all batteries during slot `t`.
    pub fn server_battery_intake(&self, s: usize, t: usize) -> f64 {
        self.y[s].iter().map(|from| from[t]).sum()
    }

    fn check_shape(&self, sc: &Scenario) -> Result<()> {
        let (s_n, t_n) = (sc.num_sites, sc.num_slots);
        let grid_ok = |m: &Vec<Vec<f64>>| m.len() == s_n && m.iter().all(|r| r.len() == t_n);
        let named = [
            ("x", &self.x),
            ("z", &self.z),
            ("u", &self.u),
            ("v", &self.v),
            ("w", &self.w),
        ];
        for (name, m) in named {
            if !grid_ok(m) {
                return Err(Error::Shape(format!("{name} must be {s_n}x{t_n}")));
            }
        }
        if self.y.len() != s_n || !self.y.iter().all(grid_ok) {
            return Err(Error::Shape(format!("y must be {s_n}x{s_n}x{t_n}")));
        }
        if self.assignment.len() != sc.tasks.len() {
            return Err(Error::Shape(format!(
                "{} assignments for {} tasks",
                self.assignment.len(),
                sc.tasks.len()
            )));
        }
        Ok(())
    }
}

/// Carbon footprint split by source.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CfBreakdown {
    /// Grid energy drawn directly by servers.
    pub grid: f64,
    /// Grid energy used to charge batteries.
    pub battery: f64,
    /// Energy spent moving tasks between sites.
    pub offload: f64,
    /// Transfer loss when batteries power remote servers.
    pub loss: f64,
    pub total: f64,
}

impl CfBreakdown {
    pub fn new(grid: f64, battery: f64, offload: f64, loss: f64) -> Self {
        CfBreakdown {
            grid,
            battery,
            offload,
            loss,
            total: grid + battery + offload + loss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// Every task completed exactly once inside its window on an allowed site.
    TaskAssignment,
    /// Server energy equals the number of tasks it runs.
    EnergyBalance,
    ServerCapacity,
    BatteryCapacity,
    BatteryEvolution,
    RenewableLimit,
    NonNegativity,
}

impl Constraint {
    pub const ALL: [Constraint; 7] = [
        Constraint::TaskAssignment,
        Constraint::EnergyBalance,
        Constraint::ServerCapacity,
        Constraint::BatteryCapacity,
        Constraint::BatteryEvolution,
        Constraint::RenewableLimit,
        Constraint::NonNegativity,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Constraint::TaskAssignment => "task-assignment",
            Constraint::EnergyBalance => "energy-balance",
            Constraint::ServerCapacity => "server-capacity",
            Constraint::BatteryCapacity => "battery-capacity",
            Constraint::BatteryEvolution => "battery-evolution",
            Constraint::RenewableLimit => "renewable-limit",
            Constraint::NonNegativity => "non-negativity",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintViolation {
    pub constraint: Constraint,
    /// Site (or task for [`Constraint::TaskAssignment`]) index.
    pub index: usize,
    pub slot: Option<usize>,
    pub detail: String,
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let who = if self.constraint == Constraint::TaskAssignment {
            "task"
        } else {
            "site"
        };
        write!(f, "{}: {who} {}", self.constraint.label(), self.index + 1)?;
        if let Some(t) = self.slot {
            write!(f, ", slot {}", t + 1)?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintReport {
    pub violations: Vec<ConstraintViolation>,
}

impl ConstraintReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn passes(&self, c: Constraint) -> bool {
        !self.violations.iter().any(|v| v.constraint == c)
    }

    pub fn of(&self, c: Constraint) -> impl Iterator<Item = &ConstraintViolation> {
        self.violations.iter().filter(move |v| v.constraint == c)
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the decision variables against every constraint of the program.
///
/// Battery constraints are applied to every slot, seeded with the initial
/// battery level. The renewable limit bounds `z + v`.
pub fn verify_constraints(sc: &Scenario, vars: &SolutionVars) -> Result<ConstraintReport> {
    vars.check_shape(sc)?;
    let mut out = Vec::new();
    let mut push = |constraint, index, slot, detail: String| {
        out.push(ConstraintViolation {
            constraint,
            index,
            slot,
            detail,
        })
    };

    let (s_n, t_n) = (sc.num_sites, sc.num_slots);
    let mut load = vec![vec![0usize; t_n]; s_n];
    for (n, (task, p)) in sc.tasks.iter().zip(&vars.assignment).enumerate() {
        if p.site >= s_n || p.slot >= t_n {
            push(
                Constraint::TaskAssignment,
                n,
                None,
                format!("placement ({}, {}) outside the network", p.site + 1, p.slot + 1),
            );
            continue;
        }
        if !task.window().contains(&p.slot) {
            push(
                Constraint::TaskAssignment,
                n,
                Some(p.slot),
                format!(
                    "slot outside window [{}, {}]",
                    task.origin_slot + 1,
                    task.deadline_slot + 1
                ),
            );
        }
        if !task.candidates.contains(&p.site) {
            push(
                Constraint::TaskAssignment,
                n,
                Some(p.slot),
                format!("site {} is not a candidate", p.site + 1),
            );
        }
        load[p.site][p.slot] += 1;
    }

    let grids = [
        ("x", &vars.x),
        ("z", &vars.z),
        ("u", &vars.u),
        ("v", &vars.v),
        ("w", &vars.w),
    ];
    for (name, m) in grids {
        for (s, row) in m.iter().enumerate() {
            for (t, &val) in row.iter().enumerate() {
                if !(val >= -EQ_TOL) {
                    push(Constraint::NonNegativity, s, Some(t), format!("{name} = {val}"));
                }
            }
        }
    }
    for (s, from) in vars.y.iter().enumerate() {
        for (sp, row) in from.iter().enumerate() {
            for (t, &val) in row.iter().enumerate() {
                if !(val >= -EQ_TOL) {
                    push(
                        Constraint::NonNegativity,
                        s,
                        Some(t),
                        format!("y from battery {} = {val}", sp + 1),
                    );
                }
            }
        }
    }

    let h = sc.server_cap as f64;
    let l = sc.battery_cap as f64;
    for s in 0..s_n {
        for t in 0..t_n {
            let served = vars.x[s][t] + vars.server_battery_intake(s, t) + vars.z[s][t];
            let tasks = load[s][t] as f64;
            if (served - tasks).abs() > EQ_TOL {
                push(
                    Constraint::EnergyBalance,
                    s,
                    Some(t),
                    format!("server energy {served} != {tasks} tasks"),
                );
            }
            if served > h + EQ_TOL {
                push(
                    Constraint::ServerCapacity,
                    s,
                    Some(t),
                    format!("server energy {served} > H = {h}"),
                );
            }

            let prev = if t == 0 {
                sc.initial_battery[s] as f64
            } else {
                vars.w[s][t - 1]
            };
            let stored = vars.u[s][t] + vars.v[s][t] + prev;
            if stored > l + EQ_TOL {
                push(
                    Constraint::BatteryCapacity,
                    s,
                    Some(t),
                    format!("battery content {stored} > L = {l}"),
                );
            }
            let expected_w = stored - vars.battery_outflow(s, t);
            if (vars.w[s][t] - expected_w).abs() > EQ_TOL {
                push(
                    Constraint::BatteryEvolution,
                    s,
                    Some(t),
                    format!("w = {} but inflow minus outflow = {expected_w}", vars.w[s][t]),
                );
            }

            let renewable_used = vars.z[s][t] + vars.v[s][t];
            let r = sc.renewable[s][t] as f64;
            if renewable_used > r + EQ_TOL {
                push(
                    Constraint::RenewableLimit,
                    s,
                    Some(t),
                    format!("renewable use {renewable_used} > R = {r}"),
                );
            }
        }
    }

    Ok(ConstraintReport { violations: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_task(s_n: usize, t_n: usize) -> Scenario {
        let mut sc = Scenario::empty(s_n, t_n);
        sc.tasks.push(Task {
            id: 0,
            origin_slot: 0,
            deadline_slot: t_n - 1,
            home_site: 0,
            candidates: (0..s_n).collect(),
        });
        sc
    }

    #[test]
    fn degenerate_instance_is_valid() {
        assert!(validate_scenario(&Scenario::empty(1, 1)).is_valid());
    }

    #[test]
    fn deadline_before_origin() {
        let mut sc = Scenario::empty(1, 3);
        sc.tasks.push(Task {
            id: 0,
            origin_slot: 2,
            deadline_slot: 1,
            home_site: 0,
            candidates: vec![0],
        });
        let report = validate_scenario(&sc);
        assert_eq!(
            report.issues,
            vec![ScenarioIssue::DeadlineBeforeOrigin { task: 0 }]
        );
        assert!(report.to_string().contains("deadline before origin"));
    }

    #[test]
    fn nonzero_self_loss() {
        let mut sc = Scenario::empty(1, 1);
        sc.beta[0][0] = 0.2;
        let report = validate_scenario(&sc);
        assert_eq!(
            report.issues,
            vec![ScenarioIssue::NonzeroDiagonal {
                field: "beta",
                site: 0
            }]
        );
        assert!(report.to_string().contains("nonzero self-loss"));
    }

    #[test]
    fn shape_and_range_issues() {
        let mut sc = Scenario::empty(2, 2);
        sc.ci.pop();
        sc.initial_battery[1] = 3;
        sc.server_cap = -1;
        sc.tasks.push(Task {
            id: 7,
            origin_slot: 0,
            deadline_slot: 5,
            home_site: 4,
            candidates: vec![],
        });
        let issues = validate_scenario(&sc).issues;
        assert!(issues.iter().any(|i| matches!(i, ScenarioIssue::Shape { field: "ci", .. })));
        assert!(issues.contains(&ScenarioIssue::InitialBatteryOutOfRange { site: 1 }));
        assert!(issues.contains(&ScenarioIssue::NegativeCapacity { field: "server_cap" }));
        assert!(issues.contains(&ScenarioIssue::SlotOutOfRange { task: 0 }));
        assert!(issues.contains(&ScenarioIssue::HomeSiteOutOfRange { task: 0 }));
        assert!(issues.contains(&ScenarioIssue::EmptyCandidates { task: 0 }));
    }

    #[test]
    fn grid_serves_single_task() {
        let mut sc = one_task(1, 1);
        sc.server_cap = 1;
        let mut vars = SolutionVars::zeros(1, 1, vec![Placement { site: 0, slot: 0 }]);
        vars.x[0][0] = 1.0;
        let report = verify_constraints(&sc, &vars).unwrap();
        assert!(report.is_ok(), "{report}");

        vars.x[0][0] = 0.0;
        let report = verify_constraints(&sc, &vars).unwrap();
        let bad: Vec<_> = report.of(Constraint::EnergyBalance).collect();
        assert_eq!(bad.len(), 1);
        assert_eq!((bad[0].index, bad[0].slot), (0, Some(0)));
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn battery_capacity_arithmetic() {
        let mut sc = Scenario::empty(1, 2);
        sc.battery_cap = 5;
        sc.renewable[0][0] = 3;
        let mut vars = SolutionVars::zeros(1, 2, vec![]);
        vars.v[0][0] = 3.0;
        vars.w[0][0] = 3.0;
        vars.u[0][1] = 3.0;
        vars.w[0][1] = 6.0;
        let report = verify_constraints(&sc, &vars).unwrap();
        assert!(!report.passes(Constraint::BatteryCapacity));
        let v: Vec<_> = report.of(Constraint::BatteryCapacity).collect();
        assert_eq!((v[0].index, v[0].slot), (0, Some(1)));
        assert!(report.passes(Constraint::BatteryEvolution));
        assert!(report.passes(Constraint::RenewableLimit));
    }

    #[test]
    fn window_and_candidate_violations() {
        let mut sc = one_task(2, 2);
        sc.tasks[0].deadline_slot = 0;
        sc.tasks[0].candidates = vec![0];
        sc.server_cap = 1;
        let mut vars = SolutionVars::zeros(2, 2, vec![Placement { site: 1, slot: 1 }]);
        vars.x[1][1] = 1.0;
        let report = verify_constraints(&sc, &vars).unwrap();
        assert_eq!(report.of(Constraint::TaskAssignment).count(), 2);
        assert!(report.passes(Constraint::EnergyBalance));
    }

    #[test]
    fn renewable_limit_counts_renewable_charging() {
        let mut sc = one_task(1, 1);
        sc.server_cap = 1;
        sc.battery_cap = 2;
        sc.renewable[0][0] = 1;
        let mut vars = SolutionVars::zeros(1, 1, vec![Placement { site: 0, slot: 0 }]);
        vars.z[0][0] = 1.0;
        vars.v[0][0] = 1.0;
        vars.y[0][0][0] = 0.0;
        vars.w[0][0] = 1.0;
        let report = verify_constraints(&sc, &vars).unwrap();
        assert_eq!(report.of(Constraint::RenewableLimit).count(), 1);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let sc = one_task(2, 2);
        let vars = SolutionVars::zeros(1, 2, vec![Placement { site: 0, slot: 0 }]);
        assert!(matches!(verify_constraints(&sc, &vars), Err(Error::Shape(_))));
    }

    #[test]
    fn breakdown_total_is_component_sum() {
        let b = CfBreakdown::new(1.5, 2.0, 0.25, 3.0);
        assert_eq!(b.total, 6.75);
    }
}
