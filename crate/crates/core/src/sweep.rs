//! Capacity sweeps: every (scenario, scheme, capacity value) cell is an
//! independent optimal solve.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{CfBreakdown, Scenario};
use crate::reformulate::{solve_scheme, OffloadCi, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    BatteryCap,
    ServerCap,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "battery-cap" | "battery_cap" | "L" => Ok(SweepParam::BatteryCap),
            "server-cap" | "server_cap" | "H" => Ok(SweepParam::ServerCap),
            _ => Err(Error::Config(format!(
                "unknown sweep parameter {s:?} (expected battery-cap|server-cap)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<i64>,
    /// Value of the capacity not being swept.
    pub fixed: i64,
    pub schemes: Vec<Scheme>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep values are empty".into()));
        }
        if self.values.iter().any(|&v| v < 0) || self.fixed < 0 {
            return Err(Error::Config("sweep values must be non-negative".into()));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep values must be strictly increasing".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes selected".into()));
        }
        Ok(())
    }

    /// `(L, H)` for a swept value.
    pub fn capacities(&self, value: i64) -> (i64, i64) {
        match self.param {
            SweepParam::BatteryCap => (value, self.fixed),
            SweepParam::ServerCap => (self.fixed, value),
        }
    }
}

/// A labelled scenario, usually one per generator seed.
#[derive(Debug, Clone)]
pub struct SweepInput {
    pub label: String,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Scenario label, or `mean`.
    pub seed: String,
    pub scheme: Scheme,
    pub battery_cap: i64,
    pub server_cap: i64,
    /// `None` when the cell is infeasible.
    pub breakdown: Option<CfBreakdown>,
    pub runtime_ms: f64,
}

impl SweepRow {
    pub fn total(&self) -> f64 {
        self.breakdown.map_or(f64::INFINITY, |b| b.total)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

/// Runs every cell. Row order is input, then scheme, then swept value,
/// regardless of how cells are scheduled.
pub fn run_sweep(
    inputs: &[SweepInput],
    spec: &SweepSpec,
    offload_ci: OffloadCi,
    exec: Execution,
) -> Result<SweepTable> {
    spec.validate()?;
    for input in inputs {
        input.scenario.ensure_valid()?;
    }
    let mut cells = Vec::new();
    for (i, _) in inputs.iter().enumerate() {
        for &scheme in &spec.schemes {
            for &value in &spec.values {
                cells.push((i, scheme, value));
            }
        }
    }
    let results = exec.map(&cells, |&(i, scheme, value)| -> Result<SweepRow> {
        let (l, h) = spec.capacities(value);
        let sc = inputs[i].scenario.with_capacities(l, h);
        let (breakdown, runtime_ms) = match solve_scheme(&sc, scheme, offload_ci) {
            Ok(sol) => (Some(sol.breakdown), sol.runtime.as_secs_f64() * 1e3),
            Err(Error::Infeasible(_)) => (None, 0.0),
            Err(e) => return Err(e),
        };
        Ok(SweepRow {
            seed: inputs[i].label.clone(),
            scheme,
            battery_cap: l,
            server_cap: h,
            breakdown,
            runtime_ms,
        })
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows })
}

impl SweepTable {
    /// Per (scheme, L, H) averages over all labelled rows, in first-seen order.
    /// A cell infeasible for any input is infeasible on average.
    pub fn means(&self) -> Vec<SweepRow> {
        let mut keys: Vec<(Scheme, i64, i64)> = Vec::new();
        for r in &self.rows {
            let k = (r.scheme, r.battery_cap, r.server_cap);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .map(|(scheme, l, h)| {
                let group: Vec<&SweepRow> = self
                    .rows
                    .iter()
                    .filter(|r| (r.scheme, r.battery_cap, r.server_cap) == (scheme, l, h))
                    .collect();
                let k = group.len() as f64;
                let breakdown = group
                    .iter()
                    .map(|r| r.breakdown)
                    .collect::<Option<Vec<_>>>()
                    .map(|bs| {
                        let mean = |f: fn(&CfBreakdown) -> f64| bs.iter().map(f).sum::<f64>() / k;
                        CfBreakdown::new(
                            mean(|b| b.grid),
                            mean(|b| b.battery),
                            mean(|b| b.offload),
                            mean(|b| b.loss),
                        )
                    });
                SweepRow {
                    seed: "mean".into(),
                    scheme,
                    battery_cap: l,
                    server_cap: h,
                    breakdown,
                    runtime_ms: group.iter().map(|r| r.runtime_ms).sum::<f64>() / k,
                }
            })
            .collect()
    }

    /// Look up a labelled or `mean` row.
    pub fn get(&self, seed: &str, scheme: Scheme, l: i64, h: i64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.seed == seed && r.scheme == scheme && r.battery_cap == l && r.server_cap == h)
    }

    /// CSV with per-input rows followed by mean rows. Without `timing` the
    /// runtime column is left empty so output is reproducible byte for byte.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from(
            "seed,scheme,L,H,cf_total,cf_grid,cf_battery,cf_offload,cf_loss,runtime_ms\n",
        );
        let means = self.means();
        for r in self.rows.iter().chain(&means) {
            let cf = |v: Option<f64>| v.map_or_else(|| "inf".to_string(), |x| x.to_string());
            let b = r.breakdown;
            let runtime = if timing {
                format!("{:.3}", r.runtime_ms)
            } else {
                String::new()
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.seed,
                r.scheme,
                r.battery_cap,
                r.server_cap,
                cf(b.map(|b| b.total)),
                cf(b.map(|b| b.grid)),
                cf(b.map(|b| b.battery)),
                cf(b.map(|b| b.offload)),
                cf(b.map(|b| b.loss)),
                runtime
            );
        }
        out
    }
}

/// Parses `0..14` (inclusive), `8..=17`, or a comma list such as `0,5,10`.
pub fn parse_values(text: &str) -> Result<Vec<i64>> {
    let bad = || Error::Config(format!("bad value list {text:?}"));
    let num = |s: &str| s.trim().parse::<i64>().map_err(|_| bad());
    if let Some((a, b)) = text.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(num).collect()
}
