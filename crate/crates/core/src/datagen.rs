//! Carbon-intensity tables and seeded random scenarios.
//!
//! Random draws come from ChaCha8 seeded with `SeedableRng::seed_from_u64`
//! (rand_core 0.9). Integers use rejection sampling on raw `u64` words and
//! Bernoulli trials compare the top 53 bits of a word against `p`, so a
//! scenario depends only on the seed, the config and the CI table.
//!
//! Stream layout: renewable draws first, site-major then slot, `trials`
//! Bernoulli draws per daytime cell; then per task its origin, deadline and
//! home site.

use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::model::{off_diagonal, Scenario, Task};

pub const BUNDLED_CI_CSV: &str = include_str!("../data/ci_sweden_germany_poland.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct CiTable {
    pub regions: Vec<String>,
    /// Per region, one value per slot, gCO2eq/kWh.
    pub series: Vec<Vec<f64>>,
}

impl CiTable {
    /// Sweden, Germany and Poland over 24 hourly slots.
    pub fn bundled() -> Self {
        parse_ci_csv(BUNDLED_CI_CSV, "bundled CI table").expect("bundled CI table parses")
    }

    pub fn num_slots(&self) -> usize {
        self.series.first().map_or(0, Vec::len)
    }

    pub fn value(&self, region: &str, slot: usize) -> Option<f64> {
        let r = self.regions.iter().position(|x| x == region)?;
        self.series[r].get(slot.checked_sub(1)?).copied()
    }
}

pub fn load_ci_csv(path: impl AsRef<Path>) -> Result<CiTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ci_csv(&text, &path.display().to_string())
}

/// Parses `region,slot,ci_g_per_kwh` rows; `#` starts a comment line.
/// Regions keep their order of first appearance and every region must
/// cover slots `1..=T` exactly once, for the same `T`.
pub fn parse_ci_csv(text: &str, context: &str) -> Result<CiTable> {
    let err = |line: u64, message: String| Error::Parse {
        context: context.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header_line = reader.position().line();
    let headers = reader
        .headers()
        .map_err(|e| err(header_line, e.to_string()))?
        .clone();
    if headers.is_empty() {
        return Err(err(1, "no data rows".into()));
    }
    if headers.iter().collect::<Vec<_>>() != ["region", "slot", "ci_g_per_kwh"] {
        return Err(err(
            headers.position().map_or(1, |p| p.line()),
            format!("expected header region,slot,ci_g_per_kwh, found {:?}", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut regions: Vec<String> = Vec::new();
    let mut cells: Vec<Vec<(usize, f64, u64)>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(err(line, format!("expected 3 fields, found {}", record.len())));
        }
        let region = record[0].to_string();
        if region.is_empty() {
            return Err(err(line, "empty region name".into()));
        }
        let slot: usize = record[1]
            .parse()
            .map_err(|_| err(line, format!("bad slot {:?}", &record[1])))?;
        if slot == 0 {
            return Err(err(line, "slots are 1-based".into()));
        }
        let ci: f64 = record[2]
            .parse()
            .map_err(|_| err(line, format!("bad carbon intensity {:?}", &record[2])))?;
        if !(ci.is_finite() && ci >= 0.0) {
            return Err(err(line, format!("carbon intensity {ci} must be finite and non-negative")));
        }
        let r = match regions.iter().position(|x| *x == region) {
            Some(r) => r,
            None => {
                regions.push(region);
                cells.push(Vec::new());
                regions.len() - 1
            }
        };
        cells[r].push((slot, ci, line));
    }
    if regions.is_empty() {
        return Err(err(reader.position().line(), "no data rows".into()));
    }

    let num_slots = cells.iter().flatten().map(|c| c.0).max().unwrap_or(0);
    let mut series = Vec::with_capacity(regions.len());
    for (name, rows) in regions.iter().zip(&cells) {
        let mut values = vec![None; num_slots];
        for &(slot, ci, line) in rows {
            if values[slot - 1].replace(ci).is_some() {
                return Err(err(line, format!("{name}: duplicate slot {slot}")));
            }
        }
        if let Some(missing) = values.iter().position(Option::is_none) {
            let last = rows.last().map_or(0, |r| r.2);
            return Err(err(
                last,
                format!("{name}: missing slot {} of {num_slots}", missing + 1),
            ));
        }
        series.push(values.into_iter().map(Option::unwrap).collect());
    }
    Ok(CiTable { regions, series })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub num_sites: usize,
    pub num_slots: usize,
    pub num_tasks: usize,
    /// First and last slot (1-based, inclusive) with renewable generation.
    pub daytime: (usize, usize),
    pub trials: u32,
    pub probability: f64,
    pub alpha: f64,
    pub beta: f64,
    pub battery_cap: i64,
    pub server_cap: i64,
}

impl Default for GenConfig {
    /// Three sites, 24 hourly slots, 100 tasks, renewable ~ B(5, 0.5) from
    /// 7 am to 7 pm (slots 8..=19), α = 0.1, β = 0.2, L = H = 10.
    fn default() -> Self {
        GenConfig {
            seed: 0,
            num_sites: 3,
            num_slots: 24,
            num_tasks: 100,
            daytime: (8, 19),
            trials: 5,
            probability: 0.5,
            alpha: 0.1,
            beta: 0.2,
            battery_cap: 10,
            server_cap: 10,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(Error::Config(format!("probability {} outside [0, 1]", self.probability)));
        }
        let (a, b) = self.daytime;
        if a < 1 || a > b || b > self.num_slots {
            return Err(Error::Config(format!(
                "daytime window [{a}, {b}] is not inside [1, {}]",
                self.num_slots
            )));
        }
        if self.num_sites == 0 || self.num_slots == 0 {
            return Err(Error::Config("need at least one site and one slot".into()));
        }
        if self.battery_cap < 0 || self.server_cap < 0 {
            return Err(Error::Config("capacities must be non-negative".into()));
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return Err(Error::Config("alpha and beta must be non-negative".into()));
        }
        Ok(())
    }
}

/// Seeded generator with a fixed, documented sampling procedure.
pub struct ScenarioRng {
    inner: ChaCha8Rng,
}

impl ScenarioRng {
    pub fn new(seed: u64) -> Self {
        ScenarioRng {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `0..n` by rejection sampling; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let x = self.inner.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }

    /// Uniform on `lo..=hi`.
    pub fn inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.below(hi - lo + 1)
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn binomial(&mut self, trials: u32, p: f64) -> u32 {
        (0..trials).filter(|_| self.bernoulli(p)).count() as u32
    }
}

/// Draws a scenario: renewable ~ Binomial(trials, p) inside the daytime
/// window, task windows uniform with `o <= d`, home sites uniform, and every
/// site a candidate. Site `s` uses region `s` of the CI table.
pub fn generate_scenario(config: &GenConfig, ci: &CiTable) -> Result<Scenario> {
    config.validate()?;
    if ci.regions.len() < config.num_sites || ci.num_slots() < config.num_slots {
        return Err(Error::Config(format!(
            "CI table has {} regions x {} slots, need {} x {}",
            ci.regions.len(),
            ci.num_slots(),
            config.num_sites,
            config.num_slots
        )));
    }
    let (s_n, t_n) = (config.num_sites, config.num_slots);
    let mut rng = ScenarioRng::new(config.seed);

    let mut renewable = vec![vec![0i64; t_n]; s_n];
    let day = (config.daytime.0 - 1)..config.daytime.1;
    for row in renewable.iter_mut() {
        for (t, cell) in row.iter_mut().enumerate() {
            if day.contains(&t) {
                *cell = rng.binomial(config.trials, config.probability) as i64;
            }
        }
    }

    let tasks = (0..config.num_tasks)
        .map(|n| {
            let origin = rng.inclusive(1, t_n as u64) as usize;
            let deadline = rng.inclusive(origin as u64, t_n as u64) as usize;
            let home = rng.below(s_n as u64) as usize;
            Task {
                id: n + 1,
                origin_slot: origin - 1,
                deadline_slot: deadline - 1,
                home_site: home,
                candidates: (0..s_n).collect(),
            }
        })
        .collect();

    Ok(Scenario {
        num_sites: s_n,
        num_slots: t_n,
        tasks,
        ci: ci.series[..s_n].iter().map(|r| r[..t_n].to_vec()).collect(),
        renewable,
        alpha: off_diagonal(s_n, config.alpha),
        beta: off_diagonal(s_n, config.beta),
        battery_cap: config.battery_cap,
        server_cap: config.server_cap,
        initial_battery: vec![0; s_n],
    })
}
