//! Scenario drivers behind the `chargeflow` binary. Each one turns a
//! [`RunConfig`] into a [`Table`] (CSV) or a [`Report`] (JSON); writing and
//! exit codes live here too so the binary stays a thin shell.

pub mod config;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::charge::{delta_charge, ChargeIntegrator, ChargeOptions};
use crate::evolution::{evolve_pulse, extract_excitation_from, field_free_reference, PulseParams, SolverConfig};
use crate::grid::Grid;
use crate::oracle::{default_t_max, depletion_charge, integrated_charge, IntegrationOptions};
use crate::wave::{PlaneWave, WaveFunction};

pub use config::{CheckKind, ConfigError, Range, RunConfig, Scenario, Spacing};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] crate::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write output: {0}")]
    Csv(#[from] csv::Error),
    #[error("{failed} of {total} sweep rows failed to converge")]
    RowsFailed { failed: usize, total: usize },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            ScenarioError::Numeric(E::Convergence(_) | E::Accuracy(_)) | ScenarioError::RowsFailed { .. } => {
                EXIT_CONVERGENCE
            }
            _ => EXIT_CONFIG,
        }
    }
}

/// Column names and descriptions, also shown by `--help`.
pub fn columns(scenario: Scenario) -> &'static [(&'static str, &'static str)] {
    match scenario {
        Scenario::GaussMap => &[
            ("x1", "left probe (bohr)"),
            ("x2", "right probe (bohr)"),
            ("delta_qd", "charge difference Qd(x2) - Qd(x1), closed form"),
        ],
        Scenario::GaussScan => &[
            ("x_g", "packet center (bohr)"),
            ("p0", "plane-wave momentum (a.u.)"),
            ("delta_qd", "charge difference between the fixed probes, closed form"),
        ],
        Scenario::LaserSweep => &[
            ("f0", "peak electric field (a.u.)"),
            ("a0", "peak vector potential (a.u.)"),
            ("delta_qd", "charge difference between the probes"),
            ("delta_q1", "packet-density part"),
            ("delta_qc", "interference part"),
            ("norm_drift", "relative norm change over the pulse"),
            ("halving_change", "sup-norm change when dt is halved"),
            ("status", "ok, or the error that aborted the row"),
        ],
        Scenario::Verify => &[],
    }
}

/// A CSV table with `key: value` metadata lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub scenario: Scenario,
    pub meta: Vec<(String, String)>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Rows that did not finish.
    pub fn failed_rows(&self) -> usize {
        let Some(k) = columns(self.scenario).iter().position(|c| c.0 == "status") else { return 0 };
        self.rows.iter().filter(|r| r[k] != "ok").count()
    }

    /// Numeric column by name; non-numeric cells become NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = columns(self.scenario).iter().position(|c| c.0 == name)?;
        Some(self.rows.iter().map(|r| r[k].parse().unwrap_or(f64::NAN)).collect())
    }

    pub fn write(&self, cfg: &RunConfig, mut out: impl Write) -> Result<(), ScenarioError> {
        writeln!(out, "# chargeflow {}", self.scenario)?;
        writeln!(out, "# config: {}", serde_json::to_string(cfg).map_err(ConfigError::from)?)?;
        for (name, doc) in columns(self.scenario) {
            writeln!(out, "# column {name}: {doc}")?;
        }
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(columns(self.scenario).iter().map(|c| c.0))?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn meta(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn packet_meta(cfg: &RunConfig) -> Result<Vec<(String, String)>, ScenarioError> {
    let p = cfg.packet()?;
    let case = cfg.effective_case().map_or("custom".to_string(), |c| c.to_string());
    Ok(vec![
        meta("case", case),
        meta("x_g", p.x_g()),
        meta("p_g", p.p_g()),
        meta("sigma_p", p.sigma_p()),
        meta("sigma_x", p.sigma_x()),
    ])
}

/// `(x1, x2, dQd)` over the configured probe ranges.
pub fn gauss_map(cfg: &RunConfig) -> Result<Table, ScenarioError> {
    let packet = cfg.packet()?;
    let pw = PlaneWave::new(cfg.p0()?)?;
    let xs1 = cfg.gauss_map.x1.values();
    let xs2 = cfg.gauss_map.x2.values();
    let rows = xs1
        .par_iter()
        .flat_map_iter(|&x1| {
            let (packet, pw) = (&packet, &pw);
            xs2.iter().map(move |&x2| vec![num(x1), num(x2), num(packet.delta_qd_analytic(pw, x1, x2))])
        })
        .collect();
    let mut m = packet_meta(cfg)?;
    m.push(meta("p0", pw.p0()));
    Ok(Table { scenario: Scenario::GaussMap, meta: m, rows })
}

/// `(x_G, p0, dQd)` for fixed probes.
pub fn gauss_scan(cfg: &RunConfig) -> Result<Table, ScenarioError> {
    let packet = cfg.packet()?;
    let s = &cfg.gauss_scan;
    let centers = s.x_g.values();
    let momenta = s.p0.values();
    let rows: Result<Vec<Vec<String>>, crate::Error> = centers
        .par_iter()
        .map(|&xg| {
            let moved = packet.with_center(xg);
            momenta
                .iter()
                .map(|&p0| Ok(vec![num(xg), num(p0), num(moved.delta_qd_analytic(&PlaneWave::new(p0)?, s.x1, s.x2))]))
                .collect::<Result<Vec<_>, crate::Error>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map(|v| v.into_iter().flatten().collect());
    let mut m = packet_meta(cfg)?;
    m.push(meta("x1", s.x1));
    m.push(meta("x2", s.x2));
    Ok(Table { scenario: Scenario::GaussScan, meta: m, rows: rows? })
}

/// Resolved geometry of the laser scenario.
#[derive(Debug, Clone)]
pub struct LaserSetup {
    pub grid: Grid<f64>,
    pub plane_wave: PlaneWave<f64>,
    pub omega0: f64,
    pub tau: f64,
    pub width: f64,
    pub probes: (f64, f64),
    pub solver: SolverConfig<f64>,
    /// Field-free run the excitation is measured against.
    pub reference: WaveFunction<f64>,
    /// `max |reference - exp(i p0 x / hbar)|`.
    pub reference_offset: f64,
}

impl LaserSetup {
    pub fn new(cfg: &RunConfig) -> Result<Self, ScenarioError> {
        let l = &cfg.laser;
        let u = cfg.units()?;
        let omega0 = u.wavelength_nm_to_omega(l.wavelength_nm);
        let width = u.nm(l.width_nm);
        let tau = l.cycles * 2.0 * std::f64::consts::PI / omega0;
        let grid = Grid::commensurate(0.0, l.length_factor * width, l.points, l.p0, u)?;
        let plane_wave = PlaneWave::new(l.p0)?;
        let probes = match l.probes {
            Some([a, b]) => (a, b),
            None => (-0.5 * width, 0.5 * width),
        };
        let solver = SolverConfig::new(grid, l.dt)?.with_convergence(l.convergence)?;
        let silent = PulseParams::new(0.0, omega0, tau, 0.0, width)?;
        let reference = field_free_reference(&plane_wave, &silent, &solver)?;
        let reference_offset = reference.max_diff(&plane_wave.sample(&grid, 0.0));
        Ok(Self { grid, plane_wave, omega0, tau, width, probes, solver, reference, reference_offset })
    }

    pub fn pulse(&self, f0: f64) -> crate::Result<PulseParams<f64>> {
        PulseParams::from_peak_field(f0, self.omega0, self.tau, 0.0, self.width)
    }

    /// Post-pulse excitation for peak field `f0`, relative to the field-free
    /// run, with the run diagnostics.
    pub fn excite(&self, f0: f64) -> crate::Result<(WaveFunction<f64>, crate::evolution::PulseRun<f64>)> {
        let run = evolve_pulse(&self.plane_wave, &self.pulse(f0)?, &self.solver)?;
        let psi1 = extract_excitation_from(&run.psi, &self.reference)?;
        Ok((psi1, run))
    }
}

/// One row per peak field: pulse, excitation, charge between the probes.
/// Failed rows are kept with their error in the status column.
pub fn laser_sweep(cfg: &RunConfig) -> Result<Table, ScenarioError> {
    let setup = LaserSetup::new(cfg)?;
    let fields = cfg.laser.f0.values();
    let (x1, x2) = setup.probes;
    let rows = fields
        .par_iter()
        .map(|&f0| {
            let a0 = setup.pulse(f0).map(|p| p.a0());
            let result =
                setup.excite(f0).and_then(|(psi1, run)| Ok((delta_charge(&psi1, &setup.plane_wave, x1, x2)?, run)));
            let a0 = a0.map(num).unwrap_or_default();
            match result {
                Ok((b, run)) => vec![
                    num(f0),
                    a0,
                    num(b.delta_qd),
                    num(b.delta_q1),
                    num(b.delta_qc),
                    num(run.norm_drift),
                    num(run.halving_change),
                    "ok".into(),
                ],
                Err(e) => {
                    let mut r = vec![num(f0), a0];
                    r.extend(std::iter::repeat_n(String::new(), 5));
                    r.push(format!("error: {e}"));
                    r
                }
            }
        })
        .collect();
    let m = vec![
        meta("omega0", setup.omega0),
        meta("tau", setup.tau),
        meta("width", setup.width),
        meta("x_center", 0.0),
        meta("p0", setup.plane_wave.p0()),
        meta("probes", format!("{} {}", x1, x2)),
        meta("grid", format!("x_min={} dx={} n={}", setup.grid.x_min(), setup.grid.dx(), setup.grid.len())),
        meta("dt", setup.solver.dt),
        meta("reference_offset", setup.reference_offset),
    ];
    Ok(Table { scenario: Scenario::LaserSweep, meta: m, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub tolerance: f64,
    pub values: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    fn new(name: &str, tolerance: f64) -> Self {
        Self { name: name.into(), passed: false, tolerance, values: Map::new(), error: None }
    }

    fn value(mut self, k: &str, v: f64) -> Self {
        self.values.insert(k.into(), serde_json::json!(v));
        self
    }

    fn failed(mut self, e: impl ToString) -> Self {
        self.error = Some(e.to_string());
        self.passed = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    pub passed: bool,
    pub config: RunConfig,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write(&self, mut out: impl Write) -> Result<(), ScenarioError> {
        serde_json::to_writer_pretty(&mut out, self).map_err(ConfigError::from)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        }
    }
}

struct Oracles {
    integrated: Result<(f64, f64), String>,
    depletion: Result<f64, String>,
}

/// Runs the configured checks on the configured packet. Numerical failures
/// inside a check fail that check; they do not abort the report.
pub fn verify(cfg: &RunConfig) -> Result<Report, ScenarioError> {
    let v = &cfg.verify;
    let packet = cfg.packet()?;
    let pw = PlaneWave::new(cfg.p0()?)?;
    let mut checks = Vec::new();
    if v.checks.is_empty() {
        return Ok(Report { scenario: Scenario::Verify, passed: true, config: cfg.clone(), checks });
    }
    let grid = Grid::commensurate(cfg.grid.center, cfg.grid.length, cfg.grid.points, pw.p0(), cfg.units()?)?;
    let psi1 = packet.sample_position(&grid)?;
    let opts = ChargeOptions { density_coefficient: v.density_coefficient, ..ChargeOptions::default() };
    let (x1, x2) = (v.x1, v.x2);
    let needs_oracles = v.checks.iter().any(|c| *c != CheckKind::Analytic);
    let oracles = needs_oracles.then(|| {
        let t_max = v.t_max.unwrap_or_else(|| default_t_max(&psi1, x1).max(default_t_max(&psi1, x2)));
        let t_final = v.t_final.unwrap_or(t_max);
        let iopts = IntegrationOptions {
            eps_schedule: v.eps_schedule.clone(),
            tolerance: v.tolerance,
            ..IntegrationOptions::default()
        };
        let ((a, b), depletion) = rayon::join(
            || {
                rayon::join(
                    || integrated_charge(&psi1, &pw, x1, t_max, &iopts),
                    || integrated_charge(&psi1, &pw, x2, t_max, &iopts),
                )
            },
            || depletion_charge(&psi1, &pw, x1, x2, t_final),
        );
        let integrated = match (a, b) {
            (Ok(a), Ok(b)) => Ok((b.value - a.value, a.spread + b.spread)),
            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
        };
        Oracles { integrated, depletion: depletion.map_err(|e| e.to_string()) }
    });
    let numeric = ChargeIntegrator::new(&psi1, &pw, opts).and_then(|i| i.delta(x1, x2));
    let unit = ChargeIntegrator::new(&psi1, &pw, ChargeOptions::default()).and_then(|i| i.delta(x1, x2));

    for kind in &v.checks {
        let check = match kind {
            CheckKind::Analytic => analytic_check(cfg, &psi1, &pw, opts),
            CheckKind::IntegratedCurrent | CheckKind::Depletion | CheckKind::OraclePair => {
                let o = oracles.as_ref().expect("oracles computed");
                let name = match kind {
                    CheckKind::IntegratedCurrent => "integrated_current",
                    CheckKind::Depletion => "depletion",
                    _ => "oracle_pair",
                };
                let c = Check::new(name, v.tolerance);
                let lhs = match kind {
                    CheckKind::OraclePair => o.integrated.clone().map(|x| x.0),
                    _ => numeric.as_ref().map(|b| b.delta_qd).map_err(|e| e.to_string()),
                };
                let rhs = match kind {
                    CheckKind::IntegratedCurrent => o.integrated.clone().map(|x| x.0),
                    _ => o.depletion.clone(),
                };
                match (lhs, rhs) {
                    (Ok(a), Ok(b)) => {
                        let diff = (a - b).abs();
                        let mut c = c.value("lhs", a).value("rhs", b).value("difference", diff);
                        if let (Ok((_, spread)), false) = (&o.integrated, *kind == CheckKind::Depletion) {
                            c = c.value("extrapolation_spread", *spread);
                        }
                        c.passed = diff <= v.tolerance;
                        c
                    }
                    (Err(e), _) | (_, Err(e)) => c.failed(e),
                }
            }
            CheckKind::CoefficientResolution => {
                let o = oracles.as_ref().expect("oracles computed");
                let c = Check::new("coefficient_resolution", v.tolerance);
                match (&unit, &o.integrated, &o.depletion) {
                    (Ok(u), Ok((integ, _)), Ok(depl)) => {
                        let half = u.delta_q1 * 0.5 + u.delta_qc;
                        let unit_err = (u.delta_qd - integ).abs().max((u.delta_qd - depl).abs());
                        let half_err = (half - integ).abs().min((half - depl).abs());
                        let mut c = c
                            .value("density_integral", u.delta_q1)
                            .value("unit_coefficient", u.delta_qd)
                            .value("half_coefficient", half)
                            .value("unit_worst_error", unit_err)
                            .value("half_best_error", half_err);
                        c.passed = u.delta_q1 >= 0.5 && unit_err <= v.tolerance && half_err > 10.0 * v.tolerance;
                        c
                    }
                    (Err(e), _, _) => c.failed(e),
                    (_, Err(e), _) | (_, _, Err(e)) => c.failed(e),
                }
            }
        };
        checks.push(check);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report { scenario: Scenario::Verify, passed, config: cfg.clone(), checks })
}

fn analytic_check(cfg: &RunConfig, psi1: &WaveFunction<f64>, pw: &PlaneWave<f64>, opts: ChargeOptions<f64>) -> Check {
    let v = &cfg.verify;
    let c = Check::new("analytic", v.analytic_tolerance);
    let packet = match cfg.packet() {
        Ok(p) => p,
        Err(e) => return c.failed(e),
    };
    let integ = match ChargeIntegrator::new(psi1, pw, opts) {
        Ok(i) => i,
        Err(e) => return c.failed(e),
    };
    let probes = Range::linear(-v.analytic_extent, v.analytic_extent, v.analytic_points).values();
    let mut worst: f64 = 0.0;
    for &a in &probes {
        for &b in &probes {
            match integ.delta(a, b) {
                Ok(r) => worst = worst.max((r.delta_qd - packet.delta_qd_analytic(pw, a, b)).abs()),
                Err(e) => return c.failed(e),
            }
        }
    }
    let mut c = c.value("max_error", worst).value("probes", (probes.len() * probes.len()) as f64);
    c.passed = worst <= v.analytic_tolerance;
    c
}

/// Dispatches a scenario and writes its output to `out`. Returns the exit
/// code the process should end with.
pub fn run(scenario: Scenario, cfg: &RunConfig, out: impl Write) -> Result<i32, ScenarioError> {
    match scenario {
        Scenario::GaussMap => gauss_map(cfg)?.write(cfg, out).map(|_| EXIT_OK),
        Scenario::GaussScan => gauss_scan(cfg)?.write(cfg, out).map(|_| EXIT_OK),
        Scenario::LaserSweep => {
            let t = laser_sweep(cfg)?;
            t.write(cfg, out)?;
            match t.failed_rows() {
                0 => Ok(EXIT_OK),
                failed => Err(ScenarioError::RowsFailed { failed, total: t.rows.len() }),
            }
        }
        Scenario::Verify => {
            let r = verify(cfg)?;
            r.write(out)?;
            Ok(r.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(overrides: &[&str]) -> RunConfig {
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        RunConfig::load("{}", &o).unwrap()
    }

    #[test]
    fn map_is_antisymmetric_with_zero_diagonal() {
        let cfg = small(&["gauss_map.x1.count=9", "gauss_map.x2.count=9"]);
        let t = gauss_map(&cfg).unwrap();
        let v = t.column("delta_qd").unwrap();
        for i in 0..9 {
            assert_eq!(v[i * 9 + i], 0.0);
            for j in 0..9 {
                assert!((v[i * 9 + j] + v[j * 9 + i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_output_is_deterministic_and_carries_config() {
        let cfg = small(&["gauss_scan.x_g.count=5", "gauss_scan.p0.count=4"]);
        let mut a = Vec::new();
        let mut b = Vec::new();
        run(Scenario::GaussScan, &cfg, &mut a).unwrap();
        run(Scenario::GaussScan, &cfg, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let line = text.lines().find(|l| l.starts_with("# config: ")).unwrap();
        let back = RunConfig::from_json(line.trim_start_matches("# config: ")).unwrap();
        assert_eq!(back, cfg);
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], "x_g,p0,delta_qd");
        assert_eq!(data.len(), 1 + 20);
    }

    #[test]
    fn empty_check_list_passes() {
        let cfg = small(&["verify.checks=[]"]);
        let r = verify(&cfg).unwrap();
        assert!(r.passed && r.checks.is_empty());
        assert_eq!(r.exit_code(), EXIT_OK);
    }

    #[test]
    fn analytic_check_on_every_case() {
        for case in ["A", "B", "C", "D"] {
            let cfg = small(&[&format!("case={case}"), "verify.checks=[\"analytic\"]"]);
            let r = verify(&cfg).unwrap();
            assert!(r.passed, "{case}: {:?}", r.checks);
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(ScenarioError::from(crate::Error::Convergence("x".into())).exit_code(), EXIT_CONVERGENCE);
        assert_eq!(ScenarioError::from(crate::Error::InvalidParameter("x".into())).exit_code(), EXIT_CONFIG);
        assert_eq!(ScenarioError::from(ConfigError::Invalid("x".into())).exit_code(), EXIT_CONFIG);
    }
}
