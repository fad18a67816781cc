//! One function per subcommand. Each writes its files into `out` and returns
//! `Err` with the matching exit class on failure.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use radial_dirac::decay::{decay_report_from, threshold_sweep, DecayReport, SweepBase, SweepRow, C_MEASURE};
use radial_dirac::dynamics::{simulate, RunRecord, SimOptions, ENERGY_QUARTIC_SIGN};
use radial_dirac::oracles::{
    bf_profile, identity_sweep, select_static_convention, static_residual, BFProfile,
    ADOPTED_STATIC_CONVENTION,
};
use radial_dirac::virial::{coercivity_check, verify_virial_identity, CoercivityCheck, Functional};
use radial_dirac::weights::verify_weight_identities;
use radial_dirac::{ModelSpec, Nonlinearity, RadialGrid, WeightFamily};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::io::{self, fmt, fmt_opt};
use crate::CliError;

/// Finite-difference cross-check tolerance for the weight derivatives.
pub const WEIGHT_FD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub energy_quartic_sign: f64,
    pub static_honeycomb: String,
    pub c_measure: f64,
    pub nodes: String,
    pub measures: String,
}

impl Conventions {
    pub fn adopted() -> Self {
        Self {
            energy_quartic_sign: ENERGY_QUARTIC_SIGN,
            static_honeycomb: ADOPTED_STATIC_CONVENTION.label(),
            c_measure: C_MEASURE,
            nodes: "r_j = (j + 1/2) h, midpoint quadrature".into(),
            measures: "virial integrals in dr, norms in r dr without the angular 2 pi".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub created_unix: u64,
    pub version: String,
    pub config: RunConfig,
    pub conventions: Conventions,
    pub dt: f64,
    pub recordings: usize,
    pub snapshots: usize,
    pub blowup: bool,
    pub final_time: f64,
    pub mass_drift: f64,
    pub energy_drift: Option<f64>,
    pub sup_linf: f64,
    /// Present on small-data runs only.
    pub coercivity: Option<CoercivityCheck>,
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn prepare(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    Ok(())
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunRecord, CliError> {
    prepare(out)?;
    let model = cfg.model_spec()?;
    let run = simulate(&model, cfg.grid(), &cfg.initial_data(), cfg.dt(), cfg.time.tmax, &cfg.sim_options())?;
    io::write_timeseries(&out.join(io::TIMESERIES_FILE), &run)?;
    io::write_snapshots(
        &out.join(io::SNAPSHOTS_FILE),
        &run.snapshots,
        model.vorticity(),
        cfg.output.theta_samples,
    )?;
    let final_time = run.times.last().copied().unwrap_or(0.0);
    let meta = RunMeta {
        created_unix: now_unix(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        conventions: Conventions::adopted(),
        dt: run.dt,
        recordings: run.len(),
        snapshots: run.snapshots.len(),
        blowup: run.blowup_flag,
        final_time,
        mass_drift: run.mass_drift(),
        energy_drift: run.energy_drift(),
        sup_linf: run.sup_linf(),
        coercivity: if run.blowup_flag { None } else { coercivity_check(&run).ok() },
    };
    io::write_json(&out.join(io::META_FILE), &meta)?;
    if run.blowup_flag {
        return Err(CliError::Blowup { t: final_time });
    }
    Ok(run)
}

/// One line of residuals.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check: String,
    pub case: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual.is_finite() && self.residual < self.tolerance
    }
}

fn finish(checks: &[Check], path: &Path) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.check.clone(),
                c.case.clone(),
                fmt(c.residual),
                fmt(c.tolerance),
                (if c.passed() { "pass" } else { "fail" }).into(),
            ]
        })
        .collect();
    io::write_table(path, &["check", "case", "residual", "tolerance", "status"], &rows)?;
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("{} [{}] = {:e} >= {:e}", c.check, c.case, c.residual, c.tolerance))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

/// Weight identities, the integration-by-parts identities over the test-function sweep,
/// and the J and H identities along a run of the configured model.
pub fn identity_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let v = &cfg.verify;
    let grid = cfg.grid();
    let mut checks = Vec::new();
    for fam in [WeightFamily::Strong, WeightFamily::delta(0.1), WeightFamily::delta(1.0)] {
        let w = verify_weight_identities(fam, &grid)?;
        checks.push(Check { check: "weight_identity".into(), case: fam.name(), residual: w.identity, tolerance: v.weight_tol });
        checks.push(Check {
            check: "weight_fd".into(),
            case: fam.name(),
            residual: w.finite_difference,
            tolerance: WEIGHT_FD_TOL,
        });
    }
    for e in identity_sweep(&grid) {
        let case = format!("f{} {} K={}", e.function, e.weight.name(), e.k);
        checks.push(Check { check: "cl1_first".into(), case: case.clone(), residual: e.first.residual, tolerance: v.cl1_tol });
        checks.push(Check { check: "cl1_second".into(), case: case.clone(), residual: e.second.residual, tolerance: v.cl1_tol });
        checks.push(Check { check: "int0".into(), case, residual: e.int0, tolerance: v.int0_tol });
    }

    let model = cfg.model_spec()?;
    let opts = SimOptions { snapshot_every: 0, ..cfg.sim_options() };
    let run = simulate(&model, grid, &cfg.initial_data(), cfg.dt(), cfg.time.tmax, &opts)?;
    if run.blowup_flag {
        return Err(CliError::Blowup { t: run.times.last().copied().unwrap_or(0.0) });
    }
    let case = model_label(&model);
    for (name, which) in [("virial_j", Functional::J), ("virial_h", Functional::H)] {
        let c = verify_virial_identity(&run, which)?;
        checks.push(Check { check: name.into(), case: case.clone(), residual: c.relative(), tolerance: v.virial_rel_tol });
    }
    checks.push(Check {
        check: "assembled_vs_per_functional".into(),
        case,
        residual: assembled_rate_gap(&run),
        tolerance: v.virial_rel_tol,
    });
    Ok(checks)
}

/// Short comma-free description of a model for table cells.
pub fn model_label(model: &ModelSpec) -> String {
    let nl = match model.nonlinearity() {
        Nonlinearity::Zero => "linear".to_string(),
        Nonlinearity::Honeycomb { beta1, beta2, g } => format!("honeycomb b1={beta1} b2={beta2} g={g}"),
        Nonlinearity::Soler { g } => format!("soler g={g}"),
        Nonlinearity::PurePower { g, p } => format!("power p={p} g={g}"),
    };
    format!("{nl} m={} S={}", model.mass(), model.vorticity())
}

/// max |assembled dJ/dt - sum of per-functional rates| / max |assembled|.
pub fn assembled_rate_gap(run: &RunRecord) -> f64 {
    let gap = run
        .virial_series
        .iter()
        .map(|v| (v.dj_rhs - v.dj_rhs_prop).abs())
        .fold(0.0, f64::max);
    let scale = run.virial_series.iter().map(|v| v.dj_rhs.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        gap
    } else {
        gap / scale
    }
}

pub fn verify_identities(cfg: &RunConfig, out: &Path) -> Result<Vec<Check>, CliError> {
    prepare(out)?;
    let checks = identity_checks(cfg)?;
    finish(&checks, &out.join("residuals.csv"))?;
    Ok(checks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticRecord {
    pub vorticity: i64,
    pub lambda: f64,
    pub n: usize,
    pub rmax: f64,
    pub selected: String,
    pub adopted: String,
    pub selected_residual: f64,
    pub coarse_residual: f64,
    pub refinement_order: f64,
    pub separation: f64,
    pub residuals: Vec<(String, f64)>,
}

pub fn static_record(cfg: &RunConfig) -> Result<StaticRecord, CliError> {
    let s = &cfg.static_;
    let bf = BFProfile::new(s.vorticity, s.lambda)?;
    let grid = Arc::new(RadialGrid::new(s.rmax, s.n)?);
    let rep = select_static_convention(&bf, grid)?;
    let coarse_grid = Arc::new(RadialGrid::new(s.rmax, s.n / 2)?);
    let coarse = static_residual(&bf_profile(&bf, coarse_grid), s.vorticity, rep.selected)?;
    Ok(StaticRecord {
        vorticity: s.vorticity,
        lambda: s.lambda,
        n: s.n,
        rmax: s.rmax,
        selected: rep.selected.label(),
        adopted: ADOPTED_STATIC_CONVENTION.label(),
        selected_residual: rep.selected_residual,
        coarse_residual: coarse,
        refinement_order: (coarse / rep.selected_residual).log2(),
        separation: rep.separation,
        residuals: rep.residuals.iter().map(|(c, r)| (c.label(), *r)).collect(),
    })
}

pub fn verify_static(cfg: &RunConfig, out: &Path) -> Result<StaticRecord, CliError> {
    prepare(out)?;
    let rec = static_record(cfg)?;
    let rows: Vec<Vec<String>> = rec
        .residuals
        .iter()
        .map(|(label, r)| vec![label.clone(), fmt(*r), (label == &rec.selected).to_string()])
        .collect();
    io::write_table(&out.join("static.csv"), &["convention", "residual", "selected"], &rows)?;
    io::write_json(&out.join("convention.json"), &rec)?;
    let s = &cfg.static_;
    let mut failed = Vec::new();
    if !(rec.selected_residual < s.tol) {
        failed.push(format!("residual {:e} >= {:e}", rec.selected_residual, s.tol));
    }
    if !(rec.separation > s.separation) {
        failed.push(format!("separation {:e} <= {:e}", rec.separation, s.separation));
    }
    if rec.selected != rec.adopted {
        failed.push(format!("selected {} but dynamics use {}", rec.selected, rec.adopted));
    }
    if !(rec.refinement_order >= 2.0) {
        failed.push(format!("refinement order {:.3} < 2", rec.refinement_order));
    }
    if failed.is_empty() {
        Ok(rec)
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

pub fn sweep(cfg: &RunConfig, powers: &[f64], amplitudes: &[f64], out: &Path) -> Result<Vec<SweepRow>, CliError> {
    prepare(out)?;
    let base = SweepBase {
        grid: cfg.grid(),
        mass: cfg.model.mass,
        vorticity: cfg.model.vorticity,
        coupling: cfg.model.g,
        init: cfg.initial_data(),
        dt_factor: cfg.time.dt_factor,
        tmax: cfg.time.tmax,
        options: cfg.sim_options(),
    };
    let rows = threshold_sweep(&base, powers, amplitudes)?;
    let opt_usize = |x: Option<usize>| x.map_or_else(|| "nan".into(), |v| v.to_string());
    let opt_bool = |x: Option<bool>| x.map_or_else(|| "nan".into(), |v| v.to_string());
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt(r.power),
                fmt(r.amplitude),
                r.blowup.to_string(),
                fmt(r.mass_drift),
                fmt(r.sup_linf),
                opt_usize(r.coercivity_violations),
                fmt_opt(r.coercivity_constant),
                fmt_opt(r.terminal_over_max),
                opt_bool(r.decays),
            ]
        })
        .collect();
    io::write_table(
        &out.join("sweep.csv"),
        &[
            "power",
            "amplitude",
            "blowup",
            "mass_drift",
            "sup_linf",
            "coercivity_violations",
            "coercivity_constant",
            "terminal_over_max",
            "decays",
        ],
        &table,
    )?;
    Ok(rows)
}

/// Reads a run directory and writes decay.csv and decay.json into `out`.
/// `radii` defaults to the radii the run was configured with.
pub fn decay_report(run_dir: &Path, radii: Option<&[f64]>, out: &Path) -> Result<DecayReport, CliError> {
    let meta: RunMeta = io::read_json(&run_dir.join(io::META_FILE))?;
    let cfg = &meta.config;
    let grid = cfg.grid();
    let snapshots = io::read_snapshots(&run_dir.join(io::SNAPSHOTS_FILE))?
        .iter()
        .map(|s| s.to_snapshot(&grid))
        .collect::<Result<Vec<_>, _>>()?;
    let radii = radii.map_or_else(|| cfg.output.radii.clone(), |r| r.to_vec());
    for &r in &radii {
        if !(r > 0.0 && r <= grid.rmax()) {
            return Err(CliError::Config(format!("radius {r} outside (0, {}]", grid.rmax())));
        }
    }
    let rep = decay_report_from(&snapshots, &cfg.model_spec()?, cfg.weight_family(), &radii, cfg.weight.delta)?;
    prepare(out)?;
    let mut header: Vec<String> = ["t", "e_delta", "h", "coercive", "integrated_coercive"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(radii.iter().map(|r| format!("local_l2@{r}")));
    let rows: Vec<Vec<String>> = (0..rep.times.len())
        .map(|k| {
            let mut row = vec![
                fmt(rep.times[k]),
                fmt(rep.e_delta_series[k]),
                fmt(rep.h_series[k]),
                fmt(rep.coercive_series[k]),
                fmt(rep.integrated_coercive[k]),
            ];
            row.extend(rep.local_l2.iter().map(|series| fmt(series[k])));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    io::write_table(&out.join("decay.csv"), &header, &rows)?;
    io::write_json(&out.join("decay.json"), &rep)?;
    Ok(rep)
}
