//! Local decay diagnostics over a recorded run and sweeps over the
//! nonlinearity power.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate, InitialData, RunRecord, SimOptions, Snapshot};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::spinor::{local_l2, norms, ModelSpec, Nonlinearity};
use crate::virial::{coercivity_check, VirialContext, SMALL_DATA_LINF};
use crate::weights::WeightFamily;

pub const MIN_SNAPSHOTS: usize = 10;

/// Terminal local L2 must fall below this fraction of its running maximum.
pub const DECAY_FRACTION: f64 = 0.5;

/// Measure constant in ||phi||^2_{B(R)} <= (1+R)^3 H(t) c_measure. Both sides
/// use the same dropped angular factor and the inequality holds node by node.
pub const C_MEASURE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    /// local_l2[i][k]: radius i, snapshot k.
    pub local_l2: Vec<Vec<f64>>,
    pub e_delta_series: Vec<f64>,
    pub h_series: Vec<f64>,
    pub coercive_series: Vec<f64>,
    pub integrated_coercive: Vec<f64>,
    /// Terminal value over running maximum per radius; None for zero data.
    pub terminal_over_max: Vec<Option<f64>>,
    pub terminal_over_initial: Vec<Option<f64>>,
    pub decays: Vec<bool>,
    /// Largest ||phi||^2_{B(R)} / ((1+R)^3 H c_measure) over radii and times.
    pub domination_ratio: Option<f64>,
    pub domination_holds: bool,
    /// Largest |J1| / int (|grad phi|^2 + |phi|^2) r^a dr, a = 1 or 1 + delta.
    pub j1_bound_constant: Option<f64>,
}

pub fn decay_report(run: &RunRecord, radii: &[f64], delta: f64) -> Result<DecayReport> {
    decay_report_from(&run.snapshots, &run.model, run.options.weight, radii, delta)
}

pub fn decay_report_from(
    snapshots: &[Snapshot],
    model: &ModelSpec,
    weight: WeightFamily,
    radii: &[f64],
    delta: f64,
) -> Result<DecayReport> {
    if snapshots.len() < MIN_SNAPSHOTS {
        return Err(Error::Domain(format!(
            "decay report needs at least {MIN_SNAPSHOTS} snapshots, got {}",
            snapshots.len()
        )));
    }
    let grid = snapshots[0].field.grid_arc().clone();
    let ctx = VirialContext::new(grid.clone(), *model, weight);
    let bound_exp = match weight {
        WeightFamily::Delta { delta } => 1.0 + delta,
        _ => 1.0,
    };
    let bound_density: Vec<f64> = grid.nodes().iter().map(|r| r.powf(bound_exp)).collect();

    let mut rep = DecayReport {
        radii: radii.to_vec(),
        times: Vec::with_capacity(snapshots.len()),
        local_l2: vec![Vec::with_capacity(snapshots.len()); radii.len()],
        e_delta_series: Vec::new(),
        h_series: Vec::new(),
        coercive_series: Vec::new(),
        integrated_coercive: Vec::new(),
        terminal_over_max: Vec::new(),
        terminal_over_initial: Vec::new(),
        decays: Vec::new(),
        domination_ratio: None,
        domination_holds: true,
        j1_bound_constant: None,
    };
    for snap in snapshots {
        let f = &snap.field;
        rep.times.push(snap.t);
        let h = ctx.h_functional(f);
        rep.h_series.push(h);
        rep.e_delta_series.push(norms(f, delta).e_delta);
        let (cg, cf) = ctx.coercive(f);
        rep.coercive_series.push(cg + cf);
        for (i, &r) in radii.iter().enumerate() {
            let l = local_l2(f, r)?;
            rep.local_l2[i].push(l);
            let bound = (1.0 + r).powi(3) * h * C_MEASURE;
            if l > 0.0 {
                let ratio = l * l / bound;
                rep.domination_ratio = Some(rep.domination_ratio.map_or(ratio, |x: f64| x.max(ratio)));
                if ratio > 1.0 {
                    rep.domination_holds = false;
                }
            }
        }
        let dens: Vec<f64> = f
            .modulus_sq()
            .iter()
            .zip(f.gradient_sq())
            .zip(&bound_density)
            .map(|((m, g), w)| (m + g) * w)
            .collect();
        let denom = grid.integrate_dr(&dens);
        if denom > 0.0 {
            let c = ctx.functionals(f)[0].abs() / denom;
            rep.j1_bound_constant = Some(rep.j1_bound_constant.map_or(c, |x: f64| x.max(c)));
        }
    }
    let mut acc = 0.0;
    rep.integrated_coercive.push(0.0);
    for k in 1..rep.times.len() {
        acc += 0.5 * (rep.coercive_series[k] + rep.coercive_series[k - 1]) * (rep.times[k] - rep.times[k - 1]);
        rep.integrated_coercive.push(acc);
    }
    for series in &rep.local_l2 {
        let max = series.iter().copied().fold(0.0, f64::max);
        let last = *series.last().expect("non-empty");
        if max > 0.0 {
            rep.terminal_over_max.push(Some(last / max));
            rep.terminal_over_initial.push((series[0] > 0.0).then(|| last / series[0]));
            rep.decays.push(last < DECAY_FRACTION * max);
        } else {
            rep.terminal_over_max.push(None);
            rep.terminal_over_initial.push(None);
            rep.decays.push(false);
        }
    }
    Ok(rep)
}

/// Fixed part of a threshold sweep; power and amplitude vary per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBase {
    pub grid: Arc<RadialGrid>,
    pub mass: f64,
    pub vorticity: i64,
    pub coupling: f64,
    pub init: InitialData,
    pub dt_factor: f64,
    pub tmax: f64,
    pub options: SimOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub power: f64,
    pub amplitude: f64,
    pub blowup: bool,
    pub mass_drift: f64,
    pub sup_linf: f64,
    /// None when not applicable (zero data or data outside the small regime).
    pub coercivity_violations: Option<usize>,
    pub coercivity_constant: Option<f64>,
    pub terminal_over_max: Option<f64>,
    pub decays: Option<bool>,
}

pub fn threshold_sweep(base: &SweepBase, powers: &[f64], amplitudes: &[f64]) -> Result<Vec<SweepRow>> {
    for &p in powers {
        if !(p >= 3.0) {
            return Err(Error::Config(format!("sweep powers must be >= 3, got {p}")));
        }
    }
    let mut cases = Vec::new();
    for &p in powers {
        for &a in amplitudes {
            cases.push((p, a));
        }
    }
    crate::par::map(&cases, |&(p, a)| sweep_row(base, p, a))
        .into_iter()
        .collect()
}

fn sweep_row(base: &SweepBase, power: f64, amplitude: f64) -> Result<SweepRow> {
    let model = ModelSpec::new(
        base.mass,
        base.vorticity,
        Nonlinearity::PurePower { g: base.coupling, p: power },
    )?;
    let init = InitialData { amplitude, ..base.init };
    let mut opts = base.options.clone();
    if opts.snapshot_every == 0 {
        let steps = (base.tmax / (base.dt_factor * base.grid.h())).ceil() as usize;
        opts.snapshot_every = (steps / 32).max(1);
    }
    let run = simulate(
        &model,
        base.grid.clone(),
        &init,
        base.dt_factor * base.grid.h(),
        base.tmax,
        &opts,
    )?;
    let sup_linf = run.sup_linf();
    let applicable = amplitude > 0.0 && !run.blowup_flag && sup_linf < SMALL_DATA_LINF;
    let coercivity = if applicable { Some(coercivity_check(&run)?) } else { None };
    let decay = if amplitude > 0.0 && run.snapshots.len() >= MIN_SNAPSHOTS {
        let r0 = opts.radii.first().copied().unwrap_or(5.0);
        Some(decay_report(&run, &[r0], opts.delta)?)
    } else {
        None
    };
    Ok(SweepRow {
        power,
        amplitude,
        blowup: run.blowup_flag,
        mass_drift: run.mass_drift(),
        sup_linf,
        coercivity_violations: coercivity.map(|c| c.violations),
        coercivity_constant: coercivity.and_then(|c| c.c_estimate),
        terminal_over_max: decay.as_ref().and_then(|d| d.terminal_over_max[0]),
        decays: decay.as_ref().map(|d| d.decays[0]),
    })
}
