//! Acceptance suite. Prints one PASS/FAIL line per criterion, then fails if
//! any criterion failed.

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use radial_dirac::decay::{decay_report, C_MEASURE};
use radial_dirac::dynamics::{simulate, InitialData, RunRecord, SimOptions};
use radial_dirac::oracles::{
    bf_profile, identity_sweep, select_static_convention, static_residual, BFProfile,
    ADOPTED_STATIC_CONVENTION,
};
use radial_dirac::spinor::strauss_ratio;
use radial_dirac::virial::{coercivity_check, verify_virial_identity, Functional};
use radial_dirac::weights::{combo_quadratic, m1_coefficient, verify_weight_identities};
use radial_dirac::{ModelSpec, Nonlinearity, RadialGrid, SpinorField, WeightFamily};
use radial_dirac_cli::commands::assembled_rate_gap;

const RMAX: f64 = 40.0;
const N: usize = 4096;
const TMAX: f64 = 5.0;

/// Measured orders of second-order quantities approach 2 from below on these
/// grids (H identity: 1.958, 1.989, 1.997 over n = 1024..8192).
const MIN_ORDER: f64 = 2.0 - 0.05;

struct Outcome {
    passed: bool,
    detail: String,
}

fn report(id: usize, name: &str, o: &Outcome) {
    let status = if o.passed { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "acceptance {status} [{id}] {name}: {}", o.detail).unwrap();
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn init() -> InitialData {
    InitialData {
        amplitude: 0.01,
        width: 0.7,
        center: 2.0,
        components: [1.0, 0.0, 0.0, -0.5],
    }
}

#[derive(Clone, Copy)]
struct RunSpec {
    label: &'static str,
    model: (f64, Nonlinearity),
    n: usize,
    dt_factor: f64,
    weight: WeightFamily,
    cfl: f64,
}

const HONEYCOMB: Nonlinearity = Nonlinearity::Honeycomb { beta1: 2.0, beta2: 1.0, g: 1.0 };

impl RunSpec {
    fn prod(label: &'static str, mass: f64, nl: Nonlinearity, weight: WeightFamily) -> Self {
        Self { label, model: (mass, nl), n: N, dt_factor: 0.25, weight, cfl: 0.5 }
    }

    fn run(&self) -> RunRecord {
        let grid = Arc::new(RadialGrid::new(RMAX, self.n).unwrap());
        let model = ModelSpec::new(self.model.0, 1, self.model.1).unwrap();
        let steps = (TMAX / (self.dt_factor * grid.h())).ceil() as usize;
        let opts = SimOptions {
            record_every: 1,
            snapshot_every: (steps / 32).max(1),
            cfl: self.cfl,
            weight: self.weight,
            delta: 0.1,
            radii: vec![5.0],
        };
        let run = simulate(&model, grid.clone(), &init(), self.dt_factor * grid.h(), TMAX, &opts).unwrap();
        assert!(!run.blowup_flag, "{} blew up", self.label);
        run
    }
}

struct Runs {
    specs: Vec<RunSpec>,
    records: Vec<RunRecord>,
}

impl Runs {
    fn get(&self, label: &str) -> &RunRecord {
        let i = self.specs.iter().position(|s| s.label == label).unwrap();
        &self.records[i]
    }

    /// Runs at the acceptance settings, excluding the coarse dt-order runs.
    fn acceptance(&self) -> impl Iterator<Item = (&'static str, &RunRecord)> {
        self.specs
            .iter()
            .zip(&self.records)
            .filter(|(s, _)| !s.label.starts_with("order"))
            .map(|(s, r)| (s.label, r))
    }
}

fn all_runs() -> Runs {
    let strong = WeightFamily::Strong;
    let delta = WeightFamily::delta(0.1);
    let pp = |p| Nonlinearity::PurePower { g: 1.0, p };
    let coarse = |label, dt_factor| RunSpec {
        label,
        model: (0.0, HONEYCOMB),
        n: 1024,
        dt_factor,
        weight: strong,
        cfl: 1.0,
    };
    let specs = vec![
        RunSpec::prod("linear", 0.0, Nonlinearity::Zero, strong),
        RunSpec { n: N / 2, ..RunSpec::prod("linear/2", 0.0, Nonlinearity::Zero, strong) },
        RunSpec::prod("honeycomb", 0.0, HONEYCOMB, strong),
        RunSpec { n: N / 2, ..RunSpec::prod("honeycomb/2", 0.0, HONEYCOMB, strong) },
        RunSpec::prod("power5 massless strong", 0.0, pp(5.0), strong),
        RunSpec::prod("power7 massive strong", 1.0, pp(7.0), strong),
        RunSpec::prod("power3 massless delta", 0.0, pp(3.0), delta),
        RunSpec::prod("power5 massive delta", 1.0, pp(5.0), delta),
        coarse("order dt=0.8h", 0.8),
        coarse("order dt=0.4h", 0.4),
        coarse("order dt=0.2h", 0.2),
    ];
    let records = radial_dirac::par::map(&specs, |s| s.run());
    Runs { specs, records }
}

fn weight_algebra() -> Outcome {
    let grid = RadialGrid::new(RMAX, N).unwrap();
    let mut worst: f64 = 0.0;
    for fam in [WeightFamily::Strong, WeightFamily::delta(0.1), WeightFamily::delta(1.0)] {
        worst = worst.max(verify_weight_identities(fam, &grid).unwrap().identity);
    }
    let q = combo_quadratic(WeightFamily::Strong, 1, 1.0);
    let m1 = m1_coefficient(1, 1.0, 0.0, 1.0);
    Outcome {
        passed: worst < 1e-10 && (q - 1.25).abs() < 1e-12 && m1 == 40.0,
        detail: format!("identity residual {worst:.2e}, quadratic(K=1, r=1) = {q}, m1 = {m1}"),
    }
}

fn integration_by_parts_identities() -> Outcome {
    let maxima = |n| {
        let grid = RadialGrid::new(RMAX, n).unwrap();
        let sweep = identity_sweep(&grid);
        assert_eq!(sweep.len(), 18);
        let m = |f: &dyn Fn(&radial_dirac::oracles::SweepEntry) -> f64| {
            sweep.iter().map(f).fold(0.0, f64::max)
        };
        (m(&|e| e.first.residual), m(&|e| e.second.residual), m(&|e| e.int0))
    };
    let (f1, s1, i1) = maxima(N / 2);
    let (f2, s2, i2) = maxima(N);
    let orders = [order(f1, f2), order(s1, s2), order(i1, i2)];
    Outcome {
        passed: f2 < 1e-6 && s2 < 1e-6 && i2 < 1e-8 && orders.iter().all(|&p| p >= MIN_ORDER),
        detail: format!(
            "cl1 first {f2:.2e}, cl1 second {s2:.2e}, int0 {i2:.2e}; orders {:.2} {:.2} {:.2}",
            orders[0], orders[1], orders[2]
        ),
    }
}

fn virial_identities(runs: &Runs) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for base in ["linear", "honeycomb"] {
        let fine = runs.get(base);
        let coarse = runs.get(&format!("{base}/2"));
        for (name, which) in [("J", Functional::J), ("H", Functional::H)] {
            let rf = verify_virial_identity(fine, which).unwrap().relative();
            let rc = verify_virial_identity(coarse, which).unwrap().relative();
            let p = order(rc, rf);
            passed &= rf < 1e-4 && p >= MIN_ORDER;
            parts.push(format!("{base} {name} {rf:.2e} (order {p:.2})"));
        }
        let gap = assembled_rate_gap(fine);
        passed &= gap < 1e-4;
        parts.push(format!("{base} assembled-vs-sum {gap:.1e}"));
    }
    Outcome { passed, detail: parts.join(", ") }
}

fn conservation(runs: &Runs) -> Outcome {
    let mut passed = true;
    let mut worst_mass: f64 = 0.0;
    for (_, r) in runs.acceptance() {
        worst_mass = worst_mass.max(r.mass_drift());
    }
    passed &= worst_mass < 1e-8;
    let energy = runs.get("honeycomb").energy_drift().unwrap();
    passed &= energy < 1e-6;
    let labels = ["order dt=0.8h", "order dt=0.4h", "order dt=0.2h"];
    let mass: Vec<f64> = labels.iter().map(|l| runs.get(l).mass_drift()).collect();
    let en: Vec<f64> = labels.iter().map(|l| runs.get(l).energy_drift().unwrap()).collect();
    let orders = [order(mass[0], mass[1]), order(mass[1], mass[2]), order(en[0], en[1]), order(en[1], en[2])];
    passed &= orders.iter().all(|&p| p >= 3.5);
    Outcome {
        passed,
        detail: format!(
            "max mass drift {worst_mass:.2e}, honeycomb energy drift {energy:.2e}; dt-halving orders mass {:.2} {:.2}, energy {:.2} {:.2}",
            orders[0], orders[1], orders[2], orders[3]
        ),
    }
}

fn coercivity(runs: &Runs) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for label in [
        "power5 massless strong",
        "power7 massive strong",
        "power3 massless delta",
        "power5 massive delta",
    ] {
        let c = coercivity_check(runs.get(label)).unwrap();
        passed &= c.violations == 0 && c.c_estimate.is_some_and(|c| c > 0.0);
        parts.push(format!(
            "{label}: {} violations, C {:.3e}",
            c.violations,
            c.c_estimate.unwrap_or(f64::NAN)
        ));
    }
    Outcome { passed, detail: parts.join(", ") }
}

fn static_oracle() -> Outcome {
    let bf = BFProfile::new(1, 1.0).unwrap();
    let rep = select_static_convention(&bf, Arc::new(RadialGrid::new(60.0, 2048).unwrap())).unwrap();
    let coarse_field = bf_profile(&bf, Arc::new(RadialGrid::new(60.0, 1024).unwrap()));
    let coarse = static_residual(&coarse_field, 1, rep.selected).unwrap();
    let p = order(coarse, rep.selected_residual);
    let worst_rejected = rep
        .residuals
        .iter()
        .filter(|(c, _)| *c != rep.selected)
        .map(|(_, r)| *r)
        .fold(f64::INFINITY, f64::min);
    let v1 = bf.at(1.0).0;
    let passed = rep.selected == ADOPTED_STATIC_CONVENTION
        && rep.selected_residual < 1e-4
        && p >= MIN_ORDER
        && worst_rejected > 1e-1
        && rep.separation > 1e3
        && (v1 - 6f64.sqrt() / 2.0).abs() < 1e-12;
    Outcome {
        passed,
        detail: format!(
            "{} residual {:.2e} (order {p:.2}), smallest rejected {worst_rejected:.2e}, separation {:.2e}, V(1) = {v1}",
            rep.selected.label(),
            rep.selected_residual,
            rep.separation
        ),
    }
}

fn decay_trend(runs: &Runs) -> Outcome {
    let rep = decay_report(runs.get("linear"), &[5.0], 0.1).unwrap();
    let terminal = rep.terminal_over_max[0].unwrap();
    let mut worst: f64 = 0.0;
    for (_, run) in runs.acceptance() {
        for (k, v) in run.virial_series.iter().enumerate() {
            for (i, &r) in run.options.radii.iter().enumerate() {
                let l = run.local_series[k][i];
                worst = worst.max(l * l / ((1.0 + r).powi(3) * v.h_total * C_MEASURE));
            }
        }
    }
    Outcome {
        passed: terminal < 0.5 && worst <= 1.0 && rep.domination_holds,
        detail: format!(
            "terminal/max local L2 at R=5 is {terminal:.3}; largest ||phi||^2_B(R) / ((1+R)^3 H) is {worst:.3}"
        ),
    }
}

fn strauss() -> Outcome {
    let grid = Arc::new(RadialGrid::new(RMAX, N).unwrap());
    let gauss = SpinorField::from_fn(grid.clone(), |r| [(-r * r).exp(), 0.0, 0.0, 0.0]);
    let g = strauss_ratio(&gauss).unwrap();
    // r|u|^2 <= (1/pi)||u|| ||grad u|| for radial u, so sup r^(1/2)|u| <= ||u||_H1 / sqrt(2 pi)
    let bound = 1.0 / (2.0 * PI).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let bumps: Vec<(usize, f64, f64, f64, i32)> = (0..rng.gen_range(1..4))
            .map(|_| {
                (
                    rng.gen_range(0..4),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(0.0..15.0),
                    rng.gen_range(0.3..3.0),
                    rng.gen_range(1..4),
                )
            })
            .collect();
        let field = SpinorField::from_fn(grid.clone(), |r| {
            let mut v = [0.0; 4];
            for &(c, a, center, width, k) in &bumps {
                v[c] += a * r.powi(k) * (-((r - center) / width).powi(2)).exp();
            }
            v
        });
        worst = worst.max(strauss_ratio(&field).unwrap());
    }
    Outcome {
        passed: (g / 0.2537 - 1.0).abs() < 0.01 && worst <= bound * (1.0 + 1e-3),
        detail: format!("gaussian ratio {g:.5}; max over 100 random fields {worst:.4} <= {bound:.4}"),
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("det.toml");
    std::fs::write(
        &cfg,
        "[grid]\nn = 512\nrmax = 20\n\n[model]\nnonlinearity = \"honeycomb\"\n\n[time]\ntmax = 1\n\n[output]\nsnapshot_every = 16\n",
    )
    .unwrap();
    let run_once = |name: &str| {
        let out = dir.path().join(name);
        let output = Command::new(env!("CARGO_BIN_EXE_radial-dirac"))
            .args(["run", "-c"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        (
            std::fs::read(out.join("timeseries.csv")).unwrap(),
            std::fs::read(out.join("snapshots.jsonl")).unwrap(),
        )
    };
    let a = run_once("a");
    let b = run_once("b");
    Outcome {
        passed: a == b && !a.0.is_empty(),
        detail: format!(
            "timeseries.csv {} bytes identical: {}; snapshots.jsonl identical: {}",
            a.0.len(),
            a.0 == b.0,
            a.1 == b.1
        ),
    }
}

#[test]
fn acceptance() {
    let runs = all_runs();
    let outcomes = [
        ("weight algebra", weight_algebra()),
        ("integration-by-parts identities", integration_by_parts_identities()),
        ("virial identities along dynamics", virial_identities(&runs)),
        ("conservation", conservation(&runs)),
        ("coercivity in the small-data power regimes", coercivity(&runs)),
        ("static oracle", static_oracle()),
        ("decay trend and H domination", decay_trend(&runs)),
        ("Strauss bound", strauss()),
        ("determinism", determinism()),
    ];
    for (i, (name, o)) in outcomes.iter().enumerate() {
        report(i + 1, name, o);
    }
    let failed: Vec<usize> = outcomes
        .iter()
        .enumerate()
        .filter(|(_, (_, o))| !o.passed)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
