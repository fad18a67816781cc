//! Virial functionals J1, K1~, J2, K2~, their combination J, the functional
//! H, and the right-hand sides of their time derivatives.
//!
//! Every virial integral uses the measure dr.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::RunRecord;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::spinor::{eval_nonlinearity, ModelSpec, SpinorField};
use crate::weights::{quadratic_from_sample, WeightFamily, WeightSample};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VirialReport {
    pub j1: f64,
    pub k1t: f64,
    pub j2: f64,
    pub k2t: f64,
    pub j_total: f64,
    pub h_total: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub n4: f64,
    /// Assembled right side of dJ/dt.
    pub dj_rhs: f64,
    /// Sum of the four per-functional right sides.
    pub dj_rhs_prop: f64,
    pub dh_rhs: f64,
    pub coercive_grad: f64,
    pub coercive_field: f64,
}

/// Right sides of the time derivatives of the individual functionals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PerFunctional {
    pub dj1: f64,
    pub dk1t: f64,
    pub dj2: f64,
    pub dk2t: f64,
}

impl PerFunctional {
    pub fn combined(&self) -> f64 {
        self.dj1 + self.dk1t - self.dj2 - self.dk2t
    }
}

/// Weight samples and coefficient arrays for one (grid, model, weight).
pub struct VirialContext {
    grid: Arc<RadialGrid>,
    model: ModelSpec,
    weight: WeightFamily,
    ws: Vec<WeightSample>,
    hphi: Vec<f64>,
    hcg: Vec<f64>,
    cg: Vec<f64>,
    quad_s: Vec<f64>,
    quad_s1: Vec<f64>,
    grad_density: Vec<f64>,
    field_density: Vec<f64>,
}

impl VirialContext {
    pub fn new(grid: Arc<RadialGrid>, model: ModelSpec, weight: WeightFamily) -> Self {
        let ws = weight.sample_grid(&grid);
        let s = model.vorticity();
        let r = grid.nodes();
        let hs = WeightFamily::HWeight.sample_grid(&grid);
        let (grad_density, field_density) = coercive_densities(weight, r);
        Self {
            cg: ws.iter().zip(r).map(|(w, r)| w.d1 - w.phi / r).collect(),
            quad_s: ws.iter().zip(r).map(|(w, &r)| quadratic_from_sample(w, s, r)).collect(),
            quad_s1: ws.iter().zip(r).map(|(w, &r)| quadratic_from_sample(w, s + 1, r)).collect(),
            hphi: hs.iter().map(|w| w.phi).collect(),
            hcg: hs.iter().zip(r).map(|(w, r)| w.d1 - w.phi / r).collect(),
            grad_density,
            field_density,
            ws,
            grid,
            model,
            weight,
        }
    }

    pub fn weight(&self) -> WeightFamily {
        self.weight
    }

    fn derivs(&self, c: [&[f64]; 4]) -> [Vec<f64>; 4] {
        c.map(|v| self.grid.derivative(v))
    }

    /// J1, K1~, J2, K2~.
    pub fn functionals(&self, f: &SpinorField) -> [f64; 4] {
        let q = self.derivs(f.components());
        self.functionals_with(f, &q)
    }

    fn functionals_with(&self, f: &SpinorField, q: &[Vec<f64>; 4]) -> [f64; 4] {
        let s = self.model.vorticity() as f64;
        let m = self.model.mass();
        let r = self.grid.nodes();
        let [p11, p12, p21, p22] = f.components();
        let [q11, q12, q21, q22] = q;
        let (mut j1, mut k1, mut j2, mut k2) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..r.len() {
            let (phi, hd) = (self.ws[j].phi, 0.5 * self.ws[j].d1);
            let (a, b) = ((s + 1.0) / r[j], s / r[j]);
            j1 += (phi * q11[j] + hd * p11[j]) * (q22[j] + a * p22[j] - m * p12[j]);
            k1 += (phi * q22[j] + hd * p22[j]) * (q11[j] - b * p11[j] - m * p21[j]);
            j2 += (phi * q12[j] + hd * p12[j]) * (q21[j] + a * p21[j] - m * p11[j]);
            k2 += (phi * q21[j] + hd * p21[j]) * (q12[j] - b * p12[j] - m * p22[j]);
        }
        let h = self.grid.h();
        [h * j1, h * k1, h * j2, h * k2]
    }

    pub fn n_terms(&self, f: &SpinorField) -> [f64; 4] {
        let q = self.derivs(f.components());
        let w = eval_nonlinearity(&self.model, f);
        let v = self.derivs(w.components());
        self.n_terms_with(f, &q, w.components(), &v)
    }

    fn n_terms_with(
        &self,
        f: &SpinorField,
        q: &[Vec<f64>; 4],
        w: [&[f64]; 4],
        v: &[Vec<f64>; 4],
    ) -> [f64; 4] {
        let s = self.model.vorticity() as f64;
        let r = self.grid.nodes();
        let [p11, p12, p21, p22] = f.components();
        let [q11, q12, q21, q22] = q;
        let [w11, w12, w21, w22] = w;
        let [v11, v12, v21, v22] = v;
        let (mut n1, mut n2, mut n3, mut n4) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..r.len() {
            let ws = &self.ws[j];
            let rj = r[j];
            n1 += ws.d1 * (p11[j] * w11[j] + p12[j] * w12[j] - p21[j] * w21[j] - p22[j] * w22[j])
                + 2.0
                    * ws.phi
                    * (w11[j] * q11[j] + w12[j] * q12[j] - w21[j] * q21[j] - w22[j] * q22[j]);
            let g = ws.phi / rj;
            let gp = ws.d1 / rj - ws.phi / (rj * rj);
            n2 += -(2.0 * s + 1.0)
                * g
                * (q11[j] * w21[j] + q21[j] * w11[j] + q12[j] * w22[j] + q22[j] * w12[j])
                - gp * (s * w21[j] * p11[j]
                    + (s + 1.0) * w11[j] * p21[j]
                    + s * w22[j] * p12[j]
                    + (s + 1.0) * w12[j] * p22[j]);
            n3 += 0.5
                * (ws.d2 - ws.d1 / rj)
                * (w21[j] * p11[j] - w11[j] * p21[j] + w22[j] * p12[j] - w12[j] * p22[j]);
            n4 += -2.0
                * ws.phi
                * (v21[j] * q11[j] - v11[j] * q21[j] + v22[j] * q12[j] - v12[j] * q22[j]);
        }
        let h = self.grid.h();
        [h * n1, h * n2, h * n3, h * n4]
    }

    fn linear_dj(&self, f: &SpinorField, q: &[Vec<f64>; 4]) -> f64 {
        let [p11, p12, p21, p22] = f.components();
        let mut acc = 0.0;
        for j in 0..p11.len() {
            let grad = q[0][j] * q[0][j] + q[1][j] * q[1][j] + q[2][j] * q[2][j] + q[3][j] * q[3][j];
            acc += -self.cg[j] * grad
                - 0.25 * self.quad_s1[j] * (p21[j] * p21[j] + p22[j] * p22[j])
                - 0.25 * self.quad_s[j] * (p11[j] * p11[j] + p12[j] * p12[j]);
        }
        self.grid.h() * acc
    }

    /// Per-functional right sides, each with its own quadratic bracket.
    pub fn per_functional(&self, f: &SpinorField) -> PerFunctional {
        let q = self.derivs(f.components());
        let w = eval_nonlinearity(&self.model, f);
        let v = self.derivs(w.components());
        self.per_functional_with(f, &q, w.components(), &v)
    }

    fn per_functional_with(
        &self,
        f: &SpinorField,
        q: &[Vec<f64>; 4],
        w: [&[f64]; 4],
        v: &[Vec<f64>; 4],
    ) -> PerFunctional {
        let s = self.model.vorticity() as f64;
        let m = self.model.mass();
        let r = self.grid.nodes();
        let [p11, p12, p21, p22] = f.components();
        let [q11, q12, q21, q22] = q;
        let [w11, w12, w21, w22] = w;
        let [v11, v12, v21, v22] = v;
        let mut out = PerFunctional::default();
        for j in 0..r.len() {
            let ws = &self.ws[j];
            let rj = r[j];
            let (phi, hd) = (ws.phi, 0.5 * ws.d1);
            let plus = |g: f64, gd: f64| gd + (s + 1.0) / rj * g;
            let minus = |g: f64, gd: f64| gd - s / rj * g;
            let cg = 2.0 * ws.d1 - 2.0 * phi / rj;
            let qq = |k: f64| {
                2.0 * phi * k * k / rj.powi(3) + ws.d2 / (2.0 * rj) - ws.d1 / (2.0 * rj * rj)
                    - 0.5 * ws.d3
            };
            out.dj1 += (phi * v12[j] + hd * w12[j]) * (plus(p22[j], q22[j]) - m * p12[j])
                + (phi * q11[j] + hd * p11[j]) * (-plus(w21[j], v21[j]) + m * w11[j])
                - 0.5 * cg * q11[j] * q11[j]
                - 0.5 * qq(s) * p11[j] * p11[j];
            out.dk1t += -(phi * v21[j] + hd * w21[j]) * (minus(p11[j], q11[j]) - m * p21[j])
                + (phi * q22[j] + hd * p22[j]) * (minus(w12[j], v12[j]) - m * w22[j])
                - 0.5 * cg * q22[j] * q22[j]
                - 0.5 * qq(s + 1.0) * p22[j] * p22[j];
            out.dj2 += -(phi * v11[j] + hd * w11[j]) * (plus(p21[j], q21[j]) - m * p11[j])
                - (phi * q12[j] + hd * p12[j]) * (plus(-w22[j], -v22[j]) + m * w12[j])
                + 0.5 * cg * q12[j] * q12[j]
                + 0.5 * qq(s) * p12[j] * p12[j];
            out.dk2t += (phi * v22[j] + hd * w22[j]) * (minus(p12[j], q12[j]) - m * p22[j])
                - (phi * q21[j] + hd * p21[j]) * (minus(w11[j], v11[j]) - m * w21[j])
                + 0.5 * cg * q21[j] * q21[j]
                + 0.5 * qq(s + 1.0) * p21[j] * p21[j];
        }
        let h = self.grid.h();
        PerFunctional {
            dj1: h * out.dj1,
            dk1t: h * out.dk1t,
            dj2: h * out.dj2,
            dk2t: h * out.dk2t,
        }
    }

    pub fn h_functional(&self, f: &SpinorField) -> f64 {
        let m = f.modulus_sq();
        let d: Vec<f64> = m.iter().zip(&self.hphi).map(|(a, b)| a * b).collect();
        self.grid.integrate_dr(&d)
    }

    pub fn dh_rhs(&self, f: &SpinorField) -> f64 {
        let w = eval_nonlinearity(&self.model, f);
        let mut acc = 0.0;
        for j in 0..self.grid.n() {
            let [p11, p12, p21, p22] = f.node(j);
            acc += -2.0 * self.hcg[j] * (p11 * p22 - p12 * p21)
                + 2.0
                    * self.hphi[j]
                    * (p11 * w.w12[j] - p12 * w.w11[j] + p21 * w.w22[j] - p22 * w.w21[j]);
        }
        self.grid.h() * acc
    }

    pub fn coercive(&self, f: &SpinorField) -> (f64, f64) {
        let m = f.modulus_sq();
        let g = f.gradient_sq();
        let a: Vec<f64> = g.iter().zip(&self.grad_density).map(|(x, y)| x * y).collect();
        let b: Vec<f64> = m.iter().zip(&self.field_density).map(|(x, y)| x * y).collect();
        (self.grid.integrate_dr(&a), self.grid.integrate_dr(&b))
    }

    pub fn report(&self, f: &SpinorField) -> VirialReport {
        let q = self.derivs(f.components());
        let w = eval_nonlinearity(&self.model, f);
        let v = self.derivs(w.components());
        let [j1, k1t, j2, k2t] = self.functionals_with(f, &q);
        let [n1, n2, n3, n4] = self.n_terms_with(f, &q, w.components(), &v);
        let dj_rhs = self.linear_dj(f, &q) + self.model.mass() * n1 + n2 + n3 + n4;
        let prop = self.per_functional_with(f, &q, w.components(), &v);
        let (coercive_grad, coercive_field) = self.coercive(f);
        VirialReport {
            j1,
            k1t,
            j2,
            k2t,
            j_total: j1 + k1t - j2 - k2t,
            h_total: self.h_functional(f),
            n1,
            n2,
            n3,
            n4,
            dj_rhs,
            dj_rhs_prop: prop.combined(),
            dh_rhs: self.dh_rhs(f),
            coercive_grad,
            coercive_field,
        }
    }
}

/// Densities of the gradient and field integrals bounding -dJ/dt from below.
fn coercive_densities(weight: WeightFamily, r: &[f64]) -> (Vec<f64>, Vec<f64>) {
    match weight {
        WeightFamily::Delta { delta } => (
            r.iter().map(|&r| r.powf(2.0 + delta) / (1.0 + r).powi(2)).collect(),
            r.iter().map(|&r| r.powf(delta) / (1.0 + r).powi(2)).collect(),
        ),
        _ => (
            r.iter().map(|&r| r * r / (1.0 + r).powi(3)).collect(),
            r.iter().map(|&r| 1.0 / (1.0 + r).powi(3)).collect(),
        ),
    }
}

fn ctx(f: &SpinorField, model: &ModelSpec, weight: WeightFamily) -> VirialContext {
    VirialContext::new(f.grid_arc().clone(), *model, weight)
}

pub fn compute_j1(f: &SpinorField, model: &ModelSpec, weight: WeightFamily) -> f64 {
    ctx(f, model, weight).functionals(f)[0]
}

pub fn compute_k1t(f: &SpinorField, model: &ModelSpec, weight: WeightFamily) -> f64 {
    ctx(f, model, weight).functionals(f)[1]
}

pub fn compute_j2(f: &SpinorField, model: &ModelSpec, weight: WeightFamily) -> f64 {
    ctx(f, model, weight).functionals(f)[2]
}

pub fn compute_k2t(f: &SpinorField, model: &ModelSpec, weight: WeightFamily) -> f64 {
    ctx(f, model, weight).functionals(f)[3]
}

/// J = J1 + K1~ - J2 - K2~
pub fn compute_j(f: &SpinorField, model: &ModelSpec, weight: WeightFamily) -> f64 {
    let [a, b, c, d] = ctx(f, model, weight).functionals(f);
    a + b - c - d
}

pub fn compute_n_terms(f: &SpinorField, model: &ModelSpec, weight: WeightFamily) -> [f64; 4] {
    ctx(f, model, weight).n_terms(f)
}

pub fn compute_dj_rhs(f: &SpinorField, model: &ModelSpec, weight: WeightFamily) -> f64 {
    ctx(f, model, weight).report(f).dj_rhs
}

pub fn compute_per_functional(f: &SpinorField, model: &ModelSpec, weight: WeightFamily) -> PerFunctional {
    ctx(f, model, weight).per_functional(f)
}

pub fn compute_h(f: &SpinorField) -> f64 {
    let m = f.modulus_sq();
    let d: Vec<f64> = m
        .iter()
        .zip(f.grid().nodes())
        .map(|(a, &r)| a * r / (1.0 + r).powi(3))
        .collect();
    f.grid().integrate_dr(&d)
}

pub fn compute_dh_rhs(f: &SpinorField, model: &ModelSpec) -> f64 {
    ctx(f, model, WeightFamily::Strong).dh_rhs(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    J,
    H,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub max_rhs: f64,
}

impl IdentityCheck {
    /// max residual / max |RHS|, zero when both vanish.
    pub fn relative(&self) -> f64 {
        if self.max_rhs == 0.0 {
            if self.max_residual == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.max_residual / self.max_rhs
        }
    }
}

/// Centered differences of recorded functional values against the analytic
/// right side at the interior recording times.
pub fn verify_virial_identity(run: &RunRecord, which: Functional) -> Result<IdentityCheck> {
    if run.len() < 3 {
        return Err(Error::Domain("identity check needs at least 3 recordings".into()));
    }
    let (vals, rhs): (Vec<f64>, Vec<f64>) = run
        .virial_series
        .iter()
        .map(|v| match which {
            Functional::J => (v.j_total, v.dj_rhs),
            Functional::H => (v.h_total, v.dh_rhs),
        })
        .unzip();
    let t = &run.times;
    let residuals: Vec<f64> = (1..t.len() - 1)
        .map(|k| ((vals[k + 1] - vals[k - 1]) / (t[k + 1] - t[k - 1]) - rhs[k]).abs())
        .collect();
    Ok(IdentityCheck {
        max_residual: residuals.iter().copied().fold(0.0, f64::max),
        max_rhs: rhs.iter().map(|x| x.abs()).fold(0.0, f64::max),
        residuals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoercivityCheck {
    /// Smallest ratio of -dJ/dt to the coercive integrals; None when the
    /// coercive integrals vanish at every recording.
    pub c_estimate: Option<f64>,
    pub violations: usize,
    /// sup in time of the L-infinity norm.
    pub epsilon: f64,
}

pub const SMALL_DATA_LINF: f64 = 0.1;

pub fn coercivity_check(run: &RunRecord) -> Result<CoercivityCheck> {
    let epsilon = run.sup_linf();
    if epsilon >= SMALL_DATA_LINF {
        return Err(Error::Domain(format!(
            "coercivity is checked on small data only, sup |phi| = {epsilon}"
        )));
    }
    if run.len() < 3 {
        return Err(Error::Domain("coercivity check needs at least 3 recordings".into()));
    }
    let t = &run.times;
    let v = &run.virial_series;
    let mut c: Option<f64> = None;
    let mut violations = 0;
    for k in 1..t.len() - 1 {
        let sum = v[k].coercive_grad + v[k].coercive_field;
        if sum == 0.0 {
            continue;
        }
        let decay = -(v[k + 1].j_total - v[k - 1].j_total) / (t[k + 1] - t[k - 1]);
        let ratio = decay / sum;
        if ratio <= 0.0 {
            violations += 1;
        }
        c = Some(c.map_or(ratio, |c| c.min(ratio)));
    }
    Ok(CoercivityCheck {
        c_estimate: c,
        violations,
        epsilon,
    })
}
