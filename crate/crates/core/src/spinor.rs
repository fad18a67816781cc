//! Four-component radial spinor fields, model parameters and the
//! nonlinearity families.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    Zero,
    /// W1 = g(b1|f1|^2 + b2|f2|^2) f1, W2 = g(b2|f1|^2 + b1|f2|^2) f2
    Honeycomb { beta1: f64, beta2: f64, g: f64 },
    /// W1 = -g s f1, W2 = g s f2 with s = |f1|^2 - |f2|^2
    Soler { g: f64 },
    /// Wk = g |f|^(p-1) fk
    PurePower { g: f64, p: f64 },
}

impl Nonlinearity {
    /// Exponent p in |W| <= C |f|^p near zero.
    pub fn power(&self) -> Option<f64> {
        match *self {
            Nonlinearity::Zero => None,
            Nonlinearity::Honeycomb { .. } | Nonlinearity::Soler { .. } => Some(3.0),
            Nonlinearity::PurePower { p, .. } => Some(p),
        }
    }

    /// W at a single node, components ordered (w11, w12, w21, w22).
    pub fn at(&self, p: [f64; 4]) -> [f64; 4] {
        let [a, b, c, d] = p;
        let m1 = a * a + b * b;
        let m2 = c * c + d * d;
        let (c1, c2) = match *self {
            Nonlinearity::Zero => return [0.0; 4],
            Nonlinearity::Honeycomb { beta1, beta2, g } => {
                (g * (beta1 * m1 + beta2 * m2), g * (beta2 * m1 + beta1 * m2))
            }
            Nonlinearity::Soler { g } => {
                let s = m1 - m2;
                (-g * s, g * s)
            }
            Nonlinearity::PurePower { g, p } => {
                let c = g * (m1 + m2).powf(0.5 * (p - 1.0));
                (c, c)
            }
        };
        [c1 * a, c1 * b, c2 * c, c2 * d]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    mass: f64,
    vorticity: i64,
    nonlinearity: Nonlinearity,
}

impl ModelSpec {
    pub fn new(mass: f64, vorticity: i64, nonlinearity: Nonlinearity) -> Result<Self> {
        if vorticity == 0 || vorticity == -1 {
            return Err(Error::Config(format!(
                "vorticity S = {vorticity} is excluded; S must lie outside {{-1, 0}}"
            )));
        }
        if !mass.is_finite() {
            return Err(Error::Config("mass must be finite".into()));
        }
        if let Nonlinearity::PurePower { p, .. } = nonlinearity {
            if !(p >= 2.0) {
                return Err(Error::Config(format!("pure power exponent must be >= 2, got {p}")));
            }
        }
        Ok(Self {
            mass,
            vorticity,
            nonlinearity,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn vorticity(&self) -> i64 {
        self.vorticity
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: Arc<RadialGrid>,
    pub p11: Vec<f64>,
    pub p12: Vec<f64>,
    pub p21: Vec<f64>,
    pub p22: Vec<f64>,
}

impl SpinorField {
    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n();
        Self {
            grid,
            p11: vec![0.0; n],
            p12: vec![0.0; n],
            p21: vec![0.0; n],
            p22: vec![0.0; n],
        }
    }

    pub fn from_components(grid: Arc<RadialGrid>, c: [Vec<f64>; 4]) -> Result<Self> {
        if c.iter().any(|v| v.len() != grid.n()) {
            return Err(Error::Domain("component length does not match grid".into()));
        }
        let [p11, p12, p21, p22] = c;
        Ok(Self {
            grid,
            p11,
            p12,
            p21,
            p22,
        })
    }

    /// Fill each component from a closure of r.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> [f64; 4]) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..out.grid.n() {
            let v = f(out.grid.r(j));
            out.p11[j] = v[0];
            out.p12[j] = v[1];
            out.p21[j] = v[2];
            out.p22[j] = v[3];
        }
        out
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn components(&self) -> [&[f64]; 4] {
        [&self.p11, &self.p12, &self.p21, &self.p22]
    }

    pub fn components_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.p11, &mut self.p12, &mut self.p21, &mut self.p22]
    }

    pub fn node(&self, j: usize) -> [f64; 4] {
        [self.p11[j], self.p12[j], self.p21[j], self.p22[j]]
    }

    /// |phi|^2 at every node.
    pub fn modulus_sq(&self) -> Vec<f64> {
        (0..self.grid.n())
            .map(|j| {
                let [a, b, c, d] = self.node(j);
                a * a + b * b + c * c + d * d
            })
            .collect()
    }

    /// |grad phi|^2 at every node, radial derivatives only.
    pub fn gradient_sq(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.grid.n()];
        for c in self.components() {
            for (a, d) in acc.iter_mut().zip(self.grid.derivative(c)) {
                *a += d * d;
            }
        }
        acc
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        for c in out.components_mut() {
            c.iter_mut().for_each(|v| *v *= alpha);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    pub fn sup_abs(&self) -> f64 {
        self.modulus_sq().into_iter().fold(0.0, f64::max).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityValue {
    pub w11: Vec<f64>,
    pub w12: Vec<f64>,
    pub w21: Vec<f64>,
    pub w22: Vec<f64>,
}

impl NonlinearityValue {
    pub fn components(&self) -> [&[f64]; 4] {
        [&self.w11, &self.w12, &self.w21, &self.w22]
    }
}

pub fn eval_nonlinearity(model: &ModelSpec, field: &SpinorField) -> NonlinearityValue {
    let n = field.grid().n();
    let mut out = NonlinearityValue {
        w11: vec![0.0; n],
        w12: vec![0.0; n],
        w21: vec![0.0; n],
        w22: vec![0.0; n],
    };
    if model.nonlinearity == Nonlinearity::Zero {
        return out;
    }
    for j in 0..n {
        let w = model.nonlinearity.at(field.node(j));
        out.w11[j] = w[0];
        out.w12[j] = w[1];
        out.w21[j] = w[2];
        out.w22[j] = w[3];
    }
    out
}

/// Compares W evaluated on the phase-rotated ansatz data with the rotated W.
pub fn gauge_residual(model: &ModelSpec, sample: [f64; 4], theta: f64, s: i64) -> f64 {
    let nl = model.nonlinearity;
    let f1 = Complex64::new(sample[0], sample[1]);
    let f2 = Complex64::new(sample[2], sample[3]);
    let e1 = Complex64::from_polar(1.0, s as f64 * theta);
    let e2 = Complex64::i() * Complex64::from_polar(1.0, (s + 1) as f64 * theta);
    let (g1, g2) = (e1 * f1, e2 * f2);
    let lhs = nl.at([g1.re, g1.im, g2.re, g2.im]);
    let w = nl.at(sample);
    let r1 = e1 * Complex64::new(w[0], w[1]);
    let r2 = e2 * Complex64::new(w[2], w[3]);
    let rhs = [r1.re, r1.im, r2.re, r2.im];
    lhs.iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Largest (|W1| + |W2|) / |phi|^p over the grid.
pub fn power_bound_ratio(model: &ModelSpec, field: &SpinorField) -> Result<f64> {
    let sup = field.sup_abs();
    if sup >= 1.0 {
        return Err(Error::Domain(format!(
            "power bound is only asserted for |phi| < 1, field has sup {sup}"
        )));
    }
    let Some(p) = model.nonlinearity.power() else {
        return Ok(0.0);
    };
    let mut ratio = 0.0f64;
    for j in 0..field.grid().n() {
        let v = field.node(j);
        let modulus = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if modulus > 0.0 {
            let w = model.nonlinearity.at(v);
            let num = w[0].hypot(w[1]) + w[2].hypot(w[3]);
            ratio = ratio.max(num / modulus.powf(p));
        }
    }
    Ok(ratio)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2_rdr: f64,
    pub h1_rdr: f64,
    pub e_delta: f64,
    pub l_inf: f64,
}

/// Planar norms with the angular 2 pi dropped. `h1_rdr` is the square root
/// of the summed squared L2 and gradient norms.
pub fn norms(field: &SpinorField, delta: f64) -> Norms {
    let g = field.grid();
    let m = field.modulus_sq();
    let gr = field.gradient_sq();
    let l2sq = g.integrate_rdr(&m);
    let gradsq = g.integrate_rdr(&gr);
    let bracket: Vec<f64> = g.nodes().iter().map(|r| (1.0 + r * r).powf(0.5 * delta)).collect();
    let wm: Vec<f64> = m.iter().zip(&bracket).map(|(a, b)| a * b).collect();
    let wg: Vec<f64> = gr.iter().zip(&bracket).map(|(a, b)| a * b).collect();
    Norms {
        l2_rdr: l2sq.sqrt(),
        h1_rdr: (l2sq + gradsq).sqrt(),
        e_delta: g.integrate_rdr(&wg).sqrt() + g.integrate_rdr(&wm).sqrt(),
        l_inf: m.into_iter().fold(0.0, f64::max).sqrt(),
    }
}

/// L2(r dr) norm over the ball of radius `radius`.
pub fn local_l2(field: &SpinorField, radius: f64) -> Result<f64> {
    let g = field.grid();
    if !(radius > 0.0) || radius > g.rmax() {
        return Err(Error::Domain(format!(
            "ball radius {radius} outside (0, {}]",
            g.rmax()
        )));
    }
    Ok(g.integrate_rdr_below(&field.modulus_sq(), radius).sqrt())
}

/// sup r^(1/2)|phi| divided by the planar H1 norm, the latter including the
/// 2 pi angular factor.
pub fn strauss_ratio(field: &SpinorField) -> Result<f64> {
    let g = field.grid();
    let m = field.modulus_sq();
    let sup = m
        .iter()
        .zip(g.nodes())
        .map(|(v, r)| (r * v).sqrt())
        .fold(0.0, f64::max);
    if sup == 0.0 {
        return Err(Error::Domain("Strauss ratio of the zero field".into()));
    }
    let h1 = (2.0 * PI).sqrt() * norms(field, 0.0).h1_rdr;
    Ok(sup / h1)
}

/// Spinor values psi1, psi2 on an (r, theta) tensor grid, row-major in r.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianSpinor {
    pub thetas: Vec<f64>,
    pub psi1: Vec<Complex64>,
    pub psi2: Vec<Complex64>,
}

impl CartesianSpinor {
    pub fn at(&self, j: usize, k: usize) -> (Complex64, Complex64) {
        let idx = j * self.thetas.len() + k;
        (self.psi1[idx], self.psi2[idx])
    }
}

/// psi1 = phi1 e^(i S theta), psi2 = i phi2 e^(i (S+1) theta).
pub fn reconstruct_cartesian(
    field: &SpinorField,
    s: i64,
    theta_samples: usize,
) -> Result<CartesianSpinor> {
    if theta_samples < 4 {
        return Err(Error::Config(format!(
            "need at least 4 angular samples, got {theta_samples}"
        )));
    }
    let thetas: Vec<f64> = (0..theta_samples)
        .map(|k| 2.0 * PI * k as f64 / theta_samples as f64)
        .collect();
    let n = field.grid().n();
    let mut psi1 = Vec::with_capacity(n * theta_samples);
    let mut psi2 = Vec::with_capacity(n * theta_samples);
    for j in 0..n {
        let f1 = Complex64::new(field.p11[j], field.p12[j]);
        let f2 = Complex64::new(field.p21[j], field.p22[j]);
        for &t in &thetas {
            psi1.push(f1 * Complex64::from_polar(1.0, s as f64 * t));
            psi2.push(Complex64::i() * f2 * Complex64::from_polar(1.0, (s + 1) as f64 * t));
        }
    }
    Ok(CartesianSpinor {
        thetas,
        psi1,
        psi2,
    })
}
