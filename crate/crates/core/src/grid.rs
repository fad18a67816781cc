//! Staggered radial grid on (0, rmax) with midpoint quadrature and
//! fourth-order differentiation.

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n: usize,
    h: f64,
    rmax: f64,
    nodes: Vec<f64>,
}

impl RadialGrid {
    /// Nodes sit at cell midpoints `(j + 1/2) h`, so no node touches r = 0.
    pub fn new(rmax: f64, n: usize) -> Result<Self> {
        if !(rmax > 0.0 && rmax.is_finite()) {
            return Err(Error::Config(format!("rmax must be positive, got {rmax}")));
        }
        if n < MIN_NODES {
            return Err(Error::Config(format!(
                "grid needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        let h = rmax / n as f64;
        let nodes = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
        Ok(Self { n, h, rmax, nodes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn rmax(&self) -> f64 {
        self.rmax
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn r(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    /// Number of nodes with r_j < radius.
    pub fn count_below(&self, radius: f64) -> usize {
        self.nodes.partition_point(|&r| r < radius)
    }

    /// Midpoint rule for the integral of f dr.
    pub fn integrate_dr(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.n, "value array does not match grid");
        self.h * values.iter().sum::<f64>()
    }

    /// Midpoint rule for the integral of f r dr.
    pub fn integrate_rdr(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.n, "value array does not match grid");
        self.h * values.iter().zip(&self.nodes).map(|(f, r)| f * r).sum::<f64>()
    }

    /// Integral of f r dr restricted to nodes below `radius`.
    pub fn integrate_rdr_below(&self, values: &[f64], radius: f64) -> f64 {
        assert_eq!(values.len(), self.n, "value array does not match grid");
        let k = self.count_below(radius);
        self.h
            * values[..k]
                .iter()
                .zip(&self.nodes[..k])
                .map(|(f, r)| f * r)
                .sum::<f64>()
    }

    /// Fourth-order derivative used by the diagnostics: central stencil in
    /// the interior, one-sided five-point stencils at the two innermost nodes
    /// and zero ghost values past rmax.
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.derivative_into(values, &mut out);
        out
    }

    pub fn derivative_into(&self, f: &[f64], out: &mut [f64]) {
        let n = self.n;
        assert_eq!(f.len(), n, "value array does not match grid");
        assert_eq!(out.len(), n);
        let inv = 1.0 / (12.0 * self.h);
        out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * inv;
        out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * inv;
        central(f, out, 2, inv, 0.0, 0.0);
    }

    /// Fourth-order derivative with parity ghosts `f(-r) = parity * f(r)`
    /// mirrored through r = 0 and zero ghosts past rmax.
    pub fn derivative_parity_into(&self, f: &[f64], parity: f64, out: &mut [f64]) {
        let n = self.n;
        assert_eq!(f.len(), n, "value array does not match grid");
        assert_eq!(out.len(), n);
        let inv = 1.0 / (12.0 * self.h);
        // ghosts f[-1] = s f[0], f[-2] = s f[1]
        let gm1 = parity * f[0];
        let gm2 = parity * f[1];
        out[0] = (gm2 - 8.0 * gm1 + 8.0 * f[1] - f[2]) * inv;
        out[1] = (gm1 - 8.0 * f[0] + 8.0 * f[2] - f[3]) * inv;
        central(f, out, 2, inv, 0.0, 0.0);
    }
}

/// Central stencil from node `start` to the end; `tail1`, `tail2` are the
/// ghost values at n and n + 1.
fn central(f: &[f64], out: &mut [f64], start: usize, inv: f64, tail1: f64, tail2: f64) {
    let n = f.len();
    let at = |k: usize| -> f64 {
        if k < n {
            f[k]
        } else if k == n {
            tail1
        } else {
            tail2
        }
    };
    let stop = n.saturating_sub(2).max(start);
    for j in start..stop {
        out[j] = (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) * inv;
    }
    for j in stop..n {
        out[j] = (f[j - 2] - 8.0 * f[j - 1] + 8.0 * at(j + 1) - at(j + 2)) * inv;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn staggered_nodes() {
        let g = RadialGrid::new(8.0, 16).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.r(0), 0.25);
        assert_eq!(g.r(15), 7.75);
        let g = RadialGrid::new(40.0, 4096).unwrap();
        assert_abs_diff_eq!(g.h(), 0.009765625, epsilon = 1e-15);
        assert_abs_diff_eq!(g.r(0), 0.0048828125, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(RadialGrid::new(0.0, 16), Err(Error::Config(_))));
        assert!(matches!(RadialGrid::new(-1.0, 16), Err(Error::Config(_))));
        assert!(matches!(RadialGrid::new(1.0, 15), Err(Error::Config(_))));
    }

    #[test]
    fn quadrature_examples() {
        let g = RadialGrid::new(1.0, 100).unwrap();
        assert_eq!(g.integrate_dr(&vec![1.0; 100]), 1.0);
        assert_eq!(g.integrate_dr(&vec![0.0; 100]), 0.0);
        assert_eq!(g.integrate_rdr(&vec![0.0; 100]), 0.0);

        let g = RadialGrid::new(40.0, 4096).unwrap();
        let e: Vec<f64> = g.nodes().iter().map(|r| (-r).exp()).collect();
        // midpoint error is h^2/24 (f'(b) - f'(a)) = h^2/24 to leading order
        let err = (1.0 - (-40.0f64).exp()) - g.integrate_dr(&e);
        assert!(err.abs() < 5e-6);
        assert!((err / (g.h() * g.h() / 24.0) - 1.0).abs() < 1e-4, "{err}");
        let gauss: Vec<f64> = g.nodes().iter().map(|r| (-2.0 * r * r).exp()).collect();
        // r e^{-2r^2} has unit slope at the origin, so the midpoint error is -h^2/24
        let err = 0.25 - g.integrate_rdr(&gauss);
        assert!(err.abs() < 5e-6);
        assert!((err / (g.h() * g.h() / 24.0) + 1.0).abs() < 1e-4, "{err}");
        let sq: Vec<f64> = g
            .nodes()
            .iter()
            .map(|r| (0.1 * r * (-r * r).exp()).powi(2))
            .collect();
        assert!((g.integrate_rdr(&sq) - 0.00125).abs() < 1e-9);
    }

    #[test]
    fn quadrature_order_two() {
        let exact = 2.0; // integral of r^2 e^-r on (0, inf), tail below 1e-12 at rmax = 40
        let err = |n: usize| {
            let g = RadialGrid::new(40.0, n).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|r| r * r * (-r).exp()).collect();
            (g.integrate_dr(&f) - exact).abs()
        };
        for n in [64, 128, 256] {
            assert!(err(n) / err(2 * n) >= 3.9, "n = {n}");
        }
    }

    #[test]
    fn derivative_exact_on_quadratics() {
        let g = RadialGrid::new(4.0, 64).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        let d = g.derivative(&f);
        // the last two nodes see the zero ghosts
        for j in 0..62 {
            assert_abs_diff_eq!(d[j], 2.0 * g.r(j), epsilon = 1e-10);
        }
        let c = g.derivative(&vec![3.5; 64]);
        for v in &c[..62] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_order_four() {
        // sin does not vanish at rmax, so the error is measured away from the
        // two ghost-affected outer nodes.
        let err = |n: usize| {
            let g = RadialGrid::new(20.0, n).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|r| r.sin()).collect();
            let d = g.derivative(&f);
            (0..n - 2)
                .map(|j| (d[j] - g.r(j).cos()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(1024), err(2048));
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.2, "order {order}");
        assert!(e1 / e2 >= 15.0);
    }

    #[test]
    fn parity_derivative_matches_smooth_extension() {
        let g = RadialGrid::new(10.0, 512).unwrap();
        let odd: Vec<f64> = g.nodes().iter().map(|r| r * (-r * r).exp()).collect();
        let even: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        let mut d = vec![0.0; 512];
        g.derivative_parity_into(&odd, -1.0, &mut d);
        for j in 0..500 {
            let r = g.r(j);
            assert_abs_diff_eq!(d[j], (1.0 - 2.0 * r * r) * (-r * r).exp(), epsilon = 1e-6);
        }
        g.derivative_parity_into(&even, 1.0, &mut d);
        for j in 0..500 {
            let r = g.r(j);
            assert_abs_diff_eq!(d[j], -2.0 * r * (-r * r).exp(), epsilon = 1e-6);
        }
    }

    proptest! {
        #[test]
        fn quadrature_is_linear(
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
            xs in proptest::collection::vec(-1.0f64..1.0, 32),
            ys in proptest::collection::vec(-1.0f64..1.0, 32),
        ) {
            let g = RadialGrid::new(3.0, 32).unwrap();
            let comb: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| a * x + b * y).collect();
            let lhs = g.integrate_dr(&comb);
            let rhs = a * g.integrate_dr(&xs) + b * g.integrate_dr(&ys);
            prop_assert!((lhs - rhs).abs() < 1e-12);
            let lhs = g.integrate_rdr(&comb);
            let rhs = a * g.integrate_rdr(&xs) + b * g.integrate_rdr(&ys);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn nodes_positive_and_uniform(rmax in 0.1f64..100.0, n in 16usize..2000) {
            let g = RadialGrid::new(rmax, n).unwrap();
            prop_assert!(g.r(0) > 0.0);
            for w in g.nodes().windows(2) {
                prop_assert!((w[1] - w[0] - g.h()).abs() < 1e-9 * rmax);
            }
        }
    }
}
