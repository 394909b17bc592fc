//! Continuous degree-k Lagrange finite element spaces on a [`Mesh1D`].
//!
//! Degrees of freedom are the locally equidistant Lagrange points of each
//! cell, shared at cell interfaces.  Dirichlet constraints live at x = 0 and
//! x = 2.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
pub use crate::quadrature::{gauss_rule, QuadRule};

/// Values of all k+1 reference Lagrange basis functions at t ∈ [0, 1]
/// (nodes at i/k).
pub fn ref_basis(k: usize, t: f64) -> Vec<f64> {
    let nodes: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    (0..=k)
        .map(|j| {
            let mut v = 1.0;
            for m in 0..=k {
                if m != j {
                    v *= (t - nodes[m]) / (nodes[j] - nodes[m]);
                }
            }
            v
        })
        .collect()
}

/// Derivatives d/dt of the reference basis functions at t.
pub fn ref_basis_deriv(k: usize, t: f64) -> Vec<f64> {
    let nodes: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    (0..=k)
        .map(|j| {
            let mut sum = 0.0;
            for m in 0..=k {
                if m == j {
                    continue;
                }
                let mut prod = 1.0;
                for l in 0..=k {
                    if l != j && l != m {
                        prod *= (t - nodes[l]) / (nodes[j] - nodes[l]);
                    }
                }
                sum += prod / (nodes[j] - nodes[m]);
            }
            sum
        })
        .collect()
}

/// A continuous piecewise degree-k Lagrange space.
#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: Mesh1D,
    pub degree: usize,
    dof_x: Vec<f64>,
}

impl FeSpace {
    pub fn n_dofs(&self) -> usize {
        self.degree * self.mesh.n_cells() + 1
    }

    pub fn dof_coords(&self) -> &[f64] {
        &self.dof_x
    }

    /// Global dof indices of cell c, in local order.
    pub fn cell_dofs(&self, c: usize) -> std::ops::RangeInclusive<usize> {
        c * self.degree..=c * self.degree + self.degree
    }

    /// True for the two constrained boundary dofs.
    pub fn is_dirichlet(&self, dof: usize) -> bool {
        dof == 0 || dof == self.n_dofs() - 1
    }

    /// Global dof index sitting exactly at x = 1.
    pub fn interface_dof(&self) -> usize {
        self.degree * self.mesh.interface_index()
    }

    /// Shift of dof indices under x -> x + 1 on the translation-symmetric mesh.
    pub fn translation_offset(&self) -> usize {
        self.degree * self.mesh.n_cells() / 2
    }

    /// Cell containing x, with the left-cell convention at interfaces.
    pub fn find_cell(&self, x: f64) -> Result<usize> {
        let nodes = self.mesh.nodes();
        if x < 0.0 || x > 2.0 {
            return Err(Error::OutOfDomain(x, 0.0, 2.0));
        }
        // Largest cell index whose left node is strictly below x.
        let j = nodes.partition_point(|&n| n < x);
        Ok(j.saturating_sub(1).min(self.mesh.n_cells() - 1))
    }
}

/// Build the degree-k space on a mesh.
pub fn build_fespace(mesh: Mesh1D, degree: usize) -> Result<Arc<FeSpace>> {
    if degree < 1 {
        return Err(Error::InvalidConfig("FE degree must be >= 1".into()));
    }
    let n = mesh.n_cells();
    let mut dof_x = Vec::with_capacity(degree * n + 1);
    for c in 0..n {
        let (xl, xr) = (mesh.nodes()[c], mesh.nodes()[c + 1]);
        let h = xr - xl;
        for i in 0..degree {
            dof_x.push(xl + h * i as f64 / degree as f64);
        }
    }
    dof_x.push(mesh.nodes()[n]);
    Ok(Arc::new(FeSpace { mesh, degree, dof_x }))
}

/// Coefficient vector over a space, evaluable as a piecewise polynomial.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub space: Arc<FeSpace>,
    pub coeffs: Vec<f64>,
}

impl DiscreteField {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.n_dofs() {
            return Err(Error::DimensionMismatch { expected: space.n_dofs(), got: coeffs.len() });
        }
        Ok(DiscreteField { space, coeffs })
    }

    pub fn zero(space: Arc<FeSpace>) -> Self {
        let n = space.n_dofs();
        DiscreteField { space, coeffs: vec![0.0; n] }
    }

    /// Value (deriv = 0) or spatial derivative (deriv = 1); cell interfaces
    /// use the left-cell value.
    pub fn eval(&self, x: f64, deriv: usize) -> Result<f64> {
        let c = self.space.find_cell(x)?;
        let (xl, xr) = self.space.mesh.cell(c);
        let h = xr - xl;
        let t = (x - xl) / h;
        let k = self.space.degree;
        let basis = if deriv == 0 { ref_basis(k, t) } else { ref_basis_deriv(k, t) };
        let scale = if deriv == 0 { 1.0 } else { 1.0 / h };
        let mut v = 0.0;
        for (loc, g) in self.space.cell_dofs(c).enumerate() {
            v += self.coeffs[g] * basis[loc];
        }
        Ok(v * scale)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x, 0).unwrap()
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.eval(x, 1).unwrap()
    }

    /// CSV dump `x,u(x)` at the dofs plus `extra` uniform points per cell.
    pub fn to_csv(&self, extra: usize) -> String {
        let mut out = String::from("x,u\n");
        let mesh = &self.space.mesh;
        for c in 0..mesh.n_cells() {
            let (xl, xr) = mesh.cell(c);
            let samples = self.space.degree + extra;
            for i in 0..samples {
                let x = xl + (xr - xl) * i as f64 / samples as f64;
                out.push_str(&format!("{x:.10e},{:.10e}\n", self.value(x)));
            }
        }
        out.push_str(&format!("{:.10e},{:.10e}\n", 2.0, self.value(2.0)));
        out
    }
}

/// Piecewise Lagrange interpolation of g into the space.
pub fn interpolate<F: Fn(f64) -> f64>(space: &Arc<FeSpace>, g: F) -> DiscreteField {
    let coeffs = space.dof_x.iter().map(|&x| g(x)).collect();
    DiscreteField { space: space.clone(), coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_stype_mesh, MeshConfig, MeshFamily};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn uniform_mesh(n: usize) -> Mesh1D {
        // Capped transition value degenerates the Shishkin mesh to uniform.
        build_stype_mesh(&MeshConfig::stype(MeshFamily::Shishkin, n, 2.0, 1.0, 1.0)).unwrap()
    }

    #[test]
    fn dof_layout() {
        let sp = build_fespace(uniform_mesh(8), 1).unwrap();
        assert_eq!(sp.n_dofs(), 9);
        assert_eq!(sp.dof_coords(), uniform_mesh(8).nodes());

        let sp2 = build_fespace(uniform_mesh(8), 2).unwrap();
        assert_eq!(sp2.n_dofs(), 17);
        // interior dofs at the midpoints
        assert_abs_diff_eq!(sp2.dof_coords()[1], 0.125, epsilon = 1e-15);
        assert_eq!(sp2.dof_coords()[sp2.interface_dof()], 1.0);
    }

    #[test]
    fn partition_of_unity() {
        let sp = build_fespace(uniform_mesh(16), 3).unwrap();
        let ones = interpolate(&sp, |_| 1.0);
        for i in 0..=100 {
            let x = 2.0 * i as f64 / 100.0;
            assert_abs_diff_eq!(ones.value(x), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn linear_reproduction() {
        let sp = build_fespace(uniform_mesh(8), 1).unwrap();
        let f = interpolate(&sp, |x| 3.0 * x - 1.0);
        for &x in &[0.0, 0.3, 0.77, 1.0, 1.5, 2.0] {
            assert_abs_diff_eq!(f.value(x), 3.0 * x - 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(f.deriv(x), 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn quadratic_interpolation_error_midpoint() {
        // On one cell of width h, linear interpolation of x^2 errs h^2/4 at
        // the midpoint.
        let sp = build_fespace(uniform_mesh(8), 1).unwrap();
        let f = interpolate(&sp, |x| x * x);
        let h = 0.25;
        let mid = 0.125;
        assert_abs_diff_eq!((f.value(mid) - mid * mid).abs(), h * h / 4.0, epsilon = 1e-13);
    }

    #[test]
    fn hat_function_property() {
        let sp = build_fespace(uniform_mesh(8), 1).unwrap();
        let mut hat = DiscreteField::zero(sp.clone());
        hat.coeffs[3] = 1.0;
        assert_abs_diff_eq!(hat.value(sp.dof_coords()[3]), 1.0);
        assert_abs_diff_eq!(hat.value(sp.dof_coords()[2]), 0.0);
        assert_abs_diff_eq!(hat.value(sp.dof_coords()[4]), 0.0);
    }

    #[test]
    fn out_of_domain_rejected() {
        let sp = build_fespace(uniform_mesh(8), 1).unwrap();
        let f = interpolate(&sp, |x| x);
        assert!(f.eval(-0.1, 0).is_err());
        assert!(f.eval(2.1, 0).is_err());
    }

    #[test]
    fn layer_interpolation_rate_on_stype() {
        // max-norm error of interpolating exp(-alpha x / eps) decays like
        // (h + N^-1 max|psi'|)^{k+1} on sigma >= k+1 S-type meshes.
        let eps = 1e-6;
        let alpha = 1.0;
        for k in [1usize, 2] {
            let sigma = (k + 1) as f64;
            let mut prev: Option<(f64, f64)> = None;
            for n in [64usize, 128, 256, 512] {
                let mesh =
                    build_stype_mesh(&MeshConfig::stype(MeshFamily::Shishkin, n, sigma, alpha, eps))
                        .unwrap();
                let bound = {
                    let h = mesh.h_layer_min;
                    let psi = mesh.psi_prime_max.unwrap();
                    (h + psi / n as f64).powi(k as i32 + 1)
                };
                let sp = build_fespace(mesh, k).unwrap();
                let f = interpolate(&sp, |x| (-alpha * x / eps).exp());
                let mut err: f64 = 0.0;
                for c in 0..sp.mesh.n_cells() {
                    let (xl, xr) = sp.mesh.cell(c);
                    for i in 0..=20 {
                        let x = xl + (xr - xl) * i as f64 / 20.0;
                        err = err.max((f.value(x) - (-alpha * x / eps).exp()).abs());
                    }
                }
                if let Some((perr, pbound)) = prev {
                    let rate = (perr / err).ln() / (pbound / bound).ln();
                    assert!(rate > 0.8, "k={k} n={n}: rate vs bound {rate}");
                }
                prev = Some((err, bound));
            }
        }
    }

    proptest! {
        #[test]
        fn degree_reproduction(
            k in 1usize..5,
            coeff in proptest::collection::vec(-2.0f64..2.0, 5),
            x in 0.0f64..2.0,
        ) {
            let sp = build_fespace(uniform_mesh(8), k).unwrap();
            let poly = |x: f64| {
                coeff.iter().take(k + 1).enumerate().map(|(i, c)| c * x.powi(i as i32)).sum::<f64>()
            };
            let f = interpolate(&sp, poly);
            prop_assert!((f.value(x) - poly(x)).abs() < 1e-10);
        }
    }
}
