//! Assembly of the weighted bilinear form, load vector, weighted mass matrix
//! and triple-norm Gram matrix.
//!
//! The shift term couples test functions on (1, 2) to trial dofs one unit to
//! the left.  On the translation-symmetric meshes the shifted basis functions
//! coincide with translated ones, so the coupling is a pure index offset and
//! no geometric intersection of cells is ever needed.
//!
//! All matrices are over the interior dofs; Dirichlet rows and columns are
//! eliminated symmetrically (the boundary lift makes the eliminated
//! coefficients zero, so no right-hand-side correction arises).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fespace::{ref_basis, ref_basis_deriv, FeSpace};
use crate::quadrature::gauss_rule;
use crate::weights::WeightSpec;

pub type SpatialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Compressed-row sparse matrix.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut rows: Vec<usize> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if rows.last() == Some(&r) && col_idx.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                vals.push(v);
            }
        }
        let mut row_ptr = vec![0usize; n_rows + 1];
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { n_rows, n_cols, row_ptr, col_idx, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.col_idx[lo..hi].binary_search(&c) {
            Ok(pos) => self.vals[lo + pos],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for r in 0..self.n_rows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
        y
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut trip = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                trip.push((self.col_idx[k], r, self.vals[k]));
            }
        }
        SparseMatrix::from_triplets(self.n_cols, self.n_rows, trip)
    }

    /// (A + A^T) / 2, useful for coercivity checks.
    pub fn symmetric_part(&self) -> SparseMatrix {
        let mut trip = Vec::with_capacity(2 * self.nnz());
        for r in 0..self.n_rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                trip.push((r, self.col_idx[k], 0.5 * self.vals[k]));
                trip.push((self.col_idx[k], r, 0.5 * self.vals[k]));
            }
        }
        SparseMatrix::from_triplets(self.n_rows, self.n_cols, trip)
    }

    /// self + scale * other (matching dimensions required).
    pub fn add_scaled(&self, other: &SparseMatrix, scale: f64) -> Result<SparseMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_rows, got: other.n_rows });
        }
        let mut trip = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.n_rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                trip.push((r, self.col_idx[k], self.vals[k]));
            }
            for k in other.row_ptr[r]..other.row_ptr[r + 1] {
                trip.push((r, other.col_idx[k], scale * other.vals[k]));
            }
        }
        Ok(SparseMatrix::from_triplets(self.n_rows, self.n_cols, trip))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[k])] += self.vals[k];
            }
        }
        m
    }

    /// Coordinate text dump `i j value`, one entry per line.
    pub fn to_coordinate_string(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n_rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out.push_str(&format!("{r} {} {:.16e}\n", self.col_idx[k], self.vals[k]));
            }
        }
        out
    }
}

/// Coefficients of the stationary problem
/// −ε²u'' + a u + b u(·−1) = f with history Φ on [−1, 0] and u(2) given.
#[derive(Clone)]
pub struct StationaryCoefficients {
    pub a: SpatialFn,
    pub b: SpatialFn,
    pub f: SpatialFn,
    /// History data on [−1, 0]; Φ(0) is the left boundary value.
    pub phi: SpatialFn,
    pub right_value: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl std::fmt::Debug for StationaryCoefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StationaryCoefficients")
            .field("alpha", &self.alpha)
            .field("gamma", &self.gamma)
            .field("epsilon", &self.epsilon)
            .finish()
    }
}

impl StationaryCoefficients {
    pub fn new(
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        right_value: f64,
        alpha: f64,
        gamma: f64,
        epsilon: f64,
    ) -> Self {
        StationaryCoefficients {
            a: Arc::new(a),
            b: Arc::new(b),
            f: Arc::new(f),
            phi: Arc::new(phi),
            right_value,
            alpha,
            gamma,
            epsilon,
        }
    }

    /// Check a ≥ α² on a dense sample grid; the condition
    /// α² − ‖b‖∞ ≥ γ only produces a warning because the reference example
    /// of the tables violates it.
    pub fn validate(&self, n_samples: usize) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        let mut b_max: f64 = 0.0;
        for i in 0..=n_samples {
            let x = 2.0 * i as f64 / n_samples as f64;
            let av = (self.a)(x);
            if av < self.alpha * self.alpha - 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "a({x}) = {av} below alpha^2 = {}",
                    self.alpha * self.alpha
                )));
            }
            b_max = b_max.max((self.b)(x).abs());
        }
        if self.alpha * self.alpha - b_max < self.gamma {
            warnings.push(format!(
                "alpha^2 - max|b| = {} < gamma = {}; coercivity constant 1/2 not certified",
                self.alpha * self.alpha - b_max,
                self.gamma
            ));
        }
        Ok(warnings)
    }
}

pub fn default_quad_order(degree: usize) -> usize {
    degree + 2
}

/// Interior-dof index map: dof g -> g−1 for 1 ≤ g ≤ n−2.
pub fn n_interior(space: &FeSpace) -> usize {
    space.n_dofs() - 2
}

fn check_translation(space: &FeSpace) -> Result<()> {
    if !space.mesh.has_exact_translation() {
        return Err(Error::Structural(
            "shift assembly requires exact translation symmetry about x = 1".into(),
        ));
    }
    Ok(())
}

/// Tabulated reference basis at the quadrature nodes of a rule mapped to [0,1].
struct BasisTable {
    points: Vec<f64>,
    weights: Vec<f64>,
    phi: Vec<Vec<f64>>,
    dphi: Vec<Vec<f64>>,
}

fn basis_table(degree: usize, order: usize) -> Result<BasisTable> {
    let rule = gauss_rule(order)?;
    let points: Vec<f64> = rule.nodes.iter().map(|&t| 0.5 * (t + 1.0)).collect();
    let weights: Vec<f64> = rule.weights.iter().map(|&w| 0.5 * w).collect();
    let phi = points.iter().map(|&t| ref_basis(degree, t)).collect();
    let dphi = points.iter().map(|&t| ref_basis_deriv(degree, t)).collect();
    Ok(BasisTable { points, weights, phi, dphi })
}

/// Assemble the weighted bilinear form
/// B_β(u, v) = ε²⟨∂ₓu, β∂ₓv + β'v⟩ + ⟨a u, v⟩_β + ⟨b u(·−1), v⟩_{β,(1,2)}.
pub fn assemble_bilinear(
    space: &FeSpace,
    coeffs: &StationaryCoefficients,
    weight: &WeightSpec,
    quad_order: Option<usize>,
) -> Result<SparseMatrix> {
    check_translation(space)?;
    let k = space.degree;
    let order = quad_order.unwrap_or(default_quad_order(k));
    let tab = basis_table(k, order)?;
    let n_cells = space.mesh.n_cells();
    let offset = space.translation_offset();
    let n_int = n_interior(space);
    let eps2 = coeffs.epsilon * coeffs.epsilon;

    let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(n_cells * (k + 1) * (k + 1) * 2);
    for c in 0..n_cells {
        let (xl, xr) = space.mesh.cell(c);
        let h = xr - xl;
        let dofs: Vec<usize> = space.cell_dofs(c).collect();
        for (qp, (&t, &wq)) in tab.points.iter().zip(&tab.weights).enumerate() {
            let x = xl + h * t;
            let w = wq * h;
            let beta = weight.value(x);
            let dbeta = weight.derivative(x);
            let av = (coeffs.a)(x);
            let phi = &tab.phi[qp];
            let dphi = &tab.dphi[qp];
            for (i, &gi) in dofs.iter().enumerate() {
                if space.is_dirichlet(gi) {
                    continue;
                }
                for (j, &gj) in dofs.iter().enumerate() {
                    if !space.is_dirichlet(gj) {
                        let v = eps2 * (dphi[j] / h) * (beta * dphi[i] / h + dbeta * phi[i])
                            + av * phi[j] * phi[i] * beta;
                        trip.push((gi - 1, gj - 1, v * w));
                    }
                }
                // Shift block: test functions on (1,2) against trial dofs at x−1.
                if c >= n_cells / 2 {
                    let bv = (coeffs.b)(x);
                    if bv != 0.0 {
                        for (j, &gj) in dofs.iter().enumerate() {
                            let gcol = gj - offset;
                            if gcol >= 1 && gcol < space.n_dofs() - 1 {
                                trip.push((gi - 1, gcol - 1, bv * phi[j] * phi[i] * beta * w));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(SparseMatrix::from_triplets(n_int, n_int, trip))
}

/// Assemble the weighted load F_β(v) = ⟨f, v⟩_β − ⟨b Φ(·−1), v⟩_{β,(0,1)}.
pub fn assemble_load(
    space: &FeSpace,
    coeffs: &StationaryCoefficients,
    weight: &WeightSpec,
    quad_order: Option<usize>,
) -> Result<Vec<f64>> {
    let k = space.degree;
    let order = quad_order.unwrap_or(default_quad_order(k));
    let tab = basis_table(k, order)?;
    let n_cells = space.mesh.n_cells();
    let mut rhs = vec![0.0; n_interior(space)];
    for c in 0..n_cells {
        let (xl, xr) = space.mesh.cell(c);
        let h = xr - xl;
        let dofs: Vec<usize> = space.cell_dofs(c).collect();
        for (qp, (&t, &wq)) in tab.points.iter().zip(&tab.weights).enumerate() {
            let x = xl + h * t;
            let w = wq * h;
            let beta = weight.value(x);
            let mut source = (coeffs.f)(x);
            if c < n_cells / 2 {
                source -= (coeffs.b)(x) * (coeffs.phi)(x - 1.0);
            }
            let phi = &tab.phi[qp];
            for (i, &gi) in dofs.iter().enumerate() {
                if !space.is_dirichlet(gi) {
                    rhs[gi - 1] += source * phi[i] * beta * w;
                }
            }
        }
    }
    Ok(rhs)
}

/// Weighted mass matrix ⟨u, v⟩_β over interior dofs.
pub fn assemble_weighted_mass(
    space: &FeSpace,
    weight: &WeightSpec,
    quad_order: Option<usize>,
) -> Result<SparseMatrix> {
    let k = space.degree;
    let order = quad_order.unwrap_or(default_quad_order(k));
    let tab = basis_table(k, order)?;
    let n_cells = space.mesh.n_cells();
    let n_int = n_interior(space);
    let mut trip = Vec::with_capacity(n_cells * (k + 1) * (k + 1));
    for c in 0..n_cells {
        let (xl, xr) = space.mesh.cell(c);
        let h = xr - xl;
        let dofs: Vec<usize> = space.cell_dofs(c).collect();
        for (qp, (&t, &wq)) in tab.points.iter().zip(&tab.weights).enumerate() {
            let x = xl + h * t;
            let w = wq * h * weight.value(x);
            let phi = &tab.phi[qp];
            for (i, &gi) in dofs.iter().enumerate() {
                if space.is_dirichlet(gi) {
                    continue;
                }
                for (j, &gj) in dofs.iter().enumerate() {
                    if !space.is_dirichlet(gj) {
                        trip.push((gi - 1, gj - 1, phi[i] * phi[j] * w));
                    }
                }
            }
        }
    }
    Ok(SparseMatrix::from_triplets(n_int, n_int, trip))
}

/// Gram matrix of the weighted triple-norm
/// |||v|||²_β = ε²‖∂ₓv‖²_β + γ‖v‖²_β.
pub fn assemble_triple_gram(
    space: &FeSpace,
    weight: &WeightSpec,
    epsilon: f64,
    gamma: f64,
    quad_order: Option<usize>,
) -> Result<SparseMatrix> {
    let k = space.degree;
    let order = quad_order.unwrap_or(default_quad_order(k));
    let tab = basis_table(k, order)?;
    let n_cells = space.mesh.n_cells();
    let n_int = n_interior(space);
    let eps2 = epsilon * epsilon;
    let mut trip = Vec::with_capacity(n_cells * (k + 1) * (k + 1));
    for c in 0..n_cells {
        let (xl, xr) = space.mesh.cell(c);
        let h = xr - xl;
        let dofs: Vec<usize> = space.cell_dofs(c).collect();
        for (qp, (&t, &wq)) in tab.points.iter().zip(&tab.weights).enumerate() {
            let x = xl + h * t;
            let w = wq * h * weight.value(x);
            let phi = &tab.phi[qp];
            let dphi = &tab.dphi[qp];
            for (i, &gi) in dofs.iter().enumerate() {
                if space.is_dirichlet(gi) {
                    continue;
                }
                for (j, &gj) in dofs.iter().enumerate() {
                    if !space.is_dirichlet(gj) {
                        let v = eps2 * (dphi[i] / h) * (dphi[j] / h) + gamma * phi[i] * phi[j];
                        trip.push((gi - 1, gj - 1, v * w));
                    }
                }
            }
        }
    }
    Ok(SparseMatrix::from_triplets(n_int, n_int, trip))
}
