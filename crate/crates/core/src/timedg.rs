//! dG(q) time stepping for the parabolic problem
//! ∂ₜu − ε²∂ₓₓu + a u + b u(·−1, t) = f on (0,2) × (0,T].
//!
//! Each time slab carries a degree-q polynomial represented by its values at
//! the right Gauss-Radau points; the final Radau node sits at the slab end,
//! so the outgoing trace is the last coefficient vector.  Unknowns are
//! interleaved as (spatial dof) × (Radau index), which keeps the spatial
//! left/right block structure intact for [`TranslationSolver`].

use std::sync::Arc;

use crate::assembly::{
    assemble_bilinear, assemble_load, assemble_weighted_mass, SparseMatrix,
    StationaryCoefficients,
};
use crate::error::{Error, Result};
use crate::fespace::{DiscreteField, FeSpace};
use crate::linsolve::{lu_factor, Factorization, TranslationSolver};
pub use crate::quadrature::{radau_rule, TimeQuadRule};
use crate::weights::WeightSpec;

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The time-dependent problem data.
#[derive(Clone)]
pub struct ProblemSpec {
    pub a: SpaceTimeFn,
    pub b: SpaceTimeFn,
    pub f: SpaceTimeFn,
    /// history Φ(s, t) for s in [−1, 0]; Φ(0, t) is the left boundary value
    pub phi: SpaceTimeFn,
    /// right boundary value Ψ(t)
    pub psi: TimeFn,
    pub u0: SpaceFn,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub t_final: f64,
    /// a and b do not depend on t: slab matrices can be factored once
    pub coeffs_autonomous: bool,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("alpha", &self.alpha)
            .field("gamma", &self.gamma)
            .field("epsilon", &self.epsilon)
            .field("t_final", &self.t_final)
            .field("coeffs_autonomous", &self.coeffs_autonomous)
            .finish()
    }
}

impl ProblemSpec {
    /// The running example: a = 2 cosh(x−1), b = −(1 + x²/2), f = e^{x/2},
    /// zero right boundary and initial data, history φ(x) independent of t.
    pub fn reference_example(epsilon: f64, history: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ProblemSpec {
            a: Arc::new(|x, _| 2.0 * (x - 1.0).cosh()),
            b: Arc::new(|x, _| -(1.0 + x * x / 2.0)),
            f: Arc::new(|x, _| (x / 2.0).exp()),
            phi: Arc::new(move |s, _| history(s)),
            psi: Arc::new(|_| 0.0),
            u0: Arc::new(|_| 0.0),
            alpha: 2f64.sqrt(),
            gamma: 1.0,
            epsilon,
            t_final: 1.0,
            coeffs_autonomous: true,
        }
    }

    /// Spatial coefficients with t frozen; f carries the lift corrections
    /// added by the caller.
    fn frozen(&self, t: f64, f: SpaceFn, phi: SpaceFn) -> StationaryCoefficients {
        let a = self.a.clone();
        let b = self.b.clone();
        StationaryCoefficients {
            a: Arc::new(move |x| a(x, t)),
            b: Arc::new(move |x| b(x, t)),
            f,
            phi,
            right_value: 0.0,
            alpha: self.alpha,
            gamma: self.gamma,
            epsilon: self.epsilon,
        }
    }

    /// Check parameter sanity and the pointwise lower bound on a over sampled
    /// times; returns warnings for soft issues (compatibility of initial and
    /// boundary data, weak gamma margin).
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.t_final > 0.0) {
            return Err(Error::InvalidConfig(format!("t_final must be positive, got {}", self.t_final)));
        }
        let mut warnings = Vec::new();
        let n_t = 33;
        for i in 0..n_t {
            let t = self.t_final * i as f64 / (n_t - 1) as f64;
            let f = self.f.clone();
            let phi = self.phi.clone();
            let frozen = self.frozen(t, Arc::new(move |x| f(x, t)), Arc::new(move |s| phi(s, t)));
            let w = frozen.validate(256)?;
            if i == 0 {
                warnings.extend(w);
            }
        }
        let d0 = ((self.u0)(0.0) - (self.phi)(0.0, 0.0)).abs();
        if d0 > 1e-10 * (1.0 + (self.u0)(0.0).abs()) {
            warnings.push(format!("initial and left boundary data disagree at the corner (gap {d0:.3e})"));
        }
        let d2 = ((self.u0)(2.0) - (self.psi)(0.0)).abs();
        if d2 > 1e-10 * (1.0 + (self.u0)(2.0).abs()) {
            warnings.push(format!("initial and right boundary data disagree at the corner (gap {d2:.3e})"));
        }
        Ok(warnings)
    }

    /// Affine-in-x boundary lift l(x, t).
    pub fn lift(&self, x: f64, t: f64) -> f64 {
        (1.0 - x / 2.0) * (self.phi)(0.0, t) + (x / 2.0) * (self.psi)(t)
    }

    fn lift_time_derivative(&self, x: f64, t: f64) -> f64 {
        // central difference; one-sided at t = 0
        let h = 1e-5 * self.t_final.max(1.0);
        let (t0, t1) = if t < h { (t, t + h) } else { (t - h, t + h) };
        (self.lift(x, t1) - self.lift(x, t0)) / (t1 - t0)
    }
}

/// Which temporal limit to take at a slab breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSide {
    Left,
    Right,
}

/// Partition of (0, T] into slabs.
#[derive(Debug, Clone)]
pub struct TimeMesh {
    pub nodes: Vec<f64>,
}

impl TimeMesh {
    pub fn uniform(t_final: f64, n_slabs: usize) -> Result<Self> {
        if n_slabs == 0 || t_final <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "need n_slabs > 0 and t_final > 0; got {n_slabs}, {t_final}"
            )));
        }
        let nodes = (0..=n_slabs).map(|i| t_final * i as f64 / n_slabs as f64).collect();
        Ok(TimeMesh { nodes })
    }

    pub fn n_slabs(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn slab(&self, m: usize) -> (f64, f64) {
        (self.nodes[m], self.nodes[m + 1])
    }

    /// Slab containing t, with slabs half-open to the left: (t_{m-1}, t_m].
    pub fn find_slab(&self, t: f64) -> Result<usize> {
        let t_end = *self.nodes.last().unwrap();
        if t < 0.0 || t > t_end * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain(t, 0.0, t_end));
        }
        let m = self.nodes.partition_point(|&n| n < t);
        Ok(m.saturating_sub(1).min(self.n_slabs() - 1))
    }
}

/// Lagrange basis value L_r(t) over the given nodes.
pub fn lagrange_value(nodes: &[f64], r: usize, t: f64) -> f64 {
    let mut v = 1.0;
    for (m, &nm) in nodes.iter().enumerate() {
        if m != r {
            v *= (t - nm) / (nodes[r] - nm);
        }
    }
    v
}

/// Lagrange basis derivative L_r'(t) over the given nodes.
pub fn lagrange_deriv(nodes: &[f64], r: usize, t: f64) -> f64 {
    let mut sum = 0.0;
    for m in 0..nodes.len() {
        if m == r {
            continue;
        }
        let mut prod = 1.0;
        for l in 0..nodes.len() {
            if l != r && l != m {
                prod *= (t - nodes[l]) / (nodes[r] - nodes[l]);
            }
        }
        sum += prod / (nodes[r] - nodes[m]);
    }
    sum
}

/// Space-time solution: per slab, the homogenized interior coefficient
/// vectors at the Radau times, plus the lift to reconstruct the full field.
pub struct SpaceTimeSolution {
    pub space: Arc<FeSpace>,
    pub time_mesh: TimeMesh,
    pub rule: TimeQuadRule,
    /// coeffs[m][r]: interior dofs of the homogenized solution at Radau node
    /// r of slab m
    coeffs: Vec<Vec<Vec<f64>>>,
    /// homogenized initial trace (interior dofs)
    u0_minus: Vec<f64>,
    problem: ProblemSpec,
}

impl SpaceTimeSolution {
    pub fn q(&self) -> usize {
        self.rule.q
    }

    /// Physical Radau times of slab m.
    pub fn radau_times(&self, m: usize) -> Vec<f64> {
        let (t0, t1) = self.time_mesh.slab(m);
        self.rule.nodes.iter().map(|&th| t0 + (t1 - t0) * (th + 1.0) / 2.0).collect()
    }

    fn homog_value(&self, x: f64, t: f64, deriv: usize) -> Result<f64> {
        if t == 0.0 {
            return self.eval_interior_vec(&self.u0_minus, x, deriv);
        }
        let m = self.time_mesh.find_slab(t)?;
        let (t0, t1) = self.time_mesh.slab(m);
        let th = 2.0 * (t - t0) / (t1 - t0) - 1.0;
        let mut v = 0.0;
        for (r, vec) in self.coeffs[m].iter().enumerate() {
            let lr = lagrange_value(&self.rule.nodes, r, th);
            if lr != 0.0 {
                v += lr * self.eval_interior_vec(vec, x, deriv)?;
            }
        }
        Ok(v)
    }

    fn eval_interior_vec(&self, vec: &[f64], x: f64, deriv: usize) -> Result<f64> {
        let c = self.space.find_cell(x)?;
        let (xl, xr) = self.space.mesh.cell(c);
        let h = xr - xl;
        let tloc = (x - xl) / h;
        let k = self.space.degree;
        let basis = if deriv == 0 {
            crate::fespace::ref_basis(k, tloc)
        } else {
            crate::fespace::ref_basis_deriv(k, tloc)
        };
        let scale = if deriv == 0 { 1.0 } else { 1.0 / h };
        let mut v = 0.0;
        for (loc, g) in self.space.cell_dofs(c).enumerate() {
            if g >= 1 && g < self.space.n_dofs() - 1 {
                v += vec[g - 1] * basis[loc];
            }
        }
        Ok(v * scale)
    }

    /// One-sided evaluation at breakpoints: `Left` takes the polynomial of
    /// the slab ending at t (the default convention), `Right` the polynomial
    /// of the slab starting at t extrapolated to its left end.
    pub fn eval_sided(&self, x: f64, t: f64, side: TimeSide) -> Result<f64> {
        match side {
            TimeSide::Left => self.eval(x, t, 0),
            TimeSide::Right => {
                let is_node = self.time_mesh.nodes.iter().position(|&n| n == t);
                match is_node {
                    Some(m) if m < self.time_mesh.n_slabs() => {
                        let mut v = 0.0;
                        for (r, vec) in self.coeffs[m].iter().enumerate() {
                            let lr = lagrange_value(&self.rule.nodes, r, -1.0);
                            if lr != 0.0 {
                                v += lr * self.eval_interior_vec(vec, x, 0)?;
                            }
                        }
                        Ok(v + self.problem.lift(x, t))
                    }
                    _ => self.eval(x, t, 0),
                }
            }
        }
    }

    /// Jump [U]_m(x) = right limit − left limit at breakpoint index m.
    pub fn jump(&self, x: f64, m: usize) -> Result<f64> {
        let t = self.time_mesh.nodes[m];
        Ok(self.eval_sided(x, t, TimeSide::Right)? - self.eval_sided(x, t, TimeSide::Left)?)
    }

    /// Value (deriv = 0) or spatial derivative (deriv = 1) of the full
    /// solution at (x, t).
    pub fn eval(&self, x: f64, t: f64, deriv: usize) -> Result<f64> {
        let homog = self.homog_value(x, t, deriv)?;
        let lift = match deriv {
            0 => self.problem.lift(x, t),
            1 => ((self.problem.psi)(t) - (self.problem.phi)(0.0, t)) / 2.0,
            _ => return Err(Error::InvalidConfig("deriv must be 0 or 1".into())),
        };
        Ok(homog + lift)
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.eval(x, t, 0).unwrap()
    }

    /// Full-dof spatial field at time t (slab-local Lagrange interpolation in
    /// time; exact because the discrete solution is P_q per slab).
    pub fn sample_at_time(&self, t: f64) -> Result<DiscreteField> {
        let mut full = vec![0.0; self.space.n_dofs()];
        if t == 0.0 {
            for (i, &v) in self.u0_minus.iter().enumerate() {
                full[i + 1] = v;
            }
        } else {
            let m = self.time_mesh.find_slab(t)?;
            let (t0, t1) = self.time_mesh.slab(m);
            let th = 2.0 * (t - t0) / (t1 - t0) - 1.0;
            for (r, vec) in self.coeffs[m].iter().enumerate() {
                let lr = lagrange_value(&self.rule.nodes, r, th);
                for (i, &v) in vec.iter().enumerate() {
                    full[i + 1] += lr * v;
                }
            }
        }
        for (g, c) in full.iter_mut().enumerate() {
            *c += self.problem.lift(self.space.dof_coords()[g], t);
        }
        DiscreteField::new(self.space.clone(), full)
    }

    /// Interior coefficients at Radau node r of slab m (homogenized part).
    pub fn slab_coeffs(&self, m: usize, r: usize) -> &[f64] {
        &self.coeffs[m][r]
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }
}

enum SlabSolver {
    Translation(TranslationSolver),
    Generic(Factorization),
}

impl SlabSolver {
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            SlabSolver::Translation(s) => s.solve(b),
            SlabSolver::Generic(f) => f.solve(b),
        }
    }
}

fn build_slab_solver(mat: &SparseMatrix, split: usize) -> Result<SlabSolver> {
    if split > 0 && split < mat.n_rows {
        if let Ok(s) = TranslationSolver::new(mat, split, 0.1) {
            return Ok(SlabSolver::Translation(s));
        }
    }
    Ok(SlabSolver::Generic(lu_factor(mat, 0.1)?))
}

/// Interleave the temporal coupling with the spatial mass and per-node
/// stiffness matrices into one slab system with unknowns ordered
/// (spatial dof) x (Radau index).
fn interleave_system(
    mass: &SparseMatrix,
    mats: &[SparseMatrix],
    rule: &TimeQuadRule,
    tau: f64,
) -> SparseMatrix {
    let np = rule.nodes.len();
    let n_int = mass.n_rows;
    let n = n_int * np;
    let dmat: Vec<Vec<f64>> = (0..np)
        .map(|s| (0..np).map(|r| lagrange_deriv(&rule.nodes, r, rule.nodes[s])).collect())
        .collect();
    let ljump: Vec<f64> = (0..np).map(|r| lagrange_value(&rule.nodes, r, -1.0)).collect();
    let mut trip: Vec<(usize, usize, f64)> =
        Vec::with_capacity(mass.nnz() * np * np + mats.iter().map(|m| m.nnz()).sum::<usize>());
    for pi in 0..n_int {
        for k in mass.row_ptr[pi]..mass.row_ptr[pi + 1] {
            let pj = mass.col_idx[k];
            let mv = mass.vals[k];
            for s in 0..np {
                for r in 0..np {
                    let tv = rule.weights[s] * dmat[s][r] + ljump[s] * ljump[r];
                    if tv != 0.0 {
                        trip.push((pi * np + s, pj * np + r, tv * mv));
                    }
                }
            }
        }
    }
    for (s, bs) in mats.iter().enumerate() {
        let scale = 0.5 * tau * rule.weights[s];
        for pi in 0..n_int {
            for k in bs.row_ptr[pi]..bs.row_ptr[pi + 1] {
                trip.push((pi * np + s, bs.col_idx[k] * np + s, scale * bs.vals[k]));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, trip)
}

/// The full linear system of one dG(q) slab (t0, t1], for inspection and
/// testing; dg(0) reduces to M + tau B.
pub fn slab_system_matrix(
    problem: &ProblemSpec,
    space: &Arc<FeSpace>,
    weight: &WeightSpec,
    t0: f64,
    t1: f64,
    q: usize,
) -> Result<SparseMatrix> {
    let rule = radau_rule(q)?;
    let tau = t1 - t0;
    let mass = assemble_weighted_mass(space, weight, None)?;
    let mats: Vec<SparseMatrix> = rule
        .nodes
        .iter()
        .map(|&th| {
            let t = t0 + tau * (th + 1.0) / 2.0;
            let coeffs = problem.frozen(t, Arc::new(|_| 0.0), Arc::new(|_| 0.0));
            assemble_bilinear(space, &coeffs, weight, None)
        })
        .collect::<Result<_>>()?;
    Ok(interleave_system(&mass, &mats, &rule, tau))
}

/// Run the dG(q) scheme over the whole time mesh.
pub fn dg_solve(
    problem: &ProblemSpec,
    space: &Arc<FeSpace>,
    weight: &WeightSpec,
    time_mesh: &TimeMesh,
    q: usize,
) -> Result<SpaceTimeSolution> {
    let rule = radau_rule(q)?;
    let np = q + 1;
    let n_int = space.n_dofs() - 2;
    let n = n_int * np;
    let split = space.interface_dof() * np;

    let ljump: Vec<f64> = (0..np).map(|r| lagrange_value(&rule.nodes, r, -1.0)).collect();

    let mass = assemble_weighted_mass(space, weight, None)?;

    // Homogenized initial trace.
    let mut u_minus = vec![0.0; n_int];
    for g in 1..space.n_dofs() - 1 {
        let x = space.dof_coords()[g];
        u_minus[g - 1] = (problem.u0)(x) - problem.lift(x, 0.0);
    }

    let frozen_bilinear = |t: f64| -> Result<SparseMatrix> {
        let coeffs = problem.frozen(t, Arc::new(|_| 0.0), Arc::new(|_| 0.0));
        assemble_bilinear(space, &coeffs, weight, None)
    };

    let mut solver: Option<(SlabSolver, f64)> = None;
    let mut autonomous_mats: Option<Vec<SparseMatrix>> = None;
    let mut coeffs_out: Vec<Vec<Vec<f64>>> = Vec::with_capacity(time_mesh.n_slabs());

    for m in 0..time_mesh.n_slabs() {
        let (t0, t1) = time_mesh.slab(m);
        let tau = t1 - t0;
        let times: Vec<f64> = rule.nodes.iter().map(|&th| t0 + tau * (th + 1.0) / 2.0).collect();

        let need_matrix = match (&solver, problem.coeffs_autonomous) {
            (None, _) => true,
            (Some((_, prev_tau)), true) => (tau - prev_tau).abs() > 1e-14 * tau.abs(),
            (Some(_), false) => true,
        };
        if need_matrix {
            let mats: Vec<SparseMatrix> = if problem.coeffs_autonomous {
                if autonomous_mats.is_none() {
                    autonomous_mats = Some(vec![frozen_bilinear(times[0])?]);
                }
                let base = &autonomous_mats.as_ref().unwrap()[0];
                (0..np).map(|_| base.clone()).collect()
            } else {
                times.iter().map(|&t| frozen_bilinear(t)).collect::<Result<_>>()?
            };
            let mat = interleave_system(&mass, &mats, &rule, tau);
            solver = Some((build_slab_solver(&mat, split)?, tau));
        }

        // Right-hand side: per Radau node the lift-corrected load, plus the
        // incoming trace through the jump term.
        let mut rhs = vec![0.0; n];
        let mu = mass.matvec(&u_minus);
        for (s, &ts) in times.iter().enumerate() {
            let pr = problem.clone();
            let f_s: SpaceFn = Arc::new(move |x: f64| {
                let mut v = (pr.f)(x, ts)
                    - pr.lift_time_derivative(x, ts)
                    - (pr.a)(x, ts) * pr.lift(x, ts);
                if x > 1.0 {
                    v -= (pr.b)(x, ts) * pr.lift(x - 1.0, ts);
                }
                v
            });
            let pr2 = problem.clone();
            let phi_s: SpaceFn = Arc::new(move |s_arg: f64| (pr2.phi)(s_arg, ts));
            let coeffs_s = problem.frozen(ts, f_s, phi_s);
            let load = assemble_load(space, &coeffs_s, weight, None)?;
            let scale = 0.5 * tau * rule.weights[s];
            for pi in 0..n_int {
                rhs[pi * np + s] = scale * load[pi] + ljump[s] * mu[pi];
            }
        }

        let sol = solver.as_ref().unwrap().0.solve(&rhs)?;
        let mut slab: Vec<Vec<f64>> = vec![vec![0.0; n_int]; np];
        for pi in 0..n_int {
            for r in 0..np {
                slab[r][pi] = sol[pi * np + r];
            }
        }
        u_minus = slab[np - 1].clone();
        coeffs_out.push(slab);
    }

    // rebuild the initial trace for storage (u_minus was consumed)
    let mut u0_minus = vec![0.0; n_int];
    for g in 1..space.n_dofs() - 1 {
        let x = space.dof_coords()[g];
        u0_minus[g - 1] = (problem.u0)(x) - problem.lift(x, 0.0);
    }

    Ok(SpaceTimeSolution {
        space: space.clone(),
        time_mesh: time_mesh.clone(),
        rule,
        coeffs: coeffs_out,
        u0_minus,
        problem: problem.clone(),
    })
}
