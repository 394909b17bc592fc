//! Layer-adapted spatial meshes on Ω = (0, 2).
//!
//! Two families are provided: S-type meshes (Shishkin and Bakhvalov-S) built
//! around a transition value λ, and the recursively graded Durán mesh.  Both
//! are constructed so that the node set of [1, 2] is exactly the node set of
//! [0, 1] shifted by one; the shift term in the bilinear form relies on this
//! translation structure being exact in floating point.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFamily {
    Shishkin,
    BakhvalovS,
    Duran,
}

impl MeshFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MeshFamily::Shishkin => "shishkin",
            MeshFamily::BakhvalovS => "bakhvalov_s",
            MeshFamily::Duran => "duran",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "shishkin" => Ok(MeshFamily::Shishkin),
            "bakhvalov_s" | "bakhvalov-s" | "bakhvalov" => Ok(MeshFamily::BakhvalovS),
            "duran" => Ok(MeshFamily::Duran),
            _ => Err(Error::InvalidConfig(format!("unknown mesh family '{s}'"))),
        }
    }
}

/// Configuration for the mesh builders.
///
/// S-type meshes are parametrised by the cell count `n` (divisible by 8), the
/// layer constant `sigma`, the decay constant `alpha` and `epsilon`.  The
/// Durán mesh is parametrised by the grading parameter `h_grading` ∈ (0,1)
/// and `epsilon`; its cell count is an output of the construction.
#[derive(Debug, Clone, Copy)]
pub struct MeshConfig {
    pub family: MeshFamily,
    pub n: usize,
    pub h_grading: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

impl MeshConfig {
    pub fn stype(family: MeshFamily, n: usize, sigma: f64, alpha: f64, epsilon: f64) -> Self {
        MeshConfig { family, n, h_grading: 0.0, sigma, alpha, epsilon }
    }

    pub fn duran(h_grading: f64, epsilon: f64) -> Self {
        MeshConfig {
            family: MeshFamily::Duran,
            n: 0,
            h_grading,
            sigma: 0.0,
            alpha: 0.0,
            epsilon,
        }
    }

    pub fn build(&self) -> Result<Mesh1D> {
        match self.family {
            MeshFamily::Duran => build_duran_mesh(self.h_grading, self.epsilon),
            _ => build_stype_mesh(self),
        }
    }
}

/// A 1D mesh on [0, 2] with layer metadata.
#[derive(Debug, Clone)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    pub family: MeshFamily,
    /// Transition value λ (S-type only).
    pub lambda: Option<f64>,
    /// Smallest cell width inside the layer regions.
    pub h_layer_min: f64,
    /// max|ψ'|: 2 ln N for Shishkin, 2 for Bakhvalov-S.
    pub psi_prime_max: Option<f64>,
    /// The Durán count M from the ceiling formula.
    pub m_duran: Option<usize>,
}

impl Mesh1D {
    /// Wrap an explicit node vector; bypasses the family builders, so the
    /// translation-symmetry guarantee is whatever the caller provides.
    #[cfg(test)]
    pub(crate) fn from_raw_nodes(nodes: Vec<f64>) -> Result<Self> {
        for w in nodes.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Structural(format!(
                    "non-monotone mesh nodes: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let h_layer_min = nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        Ok(Mesh1D {
            nodes,
            family: MeshFamily::Shishkin,
            lambda: None,
            h_layer_min,
            psi_prime_max: None,
            m_duran: None,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Index of the node sitting exactly at x = 1.
    pub fn interface_index(&self) -> usize {
        self.n_cells() / 2
    }

    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.nodes[i], self.nodes[i + 1])
    }

    pub fn cell_width(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    /// True iff `x[i + N/2] == 1 + x[i]` bitwise for all i ≤ N/2.
    pub fn has_exact_translation(&self) -> bool {
        let half = self.interface_index();
        if self.nodes[half] != 1.0 {
            return false;
        }
        (0..=half).all(|i| self.nodes[i + half] == 1.0 + self.nodes[i])
    }

    /// CSV dump with header `i,x_i`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,x_i\n");
        for (i, x) in self.nodes.iter().enumerate() {
            out.push_str(&format!("{i},{x:.16e}\n"));
        }
        out
    }

    fn validate(self) -> Result<Self> {
        for w in self.nodes.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Structural(format!(
                    "non-monotone mesh nodes: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if !self.has_exact_translation() {
            return Err(Error::Structural(
                "mesh lacks exact translation symmetry about x = 1".into(),
            ));
        }
        Ok(self)
    }
}

/// Build a Shishkin or Bakhvalov-S mesh with N cells.
///
/// The transition value is capped at 1/4: λ = min(1/4, σε ln(N)/α).  When the
/// cap binds the mesh-defining function is rescaled so the layer region still
/// ends exactly at λ; for the Shishkin variant this degenerates to a uniform
/// mesh.
pub fn build_stype_mesh(cfg: &MeshConfig) -> Result<Mesh1D> {
    let n = cfg.n;
    if matches!(cfg.family, MeshFamily::Duran) {
        return Err(Error::InvalidConfig("build_stype_mesh called with duran family".into()));
    }
    if n == 0 || n % 8 != 0 {
        return Err(Error::InvalidConfig(format!("N = {n} must be positive and divisible by 8")));
    }
    if cfg.sigma < 1.0 || cfg.alpha <= 0.0 || cfg.epsilon <= 0.0 || cfg.epsilon > 1.0 {
        return Err(Error::InvalidConfig(format!(
            "need sigma >= 1, alpha > 0, epsilon in (0,1]; got sigma={}, alpha={}, epsilon={}",
            cfg.sigma, cfg.alpha, cfg.epsilon
        )));
    }

    let nf = n as f64;
    let lnn = nf.ln();
    let lambda = (cfg.sigma * cfg.epsilon * lnn / cfg.alpha).min(0.25);
    // Mesh-defining function with phi(1/2) = ln N; scaled so that the layer
    // region ends at the (possibly capped) lambda.
    let phi = |t: f64| -> f64 {
        match cfg.family {
            MeshFamily::Shishkin => 2.0 * t * lnn,
            MeshFamily::BakhvalovS => -(1.0 - 2.0 * t * (1.0 - 1.0 / nf)).ln(),
            MeshFamily::Duran => unreachable!(),
        }
    };
    let scale = lambda / lnn;

    let mut nodes = Vec::with_capacity(n + 1);
    for i in 0..=n / 2 {
        let x = if i == 0 {
            0.0
        } else if i < n / 8 {
            scale * phi(4.0 * i as f64 / nf)
        } else if i == n / 8 {
            lambda
        } else if i < 3 * n / 8 {
            (4.0 * i as f64 / nf) * (1.0 - 2.0 * lambda) + 2.0 * lambda - 0.5
        } else if i == 3 * n / 8 {
            1.0 - lambda
        } else if i < n / 2 {
            1.0 - scale * phi(2.0 - 4.0 * i as f64 / nf)
        } else {
            1.0
        };
        nodes.push(x);
    }
    for i in 1..=n / 2 {
        let x = 1.0 + nodes[i];
        nodes.push(x);
    }

    // Smallest width inside the layer region [0, lambda].
    let h_layer_min = (0..n / 8)
        .map(|i| nodes[i + 1] - nodes[i])
        .fold(f64::INFINITY, f64::min);
    let psi_prime_max = match cfg.family {
        MeshFamily::Shishkin => 2.0 * lnn,
        MeshFamily::BakhvalovS => 2.0,
        MeshFamily::Duran => unreachable!(),
    };

    Mesh1D {
        nodes,
        family: cfg.family,
        lambda: Some(lambda),
        h_layer_min,
        psi_prime_max: Some(psi_prime_max),
        m_duran: None,
    }
    .validate()
}

/// Build the recursively graded Durán mesh from the grading parameter H.
///
/// M = ⌈1 − ln(2Hε)/ln(1+H)⌉; nodes on [0, 1/2] follow x_1 = Hε,
/// x_i = (1+H) x_{i−1}, are reflected about 1/2, and the whole [0,1] pattern
/// is translated to [1,2].  The point x_{M−1} is omitted when the last graded
/// step would leave a sliver shorter than half the preceding step.
pub fn build_duran_mesh(h_grading: f64, epsilon: f64) -> Result<Mesh1D> {
    let h = h_grading;
    if !(0.0 < h && h < 1.0) {
        return Err(Error::InvalidConfig(format!("H = {h} must lie in (0,1)")));
    }
    if epsilon <= 0.0 || epsilon > 1.0 {
        return Err(Error::InvalidConfig(format!("epsilon = {epsilon} must lie in (0,1]")));
    }
    if h * epsilon >= 0.5 {
        return Err(Error::InvalidConfig(format!(
            "H*epsilon = {} must be < 1/2 for the graded construction",
            h * epsilon
        )));
    }

    let m = (1.0 - (2.0 * h * epsilon).ln() / (1.0 + h).ln()).ceil() as usize;
    if m < 2 {
        return Err(Error::InvalidConfig(format!("Duran M = {m} too small")));
    }

    // Graded points on [0, 1/2].
    let mut half = Vec::with_capacity(m + 1);
    half.push(0.0);
    half.push(h * epsilon);
    for _ in 2..m {
        let x = (1.0 + h) * half.last().unwrap();
        half.push(x);
    }
    half.push(0.5);
    // Omission rule: drop x_{M-1} when the remaining sliver is shorter than
    // half the previous step.
    if m >= 3 {
        let xm1 = half[m - 1];
        let xm2 = half[m - 2];
        if 0.5 - xm1 < (xm1 - xm2) / 2.0 {
            half.remove(m - 1);
        }
    }

    // Reflect about 1/2 to cover [0, 1]; last pushed node is exactly 1.0.
    let mut nodes = half.clone();
    for j in (0..half.len() - 1).rev() {
        nodes.push(1.0 - half[j]);
    }
    // Translate to [1, 2].
    let unit: Vec<f64> = nodes.clone();
    for &x in unit.iter().skip(1) {
        nodes.push(1.0 + x);
    }

    Mesh1D {
        nodes,
        family: MeshFamily::Duran,
        lambda: None,
        h_layer_min: h * epsilon,
        psi_prime_max: None,
        m_duran: Some(m),
    }
    .validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn shishkin_n8_small_epsilon() {
        let cfg = MeshConfig::stype(MeshFamily::Shishkin, 8, 2.0, 1.0, 0.01);
        let mesh = cfg.build().unwrap();
        let lambda = 0.02 * 8f64.ln();
        let expect = [
            0.0,
            lambda,
            0.5,
            1.0 - lambda,
            1.0,
            1.0 + lambda,
            1.5,
            2.0 - lambda,
            2.0,
        ];
        assert_eq!(mesh.n_cells(), 8);
        for (x, e) in mesh.nodes().iter().zip(expect) {
            assert_abs_diff_eq!(x, &e, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(mesh.lambda.unwrap(), 0.0415888, epsilon = 1e-6);
    }

    #[test]
    fn shishkin_capped_lambda_is_uniform() {
        let cfg = MeshConfig::stype(MeshFamily::Shishkin, 8, 2.0, 1.0, 0.5);
        let mesh = cfg.build().unwrap();
        assert_eq!(mesh.lambda, Some(0.25));
        for (i, &x) in mesh.nodes().iter().enumerate() {
            assert_abs_diff_eq!(x, i as f64 * 0.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn stype_transition_nodes_exact() {
        for family in [MeshFamily::Shishkin, MeshFamily::BakhvalovS] {
            let cfg = MeshConfig::stype(family, 64, 2.0, 1.0, 1e-4);
            let mesh = cfg.build().unwrap();
            let lambda = mesh.lambda.unwrap();
            assert_eq!(mesh.nodes()[8], lambda);
            assert_eq!(mesh.nodes()[24], 1.0 - lambda);
            assert_eq!(mesh.nodes()[32], 1.0);
            assert!(mesh.h_layer_min <= 1e-4 * 1.05);
        }
    }

    #[test]
    fn stype_rejects_bad_n() {
        let cfg = MeshConfig::stype(MeshFamily::Shishkin, 12, 2.0, 1.0, 0.01);
        assert!(matches!(cfg.build(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn duran_example_small_epsilon() {
        let mesh = build_duran_mesh(0.5, 0.01).unwrap();
        assert_eq!(mesh.m_duran, Some(13));
        let n = mesh.nodes();
        assert_eq!(n[0], 0.0);
        assert_abs_diff_eq!(n[1], 0.005, epsilon = 1e-15);
        assert_abs_diff_eq!(n[2], 0.0075, epsilon = 1e-15);
        assert_abs_diff_eq!(n[3], 0.01125, epsilon = 1e-15);
    }

    #[test]
    fn duran_m_condition() {
        let mesh = build_duran_mesh(0.5, 0.25).unwrap();
        let m = mesh.m_duran.unwrap();
        assert_eq!(m, 5);
        // Both inequalities of the M condition.
        let h = 0.5f64;
        let eps = 0.25;
        assert!(h * eps * (1.0 + h).powi(m as i32 - 2) < 0.5);
        assert!(h * eps * (1.0 + h).powi(m as i32 - 1) >= 0.5);
    }

    #[test]
    fn duran_rejects_large_h_eps() {
        assert!(matches!(build_duran_mesh(0.9, 0.9), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn duran_step_bounds() {
        let mesh = build_duran_mesh(0.25, 1e-3).unwrap();
        let h = 0.25;
        let nodes = mesh.nodes();
        assert_eq!(nodes[1], h * 1e-3);
        // Graded part: h_i = H * x_{i-1} up to the interval that hits 1/2.
        let mut i = 2;
        while nodes[i] < 0.5 - 1e-12 {
            let step = nodes[i] - nodes[i - 1];
            assert!(step <= h * nodes[i] * (1.0 + 1e-12));
            i += 1;
        }
    }

    #[test]
    fn duran_h_versus_n_log_bound() {
        // Empirical check of H <= C N^-1 ln(1/eps) with one frozen constant.
        let mut c_max: f64 = 0.0;
        for &h in &[0.5, 0.25, 0.1, 0.05] {
            for &eps in &[1e-2, 1e-4, 1e-6, 1e-8, 1e-10] {
                let mesh = build_duran_mesh(h, eps).unwrap();
                let n = mesh.n_cells() as f64;
                c_max = c_max.max(h * n / (1.0f64 / eps).ln());
            }
        }
        assert!(c_max <= 8.0, "fitted constant {c_max} exceeds 8");
    }

    #[test]
    fn symmetry_about_one() {
        for mesh in [
            MeshConfig::stype(MeshFamily::BakhvalovS, 32, 2.0, 1.5, 1e-3).build().unwrap(),
            build_duran_mesh(0.3, 1e-4).unwrap(),
        ] {
            let n = mesh.n_cells();
            let nodes = mesh.nodes();
            for i in 0..=n / 2 {
                assert_eq!(nodes[i + n / 2], 1.0 + nodes[i]);
            }
        }
    }

    proptest! {
        #[test]
        fn stype_random_configs_valid(
            pow in 0usize..5,
            eps_exp in -10.0f64..0.0,
            sigma in 1.0f64..4.0,
            alpha in 0.2f64..3.0,
            shishkin in proptest::bool::ANY,
        ) {
            let n = 8 << pow;
            let family = if shishkin { MeshFamily::Shishkin } else { MeshFamily::BakhvalovS };
            let cfg = MeshConfig::stype(family, n, sigma, alpha, 10f64.powf(eps_exp));
            let mesh = cfg.build().unwrap();
            prop_assert!(mesh.has_exact_translation());
            prop_assert_eq!(mesh.nodes()[n / 8], mesh.lambda.unwrap());
        }

        #[test]
        fn duran_random_configs_valid(h in 0.02f64..0.9, eps_exp in -10.0f64..-0.4) {
            let eps = 10f64.powf(eps_exp);
            prop_assume!(h * eps < 0.5);
            let mesh = build_duran_mesh(h, eps).unwrap();
            prop_assert!(mesh.has_exact_translation());
            let m = mesh.m_duran.unwrap();
            let n = mesh.n_cells();
            prop_assert!(n == 4 * m || n == 4 * (m - 1));
        }
    }
}
