//! Quadrature rules on the reference interval [-1, 1].
//!
//! Gauss-Legendre rules are used for spatial integration, the right
//! Gauss-Radau rules (node at +1) for the dG time stepping.  Both are
//! computed on demand; degrees are small so Newton/bisection on the
//! Legendre recurrence is entirely adequate.

use crate::error::{Error, Result};

/// Legendre polynomial P_n and its derivative at x.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        // endpoint values: P_n'(±1) = ±1^(n-1) n(n+1)/2
        let sign = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 - 1) };
        sign * (n * (n + 1)) as f64 / 2.0
    } else {
        (n as f64) * (x * p - p_prev) / (x * x - 1.0)
    };
    (p, dp)
}

/// A quadrature rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Highest polynomial degree integrated exactly.
    pub exactness: usize,
}

impl QuadRule {
    /// Integrate f over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }
}

/// n-point Gauss-Legendre rule, exact for degree 2n-1.
pub fn gauss_rule(n: usize) -> Result<QuadRule> {
    if n < 1 || n > 32 {
        return Err(Error::InvalidConfig(format!("Gauss rule order {n} outside 1..=32")));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Newton iteration from the Chebyshev-based initial guess.
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadRule { nodes, weights, exactness: 2 * n - 1 })
}

/// Quadrature for the dG(q) time stepping: q+1 right Gauss-Radau points on
/// (-1, 1] with the last node at +1, exact for degree 2q.
#[derive(Debug, Clone)]
pub struct TimeQuadRule {
    pub q: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TimeQuadRule {
    pub fn exactness(&self) -> usize {
        2 * self.q
    }
}

/// Right Gauss-Radau rule with q+1 points, obtained by mirroring the
/// classical left rule (node at -1, interior nodes the roots of
/// (P_q + P_{q+1})/(1+x)).
pub fn radau_rule(q: usize) -> Result<TimeQuadRule> {
    if q > 6 {
        return Err(Error::InvalidConfig(format!("Radau degree q = {q} outside 0..=6")));
    }
    let np = q + 1;
    // Left rule: node -1 with weight 2/(q+1)^2 plus q interior roots.
    let mut left_nodes = vec![-1.0];
    let mut left_weights = vec![2.0 / (np * np) as f64];
    let g = |x: f64| legendre(q, x).0 + legendre(q + 1, x).0;
    // Bracket the q interior roots by sampling, then bisect.
    let samples = 400 * np;
    let mut prev_x = -1.0 + 1e-9;
    let mut prev_g = g(prev_x);
    for s in 1..=samples {
        let x = -1.0 + 1e-9 + (2.0 - 2e-9) * s as f64 / samples as f64;
        let gx = g(x);
        if prev_g == 0.0 || prev_g * gx < 0.0 {
            let (mut lo, mut hi) = (prev_x, x);
            let mut glo = prev_g;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if glo * gm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            let root = 0.5 * (lo + hi);
            let pq = legendre(q, root).0;
            left_nodes.push(root);
            left_weights.push((1.0 - root) / ((np * np) as f64 * pq * pq));
        }
        prev_x = x;
        prev_g = gx;
    }
    if left_nodes.len() != np {
        return Err(Error::Numerical(format!(
            "Radau root search found {} of {np} nodes",
            left_nodes.len()
        )));
    }
    // Mirror to the right rule and sort ascending; the last node is exactly 1.
    let mut pairs: Vec<(f64, f64)> = left_nodes
        .iter()
        .zip(&left_weights)
        .map(|(&x, &w)| (if x == -1.0 { 1.0 } else { -x }, w))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(TimeQuadRule {
        q,
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Partition [a, b] into subintervals graded geometrically toward the nearest
/// of the `anchors`, with the finest width about `scale`.  Used to resolve
/// epsilon-width layer factors when integrating weighted quantities.
pub fn graded_partition(a: f64, b: f64, anchors: &[f64], scale: f64) -> Vec<f64> {
    let width = b - a;
    let scale = scale.max(width * 1e-15);
    if width <= 4.0 * scale || anchors.is_empty() {
        return vec![a, b];
    }
    // Nearest anchor measured from the closer endpoint; anchors never lie in
    // the interior because the meshes put nodes at 0, 1 and 2.
    let p = anchors
        .iter()
        .copied()
        .min_by(|&u, &v| {
            let du = (u - a).abs().min((u - b).abs());
            let dv = (v - a).abs().min((v - b).abs());
            du.partial_cmp(&dv).unwrap()
        })
        .unwrap();
    let mut pts = vec![a];
    if p <= 0.5 * (a + b) {
        let mut d = (a - p).max(scale);
        loop {
            d *= 2.0;
            let x = p + d;
            if x >= b - 0.5 * scale || pts.len() > 64 {
                break;
            }
            if x > a {
                pts.push(x);
            }
        }
    } else {
        let mut d = (p - b).max(scale);
        let mut rev = Vec::new();
        loop {
            d *= 2.0;
            let x = p - d;
            if x <= a + 0.5 * scale || rev.len() > 64 {
                break;
            }
            if x < b {
                rev.push(x);
            }
        }
        rev.reverse();
        pts.extend(rev);
    }
    pts.push(b);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_small_rules() {
        let r1 = gauss_rule(1).unwrap();
        assert_abs_diff_eq!(r1.nodes[0], 0.0);
        assert_abs_diff_eq!(r1.weights[0], 2.0);
        let r2 = gauss_rule(2).unwrap();
        let inv_sqrt3 = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r2.nodes[0], -inv_sqrt3, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.nodes[1], inv_sqrt3, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gauss_exactness() {
        for n in 1..=32 {
            let rule = gauss_rule(n).unwrap();
            assert_abs_diff_eq!(rule.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            for deg in 0..=rule.exactness {
                let val = rule.integrate(-1.0, 1.0, |t| t.powi(deg as i32));
                let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
                assert_abs_diff_eq!(val, exact, epsilon = 1e-13);
            }
        }
        // n = 5 on t^8 against the analytic integral.
        let r5 = gauss_rule(5).unwrap();
        assert_abs_diff_eq!(r5.integrate(-1.0, 1.0, |t| t.powi(8)), 2.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn gauss_rejects_out_of_range() {
        assert!(gauss_rule(0).is_err());
        assert!(gauss_rule(33).is_err());
    }

    #[test]
    fn radau_small_rules() {
        let r0 = radau_rule(0).unwrap();
        assert_eq!(r0.nodes, vec![1.0]);
        assert_eq!(r0.weights, vec![2.0]);
        let r1 = radau_rule(1).unwrap();
        assert_abs_diff_eq!(r1.nodes[0], -1.0 / 3.0, epsilon = 1e-13);
        assert_eq!(r1.nodes[1], 1.0);
        assert_abs_diff_eq!(r1.weights[0], 1.5, epsilon = 1e-13);
        assert_abs_diff_eq!(r1.weights[1], 0.5, epsilon = 1e-13);
    }

    #[test]
    fn radau_exactness() {
        for q in 0..=6 {
            let rule = radau_rule(q).unwrap();
            assert_eq!(*rule.nodes.last().unwrap(), 1.0);
            assert_abs_diff_eq!(rule.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            for deg in 0..=rule.exactness() {
                let val: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&t, &w)| w * t.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
                assert_abs_diff_eq!(val, exact, epsilon = 1e-13);
            }
        }
        // q = 2 on t^4 against the analytic integral.
        let r2 = radau_rule(2).unwrap();
        let val: f64 = r2.nodes.iter().zip(&r2.weights).map(|(&t, &w)| w * t.powi(4)).sum();
        assert_abs_diff_eq!(val, 0.4, epsilon = 1e-13);
    }

    #[test]
    fn radau_rejects_out_of_range() {
        assert!(radau_rule(7).is_err());
    }

    #[test]
    fn graded_partition_resolves_scale() {
        let pts = graded_partition(0.0, 0.5, &[0.0, 1.0, 2.0], 1e-4);
        assert_eq!(pts[0], 0.0);
        assert_eq!(*pts.last().unwrap(), 0.5);
        assert!(pts[1] <= 4e-4);
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
        // Graded toward the right anchor as well.
        let pts = graded_partition(0.6, 1.0, &[0.0, 1.0, 2.0], 1e-4);
        assert!(*pts.last().unwrap() - pts[pts.len() - 2] <= 4e-4);
    }
}
