use std::f64::consts::PI;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = if n == 0 {
        0.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p, dp)
}

/// Pairwise (cascade) summation. The association order depends only on the
/// slice length, so results are bit-stable for a given input ordering.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        let mut s = 0.0;
        for v in values {
            s += v;
        }
        return s;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Wynn epsilon-algorithm for accelerating a sequence of partial sums.
#[derive(Debug, Clone, Default)]
pub struct WynnEpsilon {
    // last anti-diagonal of the epsilon table
    diag: Vec<f64>,
    estimates: Vec<f64>,
}

impl WynnEpsilon {
    const MAX_COLUMNS: usize = 48;

    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds the next partial sum; returns the current best extrapolation.
    pub fn push(&mut self, partial: f64) -> f64 {
        let mut new_diag = Vec::with_capacity(self.diag.len() + 1);
        new_diag.push(partial);
        for k in 0..self.diag.len().min(Self::MAX_COLUMNS) {
            let prev_lower = if k == 0 { 0.0 } else { self.diag[k - 1] };
            let delta = new_diag[k] - self.diag[k];
            let v = if delta == 0.0 {
                f64::INFINITY
            } else {
                prev_lower + 1.0 / delta
            };
            if !v.is_finite() {
                break;
            }
            new_diag.push(v);
        }
        self.diag = new_diag;
        // even columns hold the extrapolants
        let best = self
            .diag
            .iter()
            .step_by(2)
            .next_back()
            .copied()
            .unwrap_or(partial);
        self.estimates.push(best);
        best
    }

    /// Spread of the last three extrapolants, a cheap error indicator.
    pub fn error_estimate(&self) -> f64 {
        let n = self.estimates.len();
        if n < 3 {
            return f64::INFINITY;
        }
        let e = &self.estimates[n - 3..];
        (e[2] - e[1]).abs() + (e[2] - e[0]).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 64, 129] {
            let gl = GaussLegendre::new(n);
            assert_relative_eq!(gl.weights().iter().sum::<f64>(), 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let gl = GaussLegendre::new(6);
        // degree 11 is the highest exactly integrated degree
        let v = gl.integrate(0.0, 2.0, |x| x.powi(11));
        assert_relative_eq!(v, 2f64.powi(12) / 12.0, max_relative = 1e-13);
    }

    #[test]
    fn smooth_integrand() {
        let gl = GaussLegendre::new(32);
        let v = gl.integrate(0.0, PI, f64::sin);
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut w = WynnEpsilon::new();
        let mut s = 0.0;
        let mut est = 0.0;
        for k in 1..=15 {
            s += (-1f64).powi(k + 1) / k as f64;
            est = w.push(s);
        }
        assert!((est - 2f64.ln()).abs() < 1e-9, "{est}");
        assert!((s - 2f64.ln()).abs() > 1e-2);
    }
}
