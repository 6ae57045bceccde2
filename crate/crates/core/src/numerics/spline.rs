use crate::error::{Error, Result};

/// Natural cubic spline through `(x_i, y_i)` with strictly increasing `x`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::invalid("cubic spline needs >= 3 knots and matching lengths"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("spline knots must be strictly increasing"));
        }
        // tridiagonal system for interior second derivatives (Thomas algorithm)
        let mut m = vec![0.0; n];
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0;
            let b = 2.0 * (h0 + h1);
            let c = h1;
            let d = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let denom = b - a * c_prime[i - 1];
            c_prime[i] = c / denom;
            d_prime[i] = (d - a * d_prime[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        Ok(CubicSpline { x, y, m })
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn segment(&self, xq: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&xq).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value at `xq`; outside the knot range the end cubic is extended.
    pub fn eval(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - xq) / h;
        let b = (xq - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    /// First derivative at `xq`.
    pub fn derivative(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - xq) / h;
        let b = (xq - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_knots_and_smooth_function() {
        let x: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let s = CubicSpline::new(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-14);
        }
        for k in 0..100 {
            let xq = 0.5 + k as f64 * 0.03;
            assert!((s.eval(xq) - xq.sin()).abs() < 1e-5);
            assert!((s.derivative(xq) - xq.cos()).abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_unsorted_knots() {
        assert!(CubicSpline::new(vec![0.0, 2.0, 1.0], vec![0.0; 3]).is_err());
        assert!(CubicSpline::new(vec![0.0, 1.0], vec![0.0; 2]).is_err());
    }
}
