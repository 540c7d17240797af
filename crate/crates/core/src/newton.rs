//! Newton-form polynomials anchored at the gap midpoints of a support.
//!
//! The measure numerators have one root per gap (equilibrium numerator) or
//! close to it, so their values span many orders of magnitude across the
//! hull — 1e8 for the record-bound support. A global Chebyshev or monomial
//! expansion stores such a polynomial as a cancellation of huge coefficients
//! and loses all relative accuracy at the small end; the Newton basis
//! `b_k(y) = prod_{j<k} (y - t_j)` with centers `t_j` at the gap midpoints
//! keeps every evaluation a product of moderate factors.

use std::sync::Arc;

/// Shared center list; basis functions are `b_0 = 1`,
/// `b_{k+1}(y) = b_k(y) (y - t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonBasis {
    centers: Arc<Vec<f64>>,
}

impl NewtonBasis {
    pub fn new(centers: Vec<f64>) -> Self {
        NewtonBasis { centers: Arc::new(centers) }
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Maximum representable coefficient count.
    pub fn max_len(&self) -> usize {
        self.centers.len() + 1
    }

    /// Fills `out[k] = b_k(y)`.
    #[inline]
    pub fn values(&self, y: f64, out: &mut [f64]) {
        debug_assert!(out.len() <= self.max_len());
        let mut acc = 1.0;
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = acc;
            if k < self.centers.len() {
                acc *= y - self.centers[k];
            }
        }
    }

    /// Fills `out[k] = (b_k(u) - b_k(w)) / (u - w)` by the cancellation-free
    /// recurrence `D_{k+1} = D_k (u - t_k) + b_k(w)`; valid for coincident
    /// points (the derivative).
    #[inline]
    pub fn divided_values(&self, u: f64, w: f64, out: &mut [f64]) {
        debug_assert!(out.len() <= self.max_len());
        let mut d = 0.0;
        let mut b_w = 1.0;
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = d;
            if k < self.centers.len() {
                d = d * (u - self.centers[k]) + b_w;
                b_w *= w - self.centers[k];
            }
        }
    }
}

/// Polynomial `sum coeffs[k] b_k` over a shared Newton basis.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPoly {
    pub basis: NewtonBasis,
    pub coeffs: Vec<f64>,
}

impl NewtonPoly {
    pub fn new(basis: NewtonBasis, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty() && coeffs.len() <= basis.max_len());
        NewtonPoly { basis, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner-style evaluation through the centers.
    pub fn eval(&self, y: f64) -> f64 {
        let centers = self.basis.centers();
        let mut acc = *self.coeffs.last().unwrap();
        for k in (0..self.coeffs.len() - 1).rev() {
            acc = acc * (y - centers[k]) + self.coeffs[k];
        }
        acc
    }

    /// Value and derivative in one pass.
    pub fn eval_with_deriv(&self, y: f64) -> (f64, f64) {
        let centers = self.basis.centers();
        let mut acc = *self.coeffs.last().unwrap();
        let mut der = 0.0;
        for k in (0..self.coeffs.len() - 1).rev() {
            der = der * (y - centers[k]) + acc;
            acc = acc * (y - centers[k]) + self.coeffs[k];
        }
        (acc, der)
    }

    pub fn scale_coeffs(&self, s: f64) -> NewtonPoly {
        NewtonPoly::new(self.basis.clone(), self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Sum over the shared basis.
    pub fn add(&self, other: &NewtonPoly) -> NewtonPoly {
        assert_eq!(self.basis, other.basis, "mismatched Newton bases");
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        NewtonPoly::new(self.basis.clone(), coeffs)
    }

    /// Multiplies by `(y - root)`, using
    /// `(y - root) b_k = b_{k+1} + (t_k - root) b_k`.
    pub fn mul_linear(&self, root: f64) -> NewtonPoly {
        let centers = self.basis.centers();
        assert!(
            self.coeffs.len() < self.basis.max_len(),
            "basis has no headroom for a degree raise"
        );
        let mut coeffs = vec![0.0; self.coeffs.len() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[k + 1] += c;
            coeffs[k] += c * (centers[k] - root);
        }
        NewtonPoly::new(self.basis.clone(), coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> NewtonBasis {
        NewtonBasis::new(vec![0.5, 2.0, -1.0, 3.0, 3.0])
    }

    #[test]
    fn values_and_eval_agree() {
        let b = basis();
        let p = NewtonPoly::new(b.clone(), vec![2.0, -1.0, 0.5, 3.0]);
        for &y in &[-2.0, 0.0, 0.5, 1.7, 4.2] {
            let mut vals = [0.0; 4];
            b.values(y, &mut vals);
            let direct: f64 = p.coeffs.iter().zip(vals.iter()).map(|(c, v)| c * v).sum();
            assert!((p.eval(y) - direct).abs() < 1e-12 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn divided_values_match() {
        let b = basis();
        let (u, w) = (1.3, -0.7);
        let mut d = [0.0; 6];
        b.divided_values(u, w, &mut d);
        let mut bu = [0.0; 6];
        let mut bw = [0.0; 6];
        b.values(u, &mut bu);
        b.values(w, &mut bw);
        for k in 0..6 {
            let direct = (bu[k] - bw[k]) / (u - w);
            assert!((d[k] - direct).abs() < 1e-13 * (1.0 + direct.abs()), "k={k}");
        }
        // Coincident: derivative of b_k.
        let mut dc = [0.0; 4];
        b.divided_values(1.3, 1.3, &mut dc);
        let h = 1e-7;
        let mut bp = [0.0; 4];
        let mut bm = [0.0; 4];
        b.values(1.3 + h, &mut bp);
        b.values(1.3 - h, &mut bm);
        for k in 0..4 {
            let fd = (bp[k] - bm[k]) / (2.0 * h);
            assert!((dc[k] - fd).abs() < 1e-6 * (1.0 + fd.abs()), "k={k}");
        }
    }

    #[test]
    fn derivative_and_mul_linear() {
        let b = basis();
        let p = NewtonPoly::new(b.clone(), vec![1.0, 2.0, -0.5]);
        for &y in &[-1.0, 0.3, 2.8] {
            let (v, d) = p.eval_with_deriv(y);
            assert!((v - p.eval(y)).abs() < 1e-14 * (1.0 + v.abs()));
            let h = 1e-6;
            let fd = (p.eval(y + h) - p.eval(y - h)) / (2.0 * h);
            assert!((d - fd).abs() < 1e-6 * (1.0 + fd.abs()));
        }
        let q = p.mul_linear(0.8);
        for &y in &[-1.0, 0.3, 2.8, 4.0] {
            assert!((q.eval(y) - p.eval(y) * (y - 0.8)).abs() < 1e-12 * (1.0 + q.eval(y).abs()));
        }
    }
}
