//! Dense univariate polynomials with exact derivative coefficients.

use serde::{Deserialize, Serialize};

/// Polynomial `c[0] + c[1] u + ... + c[k] u^k` in dense coefficient form.
///
/// Evaluation uses Horner's scheme; derivatives are formed symbolically so
/// repeated differentiation stays exact (no finite differencing anywhere).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a polynomial from `c[0]..c[k]`, trimming trailing zeros.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    /// The monomial `u^(m+1) / (m+1)`, whose derivative is `u^m`.
    pub fn monomial_flux(m: u32) -> Self {
        let deg = m as usize + 1;
        let mut coeffs = vec![0.0; deg + 1];
        coeffs[deg] = 1.0 / deg as f64;
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }

    /// Exact derivative polynomial.
    pub fn deriv(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![0.0]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Poly::new(coeffs)
    }

    /// Derivative of the requested order (order 0 returns a clone).
    pub fn deriv_n(&self, order: u32) -> Self {
        let mut p = self.clone();
        for _ in 0..order {
            p = p.deriv();
        }
        p
    }

    /// Coefficients of `u -> f(-u)`; odd-degree coefficients flip sign.
    pub fn reflect(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
            .collect();
        Poly::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_matches_direct_evaluation() {
        // 1 - 2u + 3u^2 at u = 0.5: 1 - 1 + 0.75.
        let p = Poly::new(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(0.5), 0.75);
    }

    #[test]
    fn derivative_coefficients_are_exact() {
        // d/du (u^4/4) = u^3, d2 = 3u^2.
        let p = Poly::monomial_flux(3);
        assert_eq!(p.deriv().coeffs(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.deriv_n(2).coeffs(), &[0.0, 0.0, 3.0]);
    }

    #[test]
    fn monomial_flux_normalization() {
        // m=1 gives u^2/2.
        let p = Poly::monomial_flux(1);
        assert_eq!(p.eval(3.0), 4.5);
    }

    #[test]
    fn reflect_flips_odd_terms() {
        // u^3/3 + u^4/8 reflected: -u^3/3 + u^4/8.
        let p = Poly::new(vec![0.0, 0.0, 0.0, 1.0 / 3.0, 0.125]);
        let r = p.reflect();
        assert_eq!(r.eval(-2.0), p.eval(2.0));
        assert_eq!(r.coeffs()[3], -1.0 / 3.0);
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = Poly::new(vec![1.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 0);
        assert!(!p.is_zero());
    }
}
