//! Sparse multivariate polynomials in ambient coordinates.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    nvars: usize,
    degree: u32,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(nvars: usize, terms: Vec<Monomial>) -> Self {
        debug_assert!(terms.iter().all(|t| t.exponents.len() == nvars));
        let degree = terms
            .iter()
            .map(|t| t.exponents.iter().sum::<u32>())
            .max()
            .unwrap_or(0);
        Polynomial {
            nvars,
            degree,
            terms,
        }
    }

    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            degree: 0,
            terms: Vec::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn max_exponent(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.exponents.iter())
            .cloned()
            .max()
            .unwrap_or(0) as usize
    }

    /// Table pows[v * (e_max + 1) + e] = x_v^e.
    fn power_table(&self, x: &[f64]) -> (Vec<f64>, usize) {
        let stride = self.max_exponent() + 1;
        let mut pows = vec![1.0; self.nvars * stride];
        for v in 0..self.nvars {
            for e in 1..stride {
                pows[v * stride + e] = pows[v * stride + e - 1] * x[v];
            }
        }
        (pows, stride)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let (pows, stride) = self.power_table(x);
        self.terms
            .iter()
            .map(|t| {
                t.exponents
                    .iter()
                    .enumerate()
                    .fold(t.coef, |acc, (v, &e)| acc * pows[v * stride + e as usize])
            })
            .sum()
    }

    /// Value and ambient gradient.
    pub fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.nvars];
        if self.terms.is_empty() {
            return (0.0, grad);
        }
        let (pows, stride) = self.power_table(x);
        let mut value = 0.0;
        for t in &self.terms {
            let p = |v: usize, e: u32| pows[v * stride + e as usize];
            value += t
                .exponents
                .iter()
                .enumerate()
                .fold(t.coef, |acc, (v, &e)| acc * p(v, e));
            for (dv, g) in grad.iter_mut().enumerate() {
                let edv = t.exponents[dv];
                if edv == 0 {
                    continue;
                }
                let mut term = t.coef * edv as f64;
                for (v, &e) in t.exponents.iter().enumerate() {
                    term *= if v == dv { p(v, e - 1) } else { p(v, e) };
                }
                *g += term;
            }
        }
        (value, grad)
    }

    /// Adds `scale · other` term by term, merging equal exponents.
    pub fn add_scaled(&mut self, other: &Polynomial, scale: f64) {
        if scale == 0.0 {
            return;
        }
        for t in &other.terms {
            if let Some(mine) = self.terms.iter_mut().find(|m| m.exponents == t.exponents) {
                mine.coef += scale * t.coef;
            } else {
                self.terms.push(Monomial {
                    exponents: t.exponents.clone(),
                    coef: scale * t.coef,
                });
            }
        }
        self.degree = self.degree.max(other.degree);
        if self.nvars == 0 {
            self.nvars = other.nvars;
        }
    }
}

/// All exponent vectors α ∈ ℕⁿ with |α| = d, in lexicographic order.
pub fn multi_indices(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e);
            rec(n - 1, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, d, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// d! / Π αᵢ!
pub fn multinomial(alpha: &[u32]) -> f64 {
    let mut total = 0u32;
    let mut acc = 1.0;
    for &a in alpha {
        for j in 1..=a {
            total += 1;
            acc *= total as f64 / j as f64;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multinomial_values() {
        assert_eq!(multinomial(&[2, 1]), 3.0);
        assert_eq!(multinomial(&[1, 1, 1]), 6.0);
        assert_eq!(multinomial(&[25, 0]), 1.0);
        assert!((multinomial(&[12, 13]) - 5_200_300.0).abs() < 1e-6);
    }

    #[test]
    fn multi_index_count() {
        // C(d + n - 1, n - 1)
        assert_eq!(multi_indices(2, 25).len(), 26);
        assert_eq!(multi_indices(3, 3).len(), 10);
        assert_eq!(multi_indices(3, 0), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let p = Polynomial::new(
            3,
            vec![
                Monomial { exponents: vec![2, 1, 0], coef: 1.5 },
                Monomial { exponents: vec![0, 0, 3], coef: -2.0 },
                Monomial { exponents: vec![1, 1, 1], coef: 0.7 },
            ],
        );
        let x = [0.3, -0.8, 1.1];
        let (v, g) = p.eval_grad(&x);
        assert!((v - p.eval(&x)).abs() < 1e-15);
        for i in 0..3 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (p.eval(&xp) - p.eval(&xm)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8);
        }
    }
}
