//! Sparse multivariate polynomials over `f64`, just enough to compose a
//! polynomial with an affine map and match coefficients over a monomial
//! basis.

use std::collections::BTreeMap;

use crate::interval::{Mat, Vector};

/// Exponent tuple of a monomial, one entry per state variable.
pub type Exponents = Vec<u32>;

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Exponents, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn monomial(exps: Exponents, coeff: f64) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, coeff);
        p
    }

    /// Builds from `(exponents, coefficient)` pairs; repeated exponents add up.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponents, f64)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent tuple length");
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, f64)> {
        self.terms.iter().map(|(e, c)| (e, *c))
    }

    pub fn coeff(&self, exps: &[u32]) -> f64 {
        self.terms.get(exps).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, exps: Exponents, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let slot = self.terms.entry(exps.clone()).or_insert(0.0);
        *slot += coeff;
        if *slot == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, c)| (e.clone(), c * s)),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.nvars, 1.0), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * eval_monomial(e, x))
            .sum()
    }

    /// `p(F x + g)` expanded in the monomials of `x`.
    pub fn compose_affine(&self, f: &Mat, g: &Vector) -> Self {
        let n = f.ncols();
        let images: Vec<Polynomial> = (0..f.nrows())
            .map(|i| {
                let mut p = Polynomial::constant(n, g[i]);
                for j in 0..n {
                    p = p.add(&Polynomial::var(n, j).scale(f[(i, j)]));
                }
                p
            })
            .collect();
        let mut out = Polynomial::zero(n);
        for (e, c) in &self.terms {
            let mut term = Polynomial::constant(n, *c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&images[i].pow(k));
                }
            }
            out = out.add(&term);
        }
        out
    }
}

pub fn eval_monomial(exps: &[u32], x: &Vector) -> f64 {
    exps.iter()
        .enumerate()
        .map(|(i, &k)| x[i].powi(k as i32))
        .product()
}

/// Renders `[2, 0]` as `2,0`.
pub fn format_exponents(e: &[u32]) -> String {
    e.iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
