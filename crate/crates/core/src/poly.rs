//! Sparse multivariate polynomials over a scalar backend.
//!
//! Coefficients are indexed by exponent vectors; term order is the BTreeMap
//! order of the exponent vectors, which keeps iteration deterministic.

use std::collections::BTreeMap;

use crate::scalar::Coeff;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly<K: Coeff> {
    dim: usize,
    terms: BTreeMap<Vec<u32>, K>,
}

impl<K: Coeff> MultiPoly<K> {
    pub fn zero(dim: usize) -> Self {
        MultiPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, value: K) -> Self {
        let mut p = Self::zero(dim);
        if !value.is_zero() {
            p.terms.insert(vec![0; dim], value);
        }
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, K::one())
    }

    /// The coordinate monomial for one axis.
    pub fn var(dim: usize, axis: usize) -> Self {
        assert!(axis < dim, "axis out of range");
        let mut exp = vec![0u32; dim];
        exp[axis] = 1;
        let mut p = Self::zero(dim);
        p.terms.insert(exp, K::one());
        p
    }

    pub fn monomial(dim: usize, exp: Vec<u32>, coef: K) -> Self {
        assert_eq!(exp.len(), dim);
        let mut p = Self::zero(dim);
        if !coef.is_zero() {
            p.terms.insert(exp, coef);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    /// Constant coefficient of a constant polynomial, if it is one.
    pub fn as_constant(&self) -> Option<K> {
        if self.terms.is_empty() {
            return Some(K::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &K)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn insert_add(&mut self, exp: Vec<u32>, coef: K) {
        match self.terms.get_mut(&exp) {
            Some(c) => {
                let sum = c.add(&coef);
                if sum.is_zero() {
                    self.terms.remove(&exp);
                } else {
                    *c = sum;
                }
            }
            None => {
                if !coef.is_zero() {
                    self.terms.insert(exp, coef);
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, k: &K) -> Self {
        if k.is_zero() {
            return Self::zero(self.dim);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.mul(k);
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut out = Self::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let exp: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert_add(exp, ca.mul(cb));
            }
        }
        out
    }

    pub fn eval(&self, point: &[K]) -> K {
        assert_eq!(point.len(), self.dim);
        let mut acc = K::zero();
        for (exp, coef) in &self.terms {
            let mut term = coef.clone();
            for (axis, &e) in exp.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&point[axis].pow_u(e));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Largest exponent used per axis; `0` for unused axes.
    pub fn max_exps(&self) -> Vec<u32> {
        let mut m = vec![0u32; self.dim];
        for exp in self.terms.keys() {
            for (axis, &e) in exp.iter().enumerate() {
                if e > m[axis] {
                    m[axis] = e;
                }
            }
        }
        m
    }

    /// Evaluate with precomputed per-axis power tables: `powers[axis][e]`.
    pub fn eval_tables(&self, powers: &[Vec<K>]) -> K {
        let mut acc = K::zero();
        for (exp, coef) in &self.terms {
            let mut term = coef.clone();
            for (axis, &e) in exp.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&powers[axis][e as usize]);
                }
            }
            acc = acc.add(&term);
        }
        acc
    }
}
