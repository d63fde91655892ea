//! Degree-weighted discrete orthonormal polynomials ("LP basis").
//!
//! The first function is the standardized mid-distribution transform
//!
//! ```text
//! T1(x) = sqrt(12) (Fmid(x) - 1/2) / sqrt(1 - sum_x p(x)^3)
//! ```
//!
//! and the rest come from Gram-Schmidt on successive powers of `T1` under
//! the inner product `<f, g> = sum_x f(x) g(x) p(x)`, with the constant
//! function first in line so every basis function has zero mean.
//!
//! Raw powers of `T1` lose linear independence in floating point long
//! before the discrete space is exhausted, so the degree-`d` candidate is
//! `T1 * T_{d-1}` rather than `T1^d`. Both span the same polynomial space
//! and Gram-Schmidt produces the same functions (leading coefficients are
//! positive either way), but the product form keeps full-rank bases
//! attainable on every support size we handle.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::graph::Marginal;

/// Residual-to-candidate norm ratio below which a candidate counts as
/// linearly dependent and construction stops.
pub const DEFAULT_DEPENDENCE_TOL: f64 = 1e-9;

/// Basis size used when a caller does not ask for one.
pub const DEFAULT_MAX_DEGREE: usize = 10;

/// `min(10, |support| - 1)`.
pub fn default_degree(m: &Marginal) -> usize {
    DEFAULT_MAX_DEGREE.min(m.support().len().saturating_sub(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpBasis {
    marginal: Marginal,
    /// `values[[j, x]]` is `T_{j+1}(x)`; zero for nodes off the support.
    values: Array2<f64>,
}

impl LpBasis {
    /// Number of basis functions constructed.
    pub fn m(&self) -> usize {
        self.values.nrows()
    }

    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn marginal(&self) -> &Marginal {
        &self.marginal
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// `T_j(x)` with 1-based `j`.
    pub fn value(&self, j: usize, x: usize) -> f64 {
        self.values[[j - 1, x]]
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.marginal.breakpoints()
    }

    /// `S_j(u) = T_j(Q(u))`: the basis function on the unit interval.
    pub fn eval_s(&self, j: usize, u: f64) -> Result<f64> {
        if j == 0 || j > self.m() {
            return Err(Error::Index {
                index: j,
                max: self.m(),
            });
        }
        let x = self.marginal.quantile(u)?;
        Ok(self.value(j, x))
    }

    /// Keeps the first `m` functions.
    pub fn truncated(&self, m: usize) -> LpBasis {
        let m = m.min(self.m());
        LpBasis {
            marginal: self.marginal.clone(),
            values: self.values.slice(ndarray::s![..m, ..]).to_owned(),
        }
    }
}

/// The first LP function, on the full index space.
pub fn t1(m: &Marginal) -> Result<Array1<f64>> {
    let support = m.support();
    if support.len() < 2 {
        return Err(Error::DegenerateMarginal {
            support: support.len(),
        });
    }
    let cube_sum: f64 = support.iter().map(|&x| m.prob(x).powi(3)).sum();
    let scale = 12f64.sqrt() / (1.0 - cube_sum).sqrt();
    let mut t = Array1::zeros(m.n());
    for &x in support {
        t[x] = scale * (m.midcdf()[x] - 0.5);
    }
    Ok(t)
}

/// Builds up to `min(max_degree, |support| - 1)` orthonormal functions.
pub fn build_basis(m: &Marginal, max_degree: usize) -> Result<LpBasis> {
    build_basis_with_tol(m, max_degree, DEFAULT_DEPENDENCE_TOL)
}

pub fn build_basis_with_tol(m: &Marginal, max_degree: usize, tol: f64) -> Result<LpBasis> {
    if max_degree == 0 {
        return Err(Error::InvalidParameter(
            "max_degree must be at least 1".into(),
        ));
    }
    let first = t1(m)?;
    let support = m.support();
    let s = support.len();
    let cap = max_degree.min(s - 1);
    let weights: Vec<f64> = support.iter().map(|&x| m.prob(x)).collect();
    let t1s: Vec<f64> = support.iter().map(|&x| first[x]).collect();

    let dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(&weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    };

    // Orthonormal set on the support, starting from the constant function.
    let mut ortho: Vec<Vec<f64>> = vec![vec![1.0; s]];
    for _ in 0..cap {
        let prev = ortho.last().expect("non-empty");
        let mut cand: Vec<f64> = t1s.iter().zip(prev).map(|(t, q)| t * q).collect();
        let pre_norm = dot(&cand, &cand).sqrt();
        // modified Gram-Schmidt, then one re-orthogonalization pass
        for _ in 0..2 {
            for q in &ortho {
                let c = dot(&cand, q);
                for (v, qi) in cand.iter_mut().zip(q) {
                    *v -= c * qi;
                }
            }
        }
        let norm = dot(&cand, &cand).sqrt();
        if norm.is_nan() || norm < tol * pre_norm || norm == 0.0 {
            break;
        }
        for v in cand.iter_mut() {
            *v /= norm;
        }
        ortho.push(cand);
    }

    let k = ortho.len() - 1;
    let mut values = Array2::zeros((k, m.n()));
    for (j, q) in ortho.iter().skip(1).enumerate() {
        for (i, &x) in support.iter().enumerate() {
            values[[j, x]] = q[i];
        }
    }
    Ok(LpBasis {
        marginal: m.clone(),
        values,
    })
}

/// Full basis of `|support| - 1` functions.
pub fn build_full_basis(m: &Marginal) -> Result<LpBasis> {
    build_basis(m, m.support().len().max(2) - 1)
}

/// LP basis of the discrete uniform distribution on `n` points (discrete
/// Legendre polynomials).
pub fn discrete_legendre(n: usize, max_degree: usize) -> Result<LpBasis> {
    if n < 2 {
        return Err(Error::DegenerateMarginal { support: n });
    }
    build_basis(&Marginal::uniform(n)?, max_degree)
}
