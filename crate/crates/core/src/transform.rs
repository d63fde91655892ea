//! LP graph transform: `LP[j, k] = sum_{x,y} p(x, y) T_j(x) T_k(y)`.

use ndarray::Array2;

use crate::basis::LpBasis;
use crate::error::{Error, Result};
use crate::graph::JointPmf;

#[derive(Debug, Clone, PartialEq)]
pub struct LpMatrix {
    /// `coeffs[[j - 1, k - 1]] = LP[j, k]`.
    pub coeffs: Array2<f64>,
    pub total_weight: f64,
    pub basis_x: LpBasis,
    pub basis_y: LpBasis,
}

impl LpMatrix {
    pub fn mx(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn my(&self) -> usize {
        self.coeffs.ncols()
    }

    /// `LP[j, k]` with 1-based indices.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.coeffs[[j - 1, k - 1]]
    }

    /// All `(j, k, LP[j, k])` in row-major order, 1-based.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.coeffs
            .indexed_iter()
            .map(|((j, k), &v)| (j + 1, k + 1, v))
    }

    /// Restricts to the leading `jmax x kmax` block.
    pub fn sub_grid(&self, jmax: usize, kmax: usize) -> LpMatrix {
        let jmax = jmax.min(self.mx());
        let kmax = kmax.min(self.my());
        LpMatrix {
            coeffs: self.coeffs.slice(ndarray::s![..jmax, ..kmax]).to_owned(),
            total_weight: self.total_weight,
            basis_x: self.basis_x.truncated(jmax),
            basis_y: self.basis_y.truncated(kmax),
        }
    }
}

pub fn lp_coefficients(joint: &JointPmf, bx: &LpBasis, by: &LpBasis) -> Result<LpMatrix> {
    let n = joint.n();
    if bx.n() != n || by.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "joint is {n}x{n}, bases cover {} and {} nodes",
            bx.n(),
            by.n()
        )));
    }
    // (p Ty^T) first, then Tx (p Ty^T); both products are sequential dot
    // products so the summation order is fixed.
    let weighted = joint.probs.dot(&by.values().t());
    let coeffs = bx.values().dot(&weighted);
    Ok(LpMatrix {
        coeffs,
        total_weight: joint.total_weight,
        basis_x: bx.clone(),
        basis_y: by.clone(),
    })
}

/// Sum of squared coefficients over the whole grid.
pub fn lpinfor(lp: &LpMatrix) -> f64 {
    lp.coeffs.iter().map(|c| c * c).sum()
}

/// Sum of squared coefficients over a chosen set of 1-based `(j, k)`.
pub fn lpinfor_of(lp: &LpMatrix, chosen: &[(usize, usize)]) -> f64 {
    chosen.iter().map(|&(j, k)| lp.get(j, k).powi(2)).sum()
}
