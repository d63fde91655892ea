//! Graph correlation density field `C(u, v) = p(x, y) / (p(x) p(y))` at
//! `x = Q(u)`, `y = Q(v)`, its orthogonal expansion in products of LP basis
//! functions, and rank-ordered component selection with the
//! `k log(N) / N` penalty.
//!
//! A field is stored cell-wise. Cell `(x, y)` covers the rectangle between
//! consecutive CDF breakpoints of the two marginals and has area
//! `p(x) p(y)`; cells of zero-probability nodes have zero area and hold 0.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{JointPmf, Marginal};
use crate::transform::LpMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Empirical,
    Reconstructed,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Empirical => "empirical",
            FieldKind::Reconstructed => "reconstructed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub marginal_u: Marginal,
    pub marginal_v: Marginal,
    pub cells: Array2<f64>,
    pub kind: FieldKind,
}

impl DensityField {
    /// A field with the given cell values, zeroed off the support.
    pub fn from_cells(
        marginal_u: Marginal,
        marginal_v: Marginal,
        mut cells: Array2<f64>,
        kind: FieldKind,
    ) -> Result<Self> {
        let n = (marginal_u.n(), marginal_v.n());
        if cells.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "cells are {:?}, marginals cover {:?}",
                cells.dim(),
                n
            )));
        }
        for ((x, y), c) in cells.indexed_iter_mut() {
            if marginal_u.prob(x) == 0.0 || marginal_v.prob(y) == 0.0 {
                *c = 0.0;
            }
        }
        Ok(DensityField {
            marginal_u,
            marginal_v,
            cells,
            kind,
        })
    }

    pub fn breakpoints_u(&self) -> Vec<f64> {
        self.marginal_u.breakpoints()
    }

    pub fn breakpoints_v(&self) -> Vec<f64> {
        self.marginal_v.breakpoints()
    }

    /// Field value at a point of `(0, 1]^2`.
    pub fn value_at(&self, u: f64, v: f64) -> Result<f64> {
        let x = self.marginal_u.quantile(u)?;
        let y = self.marginal_v.quantile(v)?;
        Ok(self.cells[[x, y]])
    }

    fn cell_sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut total = 0.0;
        for &x in self.marginal_u.support() {
            let px = self.marginal_u.prob(x);
            for &y in self.marginal_v.support() {
                total += f(self.cells[[x, y]]) * px * self.marginal_v.prob(y);
            }
        }
        total
    }

    /// Exact integral over the unit square.
    pub fn integrate(&self) -> f64 {
        self.cell_sum(|c| c)
    }
}

pub fn empirical_field(joint: &JointPmf, mx: &Marginal, my: &Marginal) -> Result<DensityField> {
    let n = joint.n();
    if mx.n() != n || my.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "joint is {n}x{n}, marginals cover {} and {} nodes",
            mx.n(),
            my.n()
        )));
    }
    let mut cells = Array2::zeros((n, n));
    for &x in mx.support() {
        for &y in my.support() {
            cells[[x, y]] = joint.probs[[x, y]] / (mx.prob(x) * my.prob(y));
        }
    }
    DensityField::from_cells(mx.clone(), my.clone(), cells, FieldKind::Empirical)
}

/// Exact `integral of C^2` by cell quadrature.
pub fn integrate_squared(f: &DensityField) -> f64 {
    f.cell_sum(|c| c * c)
}

/// Outcome of rank-ordered component selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Retained `(j, k)` (1-based), by decreasing squared coefficient.
    pub chosen: Vec<(usize, usize)>,
    pub k_star: usize,
    /// `criterion_trace[k]` is the penalized cumulative sum of the `k`
    /// largest squared coefficients; entry 0 is the empty model (0).
    pub criterion_trace: Vec<f64>,
}

impl Selection {
    /// Every coefficient of the grid, ranked, with no penalty trace.
    pub fn full(lp: &LpMatrix) -> Selection {
        let squares: Vec<f64> = lp.coeffs.iter().map(|c| c * c).collect();
        let order = rank_descending(&squares);
        let my = lp.my();
        let chosen: Vec<(usize, usize)> = order.iter().map(|&i| (i / my + 1, i % my + 1)).collect();
        Selection {
            k_star: chosen.len(),
            chosen,
            criterion_trace: Vec::new(),
        }
    }

    pub fn empty() -> Selection {
        Selection {
            chosen: Vec::new(),
            k_star: 0,
            criterion_trace: vec![0.0],
        }
    }
}

/// Indices of `values` sorted by decreasing value; ties keep input order.
pub(crate) fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

/// Ranks `squares` and maximizes `sum_{i<=k} s_(i) - k log(N) / N` over
/// `k = 0..=len`. Returns (ranking, k_star, trace).
pub(crate) fn penalized_rank_select(
    squares: &[f64],
    total_weight: f64,
) -> Result<(Vec<usize>, usize, Vec<f64>)> {
    if total_weight.is_nan() || total_weight <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "component selection needs total weight N > 1, got {total_weight}"
        )));
    }
    let penalty = total_weight.ln() / total_weight;
    let order = rank_descending(squares);
    let mut trace = Vec::with_capacity(squares.len() + 1);
    trace.push(0.0);
    let mut cum = 0.0;
    let mut best = 0usize;
    for (i, &idx) in order.iter().enumerate() {
        cum += squares[idx];
        let k = i + 1;
        let crit = cum - k as f64 * penalty;
        if crit > trace[best] {
            best = k;
        }
        trace.push(crit);
    }
    Ok((order, best, trace))
}

pub fn select_components(lp: &LpMatrix) -> Result<Selection> {
    let squares: Vec<f64> = lp.coeffs.iter().map(|c| c * c).collect();
    let (order, k_star, criterion_trace) = penalized_rank_select(&squares, lp.total_weight)?;
    let my = lp.my();
    let chosen = order[..k_star]
        .iter()
        .map(|&i| (i / my + 1, i % my + 1))
        .collect();
    Ok(Selection {
        chosen,
        k_star,
        criterion_trace,
    })
}

/// `1 + sum_{(j,k) in sel} LP[j, k] T_j(x) T_k(y)` on the support.
pub fn reconstruct_field(lp: &LpMatrix, sel: &Selection) -> Result<DensityField> {
    let (mx, my) = (lp.mx(), lp.my());
    let mut kept = Array2::<f64>::zeros((mx, my));
    for &(j, k) in &sel.chosen {
        if j == 0 || k == 0 || j > mx || k > my {
            return Err(Error::Index {
                index: if j == 0 || j > mx { j } else { k },
                max: if j == 0 || j > mx { mx } else { my },
            });
        }
        kept[[j - 1, k - 1]] = lp.coeffs[[j - 1, k - 1]];
    }
    let tx = lp.basis_x.values();
    let ty = lp.basis_y.values();
    let mut cells = tx.t().dot(&kept).dot(ty);
    cells.mapv_inplace(|v| v + 1.0);
    DensityField::from_cells(
        lp.basis_x.marginal().clone(),
        lp.basis_y.marginal().clone(),
        cells,
        FieldKind::Reconstructed,
    )
}

/// Field values at the midpoints of a uniform `resolution x resolution`
/// grid on the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub resolution: usize,
    pub clip: bool,
    /// Reported values, clipped at zero when `clip` is set.
    pub values: Array2<f64>,
    /// Unclipped values.
    pub raw: Array2<f64>,
}

impl Grid {
    /// Midpoint coordinate of row/column `i`.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.resolution as f64
    }
}

pub fn evaluate_grid(f: &DensityField, resolution: usize, clip_nonnegative: bool) -> Result<Grid> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid resolution must be at least 2, got {resolution}"
        )));
    }
    let r = resolution as f64;
    let xs: Vec<usize> = (0..resolution)
        .map(|i| f.marginal_u.quantile_unchecked((i as f64 + 0.5) / r))
        .collect();
    let ys: Vec<usize> = (0..resolution)
        .map(|i| f.marginal_v.quantile_unchecked((i as f64 + 0.5) / r))
        .collect();
    let raw = Array2::from_shape_fn((resolution, resolution), |(i, j)| f.cells[[xs[i], ys[j]]]);
    let values = if clip_nonnegative {
        raw.mapv(|v| v.max(0.0))
    } else {
        raw.clone()
    };
    Ok(Grid {
        resolution,
        clip: clip_nonnegative,
        values,
        raw,
    })
}
