//! Smooth graphon estimation by factoring the edge-probability surface into
//! the null model `p(x) p(y)` and the graph correlation density field:
//!
//! ```text
//! W(x, y) = scale * p(x) * p(y) * C(F(x), F(y))
//! ```
//!
//! Marginals may be the empirical degree distributions or their smoothed
//! versions, expanded in discrete Legendre polynomials around the uniform
//! distribution with the same penalized selection used for the field.

use ndarray::Array2;

use crate::basis::{build_basis, build_full_basis, default_degree, discrete_legendre, LpBasis};
use crate::error::{Error, Result};
use crate::field::{
    evaluate_grid, penalized_rank_select, reconstruct_field, select_components, DensityField,
    FieldKind, Grid, Selection,
};
use crate::graph::{joint_pmf, marginals, Graph, Marginal};
use crate::transform::lp_coefficients;

/// Coefficients `LP[j; p0, p] = sum_x p(x) T_j(x; p0)` of `p` against the
/// discrete Legendre basis, `j = 1..=min(10, n - 1)`.
pub fn marginal_lp_coefficients(m: &Marginal) -> Result<Vec<f64>> {
    let n = m.n();
    if n < 2 {
        return Err(Error::DegenerateMarginal { support: n });
    }
    let basis = discrete_legendre(n, 10.min(n - 1))?;
    Ok(project(m, &basis))
}

fn project(m: &Marginal, basis: &LpBasis) -> Vec<f64> {
    basis
        .values()
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(m.probs()).map(|(t, p)| t * p).sum())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedMarginal {
    /// The uniform reference distribution `1 / n`.
    pub base: Marginal,
    /// All computed coefficients `LP[j; p0, p]`, `j = 1..`.
    pub coefficients: Vec<f64>,
    /// Retained `j` (1-based), by decreasing squared coefficient.
    pub chosen: Vec<usize>,
    pub k_star: usize,
    /// Penalized cumulative sums, entry 0 for the empty model.
    pub criterion_trace: Vec<f64>,
    /// Series value before clipping; may be negative.
    pub raw_probs: Vec<f64>,
    /// Clipped at zero and renormalized.
    pub probs: Vec<f64>,
}

impl SmoothedMarginal {
    pub fn marginal(&self) -> Marginal {
        Marginal::from_weights(&self.probs).expect("smoothed probabilities are normalized")
    }
}

/// Smooths `m` with the default number of discrete Legendre terms.
/// `total_weight` is the graph's `N`, which sets the `log(N) / N` penalty.
pub fn smooth_marginal(m: &Marginal, total_weight: f64) -> Result<SmoothedMarginal> {
    let n = m.n();
    if n < 2 {
        return Err(Error::DegenerateMarginal { support: n });
    }
    smooth_marginal_with(m, total_weight, 10.min(n - 1), true)
}

/// `select = false` keeps every computed coefficient.
pub fn smooth_marginal_with(
    m: &Marginal,
    total_weight: f64,
    degree: usize,
    select: bool,
) -> Result<SmoothedMarginal> {
    let n = m.n();
    if n < 2 {
        return Err(Error::DegenerateMarginal { support: n });
    }
    let basis = discrete_legendre(n, degree)?;
    let coefficients = project(m, &basis);
    let squares: Vec<f64> = coefficients.iter().map(|c| c * c).collect();
    let (order, k_star, criterion_trace) = if select {
        penalized_rank_select(&squares, total_weight)?
    } else {
        let order = crate::field::rank_descending(&squares);
        (order, coefficients.len(), Vec::new())
    };
    let chosen: Vec<usize> = order[..k_star].iter().map(|&j| j + 1).collect();

    let p0 = 1.0 / n as f64;
    let raw_probs: Vec<f64> = (0..n)
        .map(|x| {
            let series: f64 = chosen
                .iter()
                .map(|&j| coefficients[j - 1] * basis.value(j, x))
                .sum();
            p0 * (1.0 + series)
        })
        .collect();
    let clipped: Vec<f64> = raw_probs.iter().map(|p| p.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let probs = clipped.iter().map(|p| p / total).collect();
    Ok(SmoothedMarginal {
        base: Marginal::uniform(n)?,
        coefficients,
        chosen,
        k_star,
        criterion_trace,
        raw_probs,
        probs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalMode {
    Empirical,
    Smoothed,
}

impl MarginalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MarginalMode::Empirical => "empirical",
            MarginalMode::Smoothed => "smoothed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// Full-rank bases, every coefficient kept.
    Full,
    /// Default-size bases, penalized selection.
    Selected,
}

impl SelectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMode::Full => "full",
            SelectionMode::Selected => "selected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleConvention {
    /// Multiply by `N` so the estimate is on the edge-probability scale.
    TotalWeight,
    /// No scaling: `p(x) p(y) C` is on the `A / N` scale.
    Raw,
}

impl ScaleConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            ScaleConvention::TotalWeight => "total_weight",
            ScaleConvention::Raw => "raw_density",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphonOptions {
    pub marginal_mode: MarginalMode,
    pub selection_mode: SelectionMode,
    pub scale_convention: ScaleConvention,
    /// Basis size for `Selected`; defaults to `min(10, |support| - 1)`.
    pub max_degree: Option<usize>,
}

impl Default for GraphonOptions {
    fn default() -> Self {
        GraphonOptions {
            marginal_mode: MarginalMode::Smoothed,
            selection_mode: SelectionMode::Selected,
            scale_convention: ScaleConvention::TotalWeight,
            max_degree: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphonEstimate {
    /// Estimate with negative cells clipped to zero.
    pub field: DensityField,
    /// Unclipped estimate.
    pub raw: DensityField,
    pub scale: f64,
    pub scale_convention: ScaleConvention,
    pub marginal_mode: MarginalMode,
    pub selection_mode: SelectionMode,
    pub selection: Selection,
    /// Cells whose raw value was negative.
    pub clipped_cells: usize,
    /// Cells above 1; kept as is.
    pub over_one_cells: usize,
}

pub fn estimate_graphon(g: &Graph, opts: &GraphonOptions) -> Result<GraphonEstimate> {
    let (mx, my) = marginals(g);
    let joint = joint_pmf(g);
    let (bx, by) = match opts.selection_mode {
        SelectionMode::Full => (build_full_basis(&mx)?, build_full_basis(&my)?),
        SelectionMode::Selected => (
            build_basis(
                &mx,
                opts.max_degree
                    .unwrap_or_else(|| default_degree(&mx))
                    .max(1),
            )?,
            build_basis(
                &my,
                opts.max_degree
                    .unwrap_or_else(|| default_degree(&my))
                    .max(1),
            )?,
        ),
    };
    let lp = lp_coefficients(&joint, &bx, &by)?;
    let selection = match opts.selection_mode {
        SelectionMode::Full => Selection::full(&lp),
        SelectionMode::Selected => select_components(&lp)?,
    };
    let c_hat = reconstruct_field(&lp, &selection)?;

    let (px, py) = match opts.marginal_mode {
        MarginalMode::Empirical => (mx, my),
        MarginalMode::Smoothed => {
            let sx = smooth_marginal(&mx, g.total_weight())?.marginal();
            let sy = if g.is_directed() {
                smooth_marginal(&my, g.total_weight())?.marginal()
            } else {
                sx.clone()
            };
            (sx, sy)
        }
    };
    let scale = match opts.scale_convention {
        ScaleConvention::TotalWeight => g.total_weight(),
        ScaleConvention::Raw => 1.0,
    };
    let n = g.n();
    let raw_cells = Array2::from_shape_fn((n, n), |(x, y)| {
        scale * px.prob(x) * py.prob(y) * c_hat.cells[[x, y]]
    });
    let raw = DensityField::from_cells(px, py, raw_cells, FieldKind::Reconstructed)?;
    let clipped_cells = raw.cells.iter().filter(|&&v| v < 0.0).count();
    let over_one_cells = raw.cells.iter().filter(|&&v| v > 1.0).count();
    let mut field = raw.clone();
    field.cells.mapv_inplace(|v| v.max(0.0));
    Ok(GraphonEstimate {
        field,
        raw,
        scale,
        scale_convention: opts.scale_convention,
        marginal_mode: opts.marginal_mode,
        selection_mode: opts.selection_mode,
        selection,
        clipped_cells,
        over_one_cells,
    })
}

/// Midpoint grid of the estimate: clipped values plus the raw surface.
pub fn evaluate_graphon_grid(w: &GraphonEstimate, resolution: usize) -> Result<Grid> {
    evaluate_grid(&w.raw, resolution, true)
}

/// Mean clipped cell value within each pair of contiguous node blocks.
/// With `exclude_diagonal`, self-pairs are left out of the averages.
pub fn block_averages(
    w: &GraphonEstimate,
    sizes: &[usize],
    exclude_diagonal: bool,
) -> Result<Array2<f64>> {
    let n: usize = sizes.iter().sum();
    if n != w.field.cells.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "block sizes cover {n} nodes, estimate has {}",
            w.field.cells.nrows()
        )));
    }
    let block: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let nb = sizes.len();
    let mut sum = Array2::<f64>::zeros((nb, nb));
    let mut count = Array2::<f64>::zeros((nb, nb));
    for ((x, y), &v) in w.field.cells.indexed_iter() {
        if exclude_diagonal && x == y {
            continue;
        }
        sum[[block[x], block[y]]] += v;
        count[[block[x], block[y]]] += 1.0;
    }
    Ok(&sum / &count)
}
