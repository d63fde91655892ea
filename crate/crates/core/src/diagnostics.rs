//! Null-model diagnostics: the LP correlogram with its `1.96 / sqrt(N)`
//! band, the chi-square LPINFOR test, and Monte Carlo sampling from the
//! null model `p(x, y) = p(x) p(y)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::basis::build_basis;
use crate::error::{Error, Result};
use crate::field::Selection;
use crate::generators::replicate_rng;
use crate::graph::{joint_pmf, marginals, Graph, Marginal};
use crate::transform::{lp_coefficients, LpMatrix};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelogramEntry {
    pub j: usize,
    pub k: usize,
    pub lp: f64,
    /// `sqrt(N) * lp`.
    pub standardized: f64,
    pub outside_band: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correlogram {
    pub entries: Vec<CorrelogramEntry>,
    pub band_halfwidth: f64,
    pub total_weight: f64,
}

impl Correlogram {
    pub fn outside_fraction(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().filter(|e| e.outside_band).count() as f64 / self.entries.len() as f64
    }
}

pub fn correlogram(lp: &LpMatrix) -> Result<Correlogram> {
    let n_total = lp.total_weight;
    if n_total.is_nan() || n_total <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "correlogram needs N > 0, got {n_total}"
        )));
    }
    let root = n_total.sqrt();
    let band_halfwidth = Z_95 / root;
    let entries = lp
        .entries()
        .map(|(j, k, v)| CorrelogramEntry {
            j,
            k,
            lp: v,
            standardized: root * v,
            outside_band: v.abs() > band_halfwidth,
        })
        .collect();
    Ok(Correlogram {
        entries,
        band_halfwidth,
        total_weight: n_total,
    })
}

/// Which coefficients enter the LPINFOR statistic.
#[derive(Debug, Clone, Copy)]
pub enum TestSet<'a> {
    /// Every coefficient of the grid; `df` is the grid size.
    Full,
    /// The selected coefficients; `df = k_star`, flagged as post-selection.
    Selected(&'a Selection),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub reject_at_5pct: bool,
    pub post_selection: bool,
}

pub fn lpinfor_test(lp: &LpMatrix, set: TestSet<'_>) -> Result<TestResult> {
    let n_total = lp.total_weight;
    if n_total.is_nan() || n_total <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "LPINFOR test needs N > 1, got {n_total}"
        )));
    }
    let (sum_sq, df, post_selection) = match set {
        TestSet::Full => (
            lp.coeffs.iter().map(|c| c * c).sum::<f64>(),
            lp.coeffs.len(),
            false,
        ),
        TestSet::Selected(sel) => {
            let mut s = 0.0;
            for &(j, k) in &sel.chosen {
                if j == 0 || k == 0 || j > lp.mx() || k > lp.my() {
                    return Err(Error::Index {
                        index: j.max(k),
                        max: lp.mx().max(lp.my()),
                    });
                }
                s += lp.get(j, k).powi(2);
            }
            (s, sel.chosen.len(), true)
        }
    };
    if df == 0 {
        return Ok(TestResult {
            statistic: 0.0,
            df: 0,
            p_value: 1.0,
            reject_at_5pct: false,
            post_selection,
        });
    }
    let statistic = n_total * sum_sq;
    let chi = ChiSquared::new(df as f64)
        .map_err(|e| Error::InvalidParameter(format!("chi-square with {df} df: {e}")))?;
    let p_value = chi.sf(statistic).clamp(0.0, 1.0);
    Ok(TestResult {
        statistic,
        df,
        p_value,
        reject_at_5pct: p_value < 0.05,
        post_selection,
    })
}

fn check_marginal(m: &Marginal) -> Result<()> {
    if m.support().len() < 2 {
        return Err(Error::DegenerateMarginal {
            support: m.support().len(),
        });
    }
    Ok(())
}

pub(crate) fn sample_null_with(
    mx: &Marginal,
    my: &Marginal,
    edges: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Graph> {
    check_marginal(mx)?;
    check_marginal(my)?;
    if mx.n() != my.n() {
        return Err(Error::DimensionMismatch(format!(
            "marginals cover {} and {} nodes",
            mx.n(),
            my.n()
        )));
    }
    if edges == 0 {
        return Err(Error::InvalidParameter(
            "null sampling needs at least one edge".into(),
        ));
    }
    let n = mx.n();
    let mut a = ndarray::Array2::<f64>::zeros((n, n));
    for _ in 0..edges {
        // 1 - U lies in (0, 1], the quantile's domain
        let x = mx.quantile_unchecked(1.0 - rng.random::<f64>());
        let y = my.quantile_unchecked(1.0 - rng.random::<f64>());
        a[[x, y]] += 1.0;
    }
    Graph::from_matrix(a, true, None)
}

/// Draws `edges` i.i.d. directed edges with `P(x -> y) = p(x) p(y)`. Each
/// edge consumes two uniforms, sender first.
pub fn sample_null(mx: &Marginal, my: &Marginal, edges: u64, seed: u64) -> Result<Graph> {
    let mut rng = replicate_rng(seed, 0);
    sample_null_with(mx, my, edges, &mut rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedMoments {
    pub j: usize,
    pub k: usize,
    /// Replicates in which coefficient `(j, k)` existed.
    pub count: usize,
    pub mean: f64,
    /// Sample variance; `None` with fewer than two replicates.
    pub variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullSummary {
    pub reps: usize,
    pub entries: Vec<StandardizedMoments>,
    /// Fraction of all recorded coefficients outside `1.96 / sqrt(N)`.
    pub band_exceedance: f64,
}

impl NullSummary {
    pub fn entry(&self, j: usize, k: usize) -> Option<&StandardizedMoments> {
        self.entries.iter().find(|e| e.j == j && e.k == k)
    }
}

/// Monte Carlo distribution of `sqrt(N) * LP[j, k]` over `reps` null
/// graphs, for `j <= grid.0`, `k <= grid.1`. Replicate `r` draws from
/// stream `r` of `seed`; bases come from each replicate's own marginals.
pub fn standardized_coefficient_distribution(
    mx: &Marginal,
    my: &Marginal,
    edges: u64,
    reps: usize,
    seed: u64,
    grid: (usize, usize),
) -> Result<NullSummary> {
    let (jmax, kmax) = grid;
    if jmax == 0 || kmax == 0 {
        return Err(Error::InvalidParameter("grid must be at least 1x1".into()));
    }
    let mut sums = vec![(0usize, 0.0f64, 0.0f64); jmax * kmax];
    let mut outside = 0usize;
    let mut recorded = 0usize;
    for rep in 0..reps {
        let mut rng = replicate_rng(seed, rep as u64);
        let g = sample_null_with(mx, my, edges, &mut rng)?;
        let (px, py) = marginals(&g);
        if px.support().len() < 2 || py.support().len() < 2 {
            continue;
        }
        let bx = build_basis(&px, jmax)?;
        let by = build_basis(&py, kmax)?;
        let lp = lp_coefficients(&joint_pmf(&g), &bx, &by)?;
        let root = lp.total_weight.sqrt();
        for (j, k, v) in lp.entries() {
            let z = root * v;
            let slot = &mut sums[(j - 1) * kmax + (k - 1)];
            slot.0 += 1;
            slot.1 += z;
            slot.2 += z * z;
            recorded += 1;
            if z.abs() > Z_95 {
                outside += 1;
            }
        }
    }
    let entries = sums
        .iter()
        .enumerate()
        .map(|(i, &(count, s, s2))| {
            let mean = if count > 0 {
                s / count as f64
            } else {
                f64::NAN
            };
            let variance =
                (count >= 2).then(|| (s2 - count as f64 * mean * mean) / (count - 1) as f64);
            StandardizedMoments {
                j: i / kmax + 1,
                k: i % kmax + 1,
                count,
                mean,
                variance,
            }
        })
        .collect();
    Ok(NullSummary {
        reps,
        entries,
        band_exceedance: if recorded > 0 {
            outside as f64 / recorded as f64
        } else {
            0.0
        },
    })
}
