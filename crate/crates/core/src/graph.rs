//! Graph ingestion and the probability structures derived from a weighted
//! adjacency matrix: the sender/receiver marginals and the edge-normalized
//! joint distribution `p(x, y) = A(x, y) / N`.
//!
//! Node indices are 0-based inside the library. Text formats and the CLI
//! present them 1-based.

use std::collections::HashMap;
use std::fmt::Write as _;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Weighted adjacency matrix with a directedness flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    weights: Array2<f64>,
    directed: bool,
    labels: Option<Vec<String>>,
    total_weight: f64,
}

impl Graph {
    /// Builds a graph from a dense `n x n` weight matrix.
    ///
    /// Undirected graphs must have an exactly symmetric matrix.
    pub fn from_matrix(
        weights: Array2<f64>,
        directed: bool,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let (rows, cols) = weights.dim();
        if rows != cols {
            return Err(Error::InvalidGraph(format!(
                "adjacency must be square, got {rows}x{cols}"
            )));
        }
        if rows == 0 {
            return Err(Error::EmptyGraph);
        }
        if let Some(l) = &labels {
            if l.len() != rows {
                return Err(Error::InvalidGraph(format!(
                    "{} labels for {rows} nodes",
                    l.len()
                )));
            }
        }
        for ((x, y), &w) in weights.indexed_iter() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "weight A({}, {}) = {w} is not a finite nonnegative number",
                    x + 1,
                    y + 1
                )));
            }
            if !directed && w != weights[[y, x]] {
                return Err(Error::InvalidGraph(format!(
                    "undirected graph requires a symmetric matrix; A({}, {}) != A({}, {})",
                    x + 1,
                    y + 1,
                    y + 1,
                    x + 1
                )));
            }
        }
        let total_weight = weights.iter().sum::<f64>();
        if total_weight <= 0.0 {
            return Err(Error::EmptyGraph);
        }
        Ok(Graph {
            weights,
            directed,
            labels,
            total_weight,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.weights[[x, y]]
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of node `x`, falling back to its 1-based index.
    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => (x + 1).to_string(),
        }
    }

    /// `N`, the sum of all adjacency entries.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Re-indexes nodes by decreasing total (in + out) weight. Ties keep
    /// their input order. Labels follow their nodes; unlabeled graphs get
    /// their original 1-based indices as labels.
    pub fn reorder_by_degree(&self) -> Graph {
        let n = self.n();
        let degree: Vec<f64> = (0..n)
            .map(|x| self.weights.row(x).sum() + self.weights.column(x).sum())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| degree[b].total_cmp(&degree[a]));
        let weights = Array2::from_shape_fn((n, n), |(i, j)| self.weights[[order[i], order[j]]]);
        let labels = order.iter().map(|&x| self.label(x)).collect();
        Graph {
            weights,
            directed: self.directed,
            labels: Some(labels),
            total_weight: self.total_weight,
        }
    }

    /// Serializes to the edge-list format accepted by [`parse_edge_list`].
    ///
    /// A zero-weight self-loop is emitted for every node first so that
    /// re-parsing reproduces the node order and keeps isolated nodes.
    pub fn to_edge_list(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {} graph, {} nodes; zero-weight self-loops declare node order",
            if self.directed {
                "directed"
            } else {
                "undirected"
            },
            n
        );
        for x in 0..n {
            let l = self.label(x);
            let _ = writeln!(out, "{l} {l} 0");
        }
        for x in 0..n {
            let start = if self.directed { 0 } else { x };
            for y in start..n {
                let w = self.weights[[x, y]];
                if w == 0.0 {
                    continue;
                }
                if w == 1.0 {
                    let _ = writeln!(out, "{} {}", self.label(x), self.label(y));
                } else {
                    let _ = writeln!(out, "{} {} {}", self.label(x), self.label(y), w);
                }
            }
        }
        out
    }
}

/// Parses a whitespace-separated edge list.
///
/// Lines are `src dst` or `src dst weight`; blank lines and lines starting
/// with `#` are skipped. Node tokens are indexed in order of first
/// appearance. Repeated edges accumulate. In undirected mode each line adds
/// its weight to both `A(src, dst)` and `A(dst, src)`, except self-loops,
/// which are added once.
pub fn parse_edge_list(text: &str, directed: bool) -> Result<Graph> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        let weight = match tokens.len() {
            2 => 1.0,
            3 => {
                let w: f64 = tokens[2]
                    .parse()
                    .map_err(|_| parse_err(format!("non-numeric weight '{}'", tokens[2])))?;
                if !w.is_finite() {
                    return Err(parse_err(format!("non-finite weight '{}'", tokens[2])));
                }
                if w < 0.0 {
                    return Err(parse_err(format!("negative weight {w}")));
                }
                w
            }
            k => return Err(parse_err(format!("expected 2 or 3 tokens, found {k}"))),
        };
        let mut id = |tok: &str| -> usize {
            *index.entry(tok.to_string()).or_insert_with(|| {
                labels.push(tok.to_string());
                labels.len() - 1
            })
        };
        let src = id(tokens[0]);
        let dst = id(tokens[1]);
        edges.push((src, dst, weight));
    }

    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let n = labels.len();
    let mut a = Array2::<f64>::zeros((n, n));
    for (x, y, w) in edges {
        a[[x, y]] += w;
        if !directed && x != y {
            a[[y, x]] += w;
        }
    }
    Graph::from_matrix(a, directed, Some(labels))
}

/// Parses a dense adjacency matrix: `n` lines of `n` comma-separated
/// nonnegative reals.
pub fn parse_adjacency_csv(text: &str, directed: bool) -> Result<Graph> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("non-numeric entry '{tok}'"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let n = rows.len();
    if rows[0].len() != n {
        return Err(Error::InvalidGraph(format!(
            "adjacency must be square, got {n}x{}",
            rows[0].len()
        )));
    }
    let a = Array2::from_shape_fn((n, n), |(x, y)| rows[x][y]);
    Graph::from_matrix(a, directed, None)
}

/// A discrete distribution over node indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    probs: Vec<f64>,
    cdf: Vec<f64>,
    midcdf: Vec<f64>,
    support: Vec<usize>,
}

impl Marginal {
    /// Probabilities must be finite, nonnegative and sum to one within 1e-9.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty probability vector".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameter(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self::from_normalized(probs))
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyGraph);
        }
        Ok(Self::from_normalized(
            weights.iter().map(|w| w / total).collect(),
        ))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "uniform marginal needs n >= 1".into(),
            ));
        }
        Ok(Self::from_normalized(vec![1.0 / n as f64; n]))
    }

    fn from_normalized(probs: Vec<f64>) -> Self {
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cdf.push(acc);
        }
        let midcdf = probs.iter().zip(&cdf).map(|(p, f)| f - 0.5 * p).collect();
        let support = (0..probs.len()).filter(|&x| probs[x] > 0.0).collect();
        Marginal {
            probs,
            cdf,
            midcdf,
            support,
        }
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs[x]
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn midcdf(&self) -> &[f64] {
        &self.midcdf
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// CDF values at the support nodes: the right edges of the cells that
    /// partition the unit interval.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.support.iter().map(|&x| self.cdf[x]).collect()
    }

    /// Left-continuous inverse of the CDF: the smallest node with
    /// `F(x) >= u`. Zero-probability nodes are never returned.
    pub fn quantile(&self, u: f64) -> Result<usize> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain {
                value: u,
                domain: "(0, 1]",
            });
        }
        Ok(self.quantile_unchecked(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> usize {
        let s = &self.support;
        // first support node whose cdf reaches u; rounding can leave the
        // last cdf a hair under 1, so clamp to the last support node.
        let pos = s.partition_point(|&x| self.cdf[x] < u);
        s[pos.min(s.len() - 1)]
    }
}

/// Sender (row) and receiver (column) marginals. Identical for undirected
/// graphs.
pub fn marginals(g: &Graph) -> (Marginal, Marginal) {
    let n_total = g.total_weight();
    let a = g.weights();
    let px: Vec<f64> = a.rows().into_iter().map(|r| r.sum() / n_total).collect();
    if !g.is_directed() {
        let m = Marginal::from_normalized(px);
        return (m.clone(), m);
    }
    let py: Vec<f64> = a.columns().into_iter().map(|c| c.sum() / n_total).collect();
    (Marginal::from_normalized(px), Marginal::from_normalized(py))
}

/// Edge-normalized joint distribution over ordered node pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    pub probs: Array2<f64>,
    pub total_weight: f64,
}

impl JointPmf {
    pub fn n(&self) -> usize {
        self.probs.nrows()
    }
}

pub fn joint_pmf(g: &Graph) -> JointPmf {
    let n_total = g.total_weight();
    JointPmf {
        probs: g.weights().mapv(|w| w / n_total),
        total_weight: n_total,
    }
}
