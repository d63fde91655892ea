//! Seeded random graph samplers and their noise-free expected adjacency
//! matrices.
//!
//! Every sampler uses `ChaCha8Rng::seed_from_u64(seed)` and draws one
//! uniform `f64` per candidate pair in row-major order: `(x, y)` with
//! `x != y` for directed graphs, `x < y` for undirected ones. A pair carries
//! an edge when the draw is below its edge probability. No self-loops.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Marginal};

/// Independent RNG stream for replicate `rep` of a Monte Carlo run.
pub fn replicate_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    ErdosRenyi {
        n: usize,
        p: f64,
        directed: bool,
    },
    /// Undirected; only pairs across the two groups can be linked.
    Bipartite {
        n1: usize,
        n2: usize,
        p: f64,
    },
    /// Contiguous blocks; `probs[a][b]` links block `a` to block `b`.
    Sbm {
        sizes: Vec<usize>,
        probs: Vec<Vec<f64>>,
        directed: bool,
    },
    /// `edges` i.i.d. directed draws from uniform marginals on `n` nodes.
    Null {
        n: usize,
        edges: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub model: Model,
    pub seed: u64,
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "edge probability {p} outside [0, 1]"
        )))
    }
}

impl Model {
    pub fn validate(&self) -> Result<()> {
        match self {
            Model::ErdosRenyi { n, p, .. } => {
                if *n < 2 {
                    return Err(Error::InvalidParameter(format!("n = {n}, need n >= 2")));
                }
                check_prob(*p)
            }
            Model::Bipartite { n1, n2, p } => {
                if *n1 == 0 || *n2 == 0 {
                    return Err(Error::InvalidParameter(
                        "bipartite groups must be non-empty".into(),
                    ));
                }
                check_prob(*p)
            }
            Model::Sbm {
                sizes,
                probs,
                directed,
            } => {
                if sizes.is_empty() || sizes.contains(&0) {
                    return Err(Error::InvalidParameter(
                        "block sizes must be positive".into(),
                    ));
                }
                let b = sizes.len();
                if probs.len() != b || probs.iter().any(|r| r.len() != b) {
                    return Err(Error::InvalidParameter(format!(
                        "probability matrix must be {b}x{b}"
                    )));
                }
                for row in probs {
                    for &p in row {
                        check_prob(p)?;
                    }
                }
                if !directed && (0..b).any(|a| (0..a).any(|c| probs[a][c] != probs[c][a])) {
                    return Err(Error::InvalidParameter(
                        "undirected SBM requires a symmetric probability matrix".into(),
                    ));
                }
                Ok(())
            }
            Model::Null { n, edges } => {
                if *n < 2 {
                    return Err(Error::InvalidParameter(format!("n = {n}, need n >= 2")));
                }
                if *edges == 0 {
                    return Err(Error::InvalidParameter(
                        "null model needs edges >= 1".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Model::ErdosRenyi { n, .. } | Model::Null { n, .. } => *n,
            Model::Bipartite { n1, n2, .. } => n1 + n2,
            Model::Sbm { sizes, .. } => sizes.iter().sum(),
        }
    }

    pub fn is_directed(&self) -> bool {
        match self {
            Model::ErdosRenyi { directed, .. } | Model::Sbm { directed, .. } => *directed,
            Model::Bipartite { .. } => false,
            Model::Null { .. } => true,
        }
    }

    /// Edge probability matrix with zero diagonal; `None` for the null
    /// model, which is not a Bernoulli-per-pair model.
    fn pair_probs(&self) -> Option<Array2<f64>> {
        let n = self.n();
        let p = match self {
            Model::ErdosRenyi { p, .. } => Array2::from_elem((n, n), *p),
            Model::Bipartite { n1, p, .. } => {
                Array2::from_shape_fn(
                    (n, n),
                    |(x, y)| if (x < *n1) != (y < *n1) { *p } else { 0.0 },
                )
            }
            Model::Sbm { sizes, probs, .. } => {
                let block: Vec<usize> = sizes
                    .iter()
                    .enumerate()
                    .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
                    .collect();
                Array2::from_shape_fn((n, n), |(x, y)| probs[block[x]][block[y]])
            }
            Model::Null { .. } => return None,
        };
        let mut p = p;
        for x in 0..n {
            p[[x, x]] = 0.0;
        }
        Some(p)
    }
}

fn bernoulli_graph(probs: &Array2<f64>, directed: bool, seed: u64) -> Result<Graph> {
    let n = probs.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Array2::<f64>::zeros((n, n));
    for x in 0..n {
        let start = if directed { 0 } else { x + 1 };
        for y in start..n {
            if x == y {
                continue;
            }
            let draw: f64 = rng.random();
            if draw < probs[[x, y]] {
                a[[x, y]] = 1.0;
                if !directed {
                    a[[y, x]] = 1.0;
                }
            }
        }
    }
    Graph::from_matrix(a, directed, None)
}

pub fn sample(spec: &GeneratorSpec) -> Result<Graph> {
    spec.model.validate()?;
    match &spec.model {
        Model::Null { n, edges } => {
            let m = Marginal::uniform(*n)?;
            crate::diagnostics::sample_null(&m, &m, *edges, spec.seed)
        }
        model => {
            let probs = model.pair_probs().expect("bernoulli model");
            bernoulli_graph(&probs, model.is_directed(), spec.seed)
        }
    }
}

pub fn erdos_renyi(n: usize, p: f64, directed: bool, seed: u64) -> Result<Graph> {
    sample(&GeneratorSpec {
        model: Model::ErdosRenyi { n, p, directed },
        seed,
    })
}

pub fn bipartite(n1: usize, n2: usize, p: f64, seed: u64) -> Result<Graph> {
    sample(&GeneratorSpec {
        model: Model::Bipartite { n1, n2, p },
        seed,
    })
}

pub fn sbm(sizes: &[usize], probs: &[Vec<f64>], directed: bool, seed: u64) -> Result<Graph> {
    sample(&GeneratorSpec {
        model: Model::Sbm {
            sizes: sizes.to_vec(),
            probs: probs.to_vec(),
            directed,
        },
        seed,
    })
}

/// Weighted graph whose entries are the edge probabilities themselves.
pub fn expected_graph(spec: &GeneratorSpec) -> Result<Graph> {
    spec.model.validate()?;
    let probs = spec
        .model
        .pair_probs()
        .ok_or_else(|| Error::Unsupported("expected graph of the null model".into()))?;
    Graph::from_matrix(probs, spec.model.is_directed(), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_p_zero_is_empty() {
        assert_eq!(
            erdos_renyi(10, 0.0, false, 1).unwrap_err(),
            Error::EmptyGraph
        );
    }

    #[test]
    fn er_complete() {
        let g = erdos_renyi(4, 1.0, false, 3).unwrap();
        assert_eq!(g.total_weight(), 12.0);
        for x in 0..4 {
            assert_eq!(g.weight(x, x), 0.0);
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(erdos_renyi(1, 0.5, false, 0).is_err());
        assert!(erdos_renyi(5, 1.5, false, 0).is_err());
        assert!(erdos_renyi(5, -0.1, true, 0).is_err());
        assert!(bipartite(0, 3, 0.5, 0).is_err());
        assert!(sbm(&[3, 3], &[vec![0.5, 1.2], vec![1.2, 0.5]], false, 0).is_err());
        assert!(sbm(&[3, 3], &[vec![0.5, 0.2], vec![0.1, 0.5]], false, 0).is_err());
        assert!(sbm(&[3, 3], &[vec![0.5, 0.2], vec![0.1, 0.5]], true, 0).is_ok());
        assert!(sbm(&[3, 3], &[vec![0.5, 0.2]], true, 0).is_err());
        assert!(sbm(&[3, 0], &[vec![0.5, 0.2], vec![0.2, 0.5]], true, 0).is_err());
    }

    #[test]
    fn bipartite_complete_blocks() {
        let g = bipartite(2, 2, 1.0, 9).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                let want = if (x < 2) != (y < 2) { 1.0 } else { 0.0 };
                assert_eq!(g.weight(x, y), want);
            }
        }
    }

    #[test]
    fn bipartite_never_links_within_groups() {
        for seed in 0..20 {
            let g = bipartite(6, 5, 0.7, seed).unwrap();
            for x in 0..11 {
                for y in 0..11 {
                    if (x < 6) == (y < 6) {
                        assert_eq!(g.weight(x, y), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn one_block_sbm_matches_er() {
        for seed in [0, 5, 77] {
            for directed in [false, true] {
                let a = sbm(&[12], &[vec![0.3]], directed, seed).unwrap();
                let b = erdos_renyi(12, 0.3, directed, seed).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn deterministic_and_symmetric() {
        let a = sbm(&[5, 7], &[vec![0.6, 0.1], vec![0.1, 0.1]], false, 42).unwrap();
        let b = sbm(&[5, 7], &[vec![0.6, 0.1], vec![0.1, 0.1]], false, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.weights(), &a.weights().t());
        let c = sbm(&[5, 7], &[vec![0.6, 0.1], vec![0.1, 0.1]], false, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn expected_graphs() {
        let g = expected_graph(&GeneratorSpec {
            model: Model::ErdosRenyi {
                n: 3,
                p: 0.5,
                directed: false,
            },
            seed: 0,
        })
        .unwrap();
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(g.weight(x, y), if x == y { 0.0 } else { 0.5 });
            }
        }
        let g = expected_graph(&GeneratorSpec {
            model: Model::Bipartite {
                n1: 2,
                n2: 2,
                p: 1.0,
            },
            seed: 0,
        })
        .unwrap();
        assert_eq!(g.weight(0, 2), 1.0);
        assert_eq!(g.weight(0, 1), 0.0);
        let g = expected_graph(&GeneratorSpec {
            model: Model::Sbm {
                sizes: vec![40, 60],
                probs: vec![vec![0.6, 0.1], vec![0.1, 0.1]],
                directed: false,
            },
            seed: 0,
        })
        .unwrap();
        assert_eq!(g.weight(0, 1), 0.6);
        assert_eq!(g.weight(0, 40), 0.1);
        assert_eq!(g.weight(50, 99), 0.1);
        assert_eq!(g.weight(39, 39), 0.0);
        assert!(expected_graph(&GeneratorSpec {
            model: Model::Null { n: 4, edges: 10 },
            seed: 0
        })
        .is_err());
    }

    #[test]
    fn replicate_streams_differ() {
        let a: f64 = replicate_rng(7, 0).random();
        let b: f64 = replicate_rng(7, 1).random();
        let c: f64 = replicate_rng(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
