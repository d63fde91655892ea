//! Simulation checks with fixed seeds. Each oracle is a binomial or
//! chi-square fact computed here, not by the library.

use grafield::diagnostics::{correlogram, lpinfor_test, sample_null, TestSet};
use grafield::generators::{
    bipartite, erdos_renyi, expected_graph, sample, sbm, GeneratorSpec, Model,
};
use grafield::{
    build_basis, empirical_field, joint_pmf, lp_coefficients, marginals, Graph, LpMatrix, Marginal,
};

fn lp_grid(g: &Graph, d: usize) -> LpMatrix {
    let (mx, my) = marginals(g);
    lp_coefficients(
        &joint_pmf(g),
        &build_basis(&mx, d).unwrap(),
        &build_basis(&my, d).unwrap(),
    )
    .unwrap()
}

#[test]
fn er_correlogram_band_rate() {
    let mut outside = 0usize;
    let mut total = 0usize;
    for seed in 0..500 {
        let g = erdos_renyi(50, 0.2, true, 1000 + seed).unwrap();
        let c = correlogram(&lp_grid(&g, 4)).unwrap();
        outside += c.entries.iter().filter(|e| e.outside_band).count();
        total += c.entries.len();
    }
    let rate = outside as f64 / total as f64;
    assert!((0.025..=0.075).contains(&rate), "rate {rate}");
}

#[test]
fn chi_square_calibration_under_the_null() {
    let u = Marginal::uniform(50).unwrap();
    let mut rejections = 0;
    for seed in 0..500 {
        let g = sample_null(&u, &u, 5000, 2000 + seed).unwrap();
        rejections += lpinfor_test(&lp_grid(&g, 4), TestSet::Full)
            .unwrap()
            .reject_at_5pct as usize;
    }
    let rate = rejections as f64 / 500.0;
    assert!((0.02..=0.09).contains(&rate), "rate {rate}");
}

#[test]
fn bipartite_samples_always_rejected() {
    for seed in 0..50 {
        let g = bipartite(15, 15, 0.25, seed).unwrap();
        let t = lpinfor_test(&lp_grid(&g, 4), TestSet::Full).unwrap();
        assert!(t.reject_at_5pct, "seed {seed}: p = {}", t.p_value);
    }
}

#[test]
fn er_edge_count_is_binomial() {
    let pairs = 100.0 * 99.0 / 2.0;
    let p = 0.1;
    let seeds = 200;
    let mean: f64 = (0..seeds)
        .map(|s| erdos_renyi(100, p, false, s).unwrap().total_weight() / 2.0)
        .sum::<f64>()
        / seeds as f64;
    let sd = (pairs * p * (1.0 - p) / seeds as f64).sqrt();
    assert!((mean - pairs * p).abs() <= 3.0 * sd, "mean {mean}");
}

#[test]
fn sbm_dense_block_density() {
    let probs = vec![vec![0.6, 0.1], vec![0.1, 0.1]];
    let seeds = 100;
    let pairs = 40.0 * 39.0 / 2.0;
    let mut edges = 0.0;
    for s in 0..seeds {
        let g = sbm(&[40, 60], &probs, false, s).unwrap();
        for x in 0..40 {
            for y in x + 1..40 {
                edges += g.weight(x, y);
            }
        }
    }
    let density = edges / (pairs * seeds as f64);
    let sd = (0.6 * 0.4 / (pairs * seeds as f64)).sqrt();
    assert!((density - 0.6).abs() <= 3.0 * sd, "density {density}");
}

#[test]
fn bipartite_field_mass_sits_off_the_diagonal_blocks() {
    let g = bipartite(15, 15, 0.25, 3).unwrap();
    let (mx, my) = marginals(&g);
    let f = empirical_field(&joint_pmf(&g), &mx, &my).unwrap();
    let (mut diag, mut off) = (0.0, 0.0);
    for ((x, y), &c) in f.cells.indexed_iter() {
        let m = c * mx.prob(x) * my.prob(y);
        if (x < 15) == (y < 15) {
            diag += m;
        } else {
            off += m;
        }
    }
    assert!(diag < off);
    assert_eq!(diag, 0.0);
}

/// Pooled per-block means of 500 samples against the expected adjacency,
/// plus a per-cell 3σ count that allows the nominal 0.27% false alarms.
fn check_expected(model: Model, blocks: &[usize]) {
    let reps = 500;
    let spec = GeneratorSpec { model, seed: 0 };
    let want = expected_graph(&spec).unwrap();
    let n = want.n();
    let mut sum = ndarray::Array2::<f64>::zeros((n, n));
    for s in 0..reps {
        sum += sample(&GeneratorSpec {
            seed: s,
            ..spec.clone()
        })
        .unwrap()
        .weights();
    }
    let mean = sum / reps as f64;
    let block: Vec<usize> = blocks
        .iter()
        .enumerate()
        .flat_map(|(b, &k)| std::iter::repeat_n(b, k))
        .collect();
    let nb = blocks.len();
    let (mut got, mut exp, mut cnt) = (vec![0.0; nb * nb], vec![0.0; nb * nb], vec![0.0; nb * nb]);
    let mut alarms = 0;
    let mut cells = 0;
    for x in 0..n {
        for y in 0..n {
            let p = want.weight(x, y);
            if p == 0.0 || p == 1.0 {
                assert_eq!(mean[[x, y]], p, "deterministic cell ({x},{y})");
                continue;
            }
            let b = block[x] * nb + block[y];
            got[b] += mean[[x, y]];
            exp[b] += p;
            cnt[b] += 1.0;
            cells += 1;
            if (mean[[x, y]] - p).abs() > 3.0 * (p * (1.0 - p) / reps as f64).sqrt() {
                alarms += 1;
            }
        }
    }
    for b in 0..nb * nb {
        if cnt[b] == 0.0 {
            continue;
        }
        let p = exp[b] / cnt[b];
        // Undirected cells come in equal pairs, so count each pair once.
        let eff = if want.is_directed() {
            cnt[b]
        } else {
            cnt[b] / 2.0
        };
        let sd = (p * (1.0 - p) / (eff * reps as f64)).sqrt();
        assert!((got[b] / cnt[b] - p).abs() <= 3.0 * sd, "block {b}");
    }
    assert!(
        alarms as f64 <= 0.01 * cells as f64 + 2.0,
        "{alarms} of {cells} cells beyond 3σ"
    );
}

#[test]
fn expected_graph_is_the_sample_mean() {
    check_expected(
        Model::ErdosRenyi {
            n: 20,
            p: 0.3,
            directed: true,
        },
        &[20],
    );
    check_expected(
        Model::Bipartite {
            n1: 15,
            n2: 15,
            p: 0.25,
        },
        &[15, 15],
    );
    check_expected(
        Model::Sbm {
            sizes: vec![10, 20],
            probs: vec![vec![0.6, 0.1], vec![0.2, 0.1]],
            directed: true,
        },
        &[10, 20],
    );
}
