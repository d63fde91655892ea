//! End-to-end drivers behind the `grafield` subcommands. Each reads its
//! input completely before touching the output directory, so a bad input
//! leaves nothing behind.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::basis::{build_basis, build_full_basis, default_degree};
use crate::diagnostics::{correlogram, lpinfor_test, TestSet};
use crate::error::{Error, Result};
use crate::field::{
    empirical_field, evaluate_grid, integrate_squared, reconstruct_field, select_components,
    Selection,
};
use crate::generators::{expected_graph, sample, GeneratorSpec};
use crate::graph::{joint_pmf, marginals, parse_adjacency_csv, parse_edge_list, Graph};
use crate::graphon::{
    block_averages, estimate_graphon, evaluate_graphon_grid, smooth_marginal, GraphonOptions,
    MarginalMode,
};
use crate::output::{
    basis_json, coefficients_csv, correlogram_csv, fmt_real, graph_json, graphon_json, grid_csv,
    grid_json, json_real, selection_json, test_json, to_json_text, write_atomic,
};
use crate::transform::{lp_coefficients, lpinfor, lpinfor_of, LpMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    EdgeList(PathBuf),
    Adjacency(PathBuf),
    Generator { spec: GeneratorSpec, expected: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphInput {
    pub source: InputSource,
    /// Directedness for file inputs; generators carry their own.
    pub directed: bool,
    pub order_by_degree: bool,
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn load_graph(input: &GraphInput) -> Result<Graph> {
    let g = match &input.source {
        InputSource::EdgeList(p) => parse_edge_list(&read_input(p)?, input.directed)?,
        InputSource::Adjacency(p) => parse_adjacency_csv(&read_input(p)?, input.directed)?,
        InputSource::Generator { spec, expected } => {
            if *expected {
                expected_graph(spec)?
            } else {
                sample(spec)?
            }
        }
    };
    Ok(if input.order_by_degree {
        g.reorder_by_degree()
    } else {
        g
    })
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let p = dir.join(name);
    write_atomic(&p, text.as_bytes())?;
    Ok(p)
}

/// Bases of the requested size for both marginals and the coefficient grid.
fn transform(g: &Graph, max_degree: Option<usize>, full_rank: bool) -> Result<LpMatrix> {
    let (mx, my) = marginals(g);
    let (bx, by) = if full_rank {
        (build_full_basis(&mx)?, build_full_basis(&my)?)
    } else {
        let dx = max_degree.unwrap_or_else(|| default_degree(&mx));
        let dy = max_degree.unwrap_or_else(|| default_degree(&my));
        (build_basis(&mx, dx)?, build_basis(&my, dy)?)
    };
    lp_coefficients(&joint_pmf(g), &bx, &by)
}

#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub input: GraphInput,
    pub max_degree: Option<usize>,
    pub full_rank: bool,
    /// Penalized selection; when off every coefficient is kept.
    pub select: bool,
    pub resolution: usize,
    pub clip: bool,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct AnalyzeReport {
    pub k_star: usize,
    pub lpinfor_full: f64,
    pub lpinfor_selected: f64,
    pub files: Vec<PathBuf>,
}

pub fn run_analyze(cfg: &AnalyzeConfig) -> Result<AnalyzeReport> {
    if cfg.resolution < 2 {
        return Err(Error::InvalidParameter(
            "resolution must be at least 2".into(),
        ));
    }
    let g = load_graph(&cfg.input)?;
    let lp = transform(&g, cfg.max_degree, cfg.full_rank)?;
    let selection = if cfg.select {
        select_components(&lp)?
    } else {
        Selection::full(&lp)
    };
    let field = reconstruct_field(&lp, &selection)?;
    let grid = evaluate_grid(&field, cfg.resolution, cfg.clip)?;
    let (mx, my) = marginals(&g);
    let empirical = empirical_field(&joint_pmf(&g), &mx, &my)?;

    let lpinfor_full = lpinfor(&lp);
    let lpinfor_selected = lpinfor_of(&lp, &selection.chosen);
    let summary = json!({
        "graph": graph_json(&g),
        "mx": lp.mx(),
        "my": lp.my(),
        "full_rank": cfg.full_rank,
        "k_star": selection.k_star,
        "lpinfor_full": json_real(lpinfor_full),
        "lpinfor_selected": json_real(lpinfor_selected),
        "empirical_c2_minus_1": json_real(integrate_squared(&empirical) - 1.0),
        "resolution": cfg.resolution,
    });

    prepare_out_dir(&cfg.out_dir)?;
    let d = &cfg.out_dir;
    let mut files = vec![write_text(
        d,
        "basis.json",
        &to_json_text(&basis_json(&lp.basis_x)),
    )?];
    if g.is_directed() {
        files.push(write_text(
            d,
            "basis_y.json",
            &to_json_text(&basis_json(&lp.basis_y)),
        )?);
    }
    files.push(write_text(d, "coefficients.csv", &coefficients_csv(&lp))?);
    files.push(write_text(
        d,
        "selection.json",
        &to_json_text(&selection_json(&selection)),
    )?);
    files.push(write_text(d, "field_grid.csv", &grid_csv(&grid))?);
    files.push(write_text(
        d,
        "field_grid.json",
        &to_json_text(&grid_json(&grid)),
    )?);
    files.push(write_text(d, "summary.json", &to_json_text(&summary))?);
    Ok(AnalyzeReport {
        k_star: selection.k_star,
        lpinfor_full,
        lpinfor_selected,
        files,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Full,
    Selected,
}

#[derive(Debug, Clone)]
pub struct DiagnoseConfig {
    pub input: GraphInput,
    /// Coefficient grid `(J, K)`; defaults to the basis default per axis.
    pub grid: Option<(usize, usize)>,
    pub test: TestKind,
    /// Also write the band summary `null_band.json`.
    pub null_band: bool,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct DiagnoseReport {
    pub outside_fraction: f64,
    pub p_value: f64,
    pub reject_at_5pct: bool,
    pub files: Vec<PathBuf>,
}

pub fn run_diagnose(cfg: &DiagnoseConfig) -> Result<DiagnoseReport> {
    let g = load_graph(&cfg.input)?;
    let lp = match cfg.grid {
        Some((j, k)) => {
            if j == 0 || k == 0 {
                return Err(Error::InvalidParameter(
                    "grid sizes must be positive".into(),
                ));
            }
            let (mx, my) = marginals(&g);
            lp_coefficients(&joint_pmf(&g), &build_basis(&mx, j)?, &build_basis(&my, k)?)?
        }
        None => transform(&g, None, false)?,
    };
    let corr = correlogram(&lp)?;
    let selection;
    let set = match cfg.test {
        TestKind::Full => TestSet::Full,
        TestKind::Selected => {
            selection = select_components(&lp)?;
            TestSet::Selected(&selection)
        }
    };
    let test = lpinfor_test(&lp, set)?;

    prepare_out_dir(&cfg.out_dir)?;
    let d = &cfg.out_dir;
    let mut files = vec![
        write_text(d, "correlogram.csv", &correlogram_csv(&corr))?,
        write_text(d, "test.json", &to_json_text(&test_json(&test)))?,
    ];
    if cfg.null_band {
        let band = json!({
            "band_halfwidth": json_real(corr.band_halfwidth),
            "total_weight": json_real(corr.total_weight),
            "entries": corr.entries.len(),
            "outside": corr.entries.iter().filter(|e| e.outside_band).count(),
            "outside_fraction": json_real(corr.outside_fraction()),
        });
        files.push(write_text(d, "null_band.json", &to_json_text(&band))?);
    }
    Ok(DiagnoseReport {
        outside_fraction: corr.outside_fraction(),
        p_value: test.p_value,
        reject_at_5pct: test.reject_at_5pct,
        files,
    })
}

#[derive(Debug, Clone)]
pub struct GraphonConfig {
    pub input: GraphInput,
    pub options: GraphonOptions,
    pub resolution: usize,
    /// Contiguous block sizes for `block_averages.json`.
    pub blocks: Option<Vec<usize>>,
    pub zero_diagonal: bool,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct GraphonReport {
    pub k_star: usize,
    pub over_one_cells: usize,
    pub files: Vec<PathBuf>,
}

pub fn run_graphon(cfg: &GraphonConfig) -> Result<GraphonReport> {
    if cfg.resolution < 2 {
        return Err(Error::InvalidParameter(
            "resolution must be at least 2".into(),
        ));
    }
    let g = load_graph(&cfg.input)?;
    if let Some(sizes) = &cfg.blocks {
        if sizes.iter().sum::<usize>() != g.n() || sizes.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "block sizes {sizes:?} do not partition {} nodes",
                g.n()
            )));
        }
    }
    let w = estimate_graphon(&g, &cfg.options)?;
    let grid = evaluate_graphon_grid(&w, cfg.resolution)?;
    let blocks = cfg
        .blocks
        .as_ref()
        .map(|sizes| block_averages(&w, sizes, cfg.zero_diagonal))
        .transpose()?;
    let marginal_doc = if cfg.options.marginal_mode == MarginalMode::Smoothed {
        let (mx, my) = marginals(&g);
        let sx = smooth_marginal(&mx, g.total_weight())?;
        let mut doc = json!({
            "x": {
                "empirical": mx.probs().iter().map(|&p| json_real(p)).collect::<Vec<_>>(),
                "smoothed": sx.probs.iter().map(|&p| json_real(p)).collect::<Vec<_>>(),
                "coefficients": sx.coefficients.iter().map(|&c| json_real(c)).collect::<Vec<_>>(),
                "k_star": sx.k_star,
                "chosen": sx.chosen,
            }
        });
        if g.is_directed() {
            let sy = smooth_marginal(&my, g.total_weight())?;
            doc["y"] = json!({
                "empirical": my.probs().iter().map(|&p| json_real(p)).collect::<Vec<_>>(),
                "smoothed": sy.probs.iter().map(|&p| json_real(p)).collect::<Vec<_>>(),
                "coefficients": sy.coefficients.iter().map(|&c| json_real(c)).collect::<Vec<_>>(),
                "k_star": sy.k_star,
                "chosen": sy.chosen,
            });
        }
        Some(doc)
    } else {
        None
    };

    prepare_out_dir(&cfg.out_dir)?;
    let d = &cfg.out_dir;
    let mut files = vec![
        write_text(d, "graphon_grid.csv", &grid_csv(&grid))?,
        write_text(d, "graphon.json", &to_json_text(&graphon_json(&w, &grid)))?,
    ];
    if let Some(doc) = marginal_doc {
        files.push(write_text(d, "marginals.json", &to_json_text(&doc))?);
    }
    if let Some(b) = blocks {
        let rows: Vec<Vec<serde_json::Value>> = b
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|&v| json_real(v)).collect())
            .collect();
        let doc = json!({ "exclude_diagonal": cfg.zero_diagonal, "averages": rows });
        files.push(write_text(d, "block_averages.json", &to_json_text(&doc))?);
    }
    if w.over_one_cells > 0 {
        eprintln!(
            "warning: {} graphon cells exceed 1 (weighted input or model misfit)",
            w.over_one_cells
        );
    }
    Ok(GraphonReport {
        k_star: w.selection.k_star,
        over_one_cells: w.over_one_cells,
        files,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    AdjacencyCsv,
}

pub fn adjacency_csv(g: &Graph) -> String {
    let mut out = String::new();
    for row in g.weights().rows() {
        let cells: Vec<String> = row.iter().map(|&w| fmt_real(w)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn run_generate(
    spec: &GeneratorSpec,
    expected: bool,
    format: GraphFormat,
    out: &Path,
) -> Result<Graph> {
    let g = if expected {
        expected_graph(spec)?
    } else {
        sample(spec)?
    };
    let text = match format {
        GraphFormat::EdgeList => g.to_edge_list(),
        GraphFormat::AdjacencyCsv => adjacency_csv(&g),
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    write_atomic(out, text.as_bytes())?;
    Ok(g)
}
