//! C ABI over `grafield`.
//!
//! Objects are opaque handles released with their `*_free` function. Every
//! entry point returns a [`GfStatus`]; on failure the message is kept per
//! thread and can be copied out with [`gf_last_error_message`]. Buffers are
//! caller-owned: pass the capacity in elements and the required count is
//! written back, so a call with a null buffer queries the size.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use grafield::diagnostics::{lpinfor_test, TestSet};
use grafield::generators::{expected_graph, sample, GeneratorSpec, Model};
use grafield::graphon::{
    estimate_graphon, evaluate_graphon_grid, GraphonOptions, MarginalMode, ScaleConvention,
    SelectionMode,
};
use grafield::{
    build_basis, build_full_basis, evaluate_grid, joint_pmf, lp_coefficients, lpinfor, lpinfor_of,
    marginals, parse_adjacency_csv, parse_edge_list, reconstruct_field, select_components, Error,
    Graph, LpMatrix, Selection,
};
use ndarray::Array2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    EmptyGraph = 3,
    InvalidGraph = 4,
    DegenerateMarginal = 5,
    Domain = 6,
    Index = 7,
    DimensionMismatch = 8,
    InvalidParameter = 9,
    Unsupported = 10,
    Input = 11,
    Io = 12,
    BufferTooSmall = 13,
    InvalidUtf8 = 14,
    Panic = 15,
}

impl From<&Error> for GfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } => GfStatus::Parse,
            Error::EmptyGraph => GfStatus::EmptyGraph,
            Error::InvalidGraph(_) => GfStatus::InvalidGraph,
            Error::DegenerateMarginal { .. } => GfStatus::DegenerateMarginal,
            Error::Domain { .. } => GfStatus::Domain,
            Error::Index { .. } => GfStatus::Index,
            Error::DimensionMismatch(_) => GfStatus::DimensionMismatch,
            Error::InvalidParameter(_) => GfStatus::InvalidParameter,
            Error::Unsupported(_) => GfStatus::Unsupported,
            Error::Input(_) => GfStatus::Input,
            Error::Io(_) => GfStatus::Io,
        }
    }
}

/// A graph with its edge weights.
pub struct GfGraph(Graph);

/// LP coefficients of a graph plus the latest selection.
pub struct GfAnalysis {
    lp: LpMatrix,
    selection: Option<Selection>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfTestResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub reject_at_5pct: bool,
    pub post_selection: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GfGraphonOptions {
    pub smoothed_marginals: bool,
    pub selected_components: bool,
    /// Edge-probability scale (times total weight) rather than raw density.
    pub scale_by_total_weight: bool,
    /// 0 picks the default basis size.
    pub max_degree: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Fail(GfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(GfStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(GfStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            GfStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            GfStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null("text"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(GfStatus::InvalidUtf8, e.to_string()))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Copies `src` into `buf` if it fits; always reports the length needed.
unsafe fn copy_out<T: Copy>(
    src: &[T],
    buf: *mut T,
    cap: usize,
    needed: *mut usize,
) -> Result<(), Fail> {
    if !needed.is_null() {
        needed.write(src.len());
    }
    if buf.is_null() && cap == 0 {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if cap < src.len() {
        return Err(Fail(
            GfStatus::BufferTooSmall,
            format!("buffer holds {cap}, need {}", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

unsafe fn emit_graph(g: Graph, out: *mut *mut GfGraph) -> Result<(), Fail> {
    put(out, Box::into_raw(Box::new(GfGraph(g))))
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `cap` bytes. Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn gf_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parses a whitespace-separated edge list.
///
/// # Safety
/// `src` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_graph_from_edge_list(
    src: *const c_char,
    directed: bool,
    out: *mut *mut GfGraph,
) -> GfStatus {
    guard(|| emit_graph(parse_edge_list(text(src)?, directed)?, out))
}

/// Parses a dense adjacency CSV.
///
/// # Safety
/// As for [`gf_graph_from_edge_list`].
#[no_mangle]
pub unsafe extern "C" fn gf_graph_from_adjacency_csv(
    src: *const c_char,
    directed: bool,
    out: *mut *mut GfGraph,
) -> GfStatus {
    guard(|| emit_graph(parse_adjacency_csv(text(src)?, directed)?, out))
}

/// Builds a graph from a row-major `n × n` weight matrix.
///
/// # Safety
/// `weights` must be valid for `n * n` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_graph_from_weights(
    weights: *const f64,
    n: usize,
    directed: bool,
    out: *mut *mut GfGraph,
) -> GfStatus {
    guard(|| {
        if weights.is_null() {
            return Err(null("weights"));
        }
        let len = n
            .checked_mul(n)
            .ok_or_else(|| Fail(GfStatus::InvalidParameter, "n too large".into()))?;
        let w = std::slice::from_raw_parts(weights, len).to_vec();
        let a = Array2::from_shape_vec((n, n), w)
            .map_err(|e| Fail(GfStatus::DimensionMismatch, e.to_string()))?;
        emit_graph(Graph::from_matrix(a, directed, None)?, out)
    })
}

unsafe fn generate(model: Model, seed: u64, expected: bool, out: *mut *mut GfGraph) -> GfStatus {
    guard(|| {
        let spec = GeneratorSpec { model, seed };
        let g = if expected {
            expected_graph(&spec)?
        } else {
            sample(&spec)?
        };
        emit_graph(g, out)
    })
}

/// Erdős–Rényi graph, or its expected adjacency when `expected` is set.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_generate_erdos_renyi(
    n: usize,
    p: f64,
    directed: bool,
    seed: u64,
    expected: bool,
    out: *mut *mut GfGraph,
) -> GfStatus {
    generate(Model::ErdosRenyi { n, p, directed }, seed, expected, out)
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_generate_bipartite(
    n1: usize,
    n2: usize,
    p: f64,
    seed: u64,
    expected: bool,
    out: *mut *mut GfGraph,
) -> GfStatus {
    generate(Model::Bipartite { n1, n2, p }, seed, expected, out)
}

/// Stochastic block model; `probs` is the row-major `blocks × blocks`
/// probability matrix.
///
/// # Safety
/// `sizes` must be valid for `blocks` reads, `probs` for `blocks²`.
#[no_mangle]
pub unsafe extern "C" fn gf_generate_sbm(
    sizes: *const usize,
    blocks: usize,
    probs: *const f64,
    directed: bool,
    seed: u64,
    expected: bool,
    out: *mut *mut GfGraph,
) -> GfStatus {
    if sizes.is_null() || probs.is_null() {
        return guard(|| Err(null("sizes or probs")));
    }
    let sizes = std::slice::from_raw_parts(sizes, blocks).to_vec();
    let probs = std::slice::from_raw_parts(probs, blocks * blocks)
        .chunks(blocks.max(1))
        .map(<[f64]>::to_vec)
        .collect();
    generate(
        Model::Sbm {
            sizes,
            probs,
            directed,
        },
        seed,
        expected,
        out,
    )
}

/// # Safety
/// `g` must be a live handle; `n` writable.
#[no_mangle]
pub unsafe extern "C" fn gf_graph_node_count(g: *const GfGraph, n: *mut usize) -> GfStatus {
    guard(|| put(n, deref(g, "graph")?.0.n()))
}

/// # Safety
/// `g` must be a live handle; `w` writable.
#[no_mangle]
pub unsafe extern "C" fn gf_graph_total_weight(g: *const GfGraph, w: *mut f64) -> GfStatus {
    guard(|| put(w, deref(g, "graph")?.0.total_weight()))
}

/// Row-major weight matrix.
///
/// # Safety
/// `buf` must be null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn gf_graph_weights(
    g: *const GfGraph,
    buf: *mut f64,
    cap: usize,
    needed: *mut usize,
) -> GfStatus {
    guard(|| {
        let w = deref(g, "graph")?.0.weights();
        copy_out(&w.iter().copied().collect::<Vec<_>>(), buf, cap, needed)
    })
}

/// # Safety
/// `g` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gf_graph_free(g: *mut GfGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// LP transform of `g`. `max_degree = 0` uses the default basis size;
/// `full_rank` uses every available basis function.
///
/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gf_analysis_new(
    g: *const GfGraph,
    max_degree: usize,
    full_rank: bool,
    out: *mut *mut GfAnalysis,
) -> GfStatus {
    guard(|| {
        let g = &deref(g, "graph")?.0;
        let (mx, my) = marginals(g);
        let (bx, by) = if full_rank {
            (build_full_basis(&mx)?, build_full_basis(&my)?)
        } else if max_degree == 0 {
            let d = |m| grafield::basis::default_degree(m);
            (build_basis(&mx, d(&mx))?, build_basis(&my, d(&my))?)
        } else {
            (build_basis(&mx, max_degree)?, build_basis(&my, max_degree)?)
        };
        let lp = lp_coefficients(&joint_pmf(g), &bx, &by)?;
        put(
            out,
            Box::into_raw(Box::new(GfAnalysis {
                lp,
                selection: None,
            })),
        )
    })
}

/// # Safety
/// `a` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gf_analysis_free(a: *mut GfAnalysis) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Coefficient grid shape.
///
/// # Safety
/// `a` must be live; `mx`, `my` writable.
#[no_mangle]
pub unsafe extern "C" fn gf_analysis_shape(
    a: *const GfAnalysis,
    mx: *mut usize,
    my: *mut usize,
) -> GfStatus {
    guard(|| {
        let a = deref(a, "analysis")?;
        put(mx, a.lp.mx())?;
        put(my, a.lp.my())
    })
}

/// Row-major `mx × my` coefficients; entry `(j, k)` sits at `(j-1)*my + (k-1)`.
///
/// # Safety
/// `buf` must be null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn gf_analysis_coefficients(
    a: *const GfAnalysis,
    buf: *mut f64,
    cap: usize,
    needed: *mut usize,
) -> GfStatus {
    guard(|| {
        let a = deref(a, "analysis")?;
        let v: Vec<f64> = a.lp.coeffs.iter().copied().collect();
        copy_out(&v, buf, cap, needed)
    })
}

/// Sum of squared coefficients over the whole grid.
///
/// # Safety
/// `a` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gf_analysis_lpinfor(a: *const GfAnalysis, out: *mut f64) -> GfStatus {
    guard(|| put(out, lpinfor(&deref(a, "analysis")?.lp)))
}

/// Runs the penalized selection and keeps it on the handle.
///
/// # Safety
/// `a` must be live; `k_star` writable.
#[no_mangle]
pub unsafe extern "C" fn gf_analysis_select(a: *mut GfAnalysis, k_star: *mut usize) -> GfStatus {
    guard(|| {
        let a = a.as_mut().ok_or_else(|| null("analysis"))?;
        let sel = select_components(&a.lp)?;
        let k = sel.k_star;
        a.selection = Some(sel);
        put(k_star, k)
    })
}

fn selection_of(a: &GfAnalysis) -> Result<&Selection, Fail> {
    a.selection.as_ref().ok_or_else(|| {
        Fail(
            GfStatus::InvalidParameter,
            "no selection yet; call gf_analysis_select".into(),
        )
    })
}

/// Chosen `(j, k)` pairs, 1-based, flattened as `j0, k0, j1, k1, ...`.
///
/// # Safety
/// `buf` must be null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn gf_analysis_selected_pairs(
    a: *const GfAnalysis,
    buf: *mut usize,
    cap: usize,
    needed: *mut usize,
) -> GfStatus {
    guard(|| {
        let sel = selection_of(deref(a, "analysis")?)?;
        let flat: Vec<usize> = sel.chosen.iter().flat_map(|&(j, k)| [j, k]).collect();
        copy_out(&flat, buf, cap, needed)
    })
}

/// LPINFOR restricted to the selected coefficients.
///
/// # Safety
/// `a` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gf_analysis_lpinfor_selected(
    a: *const GfAnalysis,
    out: *mut f64,
) -> GfStatus {
    guard(|| {
        let a = deref(a, "analysis")?;
        put(out, lpinfor_of(&a.lp, &selection_of(a)?.chosen))
    })
}

/// Reconstructed field on the midpoint grid, row-major `resolution²`.
/// Uses the stored selection when `selected`, every coefficient otherwise.
///
/// # Safety
/// `buf` must be null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn gf_analysis_field_grid(
    a: *const GfAnalysis,
    selected: bool,
    resolution: usize,
    clip: bool,
    buf: *mut f64,
    cap: usize,
    needed: *mut usize,
) -> GfStatus {
    guard(|| {
        let a = deref(a, "analysis")?;
        let full;
        let sel = if selected {
            selection_of(a)?
        } else {
            full = Selection::full(&a.lp);
            &full
        };
        let field = reconstruct_field(&a.lp, sel)?;
        let grid = evaluate_grid(&field, resolution, clip)?;
        let v: Vec<f64> = grid.values.iter().copied().collect();
        copy_out(&v, buf, cap, needed)
    })
}

/// Chi-square test of the null `p(x,y) = p(x) p(y)` over the full grid or
/// the stored selection.
///
/// # Safety
/// `a` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gf_analysis_test(
    a: *const GfAnalysis,
    selected: bool,
    out: *mut GfTestResult,
) -> GfStatus {
    guard(|| {
        let a = deref(a, "analysis")?;
        let set = if selected {
            TestSet::Selected(selection_of(a)?)
        } else {
            TestSet::Full
        };
        let t = lpinfor_test(&a.lp, set)?;
        put(
            out,
            GfTestResult {
                statistic: t.statistic,
                df: t.df,
                p_value: t.p_value,
                reject_at_5pct: t.reject_at_5pct,
                post_selection: t.post_selection,
            },
        )
    })
}

/// Graphon estimate of `g` on the midpoint grid, row-major `resolution²`,
/// negative values clipped.
///
/// # Safety
/// `g` must be live; `buf` null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn gf_graphon_grid(
    g: *const GfGraph,
    options: GfGraphonOptions,
    resolution: usize,
    buf: *mut f64,
    cap: usize,
    needed: *mut usize,
) -> GfStatus {
    guard(|| {
        let g = &deref(g, "graph")?.0;
        let opts = GraphonOptions {
            marginal_mode: if options.smoothed_marginals {
                MarginalMode::Smoothed
            } else {
                MarginalMode::Empirical
            },
            selection_mode: if options.selected_components {
                SelectionMode::Selected
            } else {
                SelectionMode::Full
            },
            scale_convention: if options.scale_by_total_weight {
                ScaleConvention::TotalWeight
            } else {
                ScaleConvention::Raw
            },
            max_degree: (options.max_degree > 0).then_some(options.max_degree),
        };
        let w = estimate_graphon(g, &opts)?;
        let grid = evaluate_graphon_grid(&w, resolution)?;
        let v: Vec<f64> = grid.values.iter().copied().collect();
        copy_out(&v, buf, cap, needed)
    })
}
