#ifndef GRAFIELD_H
#define GRAFIELD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GfStatus {
  GF_STATUS_OK = 0,
  GF_STATUS_NULL_POINTER = 1,
  GF_STATUS_PARSE = 2,
  GF_STATUS_EMPTY_GRAPH = 3,
  GF_STATUS_INVALID_GRAPH = 4,
  GF_STATUS_DEGENERATE_MARGINAL = 5,
  GF_STATUS_DOMAIN = 6,
  GF_STATUS_INDEX = 7,
  GF_STATUS_DIMENSION_MISMATCH = 8,
  GF_STATUS_INVALID_PARAMETER = 9,
  GF_STATUS_UNSUPPORTED = 10,
  GF_STATUS_INPUT = 11,
  GF_STATUS_IO = 12,
  GF_STATUS_BUFFER_TOO_SMALL = 13,
  GF_STATUS_INVALID_UTF8 = 14,
  GF_STATUS_PANIC = 15,
} GfStatus;

// LP coefficients of a graph plus the latest selection.
typedef struct GfAnalysis GfAnalysis;

// A graph with its edge weights.
typedef struct GfGraph GfGraph;

typedef struct GfTestResult {
  double statistic;
  size_t df;
  double p_value;
  bool reject_at_5pct;
  bool post_selection;
} GfTestResult;

typedef struct GfGraphonOptions {
  bool smoothed_marginals;
  bool selected_components;
  // Edge-probability scale (times total weight) rather than raw density.
  bool scale_by_total_weight;
  // 0 picks the default basis size.
  size_t max_degree;
} GfGraphonOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message, NUL-terminated and
// truncated to `cap` bytes. Returns the full message length in bytes.
//
// # Safety
// `buf` must be null or valid for `cap` bytes.
size_t gf_last_error_message(char *buf, size_t cap);

// Parses a whitespace-separated edge list.
//
// # Safety
// `src` must be a NUL-terminated string; `out` must be writable.
enum GfStatus gf_graph_from_edge_list(const char *src, bool directed, struct GfGraph **out);

// Parses a dense adjacency CSV.
//
// # Safety
// As for [`gf_graph_from_edge_list`].
enum GfStatus gf_graph_from_adjacency_csv(const char *src, bool directed, struct GfGraph **out);

// Builds a graph from a row-major `n × n` weight matrix.
//
// # Safety
// `weights` must be valid for `n * n` reads; `out` must be writable.
enum GfStatus gf_graph_from_weights(const double *weights,
                                    size_t n,
                                    bool directed,
                                    struct GfGraph **out);

// Erdős–Rényi graph, or its expected adjacency when `expected` is set.
//
// # Safety
// `out` must be writable.
enum GfStatus gf_generate_erdos_renyi(size_t n,
                                      double p,
                                      bool directed,
                                      uint64_t seed,
                                      bool expected,
                                      struct GfGraph **out);

// # Safety
// `out` must be writable.
enum GfStatus gf_generate_bipartite(size_t n1,
                                    size_t n2,
                                    double p,
                                    uint64_t seed,
                                    bool expected,
                                    struct GfGraph **out);

// Stochastic block model; `probs` is the row-major `blocks × blocks`
// probability matrix.
//
// # Safety
// `sizes` must be valid for `blocks` reads, `probs` for `blocks²`.
enum GfStatus gf_generate_sbm(const size_t *sizes,
                              size_t blocks,
                              const double *probs,
                              bool directed,
                              uint64_t seed,
                              bool expected,
                              struct GfGraph **out);

// # Safety
// `g` must be a live handle; `n` writable.
enum GfStatus gf_graph_node_count(const struct GfGraph *g, size_t *n);

// # Safety
// `g` must be a live handle; `w` writable.
enum GfStatus gf_graph_total_weight(const struct GfGraph *g, double *w);

// Row-major weight matrix.
//
// # Safety
// `buf` must be null or valid for `cap` writes.
enum GfStatus gf_graph_weights(const struct GfGraph *g, double *buf, size_t cap, size_t *needed);

// # Safety
// `g` must be null or a handle not yet freed.
void gf_graph_free(struct GfGraph *g);

// LP transform of `g`. `max_degree = 0` uses the default basis size;
// `full_rank` uses every available basis function.
//
// # Safety
// `g` must be a live handle; `out` writable.
enum GfStatus gf_analysis_new(const struct GfGraph *g,
                              size_t max_degree,
                              bool full_rank,
                              struct GfAnalysis **out);

// # Safety
// `a` must be null or a handle not yet freed.
void gf_analysis_free(struct GfAnalysis *a);

// Coefficient grid shape.
//
// # Safety
// `a` must be live; `mx`, `my` writable.
enum GfStatus gf_analysis_shape(const struct GfAnalysis *a, size_t *mx, size_t *my);

// Row-major `mx × my` coefficients; entry `(j, k)` sits at `(j-1)*my + (k-1)`.
//
// # Safety
// `buf` must be null or valid for `cap` writes.
enum GfStatus gf_analysis_coefficients(const struct GfAnalysis *a,
                                       double *buf,
                                       size_t cap,
                                       size_t *needed);

// Sum of squared coefficients over the whole grid.
//
// # Safety
// `a` must be live; `out` writable.
enum GfStatus gf_analysis_lpinfor(const struct GfAnalysis *a, double *out);

// Runs the penalized selection and keeps it on the handle.
//
// # Safety
// `a` must be live; `k_star` writable.
enum GfStatus gf_analysis_select(struct GfAnalysis *a, size_t *k_star);

// Chosen `(j, k)` pairs, 1-based, flattened as `j0, k0, j1, k1, ...`.
//
// # Safety
// `buf` must be null or valid for `cap` writes.
enum GfStatus gf_analysis_selected_pairs(const struct GfAnalysis *a,
                                         size_t *buf,
                                         size_t cap,
                                         size_t *needed);

// LPINFOR restricted to the selected coefficients.
//
// # Safety
// `a` must be live; `out` writable.
enum GfStatus gf_analysis_lpinfor_selected(const struct GfAnalysis *a, double *out);

// Reconstructed field on the midpoint grid, row-major `resolution²`.
// Uses the stored selection when `selected`, every coefficient otherwise.
//
// # Safety
// `buf` must be null or valid for `cap` writes.
enum GfStatus gf_analysis_field_grid(const struct GfAnalysis *a,
                                     bool selected,
                                     size_t resolution,
                                     bool clip,
                                     double *buf,
                                     size_t cap,
                                     size_t *needed);

// Chi-square test of the null `p(x,y) = p(x) p(y)` over the full grid or
// the stored selection.
//
// # Safety
// `a` must be live; `out` writable.
enum GfStatus gf_analysis_test(const struct GfAnalysis *a, bool selected, struct GfTestResult *out);

// Graphon estimate of `g` on the midpoint grid, row-major `resolution²`,
// negative values clipped.
//
// # Safety
// `g` must be live; `buf` null or valid for `cap` writes.
enum GfStatus gf_graphon_grid(const struct GfGraph *g,
                              struct GfGraphonOptions options,
                              size_t resolution,
                              double *buf,
                              size_t cap,
                              size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAFIELD_H */
