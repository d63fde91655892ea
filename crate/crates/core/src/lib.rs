//! Nonparametric analysis of directed or undirected, possibly weighted,
//! graphs through degree-weighted orthonormal polynomials.
//!
//! The pipeline runs from a [`Graph`] to its marginal and joint
//! distributions ([`graph`]), builds an [`LpBasis`] per marginal
//! ([`basis`]), transforms the joint into an [`LpMatrix`] of LP
//! coefficients ([`transform`]), and expands those into the graph
//! correlation density field ([`field`]). [`diagnostics`] tests the
//! coefficients against the null model `p(x) p(y)`, and [`graphon`]
//! turns the field into a smooth edge-probability surface.

pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod generators;
pub mod graph;
pub mod graphon;
pub mod output;
pub mod pipeline;
pub mod transform;

pub use basis::{build_basis, build_full_basis, discrete_legendre, t1, LpBasis};
pub use error::{Error, Result};
pub use field::{
    empirical_field, evaluate_grid, integrate_squared, reconstruct_field, select_components,
    DensityField, FieldKind, Grid, Selection,
};
pub use graph::{
    joint_pmf, marginals, parse_adjacency_csv, parse_edge_list, Graph, JointPmf, Marginal,
};
pub use transform::{lp_coefficients, lpinfor, lpinfor_of, LpMatrix};
