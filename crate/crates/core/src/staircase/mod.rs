//! Staircase subsets of `R^n` over rational breakpoint grids.
//!
//! A [`Grid`] cuts each axis at finitely many rational breakpoints; the cells
//! (products of per-axis atoms) form a finite boolean algebra in which every
//! set of interest here is a union of cells. [`CellSet`] carries the order
//! structure (up/down closures, zigzag components), the topology (closures,
//! components), and the directional closure operators that characterize
//! differences of closed staircase upsets.

mod cells;
mod expr;
mod grid;

pub use cells::{CellSet, CellSetJson, Corner};
pub use expr::{eval, SetExpr};
pub use grid::{Grid, GridJson, GridRefinement};
