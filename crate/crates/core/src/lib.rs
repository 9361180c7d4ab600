//! A desk-scale laboratory for finite groupoids and their operator algebras:
//! Haar systems, convolution algebras with reduced/I/full norms, bimodule
//! correspondences and their composition, induced representations, and
//! hypergroupoids with the spatial construction.
//!
//! Everything measure-theoretic is exact rational arithmetic; norms and
//! spectra are computed in floating point by a small self-contained dense
//! linear-algebra kernel.

pub mod action;
pub mod fixtures;
pub mod groupoid;
pub mod groups;
pub mod report;
pub mod scalars;
pub mod matrix;
pub mod algebra;
pub mod cocycle;
pub mod correspondence;
pub mod induction;
