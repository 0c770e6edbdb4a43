//! Proof kernel, refinement checker and strategy compiler for constructive
//! differential game logic.

pub mod arith;
pub mod corpus;
pub mod gen;
pub mod inline;
pub mod kernel;
pub mod par;
pub mod proof;
pub mod refine;
pub mod sim;
pub mod solution;
pub mod surface;
pub mod syntax;
pub mod term;
