pub mod defgraph;
pub mod emitter;
pub mod gen;
pub mod ir;
pub mod patcomp;
pub mod prover;
pub mod session;
pub mod surface;
pub mod termination;
pub mod vcgen;
