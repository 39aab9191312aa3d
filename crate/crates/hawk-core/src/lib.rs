pub mod automata;
pub mod compose;
pub mod templates;
pub mod expr;
pub mod feas;
pub mod kernels;
pub mod num;
pub mod rng;
pub mod stats;
