pub mod imgcore;
pub mod maskgen;
pub mod placement;
pub mod blending;
pub mod dataset;
pub mod fixtures;
pub mod evaluator;
pub mod cli;
