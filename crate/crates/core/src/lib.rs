pub mod energy;
pub mod error;
pub mod generate;
pub mod graph;
pub mod maxcut;
pub mod optimizer;
pub mod rng;
pub mod simulator;
pub mod centers;
pub mod metrics;
pub mod experiments;
