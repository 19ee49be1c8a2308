pub mod cli;
pub mod dynamics;
pub mod integrator;
pub mod model;
pub mod observables;
pub mod spectrum;
