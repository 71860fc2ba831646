//! Experiment orchestration on top of the booster and explainer.

mod bins;
mod cv;
mod grid;
mod linear;
mod select;

pub use bins::{bin_analysis, BinReport, BinRow};
pub use cv::{cross_validate, fold_assignment, CVReport, SeedScore};
pub use grid::{grid_search, GridPoint, GridSearch, HyperGrid};
pub use linear::{fit_linear_baseline, LinearModel};
pub use select::{forward_select, SelectionReport, SelectionStep};
