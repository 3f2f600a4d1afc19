//! Nonparametric tests of independence between random vectors built on the
//! binary expansion of copula-transformed data.
//!
//! * [`binex`]: rank transform, binary bits, interactions and symmetry statistics.
//! * [`exact`]: Fisher's exact test, binomial symmetry p-values, multiplicity corrections.
//! * [`multifit`]: the multiscale cuboid test and its quadratic-form view.
//! * [`beret`]: the random-projection ensemble of binary expansion tests.
//! * [`sim`]: scenario generators and power / level estimation.
//! * [`kl`]: Karhunen-Loève projection of curves onto standardized scores.
//!
//! Each capability has a runnable program under `examples/`.

pub mod beret;
pub mod binex;
pub mod cli;
pub mod error;
pub mod exact;
pub mod io;
pub mod kl;
pub mod multifit;
pub mod report;
pub mod rng;
pub mod sim;

pub use beret::{beret_test, bet_test, BeretConfig, BeretReport};
pub use binex::{rank_to_copula, BitMatrix, CopulaSample, LambdaIndex, SymmetryStat};
pub use error::{Error, Result};
pub use exact::{adjust_pvalues, fisher_exact_2x2, Correction, PValue, Table2x2};
pub use kl::{kl_fit, kl_reconstruct, kl_scores, CurveSet, KlModel, ScoreMatrix};
pub use multifit::{multifit_test, Mode, MultiFitConfig, MultiFitReport};
pub use report::TestReport;
pub use sim::{estimate_power, generate_scenario, Placement, ScenarioSpec, Shape, TestMethod};
