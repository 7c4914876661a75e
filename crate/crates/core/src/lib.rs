//! Convexity analysis for objective, isotropic planar energies on SL(2) and
//! GL⁺(2).

pub mod config;
pub mod convexity;
pub mod energy;
pub mod error;
pub mod exprparse;
pub mod grid;
pub mod isochoric;
pub mod sampling;
pub mod tensor2;

pub use config::AnalysisConfig;
pub use convexity::{analyze, ConvexityReport, CriterionOutcome, Diagnostic, Verdict, Witness};
pub use energy::{Domain, EnergyForm, EnergySpec, Representation, ScalarProfile};
pub use error::{Error, Result};
pub use isochoric::{counterexample_suite, CounterexampleReport, IsochoricEnergy};
pub use tensor2::{Mat2, RankOneDirection, SingularPair, Vec2};
