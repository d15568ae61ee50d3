//! Experiment harness: configs, checks that produce report rows, and the
//! dispatcher used by the command-line tool and the acceptance suite.

pub mod config;
pub mod equivalence;
pub mod experiment;
pub mod family;
pub mod fuzz;
pub mod peetre;
pub mod report;
pub mod reproduce;
pub mod scaling;

pub use config::{ExperimentConfig, ExperimentKind, FamilyConfig, FuzzKind, GridConfig, ScaleConfig};
pub use equivalence::{equivalence_band, EquivalenceSettings, Member};
pub use experiment::{run_experiment, validation_rows};
pub use family::{build_family, TestFunction};
pub use fuzz::inequality_fuzz;
pub use peetre::{peetre_domination_check, PeetreSettings};
pub use report::{Report, ReportRow};
pub use reproduce::{reproduce_check, ReproduceSettings};
pub use scaling::scaling_identities;
