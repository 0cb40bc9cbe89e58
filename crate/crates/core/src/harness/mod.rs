//! Campaign configuration, Monte Carlo runner, CSV output and summaries.

pub mod campaign;
pub mod complexity;
pub mod config;
pub mod summary;

pub use campaign::{realization_seed, run_all, run_campaign, run_realization, CampaignOutcome, ResultRow};
pub use complexity::{complexity_estimate, ComplexityEstimate, ComplexityInput};
pub use config::{load_config, parse_config, Algorithm, CampaignConfig, SolverSettings};
pub use summary::{summarize, summarize_rows, AlgorithmSummary, CampaignSummary, Stat};
