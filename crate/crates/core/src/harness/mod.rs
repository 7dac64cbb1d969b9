//! Experiment orchestration: configuration, seeded Monte-Carlo campaigns of
//! the full protocol, scaling studies, and result persistence.

mod campaign;
mod config;
mod records;
mod rng;
mod scaling;

pub use campaign::{build_setup, run_campaigns, transcripts, CampaignRow, ProtocolSetup, VERSION_TAG};
pub use config::{
    Backend, ExperimentConfig, HamiltonianConfig, InitialStateConfig, PPrimeMode, Protocol,
    Tolerances,
};
pub use records::{write_csv, write_jsonl, CSV_HEADER};
pub use rng::stream_rng;
pub use scaling::{fit_with_ci, r_squared, scaling_study, ScalingStudy};
