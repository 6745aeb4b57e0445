//! Power-law scaling of regional infrastructure counts against population,
//! model selection across count and Gaussian families, and charging
//! infrastructure gap forecasts.

pub mod dataset;
pub mod gap;
pub mod glm;
pub mod ingest;
pub mod meanfield;
pub mod pipeline;
pub mod stats;
pub mod synthetic;
