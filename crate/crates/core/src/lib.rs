//! Covariance-matrix engine for a three-mode tritter fed with a two-mode
//! squeezed vacuum and a coherent state.
//!
//! The pipeline is: build the output covariance matrix ([`tritter`]), apply
//! per-mode loss ([`loss`]), then compute logarithmic negativity and Gaussian
//! steering numerically and from closed forms ([`measures`]). [`analysis`]
//! adds thresholds, rankings, regions and sweeps on top.

pub mod analysis;
pub mod error;
pub mod io;
pub mod loss;
pub mod measures;
pub mod symplectic;
pub mod tritter;
pub mod verify;

pub use nalgebra;

pub use error::{Error, Result};
pub use loss::{apply_loss, LossConfig, LossSetting, Roles, Scenario, ScenarioId};
pub use measures::{build_report, gaussian_steering, log_negativity, CorrelationReport, MeasureId};
pub use symplectic::{symplectic_eigenvalues, CovarianceMatrix, ModePartition};
pub use tritter::{ideal_output_cm, output_cm_via_transform, InputSpec, Mode};
