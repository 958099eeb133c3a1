//! Thermodynamic formalism on β-shifts: expansions, transfer operators,
//! involution kernels and zero-temperature limits.

pub mod beta;
pub mod config;
pub mod error;
pub mod involution;
pub mod oracle;
pub mod symbolic;
pub mod transfer;
pub mod zerotemp;

pub use beta::{BetaSpec, Expansion, Language, Side, SpecGap};
pub use error::{Error, Result};
pub use symbolic::{BilateralPair, Digit, EventuallyPeriodicSeq, Word};
pub use transfer::{CylinderFunction, CylinderMeasure, Potential, PowerOptions, SpectralTriple, TransferOperator};
pub use involution::{CouplingMeasure, KernelSpec, Pipeline, TemperatureState};
pub use oracle::{OracleResult, PeriodicOrbit};
pub use zerotemp::{RateValue, TemperatureGrid, ZeroTempOptions, ZeroTempReport};
pub use config::{parse_config, JobConfig};
