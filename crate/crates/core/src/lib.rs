//! Longitudinal relaxation of pseudo-pure states in a weakly coupled two-spin
//! system, with cross-correlated relaxation, doublet spectra and the
//! intensity readout of the pseudo-pure coefficients.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod eigen;
pub mod relax;
pub mod scenario;
pub mod spectra;
pub mod spin;

pub use analysis::{
    compare_pps, decompose, recompose, CoefficientTriple, DeviationReport, NormalizedCoefficients,
};
pub use relax::{RelaxError, RelaxationMatrix, RelaxationRates, Trajectory, Warning};
pub use spin::{
    equilibrium_modes, line_intensities, modes_to_populations, populations_to_modes, pps_modes,
    LineIntensities, ModeVector, Nucleus, PopulationVector, PpsLabel, SignPattern, SpinSystem,
};
