//! Scenario files and the simulate / sweep / pipeline / report runners
//! behind the command-line tool.

pub mod config;
pub mod report;
pub mod run;
pub mod svg;
pub mod table;

pub use config::{
    ConfigError, NoiseSpec, Readout, Scenario, Snr, SpectraSpec, SweepAxis, SweepSpec, TimeGrid,
    DEFAULT_DELTA_LADDER, SCHEMA_VERSION,
};
pub use report::{report_file, report_table};
pub use run::{
    pipeline_rows, run_pipeline, run_simulate, run_sweep, sweep_points, PipelineRow, RunOptions,
    RunOutput, ScenarioError, SweepPoint,
};
pub use table::{Table, TableError, TableKind};
