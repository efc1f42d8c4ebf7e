//! Distributed 3→1 random access codes with qubit communication (QRAC) and with shared
//! entanglement plus classical bits (EARAC).

pub mod bell;
pub mod channels;
pub mod data;
pub mod numerics;
pub mod optics;
pub mod protocols;
pub mod report;
pub mod seesaw;
pub mod tasks;

pub use bell::{
    bell_scan, bell_value, gmn_threshold, gmn_witness, local_max, nsbl_max, BellError, BellFunctional, BellScanRow,
    GmnWitness, Partition,
};
pub use channels::{
    maximize_linear, reflection_feasibility, validate_choi, Certificate, ChannelError, ChoiConvention, ChoiMatrix,
    EllipsoidParams, FeasibilityReport,
};
pub use data::{DataError, ReferenceConstants};
pub use numerics::{
    BlochVector, ComplexMatrix, Ket2, LpProblem, LpSolution, LpStatus, Mat2, Mat4, NumericsError, C64,
    TOL_ALGEBRAIC, TOL_OPTIMIZATION, TOL_STRUCTURAL,
};
pub use optics::{
    compare_report, ingest_results, verify_preparation, verify_unitary, waveplate_unitary, MeasuredTable,
    OpticsError, TableTwoRow, WavePlate,
};
pub use protocols::{
    earac_behavior, eval_earac, eval_qrac_strategy, Behavior, BinaryMeasurement, EaracStrategy, ProtocolError,
    QracStrategy,
};
pub use report::{table_one_report, ReportOptions, ReportValue, TableOneRow};
pub use seesaw::{run_seesaw, SeesawError, SeesawResult};
pub use tasks::{
    classical_optimum, quantum_optimum, table_one_task, ClassicalOptimum, CubeRotation, Input, Reflection,
    TaskError, TaskSpec, VertexAssignment,
};

/// Any error raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Bell(#[from] BellError),
    #[error(transparent)]
    Seesaw(#[from] SeesawError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Data(#[from] DataError),
}
