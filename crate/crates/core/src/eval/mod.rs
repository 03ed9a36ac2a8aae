//! ROC curves over a fixed threshold grid, AUC, operating points, ensemble
//! fusion and Table-1-style reports.

mod ensemble;
mod io;
mod operating;
mod report;
mod roc;

pub use ensemble::ensemble_mean;
pub use io::{read_predictions, write_predictions, write_roc_csv};
pub use operating::{rates_at, select_operating_point, OperatingMode, OperatingPoint};
pub use report::{
    build_report, reference_rows, render_reference_table, render_table, EvaluationReport,
    ReferenceRow, ReferenceTestSet, ReportConfig,
};
pub use roc::{auc, roc_curve, roc_from_predictions, RocCurve, RocPoint, DEFAULT_THRESHOLDS};
