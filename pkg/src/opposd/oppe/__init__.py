from opposd.oppe.montecarlo import MonteCarloResult, onpolicy_mc_eval
from opposd.oppe.estimator import UnreliableEstimateError, oppe_estimate
from opposd.oppe.selection import (
    CorrelationReport,
    EvaluationRecord,
    SelectionError,
    UndefinedCorrelationError,
    correlation_report,
    read_evaluations,
    select_best,
    write_evaluations,
    write_scatter,
)
from opposd.oppe.evaluate import EvaluationSummary, evaluate_checkpoint, evaluate_checkpoints

__all__ = [
    "MonteCarloResult", "onpolicy_mc_eval",
    "UnreliableEstimateError", "oppe_estimate",
    "CorrelationReport", "EvaluationRecord", "SelectionError", "UndefinedCorrelationError",
    "correlation_report", "read_evaluations", "select_best", "write_evaluations",
    "write_scatter",
    "EvaluationSummary", "evaluate_checkpoint", "evaluate_checkpoints",
]
