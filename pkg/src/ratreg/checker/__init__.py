"""Offline verification of simulated runs."""

from .checks import (
    DetectionReport,
    ValidityReport,
    Violation,
    admissible_values,
    check_detection_accuracy,
    check_termination,
    check_timestamp_rules,
    check_validity,
    validity_oracle,
)
from .costs import CostReport, cost_report
from .history import History, OperationRecord
from .verdict import ALL_CHECKS, VERDICT_SCHEMA, CheckResult, Verdict, evaluate

__all__ = [
    "ALL_CHECKS",
    "CheckResult",
    "CostReport",
    "DetectionReport",
    "History",
    "OperationRecord",
    "VERDICT_SCHEMA",
    "ValidityReport",
    "Verdict",
    "Violation",
    "admissible_values",
    "check_detection_accuracy",
    "check_termination",
    "check_timestamp_rules",
    "check_validity",
    "cost_report",
    "evaluate",
    "validity_oracle",
]
