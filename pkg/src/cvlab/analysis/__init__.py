from cvlab.analysis.checks import (
    FigureData,
    Prop1Report,
    Prop2Report,
    RateReport,
    ScalingReport,
    loglog_fit,
    paired_summary,
    prop1_check,
    prop2_check,
    rate_estimate,
    scaling_from_table,
    z_scaling_check,
)
from cvlab.analysis.harness import ExperimentConfig, ReplicationTable, run_replications

__all__ = [
    "ExperimentConfig",
    "FigureData",
    "Prop1Report",
    "Prop2Report",
    "RateReport",
    "ReplicationTable",
    "ScalingReport",
    "loglog_fit",
    "paired_summary",
    "prop1_check",
    "prop2_check",
    "rate_estimate",
    "run_replications",
    "scaling_from_table",
    "z_scaling_check",
]
