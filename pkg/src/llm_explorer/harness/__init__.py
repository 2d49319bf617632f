from .config import RunConfig, load_config_file
from .metrics import CurveTable, aggregate_seeds, human_norm_score, improvement_pct
from .report import export_report
from .runner import RunLog, episodes_to_threshold, read_runlog, run_experiment

__all__ = [
    "CurveTable", "RunConfig", "RunLog", "aggregate_seeds", "episodes_to_threshold", "export_report",
    "human_norm_score", "improvement_pct", "load_config_file", "read_runlog", "run_experiment",
]
