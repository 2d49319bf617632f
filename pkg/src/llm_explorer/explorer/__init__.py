from .describe import generate_task_description
from .parsing import extract_mapping, parse_continuous_bias, parse_discrete_distribution, parse_strategy
from .pipeline import (
    CycleOutcome, Exchange, Explorer, ExplorerConfig, ExplorerState, sample_action_trace, update_cycle,
)
from .prompts import build_description_prompt, build_status_prompt, build_strategy_prompt
from .safeguards import (
    SafeguardDecision, StrategyCandidate, adaptive_should_update, apply_safeguard, self_consistent_select,
    strategy_skew,
)

__all__ = [
    "CycleOutcome", "Exchange", "Explorer", "ExplorerConfig", "ExplorerState", "SafeguardDecision",
    "StrategyCandidate", "adaptive_should_update", "apply_safeguard", "build_description_prompt",
    "build_status_prompt", "build_strategy_prompt", "extract_mapping", "generate_task_description",
    "parse_continuous_bias", "parse_discrete_distribution", "parse_strategy", "sample_action_trace",
    "self_consistent_select", "strategy_skew", "update_cycle",
]
