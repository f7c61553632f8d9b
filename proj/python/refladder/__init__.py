"""Python bindings for the refladder curriculum library."""

import json as _json

from ._core import (
    RNG_ALGORITHM,
    ConfigError,
    Error,
    IoError,
    JudgeExhaustedError,
    Verdict,
    VerdictParseError,
    aggregate_scores,
    judge_probabilities,
    learner_update,
    learning_potential,
    parse_pairwise_verdict,
    parse_pointwise_score,
    render_pairwise_prompt,
    render_pointwise_prompt,
    schedule_from_trace,
    select_margin_aware,
    verdict_to_reward,
)
from . import _core


def run_experiment(config, base_dir=""):
    """Run one experiment. `config` is a dict or a JSON string.

    Returns a dict with the parsed summary plus the raw trace, schedule CSV
    and checkpoint text.
    """
    text = config if isinstance(config, str) else _json.dumps(config)
    out = _core.run_experiment(text, base_dir)
    out["summary"] = _json.loads(out["summary"])
    return out


def run_sweep(config, base_dir=""):
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_core.run_sweep(text, base_dir))


__all__ = [
    "RNG_ALGORITHM",
    "ConfigError",
    "Error",
    "IoError",
    "JudgeExhaustedError",
    "Verdict",
    "VerdictParseError",
    "aggregate_scores",
    "judge_probabilities",
    "learner_update",
    "learning_potential",
    "parse_pairwise_verdict",
    "parse_pointwise_score",
    "render_pairwise_prompt",
    "render_pointwise_prompt",
    "run_experiment",
    "run_sweep",
    "schedule_from_trace",
    "select_margin_aware",
    "verdict_to_reward",
]
