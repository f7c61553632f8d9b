import json

import pytest

import refladder as rl


def test_reward_mapping():
    assert rl.verdict_to_reward(rl.Verdict.WIN) == 1.0
    assert rl.verdict_to_reward(rl.Verdict.TIE) == 0.5
    assert rl.verdict_to_reward(rl.Verdict.LOSS) == 0.0


def test_selection_formulas():
    assert rl.aggregate_scores([1, 10, 4, 5]) == 5.0
    assert rl.learning_potential(6.0, [7.2, 8.5, 5.0]) == pytest.approx(2.5)
    with pytest.raises(rl.ConfigError, match="no competitors"):
        rl.learning_potential(6.0, [])


def test_select_margin_aware():
    lines = []
    for i, (policy, best) in enumerate([(5.0, 8.0), (6.0, 6.5), (4.0, 9.0)]):
        lines.append(json.dumps({
            "id": f"w{i}",
            "prompt": "p",
            "candidates": [
                {"source": "policy", "text": "a", "score": policy},
                {"source": "m1", "text": "b", "score": best},
            ],
        }))
    selected, report = rl.select_margin_aware("\n".join(lines) + "\n", k=2)
    ids = [json.loads(line)["id"] for line in selected.splitlines()]
    assert ids == ["w2", "w0"]
    assert json.loads(report)["count"] == 2


def test_judge_probabilities():
    win, tie, loss = rl.judge_probabilities(7.0, 7.0, tie=2.0, position_bias=0.0)
    assert (win, tie, loss) == pytest.approx((1 / 3, 1 / 3, 1 / 3))


def test_learner_update_kernel():
    skill = rl.learner_update(6.0, rl.Verdict.WIN, 8.0)
    assert skill - 6.0 == pytest.approx(0.01 * 0.1353352832366127)


def test_prompts_and_parsers():
    prompt = rl.render_pairwise_prompt("default", "Q", "REF", "POL")
    assert prompt.index("REF") < prompt.index("POL")
    assert rl.parse_pairwise_verdict("...therefore [[B]]") == rl.Verdict.WIN
    assert rl.parse_pointwise_score('```json\n{"score": 7}\n```') == 7
    with pytest.raises(rl.VerdictParseError):
        rl.parse_pairwise_verdict("no verdict here")


def test_run_experiment_is_deterministic():
    cfg = {"synthetic": {"instructions": 60}, "sim_judge": {}, "steps": 10, "batch_size": 8, "seed": 3}
    a = rl.run_experiment(cfg)
    b = rl.run_experiment(json.dumps(cfg))
    assert a["trace"] == b["trace"]
    assert a["summary"]["judge_calls"] == 80
    assert a["summary"]["rng"] == rl.RNG_ALGORITHM
    assert rl.schedule_from_trace(a["trace"]) == a["schedule_csv"]


def test_bad_config_raises():
    with pytest.raises(rl.ConfigError):
        rl.run_experiment({"synthetic": {}})


def test_sweep():
    out = rl.run_sweep({"synthetic": {"instructions": 40}, "sim_judge": {}, "steps": 5, "batch_size": 8,
                        "seeds": [1, 2], "modes": ["dynamic", "none"]})
    assert out["modes"]["dynamic"]["runs"] == 2
    assert len(out["runs"]) == 4
