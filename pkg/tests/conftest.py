import numpy as np
import pytest

from llm_explorer.core import RngStream


@pytest.fixture
def rng():
    return RngStream(1234, "test")


def binomial_bound(p, n, k=3.0):
    return k * np.sqrt(p * (1 - p) / n)


HNS_FIXTURE = {
    "baseline": [0.26, 0.97, 0.6, 3.36, 0.45, 25.11, 17.75, 1.38, 11.63, 125.06, 1.56, 14.13, 1.07, 3.18, 7.51],
    "treated": [0.59, 1.22, 0.72, 3.62, 0.87, 27.6, 69.71, 5.58, 17.66, 132.19, 2.75, 18.61, 1.04, 3.05, 8.57],
}


def write_fake_run(root, name, variant, values, explorer="none", seed=0, steps=None):
    """Write a minimal run directory holding a constant or given eval curve."""
    import json
    from pathlib import Path

    d = Path(root) / name
    d.mkdir(parents=True)
    steps = steps or [10 * (i + 1) for i in range(len(values))]
    cfg = {"variant": variant, "seed": seed, "explorer": explorer, "algo": "dqn"}
    (d / "config.json").write_text(json.dumps(cfg))
    with (d / "runlog.jsonl").open("w") as fh:
        for i, (s, v) in enumerate(zip(steps, values)):
            fh.write(json.dumps({"episode": i, "steps": s, "return": v, "eval_return": v,
                                 "llm_calls": i, "tokens_in": 100 * i, "tokens_out": 10 * i}) + "\n")
    return d


def write_hns_fixture(root):
    for variant, scores in HNS_FIXTURE.items():
        for game, score in enumerate(scores):
            write_fake_run(root, f"{variant}-game{game}", variant, [score] * 12,
                           explorer="none" if variant == "baseline" else "llm", seed=game)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
