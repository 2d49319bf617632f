import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llm_explorer import errors
from llm_explorer.core import Biased, Categorical, EpisodeRecord, ExplorationDistribution, GaussianBias, Uniform
from llm_explorer.envs import load_description, make_env
from llm_explorer.envs.base import ActionSpec
from llm_explorer.envs.description import TaskDescription
from llm_explorer.errors import BothFailed, NoEpisodes, ParseError, ParseFailure, TransportError
from llm_explorer.explorer import (
    Explorer, ExplorerConfig, ExplorerState, StrategyCandidate, adaptive_should_update, apply_safeguard,
    build_description_prompt, build_status_prompt, build_strategy_prompt, generate_task_description,
    parse_continuous_bias, parse_discrete_distribution, parse_strategy, sample_action_trace,
    self_consistent_select, update_cycle,
)
from llm_explorer.explorer.prompts import load_template, raw_trace_text
from llm_explorer.llmclient import CannedSequence, Favor, Garbage, MockBackend, UniformText
from llm_explorer.llmclient.types import ChatResponse

CORPUS = json.loads((Path(__file__).parent / "fixtures" / "parser_corpus.json").read_text())
DISC3 = ActionSpec.discrete(3)
CONT2 = ActionSpec.continuous([-1, -1], [1, 1])
FREEWAY = load_description("toy_freeway")


def kl_oracle(p):
    n = len(p)
    return sum(x * math.log(x * n) for x in p if x > 0)


def episode(actions, rewards=None):
    rec = EpisodeRecord()
    for i, a in enumerate(actions):
        rec.append(a, (rewards or [0.0] * len(actions))[i])
    return rec


class TestTrace:
    def test_short(self):
        assert sample_action_trace([episode([2, 1, 0])], 5) == [2, 1, 0]

    def test_strided(self):
        assert sample_action_trace([episode(list(range(10)))], 5) == [0, 2, 4, 6, 8]

    def test_exact_fit(self):
        acts = list(range(100))
        assert sample_action_trace([episode(acts)], 100) == acts

    def test_history(self):
        eps = [episode([0] * 4), episode([1] * 4), episode([2] * 4)]
        assert sample_action_trace(eps, 2, H=2) == [1, 1, 2, 2]
        with pytest.raises(NoEpisodes):
            sample_action_trace(eps, 2, H=4)
        with pytest.raises(NoEpisodes):
            sample_action_trace([], 2)


class TestPrompts:
    def test_status_slots(self):
        p = build_status_prompt(FREEWAY, [[1, 1, 0]], [3.0])
        assert "the total reward is 3.00, and the action sequence extracted at intervals is [1, 1, 0]" in p
        assert FREEWAY.render().rstrip(".") in p
        assert "{" not in p.replace("{0: no operation", "")

    def test_name_only(self):
        p = build_status_prompt(FREEWAY, [[1]], [0.0], mode="name-only")
        assert "The task is Freeway." in p and "lanes 3 and 6" not in p

    def test_multi_episode(self):
        p = build_status_prompt(FREEWAY, [[1, 0], [2]], [1.0, 2.5])
        assert "[1.00, 2.50]" in p and "[[1, 0], [2]]" in p

    def test_continuous_trace(self):
        p = build_status_prompt(FREEWAY, [[np.array([0.5, -0.25])]], [-3.0])
        assert "[[0.50, -0.25]]" in p

    def test_guards(self):
        with pytest.raises(ValueError):
            build_status_prompt(FREEWAY, [[]], [0.0])
        with pytest.raises(ValueError):
            build_status_prompt(FREEWAY, [[1]], [0.0], mode="no-summary")

    def test_strategy_discrete(self):
        p = build_strategy_prompt(FREEWAY, "Go up.", DISC3)
        assert "the 3 action explorations" in p and "{1: [probability], ...}" in p
        assert "Go up." in p and "Go up.." not in p

    def test_strategy_continuous(self):
        p = build_strategy_prompt(FREEWAY, "s", CONT2)
        assert "the 2 dimensions of actions" in p and "{1: [bias], 2: ...}" in p

    def test_no_summary_embeds_trace(self):
        raw = raw_trace_text([[1, 2]], [4.0])
        p = build_strategy_prompt(FREEWAY, raw, DISC3, mode="no-summary")
        assert "[1, 2]" in p and "4.00" in p

    def test_description_modes(self):
        example = load_template("alien_example.txt").rstrip(".")
        both = build_description_prompt("Freeway", "template+one-shot")
        assert "The required format is" in both and example in both
        zero = build_description_prompt("Freeway", "zero-shot")
        assert "The required format is" not in zero and example not in zero
        assert "The required format is" in build_description_prompt("Freeway", "template")
        assert example in build_description_prompt("Freeway", "one-shot")
        with pytest.raises(ValueError):
            build_description_prompt("Freeway", "nope")


@pytest.mark.parametrize("case", CORPUS, ids=[c["name"] for c in CORPUS])
def test_parser_corpus(case):
    spec = ActionSpec.discrete(case["n"]) if "n" in case else ActionSpec.continuous([-1] * case["dim"],
                                                                                  [1] * case["dim"])
    if "error" in case:
        with pytest.raises(getattr(errors, case["error"])):
            parse_strategy(case["text"], spec)
        return
    out = parse_strategy(case["text"], spec)
    if "weights" in case:
        w = np.array(case["weights"])
        assert isinstance(out, Categorical)
        assert np.allclose(out.dist.probs, w / w.sum(), atol=1e-12)
    else:
        assert isinstance(out, Biased)
        assert np.allclose(out.bias.bias, case["bias"], atol=1e-12)


class TestParsing:
    def test_examples(self):
        assert np.allclose(parse_discrete_distribution("{1: 0.5, 2: 0.3, 3: 0.2}", 3).probs, [0.5, 0.3, 0.2])
        with pytest.raises(ParseFailure):
            parse_discrete_distribution("I think exploring up is best.", 3)
        assert parse_continuous_bias("{1: 0.0, 2: 0.0}", 2).bias.tolist() == [0.0, 0.0]
        assert parse_continuous_bias("{1: 9.0}", 1, -1, 1, 0.5).bias.tolist() == [1.0]

    def test_duplicate_keys_rejected(self):
        with pytest.raises(ParseFailure):
            parse_discrete_distribution("{1: 0.5, 1: 0.5}", 2)

    @settings(max_examples=300, deadline=None)
    @given(st.text())
    def test_total(self, text):
        for spec in (DISC3, CONT2):
            try:
                out = parse_strategy(text, spec)
            except ParseError:
                continue
            if isinstance(out, Categorical):
                assert len(out.dist) == 3 and abs(out.dist.probs.sum() - 1) < 1e-12
            else:
                assert np.all(np.abs(out.bias.bias) <= 1.0)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6))
    def test_round_trip(self, weights):
        w = np.array(weights)
        w = w / w.sum()
        text = "{" + ", ".join(f"{i + 1}: {float(v)!r}" for i, v in enumerate(w)) + "}"
        assert np.allclose(parse_discrete_distribution(text, len(w)).probs, w, atol=1e-12)


def cat(p):
    return Categorical(ExplorationDistribution(p))


class TestSafeguards:
    def test_kl_examples(self):
        hist = [0.1] * 5
        assert apply_safeguard(0.1, hist, "clip-uniform")[0].accepted
        decision, new = apply_safeguard(0.2, hist, "clip-uniform")
        assert not decision.accepted and decision.fallback == "uniform" and new == hist
        assert apply_safeguard(0.2, hist, "clip-old")[0].fallback == "previous"
        assert apply_safeguard(99.0, [0.1] * 3, "clip-old")[0].accepted
        assert apply_safeguard(99.0, hist, "none")[0].accepted

    def test_population_std(self):
        hist = [0.0, 0.0, 0.0, 0.0, 1.0]
        limit = 0.2 + 10 * 0.4
        assert apply_safeguard(limit - 1e-9, hist, "clip-old")[0].accepted
        assert not apply_safeguard(limit + 1e-9, hist, "clip-old")[0].accepted

    def test_self_consistency(self):
        a, b = cat([0.6, 0.2, 0.2]), cat([0.9, 0.05, 0.05])
        ka, kb = kl_oracle([0.6, 0.2, 0.2]), kl_oracle([0.9, 0.05, 0.05])
        assert ka < kb
        assert self_consistent_select(StrategyCandidate("a", a), StrategyCandidate("b", b)) is a
        bad = StrategyCandidate("x", error=ParseFailure("x"))
        assert self_consistent_select(bad, StrategyCandidate("b", b)) is b
        a2 = cat([0.6, 0.2, 0.2])
        assert self_consistent_select(StrategyCandidate("a", a), StrategyCandidate("c", a2)) is a
        with pytest.raises(BothFailed):
            self_consistent_select(bad, bad)

    def test_self_consistency_continuous(self):
        small, big = Biased(GaussianBias([0.1, 0.0])), Biased(GaussianBias([0.3, 0.3]))
        assert self_consistent_select(StrategyCandidate("b", big), StrategyCandidate("s", small)) is small

    def test_adaptive(self):
        returns = np.concatenate([[0.0], np.cumsum([1, 1, 1, 1, 1, 0, 0, 0, 0, 0])])
        assert adaptive_should_update(returns, 0.1)
        for delta in (0.5, 1.0, 3.0, -2.0):
            assert not adaptive_should_update([delta * i for i in range(30)], 0.1)
        assert adaptive_should_update([1.0] * 8, 0.1)
        assert not adaptive_should_update([5.0] * 20, 0.1)
        assert adaptive_should_update([5.0] * 15 + [4.0] * 3, 0.1)


def state(**kw):
    return ExplorerState(ExplorerConfig(**kw))


EPISODES = [episode([1, 1, 0, 2] * 5, [0.0] * 19 + [1.0])]


class TestUpdateCycle:
    def test_uniform_text(self):
        s = state()
        out = update_cycle(s, EPISODES, DISC3, FREEWAY, MockBackend(UniformText(3)))
        assert isinstance(out.strategy, Categorical) and out.fallback is None
        assert np.array_equal(out.strategy.dist.probs, np.full(3, 1 / 3))
        assert out.calls == 2 and s.cycles == 1

    def test_garbage(self):
        s = state()
        backend = MockBackend(Garbage())
        out = update_cycle(s, EPISODES, DISC3, FREEWAY, backend)
        assert out.fallback == "parse" and isinstance(s.strategy, Uniform)
        assert s.fallbacks == 1 and backend.calls == 3 and backend.summary_calls == 1
        # an installed strategy survives a failed cycle
        update_cycle(s, EPISODES, DISC3, FREEWAY, MockBackend(Favor(3, 1)))
        kept = s.strategy
        update_cycle(s, EPISODES, DISC3, FREEWAY, backend)
        assert s.strategy is kept and s.fallbacks == 2

    def test_favor_appends_kl(self):
        s = state(safeguard="clip-old")
        out = update_cycle(s, EPISODES, DISC3, FREEWAY, MockBackend(Favor(3, 1)))
        assert np.allclose(out.strategy.dist.probs, [0.1, 0.8, 0.1])
        assert s.kl_history == [pytest.approx(kl_oracle([0.1, 0.8, 0.1]), abs=1e-12)]

    def test_call_counts(self):
        sc = state(safeguard="self-consistency")
        assert update_cycle(sc, EPISODES, DISC3, FREEWAY, MockBackend(Favor(3, 1))).calls == 3
        ns = state(mode="no-summary")
        backend = MockBackend(Favor(3, 1))
        assert update_cycle(ns, EPISODES, DISC3, FREEWAY, backend).calls == 1
        assert backend.summary_calls == 0

    def test_token_accounting(self):
        s = state()
        for _ in range(3):
            update_cycle(s, EPISODES, DISC3, FREEWAY, MockBackend(Favor(3, 0)))
        assert sum(e.prompt_tokens for e in s.exchanges) == s.usage.prompt_tokens
        assert sum(e.completion_tokens for e in s.exchanges) == s.usage.completion_tokens
        assert s.llm_calls == len(s.exchanges) == 6

    def test_transport_failure(self):
        class Down:
            def chat(self, request):
                raise TransportError("down")

        s = state()
        out = update_cycle(s, EPISODES, DISC3, FREEWAY, Down())
        assert out.fallback == "transport" and isinstance(s.strategy, Uniform)
        assert s.exchanges[0].error.startswith("TransportError")

    def test_exchange_order_and_summary_echo(self):
        s = state()
        update_cycle(s, EPISODES, DISC3, FREEWAY, MockBackend(Favor(3, 1)))
        assert [e.stage for e in s.exchanges] == ["summary", "strategy"]
        assert "1.00" in s.exchanges[0].response

    def test_summary_truncation(self):
        class Long:
            def __init__(self):
                self.prompts = []

            def chat(self, request):
                self.prompts.append(request.prompt_text)
                text = "x" * 10_000 if len(self.prompts) == 1 else "{1: 1, 2: 0, 3: 0}"
                return ChatResponse(text)

        b = Long()
        update_cycle(state(), EPISODES, DISC3, FREEWAY, b)
        assert "x" * 8192 in b.prompts[1] and "x" * 8193 not in b.prompts[1]

    def test_continuous(self):
        s = state()
        out = update_cycle(s, [episode([[0.1, 0.2]] * 3)], CONT2, FREEWAY, MockBackend(Favor(2, (1.0, 0.0), 0.2)))
        assert isinstance(out.strategy, Biased) and np.allclose(out.strategy.bias.bias, [0.2, 0.0])
        assert s.kl_history == []


def test_kl_safeguard_clip_old():
    mild = [[0.3, 0.4, 0.3], [0.32, 0.36, 0.32], [0.34, 0.33, 0.33], [0.3, 0.35, 0.35], [0.36, 0.32, 0.32]]
    skewed = [0.98, 0.01, 0.01]
    kls = [kl_oracle(p) for p in mild]
    assert kl_oracle(skewed) > np.mean(kls) + 10 * np.std(kls)
    texts = ["{" + ", ".join(f"{i + 1}: {v}" for i, v in enumerate(p)) + "}" for p in mild + [skewed]]
    s = state(safeguard="clip-old")
    backend = MockBackend(CannedSequence(texts))
    outcomes = [update_cycle(s, EPISODES, DISC3, FREEWAY, backend) for _ in range(6)]
    assert [o.fallback for o in outcomes] == [None] * 5 + ["kl"]
    assert s.fallbacks == 1
    assert outcomes[5].strategy == outcomes[4].strategy
    assert np.array_equal(outcomes[5].strategy.dist.probs, outcomes[4].strategy.dist.probs)
    assert s.kl_history == pytest.approx(kls, abs=1e-12)


class TestExplorer:
    def test_interval(self):
        ex = Explorer(MockBackend(Favor(3, 1)), DISC3, FREEWAY, ExplorerConfig(K=3))
        results = [ex.end_episode(episode([1, 0])) for _ in range(6)]
        assert [r is not None for r in results] == [False, False, True, False, False, True]

    def test_history_depth(self):
        ex = Explorer(MockBackend(Favor(3, 1)), DISC3, FREEWAY, ExplorerConfig(H=2))
        assert ex.end_episode(episode([1])) is None
        assert ex.end_episode(episode([2])) is not None
        assert len(ex.episodes) == 2

    def test_empty_episode_ignored(self):
        ex = Explorer(MockBackend(Favor(3, 1)), DISC3, FREEWAY)
        assert ex.end_episode(EpisodeRecord()) is None and ex.state.returns == []

    def test_adaptive(self):
        ex = Explorer(MockBackend(Favor(3, 1)), DISC3, FREEWAY, ExplorerConfig(adaptive_G=0.1))
        fired = [ex.end_episode(episode([1], [float(i)])) is not None for i in range(20)]
        assert all(fired[:10]) and not any(fired[10:])

    def test_config_validation(self):
        for bad in ({"M": 0}, {"H": 6}, {"mode": "x"}, {"safeguard": "x"}, {"adaptive_G": 1.5}, {"retries": 0}):
            with pytest.raises(errors.ConfigError):
                ExplorerConfig(**bad)


class TestDescribe:
    TEXT = ("The task is a reinforcement learning problem where an agent crosses a road. "
            "The action space is discrete with 3 options. The agent receives a reward of +1 per crossing. "
            "The game ends when 100 steps pass. The goal is to cross often.")

    @pytest.mark.parametrize("mode", ["template+one-shot", "one-shot", "template", "zero-shot"])
    def test_written(self, tmp_path, mode):
        backend = MockBackend(CannedSequence([self.TEXT]))
        desc = generate_task_description(backend, "Freeway", mode, env_id="toy_freeway", directory=tmp_path)
        assert desc.render() == self.TEXT
        assert load_description("toy_freeway", tmp_path) == desc

    def test_free_text_kept_verbatim(self, tmp_path):
        desc = generate_task_description(MockBackend(CannedSequence(["Cross the road."])), "Freeway",
                                         env_id="x", directory=tmp_path)
        assert desc.render() == "Cross the road."
        assert "FreeText: Cross the road." in (tmp_path / "x.txt").read_text()

    def test_retry_then_fail(self):
        backend = MockBackend(CannedSequence(["", "", self.TEXT]))
        assert generate_task_description(backend, "Freeway").complete
        with pytest.raises(errors.GenerationFailure):
            generate_task_description(MockBackend(CannedSequence(["  "])), "Freeway")
