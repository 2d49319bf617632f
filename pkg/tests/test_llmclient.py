import json
import math

import httpx
import pytest

from llm_explorer.envs.base import ActionSpec
from llm_explorer.errors import IoFailure, MissingCredential, ReplayMiss, TransportError
from llm_explorer.llmclient import (
    CannedSequence, ChatRequest, Favor, Garbage, HttpBackend, Message, MockBackend, Pricing, RecordingBackend,
    ReplayBackend, Seek, UniformText, Usage, chat, cost_report, load_cache, parse_mock_spec,
)
from llm_explorer.llmclient.mock import SUMMARY_PREFIX, fmt


def req(text, model="mock", temperature=1.0):
    return ChatRequest.single(text, model, temperature)


class TestTypes:
    def test_request_validation(self):
        with pytest.raises(ValueError):
            ChatRequest("m", ())
        with pytest.raises(ValueError):
            ChatRequest("m", (Message("tool", "x"),))

    def test_key_depends_on_content(self):
        assert req("a").key() == req("a").key()
        assert len({req("a").key(), req("b").key(), req("a", "other").key(), req("a", temperature=0.5).key()}) == 4

    def test_usage(self):
        with pytest.raises(ValueError):
            Usage(-1, 0)
        assert Usage(1_000_000, 0).cost() == pytest.approx(0.15)
        assert Usage(0, 1_000_000).cost(Pricing.per_million(1, 2)) == pytest.approx(2.0)


class TestMock:
    def test_uniform(self):
        assert UniformText(3).respond(0, "") == "{1: 0.3333, 2: 0.3333, 3: 0.3333}"
        assert UniformText(2, continuous=True).respond(0, "") == "{1: 0, 2: 0}"

    def test_favor(self):
        assert Favor(3, 1).respond(0, "") == "{1: 0.1, 2: 0.8, 3: 0.1}"
        assert Favor(2, (1.0, -0.5), 0.2).respond(0, "") == "{1: 0.2, 2: -0.1}"

    def test_canned_cycles(self):
        p = CannedSequence(["a", "b"])
        assert [p.respond(i, "") for i in range(5)] == ["a", "b", "a", "b", "a"]

    def test_garbage_has_no_mapping(self):
        assert "{" not in Garbage().respond(0, "")

    def test_fmt(self):
        assert [fmt(v) for v in (0.0, -0.0, 0.1, 1 / 3, -0.00001)] == ["0", "0", "0.1", "0.3333", "0"]

    def test_backend_deterministic_with_estimated_usage(self):
        a, b = MockBackend(Favor(3, 2)), MockBackend(Favor(3, 2))
        prompt = "x" * 41
        ra, rb = a.chat(req(prompt)), b.chat(req(prompt))
        assert ra == rb
        assert ra.usage == Usage(math.ceil(41 / 4), math.ceil(len(ra.text) / 4))
        text, usage = chat(a, req(prompt))
        assert text == ra.text and usage == ra.usage

    def test_summary_stage_does_not_advance_policy(self):
        backend = MockBackend(CannedSequence(["first", "second"]))
        summary = backend.chat(req(SUMMARY_PREFIX + ". Total reward is 3, and actions [1, 2]"))
        assert backend.summary_calls == 1 and backend.calls == 0
        assert "[1, 2]" in summary.text
        assert backend.chat(req("strategy")).text == "first"

    def test_seek_points_to_goal(self):
        seek = Seek((0.5, 0.5), gain=1.0)
        # two steps of +1 in x from the origin: positions 0.1, 0.2 -> mean (0.15, 0)
        text = seek.respond(0, "actions [[1.0, 0.0], [1.0, 0.0]]")
        assert text == "{1: 0.35, 2: 0.5}"
        assert seek.respond(0, "no list here") == "{1: 0.5, 2: 0.5}"

    def test_parse_spec(self, tmp_path):
        disc, cont = ActionSpec.discrete(3), ActionSpec.continuous([-1, -1], [1, 1])
        assert parse_mock_spec("uniform-text", disc) == UniformText(3)
        assert parse_mock_spec("favor:1", disc) == Favor(3, 1, 0.8)
        assert parse_mock_spec("favor:1;0:0.3", cont) == Favor(2, (1.0, 0.0), 0.3)
        assert parse_mock_spec("seek:0.5;0.5", cont) == Seek((0.5, 0.5))
        f = tmp_path / "canned.txt"
        f.write_text("{1: 1}\n\n{2: 1}\n")
        assert parse_mock_spec(f"canned:{f}", disc).texts == ["{1: 1}", "{2: 1}"]
        with pytest.raises(ValueError):
            parse_mock_spec("nonsense", disc)


class TestRecordReplay:
    def test_sequence_numbers(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        rec = RecordingBackend(MockBackend(CannedSequence(["one", "two"])), path)
        rec.chat(req("same"))
        rec.chat(req("same"))
        entries = load_cache(path)
        key = req("same").key()
        assert entries[(key, 0)]["response"] == "one" and entries[(key, 1)]["response"] == "two"

    def test_replay_order_and_usage(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        rec = RecordingBackend(MockBackend(CannedSequence(["one", "two", "three"])), path)
        prompts = ["same", "other", "same"]
        recorded = [rec.chat(req(p)) for p in prompts]
        replay = ReplayBackend(path)
        replayed = [replay.chat(req(p)) for p in prompts]
        assert replayed == recorded
        assert cost_report(replayed) == cost_report(recorded)
        with pytest.raises(ReplayMiss):
            replay.chat(req("same"))

    def test_file_order_irrelevant(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        rec = RecordingBackend(MockBackend(CannedSequence(["one", "two", "three"])), path)
        for p in ("a", "b", "a"):
            rec.chat(req(p))
        lines = path.read_text().splitlines()
        shuffled = tmp_path / "shuffled.jsonl"
        shuffled.write_text("\n".join(reversed(lines)) + "\n")
        a, b = ReplayBackend(path), ReplayBackend(shuffled)
        for p in ("a", "b", "a"):
            assert a.chat(req(p)) == b.chat(req(p))

    def test_miss_and_io(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        path.write_text("")
        with pytest.raises(ReplayMiss):
            ReplayBackend(path).chat(req("x"))
        with pytest.raises(IoFailure):
            ReplayBackend(tmp_path / "missing.jsonl")
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(IoFailure):
            RecordingBackend(MockBackend(Garbage()), blocker / "cache.jsonl").chat(req("x"))


def completion(text, pin=7, pout=3):
    return {"choices": [{"message": {"role": "assistant", "content": text}}],
            "usage": {"prompt_tokens": pin, "completion_tokens": pout}}


class TestHttp:
    def test_success(self):
        seen = []

        def handler(request):
            seen.append(request)
            return httpx.Response(200, json=completion("{1: 1}"))

        backend = HttpBackend("http://llm.test/v1/", api_key="k", transport=httpx.MockTransport(handler))
        out = backend.chat(req("hello", "gpt"))
        assert out.text == "{1: 1}" and out.usage == Usage(7, 3)
        assert str(seen[0].url) == "http://llm.test/v1/chat/completions"
        assert seen[0].headers["authorization"] == "Bearer k"
        body = json.loads(seen[0].content)
        assert body == {"model": "gpt", "messages": [{"role": "user", "content": "hello"}], "temperature": 1.0}

    def test_retries_with_backoff(self):
        responses = iter([httpx.Response(500), httpx.Response(429), httpx.Response(200, json=completion("ok"))])
        sleeps = []
        backend = HttpBackend("http://x", api_key="k", transport=httpx.MockTransport(lambda r: next(responses)),
                              sleep=sleeps.append, backoff=0.5)
        assert backend.chat(req("p")).text == "ok"
        assert sleeps == [0.5, 1.0]

    def test_exhaustion(self):
        calls = []

        def handler(request):
            calls.append(1)
            raise httpx.ConnectError("down")

        sleeps = []
        backend = HttpBackend("http://x", api_key="k", transport=httpx.MockTransport(handler), sleep=sleeps.append)
        with pytest.raises(TransportError):
            backend.chat(req("p"))
        assert len(calls) == 4 and sleeps == [1.0, 2.0, 4.0]

    def test_malformed_body(self):
        backend = HttpBackend("http://x", api_key="k",
                              transport=httpx.MockTransport(lambda r: httpx.Response(200, json={"nope": 1})))
        with pytest.raises(TransportError):
            backend.chat(req("p"))

    def test_credential(self, monkeypatch):
        monkeypatch.delenv("LLM_EXPLORER_API_KEY", raising=False)
        with pytest.raises(MissingCredential):
            HttpBackend("http://x")
        monkeypatch.setenv("LLM_EXPLORER_API_KEY", "secret")
        HttpBackend("http://x").close()


class TestCost:
    def test_empty(self):
        r = cost_report([])
        assert (r.prompt_tokens, r.completion_tokens, r.cost, r.exchanges) == (0, 0, 0.0, 0)

    def test_alien(self):
        r = cost_report([Usage(1_243_650, 897_950)], Pricing.per_million(0.15, 0.60))
        assert r.cost == pytest.approx(0.1865475 + 0.53877, abs=1e-12)
        assert abs(r.cost - 0.73) <= 0.01

    def test_additivity(self):
        a, b = Usage(10, 20), Usage(3, 4)
        r = cost_report([a, {"usage": {"prompt_tokens": 3, "completion_tokens": 4}}])
        assert (r.prompt_tokens, r.completion_tokens) == (13, 24)
        assert r.cost == pytest.approx(a.cost() + b.cost())
