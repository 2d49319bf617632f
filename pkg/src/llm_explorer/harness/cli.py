"""``llm-explorer`` command line."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..core import RngStream
from ..envs import make_env, optimal_return_oracle, value_iteration
from ..envs.oracle import optimal_actions
from ..errors import LlmExplorerError
from ..explorer.describe import generate_task_description
from ..explorer.pipeline import ExplorerConfig
from ..explorer.prompts import GEN_MODES
from ..neural import Mlp, finite_diff_check
from .config import ALGOS, RunConfig, load_config_file
from .report import export_report
from .runner import build_backend, resolve_model, run_experiment

EXPLORER_KEYS = ("M", "K", "H", "mode", "safeguard", "adaptive_G", "retries", "temperature")
RUN_KEYS = ("env", "algo", "explorer", "llm", "model", "base_url", "record", "steps", "seed", "out",
            "eval_episodes", "max_episodes", "stop_return", "stop_window", "desc_dir", "variant")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of flag values; explicit flags win")
    p.add_argument("--env")
    p.add_argument("--algo", choices=ALGOS)
    p.add_argument("--explorer", choices=("none", "llm"))
    p.add_argument("--llm", help="http | mock:<policy> | replay:<file>")
    p.add_argument("--model")
    p.add_argument("--base-url", dest="base_url")
    p.add_argument("--record", help="append every exchange to this cache file")
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--H", type=int)
    p.add_argument("--mode", choices=("full", "no-summary", "name-only"))
    p.add_argument("--safeguard", choices=("none", "clip-uniform", "clip-old", "self-consistency"))
    p.add_argument("--adaptive-G", dest="adaptive_G", type=float)
    p.add_argument("--retries", type=int)
    p.add_argument("--temperature", type=float)
    p.add_argument("--eval-episodes", dest="eval_episodes", type=int)
    p.add_argument("--max-episodes", dest="max_episodes", type=int)
    p.add_argument("--stop-return", dest="stop_return", type=float)
    p.add_argument("--stop-window", dest="stop_window", type=int)
    p.add_argument("--desc-dir", dest="desc_dir")
    p.add_argument("--variant")
    p.add_argument("--out")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = load_config_file(args.config) if getattr(args, "config", None) else {}
    for key in RUN_KEYS + EXPLORER_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    explorer = {k: values.pop(k) for k in EXPLORER_KEYS if k in values}
    if "explorer_config" in values:
        explorer = {**values.pop("explorer_config"), **explorer}
    if values.get("llm") and "explorer" not in values:
        values["explorer"] = "llm"
    return RunConfig.from_dict({**values, "explorer_config": ExplorerConfig(**explorer)})


def _run_one(config: RunConfig) -> str:
    log = run_experiment(config)
    last = log.records[-1] if log.records else {}
    return (f"{config.run_name}: {len(log.records)} episodes, {last.get('steps', 0)} steps, "
            f"last return {last.get('return', float('nan')):.3f}")


def cmd_run(args) -> int:
    print(_run_one(config_from_args(args)))
    return 0


def cmd_sweep(args) -> int:
    base = config_from_args(args)
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    configs = [dataclasses.replace(base, seed=s) for s in seeds]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            for line in pool.map(_run_one, configs):
                print(line)
    else:
        for c in configs:
            print(_run_one(c))
    return 0


def cmd_report(args) -> int:
    report = export_report(args.dir, baseline=args.baseline, metric=args.metric)
    for line in report.lines():
        print(line)
    for path in report.files.values():
        print(f"wrote {path}")
    return 0


def check_gradients(n_nets: int = 100, seed: int = 0) -> float:
    rng = RngStream(seed, "check-grad")
    worst = 0.0
    for i in range(n_nets):
        depth = int(rng.gen.integers(1, 4))
        sizes = [int(v) for v in rng.gen.integers(1, 9, size=depth + 1)]
        output = "tanh" if rng.random() < 0.3 else "identity"
        net = Mlp(sizes, output=output, rng=rng.child(f"net{i}"))
        worst = max(worst, finite_diff_check(net, rng.child(f"probe{i}")))
    return worst


def cmd_check_grad(args) -> int:
    worst = check_gradients(args.nets, args.seed)
    ok = worst < 1e-4
    print(f"max relative error over {args.nets} nets: {worst:.3e} ({'ok' if ok else 'FAIL'})")
    return 0 if ok else 1


def cmd_gen_desc(args) -> int:
    env = make_env(args.env)
    backend = build_backend(args.llm, env.action_spec, args.base_url, args.record)
    desc = generate_task_description(backend, env.name, args.mode, env_id=env.env_id, directory=args.out_dir,
                                     model=resolve_model(args.llm, args.model))
    print(desc.to_text(), end="")
    print(f"wrote {Path(args.out_dir) / (env.env_id + '.txt')}")
    return 0


def cmd_oracle(args) -> int:
    env = make_env(args.env)
    value = optimal_return_oracle(env)
    q = value_iteration(env, gamma=args.gamma)
    start = env.initial_state_index()
    best = sorted(optimal_actions(q)[start])
    print(json.dumps({"env": env.env_id, "optimal_return": value, "start_state_greedy_actions": best}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="llm-explorer")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="train one configuration")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="train one configuration over several seeds")
    _add_run_flags(p)
    p.add_argument("--seeds", required=True, help="comma separated, e.g. 0,1,2")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="write curves/costs/summary CSVs for a run directory")
    p.add_argument("dir")
    p.add_argument("--baseline")
    p.add_argument("--metric", default="eval_return", choices=("eval_return", "return"))
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("check-grad", help="finite-difference check of backprop on random nets")
    p.add_argument("--nets", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check_grad)

    p = sub.add_parser("gen-desc", help="generate a task description file with the model")
    p.add_argument("--env", required=True)
    p.add_argument("--mode", choices=sorted(GEN_MODES), default="template+one-shot")
    p.add_argument("--llm", required=True)
    p.add_argument("--model")
    p.add_argument("--base-url", dest="base_url")
    p.add_argument("--record")
    p.add_argument("--out-dir", dest="out_dir", default="descriptions")
    p.set_defaults(func=cmd_gen_desc)

    p = sub.add_parser("oracle", help="exact optimal return by dynamic programming")
    p.add_argument("--env", required=True)
    p.add_argument("--gamma", type=float, default=0.99)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except LlmExplorerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
