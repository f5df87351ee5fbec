"""Command line entry point: generate fixture datasets, run simulations,
score trajectories against the rule-based baseline, and serve the protocol."""

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from . import agents, metrics, server
from .dataset import (
    DatasetError,
    SimulationConfig,
    generate_synthetic_dataset,
    load_dataset,
    save_dataset,
)
from .environment import TRACKER_COLUMNS, Environment

TRACKERS_FILE = "trackers.csv"
ACTIONS_FILE = "actions.csv"
SCORE_FILE = "scores.csv"


def _parse_period(text: Optional[str]) -> Optional[Tuple[int, int]]:
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("period must be 'start,end'")
    return int(parts[0]), int(parts[1])


def _make_env(args, central: Optional[bool] = None) -> Environment:
    config = SimulationConfig(data_path=args.data, seed=args.seed)
    dataset = load_dataset(config)
    return Environment(
        dataset,
        simulation_period=getattr(args, "period", None),
        central_agent=args.mode == "central" if central is None else central,
        seed=args.seed,
    )


def _hour_at(env: Environment, t: int) -> int:
    return int(env.buildings[0].load_series.hour[t])


def run_rbc_episode(env: Environment) -> Tuple[List[float], List[List[float]]]:
    """One full episode under the baseline policy; returns (net series, flat actions per step)."""
    policy = agents.RbcPolicy()
    env.reset()
    executed: List[List[float]] = []
    done = False
    while not done:
        acts = policy.act(_hour_at(env, env.clock), env.action_dims)
        if env.central_agent:
            acts = [v for row in acts for v in row]
        result = env.step(acts)
        executed.append(_flatten_executed(result))
        done = result.done
    return list(env.trackers.net_electric_consumption), executed


def _flatten_executed(result) -> List[float]:
    row = []
    for rec in result.info:
        for name in agents_action_order(rec):
            row.append(rec["executed_actions"][name])
    return row


def agents_action_order(info_record) -> List[str]:
    return list(info_record["executed_actions"].keys())


def run_random_episode(env: Environment, seed: int) -> Tuple[List[float], List[List[float]]]:
    agent = agents.RandomAgent(seed)
    env.reset()
    executed = []
    done = False
    while not done:
        acts = agent.act(env.action_dims)
        if env.central_agent:
            acts = [v for row in acts for v in row]
        result = env.step(acts)
        executed.append(_flatten_executed(result))
        done = result.done
    return list(env.trackers.net_electric_consumption), executed


def make_q_agents(env: Environment, seed: int, bins_per_feature: int = 24,
                  alpha: float = 0.3, gamma: float = 0.9) -> Tuple[List[agents.TabularQAgent], List[List[int]]]:
    spaces = env.get_state_action_spaces()
    if env.central_agent:
        raise ValueError("the tabular agent runs in decentralized mode")
    q_agents = []
    feature_idx = []
    for i, (b, space) in enumerate(zip(env.buildings, spaces)):
        idx = agents.default_feature_indices(space["state_names"])
        low = [space["state_low"][j] for j in idx]
        high = [space["state_high"][j] for j in idx]
        bins = []
        for j in idx:
            bins.append(24 if space["state_names"][j] == "hour" else min(bins_per_feature, 6))
        q_agents.append(
            agents.TabularQAgent(
                state_low=low,
                state_high=high,
                state_bins=bins,
                n_action_dims=len(b.enabled_actions),
                alpha=alpha,
                gamma=gamma,
                seed=seed + i,
            )
        )
        feature_idx.append(idx)
    return q_agents, feature_idx


def run_q_learning(
    env: Environment, seed: int, episodes: int, verbose: bool = False
) -> Tuple[List[float], List[List[float]]]:
    """Train per-building tabular agents, then export a final greedy episode."""
    q_agents, feature_idx = make_q_agents(env, seed)
    for ep in range(episodes):
        epsilon = max(0.0, 1.0 - ep / max(episodes - 1, 1))
        for agent in q_agents:
            agent.epsilon = epsilon
        states = env.reset()
        done = False
        total = 0.0
        while not done:
            feats = [
                [s[j] for j in idx] for s, idx in zip(states, feature_idx)
            ]
            choices = [agent.act(f) for agent, f in zip(q_agents, feats)]
            acts = [agent.action_values(c) for agent, c in zip(q_agents, choices)]
            result = env.step(acts)
            next_feats = [
                [s[j] for j in idx] for s, idx in zip(result.states, feature_idx)
            ]
            for agent, f, c, r, nf in zip(q_agents, feats, choices, result.rewards, next_feats):
                agent.learn(f, c, r, nf)
            total += sum(result.rewards)
            states = result.states
            done = result.done
        if verbose:
            print(f"episode {ep + 1}: cumulative reward {total:.3f}", file=sys.stderr)

    for agent in q_agents:
        agent.epsilon = 0.0
    states = env.reset()
    executed = []
    done = False
    while not done:
        feats = [[s[j] for j in idx] for s, idx in zip(states, feature_idx)]
        choices = [agent.act(f, greedy=True) for agent, f in zip(q_agents, feats)]
        acts = [agent.action_values(c) for agent, c in zip(q_agents, choices)]
        result = env.step(acts)
        executed.append(_flatten_executed(result))
        states = result.states
        done = result.done
    return list(env.trackers.net_electric_consumption), executed


def cmd_simulate(args) -> int:
    env = _make_env(args)
    if args.agent == "rbc":
        _, executed = run_rbc_episode(env)
    elif args.agent == "random":
        _, executed = run_random_episode(env, args.seed)
    elif args.agent == "qlearn":
        if env.central_agent:
            print("qlearn requires --mode decentralized", file=sys.stderr)
            return 2
        _, executed = run_q_learning(env, args.seed, args.episodes, verbose=args.verbose)
    else:
        raise ValueError(args.agent)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    env.trackers.to_csv(str(out / TRACKERS_FILE))
    action_names = [
        f"{b.id}:{name}" for b in env.buildings for name in b.enabled_actions
    ]
    with open(out / ACTIONS_FILE, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(action_names)
        for row in executed:
            writer.writerow([repr(v) for v in row])
    if args.verbose:
        total = sum(env.trackers.net_electric_consumption)
        print(f"district net electricity over episode: {total:.3f} kWh")
    return 0


def _read_net_series(path: str) -> List[float]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if "net_electric_consumption" in header:
            col = header.index("net_electric_consumption")
        else:
            col = 0
        return [float(row[col]) for row in reader if row]


def cmd_score(args) -> int:
    if len(args.trajectory) != len(args.data):
        print("need one --data per --trajectory", file=sys.stderr)
        return 2
    metric_names = args.metrics or metrics.CHALLENGE_METRICS
    reports = []
    rows = [["zone", "metric", "raw", "baseline", "score"]]
    for zone, (traj_path, data_path) in enumerate(zip(args.trajectory, args.data), start=1):
        config = SimulationConfig(data_path=data_path, seed=args.seed)
        dataset = load_dataset(config)
        env = Environment(dataset, simulation_period=args.period, seed=args.seed)
        baseline_series, _ = run_rbc_episode(env)
        agent_series = _read_net_series(traj_path)
        if len(agent_series) != len(baseline_series):
            print(
                f"trajectory length {len(agent_series)} does not match period "
                f"length {len(baseline_series)}",
                file=sys.stderr,
            )
            return 2
        start, end = env.period
        months = env.buildings[0].load_series.month[start : end + 1]
        report = metrics.score(agent_series, baseline_series, metric_names, months=months)
        reports.append(report)
        for name in metric_names:
            rows.append(
                [str(zone), name, repr(report.raw[name]), repr(report.baseline[name]),
                 repr(report.normalized[name])]
            )
        rows.append([str(zone), "average_score", "", "", repr(report.average_score)])
    grand = sum(r.average_score for r in reports) / len(reports)
    rows.append(["all", "grand_average", "", "", repr(grand)])

    writer = csv.writer(sys.stdout)
    for row in rows:
        writer.writerow(row)
    if args.out:
        with open(args.out, "w", newline="") as f:
            w = csv.writer(f)
            for row in rows:
                w.writerow(row)
    return 0


def cmd_serve(args) -> int:
    def make_env() -> Environment:
        config = SimulationConfig(data_path=args.data, seed=args.seed)
        dataset = load_dataset(config)
        return Environment(
            dataset,
            simulation_period=args.period,
            central_agent=args.mode == "central",
            seed=args.seed,
        )

    try:
        make_env()  # fail before accepting connections if the dataset is broken
    except DatasetError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return 2

    if args.stdio:
        server.serve_stdio(make_env, log_path=args.log)
        return 0
    host, _, port = args.tcp.rpartition(":")
    host = host or "127.0.0.1"
    try:
        server.serve_tcp(make_env, host=host, port=int(port), log_dir=args.log)
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    return 0


def cmd_gen_dataset(args) -> int:
    dataset = generate_synthetic_dataset(args.buildings, args.hours, args.seed)
    written = save_dataset(dataset, args.out)
    if args.verbose:
        for path in written:
            print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridflex")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one agent over a dataset and export trackers")
    sim.add_argument("--data", required=True)
    sim.add_argument("--agent", choices=["rbc", "random", "qlearn"], default="rbc")
    sim.add_argument("--mode", choices=["central", "decentralized"], default="decentralized")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--episodes", type=int, default=10)
    sim.add_argument("--period", type=_parse_period, default=None)
    sim.add_argument("--out", required=True)
    sim.add_argument("--verbose", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    sc = sub.add_parser("score", help="score trajectories against the rule-based baseline")
    sc.add_argument("--trajectory", action="append", required=True)
    sc.add_argument("--data", action="append", required=True)
    sc.add_argument("--metrics", nargs="*", default=None)
    sc.add_argument("--period", type=_parse_period, default=None)
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--out", default=None)
    sc.set_defaults(func=cmd_score)

    srv = sub.add_parser("serve", help="serve the environment protocol")
    srv.add_argument("--data", required=True)
    srv.add_argument("--mode", choices=["central", "decentralized"], default="decentralized")
    srv.add_argument("--seed", type=int, default=0)
    srv.add_argument("--period", type=_parse_period, default=None)
    srv.add_argument("--tcp", default=None, help="host:port to listen on")
    srv.add_argument("--stdio", action="store_true", help="serve one session on stdin/stdout")
    srv.add_argument("--log", default=None, help="session log path (stdio) or directory (tcp)")
    srv.set_defaults(func=cmd_serve)

    gen = sub.add_parser("gen-dataset", help="write a synthetic fixture dataset")
    gen.add_argument("--buildings", type=int, required=True)
    gen.add_argument("--hours", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--verbose", action="store_true")
    gen.set_defaults(func=cmd_gen_dataset)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve" and not args.stdio and args.tcp is None:
        parser.error("serve requires --stdio or --tcp host:port")
    try:
        return args.func(args)
    except DatasetError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
