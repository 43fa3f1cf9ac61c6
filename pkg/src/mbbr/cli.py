"""Command-line entry point: ``mbbr <command> [options]``."""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from .agent import MbbrConfig
from .best_response import exploitability
from .harness import (
    SWEEP_PARAMETERS, AgentSpec, DealSchedule, MatchSpec, rows_to_csv, run_duplicate_set, run_match, slot_labels,
    sweep, sweep_to_csv, tournament,
)
from .strategies import AGENT_NAMES, NASH_POINTS, canonical_point, nash_profile, parse_strategies

NASH_TOLERANCE = 1e-9
CSV_COLUMNS = ["agent", "grouping", "winrate_mchips", "stderr", "hands", "seed"]


@dataclass
class RunConfig:
    agents: list[str] = field(default_factory=lambda: ["MBBR", "N1", "calling-station"])
    groupings: list[list[str]] = field(default_factory=list)
    opponents: list[list[str]] = field(default_factory=lambda: [["calling-station", "calling-station"]])
    epsilon: float = 0.05
    k: int = 10
    H: int = 100
    eta: float = 4.0
    prior: str = "informed"
    default_strategy: str = "lower"
    prior_mean: str = "mid"
    hands: int = 3000
    matches: int = 10
    seed: int | None = None
    out: str | None = None
    summary: str | None = None
    threads: int = 1
    duplicate: bool = False
    param: str | None = None
    values: list[float] = field(default_factory=list)

    def mbbr_config(self) -> MbbrConfig:
        return MbbrConfig(
            epsilon=self.epsilon, k=self.k, eta=self.eta, H=self.H, T=max(self.hands, self.H),
            default_profile=nash_profile(canonical_point(self.default_strategy)),
            prior_mean_profile=nash_profile(canonical_point(self.prior_mean)),
            prior_mode=self.prior,
        )

    def spec(self, name: str) -> AgentSpec:
        if name.upper() == "MBBR":
            return AgentSpec("MBBR", self.mbbr_config())
        return AgentSpec(name)


# flag dest -> RunConfig field
_OVERRIDES = {
    "agents": "agents", "grouping": "groupings", "opponents": "opponents", "epsilon": "epsilon", "k": "k",
    "switch_h": "H", "eta": "eta", "prior": "prior", "default_strategy": "default_strategy",
    "prior_mean": "prior_mean", "hands": "hands", "matches": "matches", "seed": "seed", "out": "out",
    "summary": "summary", "threads": "threads", "duplicate": "duplicate", "param": "param", "values": "values",
}


def _csv_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _num_list(text: str) -> list[float]:
    return [float(x) for x in _csv_list(text)]


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    cfg = RunConfig()
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text())
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise SystemExit(f"unknown config keys: {', '.join(sorted(unknown))}")
        for key, value in data.items():
            setattr(cfg, key, value)
    for dest, name in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            setattr(cfg, name, value)
    if cfg.seed is None:
        cfg.seed = secrets.randbits(63)
        print(f"seed: {cfg.seed}", file=sys.stderr)
    return cfg


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# --- commands -------------------------------------------------------------------------

def cmd_verify_nash(args: argparse.Namespace) -> int:
    if args.strategy_file:
        profiles = [(args.strategy_file, parse_strategies(Path(args.strategy_file).read_text()))]
        if len(profiles[0][1]) != 3:
            raise SystemExit("strategy file must cover positions 1, 2 and 3")
    else:
        points = NASH_POINTS if args.all or not args.points else [canonical_point(p) for p in args.points]
        profiles = [(AGENT_NAMES[p] + f" ({p})", nash_profile(p, repaired=args.repaired)) for p in points]
    worst = 0.0
    for name, profile in profiles:
        gains = exploitability(profile)
        worst = max(worst, float(gains.max()))
        status = "ok" if gains.max() <= NASH_TOLERANCE else "EXPLOITABLE"
        print(f"{name}: " + " ".join(f"P{i + 1}={g:.3e}" for i, g in enumerate(gains)) + f"  {status}")
    return 0 if worst <= NASH_TOLERANCE else 1


def cmd_match(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    specs = tuple(cfg.spec(a) for a in cfg.agents)
    if len(specs) != 3:
        raise SystemExit("--agents needs exactly three names")
    labels = slot_labels(specs)
    if cfg.duplicate:
        winrates = run_duplicate_set(specs, cfg.hands, cfg.seed).winrates
    else:
        schedule = DealSchedule.generate(cfg.hands, cfg.seed)
        winrates = run_match(MatchSpec(specs, cfg.hands, cfg.seed), schedule).winrates
    rows = [{"agent": label, "grouping": "+".join(labels), "winrate_mchips": float(w), "stderr": None,
             "hands": cfg.hands, "seed": cfg.seed} for label, w in zip(labels, winrates)]
    _emit(rows_to_csv(rows, CSV_COLUMNS), cfg.out)
    return 0


def cmd_tournament(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    groupings = cfg.groupings or [cfg.agents]
    for g in groupings:
        if len(g) != 3:
            raise SystemExit(f"grouping {g} does not have three agents")
    specs = [[cfg.spec(a) for a in g] for g in groupings]
    result = tournament(specs, cfg.matches, cfg.hands, cfg.seed, workers=cfg.threads)
    _emit(result.to_csv(), cfg.out)
    summary = json.dumps(result.summary(), indent=2) + "\n"
    if cfg.summary:
        Path(cfg.summary).write_text(summary)
    if cfg.out:
        sys.stdout.write(result.table())
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    if cfg.param is None:
        raise SystemExit("--param is required")
    if not cfg.values:
        raise SystemExit("--values must list at least one value")
    rows = sweep(cfg.param, cfg.values, cfg.mbbr_config(), [tuple(p) for p in cfg.opponents], cfg.matches, cfg.hands,
                 cfg.seed, workers=cfg.threads)
    _emit(sweep_to_csv(rows), cfg.out)
    return 0


def cmd_export_deals(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    _emit(DealSchedule.generate(cfg.hands, cfg.seed).to_text(), cfg.out)
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with run settings; flags override it")
    p.add_argument("--seed", type=int, help="master seed (drawn from entropy and printed if omitted)")
    p.add_argument("--hands", type=int, help="hands per match (default 3000)")
    p.add_argument("--out", help="output path (stdout if omitted)")


def _add_mbbr(p: argparse.ArgumentParser) -> None:
    p.add_argument("--matches", type=int, help="duplicate sets per grouping (default 10)")
    p.add_argument("--epsilon", type=float, help="prior rounding threshold (default 0.05)")
    p.add_argument("--k", type=int, help="samples per opponent model (default 10)")
    p.add_argument("--switch-h", dest="switch_h", type=int, help="hands before exploitation (default 100)")
    p.add_argument("--eta", type=float, help="Dirichlet scale (default 4)")
    p.add_argument("--prior", choices=["informed", "uniform2"])
    p.add_argument("--default-strategy", dest="default_strategy", choices=["lower", "mid", "upper"])
    p.add_argument("--prior-mean", dest="prior_mean", choices=["lower", "mid", "upper"])
    p.add_argument("--threads", type=int, help="worker processes")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbbr", description="Bayesian opponent modeling in three-player Kuhn poker")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-nash", help="exploitability of the robust Nash agents or a strategy file")
    p.add_argument("points", nargs="*", help="lower, midpoint, upper (or N1, N3, N2)")
    p.add_argument("--all", action="store_true")
    p.add_argument("--strategy-file", dest="strategy_file")
    p.add_argument("--repaired", action="store_true", help="use the equilibrium-consistent upper point (b32 = 15/16)")
    p.set_defaults(func=cmd_verify_nash)

    p = sub.add_parser("match", help="one match (or one duplicate set) between three agents")
    _add_common(p)
    _add_mbbr(p)
    p.add_argument("--agents", type=_csv_list, help="three comma-separated agent names")
    p.add_argument("--duplicate", action="store_true", default=None, help="play all six seat permutations")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("tournament", help="duplicate-set tournament; CSV per agent and grouping")
    _add_common(p)
    _add_mbbr(p)
    p.add_argument("--agents", type=_csv_list, help="roster for a single grouping")
    p.add_argument("--grouping", type=_csv_list, action="append", help="a grouping of three agents (repeatable)")
    p.add_argument("--summary", help="write the ranked JSON summary here")
    p.set_defaults(func=cmd_tournament)

    p = sub.add_parser("sweep", help="MBBR winrate as one parameter varies")
    _add_common(p)
    _add_mbbr(p)
    p.add_argument("--param", choices=sorted(SWEEP_PARAMETERS))
    p.add_argument("--values", type=_num_list)
    p.add_argument("--opponents", type=_csv_list, action="append", help="two opponents (repeatable)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export-deals", help="write a deal schedule, one deal per line")
    _add_common(p)
    p.set_defaults(func=cmd_export_deals)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
